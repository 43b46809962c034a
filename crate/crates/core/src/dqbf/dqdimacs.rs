//! Clause form via Tseitin definitions, and the DQDIMACS text format.

use std::collections::HashSet;

use super::{fresh_name, Dqbf, Existential, Lit, Matrix, Var};
use crate::circuit::{GateKind, Ref};
use crate::error::{Error, Result};

/// Equisatisfiable formula with a CNF matrix. Circuit gates and DNF terms get
/// one auxiliary existential each, depending on all universals. Original
/// variables keep their indices; auxiliaries are appended.
pub fn tseitin(phi: &Dqbf) -> Dqbf {
    let mut names = phi.names.clone();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut existentials = phi.existentials.clone();
    let all_universals = phi.universals.clone();
    let mut fresh = |names: &mut Vec<String>, existentials: &mut Vec<Existential>, base: String| -> Var {
        let v = names.len();
        names.push(fresh_name(&base, &mut taken));
        existentials.push(Existential {
            var: v,
            deps: all_universals.clone(),
        });
        v
    };
    let clauses = match &phi.matrix {
        Matrix::Cnf(c) => c.clone(),
        Matrix::Dnf(terms) => {
            let mut clauses = Vec::new();
            let mut top = Vec::with_capacity(terms.len());
            for (i, term) in terms.iter().enumerate() {
                let t = fresh(&mut names, &mut existentials, format!("t{i}"));
                for &l in term {
                    clauses.push(vec![Lit::neg(t), l]);
                }
                top.push(Lit::pos(t));
            }
            clauses.push(top);
            clauses
        }
        Matrix::Circuit(c) => {
            let mut clauses = Vec::new();
            let mut gate_var: Vec<Var> = Vec::with_capacity(c.gates().len());
            let lit = |r: Ref, gate_var: &[Var]| match r {
                Ref::Input { group, bit } => Lit::pos(c.flat_index(group, bit)),
                Ref::Gate(i) => Lit::pos(gate_var[i]),
            };
            for gate in c.gates() {
                let u = fresh(&mut names, &mut existentials, format!("g.{}", gate.id));
                let ops: Vec<Lit> = gate.operands.iter().map(|&r| lit(r, &gate_var)).collect();
                let pu = Lit::pos(u);
                let nu = Lit::neg(u);
                match gate.kind {
                    GateKind::And => {
                        for &a in &ops {
                            clauses.push(vec![nu, a]);
                        }
                        let mut big = vec![pu];
                        big.extend(ops.iter().map(|a| a.negate()));
                        clauses.push(big);
                    }
                    GateKind::Or => {
                        for &a in &ops {
                            clauses.push(vec![pu, a.negate()]);
                        }
                        let mut big = vec![nu];
                        big.extend(ops.iter().copied());
                        clauses.push(big);
                    }
                    GateKind::Not => {
                        let a = ops[0];
                        clauses.push(vec![nu, a.negate()]);
                        clauses.push(vec![pu, a]);
                    }
                    GateKind::Xor => {
                        let (a, b) = (ops[0], ops[1]);
                        clauses.push(vec![nu, a, b]);
                        clauses.push(vec![nu, a.negate(), b.negate()]);
                        clauses.push(vec![pu, a.negate(), b]);
                        clauses.push(vec![pu, a, b.negate()]);
                    }
                    GateKind::Const(v) => clauses.push(vec![if v { pu } else { nu }]),
                }
                gate_var.push(u);
            }
            clauses.push(vec![lit(c.output(), &gate_var)]);
            clauses
        }
    };
    Dqbf {
        names,
        universals: phi.universals.clone(),
        existentials,
        matrix: Matrix::Cnf(clauses),
    }
}

/// Writes the formula in DQDIMACS. Universals are numbered first, then the
/// declared existentials, then Tseitin auxiliaries; every existential gets a
/// `d` line.
pub fn to_dqdimacs(phi: &Dqbf) -> String {
    let cnf = tseitin(phi);
    let mut number = vec![0usize; cnf.num_vars()];
    let mut next = 1;
    for &u in &cnf.universals {
        number[u] = next;
        next += 1;
    }
    for e in &cnf.existentials {
        number[e.var] = next;
        next += 1;
    }
    let clauses = match &cnf.matrix {
        Matrix::Cnf(c) => c,
        _ => unreachable!(),
    };
    let mut out = format!("p cnf {} {}\n", cnf.num_vars(), clauses.len());
    out.push('a');
    for &u in &cnf.universals {
        out.push_str(&format!(" {}", number[u]));
    }
    out.push_str(" 0\n");
    for e in &cnf.existentials {
        let mut deps: Vec<usize> = e.deps.iter().map(|&d| number[d]).collect();
        deps.sort_unstable();
        out.push_str(&format!("d {}", number[e.var]));
        for d in deps {
            out.push_str(&format!(" {d}"));
        }
        out.push_str(" 0\n");
    }
    for c in clauses {
        for l in c {
            let n = number[l.var] as i64;
            out.push_str(&format!("{} ", if l.positive { n } else { -n }));
        }
        out.push_str("0\n");
    }
    out
}

fn parse_ints(toks: &[&str], line: usize) -> Result<Vec<i64>> {
    let vals = toks
        .iter()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::parse(line, format!("expected integer, found `{t}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    match vals.last() {
        Some(0) => Ok(vals[..vals.len() - 1].to_vec()),
        _ => Err(Error::parse(line, "line must end with 0")),
    }
}

/// Parses DQDIMACS (`p`, `c`, `a`, `e`, `d` lines and clauses). An `e`
/// variable depends on every universal declared before it; variables that
/// are never quantified are treated as outermost existentials.
pub fn parse_dqdimacs(text: &str) -> Result<Dqbf> {
    let mut header: Option<(usize, usize)> = None;
    let mut quantified: Vec<Option<bool>> = Vec::new(); // Some(true) universal
    let mut universals: Vec<Var> = Vec::new();
    let mut existentials: Vec<Existential> = Vec::new();
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() || toks[0] == "c" {
            continue;
        }
        if toks[0] == "p" {
            if header.is_some() {
                return Err(Error::parse(line, "duplicate header"));
            }
            if toks.len() != 4 || toks[1] != "cnf" {
                return Err(Error::parse(line, "expected `p cnf <vars> <clauses>`"));
            }
            let v = toks[2].parse().map_err(|_| Error::parse(line, "bad variable count"))?;
            let c = toks[3].parse().map_err(|_| Error::parse(line, "bad clause count"))?;
            header = Some((v, c));
            quantified = vec![None; v];
            continue;
        }
        let (nv, _) = header.ok_or_else(|| Error::parse(line, "missing `p cnf` header"))?;
        let check_var = |n: i64| -> Result<Var> {
            if n <= 0 || n as usize > nv {
                Err(Error::parse(line, format!("variable {n} out of range")))
            } else {
                Ok(n as usize - 1)
            }
        };
        match toks[0] {
            "a" | "e" | "d" => {
                if !clauses.is_empty() {
                    return Err(Error::parse(line, "quantifier line after clauses"));
                }
                let vals = parse_ints(&toks[1..], line)?;
                let mut mark = |v: Var, universal: bool| -> Result<()> {
                    if quantified[v].replace(universal).is_some() {
                        return Err(Error::parse(line, format!("variable {} quantified twice", v + 1)));
                    }
                    Ok(())
                };
                match toks[0] {
                    "a" => {
                        for n in vals {
                            let v = check_var(n)?;
                            mark(v, true)?;
                            universals.push(v);
                        }
                    }
                    "e" => {
                        for n in vals {
                            let v = check_var(n)?;
                            mark(v, false)?;
                            existentials.push(Existential {
                                var: v,
                                deps: universals.clone(),
                            });
                        }
                    }
                    _ => {
                        let (&first, rest) = vals.split_first().ok_or_else(|| Error::parse(line, "empty `d` line"))?;
                        let v = check_var(first)?;
                        mark(v, false)?;
                        let mut deps = Vec::with_capacity(rest.len());
                        for &d in rest {
                            let dv = check_var(d)?;
                            if quantified[dv] != Some(true) {
                                return Err(Error::parse(line, format!("dependency {d} is not a universal")));
                            }
                            deps.push(dv);
                        }
                        existentials.push(Existential { var: v, deps });
                    }
                }
            }
            _ => {
                let vals = parse_ints(&toks, line)?;
                let mut clause = Vec::with_capacity(vals.len());
                for n in vals {
                    let v = check_var(n.abs())?;
                    clause.push(Lit::new(v, n > 0));
                }
                clauses.push(clause);
            }
        }
    }
    let (nv, nc) = header.ok_or_else(|| Error::parse(last_line.max(1), "missing `p cnf` header"))?;
    if clauses.len() != nc {
        return Err(Error::parse(
            last_line,
            format!("header declares {nc} clauses, found {}", clauses.len()),
        ));
    }
    for (v, q) in quantified.iter().enumerate() {
        if q.is_none() {
            existentials.push(Existential { var: v, deps: vec![] });
        }
    }
    let names = (1..=nv).map(|i| format!("v{i}")).collect();
    Dqbf::new(names, universals, existentials, Matrix::Cnf(clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dqbf::{solve_bruteforce, DEFAULT_BUDGET};

    fn equiv() -> Dqbf {
        Dqbf::new(
            vec!["x".into(), "y".into()],
            vec![0],
            vec![Existential { var: 1, deps: vec![0] }],
            Matrix::Dnf(vec![vec![Lit::pos(0), Lit::pos(1)], vec![Lit::neg(0), Lit::neg(1)]]),
        )
        .unwrap()
    }

    #[test]
    fn equivalence_emission_shape() {
        let text = to_dqdimacs(&equiv());
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("p cnf "));
        assert_eq!(lines[1], "a 1 0");
        assert_eq!(lines[2], "d 2 1 0");
        let back = parse_dqdimacs(&text).unwrap();
        assert!(solve_bruteforce(&back, DEFAULT_BUDGET).unwrap().is_sat());
    }

    #[test]
    fn parser_rejects_bad_input() {
        assert!(matches!(parse_dqdimacs("a 1 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_dqdimacs("p cnf 2 1\na 1 0\nd 2 1 0\n1 3 0\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(matches!(
            parse_dqdimacs("p cnf 2 2\na 1 0\nd 2 1 0\n1 2 0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_dqdimacs("p cnf 2 0\na 1 0\nd 2 2 0\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn e_lines_depend_on_preceding_universals() {
        let phi = parse_dqdimacs("c comment\np cnf 3 1\na 1 0\ne 2 0\na 3 0\n2 -1 0\n").unwrap();
        assert_eq!(phi.existentials()[0].deps, vec![0]);
        assert_eq!(phi.universals(), &[0, 2]);
    }
}
