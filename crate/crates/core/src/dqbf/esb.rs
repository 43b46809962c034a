//! Quantified boolean formulas with leading existential function
//! quantifiers: `exists f1..fk Q1 v1 .. Qn vn psi`.
//!
//! The matrix is a circuit whose flat input bit `i` reads `leaves[i]`: either
//! a first-order variable or an application `f(z)` of a function symbol to
//! prefix variables.

use std::collections::HashSet;

use super::{fresh_name, Dqbf, Existential, SkolemTable};
use crate::circuit::{to_bits, Circuit, CircuitBuilder, Ref};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSymbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Leaf {
    Var(usize),
    App { func: usize, args: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Esb {
    functions: Vec<FunctionSymbol>,
    vars: Vec<String>,
    prefix: Vec<(Quantifier, usize)>,
    matrix: Circuit,
    leaves: Vec<Leaf>,
}

impl Esb {
    /// Validates arities and that the prefix quantifies every variable once.
    pub fn new(
        functions: Vec<FunctionSymbol>,
        vars: Vec<String>,
        prefix: Vec<(Quantifier, usize)>,
        matrix: Circuit,
        leaves: Vec<Leaf>,
    ) -> Result<Self> {
        let mut seen = vec![false; vars.len()];
        for &(_, v) in &prefix {
            if v >= vars.len() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Malformed(format!("prefix variable {v} undeclared or repeated")));
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Malformed(format!("variable `{}` is not quantified", vars[v])));
        }
        if leaves.len() != matrix.input_width() {
            return Err(Error::Malformed(format!(
                "{} leaves for a matrix with {} inputs",
                leaves.len(),
                matrix.input_width()
            )));
        }
        for leaf in &leaves {
            match leaf {
                Leaf::Var(v) if *v >= vars.len() => {
                    return Err(Error::Malformed(format!("leaf reads undeclared variable {v}")))
                }
                Leaf::App { func, args } => {
                    let f = functions
                        .get(*func)
                        .ok_or_else(|| Error::Malformed(format!("unknown function symbol {func}")))?;
                    if f.arity != args.len() {
                        return Err(Error::Malformed(format!(
                            "`{}` has arity {} but is applied to {} arguments",
                            f.name,
                            f.arity,
                            args.len()
                        )));
                    }
                    if args.iter().any(|&a| a >= vars.len()) {
                        return Err(Error::Malformed(format!(
                            "argument of `{}` is not a prefix variable",
                            f.name
                        )));
                    }
                }
                Leaf::Var(_) => {}
            }
        }
        Ok(Esb {
            functions,
            vars,
            prefix,
            matrix,
            leaves,
        })
    }

    pub fn functions(&self) -> &[FunctionSymbol] {
        &self.functions
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn prefix(&self) -> &[(Quantifier, usize)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &Circuit {
        &self.matrix
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn is_universal_prefix(&self) -> bool {
        self.prefix.iter().all(|(q, _)| *q == Quantifier::Forall)
    }

    /// Evaluates the matrix for variable values and function tables.
    pub fn eval_matrix(&self, vals: &[bool], tables: &[SkolemTable], scratch: &mut Vec<bool>) -> bool {
        let inputs: Vec<bool> = self
            .leaves
            .iter()
            .map(|leaf| match leaf {
                Leaf::Var(v) => vals[*v],
                Leaf::App { func, args } => {
                    let idx = args.iter().fold(0usize, |acc, &a| (acc << 1) | vals[a] as usize);
                    tables[*func].get(idx)
                }
            })
            .collect();
        self.matrix.eval_with(&inputs, scratch)
    }

    /// Truth of the first-order part under fixed function tables.
    pub fn eval_with_tables(&self, tables: &[SkolemTable]) -> bool {
        let mut vals = vec![false; self.vars.len()];
        let mut scratch = Vec::new();
        self.eval_prefix(0, &mut vals, tables, &mut scratch)
    }

    fn eval_prefix(&self, at: usize, vals: &mut Vec<bool>, tables: &[SkolemTable], scratch: &mut Vec<bool>) -> bool {
        let Some(&(q, v)) = self.prefix.get(at) else {
            return self.eval_matrix(vals, tables, scratch);
        };
        let mut branch = |b: bool, vals: &mut Vec<bool>| {
            vals[v] = b;
            self.eval_prefix(at + 1, vals, tables, scratch)
        };
        match q {
            Quantifier::Forall => branch(false, vals) && branch(true, vals),
            Quantifier::Exists => branch(false, vals) || branch(true, vals),
        }
    }
}

/// Decides the formula by enumerating all function tables in lexicographic
/// order (first function's entry 0 most significant) and evaluating the QBF
/// for each. Returns the first satisfying tables.
pub fn esb_bruteforce(phi: &Esb, budget: u64) -> Result<Option<Vec<SkolemTable>>> {
    let total_bits: usize = phi.functions.iter().map(|f| 1usize << f.arity.min(63)).sum();
    if total_bits >= 64 || (1u64 << total_bits) > budget {
        return Err(Error::Capacity(format!(
            "2^{total_bits} function tables exceed the budget"
        )));
    }
    for combo in 0..1u64 << total_bits {
        let bits = to_bits(combo, total_bits);
        let mut tables = Vec::with_capacity(phi.functions.len());
        let mut at = 0;
        for f in &phi.functions {
            let len = 1usize << f.arity;
            tables.push(SkolemTable::new(bits[at..at + len].to_vec()));
            at += len;
        }
        if phi.eval_with_tables(&tables) {
            return Ok(Some(tables));
        }
    }
    Ok(None)
}

/// Each existential becomes a function of its dependency set; the prefix is
/// the universals in declared order.
pub fn dqbf_to_esb(phi: &Dqbf) -> Esb {
    let mut upos = vec![usize::MAX; phi.num_vars()];
    for (i, &u) in phi.universals().iter().enumerate() {
        upos[u] = i;
    }
    let mut epos = vec![usize::MAX; phi.num_vars()];
    for (i, e) in phi.existentials().iter().enumerate() {
        epos[e.var] = i;
    }
    let functions = phi
        .existentials()
        .iter()
        .map(|e| FunctionSymbol {
            name: phi.name(e.var).to_string(),
            arity: e.deps.len(),
        })
        .collect();
    let vars = phi.universals().iter().map(|&u| phi.name(u).to_string()).collect();
    let prefix = (0..phi.universals().len()).map(|i| (Quantifier::Forall, i)).collect();
    let leaves = (0..phi.num_vars())
        .map(|v| {
            if upos[v] != usize::MAX {
                Leaf::Var(upos[v])
            } else {
                let e = &phi.existentials()[epos[v]];
                Leaf::App {
                    func: epos[v],
                    args: e.deps.iter().map(|&d| upos[d]).collect(),
                }
            }
        })
        .collect();
    Esb::new(functions, vars, prefix, phi.matrix_circuit(), leaves).expect("well-formed by construction")
}

/// Splits a flat ref list into the group layout of `c`.
pub(crate) fn split_by_groups(c: &Circuit, flat: &[Ref]) -> Vec<Vec<Ref>> {
    let mut out = Vec::with_capacity(c.groups().len());
    let mut at = 0;
    for g in c.groups() {
        out.push(flat[at..at + g.width].to_vec());
        at += g.width;
    }
    out
}

/// First-order existentials depend on the universals before them; every
/// distinct function application becomes its own existential depending on
/// its arguments, and applications of the same symbol are tied together by
/// `args equal -> values equal`. Repeated identical applications share one
/// existential.
pub fn esb_to_dqbf(phi: &Esb) -> Result<Dqbf> {
    let mut names = Vec::new();
    let mut map = vec![usize::MAX; phi.vars.len()];
    let mut universals = Vec::new();
    let mut existentials = Vec::new();
    for &(q, v) in &phi.prefix {
        let dv = names.len();
        names.push(phi.vars[v].clone());
        map[v] = dv;
        match q {
            Quantifier::Forall => universals.push(dv),
            Quantifier::Exists => existentials.push(Existential {
                var: dv,
                deps: universals.clone(),
            }),
        }
    }
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    // identical applications share one existential
    let mut occurrence_var = vec![usize::MAX; phi.leaves.len()];
    let mut distinct: Vec<(usize, usize, &Vec<usize>)> = Vec::new();
    for (i, leaf) in phi.leaves.iter().enumerate() {
        if let Leaf::App { func, args } = leaf {
            if let Some(&(_, dv, _)) = distinct
                .iter()
                .find(|&&(j, _, a)| matches!(&phi.leaves[j], Leaf::App { func: f, .. } if f == func) && a == args)
            {
                occurrence_var[i] = dv;
                continue;
            }
            let mut deps = Vec::new();
            for &a in args {
                let da = map[a];
                if !universals.contains(&da) {
                    return Err(Error::Malformed(format!(
                        "argument `{}` of `{}` is not a universal variable",
                        phi.vars[a], phi.functions[*func].name
                    )));
                }
                if !deps.contains(&da) {
                    deps.push(da);
                }
            }
            let dv = names.len();
            names.push(fresh_name(&format!("{}#{i}", phi.functions[*func].name), &mut taken));
            existentials.push(Existential { var: dv, deps });
            occurrence_var[i] = dv;
            distinct.push((i, dv, args));
        }
    }
    let mut b = CircuitBuilder::new("esb");
    let v = b.input("v", names.len())?;
    let leaf_refs: Vec<Ref> = phi
        .leaves
        .iter()
        .enumerate()
        .map(|(i, leaf)| match leaf {
            Leaf::Var(x) => v[map[*x]],
            Leaf::App { .. } => v[occurrence_var[i]],
        })
        .collect();
    let body = b.embed(&phi.matrix, &split_by_groups(&phi.matrix, &leaf_refs))?;
    let mut conj = vec![body];
    for (k, &(i, _, ai)) in distinct.iter().enumerate() {
        for &(j, _, aj) in &distinct[k + 1..] {
            let (Leaf::App { func: f, .. }, Leaf::App { func: g, .. }) = (&phi.leaves[i], &phi.leaves[j]) else {
                unreachable!()
            };
            if f != g {
                continue;
            }
            let za: Vec<Ref> = ai.iter().map(|&a| v[map[a]]).collect();
            let zb: Vec<Ref> = aj.iter().map(|&a| v[map[a]]).collect();
            let same = b.eq_bits(&za, &zb);
            let agree = b.iff(v[occurrence_var[i]], v[occurrence_var[j]]);
            conj.push(b.implies(same, agree));
        }
    }
    let out = b.and(conj);
    Dqbf::new(names, universals, existentials, super::Matrix::Circuit(b.finish(out)))
}

/// Single-function, universal-prefix form with the same truth value.
///
/// First-order existentials are Skolemized into new function symbols over
/// the universals before them. Several functions `f_1..f_p` are merged into
/// one function of arity `max arity + ceil(log2 p)` whose leading selector
/// bits name the original symbol; two fresh universals `e0`, `e1` supply the
/// constant bits and the matrix is guarded by `(NOT e0 AND e1) -> psi`.
/// Without functions a nullary dummy symbol is added.
pub fn normalize_esb(phi: &Esb) -> Result<Esb> {
    // Skolemize first-order existentials
    let mut functions = phi.functions.clone();
    let mut fnames: HashSet<String> = functions.iter().map(|f| f.name.clone()).collect();
    let mut vars = Vec::new();
    let mut newpos = vec![usize::MAX; phi.vars.len()];
    let mut skolem: Vec<Option<(usize, Vec<usize>)>> = vec![None; phi.vars.len()];
    let mut prefix_universals = Vec::new();
    for &(q, v) in &phi.prefix {
        match q {
            Quantifier::Forall => {
                newpos[v] = vars.len();
                prefix_universals.push(vars.len());
                vars.push(phi.vars[v].clone());
            }
            Quantifier::Exists => {
                let name = fresh_name(&format!("sk_{}", phi.vars[v]), &mut fnames);
                functions.push(FunctionSymbol {
                    name,
                    arity: prefix_universals.len(),
                });
                skolem[v] = Some((functions.len() - 1, prefix_universals.clone()));
            }
        }
    }
    let mut leaves = Vec::with_capacity(phi.leaves.len());
    for leaf in &phi.leaves {
        leaves.push(match leaf {
            Leaf::Var(v) => match &skolem[*v] {
                Some((f, args)) => Leaf::App {
                    func: *f,
                    args: args.clone(),
                },
                None => Leaf::Var(newpos[*v]),
            },
            Leaf::App { func, args } => {
                if let Some(&a) = args.iter().find(|&&a| newpos[a] == usize::MAX) {
                    return Err(Error::Malformed(format!(
                        "argument `{}` of `{}` is not a universal variable",
                        phi.vars[a], phi.functions[*func].name
                    )));
                }
                Leaf::App {
                    func: *func,
                    args: args.iter().map(|&a| newpos[a]).collect(),
                }
            }
        });
    }
    let prefix: Vec<(Quantifier, usize)> = (0..vars.len()).map(|i| (Quantifier::Forall, i)).collect();

    match functions.len() {
        0 => {
            let name = fresh_name("f", &mut fnames);
            Esb::new(
                vec![FunctionSymbol { name, arity: 0 }],
                vars,
                prefix,
                phi.matrix.clone(),
                leaves,
            )
        }
        1 => Esb::new(functions, vars, prefix, phi.matrix.clone(), leaves),
        p => {
            let sel = usize::BITS as usize - (p - 1).leading_zeros() as usize;
            let width = functions.iter().map(|f| f.arity).max().unwrap_or(0);
            let mut vnames: HashSet<String> = vars.iter().cloned().collect();
            let e0 = vars.len();
            vars.push(fresh_name("e0", &mut vnames));
            let e1 = vars.len();
            vars.push(fresh_name("e1", &mut vnames));
            let mut prefix = vec![(Quantifier::Forall, e0), (Quantifier::Forall, e1)];
            prefix.extend((0..e0).map(|i| (Quantifier::Forall, i)));

            let mut merged = vec![Leaf::Var(e0), Leaf::Var(e1)];
            for leaf in leaves {
                merged.push(match leaf {
                    Leaf::App { func, args } => {
                        let mut a: Vec<usize> = to_bits(func as u64, sel)
                            .into_iter()
                            .map(|bit| if bit { e1 } else { e0 })
                            .collect();
                        a.extend(args.iter().copied());
                        a.resize(sel + width, e0);
                        Leaf::App { func: 0, args: a }
                    }
                    other => other,
                });
            }
            let mut b = CircuitBuilder::new(phi.matrix.name());
            let g = b.input("l", merged.len())?;
            let body = b.embed(&phi.matrix, &split_by_groups(&phi.matrix, &g[2..]))?;
            let ne0 = b.not(g[0]);
            let guard = b.and([ne0, g[1]]);
            let out = b.implies(guard, body);
            let name = fresh_name("f", &mut fnames);
            Esb::new(
                vec![FunctionSymbol {
                    name,
                    arity: sel + width,
                }],
                vars,
                prefix,
                b.finish(out),
                merged,
            )
        }
    }
}
