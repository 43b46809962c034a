//! Encodings between first-order sentences, ESB formulas and projections.

use std::collections::{HashMap, HashSet};

use super::{split_prenex, Formula, Signature, Term};
use crate::circuit::{Circuit, CircuitBuilder, GateKind, Ref};
use crate::dqbf::esb::{Esb, FunctionSymbol, Leaf, Quantifier};
use crate::dqbf::fresh_name;
use crate::error::{Error, Result};
use crate::reductions::{ceil_log2, projection_builder, ProjectionCircuit};

/// Renames free occurrences of `from` in a quantifier-free formula.
fn rename(f: &Formula, from: &str, to: &str) -> Formula {
    let r = |v: &String| if v == from { to.to_string() } else { v.clone() };
    let term = |t: &Term| match t {
        Term::Var(v) => Term::Var(r(v)),
        Term::App(g, args) => Term::App(g.clone(), args.iter().map(r).collect()),
    };
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Pred(p, args) => Formula::Pred(p.clone(), args.iter().map(r).collect()),
        Formula::Eq(s, t) => Formula::Eq(term(s), term(t)),
        Formula::Not(a) => Formula::not(rename(a, from, to)),
        Formula::And(v) => Formula::And(v.iter().map(|x| rename(x, from, to)).collect()),
        Formula::Or(v) => Formula::Or(v.iter().map(|x| rename(x, from, to)).collect()),
        Formula::Implies(a, b) => Formula::implies(rename(a, from, to), rename(b, from, to)),
        Formula::Iff(a, b) => Formula::iff(rename(a, from, to), rename(b, from, to)),
        Formula::Forall(..) | Formula::Exists(..) => unreachable!("quantifier-free input"),
    }
}

fn close(prefix: &[(bool, String)], matrix: Formula) -> Formula {
    prefix.iter().rev().fold(matrix, |body, (forall, x)| {
        if *forall {
            Formula::forall(x, body)
        } else {
            Formula::exists(x, body)
        }
    })
}

/// Removes existential quantifiers from a prenex sentence. The leftmost
/// `exists x_i` is dropped, a fresh universal `z` is appended to the prefix
/// and the matrix becomes `z = g(x_1..x_{i-1}) -> psi[x_i := z]`; this
/// repeats until the prefix is universal. A sentence starting with `exists`
/// first gets a dummy leading universal, which `g` does not take as an
/// argument.
pub fn skolemize(phi: &Formula) -> Result<Formula> {
    let (prefix, matrix) = split_prenex(phi)?;
    if prefix.iter().all(|(forall, _)| *forall) {
        return Ok(phi.clone());
    }
    let mut taken = HashSet::new();
    phi.all_names(&mut taken);
    let mut prefix = prefix;
    let mut dummy = None;
    if !prefix[0].0 {
        let x0 = fresh_name("x0", &mut taken);
        prefix.insert(0, (true, x0.clone()));
        dummy = Some(x0);
    }
    let mut matrix = matrix.clone();
    while let Some(i) = prefix.iter().position(|(forall, _)| !forall) {
        let (_, x) = prefix.remove(i);
        let args: Vec<String> = prefix[..i]
            .iter()
            .map(|(_, v)| v.clone())
            .filter(|v| Some(v) != dummy.as_ref())
            .collect();
        let z = fresh_name("z", &mut taken);
        let g = fresh_name("g", &mut taken);
        matrix = Formula::implies(
            Formula::Eq(Term::Var(z.clone()), Term::App(g, args)),
            rename(&matrix, &x, &z),
        );
        prefix.push((true, z));
    }
    Ok(close(&prefix, matrix))
}

/// Fragments with the exponential-size-model property.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FragmentClass {
    /// Bernays-Schoenfinkel-Ramsey with `m` existential quantifiers.
    Bsr { m: u64 },
    /// Two-variable Scott normal form with `m` conjuncts over `n` unary predicates.
    Fo2Scott { m: u64, n: u32 },
    /// Monadic sentences of quantifier rank `r` over `n` unary predicates.
    Monadic { r: u64, n: u32 },
}

/// Domain size that suffices for a model of a satisfiable sentence of the class.
pub fn esm_bound(cls: FragmentClass) -> u64 {
    let pow = |n: u32| 1u64.checked_shl(n).unwrap_or(u64::MAX);
    match cls {
        FragmentClass::Bsr { m } => m.saturating_add(1),
        FragmentClass::Fo2Scott { m, n } => m.saturating_mul(pow(n)),
        FragmentClass::Monadic { r, n } => r.saturating_mul(pow(n)),
    }
}

struct EsbBuilder {
    b: CircuitBuilder,
    leaves: Vec<Leaf>,
    refs: HashMap<Leaf, Ref>,
}

impl EsbBuilder {
    fn leaf(&mut self, leaf: Leaf) -> Ref {
        if let Some(&r) = self.refs.get(&leaf) {
            return r;
        }
        let r = self
            .b
            .input(&format!("l{}", self.leaves.len()), 1)
            .expect("fresh group")[0];
        self.leaves.push(leaf.clone());
        self.refs.insert(leaf, r);
        r
    }

    fn vars(&mut self, bits: &[usize]) -> Vec<Ref> {
        bits.iter().map(|&v| self.leaf(Leaf::Var(v))).collect()
    }
}

/// Bounded satisfiability as an ESB formula.
///
/// Each first-order variable becomes a block of `t = max(1, ceil(log N))`
/// boolean universals, so the domain is a subset of `{0,1}^t` selected by
/// `f0`, which must contain `0^t`. A Skolem symbol `g` becomes `t` functions
/// giving the bits of its value and a predicate `P` becomes one function
/// `f_P`. Besides the two conjuncts guarding the matrix, every atom
/// `z = g(args)` contributes `(f0(args) AND z = F_g(args)) -> f0(z)`, which
/// keeps Skolem values inside the domain. For `N = 1` the domain is pinned
/// to `{0^t}`. The result is satisfiable iff the sentence has a model with
/// at most `2^ceil(log N)` elements.
pub fn bsatfo_to_esb(phi: &Formula, n: u64) -> Result<Esb> {
    if n == 0 {
        return Err(Error::InvalidParameter("domain bound must be positive".into()));
    }
    let (prefix, matrix) = split_prenex(phi)?;
    if prefix.iter().any(|(forall, _)| !forall) {
        return Err(Error::NotNormalForm("prefix must be universal; skolemize first".into()));
    }
    let sig = Signature::of(phi)?;
    let mut fo_vars: Vec<String> = prefix.into_iter().map(|(_, x)| x).collect();
    if let Some(v) = matrix.free_vars().into_iter().find(|v| !fo_vars.contains(v)) {
        return Err(Error::Malformed(format!("free variable `{v}`")));
    }
    let mut taken = HashSet::new();
    phi.all_names(&mut taken);
    if fo_vars.is_empty() {
        fo_vars.push(fresh_name("x", &mut taken));
    }
    let t = ceil_log2(n).max(1);

    let mut vars = Vec::new();
    let mut blocks: HashMap<&str, Vec<usize>> = HashMap::new();
    for x in &fo_vars {
        let block: Vec<usize> = (0..t).map(|k| vars.len() + k).collect();
        vars.extend((0..t).map(|k| format!("{x}[{k}]")));
        blocks.insert(x, block);
    }

    let mut fnames = HashSet::new();
    let mut functions = vec![FunctionSymbol {
        name: fresh_name("f0", &mut fnames),
        arity: t,
    }];
    let mut skolem: HashMap<&str, Vec<usize>> = HashMap::new();
    for (g, &ar) in &sig.functions {
        let ids = (1..=t)
            .map(|k| {
                functions.push(FunctionSymbol {
                    name: fresh_name(&format!("f_{g}_{k}"), &mut fnames),
                    arity: t * ar,
                });
                functions.len() - 1
            })
            .collect();
        skolem.insert(g, ids);
    }
    let mut preds: HashMap<&str, usize> = HashMap::new();
    for (p, &ar) in &sig.predicates {
        functions.push(FunctionSymbol {
            name: fresh_name(&format!("f_{p}"), &mut fnames),
            arity: t * ar,
        });
        preds.insert(p, functions.len() - 1);
    }

    let mut eb = EsbBuilder {
        b: CircuitBuilder::new("bsatfo"),
        leaves: Vec::new(),
        refs: HashMap::new(),
    };
    let in_domain = |eb: &mut EsbBuilder, x: &str| -> Ref {
        let args = blocks[x].clone();
        eb.leaf(Leaf::App { func: 0, args })
    };
    let args_of = |xs: &[String]| -> Vec<usize> { xs.iter().flat_map(|x| blocks[x.as_str()].clone()).collect() };

    let u1 = eb.vars(&blocks[fo_vars[0].as_str()]);
    let is_zero = eb.b.eq_const(&u1, 0);
    let f0_u1 = in_domain(&mut eb, &fo_vars[0]);
    let nonempty = eb.b.implies(is_zero, f0_u1);
    // N = 1 still uses one bit; only 0^t may be an element
    let singleton = if n == 1 {
        let outside = eb.b.not(f0_u1);
        eb.b.or([is_zero, outside])
    } else {
        eb.b.constant(true)
    };

    let mut closures = Vec::new();
    let body = translate(
        matrix,
        &mut eb,
        &mut |eb, z, g, xs| {
            let u_z = eb.vars(&blocks[z]);
            let args = args_of(xs);
            let value: Vec<Ref> = skolem[g]
                .iter()
                .map(|&f| {
                    eb.leaf(Leaf::App {
                        func: f,
                        args: args.clone(),
                    })
                })
                .collect();
            let eq = eb.b.eq_bits(&u_z, &value);
            let mut guard: Vec<Ref> = xs.iter().map(|x| in_domain(eb, x)).collect();
            guard.push(eq);
            let premise = eb.b.and(guard);
            let target = in_domain(eb, z);
            closures.push(eb.b.implies(premise, target));
            eq
        },
        &|eb, p, xs| {
            let args = args_of(xs);
            eb.leaf(Leaf::App { func: preds[p], args })
        },
        &|eb, a, b| {
            let (ua, ub) = (eb.vars(&blocks[a]), eb.vars(&blocks[b]));
            eb.b.eq_bits(&ua, &ub)
        },
    )?;
    let guard: Vec<Ref> = fo_vars.iter().map(|x| in_domain(&mut eb, x)).collect();
    let guard = eb.b.and(guard);
    let guarded = eb.b.implies(guard, body);
    let mut conj = vec![nonempty, singleton, guarded];
    conj.extend(closures);
    let out = eb.b.and(conj);

    let prefix = (0..vars.len()).map(|i| (Quantifier::Forall, i)).collect();
    Esb::new(functions, vars, prefix, eb.b.finish(out), eb.leaves)
}

type SkolemAtom<'a> = dyn FnMut(&mut EsbBuilder, &str, &str, &[String]) -> Ref + 'a;
type PredAtom<'a> = dyn Fn(&mut EsbBuilder, &str, &[String]) -> Ref + 'a;
type EqAtom<'a> = dyn Fn(&mut EsbBuilder, &str, &str) -> Ref + 'a;

fn translate(f: &Formula, eb: &mut EsbBuilder, skolem: &mut SkolemAtom, pred: &PredAtom, eq: &EqAtom) -> Result<Ref> {
    Ok(match f {
        Formula::True => eb.b.constant(true),
        Formula::False => eb.b.constant(false),
        Formula::Pred(p, xs) => pred(eb, p, xs),
        Formula::Eq(Term::Var(a), Term::Var(b)) => eq(eb, a, b),
        Formula::Eq(Term::Var(z), Term::App(g, xs)) | Formula::Eq(Term::App(g, xs), Term::Var(z)) => {
            skolem(eb, z, g, xs)
        }
        Formula::Eq(Term::App(..), Term::App(..)) => {
            return Err(Error::NotNormalForm(
                "Skolem symbols may only be compared with a variable".into(),
            ))
        }
        Formula::Not(a) => {
            let a = translate(a, eb, skolem, pred, eq)?;
            eb.b.not(a)
        }
        Formula::And(v) | Formula::Or(v) => {
            let parts = v
                .iter()
                .map(|x| translate(x, eb, skolem, pred, eq))
                .collect::<Result<Vec<_>>>()?;
            if matches!(f, Formula::And(_)) {
                eb.b.and(parts)
            } else {
                eb.b.or(parts)
            }
        }
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            let a = translate(a, eb, skolem, pred, eq)?;
            let c = translate(b, eb, skolem, pred, eq)?;
            if matches!(f, Formula::Implies(..)) {
                eb.b.implies(a, c)
            } else {
                eb.b.iff(a, c)
            }
        }
        Formula::Forall(..) | Formula::Exists(..) => unreachable!("matrix is quantifier-free"),
    })
}

/// Expands a circuit into a formula, reading flat input `i` as `inputs[i]`.
/// Shared gates are copied, so the result can be larger than the circuit.
pub fn circuit_to_formula(c: &Circuit, inputs: &[Formula]) -> Result<Formula> {
    if inputs.len() != c.input_width() {
        return Err(Error::InputArity(format!(
            "{} formulas for {} circuit inputs",
            inputs.len(),
            c.input_width()
        )));
    }
    let mut done: Vec<Formula> = Vec::with_capacity(c.gates().len());
    let get = |r: Ref, done: &[Formula]| match r {
        Ref::Input { group, bit } => inputs[c.flat_index(group, bit)].clone(),
        Ref::Gate(g) => done[g].clone(),
    };
    for gate in c.gates() {
        let ops: Vec<Formula> = gate.operands.iter().map(|&r| get(r, &done)).collect();
        let f = match gate.kind {
            GateKind::Const(true) => Formula::True,
            GateKind::Const(false) => Formula::False,
            GateKind::And => Formula::And(ops),
            GateKind::Or => Formula::Or(ops),
            GateKind::Not => Formula::not(ops.into_iter().next().expect("NOT has one operand")),
            GateKind::Xor => ops
                .into_iter()
                .reduce(|a, b| Formula::not(Formula::iff(a, b)))
                .unwrap_or(Formula::False),
        };
        done.push(f);
    }
    Ok(get(c.output(), &done))
}

/// Two-element BSR sentence for a universal-prefix ESB formula:
/// `exists x0 x1 forall y.. (x0 != x1 AND (y = x0 OR y = x1).. AND psi')`
/// where a boolean variable `v` reads as `y_v = x1` and `f(z)` as the
/// predicate `P_f(y_z)`.
pub fn esb_to_bsr(phi: &Esb) -> Result<Formula> {
    if !phi.is_universal_prefix() {
        return Err(Error::NotNormalForm("ESB prefix must be universal".into()));
    }
    let mut taken: HashSet<String> = phi.vars().iter().cloned().collect();
    let x0 = fresh_name("x0", &mut taken);
    let x1 = fresh_name("x1", &mut taken);
    let preds: Vec<String> = phi
        .functions()
        .iter()
        .map(|f| fresh_name(&format!("P_{}", f.name), &mut taken))
        .collect();
    let y = |v: usize| phi.vars()[v].clone();
    let inputs: Vec<Formula> = phi
        .leaves()
        .iter()
        .map(|leaf| match leaf {
            Leaf::Var(v) => Formula::var_eq(&y(*v), &x1),
            Leaf::App { func, args } => Formula::Pred(preds[*func].clone(), args.iter().map(|&a| y(a)).collect()),
        })
        .collect();
    let body = circuit_to_formula(phi.matrix(), &inputs)?;
    let mut conj = vec![Formula::not(Formula::var_eq(&x0, &x1))];
    for &(_, v) in phi.prefix() {
        conj.push(Formula::Or(vec![
            Formula::var_eq(&y(v), &x0),
            Formula::var_eq(&y(v), &x1),
        ]));
    }
    conj.push(body);
    let mut f = Formula::And(conj);
    for &(_, v) in phi.prefix().iter().rev() {
        f = Formula::forall(&y(v), f);
    }
    Ok(Formula::exists(&x0, Formula::exists(&x1, f)))
}

/// Projection for a single-function ESB formula `exists f forall u psi`.
/// Points are assignments to `u` (prefix order), values list the bits of
/// the `m` occurrences `f(z_1)..f(z_m)`; `D` requires `psi` at the first
/// point and `z_i[x1] = z_j[x2] -> y1_i = y2_j` for every pair.
pub fn project_esb(phi: &Esb) -> Result<ProjectionCircuit> {
    if phi.functions().len() != 1 || !phi.is_universal_prefix() {
        return Err(Error::NotNormalForm(
            "projection needs one function symbol and a universal prefix".into(),
        ));
    }
    let mut pos = vec![0; phi.vars().len()];
    for (i, &(_, v)) in phi.prefix().iter().enumerate() {
        pos[v] = i;
    }
    let occurrences: Vec<&Vec<usize>> = phi
        .leaves()
        .iter()
        .filter_map(|leaf| match leaf {
            Leaf::App { args, .. } => Some(args),
            Leaf::Var(_) => None,
        })
        .collect();
    let (n, m) = (phi.vars().len(), occurrences.len());
    let (mut b, [x1, y1, x2, y2]) = projection_builder("esb", n, m);
    let mut next = 0;
    let leaf_refs: Vec<Ref> = phi
        .leaves()
        .iter()
        .map(|leaf| match leaf {
            Leaf::Var(v) => x1[pos[*v]],
            Leaf::App { .. } => {
                next += 1;
                y1[next - 1]
            }
        })
        .collect();
    let split = crate::dqbf::esb::split_by_groups(phi.matrix(), &leaf_refs);
    let mut conj = vec![b.embed(phi.matrix(), &split)?];
    for (i, zi) in occurrences.iter().enumerate() {
        for (j, zj) in occurrences.iter().enumerate() {
            let a: Vec<Ref> = zi.iter().map(|&v| x1[pos[v]]).collect();
            let c: Vec<Ref> = zj.iter().map(|&v| x2[pos[v]]).collect();
            let same = b.eq_bits(&a, &c);
            let agree = b.iff(y1[i], y2[j]);
            conj.push(b.implies(same, agree));
        }
    }
    let out = b.and(conj);
    ProjectionCircuit::new(b.finish(out))
}

/// `feq(x, y)` and `fsuc(x, y)` over unary predicates `R_1..R_n`, reading
/// the profile of an element as a number with `R_1` least significant.
/// `fsuc` holds when the profile of `y` is that of `x` plus one modulo `2^n`.
pub fn build_feq_fsuc(preds: &[&str]) -> Result<(Formula, Formula)> {
    if preds.is_empty() {
        return Err(Error::InvalidParameter("at least one predicate is required".into()));
    }
    let at = |p: &str, v: &str| Formula::pred(p, &[v]);
    let feq = Formula::And(preds.iter().map(|p| Formula::iff(at(p, "x"), at(p, "y"))).collect());
    let mut disjuncts = Vec::with_capacity(preds.len() + 1);
    for i in 0..preds.len() {
        let mut c = vec![Formula::not(at(preds[i], "x")), at(preds[i], "y")];
        c.extend(
            preds[..i]
                .iter()
                .map(|p| Formula::And(vec![at(p, "x"), Formula::not(at(p, "y"))])),
        );
        c.extend(preds[i + 1..].iter().map(|p| Formula::iff(at(p, "x"), at(p, "y"))));
        disjuncts.push(Formula::And(c));
    }
    disjuncts.push(Formula::And(
        preds
            .iter()
            .map(|p| Formula::And(vec![at(p, "x"), Formula::not(at(p, "y"))]))
            .collect(),
    ));
    Ok((feq, Formula::Or(disjuncts)))
}

/// Two-variable sentence over unary predicates for a projection circuit:
/// `forall x y ((feq_R -> feq_S) AND D[R(x), S(x), R(y), S(y)]) AND
/// forall x exists y fsuc_R(x, y)`. Element profiles over `R` encode points
/// and profiles over `S` encode values; MSB-first circuit bit `i` of a
/// width-`w` group reads predicate number `w - i`.
pub fn algorithm2(d: &ProjectionCircuit) -> Formula {
    let (n, m) = (d.point_width(), d.value_width());
    let r: Vec<String> = (1..=n).map(|i| format!("R{i}")).collect();
    let s: Vec<String> = (1..=m).map(|i| format!("S{i}")).collect();
    let pair = |names: &[String]| match build_feq_fsuc(&names.iter().map(String::as_str).collect::<Vec<_>>()) {
        Ok(fs) => fs,
        Err(_) => (Formula::True, Formula::True),
    };
    let (feq_r, fsuc_r) = pair(&r);
    let (feq_s, _) = pair(&s);
    let block = |names: &[String], var: &str| -> Vec<Formula> {
        names.iter().rev().map(|p| Formula::pred(p, &[var])).collect()
    };
    let mut inputs = block(&r, "x");
    inputs.extend(block(&s, "x"));
    inputs.extend(block(&r, "y"));
    inputs.extend(block(&s, "y"));
    let alpha2 = circuit_to_formula(d.circuit(), &inputs).expect("layout matches");
    let alpha1 = Formula::implies(feq_r, feq_s);
    Formula::And(vec![
        Formula::forall("x", Formula::forall("y", Formula::And(vec![alpha1, alpha2]))),
        Formula::forall("x", Formula::exists("y", fsuc_r)),
    ])
}
