//! Relational first-order logic with Skolem-function equalities: syntax,
//! finite structures, and the encodings between bounded first-order
//! satisfiability, ESB and DQBF.

mod encode;
mod model;
mod sexpr;

pub use encode::{
    algorithm2, bsatfo_to_esb, build_feq_fsuc, circuit_to_formula, esb_to_bsr, esm_bound, project_esb, skolemize,
    FragmentClass,
};
pub use model::{bounded_sat_bruteforce, fo_model_check, Structure};
pub use sexpr::{emit_formula, parse_formula};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// Function application to variables only.
    App(String, Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Pred(String, Vec<String>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn pred(name: &str, args: &[&str]) -> Formula {
        Formula::Pred(name.into(), args.iter().map(|a| a.to_string()).collect())
    }

    pub fn var_eq(a: &str, b: &str) -> Formula {
        Formula::Eq(Term::Var(a.into()), Term::Var(b.into()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(x: &str, body: Formula) -> Formula {
        Formula::Forall(x.into(), Box::new(body))
    }

    pub fn exists(x: &str, body: Formula) -> Formula {
        Formula::Exists(x.into(), Box::new(body))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(v) | Formula::Or(v) => v.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) | Formula::Iff(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            _ => true,
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> Vec<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            let mut see = |v: &String, bound: &Vec<String>| {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            };
            match f {
                Formula::True | Formula::False => {}
                Formula::Pred(_, args) => args.iter().for_each(|a| see(a, bound)),
                Formula::Eq(s, t) => {
                    for term in [s, t] {
                        match term {
                            Term::Var(v) => see(v, bound),
                            Term::App(_, args) => args.iter().for_each(|a| see(a, bound)),
                        }
                    }
                }
                Formula::Not(a) => go(a, bound, out),
                Formula::And(v) | Formula::Or(v) => v.iter().for_each(|x| go(x, bound, out)),
                Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Forall(x, body) | Formula::Exists(x, body) => {
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every name used anywhere: variables, predicates and functions.
    pub(crate) fn all_names(&self, out: &mut std::collections::HashSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Pred(p, args) => {
                out.insert(p.clone());
                out.extend(args.iter().cloned());
            }
            Formula::Eq(s, t) => {
                for term in [s, t] {
                    match term {
                        Term::Var(v) => {
                            out.insert(v.clone());
                        }
                        Term::App(g, args) => {
                            out.insert(g.clone());
                            out.extend(args.iter().cloned());
                        }
                    }
                }
            }
            Formula::Not(a) => a.all_names(out),
            Formula::And(v) | Formula::Or(v) => v.iter().for_each(|x| x.all_names(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.all_names(out);
                b.all_names(out);
            }
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                out.insert(x.clone());
                body.all_names(out);
            }
        }
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&emit_formula(self))
    }
}

/// Predicate and function symbols with their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub predicates: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, usize>,
}

impl Signature {
    pub fn of(f: &Formula) -> Result<Signature> {
        let mut sig = Signature::default();
        sig.collect(f)?;
        if let Some(name) = sig.predicates.keys().find(|p| sig.functions.contains_key(*p)) {
            return Err(Error::Signature(format!("`{name}` is used as predicate and function")));
        }
        Ok(sig)
    }

    fn note(map: &mut BTreeMap<String, usize>, name: &str, arity: usize) -> Result<()> {
        match map.insert(name.to_string(), arity) {
            Some(a) if a != arity => Err(Error::Signature(format!(
                "`{name}` is used with arities {a} and {arity}"
            ))),
            _ => Ok(()),
        }
    }

    fn collect(&mut self, f: &Formula) -> Result<()> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::Pred(p, args) => Self::note(&mut self.predicates, p, args.len()),
            Formula::Eq(s, t) => {
                for term in [s, t] {
                    if let Term::App(g, args) = term {
                        Self::note(&mut self.functions, g, args.len())?;
                    }
                }
                Ok(())
            }
            Formula::Not(a) => self.collect(a),
            Formula::And(v) | Formula::Or(v) => v.iter().try_for_each(|x| self.collect(x)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                self.collect(a)?;
                self.collect(b)
            }
            Formula::Forall(_, body) | Formula::Exists(_, body) => self.collect(body),
        }
    }
}

/// Splits `Q1 x1 ... Qn xn psi` into the prefix and the matrix; fails when
/// the matrix still contains a quantifier or a variable is bound twice.
pub(crate) fn split_prenex(f: &Formula) -> Result<(Vec<(bool, String)>, &Formula)> {
    let mut prefix = Vec::new();
    let mut cur = f;
    loop {
        match cur {
            Formula::Forall(x, body) => {
                prefix.push((true, x.clone()));
                cur = body;
            }
            Formula::Exists(x, body) => {
                prefix.push((false, x.clone()));
                cur = body;
            }
            _ => break,
        }
    }
    if !cur.is_quantifier_free() {
        return Err(Error::NotNormalForm("sentence is not in prenex form".into()));
    }
    for (i, (_, x)) in prefix.iter().enumerate() {
        if prefix[..i].iter().any(|(_, y)| y == x) {
            return Err(Error::NotNormalForm(format!("variable `{x}` is bound twice")));
        }
    }
    Ok((prefix, cur))
}
