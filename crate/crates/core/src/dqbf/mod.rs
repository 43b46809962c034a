//! Dependency quantified boolean formulas.
//!
//! A [`Dqbf`] owns a flat variable space `0..num_vars()`. Every variable is
//! either a universal or an existential with an explicit dependency set. The
//! matrix is a circuit whose flat input bit `i` is variable `i`, or a clause
//! list (DNF terms or CNF clauses) over those variables.

mod dnf;
mod dqdimacs;
pub mod esb;
mod solve;

pub use dnf::prop1_dnf_transform;
pub use dqdimacs::{parse_dqdimacs, to_dqdimacs, tseitin};
pub use solve::{check_skolem, solve_bruteforce, solve_by_expansion, SkolemTable, Verdict, DEFAULT_BUDGET};

use std::collections::HashSet;

use crate::circuit::{kleene_and, kleene_or, Circuit, CircuitBuilder, Ref};
use crate::error::{Error, Result};

pub type Var = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: Var,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: Var) -> Self {
        Lit { var, positive: true }
    }

    pub fn neg(var: Var) -> Self {
        Lit { var, positive: false }
    }

    pub fn new(var: Var, positive: bool) -> Self {
        Lit { var, positive }
    }

    pub fn negate(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    fn value(self, vals: &[bool]) -> bool {
        vals[self.var] == self.positive
    }

    fn partial(self, vals: &[Option<bool>]) -> Option<bool> {
        vals[self.var].map(|v| v == self.positive)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Matrix {
    Circuit(Circuit),
    /// Disjunction of terms; each term is a conjunction of literals.
    Dnf(Vec<Vec<Lit>>),
    /// Conjunction of clauses; each clause is a disjunction of literals.
    Cnf(Vec<Vec<Lit>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Existential {
    pub var: Var,
    pub deps: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dqbf {
    names: Vec<String>,
    universals: Vec<Var>,
    existentials: Vec<Existential>,
    matrix: Matrix,
}

impl Dqbf {
    /// Validates and builds a formula. Every variable must be quantified
    /// exactly once and dependency sets may only name universals.
    pub fn new(
        names: Vec<String>,
        universals: Vec<Var>,
        existentials: Vec<Existential>,
        matrix: Matrix,
    ) -> Result<Self> {
        let n = names.len();
        let mut seen = vec![false; n];
        let mut mark = |v: Var| -> Result<()> {
            if v >= n {
                return Err(Error::InvalidInstance(format!("variable {v} is not declared")));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidInstance(format!(
                    "variable `{}` quantified twice",
                    names[v]
                )));
            }
            Ok(())
        };
        for &u in &universals {
            mark(u)?;
        }
        for e in &existentials {
            mark(e.var)?;
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInstance(format!(
                "variable `{}` is not quantified",
                names[v]
            )));
        }
        let uni: HashSet<Var> = universals.iter().copied().collect();
        for e in &existentials {
            let mut deps = HashSet::new();
            for d in &e.deps {
                if !uni.contains(d) {
                    return Err(Error::InvalidInstance(format!(
                        "`{}` depends on non-universal variable {d}",
                        names[e.var]
                    )));
                }
                if !deps.insert(*d) {
                    return Err(Error::InvalidInstance(format!(
                        "`{}` lists a dependency twice",
                        names[e.var]
                    )));
                }
            }
        }
        match &matrix {
            Matrix::Circuit(c) => {
                if c.input_width() != n {
                    return Err(Error::InvalidInstance(format!(
                        "matrix circuit has {} inputs for {n} variables",
                        c.input_width()
                    )));
                }
            }
            Matrix::Dnf(terms) | Matrix::Cnf(terms) => {
                if let Some(l) = terms.iter().flatten().find(|l| l.var >= n) {
                    return Err(Error::InvalidInstance(format!(
                        "literal on undeclared variable {}",
                        l.var
                    )));
                }
            }
        }
        Ok(Dqbf {
            names,
            universals,
            existentials,
            matrix,
        })
    }

    /// Universals are the first bits of the circuit's first groups in
    /// `universal_groups`; every other group becomes a block of existentials
    /// depending on the named universal groups.
    pub fn from_circuit(c: Circuit, universal_groups: &[&str], deps: &[(&str, &[&str])]) -> Result<Self> {
        let names: Vec<String> = (0..c.input_width()).map(|i| c.bit_label(i)).collect();
        let range = |g: &str| c.group_range(g).ok_or_else(|| Error::UnknownGroup(g.to_string()));
        let mut universals = Vec::new();
        for g in universal_groups {
            universals.extend(range(g)?);
        }
        let mut existentials = Vec::new();
        for (g, on) in deps {
            let mut dv = Vec::new();
            for d in *on {
                dv.extend(range(d)?);
            }
            for var in range(g)? {
                existentials.push(Existential { var, deps: dv.clone() });
            }
        }
        Dqbf::new(names, universals, existentials, Matrix::Circuit(c))
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v]
    }

    pub fn universals(&self) -> &[Var] {
        &self.universals
    }

    pub fn existentials(&self) -> &[Existential] {
        &self.existentials
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn is_universal(&self, v: Var) -> bool {
        self.universals.contains(&v)
    }

    /// Evaluates the matrix on a total assignment indexed by variable.
    pub fn eval_matrix(&self, vals: &[bool]) -> bool {
        match &self.matrix {
            Matrix::Circuit(c) => c.eval_bits(vals),
            Matrix::Dnf(terms) => terms.iter().any(|t| t.iter().all(|l| l.value(vals))),
            Matrix::Cnf(clauses) => clauses.iter().all(|c| c.iter().any(|l| l.value(vals))),
        }
    }

    pub(crate) fn eval_matrix_partial(&self, vals: &[Option<bool>], scratch: &mut Vec<Option<bool>>) -> Option<bool> {
        match &self.matrix {
            Matrix::Circuit(c) => c.eval_partial(vals, scratch),
            Matrix::Dnf(terms) => kleene_or(terms.iter().map(|t| kleene_and(t.iter().map(|l| l.partial(vals))))),
            Matrix::Cnf(clauses) => kleene_and(clauses.iter().map(|c| kleene_or(c.iter().map(|l| l.partial(vals))))),
        }
    }

    /// The matrix as a circuit with one group `v` whose bit `i` is variable `i`.
    pub fn matrix_circuit(&self) -> Circuit {
        match &self.matrix {
            Matrix::Circuit(c) => c.clone(),
            Matrix::Dnf(terms) => clause_circuit(self.num_vars(), terms, true),
            Matrix::Cnf(clauses) => clause_circuit(self.num_vars(), clauses, false),
        }
    }

    /// Same formula with the matrix replaced by its circuit form.
    pub fn with_circuit_matrix(&self) -> Dqbf {
        Dqbf {
            names: self.names.clone(),
            universals: self.universals.clone(),
            existentials: self.existentials.clone(),
            matrix: Matrix::Circuit(self.matrix_circuit()),
        }
    }

    /// Prefix in human-readable form, e.g. `forall x y exists z(x)`.
    pub fn prefix_string(&self) -> String {
        let mut s = String::from("forall");
        for &u in &self.universals {
            s.push(' ');
            s.push_str(&self.names[u]);
        }
        s.push_str(" exists");
        for e in &self.existentials {
            let deps: Vec<&str> = e.deps.iter().map(|&d| self.names[d].as_str()).collect();
            s.push_str(&format!(" {}({})", self.names[e.var], deps.join(",")));
        }
        s
    }
}

fn clause_circuit(num_vars: usize, items: &[Vec<Lit>], dnf: bool) -> Circuit {
    let mut b = CircuitBuilder::new(if dnf { "dnf" } else { "cnf" });
    let v = b.input("v", num_vars).expect("fresh builder");
    let mut negs: Vec<Option<Ref>> = vec![None; num_vars];
    let mut lit = |b: &mut CircuitBuilder, l: &Lit| {
        if l.positive {
            v[l.var]
        } else {
            *negs[l.var].get_or_insert_with(|| b.not(v[l.var]))
        }
    };
    let mut outer = Vec::with_capacity(items.len());
    for item in items {
        let lits: Vec<Ref> = item.iter().map(|l| lit(&mut b, l)).collect();
        outer.push(if dnf { b.and(lits) } else { b.or(lits) });
    }
    let out = if dnf { b.or(outer) } else { b.and(outer) };
    b.finish(out)
}

/// `base` if unused, else `base'`, `base''`, ...
pub(crate) fn fresh_name(base: &str, taken: &mut HashSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    taken.insert(name.clone());
    name
}
