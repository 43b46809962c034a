//! Finite structures, model checking and bounded model search.

use std::collections::BTreeMap;
use std::fmt;

use super::{Formula, Signature, Term};
use crate::error::{Error, Result};

/// A finite structure over the domain `0..size`. Tables are indexed in
/// mixed radix with the first argument most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Structure {
    pub size: usize,
    pub relations: BTreeMap<String, Vec<bool>>,
    pub functions: BTreeMap<String, Vec<usize>>,
}

impl Structure {
    pub fn new(size: usize) -> Self {
        Structure {
            size,
            relations: BTreeMap::new(),
            functions: BTreeMap::new(),
        }
    }

    pub fn table_len(size: usize, arity: usize) -> Result<usize> {
        u32::try_from(arity)
            .ok()
            .and_then(|a| size.checked_pow(a))
            .ok_or_else(|| Error::Capacity(format!("table of arity {arity} over {size} elements")))
    }

    pub fn index(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &a| acc * self.size + a)
    }

    pub fn holds(&self, pred: &str, args: &[usize]) -> Option<bool> {
        self.relations.get(pred).and_then(|t| t.get(self.index(args)).copied())
    }

    pub fn apply(&self, func: &str, args: &[usize]) -> Option<usize> {
        self.functions.get(func).and_then(|t| t.get(self.index(args)).copied())
    }

    fn check_against(&self, sig: &Signature) -> Result<()> {
        if self.size == 0 {
            return Err(Error::InvalidParameter("empty domain".into()));
        }
        for (p, &ar) in &sig.predicates {
            let t = self
                .relations
                .get(p)
                .ok_or_else(|| Error::Signature(format!("structure lacks predicate `{p}`")))?;
            if t.len() != Self::table_len(self.size, ar)? {
                return Err(Error::Signature(format!("table of `{p}` does not match arity {ar}")));
            }
        }
        for (g, &ar) in &sig.functions {
            let t = self
                .functions
                .get(g)
                .ok_or_else(|| Error::Signature(format!("structure lacks function `{g}`")))?;
            if t.len() != Self::table_len(self.size, ar)? {
                return Err(Error::Signature(format!("table of `{g}` does not match arity {ar}")));
            }
            if t.iter().any(|&v| v >= self.size) {
                return Err(Error::Signature(format!("`{g}` maps outside the domain")));
            }
        }
        Ok(())
    }
}

fn tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = size.pow(arity as u32);
    (0..total).map(move |mut idx| {
        let mut t = vec![0; arity];
        for slot in t.iter_mut().rev() {
            *slot = idx % size;
            idx /= size;
        }
        t
    })
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "domain {}", self.size)?;
        for (p, t) in &self.relations {
            let arity = (0..).find(|&a| self.size.pow(a) >= t.len()).unwrap_or(0) as usize;
            let rows: Vec<String> = tuples(self.size, arity)
                .zip(t)
                .filter(|(_, &b)| b)
                .map(|(args, _)| format!("({})", join(&args)))
                .collect();
            writeln!(f, "{p} = {{{}}}", rows.join(" "))?;
        }
        for (g, t) in &self.functions {
            let arity = (0..).find(|&a| self.size.pow(a) >= t.len()).unwrap_or(0) as usize;
            let rows: Vec<String> = tuples(self.size, arity)
                .zip(t)
                .map(|(args, v)| format!("({})->{v}", join(&args)))
                .collect();
            writeln!(f, "{g} = {}", rows.join(" "))?;
        }
        Ok(())
    }
}

fn join(args: &[usize]) -> String {
    args.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Formula with variables resolved to environment slots.
enum Compiled {
    Const(bool),
    Pred(usize, Vec<usize>),
    Eq(CTerm, CTerm),
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Iff(Box<Compiled>, Box<Compiled>),
    Quant(bool, usize, Box<Compiled>),
}

enum CTerm {
    Var(usize),
    App(usize, Vec<usize>),
}

struct Compiler<'a> {
    preds: Vec<&'a str>,
    funcs: Vec<&'a str>,
    scope: Vec<&'a str>,
    slots: usize,
}

impl<'a> Compiler<'a> {
    fn var(&self, v: &str) -> Result<usize> {
        self.scope
            .iter()
            .rposition(|s| *s == v)
            .ok_or_else(|| Error::Malformed(format!("free variable `{v}`")))
    }

    fn vars(&self, args: &[String]) -> Result<Vec<usize>> {
        args.iter().map(|a| self.var(a)).collect()
    }

    fn term(&self, t: &'a Term) -> Result<CTerm> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(self.var(v)?),
            Term::App(g, args) => CTerm::App(
                self.funcs.iter().position(|s| s == g).expect("signature"),
                self.vars(args)?,
            ),
        })
    }

    fn compile(&mut self, f: &'a Formula) -> Result<Compiled> {
        Ok(match f {
            Formula::True => Compiled::Const(true),
            Formula::False => Compiled::Const(false),
            Formula::Pred(p, args) => Compiled::Pred(
                self.preds.iter().position(|s| s == p).expect("signature"),
                self.vars(args)?,
            ),
            Formula::Eq(s, t) => Compiled::Eq(self.term(s)?, self.term(t)?),
            Formula::Not(a) => Compiled::Not(Box::new(self.compile(a)?)),
            Formula::And(v) => Compiled::And(v.iter().map(|x| self.compile(x)).collect::<Result<_>>()?),
            Formula::Or(v) => Compiled::Or(v.iter().map(|x| self.compile(x)).collect::<Result<_>>()?),
            Formula::Implies(a, b) => Compiled::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Iff(a, b) => Compiled::Iff(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Forall(x, body) | Formula::Exists(x, body) => {
                let slot = self.scope.len();
                self.scope.push(x);
                self.slots = self.slots.max(self.scope.len());
                let inner = self.compile(body)?;
                self.scope.pop();
                Compiled::Quant(matches!(f, Formula::Forall(..)), slot, Box::new(inner))
            }
        })
    }
}

struct Interp<'a> {
    size: usize,
    rels: Vec<&'a [bool]>,
    funcs: Vec<&'a [usize]>,
}

impl Interp<'_> {
    fn index(&self, env: &[usize], args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &s| acc * self.size + env[s])
    }

    fn term(&self, t: &CTerm, env: &[usize]) -> usize {
        match t {
            CTerm::Var(s) => env[*s],
            CTerm::App(g, args) => self.funcs[*g][self.index(env, args)],
        }
    }

    fn eval(&self, f: &Compiled, env: &mut Vec<usize>) -> bool {
        match f {
            Compiled::Const(b) => *b,
            Compiled::Pred(p, args) => self.rels[*p][self.index(env, args)],
            Compiled::Eq(s, t) => self.term(s, env) == self.term(t, env),
            Compiled::Not(a) => !self.eval(a, env),
            Compiled::And(v) => v.iter().all(|x| self.eval(x, env)),
            Compiled::Or(v) => v.iter().any(|x| self.eval(x, env)),
            Compiled::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            Compiled::Iff(a, b) => self.eval(a, env) == self.eval(b, env),
            Compiled::Quant(forall, slot, body) => {
                for d in 0..self.size {
                    env[*slot] = d;
                    if self.eval(body, env) != *forall {
                        return !*forall;
                    }
                }
                *forall
            }
        }
    }
}

fn compile<'a>(phi: &'a Formula, sig: &'a Signature) -> Result<(Compiled, usize)> {
    let mut c = Compiler {
        preds: sig.predicates.keys().map(String::as_str).collect(),
        funcs: sig.functions.keys().map(String::as_str).collect(),
        scope: Vec::new(),
        slots: 0,
    };
    let compiled = c.compile(phi)?;
    Ok((compiled, c.slots))
}

/// Evaluates a sentence in a finite structure.
pub fn fo_model_check(phi: &Formula, a: &Structure) -> Result<bool> {
    let sig = Signature::of(phi)?;
    a.check_against(&sig)?;
    let (compiled, slots) = compile(phi, &sig)?;
    let interp = Interp {
        size: a.size,
        rels: sig.predicates.keys().map(|p| a.relations[p].as_slice()).collect(),
        funcs: sig.functions.keys().map(|g| a.functions[g].as_slice()).collect(),
    };
    Ok(interp.eval(&compiled, &mut vec![0; slots]))
}

/// Searches every structure with domain size `1..=bound`, smallest first,
/// and returns the first model found. Fails with `Capacity` when the number
/// of candidate structures exceeds `budget`.
pub fn bounded_sat_bruteforce(phi: &Formula, bound: usize, budget: u64) -> Result<Option<Structure>> {
    if bound == 0 {
        return Err(Error::InvalidParameter("domain bound must be positive".into()));
    }
    let sig = Signature::of(phi)?;
    let (compiled, slots) = compile(phi, &sig)?;

    let mut total: u128 = 0;
    for n in 1..=bound {
        let mut count: u128 = 1;
        for &ar in sig.predicates.values() {
            let len = Structure::table_len(n, ar)?;
            count = count.saturating_mul(1u128.checked_shl(len as u32).unwrap_or(u128::MAX));
        }
        for &ar in sig.functions.values() {
            let len = Structure::table_len(n, ar)?;
            count = count.saturating_mul((n as u128).saturating_pow(len as u32));
        }
        total = total.saturating_add(count);
    }
    if total > budget as u128 {
        return Err(Error::Capacity(format!(
            "{total} candidate structures up to size {bound} exceed the budget {budget}"
        )));
    }

    let mut env = vec![0; slots];
    for n in 1..=bound {
        let rel_lens: Vec<usize> = sig.predicates.values().map(|&ar| n.pow(ar as u32)).collect();
        let fn_lens: Vec<usize> = sig.functions.values().map(|&ar| n.pow(ar as u32)).collect();
        // One digit per table cell: relations first (radix 2), then functions (radix n).
        let rel_cells: usize = rel_lens.iter().sum();
        let cells = rel_cells + fn_lens.iter().sum::<usize>();
        let radix = |i: usize| if i < rel_cells { 2 } else { n };
        let mut digits = vec![0usize; cells];
        loop {
            let mut rels = Vec::with_capacity(rel_lens.len());
            let mut off = 0;
            for &len in &rel_lens {
                rels.push(digits[off..off + len].iter().map(|&d| d == 1).collect::<Vec<bool>>());
                off += len;
            }
            let mut funcs = Vec::with_capacity(fn_lens.len());
            for &len in &fn_lens {
                funcs.push(digits[off..off + len].to_vec());
                off += len;
            }
            let interp = Interp {
                size: n,
                rels: rels.iter().map(Vec::as_slice).collect(),
                funcs: funcs.iter().map(Vec::as_slice).collect(),
            };
            if interp.eval(&compiled, &mut env) {
                let mut s = Structure::new(n);
                s.relations = sig.predicates.keys().cloned().zip(rels).collect();
                s.functions = sig.functions.keys().cloned().zip(funcs).collect();
                return Ok(Some(s));
            }
            let mut carry = true;
            for i in (0..cells).rev() {
                digits[i] += 1;
                if digits[i] < radix(i) {
                    carry = false;
                    break;
                }
                digits[i] = 0;
            }
            if carry {
                break;
            }
        }
    }
    Ok(None)
}
