//! One-tape nondeterministic Turing machines and the run-tableau projection.

use std::fmt;

use super::{ceil_log2, projection_builder, ProjectionCircuit};
use crate::circuit::{CircuitBuilder, Ref};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub state: usize,
    pub read: usize,
    pub next: usize,
    pub write: usize,
    pub step: Move,
}

/// States and symbols are indices into `states` and `alphabet`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ntm {
    pub name: String,
    pub alphabet: Vec<String>,
    pub blank: usize,
    pub states: Vec<String>,
    pub initial: usize,
    pub accept: usize,
    pub transitions: Vec<Transition>,
}

/// What the head does from `(state, symbol)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Behaviour {
    Halt,
    Stay(Vec<(usize, usize)>),
    Moves { next: usize, write: usize, step: Move },
}

impl Ntm {
    pub fn new(
        name: impl Into<String>,
        alphabet: Vec<String>,
        blank: usize,
        states: Vec<String>,
        initial: usize,
        accept: usize,
        transitions: Vec<Transition>,
    ) -> Result<Self> {
        let m = Ntm {
            name: name.into(),
            alphabet,
            blank,
            states,
            initial,
            accept,
            transitions,
        };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let (g, q) = (self.alphabet.len(), self.states.len());
        if g == 0 || q == 0 {
            return Err(Error::InvalidInstance("machine needs states and symbols".into()));
        }
        if self.blank >= g || self.initial >= q || self.accept >= q {
            return Err(Error::InvalidInstance("blank, initial or accept out of range".into()));
        }
        for t in &self.transitions {
            if t.state >= q || t.next >= q || t.read >= g || t.write >= g {
                return Err(Error::InvalidInstance(
                    "transition refers to an unknown state or symbol".into(),
                ));
            }
        }
        for t in &self.transitions {
            let same: Vec<&Transition> = self
                .transitions
                .iter()
                .filter(|u| u.state == t.state && u.read == t.read)
                .collect();
            if same.len() > 1 && same.iter().any(|u| u.step != Move::S) {
                return Err(Error::InvalidInstance(format!(
                    "nondeterministic choice on ({}, {}) must keep the head still",
                    self.states[t.state], self.alphabet[t.read]
                )));
            }
        }
        Ok(())
    }

    pub fn behaviour(&self, state: usize, symbol: usize) -> Behaviour {
        let ts: Vec<&Transition> = self
            .transitions
            .iter()
            .filter(|t| t.state == state && t.read == symbol)
            .collect();
        match ts.as_slice() {
            [] => Behaviour::Halt,
            [t] if t.step != Move::S => Behaviour::Moves {
                next: t.next,
                write: t.write,
                step: t.step,
            },
            _ => {
                let mut opts: Vec<(usize, usize)> = ts.iter().map(|t| (t.next, t.write)).collect();
                opts.sort_unstable();
                opts.dedup();
                Behaviour::Stay(opts)
            }
        }
    }

    /// `|Gamma| + |Q| * |Gamma|`.
    pub fn delta_size(&self) -> u64 {
        (self.alphabet.len() * (1 + self.states.len())) as u64
    }

    /// Bits per tableau cell.
    pub fn cell_bits(&self) -> usize {
        ceil_log2(self.delta_size())
    }

    pub fn plain_code(&self, symbol: usize) -> u64 {
        symbol as u64
    }

    pub fn head_code(&self, state: usize, symbol: usize) -> u64 {
        let g = self.alphabet.len();
        (g + state * g + symbol) as u64
    }

    /// Inverse of the two code functions: `(Some(state), symbol)` for heads.
    pub fn decode(&self, code: u64) -> Option<(Option<usize>, usize)> {
        let g = self.alphabet.len() as u64;
        if code >= self.delta_size() {
            None
        } else if code < g {
            Some((None, code as usize))
        } else {
            let c = code - g;
            Some((Some((c / g) as usize), (c % g) as usize))
        }
    }

    pub fn symbol(&self, s: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == s)
    }

    /// Word characters as symbol indices.
    pub fn encode_word(&self, word: &str) -> Result<Vec<usize>> {
        word.chars()
            .map(|c| {
                self.symbol(&c.to_string())
                    .ok_or_else(|| Error::InvalidInstance(format!("symbol `{c}` is not in the tape alphabet")))
            })
            .collect()
    }
}

impl fmt::Display for Ntm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ntm {}", self.name)?;
        writeln!(f, "alphabet {}", self.alphabet.join(" "))?;
        writeln!(f, "blank {}", self.alphabet[self.blank])?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "initial {}", self.states[self.initial])?;
        writeln!(f, "accept {}", self.states[self.accept])?;
        for t in &self.transitions {
            writeln!(
                f,
                "trans {} {} -> {} {} {:?}",
                self.states[t.state], self.alphabet[t.read], self.states[t.next], self.alphabet[t.write], t.step
            )?;
        }
        Ok(())
    }
}

/// Parses the line format written by `Display`.
pub fn parse_ntm(text: &str) -> Result<Ntm> {
    let mut name = None;
    let mut alphabet: Option<Vec<String>> = None;
    let mut states: Option<Vec<String>> = None;
    let (mut blank, mut initial, mut accept) = (None, None, None);
    let mut trans_lines = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = body.split_whitespace().collect();
        let Some((&key, rest)) = toks.split_first() else {
            continue;
        };
        let one = || -> Result<String> {
            match rest {
                [v] => Ok(v.to_string()),
                _ => Err(Error::parse(line, format!("`{key}` takes one value"))),
            }
        };
        match key {
            "ntm" => name = Some(one()?),
            "alphabet" => alphabet = Some(rest.iter().map(|s| s.to_string()).collect()),
            "states" => states = Some(rest.iter().map(|s| s.to_string()).collect()),
            "blank" => blank = Some((line, one()?)),
            "initial" => initial = Some((line, one()?)),
            "accept" => accept = Some((line, one()?)),
            "trans" => trans_lines.push((line, rest.iter().map(|s| s.to_string()).collect::<Vec<_>>())),
            other => return Err(Error::parse(line, format!("unknown keyword `{other}`"))),
        }
    }
    let last = text.lines().count().max(1);
    let alphabet = alphabet.ok_or_else(|| Error::parse(last, "missing `alphabet`"))?;
    let states = states.ok_or_else(|| Error::parse(last, "missing `states`"))?;
    let find = |list: &[String], what: &str, v: Option<(usize, String)>| -> Result<usize> {
        let (line, v) = v.ok_or_else(|| Error::parse(last, format!("missing `{what}`")))?;
        list.iter()
            .position(|x| *x == v)
            .ok_or_else(|| Error::parse(line, format!("unknown {what} `{v}`")))
    };
    let blank = find(&alphabet, "blank", blank)?;
    let initial = find(&states, "initial", initial)?;
    let accept = find(&states, "accept", accept)?;
    let mut transitions = Vec::new();
    for (line, t) in trans_lines {
        if t.len() != 6 || t[2] != "->" {
            return Err(Error::parse(line, "expected `trans <q> <s> -> <q'> <s'> L|R|S`"));
        }
        let st = |v: &str| {
            states
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::parse(line, format!("unknown state `{v}`")))
        };
        let sy = |v: &str| {
            alphabet
                .iter()
                .position(|x| x == v)
                .ok_or_else(|| Error::parse(line, format!("unknown symbol `{v}`")))
        };
        let step = match t[5].as_str() {
            "L" => Move::L,
            "R" => Move::R,
            "S" => Move::S,
            other => return Err(Error::parse(line, format!("unknown move `{other}`"))),
        };
        transitions.push(Transition {
            state: st(&t[0])?,
            read: sy(&t[1])?,
            next: st(&t[3])?,
            write: sy(&t[4])?,
            step,
        });
    }
    Ntm::new(
        name.unwrap_or_else(|| "ntm".into()),
        alphabet,
        blank,
        states,
        initial,
        accept,
        transitions,
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NtmInstance {
    pub machine: Ntm,
    pub word: String,
    pub t: usize,
}

struct Codes<'a> {
    y: &'a [Ref],
    cache: Vec<Option<Ref>>,
}

impl<'a> Codes<'a> {
    fn new(y: &'a [Ref], delta: u64) -> Self {
        Codes {
            y,
            cache: vec![None; delta as usize],
        }
    }

    fn is(&mut self, b: &mut CircuitBuilder, code: u64) -> Ref {
        let y = self.y;
        *self.cache[code as usize].get_or_insert_with(|| b.eq_const(y, code))
    }

    fn any(&mut self, b: &mut CircuitBuilder, codes: impl IntoIterator<Item = u64>) -> Ref {
        let refs: Vec<Ref> = codes.into_iter().map(|c| self.is(b, c)).collect();
        b.or(refs)
    }
}

/// Point `(i, j)` is cell `i` at time `j` (`t` bits each, `i` first); the
/// value is the cell content in `Delta`. Rows run from time 0 to `2^t - 1`
/// with no wrap from the last row to the first.
pub fn project_ntm(machine: &Ntm, word: &str, t: usize) -> Result<ProjectionCircuit> {
    if t > 31 {
        return Err(Error::Capacity(format!("t = {t} is too large")));
    }
    let w = machine.encode_word(word)?;
    if w.len() as u64 > 1u64 << t {
        return Err(Error::Capacity(format!(
            "word of length {} does not fit 2^{t} cells",
            w.len()
        )));
    }
    let gsz = machine.alphabet.len();
    let qsz = machine.states.len();
    let delta = machine.delta_size();
    let m = machine.cell_bits();
    let (mut b, [x1, y1, x2, y2]) = projection_builder(&format!("ntm_{}", machine.name), 2 * t, m);
    let (i1, j1) = x1.split_at(t);
    let (i2, j2) = x2.split_at(t);
    let mut c1 = Codes::new(&y1, delta);
    let mut c2 = Codes::new(&y2, delta);

    let heads_where = |pred: &dyn Fn(&Behaviour) -> bool| -> Vec<u64> {
        let mut v = Vec::new();
        for q in 0..qsz {
            for s in 0..gsz {
                if pred(&machine.behaviour(q, s)) {
                    v.push(machine.head_code(q, s));
                }
            }
        }
        v
    };
    let halting = heads_where(&|bh| matches!(bh, Behaviour::Halt));
    let left = heads_where(&|bh| matches!(bh, Behaviour::Moves { step: Move::L, .. }));
    let right = heads_where(&|bh| matches!(bh, Behaviour::Moves { step: Move::R, .. }));

    let mut conds = Vec::new();
    conds.push(b.lt_const(&y1, delta)?);

    let i_first = b.eq_const(i1, 0);
    let i_last = b.all_ones(i1);
    let j_first = b.eq_const(j1, 0);
    let j_last = b.all_ones(j1);
    let not_last_row = b.not(j_last);

    // (a) head in the initial state over the first input symbol
    let b0 = w.first().copied().unwrap_or(machine.blank);
    let origin = b.and([i_first, j_first]);
    let start = c1.is(&mut b, machine.head_code(machine.initial, b0));
    conds.push(b.implies(origin, start));
    // (b) the rest of the input
    for (p, &s) in w.iter().enumerate().skip(1) {
        let at = b.eq_const(i1, p as u64);
        let here = b.and([at, j_first]);
        let sym = c1.is(&mut b, machine.plain_code(s));
        conds.push(b.implies(here, sym));
    }
    // (c) blanks after the input
    let inside = b.lt_const(i1, w.len().max(1) as u64)?;
    let outside = b.not(inside);
    let blank_zone = b.and([j_first, outside]);
    let blank = c1.is(&mut b, machine.plain_code(machine.blank));
    conds.push(b.implies(blank_zone, blank));
    // (e) accept at cell 0 in the last row
    let finish = b.and([i_first, j_last]);
    let acc = c1.any(&mut b, (0..gsz).map(|s| machine.head_code(machine.accept, s)));
    conds.push(b.implies(finish, acc));
    // a head must be able to step in every row but the last, without leaving the tape
    let halts = c1.any(&mut b, halting.iter().copied());
    let nh = b.not(halts);
    conds.push(b.implies(not_last_row, nh));
    let edge_l = b.and([not_last_row, i_first]);
    let moves_l = c1.any(&mut b, left.iter().copied());
    let nl = b.not(moves_l);
    conds.push(b.implies(edge_l, nl));
    let edge_r = b.and([not_last_row, i_last]);
    let moves_r = c1.any(&mut b, right.iter().copied());
    let nr = b.not(moves_r);
    conds.push(b.implies(edge_r, nr));

    // (d) one head per row
    let same_row = b.eq_bits(j1, j2);
    let other_cell = b.neq_bits(i1, i2);
    let row_pair = b.and([same_row, other_cell]);
    let head1 = b.lt_const(&y1, gsz as u64)?;
    let head1 = b.not(head1);
    let head2 = b.lt_const(&y2, gsz as u64)?;
    let head2 = b.not(head2);
    let two = b.and([head1, head2]);
    let not_two = b.not(two);
    conds.push(b.implies(row_pair, not_two));

    // (f) vertical neighbours
    let same_cell = b.eq_bits(i1, i2);
    let next_time = b.successor_nowrap(j1, j2);
    let below = b.and([same_cell, next_time]);
    let mut rules = Vec::new();
    for s in 0..gsz {
        let here = c1.is(&mut b, machine.plain_code(s));
        let mut allowed = vec![machine.plain_code(s)];
        allowed.extend((0..qsz).map(|q| machine.head_code(q, s)));
        let ok = c2.any(&mut b, allowed);
        rules.push(b.implies(here, ok));
    }
    for q in 0..qsz {
        for s in 0..gsz {
            let allowed: Vec<u64> = match machine.behaviour(q, s) {
                Behaviour::Halt => continue,
                Behaviour::Stay(opts) => opts.iter().map(|&(q2, s2)| machine.head_code(q2, s2)).collect(),
                Behaviour::Moves { write, .. } => vec![machine.plain_code(write)],
            };
            let here = c1.is(&mut b, machine.head_code(q, s));
            let ok = c2.any(&mut b, allowed);
            rules.push(b.implies(here, ok));
        }
    }
    let vertical = b.and(rules);
    conds.push(b.implies(below, vertical));

    // (f) diagonal neighbours: a moving head lands in its target state
    for (step, from, to) in [(Move::R, i1, i2), (Move::L, i2, i1)] {
        let beside = b.successor_nowrap(from, to);
        let diag = b.and([beside, next_time]);
        let mut rules = Vec::new();
        for q in 0..qsz {
            for s in 0..gsz {
                if let Behaviour::Moves { next, step: st, .. } = machine.behaviour(q, s) {
                    if st == step {
                        let here = c1.is(&mut b, machine.head_code(q, s));
                        let lands = c2.any(&mut b, (0..gsz).map(|s2| machine.head_code(next, s2)));
                        rules.push(b.implies(here, lands));
                    }
                }
            }
        }
        let all = b.and(rules);
        conds.push(b.implies(diag, all));
    }

    let out = b.and(conds);
    ProjectionCircuit::new(b.finish(out))
}
