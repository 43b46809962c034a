//! Single-output boolean circuits over named, ordered input groups.
//!
//! Bits inside a group are addressed `group[index]` with the most significant
//! bit at index 0, so `num(a)` of a group value is read MSB-first. All
//! reductions in this crate build their circuits through [`CircuitBuilder`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// MSB-first bit vector of `value` with `width` bits.
pub fn to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (value >> (width - 1 - i)) & 1 == 1).collect()
}

/// Inverse of [`to_bits`].
pub fn from_bits(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// Renders bits as a `0`/`1` string.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ref {
    Input { group: usize, bit: usize },
    Gate(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Const(bool),
}

impl GateKind {
    fn keyword(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Xor => "XOR",
            GateKind::Const(_) => "CONST",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
    pub operands: Vec<Ref>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputGroup {
    pub name: String,
    pub width: usize,
}

/// An acyclic single-output circuit. Gates only reference inputs or earlier
/// gates, so evaluation is a single forward pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    name: String,
    groups: Vec<InputGroup>,
    offsets: Vec<usize>,
    gates: Vec<Gate>,
    output: Ref,
}

/// Values for every input bit, keyed by group name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<String, Vec<bool>>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, group: &str, bits: &[bool]) -> Self {
        self.set(group, bits);
        self
    }

    /// Binds `group` to the MSB-first encoding of `value`.
    pub fn with_value(self, group: &str, value: u64, width: usize) -> Self {
        self.with(group, &to_bits(value, width))
    }

    pub fn set(&mut self, group: &str, bits: &[bool]) {
        self.values.insert(group.to_string(), bits.to_vec());
    }

    pub fn get(&self, group: &str) -> Option<&[bool]> {
        self.values.get(group).map(Vec::as_slice)
    }
}

impl Circuit {
    fn from_parts(name: String, groups: Vec<InputGroup>, gates: Vec<Gate>, output: Ref) -> Self {
        let mut offsets = Vec::with_capacity(groups.len());
        let mut acc = 0;
        for g in &groups {
            offsets.push(acc);
            acc += g.width;
        }
        Circuit {
            name,
            groups,
            offsets,
            gates,
            output,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn groups(&self) -> &[InputGroup] {
        &self.groups
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> Ref {
        self.output
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    pub fn group_width(&self, name: &str) -> Option<usize> {
        self.group_index(name).map(|i| self.groups[i].width)
    }

    /// Total number of input bits.
    pub fn input_width(&self) -> usize {
        self.groups.iter().map(|g| g.width).sum()
    }

    /// Position of `group[bit]` in the flattened input vector (declaration
    /// order, then index).
    pub fn flat_index(&self, group: usize, bit: usize) -> usize {
        self.offsets[group] + bit
    }

    /// Flat index range of a named group.
    pub fn group_range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        let i = self.group_index(name)?;
        Some(self.offsets[i]..self.offsets[i] + self.groups[i].width)
    }

    /// Human-readable label of a flat input bit, e.g. `x1[0]`.
    pub fn bit_label(&self, flat: usize) -> String {
        for (g, off) in self.groups.iter().zip(&self.offsets) {
            if flat < off + g.width {
                return format!("{}[{}]", g.name, flat - off);
            }
        }
        format!("?[{flat}]")
    }

    pub fn eval(&self, a: &Assignment) -> Result<bool> {
        let mut flat = Vec::with_capacity(self.input_width());
        for g in &self.groups {
            let bits = a
                .get(&g.name)
                .ok_or_else(|| Error::InputArity(format!("missing group `{}`", g.name)))?;
            if bits.len() != g.width {
                return Err(Error::InputArity(format!(
                    "group `{}` has width {} but {} bits were given",
                    g.name,
                    g.width,
                    bits.len()
                )));
            }
            flat.extend_from_slice(bits);
        }
        if let Some(extra) = a.values.keys().find(|k| self.group_index(k).is_none()) {
            return Err(Error::InputArity(format!("unexpected group `{extra}`")));
        }
        Ok(self.eval_bits(&flat))
    }

    /// Evaluates on a flattened input vector.
    pub fn eval_bits(&self, inputs: &[bool]) -> bool {
        let mut scratch = Vec::with_capacity(self.gates.len());
        self.eval_with(inputs, &mut scratch)
    }

    /// Like [`Circuit::eval_bits`] but reuses `scratch` for gate values.
    pub fn eval_with(&self, inputs: &[bool], scratch: &mut Vec<bool>) -> bool {
        assert_eq!(inputs.len(), self.input_width(), "input width of `{}`", self.name);
        scratch.clear();
        for gate in &self.gates {
            let read = |r: &Ref| self.read(*r, inputs, scratch);
            let v = match gate.kind {
                GateKind::And => gate.operands.iter().all(read),
                GateKind::Or => gate.operands.iter().any(read),
                GateKind::Not => !read(&gate.operands[0]),
                GateKind::Xor => read(&gate.operands[0]) ^ read(&gate.operands[1]),
                GateKind::Const(c) => c,
            };
            scratch.push(v);
        }
        self.read(self.output, inputs, scratch)
    }

    fn read(&self, r: Ref, inputs: &[bool], vals: &[bool]) -> bool {
        match r {
            Ref::Input { group, bit } => inputs[self.offsets[group] + bit],
            Ref::Gate(i) => vals[i],
        }
    }

    /// Three-valued (Kleene) evaluation; `None` marks an unknown input.
    pub fn eval_partial(&self, inputs: &[Option<bool>], scratch: &mut Vec<Option<bool>>) -> Option<bool> {
        assert_eq!(inputs.len(), self.input_width());
        scratch.clear();
        for gate in &self.gates {
            let read = |r: &Ref| match *r {
                Ref::Input { group, bit } => inputs[self.offsets[group] + bit],
                Ref::Gate(i) => scratch[i],
            };
            let v = match gate.kind {
                GateKind::And => kleene_and(gate.operands.iter().map(read)),
                GateKind::Or => kleene_or(gate.operands.iter().map(read)),
                GateKind::Not => read(&gate.operands[0]).map(|b| !b),
                GateKind::Xor => match (read(&gate.operands[0]), read(&gate.operands[1])) {
                    (Some(a), Some(b)) => Some(a ^ b),
                    _ => None,
                },
                GateKind::Const(c) => Some(c),
            };
            scratch.push(v);
        }
        match self.output {
            Ref::Input { group, bit } => inputs[self.offsets[group] + bit],
            Ref::Gate(i) => scratch[i],
        }
    }

    /// Full truth table indexed by the MSB-first number of the flat input.
    pub fn truth_table(&self) -> Result<Vec<bool>> {
        let w = self.input_width();
        if w > 24 {
            return Err(Error::Capacity(format!("truth table of {w} inputs")));
        }
        let mut scratch = Vec::new();
        Ok((0..1u64 << w)
            .map(|v| self.eval_with(&to_bits(v, w), &mut scratch))
            .collect())
    }
}

pub(crate) fn kleene_and(vals: impl Iterator<Item = Option<bool>>) -> Option<bool> {
    let mut unknown = false;
    for v in vals {
        match v {
            Some(false) => return Some(false),
            None => unknown = true,
            Some(true) => {}
        }
    }
    if unknown {
        None
    } else {
        Some(true)
    }
}

pub(crate) fn kleene_or(vals: impl Iterator<Item = Option<bool>>) -> Option<bool> {
    kleene_and(vals.map(|v| v.map(|b| !b))).map(|b| !b)
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_circuit(self))
    }
}

/// Incremental construction of a [`Circuit`]. Input groups may be declared
/// at any point; gate ids are generated as `g0`, `g1`, ...
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    name: String,
    groups: Vec<InputGroup>,
    gates: Vec<Gate>,
    consts: [Option<Ref>; 2],
}

impl CircuitBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitBuilder {
            name: name.into(),
            groups: Vec::new(),
            gates: Vec::new(),
            consts: [None, None],
        }
    }

    pub fn input(&mut self, name: &str, width: usize) -> Result<Vec<Ref>> {
        if self.groups.iter().any(|g| g.name == name) {
            return Err(Error::InvalidInstance(format!("duplicate input group `{name}`")));
        }
        let group = self.groups.len();
        self.groups.push(InputGroup {
            name: name.to_string(),
            width,
        });
        Ok((0..width).map(|bit| Ref::Input { group, bit }).collect())
    }

    /// Refs of an already declared group.
    pub fn group(&self, name: &str) -> Option<Vec<Ref>> {
        let group = self.groups.iter().position(|g| g.name == name)?;
        Some(
            (0..self.groups[group].width)
                .map(|bit| Ref::Input { group, bit })
                .collect(),
        )
    }

    /// Declares `name` or, when it already exists with the same width,
    /// returns its refs.
    pub fn input_or_existing(&mut self, name: &str, width: usize) -> Result<Vec<Ref>> {
        match self.groups.iter().find(|g| g.name == name) {
            Some(g) if g.width != width => Err(Error::WidthMismatch(format!(
                "group `{name}` declared with widths {} and {width}",
                g.width
            ))),
            Some(_) => Ok(self.group(name).unwrap_or_default()),
            None => self.input(name, width),
        }
    }

    fn push(&mut self, kind: GateKind, operands: Vec<Ref>) -> Ref {
        let id = self.gates.len();
        self.gates.push(Gate {
            id: format!("g{id}"),
            kind,
            operands,
        });
        Ref::Gate(id)
    }

    pub fn constant(&mut self, value: bool) -> Ref {
        if let Some(r) = self.consts[value as usize] {
            return r;
        }
        let r = self.push(GateKind::Const(value), Vec::new());
        self.consts[value as usize] = Some(r);
        r
    }

    pub fn and(&mut self, operands: impl IntoIterator<Item = Ref>) -> Ref {
        let ops: Vec<Ref> = operands.into_iter().collect();
        match ops.len() {
            0 => self.constant(true),
            1 => ops[0],
            _ => self.push(GateKind::And, ops),
        }
    }

    pub fn or(&mut self, operands: impl IntoIterator<Item = Ref>) -> Ref {
        let ops: Vec<Ref> = operands.into_iter().collect();
        match ops.len() {
            0 => self.constant(false),
            1 => ops[0],
            _ => self.push(GateKind::Or, ops),
        }
    }

    pub fn not(&mut self, a: Ref) -> Ref {
        self.push(GateKind::Not, vec![a])
    }

    pub fn xor(&mut self, a: Ref, b: Ref) -> Ref {
        self.push(GateKind::Xor, vec![a, b])
    }

    pub fn iff(&mut self, a: Ref, b: Ref) -> Ref {
        let x = self.xor(a, b);
        self.not(x)
    }

    pub fn implies(&mut self, a: Ref, b: Ref) -> Ref {
        let na = self.not(a);
        self.or([na, b])
    }

    /// 1 iff the two bit vectors are identical.
    pub fn eq_bits(&mut self, a: &[Ref], b: &[Ref]) -> Ref {
        assert_eq!(a.len(), b.len(), "eq_bits on vectors of different width");
        let terms: Vec<Ref> = a.iter().zip(b).map(|(&x, &y)| self.iff(x, y)).collect();
        self.and(terms)
    }

    pub fn neq_bits(&mut self, a: &[Ref], b: &[Ref]) -> Ref {
        let e = self.eq_bits(a, b);
        self.not(e)
    }

    /// 1 iff `bits` encodes `value` (MSB-first).
    pub fn eq_const(&mut self, bits: &[Ref], value: u64) -> Ref {
        let w = bits.len();
        let lits: Vec<Ref> = bits
            .iter()
            .zip(to_bits(value, w))
            .map(|(&b, v)| if v { b } else { self.not(b) })
            .collect();
        self.and(lits)
    }

    /// 1 iff every bit is set.
    pub fn all_ones(&mut self, bits: &[Ref]) -> Ref {
        self.and(bits.iter().copied())
    }

    /// 1 iff num(next) = num(prev) + 1 mod 2^w.
    pub fn successor(&mut self, prev: &[Ref], next: &[Ref]) -> Ref {
        assert_eq!(prev.len(), next.len());
        let w = prev.len();
        let mut terms = Vec::with_capacity(w);
        for i in 0..w {
            // carry into position i: every less significant bit of prev is 1
            let carry = self.and(prev[i + 1..].iter().copied());
            let expected = self.xor(prev[i], carry);
            terms.push(self.iff(next[i], expected));
        }
        self.and(terms)
    }

    /// Successor without the wrap from 1^w to 0^w.
    pub fn successor_nowrap(&mut self, prev: &[Ref], next: &[Ref]) -> Ref {
        let s = self.successor(prev, next);
        let top = self.all_ones(prev);
        let not_top = self.not(top);
        self.and([s, not_top])
    }

    /// 1 iff num(bits) < k. Requires k <= 2^w.
    pub fn lt_const(&mut self, bits: &[Ref], k: u64) -> Result<Ref> {
        let w = bits.len();
        if w < 64 && k > 1u64 << w {
            return Err(Error::Range(format!("threshold {k} exceeds 2^{w}")));
        }
        if w < 64 && k == 1u64 << w {
            return Ok(self.constant(true));
        }
        if k == 0 {
            return Ok(self.constant(false));
        }
        let kb = to_bits(k, w);
        let mut cases = Vec::new();
        let mut prefix = Vec::new();
        for i in 0..w {
            if kb[i] {
                let nb = self.not(bits[i]);
                let mut lits = prefix.clone();
                lits.push(nb);
                cases.push(self.and(lits));
                prefix.push(bits[i]);
            } else {
                let nb = self.not(bits[i]);
                prefix.push(nb);
            }
        }
        Ok(self.or(cases))
    }

    /// Inlines `c`, binding each of its groups (declaration order) to refs of
    /// this builder. Returns the ref of c's output.
    pub fn embed(&mut self, c: &Circuit, inputs: &[Vec<Ref>]) -> Result<Ref> {
        if inputs.len() != c.groups.len() {
            return Err(Error::WidthMismatch(format!(
                "`{}` has {} groups, {} bound",
                c.name,
                c.groups.len(),
                inputs.len()
            )));
        }
        for (g, refs) in c.groups.iter().zip(inputs) {
            if g.width != refs.len() {
                return Err(Error::WidthMismatch(format!(
                    "group `{}` of `{}` has width {}, bound to {} bits",
                    g.name,
                    c.name,
                    g.width,
                    refs.len()
                )));
            }
        }
        let mut map: Vec<Ref> = Vec::with_capacity(c.gates.len());
        let resolve = |r: Ref, map: &[Ref]| match r {
            Ref::Input { group, bit } => inputs[group][bit],
            Ref::Gate(i) => map[i],
        };
        for gate in &c.gates {
            let ops: Vec<Ref> = gate.operands.iter().map(|&r| resolve(r, &map)).collect();
            let r = match gate.kind {
                GateKind::Const(v) => self.constant(v),
                GateKind::And => self.and(ops),
                GateKind::Or => self.or(ops),
                GateKind::Not => self.not(ops[0]),
                GateKind::Xor => self.xor(ops[0], ops[1]),
            };
            map.push(r);
        }
        Ok(resolve(c.output, &map))
    }

    pub fn finish(self, output: Ref) -> Circuit {
        Circuit::from_parts(self.name, self.groups, self.gates, output)
    }
}

/// Circuit over groups `x`, `y` (width n): 1 iff x = y.
pub fn build_equality(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidWidth("equality needs n >= 1".into()));
    }
    let mut b = CircuitBuilder::new(format!("eq{n}"));
    let x = b.input("x", n)?;
    let y = b.input("y", n)?;
    let out = b.eq_bits(&x, &y);
    Ok(b.finish(out))
}

/// Circuit over groups `prev`, `next` (width n): 1 iff
/// num(next) = num(prev) + 1 mod 2^n. The argument order is (prev, next)
/// everywhere in this crate.
pub fn build_successor(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidWidth("successor needs n >= 1".into()));
    }
    let mut b = CircuitBuilder::new(format!("succ{n}"));
    let prev = b.input("prev", n)?;
    let next = b.input("next", n)?;
    let out = b.successor(&prev, &next);
    Ok(b.finish(out))
}

/// Circuit over group `x` (width n): 1 iff num(x) < k.
pub fn build_threshold_lt(n: usize, k: u64) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidWidth("threshold needs n >= 1".into()));
    }
    let mut b = CircuitBuilder::new(format!("lt{n}_{k}"));
    let x = b.input("x", n)?;
    let out = b.lt_const(&x, k)?;
    Ok(b.finish(out))
}

/// Builds the disjunction of minterms of `f` over the given groups.
pub fn from_truth_table(name: &str, groups: &[(&str, usize)], f: impl Fn(&[bool]) -> bool) -> Circuit {
    let mut b = CircuitBuilder::new(name);
    let mut refs = Vec::new();
    for &(g, w) in groups {
        refs.extend(b.input(g, w).expect("distinct group names"));
    }
    let w = refs.len();
    let mut minterms = Vec::new();
    for v in 0..1u64 << w {
        let bits = to_bits(v, w);
        if f(&bits) {
            let t = b.eq_const(&refs, v);
            minterms.push(t);
        }
    }
    let out = b.or(minterms);
    b.finish(out)
}

/// How a group is replaced by [`substitute`].
#[derive(Clone, Debug)]
pub enum Binding {
    /// One single-output circuit per bit; their groups become groups of the
    /// result (merged by name).
    Circuits(Vec<Circuit>),
    /// Rename the group; merges with an existing group of the same name.
    Rename(String),
    /// Fix the group to constant bits.
    Const(Vec<bool>),
}

/// Composes `c` with the given bindings. Unbound groups pass through.
pub fn substitute(c: &Circuit, bindings: &BTreeMap<String, Binding>) -> Result<Circuit> {
    for name in bindings.keys() {
        if c.group_index(name).is_none() {
            return Err(Error::UnknownGroup(name.clone()));
        }
    }
    let mut b = CircuitBuilder::new(c.name.clone());
    // declare result groups first so the group order is predictable
    for g in &c.groups {
        match bindings.get(&g.name) {
            None => {
                b.input_or_existing(&g.name, g.width)?;
            }
            Some(Binding::Rename(new)) => {
                b.input_or_existing(new, g.width)?;
            }
            Some(Binding::Const(bits)) => {
                if bits.len() != g.width {
                    return Err(Error::WidthMismatch(format!(
                        "constant of {} bits for group `{}` of width {}",
                        bits.len(),
                        g.name,
                        g.width
                    )));
                }
            }
            Some(Binding::Circuits(ds)) => {
                if ds.len() != g.width {
                    return Err(Error::WidthMismatch(format!(
                        "{} circuits for group `{}` of width {}",
                        ds.len(),
                        g.name,
                        g.width
                    )));
                }
                for d in ds {
                    for dg in &d.groups {
                        b.input_or_existing(&dg.name, dg.width)?;
                    }
                }
            }
        }
    }
    let mut inputs = Vec::with_capacity(c.groups.len());
    for g in &c.groups {
        let refs = match bindings.get(&g.name) {
            None => b.group(&g.name).unwrap_or_default(),
            Some(Binding::Rename(new)) => b.group(new).unwrap_or_default(),
            Some(Binding::Const(bits)) => bits.iter().map(|&v| b.constant(v)).collect(),
            Some(Binding::Circuits(ds)) => {
                let mut refs = Vec::with_capacity(ds.len());
                for d in ds {
                    let sub: Vec<Vec<Ref>> = d
                        .groups
                        .iter()
                        .map(|dg| b.group(&dg.name).unwrap_or_default())
                        .collect();
                    refs.push(b.embed(d, &sub)?);
                }
                refs
            }
        };
        inputs.push(refs);
    }
    let out = b.embed(c, &inputs)?;
    Ok(b.finish(out))
}

fn fmt_ref(c: &Circuit, r: Ref) -> String {
    match r {
        Ref::Input { group, bit } => format!("{}[{}]", c.groups[group].name, bit),
        Ref::Gate(i) => c.gates[i].id.clone(),
    }
}

/// Serializes a circuit in the line-based text format.
pub fn emit_circuit(c: &Circuit) -> String {
    let mut out = format!("circuit {}\n", c.name);
    for g in &c.groups {
        out.push_str(&format!("inputs {} {}\n", g.name, g.width));
    }
    for gate in &c.gates {
        out.push_str(&format!("gate {} = {}", gate.id, gate.kind.keyword()));
        if let GateKind::Const(v) = gate.kind {
            out.push_str(if v { " 1" } else { " 0" });
        }
        for &r in &gate.operands {
            out.push(' ');
            out.push_str(&fmt_ref(c, r));
        }
        out.push('\n');
    }
    out.push_str(&format!("output {}\n", fmt_ref(c, c.output)));
    out
}

enum RawRef {
    Input { group: usize, bit: usize },
    Gate(String),
}

struct RawGate {
    line: usize,
    id: String,
    kind: GateKind,
    operands: Vec<RawRef>,
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && !s.contains(['[', ']', '=', '#'])
}

fn parse_raw_ref(tok: &str, groups: &[InputGroup], line: usize) -> Result<RawRef> {
    if let Some(open) = tok.find('[') {
        let name = &tok[..open];
        let idx = tok[open + 1..]
            .strip_suffix(']')
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(line, format!("bad input reference `{tok}`")))?;
        let group = groups
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::parse(line, format!("dangling reference `{tok}`: unknown group")))?;
        if idx >= groups[group].width {
            return Err(Error::parse(
                line,
                format!("dangling reference `{tok}`: index out of range"),
            ));
        }
        Ok(RawRef::Input { group, bit: idx })
    } else if valid_ident(tok) {
        Ok(RawRef::Gate(tok.to_string()))
    } else {
        Err(Error::parse(line, format!("bad reference `{tok}`")))
    }
}

/// Parses the line-based text format. Gates may appear in any order as long
/// as the references are acyclic; the result is topologically ordered.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut name: Option<String> = None;
    let mut groups: Vec<InputGroup> = Vec::new();
    let mut raw: Vec<RawGate> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut output: Option<(usize, RawRef)> = None;

    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if output.is_some() {
            return Err(Error::parse(line, "content after `output` line"));
        }
        match toks[0] {
            "circuit" => {
                if name.is_some() {
                    return Err(Error::parse(line, "duplicate `circuit` line"));
                }
                if toks.len() != 2 {
                    return Err(Error::parse(line, "expected `circuit <name>`"));
                }
                name = Some(toks[1].to_string());
            }
            "inputs" => {
                if name.is_none() {
                    return Err(Error::parse(line, "`inputs` before `circuit`"));
                }
                if !raw.is_empty() {
                    return Err(Error::parse(line, "`inputs` after gates"));
                }
                if toks.len() != 3 || !valid_ident(toks[1]) {
                    return Err(Error::parse(line, "expected `inputs <group> <width>`"));
                }
                let width: usize = toks[2]
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad width `{}`", toks[2])))?;
                if groups.iter().any(|g| g.name == toks[1]) {
                    return Err(Error::parse(line, format!("duplicate group `{}`", toks[1])));
                }
                groups.push(InputGroup {
                    name: toks[1].to_string(),
                    width,
                });
            }
            "gate" => {
                if name.is_none() {
                    return Err(Error::parse(line, "`gate` before `circuit`"));
                }
                if toks.len() < 4 || toks[2] != "=" {
                    return Err(Error::parse(line, "expected `gate <id> = <KIND> <operands>`"));
                }
                let id = toks[1];
                if !valid_ident(id) {
                    return Err(Error::parse(line, format!("bad gate id `{id}`")));
                }
                if ids.contains_key(id) {
                    return Err(Error::parse(line, format!("duplicate gate id `{id}`")));
                }
                let args = &toks[4..];
                let (kind, operand_toks): (GateKind, &[&str]) = match toks[3] {
                    "AND" | "OR" => {
                        if args.is_empty() {
                            return Err(Error::parse(line, format!("arity: {} needs operands", toks[3])));
                        }
                        let k = if toks[3] == "AND" { GateKind::And } else { GateKind::Or };
                        (k, args)
                    }
                    "NOT" => {
                        if args.len() != 1 {
                            return Err(Error::parse(line, "arity: NOT takes one operand"));
                        }
                        (GateKind::Not, args)
                    }
                    "XOR" => {
                        if args.len() != 2 {
                            return Err(Error::parse(line, "arity: XOR takes two operands"));
                        }
                        (GateKind::Xor, args)
                    }
                    "CONST" => match args {
                        ["0"] => (GateKind::Const(false), &[]),
                        ["1"] => (GateKind::Const(true), &[]),
                        _ => return Err(Error::parse(line, "arity: CONST takes 0 or 1")),
                    },
                    other => return Err(Error::parse(line, format!("unknown gate kind `{other}`"))),
                };
                let operands = operand_toks
                    .iter()
                    .map(|t| parse_raw_ref(t, &groups, line))
                    .collect::<Result<Vec<_>>>()?;
                ids.insert(id.to_string(), raw.len());
                raw.push(RawGate {
                    line,
                    id: id.to_string(),
                    kind,
                    operands,
                });
            }
            "output" => {
                if toks.len() != 2 {
                    return Err(Error::parse(line, "expected `output <ref>`"));
                }
                output = Some((line, parse_raw_ref(toks[1], &groups, line)?));
            }
            other => return Err(Error::parse(line, format!("unknown directive `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| Error::parse(1, "missing `circuit` line"))?;
    let (out_line, out_raw) =
        output.ok_or_else(|| Error::parse(text.lines().count().max(1), "missing `output` line"))?;

    // resolve gate references
    let lookup = |r: &RawRef, line: usize| -> Result<Result<usize, Ref>> {
        match r {
            RawRef::Input { group, bit } => Ok(Err(Ref::Input {
                group: *group,
                bit: *bit,
            })),
            RawRef::Gate(id) => ids
                .get(id)
                .copied()
                .map(Ok)
                .ok_or_else(|| Error::parse(line, format!("dangling reference `{id}`"))),
        }
    };
    let mut deps: Vec<Vec<Result<usize, Ref>>> = Vec::with_capacity(raw.len());
    for g in &raw {
        deps.push(
            g.operands
                .iter()
                .map(|r| lookup(r, g.line))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let out_dep = lookup(&out_raw, out_line)?;

    // topological order by iterative DFS, preserving file order when possible
    let mut state = vec![0u8; raw.len()]; // 0 new, 1 on stack, 2 done
    let mut order: Vec<usize> = Vec::with_capacity(raw.len());
    for start in 0..raw.len() {
        if state[start] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        state[start] = 1;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(dep) = deps[node].get(*next) {
                *next += 1;
                if let Ok(d) = *dep {
                    match state[d] {
                        0 => {
                            state[d] = 1;
                            stack.push((d, 0));
                        }
                        1 => {
                            return Err(Error::parse(
                                raw[node].line,
                                format!("cyclic reference through `{}`", raw[d].id),
                            ))
                        }
                        _ => {}
                    }
                }
            } else {
                state[node] = 2;
                order.push(node);
                stack.pop();
            }
        }
    }
    let mut position = vec![0usize; raw.len()];
    for (pos, &g) in order.iter().enumerate() {
        position[g] = pos;
    }
    let conv = |d: &Result<usize, Ref>| match *d {
        Ok(g) => Ref::Gate(position[g]),
        Err(r) => r,
    };
    let gates: Vec<Gate> = order
        .iter()
        .map(|&g| Gate {
            id: raw[g].id.clone(),
            kind: raw[g].kind,
            operands: deps[g].iter().map(conv).collect(),
        })
        .collect();
    Ok(Circuit::from_parts(name, groups, gates, conv(&out_dep)))
}
