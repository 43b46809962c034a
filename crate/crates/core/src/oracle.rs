//! Brute-force ground truth: explicit expansion of succinct instances,
//! exhaustive checkers per problem and the agreement-function search.

use std::collections::HashMap;
use std::fmt;

use crate::circuit::{bit_string, to_bits};
use crate::error::{Error, Result};
use crate::reductions::{
    Instance, Ntm, ProjectionCircuit, SetFamilyInstance, SubsetSumInstance, SuccinctGraph, SuccinctSat,
};

const MAX_GRAPH_BITS: usize = 12;
const MAX_SEARCH_BITS: usize = 8;
const MAX_PERMUTATION_BITS: usize = 4;
const MAX_TABLE_INPUTS: usize = 22;
const MAX_RUN_T: usize = 3;
const MAX_CONFIGS: usize = 1 << 20;

/// Adjacency matrix of a graph on `2^n` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitGraph {
    pub vertex_bits: usize,
    adj: Vec<bool>,
}

impl ExplicitGraph {
    pub fn vertex_count(&self) -> usize {
        1 << self.vertex_bits
    }

    pub fn has(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.vertex_count() + v]
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&e| e).count()
    }

    pub fn is_undirected(&self) -> bool {
        let n = self.vertex_count();
        (0..n).all(|u| (0..n).all(|v| self.has(u, v) == self.has(v, u)))
    }

    pub fn is_selfloop_free(&self) -> bool {
        (0..self.vertex_count()).all(|v| !self.has(v, v))
    }
}

/// Evaluates the edge circuit on every pair. Flags set on the graph are
/// checked here and reported as a precondition error when they fail.
pub fn expand_graph(g: &SuccinctGraph) -> Result<ExplicitGraph> {
    if g.vertex_bits > MAX_GRAPH_BITS {
        return Err(Error::Capacity(format!(
            "graph has 2^{} vertices, expansion is limited to 2^{MAX_GRAPH_BITS}",
            g.vertex_bits
        )));
    }
    let n = g.vertex_count();
    let mut adj = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            adj.push(g.has_edge(u as u64, v as u64));
        }
    }
    let e = ExplicitGraph {
        vertex_bits: g.vertex_bits,
        adj,
    };
    if g.undirected_expected && !e.is_undirected() {
        return Err(Error::Precondition("graph was declared undirected but is not".into()));
    }
    if g.selfloop_free_expected && !e.is_selfloop_free() {
        return Err(Error::Precondition(
            "graph was declared loop-free but has a self-loop".into(),
        ));
    }
    Ok(e)
}

/// Certificate for a yes-answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Colour 1..=3 per vertex.
    Coloring {
        bits: usize,
        colors: Vec<u8>,
    },
    /// Vertices in cycle order.
    Cycle {
        bits: usize,
        order: Vec<u64>,
    },
    /// Chosen set names, one per index below k.
    Packing {
        bits: usize,
        names: Vec<u64>,
    },
    /// Indices of the chosen numbers.
    Subset {
        bits: usize,
        members: Vec<u64>,
    },
    VertexSet {
        bits: usize,
        members: Vec<u64>,
    },
    /// Image of each pattern vertex.
    Embedding {
        from_bits: usize,
        to_bits: usize,
        map: Vec<u64>,
    },
    Assignment {
        bits: usize,
        values: Vec<bool>,
    },
    /// Tableau cell codes indexed by `(i << t) | j`.
    Run {
        t: usize,
        cells: Vec<u64>,
    },
    Agreement {
        point_bits: usize,
        value_bits: usize,
        table: Vec<u64>,
    },
}

fn bits(v: u64, w: usize) -> String {
    bit_string(&to_bits(v, w))
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, tag: &str, w: usize, xs: &[u64]| -> fmt::Result {
            write!(f, "{tag}")?;
            for &x in xs {
                write!(f, " {}", bits(x, w))?;
            }
            Ok(())
        };
        match self {
            Witness::Coloring { bits: w, colors } => {
                write!(f, "coloring")?;
                for (v, c) in colors.iter().enumerate() {
                    write!(f, " {}={c}", bits(v as u64, *w))?;
                }
                Ok(())
            }
            Witness::Cycle { bits: w, order } => list(f, "cycle", *w, order),
            Witness::Packing { bits: w, names } => list(f, "packing", *w, names),
            Witness::Subset { bits: w, members } => list(f, "subset", *w, members),
            Witness::VertexSet { bits: w, members } => list(f, "vertices", *w, members),
            Witness::Embedding {
                from_bits,
                to_bits,
                map,
            } => {
                write!(f, "embedding")?;
                for (v, img) in map.iter().enumerate() {
                    write!(f, " {}={}", bits(v as u64, *from_bits), bits(*img, *to_bits))?;
                }
                Ok(())
            }
            Witness::Assignment { bits: w, values } => {
                write!(f, "assignment")?;
                for (v, &x) in values.iter().enumerate() {
                    write!(f, " {}={}", bits(v as u64, *w), x as u8)?;
                }
                Ok(())
            }
            Witness::Run { t, cells } => {
                write!(f, "run")?;
                for (p, c) in cells.iter().enumerate() {
                    let (i, j) = (p >> t, p & ((1 << t) - 1));
                    write!(f, " {}.{}={c}", bits(i as u64, *t), bits(j as u64, *t))?;
                }
                Ok(())
            }
            Witness::Agreement {
                point_bits,
                value_bits,
                table,
            } => {
                write!(f, "agreement")?;
                for (p, v) in table.iter().enumerate() {
                    write!(f, " {}={}", bits(p as u64, *point_bits), bits(*v, *value_bits))?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes(Witness),
    No,
}

impl Answer {
    pub fn is_yes(&self) -> bool {
        matches!(self, Answer::Yes(_))
    }
}

fn limit(what: &str, bits: usize, max: usize) -> Result<()> {
    if bits > max {
        Err(Error::Capacity(format!(
            "{what} has {bits} bits, the oracle handles at most {max}"
        )))
    } else {
        Ok(())
    }
}

/// Decides the instance by exhaustive search on its explicit form.
pub fn oracle_check(inst: &Instance) -> Result<Answer> {
    match inst {
        Instance::ThreeCol(g) => {
            limit("graph", g.vertex_bits, MAX_SEARCH_BITS)?;
            three_coloring(&expand_graph(g)?)
        }
        Instance::Hamiltonian(g) => {
            limit("graph", g.vertex_bits, MAX_PERMUTATION_BITS)?;
            hamiltonian(&expand_graph(g)?)
        }
        Instance::SetPacking(s) => set_packing(s),
        Instance::SubsetSum(s) => subset_sum(s),
        Instance::IndependentSet(g, k) => {
            limit("graph", g.vertex_bits, MAX_SEARCH_BITS)?;
            independent_set(&expand_graph(g)?, *k)
        }
        Instance::SubgraphIso(g1, g2) => {
            limit("pattern", g1.vertex_bits, MAX_PERMUTATION_BITS)?;
            limit("host", g2.vertex_bits, MAX_PERMUTATION_BITS)?;
            if g1.vertex_bits > g2.vertex_bits {
                return Err(Error::InvalidInstance("pattern is wider than host".into()));
            }
            subgraph_iso(&expand_graph(g1)?, &expand_graph(g2)?)
        }
        Instance::VertexCover(g, k) => {
            limit("graph", g.vertex_bits, MAX_SEARCH_BITS)?;
            vertex_cover(&expand_graph(g)?, *k)
        }
        Instance::DominatingSet(g, k) => {
            limit("graph", g.vertex_bits, MAX_PERMUTATION_BITS)?;
            dominating_set(&expand_graph(g)?, *k)
        }
        Instance::Sat(s) => succinct_sat(s),
        Instance::Ntm(i) => Ok(match ntm_run_oracle(&i.machine, &i.word, i.t)? {
            Some(cells) => Answer::Yes(Witness::Run { t: i.t, cells }),
            None => Answer::No,
        }),
    }
}

fn three_coloring(g: &ExplicitGraph) -> Result<Answer> {
    let n = g.vertex_count();
    let mut colors = vec![0u8; n];
    fn go(g: &ExplicitGraph, v: usize, colors: &mut [u8]) -> bool {
        if v == colors.len() {
            return true;
        }
        for c in 1..=3 {
            let clash = g.has(v, v) || (0..v).any(|u| colors[u] == c && (g.has(u, v) || g.has(v, u)));
            if !clash {
                colors[v] = c;
                if go(g, v + 1, colors) {
                    return true;
                }
            }
        }
        false
    }
    Ok(if go(g, 0, &mut colors) {
        Answer::Yes(Witness::Coloring {
            bits: g.vertex_bits,
            colors,
        })
    } else {
        Answer::No
    })
}

fn hamiltonian(g: &ExplicitGraph) -> Result<Answer> {
    let n = g.vertex_count();
    // every cycle passes through vertex 0, so start there
    let mut order = vec![0usize];
    let mut used = vec![false; n];
    used[0] = true;
    fn go(g: &ExplicitGraph, order: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let n = used.len();
        let last = *order.last().expect("nonempty");
        if order.len() == n {
            return g.has(last, order[0]);
        }
        for v in 0..n {
            if !used[v] && g.has(last, v) {
                used[v] = true;
                order.push(v);
                if go(g, order, used) {
                    return true;
                }
                order.pop();
                used[v] = false;
            }
        }
        false
    }
    Ok(if go(g, &mut order, &mut used) {
        Answer::Yes(Witness::Cycle {
            bits: g.vertex_bits,
            order: order.into_iter().map(|v| v as u64).collect(),
        })
    } else {
        Answer::No
    })
}

fn set_packing(s: &SetFamilyInstance) -> Result<Answer> {
    limit("element space", s.element_bits, MAX_SEARCH_BITS)?;
    limit("name space", s.name_bits, MAX_SEARCH_BITS)?;
    if s.k == 0 {
        return Err(Error::InvalidParameter("set packing needs k >= 1".into()));
    }
    if s.k > 1 << 16 {
        return Err(Error::Capacity(format!(
            "k = {} is too large for an explicit packing",
            s.k
        )));
    }
    let k = s.k as usize;
    let sets: Vec<Vec<bool>> = (0..1u64 << s.name_bits)
        .map(|b| (0..1u64 << s.element_bits).map(|a| s.contains(b, a)).collect())
        .collect();
    let witness = |names: Vec<u64>| {
        Answer::Yes(Witness::Packing {
            bits: s.name_bits,
            names,
        })
    };
    // an empty set may be chosen for every index
    if let Some(e) = sets.iter().position(|set| set.iter().all(|&x| !x)) {
        return Ok(witness(vec![e as u64; k]));
    }
    if k > sets.len() {
        return Ok(Answer::No);
    }
    let disjoint = |x: &[bool], y: &[bool]| x.iter().zip(y).all(|(&a, &b)| !(a && b));
    fn go(
        sets: &[Vec<bool>],
        k: usize,
        from: usize,
        chosen: &mut Vec<usize>,
        disjoint: &dyn Fn(&[bool], &[bool]) -> bool,
    ) -> bool {
        if chosen.len() == k {
            return true;
        }
        for b in from..sets.len() {
            if chosen.iter().all(|&c| disjoint(&sets[c], &sets[b])) {
                chosen.push(b);
                if go(sets, k, b + 1, chosen, disjoint) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    Ok(if go(&sets, k, 0, &mut chosen, &disjoint) {
        witness(chosen.into_iter().map(|b| b as u64).collect())
    } else {
        Answer::No
    })
}

/// `s_i` and `t` as integers.
pub fn subset_sum_numbers(s: &SubsetSumInstance) -> Result<(Vec<u64>, u64)> {
    let n1 = s.c1.groups()[0].width;
    let n2 = s.c2.groups()[0].width;
    let m = s.index_bits();
    limit("number width", n1.max(n2), 16)?;
    limit("index width", m, 16)?;
    let number =
        |f: &dyn Fn(u64) -> bool, width: usize| -> u64 { (0..width as u64).filter(|&a| f(a)).map(|a| 1u64 << a).sum() };
    let nums = (0..1u64 << m)
        .map(|b| {
            number(
                &|a| {
                    let mut bits = to_bits(a, n1);
                    bits.extend(to_bits(b, m));
                    s.c1.eval_bits(&bits)
                },
                1 << n1,
            )
        })
        .collect();
    let t = number(&|a| s.c2.eval_bits(&to_bits(a, n2)), 1 << n2);
    Ok((nums, t))
}

fn subset_sum(s: &SubsetSumInstance) -> Result<Answer> {
    let (nums, t) = subset_sum_numbers(s)?;
    if t > 1 << 24 {
        return Err(Error::Capacity("target too large for the table".into()));
    }
    let t = t as usize;
    // reach[i][x]: some subset of the first i numbers sums to x
    let mut reach = vec![vec![false; t + 1]];
    reach[0][0] = true;
    for &s in &nums {
        let prev = reach.last().expect("row");
        let mut row = prev.clone();
        for x in 0..=t {
            if prev[x] && x + (s as usize) <= t && (s as usize) <= t {
                row[x + s as usize] = true;
            }
        }
        reach.push(row);
    }
    if !reach[nums.len()][t] {
        return Ok(Answer::No);
    }
    let mut members = Vec::new();
    let mut x = t;
    for i in (0..nums.len()).rev() {
        if !reach[i][x] {
            members.push(i as u64);
            x -= nums[i] as usize;
        }
    }
    members.reverse();
    Ok(Answer::Yes(Witness::Subset {
        bits: s.index_bits(),
        members,
    }))
}

fn independent_set(g: &ExplicitGraph, k: u64) -> Result<Answer> {
    if k == 0 {
        return Err(Error::InvalidParameter("independent set needs k >= 1".into()));
    }
    let n = g.vertex_count();
    if k as usize > n {
        return Ok(Answer::No);
    }
    fn go(g: &ExplicitGraph, k: usize, from: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == k {
            return true;
        }
        for v in from..g.vertex_count() {
            if chosen.iter().all(|&u| !g.has(u, v) && !g.has(v, u)) {
                chosen.push(v);
                if go(g, k, v + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    Ok(if go(g, k as usize, 0, &mut chosen) {
        Answer::Yes(Witness::VertexSet {
            bits: g.vertex_bits,
            members: chosen.into_iter().map(|v| v as u64).collect(),
        })
    } else {
        Answer::No
    })
}

fn subgraph_iso(g1: &ExplicitGraph, g2: &ExplicitGraph) -> Result<Answer> {
    let mut map: Vec<usize> = Vec::new();
    let mut used = vec![false; g2.vertex_count()];
    fn go(g1: &ExplicitGraph, g2: &ExplicitGraph, map: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let a = map.len();
        if a == g1.vertex_count() {
            return true;
        }
        for v in 0..g2.vertex_count() {
            if used[v] || g1.has(a, a) != g2.has(v, v) {
                continue;
            }
            let fits = map
                .iter()
                .enumerate()
                .all(|(b, &w)| g1.has(a, b) == g2.has(v, w) && g1.has(b, a) == g2.has(w, v));
            if fits {
                used[v] = true;
                map.push(v);
                if go(g1, g2, map, used) {
                    return true;
                }
                map.pop();
                used[v] = false;
            }
        }
        false
    }
    Ok(if go(g1, g2, &mut map, &mut used) {
        Answer::Yes(Witness::Embedding {
            from_bits: g1.vertex_bits,
            to_bits: g2.vertex_bits,
            map: map.into_iter().map(|v| v as u64).collect(),
        })
    } else {
        Answer::No
    })
}

fn vertex_cover(g: &ExplicitGraph, k: u64) -> Result<Answer> {
    let n = g.vertex_count();
    fn go(g: &ExplicitGraph, budget: usize, cover: &mut Vec<bool>) -> bool {
        let n = cover.len();
        let open = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .find(|&(u, v)| g.has(u, v) && !cover[u] && !cover[v]);
        let Some((u, v)) = open else { return true };
        if budget == 0 {
            return false;
        }
        for w in if u == v { vec![u] } else { vec![u, v] } {
            cover[w] = true;
            if go(g, budget - 1, cover) {
                return true;
            }
            cover[w] = false;
        }
        false
    }
    let mut cover = vec![false; n];
    let budget = (k as usize).min(n);
    Ok(if go(g, budget, &mut cover) {
        Answer::Yes(Witness::VertexSet {
            bits: g.vertex_bits,
            members: (0..n).filter(|&v| cover[v]).map(|v| v as u64).collect(),
        })
    } else {
        Answer::No
    })
}

fn dominating_set(g: &ExplicitGraph, k: u64) -> Result<Answer> {
    if k == 0 {
        return Err(Error::InvalidParameter("dominating set needs k >= 1".into()));
    }
    let n = g.vertex_count();
    let dominated = |set: u64| (0..n).all(|a| set >> a & 1 == 1 || (0..n).any(|c| set >> c & 1 == 1 && g.has(a, c)));
    let mut found = None;
    for size in 1..=(k.min(n as u64) as u32) {
        if let Some(s) = (0..1u64 << n).find(|s| s.count_ones() == size && dominated(*s)) {
            found = Some(s);
            break;
        }
    }
    Ok(match found {
        Some(s) => Answer::Yes(Witness::VertexSet {
            bits: g.vertex_bits,
            members: (0..n as u64).filter(|&v| s >> v & 1 == 1).collect(),
        }),
        None => Answer::No,
    })
}

fn succinct_sat(s: &SuccinctSat) -> Result<Answer> {
    limit("variable index", s.var_bits(), 4)?;
    limit("clause index", s.clause_bits(), MAX_SEARCH_BITS)?;
    let vars = 1u64 << s.var_bits();
    let clauses: Vec<Vec<(bool, u64)>> = (0..1u64 << s.clause_bits())
        .map(|c| {
            (0..vars)
                .flat_map(|v| [(false, v), (true, v)])
                .filter(|&(neg, v)| s.contains(neg, v, c))
                .collect()
        })
        .collect();
    for a in 0..1u64 << vars {
        let sat = clauses
            .iter()
            .all(|cl| cl.iter().any(|&(neg, v)| (a >> v & 1 == 1) != neg));
        if sat {
            return Ok(Answer::Yes(Witness::Assignment {
                bits: s.var_bits(),
                values: (0..vars).map(|v| a >> v & 1 == 1).collect(),
            }));
        }
    }
    Ok(Answer::No)
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    tape: Vec<usize>,
    head: usize,
    state: usize,
}

/// Simulates every branch for exactly `2^t - 1` steps on a tape of `2^t`
/// cells. A branch dies when it has no transition or moves off the tape;
/// it accepts when the final configuration has the head on cell 0 in the
/// accepting state. Returns the tableau of the first accepting run.
pub fn ntm_run_oracle(machine: &Ntm, word: &str, t: usize) -> Result<Option<Vec<u64>>> {
    if t > MAX_RUN_T {
        return Err(Error::Capacity(format!(
            "t = {t}, the run oracle handles t <= {MAX_RUN_T}"
        )));
    }
    let w = machine.encode_word(word)?;
    let cells = 1usize << t;
    if w.len() > cells {
        return Err(Error::Capacity(format!(
            "word of length {} does not fit {cells} cells",
            w.len()
        )));
    }
    let mut tape = w.clone();
    tape.resize(cells, machine.blank);
    let start = Config {
        tape,
        head: 0,
        state: machine.initial,
    };
    // layers[j]: configurations at time j with the index of their parent
    let mut layers: Vec<Vec<(Config, usize)>> = vec![vec![(start, 0)]];
    for _ in 1..cells {
        let prev = layers.last().expect("layer");
        let mut seen: HashMap<Config, ()> = HashMap::new();
        let mut next = Vec::new();
        for (pi, (c, _)) in prev.iter().enumerate() {
            for tr in machine
                .transitions
                .iter()
                .filter(|tr| tr.state == c.state && tr.read == c.tape[c.head])
            {
                let head = match tr.step {
                    crate::reductions::Move::S => Some(c.head),
                    crate::reductions::Move::L => c.head.checked_sub(1),
                    crate::reductions::Move::R => Some(c.head + 1).filter(|&h| h < cells),
                };
                let Some(head) = head else { continue };
                let mut tape = c.tape.clone();
                tape[c.head] = tr.write;
                let nc = Config {
                    tape,
                    head,
                    state: tr.next,
                };
                if seen.insert(nc.clone(), ()).is_none() {
                    next.push((nc, pi));
                }
            }
        }
        if next.len() > MAX_CONFIGS {
            return Err(Error::Capacity("too many configurations".into()));
        }
        layers.push(next);
    }
    let last = layers.last().expect("layer");
    let Some(mut idx) = last.iter().position(|(c, _)| c.head == 0 && c.state == machine.accept) else {
        return Ok(None);
    };
    let mut table = vec![0u64; cells * cells];
    for j in (0..cells).rev() {
        let (c, parent) = &layers[j][idx];
        for i in 0..cells {
            table[(i << t) | j] = if i == c.head {
                machine.head_code(c.state, c.tape[i])
            } else {
                machine.plain_code(c.tape[i])
            };
        }
        idx = *parent;
    }
    Ok(Some(table))
}

/// Rechecks a witness against the instance without using the search code.
pub fn verify_witness(inst: &Instance, w: &Witness) -> Result<bool> {
    Ok(match (inst, w) {
        (Instance::ThreeCol(g), Witness::Coloring { colors, .. }) => {
            let e = expand_graph(g)?;
            let n = e.vertex_count();
            colors.len() == n
                && colors.iter().all(|c| (1..=3).contains(c))
                && (0..n).all(|u| (0..n).all(|v| !e.has(u, v) || colors[u] != colors[v]))
        }
        (Instance::Hamiltonian(g), Witness::Cycle { order, .. }) => {
            let e = expand_graph(g)?;
            let n = e.vertex_count();
            let mut seen = vec![false; n];
            order.len() == n
                && order
                    .iter()
                    .all(|&v| (v as usize) < n && !std::mem::replace(&mut seen[v as usize], true))
                && (0..n).all(|i| e.has(order[i] as usize, order[(i + 1) % n] as usize))
        }
        (Instance::SetPacking(s), Witness::Packing { names, .. }) => {
            let elems = 1u64 << s.element_bits;
            names.len() as u64 == s.k
                && names.iter().all(|&b| b < 1 << s.name_bits)
                && (0..names.len())
                    .all(|i| (0..i).all(|j| (0..elems).all(|a| !(s.contains(names[i], a) && s.contains(names[j], a)))))
        }
        (Instance::SubsetSum(s), Witness::Subset { members, .. }) => {
            let (nums, t) = subset_sum_numbers(s)?;
            let mut sorted = members.clone();
            sorted.dedup();
            sorted.len() == members.len()
                && members.iter().all(|&i| (i as usize) < nums.len())
                && members.iter().map(|&i| nums[i as usize]).sum::<u64>() == t
        }
        (Instance::IndependentSet(g, k), Witness::VertexSet { members, .. }) => {
            let e = expand_graph(g)?;
            let mut m = members.clone();
            m.sort_unstable();
            m.dedup();
            m.len() as u64 == *k
                && m.iter().all(|&u| (u as usize) < e.vertex_count())
                && m.iter()
                    .all(|&u| m.iter().all(|&v| u == v || !e.has(u as usize, v as usize)))
        }
        (Instance::SubgraphIso(g1, g2), Witness::Embedding { map, .. }) => {
            let (e1, e2) = (expand_graph(g1)?, expand_graph(g2)?);
            let n = e1.vertex_count();
            let mut imgs = map.clone();
            imgs.sort_unstable();
            imgs.dedup();
            map.len() == n
                && imgs.len() == n
                && map.iter().all(|&v| (v as usize) < e2.vertex_count())
                && (0..n).all(|a| (0..n).all(|b| e1.has(a, b) == e2.has(map[a] as usize, map[b] as usize)))
        }
        (Instance::VertexCover(g, k), Witness::VertexSet { members, .. }) => {
            let e = expand_graph(g)?;
            let n = e.vertex_count();
            let mut inside = vec![false; n];
            for &v in members {
                if v as usize >= n {
                    return Ok(false);
                }
                inside[v as usize] = true;
            }
            inside.iter().filter(|&&x| x).count() as u64 <= *k
                && (0..n).all(|u| (0..n).all(|v| !e.has(u, v) || inside[u] || inside[v]))
        }
        (Instance::DominatingSet(g, k), Witness::VertexSet { members, .. }) => {
            let e = expand_graph(g)?;
            let n = e.vertex_count();
            let mut inside = vec![false; n];
            for &v in members {
                if v as usize >= n {
                    return Ok(false);
                }
                inside[v as usize] = true;
            }
            inside.iter().filter(|&&x| x).count() as u64 <= *k
                && (0..n).all(|a| inside[a] || (0..n).any(|c| inside[c] && e.has(a, c)))
        }
        (Instance::Sat(s), Witness::Assignment { values, .. }) => {
            let vars = 1u64 << s.var_bits();
            values.len() as u64 == vars
                && (0..1u64 << s.clause_bits()).all(|c| {
                    (0..vars).any(|v| {
                        (s.contains(false, v, c) && values[v as usize])
                            || (s.contains(true, v, c) && !values[v as usize])
                    })
                })
        }
        (Instance::Ntm(i), Witness::Run { t, cells }) => *t == i.t && check_run(&i.machine, &i.word, i.t, cells)?,
        _ => false,
    })
}

/// Checks a tableau step by step as a sequence of configurations.
fn check_run(machine: &Ntm, word: &str, t: usize, table: &[u64]) -> Result<bool> {
    let cells = 1usize << t;
    if table.len() != cells * cells {
        return Ok(false);
    }
    let mut rows = Vec::with_capacity(cells);
    for j in 0..cells {
        let mut tape = Vec::with_capacity(cells);
        let mut head = None;
        for i in 0..cells {
            match machine.decode(table[(i << t) | j]) {
                None => return Ok(false),
                Some((q, s)) => {
                    tape.push(s);
                    if let Some(q) = q {
                        if head.replace((i, q)).is_some() {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        let Some((h, q)) = head else { return Ok(false) };
        rows.push((tape, h, q));
    }
    let w = machine.encode_word(word)?;
    let mut init = w.clone();
    init.resize(cells, machine.blank);
    if rows[0].0 != init || rows[0].1 != 0 || rows[0].2 != machine.initial {
        return Ok(false);
    }
    for j in 1..cells {
        let (tape, h, q) = &rows[j - 1];
        let step_ok = machine.transitions.iter().any(|tr| {
            if tr.state != *q || tr.read != tape[*h] {
                return false;
            }
            let nh = match tr.step {
                crate::reductions::Move::S => Some(*h),
                crate::reductions::Move::L => h.checked_sub(1),
                crate::reductions::Move::R => Some(h + 1).filter(|&x| x < cells),
            };
            let mut nt = tape.clone();
            nt[*h] = tr.write;
            nh == Some(rows[j].1) && tr.next == rows[j].2 && nt == rows[j].0
        });
        if !step_ok {
            return Ok(false);
        }
    }
    let (_, h, q) = &rows[cells - 1];
    Ok(*h == 0 && *q == machine.accept)
}

/// Lexicographically first `g` agreeing with `d`, by backtracking over points
/// in order with forward checking. Each value assignment counts as one
/// search node; more than `2 * budget` nodes is a capacity error.
pub fn agreement_search(d: &ProjectionCircuit, budget: u64) -> Result<Option<Vec<u64>>> {
    let (n, m) = (d.point_width(), d.value_width());
    if n > 20 || m > 16 {
        return Err(Error::Capacity(format!("point width {n} / value width {m} too large")));
    }
    let points = 1usize << n;
    let values = 1usize << m;
    let c = d.circuit();
    let w = 2 * (n + m);
    // memo of D over all inputs when small enough: 0 unknown, 1 false, 2 true
    let mut memo: Vec<u8> = if w <= MAX_TABLE_INPUTS {
        vec![0; 1 << w]
    } else {
        Vec::new()
    };
    let mut scratch = Vec::new();
    let mut ok = |a: usize, va: usize, b: usize, vb: usize| -> bool {
        let idx = (((a << m | va) << n | b) << m) | vb;
        match memo.get(idx) {
            Some(&0) => {
                let r = c.eval_with(&to_bits(idx as u64, w), &mut scratch);
                memo[idx] = 1 + r as u8;
                r
            }
            Some(&x) => x == 2,
            None => c.eval_with(&to_bits(idx as u64, w), &mut scratch),
        }
    };

    let mut domain: Vec<Vec<bool>> = (0..points)
        .map(|a| (0..values).map(|v| ok(a, v, a, v)).collect())
        .collect();
    if domain.iter().any(|d| d.iter().all(|&x| !x)) {
        return Ok(None);
    }
    let limit = budget.saturating_mul(2);
    let mut nodes = 0u64;
    let mut g = vec![0usize; points];
    let mut trail: Vec<(usize, usize)> = Vec::new();
    // stack of (point, next value to try, trail length before assignment)
    let mut stack: Vec<(usize, usize, usize)> = vec![(0, 0, 0)];
    while let Some(&mut (a, ref mut next, ref mut mark)) = stack.last_mut() {
        // undo the previous attempt at this level
        while trail.len() > *mark {
            let (p, v) = trail.pop().expect("trail");
            domain[p][v] = true;
        }
        let Some(v) = (*next..values).find(|&v| domain[a][v]) else {
            stack.pop();
            continue;
        };
        *next = v + 1;
        *mark = trail.len();
        nodes += 1;
        if nodes > limit {
            return Err(Error::Capacity(format!("agreement search exceeded {limit} nodes")));
        }
        g[a] = v;
        let mut wiped = false;
        for (b, dom) in domain.iter_mut().enumerate().skip(a + 1) {
            let mut alive = false;
            for (w, live) in dom.iter_mut().enumerate() {
                if *live {
                    if ok(a, v, b, w) && ok(b, w, a, v) {
                        alive = true;
                    } else {
                        *live = false;
                        trail.push((b, w));
                    }
                }
            }
            if !alive {
                wiped = true;
                break;
            }
        }
        if wiped {
            continue;
        }
        if a + 1 == points {
            return Ok(Some(g.into_iter().map(|v| v as u64).collect()));
        }
        let here = trail.len();
        stack.push((a + 1, 0, here));
    }
    Ok(None)
}
