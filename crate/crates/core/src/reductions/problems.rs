//! Projections for the graph, set, number and SAT problems.

use super::{ceil_log2, projection_builder, ProjectionCircuit};
use crate::circuit::{to_bits, Circuit, CircuitBuilder, Ref};
use crate::dqbf::Dqbf;
use crate::error::{Error, Result};

/// A graph on `2^n` vertices whose edge relation is a circuit over two
/// `n`-bit groups (source first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccinctGraph {
    pub vertex_bits: usize,
    pub edges: Circuit,
    pub undirected_expected: bool,
    pub selfloop_free_expected: bool,
}

impl SuccinctGraph {
    pub fn new(edges: Circuit) -> Result<Self> {
        let groups = edges.groups();
        if groups.len() != 2 || groups[0].width != groups[1].width {
            return Err(Error::InvalidInstance(format!(
                "edge circuit `{}` needs two input groups of equal width",
                edges.name()
            )));
        }
        Ok(SuccinctGraph {
            vertex_bits: groups[0].width,
            edges,
            undirected_expected: false,
            selfloop_free_expected: false,
        })
    }

    pub fn with_flags(mut self, undirected: bool, selfloop_free: bool) -> Self {
        self.undirected_expected = undirected;
        self.selfloop_free_expected = selfloop_free;
        self
    }

    pub fn vertex_count(&self) -> usize {
        1 << self.vertex_bits
    }

    pub fn has_edge(&self, u: u64, v: u64) -> bool {
        let mut bits = to_bits(u, self.vertex_bits);
        bits.extend(to_bits(v, self.vertex_bits));
        self.edges.eval_bits(&bits)
    }
}

/// Sets `S_b = { a : C(a, b) = 1 }` for every name `b`, and a target count `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamilyInstance {
    pub element_bits: usize,
    pub name_bits: usize,
    pub membership: Circuit,
    pub k: u64,
}

impl SetFamilyInstance {
    pub fn new(membership: Circuit, k: u64) -> Result<Self> {
        let g = membership.groups();
        if g.len() != 2 {
            return Err(Error::InvalidInstance(
                "membership circuit needs groups (element, name)".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("set packing needs k >= 1".into()));
        }
        Ok(SetFamilyInstance {
            element_bits: g[0].width,
            name_bits: g[1].width,
            membership,
            k,
        })
    }

    pub fn contains(&self, set: u64, element: u64) -> bool {
        let mut bits = to_bits(element, self.element_bits);
        bits.extend(to_bits(set, self.name_bits));
        self.membership.eval_bits(&bits)
    }
}

/// Numbers `s_b` with bit `a` given by `C1(a, b)`, target `t` with bit `a`
/// given by `C2(a)`. Bit positions count from the least significant bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetSumInstance {
    pub c1: Circuit,
    pub c2: Circuit,
}

impl SubsetSumInstance {
    pub fn new(c1: Circuit, c2: Circuit) -> Result<Self> {
        if c1.groups().len() != 2 || c2.groups().len() != 1 {
            return Err(Error::InvalidInstance(
                "subset-sum needs C1(position, index) and C2(position)".into(),
            ));
        }
        Ok(SubsetSumInstance { c1, c2 })
    }

    /// Common position width after padding.
    pub fn bit_width(&self) -> usize {
        self.c1.groups()[0].width.max(self.c2.groups()[0].width)
    }

    pub fn index_bits(&self) -> usize {
        self.c1.groups()[1].width
    }

    /// C1 over an n-bit position; positions beyond its own width read 0.
    fn c1_padded(&self, b: &mut CircuitBuilder, pos: &[Ref], index: &[Ref]) -> Ref {
        let own = self.c1.groups()[0].width;
        let (high, low) = pos.split_at(pos.len() - own);
        let v = b
            .embed(&self.c1, &[low.to_vec(), index.to_vec()])
            .expect("widths match");
        let zero = b.eq_const(high, 0);
        b.and([zero, v])
    }

    fn c2_padded(&self, b: &mut CircuitBuilder, pos: &[Ref]) -> Ref {
        let own = self.c2.groups()[0].width;
        let (high, low) = pos.split_at(pos.len() - own);
        let v = b.embed(&self.c2, &[low.to_vec()]).expect("widths match");
        let zero = b.eq_const(high, 0);
        b.and([zero, v])
    }
}

/// CNF given by `C(t, u, v)`: clause `v` contains `x_u` when `C(0,u,v)` and
/// `NOT x_u` when `C(1,u,v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuccinctSat {
    pub circuit: Circuit,
}

impl SuccinctSat {
    /// `variables` and `clauses`, when given, must equal `2^|u|` and `2^|v|`.
    pub fn new(circuit: Circuit, variables: Option<u64>, clauses: Option<u64>) -> Result<Self> {
        let g = circuit.groups();
        if g.len() != 3 || g[0].width != 1 {
            return Err(Error::InvalidInstance(
                "succinct SAT needs groups t (1 bit), u, v".into(),
            ));
        }
        for (what, declared, width) in [("variable", variables, g[1].width), ("clause", clauses, g[2].width)] {
            if let Some(d) = declared {
                if width >= 64 || d != 1u64 << width {
                    return Err(Error::Unsupported(format!(
                        "{what} count {d} is not 2^{width}; only power-of-two counts are supported"
                    )));
                }
            }
        }
        Ok(SuccinctSat { circuit })
    }

    pub fn var_bits(&self) -> usize {
        self.circuit.groups()[1].width
    }

    pub fn clause_bits(&self) -> usize {
        self.circuit.groups()[2].width
    }

    pub fn contains(&self, negative: bool, var: u64, clause: u64) -> bool {
        let mut bits = vec![negative];
        bits.extend(to_bits(var, self.var_bits()));
        bits.extend(to_bits(clause, self.clause_bits()));
        self.circuit.eval_bits(&bits)
    }
}

/// Width of an index group for `k` items.
pub(crate) fn index_bits(k: u64) -> usize {
    ceil_log2(k).max(1)
}

/// Three-colouring as a DQBF: `(y1,y2)` colours `x1`, `(y3,y4)` colours `x2`,
/// colour codes 01, 10, 11.
pub fn project_3col_direct(g: &SuccinctGraph) -> Dqbf {
    let n = g.vertex_bits;
    let mut b = CircuitBuilder::new("3col");
    let x1 = b.input("x1", n).expect("fresh");
    let x2 = b.input("x2", n).expect("fresh");
    let y: Vec<Ref> = ["y1", "y2", "y3", "y4"]
        .iter()
        .map(|name| b.input(name, 1).expect("fresh")[0])
        .collect();
    let (c1, c2) = ([y[0], y[1]], [y[2], y[3]]);
    let same = b.eq_bits(&x1, &x2);
    let same_colour = b.eq_bits(&c1, &c2);
    let functional = b.implies(same, same_colour);
    let coloured1 = b.or(c1);
    let coloured2 = b.or(c2);
    let edge = b.embed(&g.edges, &[x1.clone(), x2.clone()]).expect("widths match");
    let differ = b.not(same_colour);
    let proper = b.implies(edge, differ);
    let out = b.and([functional, coloured1, coloured2, proper]);
    Dqbf::from_circuit(
        b.finish(out),
        &["x1", "x2"],
        &[("y1", &["x1"]), ("y2", &["x1"]), ("y3", &["x2"]), ("y4", &["x2"])],
    )
    .expect("well-formed by construction")
}

/// `g` lists the vertices of a Hamiltonian cycle in order.
pub fn project_hamiltonian(g: &SuccinctGraph) -> ProjectionCircuit {
    let n = g.vertex_bits;
    let (mut b, [x1, y1, x2, y2]) = projection_builder("hamiltonian", n, n);
    let distinct_points = b.neq_bits(&x1, &x2);
    let distinct_values = b.neq_bits(&y1, &y2);
    let h1 = b.implies(distinct_points, distinct_values);
    let next = b.successor(&x1, &x2);
    let edge = b.embed(&g.edges, &[y1, y2]).expect("widths match");
    let h2 = b.implies(next, edge);
    let out = b.and([h1, h2]);
    ProjectionCircuit::new(b.finish(out)).expect("layout")
}

/// Point `(a, b)`: `a` indexes the chosen sets, `b` ranges over elements.
/// The value is the name of set number `a`.
pub fn project_set_packing(inst: &SetFamilyInstance) -> Result<ProjectionCircuit> {
    if inst.k == 0 {
        return Err(Error::InvalidParameter("set packing needs k >= 1".into()));
    }
    let ka = index_bits(inst.k);
    let m = inst.element_bits;
    let (mut b, [x1, y1, x2, y2]) = projection_builder("setpacking", ka + m, inst.name_bits);
    let (a1, b1) = x1.split_at(ka);
    let (a2, b2) = x2.split_at(ka);
    let in1 = b.lt_const(a1, inst.k)?;
    let in2 = b.lt_const(a2, inst.k)?;
    let same_a = b.eq_bits(a1, a2);
    let p1_guard = b.and([same_a, in1, in2]);
    let same_name = b.eq_bits(&y1, &y2);
    let p1 = b.implies(p1_guard, same_name);
    let diff_a = b.not(same_a);
    let same_b = b.eq_bits(b1, b2);
    let p2_guard = b.and([diff_a, in1, in2, same_b]);
    let m1 = b
        .embed(&inst.membership, &[b1.to_vec(), y1.clone()])
        .expect("widths match");
    let m2 = b
        .embed(&inst.membership, &[b1.to_vec(), y2.clone()])
        .expect("widths match");
    let both = b.and([m1, m2]);
    let disjoint = b.not(both);
    let p2 = b.implies(p2_guard, disjoint);
    let out = b.and([p1, p2]);
    ProjectionCircuit::new(b.finish(out))
}

/// Point `(a, b)` = (bit position, number index); value bits are
/// `alpha, beta, gamma, delta, epsilon` in that order.
pub fn project_subset_sum(inst: &SubsetSumInstance) -> ProjectionCircuit {
    let n = inst.bit_width();
    let m = inst.index_bits();
    let (mut b, [x1, y1, x2, y2]) = projection_builder("subsetsum", n + m, 5);
    let (a1, b1) = x1.split_at(n);
    let (a2, b2) = x2.split_at(n);
    let [al1, be1, ga1, de1, ep1] = [y1[0], y1[1], y1[2], y1[3], y1[4]];
    let [al2, be2, ga2, _, _] = [y2[0], y2[1], y2[2], y2[3], y2[4]];
    let s_bit = inst.c1_padded(&mut b, a1, b1);
    let t_bit = inst.c2_padded(&mut b, a1);
    let mut conds = Vec::new();

    // (i)
    let same_b = b.eq_bits(b1, b2);
    let same_alpha = b.iff(al1, al2);
    conds.push(b.implies(same_b, same_alpha));
    // (ii)
    let not_al = b.not(al1);
    let ng = b.not(ga1);
    let nd = b.not(de1);
    let pass = b.iff(be1, ep1);
    let idle = b.and([ng, nd, pass]);
    conds.push(b.implies(not_al, idle));
    // (iii): delta epsilon is the two-bit sum of gamma + s_bit + beta
    let x = b.xor(ga1, s_bit);
    let sum = b.xor(x, be1);
    let c1 = b.and([ga1, s_bit]);
    let c2 = b.and([ga1, be1]);
    let c3 = b.and([s_bit, be1]);
    let carry = b.or([c1, c2, c3]);
    let eps_ok = b.iff(ep1, sum);
    let del_ok = b.iff(de1, carry);
    let add = b.and([eps_ok, del_ok]);
    conds.push(b.implies(al1, add));
    // (iv)
    let lowest = b.eq_const(a1, 0);
    conds.push(b.implies(lowest, ng));
    // (v)
    let highest = b.all_ones(a1);
    conds.push(b.implies(highest, nd));
    // (vi)
    let first = b.eq_const(b1, 0);
    let nb = b.not(be1);
    let fresh = b.and([nb, ng]);
    conds.push(b.implies(first, fresh));
    // (vii)
    let last = b.all_ones(b1);
    let matches_t = b.iff(ep1, t_bit);
    conds.push(b.implies(last, matches_t));
    // (viii): carry moves to the next position of the same number
    let next_pos = b.successor_nowrap(a1, a2);
    let g8 = b.and([al1, same_b, next_pos]);
    let carry_on = b.iff(de1, ga2);
    conds.push(b.implies(g8, carry_on));
    // (ix): running total moves to the next number; applies whether or not
    // this number is selected, since (ii) makes epsilon = beta when it is not
    let next_num = b.successor_nowrap(b1, b2);
    let same_a = b.eq_bits(a1, a2);
    let g9 = b.and([next_num, same_a]);
    let total_on = b.iff(ep1, be2);
    conds.push(b.implies(g9, total_on));

    let out = b.and(conds);
    ProjectionCircuit::new(b.finish(out)).expect("layout")
}

/// `g` maps index `i < k` to the i-th vertex of an independent set.
pub fn project_independent_set(g: &SuccinctGraph, k: u64) -> Result<ProjectionCircuit> {
    if k == 0 {
        return Err(Error::InvalidParameter("independent set needs k >= 1".into()));
    }
    let ka = index_bits(k);
    let (mut b, [x1, y1, x2, y2]) = projection_builder("independentset", ka, g.vertex_bits);
    let in1 = b.lt_const(&x1, k)?;
    let in2 = b.lt_const(&x2, k)?;
    let diff = b.neq_bits(&x1, &x2);
    let guard = b.and([in1, in2, diff]);
    let distinct = b.neq_bits(&y1, &y2);
    let edge = b.embed(&g.edges, &[y1, y2]).expect("widths match");
    let no_edge = b.not(edge);
    let ok = b.and([distinct, no_edge]);
    let out = b.implies(guard, ok);
    ProjectionCircuit::new(b.finish(out))
}

/// `g` embeds `g1` into `g2`, preserving edges and non-edges.
pub fn project_subgraph_iso(g1: &SuccinctGraph, g2: &SuccinctGraph) -> Result<ProjectionCircuit> {
    if g1.vertex_bits > g2.vertex_bits {
        return Err(Error::InvalidInstance(format!(
            "pattern has {} vertex bits, host only {}",
            g1.vertex_bits, g2.vertex_bits
        )));
    }
    let (mut b, [x1, y1, x2, y2]) = projection_builder("subgraphiso", g1.vertex_bits, g2.vertex_bits);
    let diff = b.neq_bits(&x1, &x2);
    let distinct = b.neq_bits(&y1, &y2);
    let s1 = b.implies(diff, distinct);
    let e1 = b.embed(&g1.edges, &[x1, x2]).expect("widths match");
    let e2 = b.embed(&g2.edges, &[y1, y2]).expect("widths match");
    let s2 = b.iff(e1, e2);
    let out = b.and([s1, s2]);
    ProjectionCircuit::new(b.finish(out))
}

/// `g(v) < k` marks `v` as a cover vertex; values below `k` are used once.
pub fn project_vertex_cover(g: &SuccinctGraph, k: u64) -> ProjectionCircuit {
    let m = ceil_log2(k + 1).max(1);
    let (mut b, [x1, y1, x2, y2]) = projection_builder("vertexcover", g.vertex_bits, m);
    let in1 = b.lt_const(&y1, k).expect("k < 2^m");
    let in2 = b.lt_const(&y2, k).expect("k < 2^m");
    let same = b.eq_bits(&y1, &y2);
    let g1 = b.and([same, in1]);
    let same_point = b.eq_bits(&x1, &x2);
    let v1 = b.implies(g1, same_point);
    let edge = b.embed(&g.edges, &[x1, x2]).expect("widths match");
    let covered = b.or([in1, in2]);
    let v2 = b.implies(edge, covered);
    let out = b.and([v1, v2]);
    ProjectionCircuit::new(b.finish(out)).expect("layout")
}

/// Value `(b, c)`: `c` is the dominator of the point, `b` its index.
pub fn project_dominating_set(g: &SuccinctGraph, k: u64) -> Result<ProjectionCircuit> {
    if k == 0 {
        return Err(Error::InvalidParameter("dominating set needs k >= 1".into()));
    }
    let kb = index_bits(k);
    let n = g.vertex_bits;
    let (mut b, [x1, y1, _, y2]) = projection_builder("dominatingset", n, kb + n);
    let (b1, c1) = y1.split_at(kb);
    let (b2, c2) = y2.split_at(kb);
    let same_index = b.eq_bits(b1, b2);
    let same_dom = b.eq_bits(c1, c2);
    let d3 = b.implies(same_index, same_dom);
    let other = b.neq_bits(&x1, c1);
    let edge = b.embed(&g.edges, &[x1.clone(), c1.to_vec()]).expect("widths match");
    let d2 = b.implies(other, edge);
    let in_range = b.lt_const(b1, k)?;
    let out = b.and([d3, d2, in_range]);
    ProjectionCircuit::new(b.finish(out))
}

/// Point = clause, value = (sign, variable) of a literal satisfying it.
pub fn project_succinct_sat(s: &SuccinctSat) -> Result<ProjectionCircuit> {
    let m = s.var_bits();
    let (mut b, [x1, y1, _, y2]) = projection_builder("sat", s.clause_bits(), 1 + m);
    let picked = b
        .embed(&s.circuit, &[vec![y1[0]], y1[1..].to_vec(), x1])
        .expect("widths match");
    let same_var = b.eq_bits(&y1[1..], &y2[1..]);
    let same_sign = b.iff(y1[0], y2[0]);
    let consistent = b.implies(same_var, same_sign);
    let out = b.and([picked, consistent]);
    ProjectionCircuit::new(b.finish(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::from_truth_table;

    fn graph(n: usize, edges: &[(u64, u64)]) -> SuccinctGraph {
        let list = edges.to_vec();
        let c = from_truth_table("g", &[("u", n), ("v", n)], move |bits| {
            let u = crate::circuit::from_bits(&bits[..n]);
            let v = crate::circuit::from_bits(&bits[n..]);
            list.contains(&(u, v))
        });
        SuccinctGraph::new(c).unwrap()
    }

    #[test]
    fn hamiltonian_identity_on_two_cycle() {
        let d = project_hamiltonian(&graph(1, &[(0, 1), (1, 0)]));
        assert!(d.agrees(&[0, 1]));
        assert!(!project_hamiltonian(&graph(1, &[])).agrees(&[0, 1]));
    }

    #[test]
    fn independent_set_on_edge() {
        let d = project_independent_set(&graph(1, &[(0, 1), (1, 0)]), 2).unwrap();
        assert!(!d.agrees(&[0, 1]) && !d.agrees(&[1, 0]));
        let d = project_independent_set(&graph(1, &[]), 2).unwrap();
        assert!(d.agrees(&[0, 1]));
    }

    #[test]
    fn zero_k_is_rejected() {
        let g = graph(1, &[]);
        assert!(matches!(
            project_independent_set(&g, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(project_dominating_set(&g, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn non_power_of_two_sat_counts() {
        let c = from_truth_table("c", &[("t", 1), ("u", 1), ("v", 1)], |_| true);
        assert!(matches!(
            SuccinctSat::new(c.clone(), Some(3), None),
            Err(Error::Unsupported(_))
        ));
        assert!(SuccinctSat::new(c, Some(2), Some(2)).is_ok());
    }

    #[test]
    fn subgraph_pattern_too_wide() {
        assert!(matches!(
            project_subgraph_iso(&graph(2, &[]), &graph(1, &[])),
            Err(Error::InvalidInstance(_))
        ));
    }
}
