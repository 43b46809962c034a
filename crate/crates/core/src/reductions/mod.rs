//! Succinct projections and their compilation to DQBF.
//!
//! A projection circuit `D(x1, y1, x2, y2)` describes a set of functions
//! `g: {0,1}^n -> {0,1}^m`: `g` agrees with `D` when
//! `D(w1, g(w1), w2, g(w2)) = 1` for every pair of points. Each problem
//! module maps an instance to such a circuit so that the instance is a
//! yes-instance exactly when some `g` agrees.

mod ntm;
mod problems;

pub use ntm::{parse_ntm, project_ntm, Behaviour, Move, Ntm, NtmInstance, Transition};
pub use problems::{
    project_3col_direct, project_dominating_set, project_hamiltonian, project_independent_set, project_set_packing,
    project_subgraph_iso, project_subset_sum, project_succinct_sat, project_vertex_cover, SetFamilyInstance,
    SubsetSumInstance, SuccinctGraph, SuccinctSat,
};

use crate::circuit::{from_bits, to_bits, Circuit, CircuitBuilder};
use crate::dqbf::{Dqbf, SkolemTable};
use crate::error::{Error, Result};

/// `ceil(log2 k)` for k >= 1.
pub fn ceil_log2(k: u64) -> usize {
    if k <= 1 {
        0
    } else {
        64 - (k - 1).leading_zeros() as usize
    }
}

/// Circuit over groups `x1` (n), `y1` (m), `x2` (n), `y2` (m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionCircuit {
    point_width: usize,
    value_width: usize,
    circuit: Circuit,
}

impl ProjectionCircuit {
    pub fn new(circuit: Circuit) -> Result<Self> {
        let names: Vec<&str> = circuit.groups().iter().map(|g| g.name.as_str()).collect();
        if names != ["x1", "y1", "x2", "y2"] {
            return Err(Error::InvalidInstance(format!(
                "projection circuit must have groups x1 y1 x2 y2, found {}",
                names.join(" ")
            )));
        }
        let w: Vec<usize> = circuit.groups().iter().map(|g| g.width).collect();
        if w[0] != w[2] || w[1] != w[3] {
            return Err(Error::WidthMismatch("x1/x2 or y1/y2 widths differ".into()));
        }
        Ok(ProjectionCircuit {
            point_width: w[0],
            value_width: w[1],
            circuit,
        })
    }

    pub fn point_width(&self) -> usize {
        self.point_width
    }

    pub fn value_width(&self) -> usize {
        self.value_width
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn into_circuit(self) -> Circuit {
        self.circuit
    }

    /// D(w1, v1, w2, v2) with all four arguments as MSB-first numbers.
    pub fn eval(&self, w1: u64, v1: u64, w2: u64, v2: u64) -> bool {
        let mut bits = to_bits(w1, self.point_width);
        bits.extend(to_bits(v1, self.value_width));
        bits.extend(to_bits(w2, self.point_width));
        bits.extend(to_bits(v2, self.value_width));
        self.circuit.eval_bits(&bits)
    }

    /// True iff `g` (indexed by point number) agrees on every pair.
    pub fn agrees(&self, g: &[u64]) -> bool {
        let points = 1usize << self.point_width;
        assert_eq!(g.len(), points, "agreement function must be total");
        (0..points).all(|a| (0..points).all(|b| self.eval(a as u64, g[a], b as u64, g[b])))
    }
}

/// Starts a projection circuit builder with the four standard groups.
pub(crate) fn projection_builder(name: &str, n: usize, m: usize) -> (CircuitBuilder, [Vec<crate::circuit::Ref>; 4]) {
    let mut b = CircuitBuilder::new(name);
    let x1 = b.input("x1", n).expect("fresh");
    let y1 = b.input("y1", m).expect("fresh");
    let x2 = b.input("x2", n).expect("fresh");
    let y2 = b.input("y2", m).expect("fresh");
    (b, [x1, y1, x2, y2])
}

/// `forall x1 x2 exists y1(x1) y2(x2): D(x1,y1,x2,y2) AND (x1 = x2 -> y1 = y2)`.
pub fn algorithm1(d: &ProjectionCircuit) -> Dqbf {
    let (mut b, [x1, y1, x2, y2]) = projection_builder("algorithm1", d.point_width, d.value_width);
    let body = b
        .embed(&d.circuit, &[x1.clone(), y1.clone(), x2.clone(), y2.clone()])
        .expect("same layout");
    let same_point = b.eq_bits(&x1, &x2);
    let same_value = b.eq_bits(&y1, &y2);
    let functional = b.implies(same_point, same_value);
    let out = b.and([body, functional]);
    Dqbf::from_circuit(b.finish(out), &["x1", "x2"], &[("y1", &["x1"]), ("y2", &["x2"])])
        .expect("well-formed by construction")
}

/// Skolem tables for [`algorithm1`]: `y1_i(a) = y2_i(a) = bit i of g(a)`.
pub fn skolem_from_agreement(d: &ProjectionCircuit, g: &[u64]) -> Vec<SkolemTable> {
    let m = d.value_width;
    let column = |i: usize| SkolemTable::new(g.iter().map(|&v| to_bits(v, m)[i]).collect());
    let mut tables: Vec<SkolemTable> = (0..m).map(column).collect();
    tables.extend((0..m).map(column));
    tables
}

/// Reads `g(a)` off the `y1` tables of an [`algorithm1`] witness.
pub fn agreement_from_skolem(d: &ProjectionCircuit, tables: &[SkolemTable]) -> Result<Vec<u64>> {
    let m = d.value_width;
    let points = 1usize << d.point_width;
    if tables.len() != 2 * m || tables.iter().any(|t| t.table.len() != points) {
        return Err(Error::InputArity("tables do not match the projection layout".into()));
    }
    Ok((0..points)
        .map(|a| from_bits(&(0..m).map(|i| tables[i].get(a)).collect::<Vec<_>>()))
        .collect())
}

/// Problem tags accepted by manifests and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    ThreeCol,
    Hamiltonian,
    SetPacking,
    SubsetSum,
    IndependentSet,
    SubgraphIso,
    VertexCover,
    DominatingSet,
    Sat,
    Ntm,
}

impl Problem {
    pub const ALL: [Problem; 10] = [
        Problem::ThreeCol,
        Problem::Hamiltonian,
        Problem::SetPacking,
        Problem::SubsetSum,
        Problem::IndependentSet,
        Problem::SubgraphIso,
        Problem::VertexCover,
        Problem::DominatingSet,
        Problem::Sat,
        Problem::Ntm,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Problem::ThreeCol => "3col",
            Problem::Hamiltonian => "hamiltonian",
            Problem::SetPacking => "setpacking",
            Problem::SubsetSum => "subsetsum",
            Problem::IndependentSet => "independentset",
            Problem::SubgraphIso => "subgraphiso",
            Problem::VertexCover => "vertexcover",
            Problem::DominatingSet => "dominatingset",
            Problem::Sat => "sat",
            Problem::Ntm => "ntm",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Problem> {
        Problem::ALL.into_iter().find(|p| p.tag() == tag)
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A problem instance of any supported kind.
#[derive(Clone, Debug)]
pub enum Instance {
    ThreeCol(SuccinctGraph),
    Hamiltonian(SuccinctGraph),
    SetPacking(SetFamilyInstance),
    SubsetSum(SubsetSumInstance),
    IndependentSet(SuccinctGraph, u64),
    SubgraphIso(SuccinctGraph, SuccinctGraph),
    VertexCover(SuccinctGraph, u64),
    DominatingSet(SuccinctGraph, u64),
    Sat(SuccinctSat),
    Ntm(NtmInstance),
}

impl Instance {
    pub fn problem(&self) -> Problem {
        match self {
            Instance::ThreeCol(_) => Problem::ThreeCol,
            Instance::Hamiltonian(_) => Problem::Hamiltonian,
            Instance::SetPacking(_) => Problem::SetPacking,
            Instance::SubsetSum(_) => Problem::SubsetSum,
            Instance::IndependentSet(..) => Problem::IndependentSet,
            Instance::SubgraphIso(..) => Problem::SubgraphIso,
            Instance::VertexCover(..) => Problem::VertexCover,
            Instance::DominatingSet(..) => Problem::DominatingSet,
            Instance::Sat(_) => Problem::Sat,
            Instance::Ntm(_) => Problem::Ntm,
        }
    }

    /// The succinct projection. 3-colorability has a direct encoding
    /// instead and reports `Unsupported`.
    pub fn project(&self) -> Result<ProjectionCircuit> {
        match self {
            Instance::ThreeCol(_) => Err(Error::Unsupported(
                "3-colorability is encoded directly, not through a projection".into(),
            )),
            Instance::Hamiltonian(g) => Ok(project_hamiltonian(g)),
            Instance::SetPacking(s) => project_set_packing(s),
            Instance::SubsetSum(s) => Ok(project_subset_sum(s)),
            Instance::IndependentSet(g, k) => project_independent_set(g, *k),
            Instance::SubgraphIso(g1, g2) => project_subgraph_iso(g1, g2),
            Instance::VertexCover(g, k) => Ok(project_vertex_cover(g, *k)),
            Instance::DominatingSet(g, k) => project_dominating_set(g, *k),
            Instance::Sat(s) => project_succinct_sat(s),
            Instance::Ntm(i) => project_ntm(&i.machine, &i.word, i.t),
        }
    }

    /// The DQBF this instance reduces to.
    pub fn to_dqbf(&self) -> Result<Dqbf> {
        match self {
            Instance::ThreeCol(g) => Ok(project_3col_direct(g)),
            other => Ok(algorithm1(&other.project()?)),
        }
    }
}
