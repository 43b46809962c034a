//! Small hand-built instances shared by tests, examples and the command line.

use crate::circuit::{Circuit, CircuitBuilder, Ref};
use crate::reductions::{parse_ntm, Ntm, SuccinctGraph};

/// Accepts exactly the words whose first symbol is `1`.
pub const FIRST1: &str = "\
ntm first1
alphabet 0 1 _
blank _
states q0 qacc
initial q0
accept qacc
trans q0 1 -> qacc 1 S
trans qacc 1 -> qacc 1 S
";

pub fn first1() -> Ntm {
    parse_ntm(FIRST1).expect("fixture parses")
}

fn edge_circuit(name: &str, n: usize, body: impl FnOnce(&mut CircuitBuilder, &[Ref], &[Ref]) -> Ref) -> Circuit {
    let mut b = CircuitBuilder::new(name);
    let u = b.input("u", n).expect("fresh");
    let v = b.input("v", n).expect("fresh");
    let out = body(&mut b, &u, &v);
    b.finish(out)
}

/// Triangle on `00, 01, 10` with `11` isolated.
pub fn tri_circuit() -> Circuit {
    edge_circuit("tri", 2, |b, u, v| {
        let distinct = b.neq_bits(u, v);
        let u_last = b.all_ones(u);
        let v_last = b.all_ones(v);
        let u_in = b.not(u_last);
        let v_in = b.not(v_last);
        b.and([distinct, u_in, v_in])
    })
}

/// Complete graph on four vertices.
pub fn k4_circuit() -> Circuit {
    edge_circuit("k4", 2, |b, u, v| b.neq_bits(u, v))
}

/// Directed cycle `00 -> 01 -> 10 -> 11 -> 00`.
pub fn c4_circuit() -> Circuit {
    edge_circuit("c4", 2, |b, u, v| b.successor(u, v))
}

/// No edges on `2^n` vertices.
pub fn edgeless_circuit(n: usize) -> Circuit {
    edge_circuit("edgeless", n, |b, _, _| b.constant(false))
}

pub fn tri() -> SuccinctGraph {
    SuccinctGraph::new(tri_circuit())
        .expect("two groups")
        .with_flags(true, true)
}

pub fn k4() -> SuccinctGraph {
    SuccinctGraph::new(k4_circuit())
        .expect("two groups")
        .with_flags(true, true)
}

pub fn c4() -> SuccinctGraph {
    SuccinctGraph::new(c4_circuit()).expect("two groups")
}
