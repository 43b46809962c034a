//! Instance generators and independent checkers shared by the integration tests.
#![allow(dead_code)]

use nexp2dqbf::circuit::{from_truth_table, Circuit, CircuitBuilder, Ref};
use nexp2dqbf::dqbf::esb::{Esb, FunctionSymbol, Leaf, Quantifier};
use nexp2dqbf::dqbf::{Dqbf, Existential, Matrix};
use nexp2dqbf::fixtures;
use nexp2dqbf::folog::{parse_formula, skolemize, Formula};
use nexp2dqbf::reductions::{
    parse_ntm, Instance, Ntm, NtmInstance, SetFamilyInstance, SubsetSumInstance, SuccinctGraph, SuccinctSat,
};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn bit(mask: u64, idx: usize) -> bool {
    mask >> idx & 1 == 1
}

fn index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as usize)
}

/// Edge circuit on `2^n` vertices from a `4^n`-bit mask indexed by `(u, v)`.
pub fn graph_from_mask(n: usize, mask: u64) -> SuccinctGraph {
    let c = from_truth_table(&format!("g{mask}"), &[("u", n), ("v", n)], |b| bit(mask, index(b)));
    let g = SuccinctGraph::new(c).unwrap();
    let verts = 1u64 << n;
    let has = |u: u64, v: u64| bit(mask, (u * verts + v) as usize);
    let undirected = (0..verts).all(|u| (0..verts).all(|v| has(u, v) == has(v, u)));
    let loopless = (0..verts).all(|u| !has(u, u));
    g.with_flags(undirected, loopless)
}

/// All 16 graphs on two vertices.
pub fn graphs_n1() -> Vec<SuccinctGraph> {
    (0..16).map(|m| graph_from_mask(1, m)).collect()
}

/// Named fixtures plus seeded random directed and undirected graphs on four vertices.
pub fn graphs_n2() -> Vec<SuccinctGraph> {
    let mut out = vec![
        fixtures::tri(),
        fixtures::k4(),
        fixtures::c4(),
        SuccinctGraph::new(fixtures::edgeless_circuit(2))
            .unwrap()
            .with_flags(true, true),
    ];
    let mut r = rng(7);
    for i in 0..56 {
        let mask = if i % 2 == 0 {
            // symmetric, loopless
            let mut m = 0u64;
            for u in 0..4 {
                for v in u + 1..4 {
                    if r.gen_bool(0.5) {
                        m |= 1 << (u * 4 + v) | 1 << (v * 4 + u);
                    }
                }
            }
            m
        } else {
            r.gen::<u16>() as u64
        };
        out.push(graph_from_mask(2, mask));
    }
    out
}

/// All set families with one element bit and one name bit.
pub fn set_families(k: u64) -> Vec<SetFamilyInstance> {
    (0..16)
        .map(|mask| {
            let c = from_truth_table("sets", &[("a", 1), ("b", 1)], |b| bit(mask, index(b)));
            SetFamilyInstance::new(c, k).unwrap()
        })
        .collect()
}

/// `C1` over (position 2 bits, index 1 bit) and `C2` over 2 position bits.
pub fn subset_sum(c1_mask: u64, c2_mask: u64) -> SubsetSumInstance {
    let c1 = from_truth_table("c1", &[("a", 2), ("b", 1)], |b| bit(c1_mask, index(b)));
    let c2 = from_truth_table("c2", &[("a", 2)], |b| bit(c2_mask, index(b)));
    SubsetSumInstance::new(c1, c2).unwrap()
}

/// All succinct CNFs with one variable bit and one clause bit.
pub fn sat_instances() -> Vec<SuccinctSat> {
    (0..256)
        .map(|mask| {
            let c = from_truth_table("cnf", &[("t", 1), ("u", 1), ("v", 1)], |b| bit(mask, index(b)));
            SuccinctSat::new(c, None, None).unwrap()
        })
        .collect()
}

/// Accepts when the second symbol is 1, moving right and back.
pub const SECOND1: &str = "\
ntm second1
alphabet 0 1 _
blank _
states q0 q1 q2 qacc
initial q0
accept qacc
trans q0 0 -> q1 0 R
trans q0 1 -> q1 1 R
trans q1 1 -> q2 1 L
trans q2 0 -> qacc 0 S
trans q2 1 -> qacc 1 S
trans qacc 0 -> qacc 0 S
trans qacc 1 -> qacc 1 S
";

/// Reading 0 may either flip it to 1 or accept.
pub const GUESS: &str = "\
ntm guess
alphabet 0 1 _
blank _
states q0 qacc
initial q0
accept qacc
trans q0 0 -> q0 1 S
trans q0 1 -> q0 0 S
trans q0 0 -> qacc 0 S
trans qacc 0 -> qacc 0 S
trans qacc 1 -> qacc 1 S
";

/// No transitions at all.
pub const STUCK: &str = "\
ntm stuck
alphabet 0 1 _
blank _
states q0 qacc
initial q0
accept qacc
";

pub fn machines() -> Vec<Ntm> {
    vec![
        fixtures::first1(),
        parse_ntm(SECOND1).unwrap(),
        parse_ntm(GUESS).unwrap(),
        parse_ntm(STUCK).unwrap(),
    ]
}

pub fn words(len: usize) -> Vec<String> {
    (0..1u64 << len)
        .map(|w| (0..len).map(|i| if bit(w, len - 1 - i) { '1' } else { '0' }).collect())
        .collect()
}

/// Machines and words at `t = 1` and `t = 2`.
pub fn ntm_instances() -> Vec<NtmInstance> {
    let mut out = Vec::new();
    for machine in machines() {
        for (t, len) in [(1, 1), (1, 2), (2, 2)] {
            for word in words(len) {
                out.push(NtmInstance {
                    machine: machine.clone(),
                    word,
                    t,
                });
            }
        }
    }
    out
}

/// The whole criterion-1 suite, in a fixed order.
pub fn projection_suite() -> Vec<(String, Instance)> {
    let mut out: Vec<(String, Instance)> = Vec::new();
    let small = graphs_n1();
    let big = graphs_n2();
    for (label, graphs, ks) in [("n1", &small, 1..=2u64), ("n2", &big, 1..=4u64)] {
        for (i, g) in graphs.iter().enumerate() {
            out.push((format!("hamiltonian {label}#{i}"), Instance::Hamiltonian(g.clone())));
            for k in ks.clone() {
                out.push((
                    format!("independentset {label}#{i} k={k}"),
                    Instance::IndependentSet(g.clone(), k),
                ));
                out.push((
                    format!("vertexcover {label}#{i} k={k}"),
                    Instance::VertexCover(g.clone(), k),
                ));
                out.push((
                    format!("dominatingset {label}#{i} k={k}"),
                    Instance::DominatingSet(g.clone(), k),
                ));
            }
        }
    }
    for (i, g1) in small.iter().enumerate() {
        for (j, g2) in small.iter().enumerate() {
            out.push((
                format!("subgraphiso n1#{i} n1#{j}"),
                Instance::SubgraphIso(g1.clone(), g2.clone()),
            ));
        }
        for (j, g2) in big.iter().enumerate().take(8) {
            out.push((
                format!("subgraphiso n1#{i} n2#{j}"),
                Instance::SubgraphIso(g1.clone(), g2.clone()),
            ));
        }
    }
    for k in 1..=2 {
        for (i, s) in set_families(k).into_iter().enumerate() {
            out.push((format!("setpacking #{i} k={k}"), Instance::SetPacking(s)));
        }
    }
    for c1 in 0..256 {
        for c2 in 0..16 {
            out.push((
                format!("subsetsum c1={c1} c2={c2}"),
                Instance::SubsetSum(subset_sum(c1, c2)),
            ));
        }
    }
    for (i, s) in sat_instances().into_iter().enumerate() {
        out.push((format!("sat #{i}"), Instance::Sat(s)));
    }
    for inst in ntm_instances() {
        out.push((
            format!("ntm {} w={} t={}", inst.machine.name, inst.word, inst.t),
            Instance::Ntm(inst),
        ));
    }
    out
}

/// Random circuit over the given groups with `gates` internal gates.
pub fn random_circuit(r: &mut ChaCha8Rng, name: &str, groups: &[(&str, usize)], gates: usize) -> Circuit {
    let mut b = CircuitBuilder::new(name);
    let mut pool: Vec<Ref> = Vec::new();
    for (g, w) in groups {
        pool.extend(b.input(g, *w).unwrap());
    }
    if pool.is_empty() {
        let c = b.constant(r.gen_bool(0.5));
        return b.finish(c);
    }
    for _ in 0..gates {
        let a = pool[r.gen_range(0..pool.len())];
        let c = pool[r.gen_range(0..pool.len())];
        let g = match r.gen_range(0..4) {
            0 => b.and([a, c]),
            1 => b.or([a, c]),
            2 => b.xor(a, c),
            _ => b.not(a),
        };
        pool.push(g);
    }
    let out = *pool.last().unwrap();
    b.finish(out)
}

/// Small random DQBF with a circuit matrix: 1-3 universals, 1-3
/// existentials with random dependency sets.
pub fn random_dqbf(r: &mut ChaCha8Rng) -> Dqbf {
    let nu = r.gen_range(1..=3);
    let ne = r.gen_range(1..=3);
    let gates = r.gen_range(3..=8);
    let c = random_circuit(r, "m", &[("v", nu + ne)], gates);
    let names = (0..nu)
        .map(|i| format!("x{}", i + 1))
        .chain((0..ne).map(|i| format!("y{}", i + 1)))
        .collect();
    let existentials = (0..ne)
        .map(|i| Existential {
            var: nu + i,
            deps: (0..nu).filter(|_| r.gen_bool(0.5)).collect(),
        })
        .collect();
    Dqbf::new(names, (0..nu).collect(), existentials, Matrix::Circuit(c)).unwrap()
}

/// Random single-function ESB formula with a universal prefix.
pub fn random_esb(r: &mut ChaCha8Rng) -> Esb {
    let nv = r.gen_range(1..=2);
    let arity = r.gen_range(0..=2.min(nv));
    let apps = r.gen_range(1..=2);
    let mut leaves: Vec<Leaf> = (0..nv).map(Leaf::Var).collect();
    for _ in 0..apps {
        leaves.push(Leaf::App {
            func: 0,
            args: (0..arity).map(|_| r.gen_range(0..nv)).collect(),
        });
    }
    let gates = r.gen_range(2..=6);
    let matrix = random_circuit(r, "psi", &[("l", leaves.len())], gates);
    Esb::new(
        vec![FunctionSymbol {
            name: "f".into(),
            arity,
        }],
        (0..nv).map(|i| format!("u{}", i + 1)).collect(),
        (0..nv).map(|i| (Quantifier::Forall, i)).collect(),
        matrix,
        leaves,
    )
    .unwrap()
}

/// Small prenex sentences; existential ones are skolemized into universal form.
pub const SENTENCES: &[&str] = &[
    "(forall x (P x))",
    "(forall x (not (P x)))",
    "(forall x (and (P x) (not (P x))))",
    "(forall (x y) (= x y))",
    "(forall (x y) (or (= x y) (P x) (P y)))",
    "(forall (x y) (=> (and (P x) (P y)) (= x y)))",
    "(forall (x y) (<=> (P x) (not (P y))))",
    "(exists x (P x))",
    "(exists (x y) (not (= x y)))",
    "(exists (x y) (and (P x) (not (P y))))",
    "(forall x (exists y (not (= x y))))",
    "(forall x (exists y (<=> (P x) (not (P y)))))",
    "(forall x (exists y (and (Q y) (not (P y)))))",
    "(forall (x z) (and (=> (= z (g x)) (E x z)) (not (E x x))))",
    "(forall (x y) (=> (E x y) (E y x)))",
    "(forall x (and (not (E x x)) (exists y (E x y))))",
    "(exists (x y z) (and (not (= x y)) (not (= y z)) (not (= x z))))",
    "(forall (x y) (or (= x y) (and (P x) (not (P y))) (and (P y) (not (P x)))))",
    "(forall x (and (P x) (Q x)))",
    "(exists x (forall y (and (P x) (=> (P y) (= x y)))))",
    "(forall x (exists y (and (P y) (not (= x y)))))",
];

/// The sentence suite skolemized to universal form.
pub fn sentence_suite() -> Vec<(String, Formula)> {
    SENTENCES
        .iter()
        .filter_map(|s| {
            let f = parse_formula(s).unwrap();
            skolemize(&f).ok().map(|sk| (s.to_string(), sk))
        })
        .collect()
}

/// Independent DQDIMACS reader and universal-expansion decision procedure.
pub mod expansion {
    use std::collections::HashMap;

    pub struct File {
        pub vars: usize,
        pub universals: Vec<i64>,
        pub deps: Vec<(i64, Vec<i64>)>,
        pub clauses: Vec<Vec<i64>>,
    }

    pub fn read(text: &str) -> File {
        let mut f = File {
            vars: 0,
            universals: Vec::new(),
            deps: Vec::new(),
            clauses: Vec::new(),
        };
        let mut declared = 0;
        for line in text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('c'))
        {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "p" => {
                    assert_eq!(toks[1], "cnf");
                    f.vars = toks[2].parse().unwrap();
                    declared = toks[3].parse().unwrap();
                }
                "a" => f.universals = nums(&toks[1..]),
                "d" => {
                    let v = nums(&toks[1..]);
                    f.deps.push((v[0], v[1..].to_vec()));
                }
                _ => f.clauses.push(nums(&toks)),
            }
        }
        assert_eq!(f.clauses.len(), declared, "clause count matches header");
        f
    }

    fn nums(toks: &[&str]) -> Vec<i64> {
        let v: Vec<i64> = toks.iter().map(|t| t.parse().unwrap()).collect();
        assert_eq!(v.last(), Some(&0), "line terminated by 0");
        v[..v.len() - 1].to_vec()
    }

    /// Expands every universal assignment, names each existential copy by
    /// its dependency values and decides the resulting CNF by DPLL.
    pub fn decide(f: &File) -> bool {
        let n = f.universals.len();
        let mut copies: HashMap<(i64, u64), usize> = HashMap::new();
        let mut cnf: Vec<Vec<(usize, bool)>> = Vec::new();
        for alpha in 0..1u64 << n {
            let val = |u: i64| {
                let i = f.universals.iter().position(|&x| x == u).unwrap();
                alpha >> i & 1 == 1
            };
            let mut clause_set = Vec::new();
            'clauses: for c in &f.clauses {
                let mut lits = Vec::new();
                for &l in c {
                    let v = l.abs();
                    if f.universals.contains(&v) {
                        if val(v) == (l > 0) {
                            continue 'clauses;
                        }
                    } else {
                        let deps = &f.deps.iter().find(|(y, _)| *y == v).expect("declared existential").1;
                        let key = deps.iter().fold(0u64, |acc, &d| acc << 1 | val(d) as u64);
                        let next = copies.len();
                        let id = *copies.entry((v, key)).or_insert(next);
                        lits.push((id, l > 0));
                    }
                }
                clause_set.push(lits);
            }
            cnf.extend(clause_set);
        }
        dpll(&cnf, &mut vec![None; copies.len()])
    }

    fn dpll(cnf: &[Vec<(usize, bool)>], assign: &mut [Option<bool>]) -> bool {
        loop {
            let mut unit = None;
            for c in cnf {
                let mut open = Vec::new();
                let mut sat = false;
                for &(v, pos) in c {
                    match assign[v] {
                        Some(b) if b == pos => {
                            sat = true;
                            break;
                        }
                        Some(_) => {}
                        None => open.push((v, pos)),
                    }
                }
                if sat {
                    continue;
                }
                match open.len() {
                    0 => return false,
                    1 => {
                        unit = Some(open[0]);
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some((v, pos)) => assign[v] = Some(pos),
                None => break,
            }
        }
        let Some(v) = assign.iter().position(Option::is_none) else {
            return true;
        };
        for b in [false, true] {
            let mut next = assign.to_vec();
            next[v] = Some(b);
            if dpll(cnf, &mut next) {
                return true;
            }
        }
        false
    }
}
