mod common;

use nexp2dqbf::circuit::CircuitBuilder;
use nexp2dqbf::dqbf::esb::{esb_bruteforce, esb_to_dqbf, Esb, FunctionSymbol, Leaf, Quantifier};
use nexp2dqbf::dqbf::{solve_bruteforce, DEFAULT_BUDGET};
use nexp2dqbf::folog::{
    algorithm2, bounded_sat_bruteforce, bsatfo_to_esb, emit_formula, esb_to_bsr, esm_bound, fo_model_check,
    parse_formula, project_esb, skolemize, Formula, FragmentClass, Structure,
};
use nexp2dqbf::oracle::agreement_search;
use nexp2dqbf::reductions::{project_hamiltonian, ProjectionCircuit};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn p(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn sat_at(phi: &Formula, n: usize) -> bool {
    bounded_sat_bruteforce(phi, n, 1 << 24).unwrap().is_some()
}

/// `exists f forall u..: matrix(leaves)` with a single function symbol.
fn single_function(
    arity: usize,
    vars: usize,
    leaves: Vec<Leaf>,
    body: impl FnOnce(&mut CircuitBuilder, &[nexp2dqbf::circuit::Ref]) -> nexp2dqbf::circuit::Ref,
) -> Esb {
    let mut b = CircuitBuilder::new("m");
    let l = b.input("l", leaves.len()).unwrap();
    let out = body(&mut b, &l);
    Esb::new(
        vec![FunctionSymbol {
            name: "f".into(),
            arity,
        }],
        (0..vars).map(|i| format!("u{i}")).collect(),
        (0..vars).map(|i| (Quantifier::Forall, i)).collect(),
        b.finish(out),
        leaves,
    )
    .unwrap()
}

fn app(args: &[usize]) -> Leaf {
    Leaf::App {
        func: 0,
        args: args.to_vec(),
    }
}

#[test]
fn model_checking_examples() {
    for n in 1..=3 {
        assert!(fo_model_check(&p("(forall x (= x x))"), &Structure::new(n)).unwrap());
    }
    let distinct = p("(exists x (exists y (not (= x y))))");
    assert!(!fo_model_check(&distinct, &Structure::new(1)).unwrap());
    assert!(fo_model_check(&distinct, &Structure::new(2)).unwrap());
}

#[test]
fn bounded_search_examples() {
    let distinct = p("(exists x (exists y (not (= x y))))");
    assert!(!sat_at(&distinct, 1));
    assert!(sat_at(&distinct, 2));
    let contradiction = p("(and (forall x (P x)) (exists x (not (P x))))");
    for n in 1..=3 {
        assert!(!sat_at(&contradiction, n));
    }
    // g must flip P, so it needs two elements with different P
    let flip = p("(forall x (forall z (=> (= z (g x)) (<=> (P x) (not (P z))))))");
    assert!(!sat_at(&flip, 1));
    let model = bounded_sat_bruteforce(&flip, 2, DEFAULT_BUDGET).unwrap().unwrap();
    assert_eq!(model.size, 2);
    assert_eq!(model.functions["g"], vec![1, 0]);
    assert_ne!(model.relations["P"][0], model.relations["P"][1]);
}

#[test]
fn model_size_bounds() {
    assert_eq!(esm_bound(FragmentClass::Bsr { m: 3 }), 4);
    assert_eq!(esm_bound(FragmentClass::Fo2Scott { m: 2, n: 3 }), 16);
    assert_eq!(esm_bound(FragmentClass::Monadic { r: 2, n: 2 }), 8);
}

#[test]
fn bounded_chain_matches_direct_search() {
    let sentences = [
        "(forall x (forall z (=> (= z (g x)) (P z))))",
        "(forall x (forall z (and (not (P x)) (=> (= z (g x)) (P z)))))",
        "(forall x (forall z (=> (= z (g x)) (<=> (P x) (not (P z))))))",
        "(forall x (forall z (=> (= z (g x)) (not (= x z)))))",
        "(forall x (forall y (= x y)))",
        "(forall x (and (P x) (not (P x))))",
    ];
    for s in sentences {
        let phi = p(s);
        for n in 1..=4u64 {
            let esb = bsatfo_to_esb(&phi, n).unwrap();
            let chain = solve_bruteforce(&esb_to_dqbf(&esb).unwrap(), 1 << 26).unwrap().is_sat();
            let size = 1usize << (64 - (n - 1).leading_zeros());
            assert_eq!(chain, sat_at(&phi, size), "{s} N={n}");
        }
    }
}

#[test]
fn bsr_examples() {
    let follows = single_function(1, 1, vec![app(&[0]), Leaf::Var(0)], |b, l| b.iff(l[0], l[1]));
    assert!(sat_at(&esb_to_bsr(&follows).unwrap(), 2));
    let clash = single_function(1, 1, vec![app(&[0])], |b, l| {
        let n = b.not(l[0]);
        b.and([l[0], n])
    });
    let bsr = esb_to_bsr(&clash).unwrap();
    for n in 1..=3 {
        assert!(!sat_at(&bsr, n));
    }
    assert!(parse_formula(&emit_formula(&bsr)).unwrap() == bsr);
}

/// Random universal-prefix ESB over `u0 u1` with one function of arity 1 or 2.
fn random_single_function(seed: u64) -> Esb {
    let mut r = common::rng(seed);
    let arity = r.gen_range(1..=2);
    let occurrence = |r: &mut common::Rng| {
        let mut args = vec![0, 1];
        args.shuffle(r);
        args.truncate(arity);
        app(&args)
    };
    let mut leaves = vec![Leaf::Var(0), Leaf::Var(1), occurrence(&mut r), occurrence(&mut r)];
    leaves.dedup();
    let gates = r.gen_range(2..=6);
    let m = common::random_circuit(&mut r, "m", &[("l", leaves.len())], gates);
    let mut b = CircuitBuilder::new("m");
    let l = b.input("l", leaves.len()).unwrap();
    let out = b.embed(&m, &[l]).unwrap();
    Esb::new(
        vec![FunctionSymbol {
            name: "f".into(),
            arity,
        }],
        vec!["u0".into(), "u1".into()],
        vec![(Quantifier::Forall, 0), (Quantifier::Forall, 1)],
        b.finish(out),
        leaves,
    )
    .unwrap()
}

#[test]
fn bsr_suite_matches_esb_truth() {
    let bound = esm_bound(FragmentClass::Bsr { m: 2 }) as usize;
    let mut truths = [0; 2];
    for seed in 0..20 {
        let esb = random_single_function(seed);
        let truth = esb_bruteforce(&esb, DEFAULT_BUDGET).unwrap().is_some();
        truths[truth as usize] += 1;
        assert_eq!(sat_at(&esb_to_bsr(&esb).unwrap(), bound), truth, "seed {seed}");
    }
    assert!(truths.iter().all(|&t| t > 0), "{truths:?}");
}

#[test]
fn esb_projection_examples() {
    let follows = single_function(1, 1, vec![app(&[0]), Leaf::Var(0)], |b, l| b.iff(l[0], l[1]));
    let d = project_esb(&follows).unwrap();
    assert_eq!(agreement_search(&d, DEFAULT_BUDGET).unwrap(), Some(vec![0, 1]));

    let alternating = single_function(1, 2, vec![app(&[0]), app(&[1])], |b, l| {
        let n = b.not(l[1]);
        b.iff(l[0], n)
    });
    let d = project_esb(&alternating).unwrap();
    assert_eq!((d.point_width(), d.value_width()), (2, 2));
    assert!((0..1u64 << 8).all(|code| !d.agrees(&(0..4).map(|i| code >> (2 * i) & 3).collect::<Vec<_>>())));

    let always = single_function(1, 1, vec![app(&[0])], |b, _| b.constant(true));
    let d = project_esb(&always).unwrap();
    assert!(d.agrees(&[0, 0]) && d.agrees(&[0, 1]) && d.agrees(&[1, 0]) && d.agrees(&[1, 1]));
}

fn constant_projection() -> ProjectionCircuit {
    let mut b = CircuitBuilder::new("k");
    for g in ["x1", "y1", "x2", "y2"] {
        b.input(g, 1).unwrap();
    }
    let t = b.constant(true);
    ProjectionCircuit::new(b.finish(t)).unwrap()
}

#[test]
fn algorithm2_on_constant_projection() {
    let phi = algorithm2(&constant_projection());
    // R1 alternates, so every element has a successor profile
    let mut s = Structure::new(2);
    s.relations.insert("R1".into(), vec![false, true]);
    s.relations.insert("S1".into(), vec![true, false]);
    assert!(fo_model_check(&phi, &s).unwrap());
    s.relations.insert("R1".into(), vec![false, false]);
    assert!(!fo_model_check(&phi, &s).unwrap());
}

#[test]
fn algorithm2_on_two_vertex_graphs() {
    let both = algorithm2(&project_hamiltonian(&common::graph_from_mask(1, 0b0110)));
    assert!(sat_at(&both, 2));
    let none = algorithm2(&project_hamiltonian(&common::graph_from_mask(1, 0)));
    for n in 1..=4 {
        assert!(!sat_at(&none, n), "size {n}");
    }
}

#[test]
fn algorithm2_matches_agreement_on_random_projections() {
    for seed in 0..10 {
        let c = common::random_circuit(
            &mut common::rng(seed),
            "d",
            &[("x1", 1), ("y1", 1), ("x2", 1), ("y2", 1)],
            6,
        );
        let d = ProjectionCircuit::new(c).unwrap();
        let agree = agreement_search(&d, DEFAULT_BUDGET).unwrap().is_some();
        assert_eq!(sat_at(&algorithm2(&d), 4), agree, "seed {seed}");
    }
}

/// Random prenex sentence over `P/1` and `=` with two or three quantifiers.
fn random_prenex(seed: u64) -> Formula {
    let mut r = common::rng(seed);
    let vars: Vec<String> = (0..r.gen_range(2..=3)).map(|i| format!("v{i}")).collect();
    let atom = |r: &mut common::Rng| {
        let a = vars.choose(r).unwrap();
        if r.gen_bool(0.5) {
            Formula::pred("P", &[a])
        } else {
            Formula::var_eq(a, vars.choose(r).unwrap())
        }
    };
    let mut clauses = Vec::new();
    for _ in 0..r.gen_range(1..=3) {
        let lits = (0..r.gen_range(1..=2))
            .map(|_| {
                if r.gen_bool(0.5) {
                    atom(&mut r)
                } else {
                    Formula::not(atom(&mut r))
                }
            })
            .collect();
        clauses.push(Formula::Or(lits));
    }
    let mut f = Formula::And(clauses);
    for v in vars.iter().rev() {
        f = if r.gen_bool(0.5) {
            Formula::forall(v, f)
        } else {
            Formula::exists(v, f)
        };
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn skolemization_keeps_bounded_satisfiability(seed in any::<u64>()) {
        let phi = random_prenex(seed);
        let sk = skolemize(&phi).unwrap();
        for n in 1..=3 {
            prop_assert_eq!(sat_at(&sk, n), sat_at(&phi, n), "{} at {}", emit_formula(&phi), n);
        }
    }
}
