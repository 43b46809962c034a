mod common;

use common::graph_from_mask;
use nexp2dqbf::circuit::{from_truth_table, CircuitBuilder};
use nexp2dqbf::dqbf::{check_skolem, solve_bruteforce, Verdict, DEFAULT_BUDGET};
use nexp2dqbf::fixtures;
use nexp2dqbf::oracle::{agreement_search, ntm_run_oracle, subset_sum_numbers};
use nexp2dqbf::reductions::{
    agreement_from_skolem, algorithm1, parse_ntm, project_dominating_set, project_hamiltonian, project_independent_set,
    project_ntm, project_set_packing, project_subgraph_iso, project_subset_sum, project_succinct_sat,
    project_vertex_cover, skolem_from_agreement, ProjectionCircuit, SetFamilyInstance, SuccinctSat,
};
use proptest::prelude::*;

fn agrees(d: &ProjectionCircuit) -> bool {
    agreement_search(d, DEFAULT_BUDGET).unwrap().is_some()
}

/// Every total `g`, or `None` when there are more than `limit` of them.
fn exhaustive(d: &ProjectionCircuit, limit: u64) -> Option<bool> {
    let points = 1u32 << d.point_width();
    let values = 1u64 << d.value_width();
    let total = values.checked_pow(points)?;
    if total > limit {
        return None;
    }
    Some((0..total).any(|mut code| {
        let g: Vec<u64> = (0..points)
            .map(|_| {
                let v = code % values;
                code /= values;
                v
            })
            .collect();
        d.agrees(&g)
    }))
}

fn constant(value: bool) -> ProjectionCircuit {
    let mut b = CircuitBuilder::new("k");
    for g in ["x1", "y1", "x2", "y2"] {
        b.input(g, 1).unwrap();
    }
    let one = b.constant(true);
    let out = if value { one } else { b.not(one) };
    ProjectionCircuit::new(b.finish(out)).unwrap()
}

fn set_family(members: &[(u64, u64)], k: u64) -> SetFamilyInstance {
    (0..16)
        .map(|mask| {
            let c = from_truth_table("s", &[("a", 1), ("b", 1)], |b| {
                mask >> (2 * b[0] as u64 + b[1] as u64) & 1 == 1
            });
            SetFamilyInstance::new(c, k).unwrap()
        })
        .find(|s| (0..2).all(|set| (0..2).all(|e| s.contains(set, e) == members.contains(&(set, e)))))
        .unwrap()
}

/// The one-bit succinct CNF whose clause `c` holds exactly the listed `(negative, var)` literals.
fn cnf(clauses: [&[(bool, u64)]; 2]) -> SuccinctSat {
    common::sat_instances()
        .into_iter()
        .find(|s| {
            (0..2).all(|c| {
                [false, true]
                    .iter()
                    .all(|&neg| (0..2).all(|v| s.contains(neg, v, c) == clauses[c as usize].contains(&(neg, v))))
            })
        })
        .unwrap()
}

#[test]
fn algorithm1_on_constants() {
    assert!(solve_bruteforce(&algorithm1(&constant(true)), DEFAULT_BUDGET)
        .unwrap()
        .is_sat());
    assert!(!solve_bruteforce(&algorithm1(&constant(false)), DEFAULT_BUDGET)
        .unwrap()
        .is_sat());
}

#[test]
fn hamiltonian_examples() {
    let two_cycle = project_hamiltonian(&graph_from_mask(1, 0b0110));
    assert!(two_cycle.agrees(&[0, 1]));
    assert!(!agrees(&project_hamiltonian(&graph_from_mask(1, 0))));

    let cycle = (1 << 1) | (1 << 6) | (1 << 11) | (1 << 12);
    let d = project_hamiltonian(&graph_from_mask(2, cycle));
    assert_eq!(exhaustive(&d, 256), Some(true));
    let reversed = cycle & !(1 << 1) | (1 << 4);
    assert_eq!(
        exhaustive(&project_hamiltonian(&graph_from_mask(2, reversed)), 256),
        Some(false)
    );
}

#[test]
fn set_packing_examples() {
    assert!(agrees(&project_set_packing(&set_family(&[(0, 0), (1, 1)], 2)).unwrap()));
    assert!(!agrees(
        &project_set_packing(&set_family(&[(0, 0), (1, 0)], 2)).unwrap()
    ));
    assert!(agrees(
        &project_set_packing(&set_family(&[(0, 0), (0, 1), (1, 0)], 1)).unwrap()
    ));
}

#[test]
fn subset_sum_examples() {
    let mut found = [false; 3];
    for c1 in 0..256 {
        for c2 in 0..16 {
            let inst = common::subset_sum(c1, c2);
            let (nums, t) = subset_sum_numbers(&inst).unwrap();
            let slot = match (nums.as_slice(), t) {
                ([1, 2], 3) => 0,
                ([1, 1], 3) => 1,
                (_, 0) => 2,
                _ => continue,
            };
            found[slot] = true;
            assert_eq!(agrees(&project_subset_sum(&inst)), slot != 1, "{nums:?} t={t}");
        }
    }
    assert_eq!(found, [true; 3]);
}

#[test]
fn independent_set_examples() {
    assert!(agrees(&project_independent_set(&graph_from_mask(1, 0), 2).unwrap()));
    assert!(!agrees(
        &project_independent_set(&graph_from_mask(1, 0b0110), 2).unwrap()
    ));
    assert!(agrees(&project_independent_set(&fixtures::tri(), 2).unwrap()));
}

#[test]
fn subgraph_iso_examples() {
    let edge = graph_from_mask(1, 0b0010);
    // embeddings are induced: the pattern's missing self-loops rule out a host with loops
    assert!(!agrees(
        &project_subgraph_iso(&edge, &graph_from_mask(1, 0b1111)).unwrap()
    ));
    assert!(agrees(
        &project_subgraph_iso(&edge, &graph_from_mask(1, 0b0100)).unwrap()
    ));
    assert!(!agrees(&project_subgraph_iso(&edge, &graph_from_mask(1, 0)).unwrap()));
    for g in [fixtures::tri(), fixtures::c4(), fixtures::k4()] {
        assert!(project_subgraph_iso(&g, &g).unwrap().agrees(&[0, 1, 2, 3]));
    }
}

#[test]
fn vertex_cover_examples() {
    let edge = graph_from_mask(1, 0b0110);
    assert!(agrees(&project_vertex_cover(&edge, 1)));
    assert!(!agrees(&project_vertex_cover(&edge, 0)));
    assert!(agrees(&project_vertex_cover(&fixtures::tri(), 2)));
}

#[test]
fn dominating_set_examples() {
    assert!(agrees(&project_dominating_set(&graph_from_mask(1, 0b0110), 1).unwrap()));
    assert!(!agrees(&project_dominating_set(&graph_from_mask(1, 0), 1).unwrap()));
    assert!(agrees(&project_dominating_set(&fixtures::k4(), 1).unwrap()));
}

#[test]
fn succinct_sat_examples() {
    let x0_x1 = cnf([&[(false, 0)], &[(false, 1)]]);
    assert!(agrees(&project_succinct_sat(&x0_x1).unwrap()));
    let x0_not_x0 = cnf([&[(false, 0)], &[(true, 0)]]);
    assert!(!agrees(&project_succinct_sat(&x0_not_x0).unwrap()));
    let both = cnf([&[(false, 0), (true, 0)], &[(false, 0), (true, 0)]]);
    assert!(agrees(&project_succinct_sat(&both).unwrap()));
}

#[test]
fn machine_examples() {
    let m = fixtures::first1();
    assert!(agrees(&project_ntm(&m, "10", 2).unwrap()));
    assert!(!agrees(&project_ntm(&m, "00", 2).unwrap()));
    let stuck = parse_ntm(common::STUCK).unwrap();
    for word in ["0", "1", "01", "11"] {
        assert!(!agrees(&project_ntm(&stuck, word, 1).unwrap()), "{word}");
    }
}

#[test]
fn machine_runs_match_agreement() {
    for inst in common::ntm_instances() {
        let run = ntm_run_oracle(&inst.machine, &inst.word, inst.t).unwrap();
        let d = project_ntm(&inst.machine, &inst.word, inst.t).unwrap();
        let g = agreement_search(&d, 1 << 22).unwrap();
        assert_eq!(
            run.is_some(),
            g.is_some(),
            "{} {} t={}",
            inst.machine.name,
            inst.word,
            inst.t
        );
        if let Some(cells) = run {
            assert!(d.agrees(&cells), "the accepting run is itself an agreeing g");
        }
    }
}

#[test]
fn failed_searches_are_refuted_exhaustively() {
    let mut refuted = 0;
    for (label, inst) in common::projection_suite() {
        let Ok(d) = inst.project() else { continue };
        let Some(any) = exhaustive(&d, 64) else { continue };
        assert_eq!(agrees(&d), any, "{label}");
        refuted += !any as usize;
    }
    assert!(refuted > 0);
}

fn random_projection(seed: u64) -> ProjectionCircuit {
    let c = common::random_circuit(
        &mut common::rng(seed),
        "d",
        &[("x1", 1), ("y1", 1), ("x2", 1), ("y2", 1)],
        6,
    );
    ProjectionCircuit::new(c).unwrap()
}

proptest! {
    #[test]
    fn search_matches_exhaustion(seed in any::<u64>()) {
        let d = random_projection(seed);
        prop_assert_eq!(Some(agrees(&d)), exhaustive(&d, 16));
    }

    #[test]
    fn witnesses_transport_both_ways(seed in any::<u64>()) {
        let d = random_projection(seed);
        let phi = algorithm1(&d);
        match agreement_search(&d, DEFAULT_BUDGET).unwrap() {
            Some(g) => {
                let tables = skolem_from_agreement(&d, &g);
                prop_assert!(check_skolem(&phi, &tables).unwrap());
                prop_assert_eq!(agreement_from_skolem(&d, &tables).unwrap(), g);
            }
            None => prop_assert_eq!(solve_bruteforce(&phi, DEFAULT_BUDGET).unwrap(), Verdict::Unsat),
        }
        if let Verdict::Sat(tables) = solve_bruteforce(&phi, DEFAULT_BUDGET).unwrap() {
            prop_assert!(d.agrees(&agreement_from_skolem(&d, &tables).unwrap()));
        }
    }
}
