//! The nine acceptance criteria, each run at its stated scale and time
//! limit. Prints one PASS/FAIL line per criterion and fails if any fails.

mod common;

use std::time::{Duration, Instant};

use nexp2dqbf::circuit::{build_successor, to_bits, CircuitBuilder};
use nexp2dqbf::dqbf::esb::{esb_bruteforce, esb_to_dqbf};
use nexp2dqbf::dqbf::{
    check_skolem, parse_dqdimacs, prop1_dnf_transform, solve_bruteforce, to_dqdimacs, Dqbf, Existential, Lit, Matrix,
    Verdict, DEFAULT_BUDGET,
};
use nexp2dqbf::fixtures;
use nexp2dqbf::folog::{
    algorithm2, bounded_sat_bruteforce, bsatfo_to_esb, build_feq_fsuc, esb_to_bsr, esm_bound, fo_model_check, Formula,
    FragmentClass, Structure,
};
use nexp2dqbf::oracle::{agreement_search, ntm_run_oracle, oracle_check, verify_witness, Answer};
use nexp2dqbf::reductions::{
    agreement_from_skolem, algorithm1, ceil_log2, project_3col_direct, project_ntm, skolem_from_agreement, Instance,
    ProjectionCircuit, SuccinctGraph,
};

const SEARCH_BUDGET: u64 = 1 << 22;
const MODEL_BUDGET: u64 = 1 << 26;
const CHAIN_BUDGET: u64 = 1 << 32;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn projections() -> Vec<(String, Instance, ProjectionCircuit)> {
    common::projection_suite()
        .into_iter()
        .map(|(label, inst)| {
            let d = inst.project().unwrap_or_else(|e| panic!("{label}: {e}"));
            (label, inst, d)
        })
        .collect()
}

fn criterion1() -> Outcome {
    let mut count = 0;
    let mut yes = 0;
    for (label, inst, d) in projections() {
        let oracle = oracle_check(&inst).map_err(|e| format!("{label}: oracle {e}"))?;
        let found = agreement_search(&d, SEARCH_BUDGET).map_err(|e| format!("{label}: search {e}"))?;
        ensure(oracle.is_yes() == found.is_some(), || {
            format!("{label}: oracle {} but agreement {}", oracle.is_yes(), found.is_some())
        })?;
        if let Answer::Yes(w) = &oracle {
            ensure(verify_witness(&inst, w).unwrap_or(false), || {
                format!("{label}: witness {w} rejected")
            })?;
            yes += 1;
        }
        if let Some(g) = &found {
            ensure(d.agrees(g), || format!("{label}: returned g does not agree"))?;
        }
        count += 1;
    }
    Ok(format!("{count} instances, {yes} yes"))
}

fn criterion2() -> Outcome {
    let mut count = 0;
    for (label, _, d) in projections() {
        if d.point_width() > 2 || d.value_width() > 2 {
            continue;
        }
        let phi = algorithm1(&d);
        let verdict = solve_bruteforce(&phi, DEFAULT_BUDGET).map_err(|e| format!("{label}: {e}"))?;
        let found = agreement_search(&d, SEARCH_BUDGET).map_err(|e| format!("{label}: {e}"))?;
        ensure(verdict.is_sat() == found.is_some(), || {
            format!("{label}: DQBF and agreement disagree")
        })?;
        if let Some(g) = found {
            let tables = skolem_from_agreement(&d, &g);
            ensure(check_skolem(&phi, &tables).unwrap(), || {
                format!("{label}: transported g is no Skolem model")
            })?;
            ensure(agreement_from_skolem(&d, &tables).unwrap() == g, || {
                format!("{label}: round trip changed g")
            })?;
        }
        if let Verdict::Sat(tables) = verdict {
            let g = agreement_from_skolem(&d, &tables).unwrap();
            ensure(d.agrees(&g), || {
                format!("{label}: Skolem witness does not give an agreeing g")
            })?;
            ensure(skolem_from_agreement(&d, &g) == tables, || {
                format!("{label}: witness not bit-exact")
            })?;
        }
        count += 1;
    }
    ensure(count > 100, || format!("only {count} projections in range"))?;
    Ok(format!("{count} projections"))
}

fn three_col(g: &SuccinctGraph) -> Result<bool, String> {
    let direct = solve_bruteforce(&project_3col_direct(g), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
    let oracle = oracle_check(&Instance::ThreeCol(g.clone())).map_err(|e| e.to_string())?;
    ensure(direct.is_sat() == oracle.is_yes(), || {
        format!("{}: encoding and colouring disagree", g.edges.name())
    })?;
    Ok(direct.is_sat())
}

fn criterion3() -> Outcome {
    ensure(three_col(&fixtures::tri())?, || "TRI should be colourable".into())?;
    ensure(!three_col(&fixtures::k4())?, || "K4 should not be colourable".into())?;
    let edgeless = SuccinctGraph::new(fixtures::edgeless_circuit(1)).unwrap();
    ensure(three_col(&edgeless)?, || "edgeless graph should be colourable".into())?;
    let mut sat = 0;
    for g in common::graphs_n1() {
        sat += three_col(&g)? as usize;
    }
    Ok(format!(
        "TRI sat, K4 unsat, edgeless sat, {sat}/16 two-vertex graphs colourable"
    ))
}

/// forall x1 x2 exists y1(x1) y2(x2): NOT (x2 OR (y1 AND x1 AND y2))
fn worked_example() -> Dqbf {
    let mut b = CircuitBuilder::new("example");
    let x1 = b.input("x1", 1).unwrap()[0];
    let x2 = b.input("x2", 1).unwrap()[0];
    let y1 = b.input("y1", 1).unwrap()[0];
    let y2 = b.input("y2", 1).unwrap()[0];
    let u1 = b.and([y1, x1, y2]);
    let u2 = b.or([x2, u1]);
    let u3 = b.not(u2);
    Dqbf::from_circuit(b.finish(u3), &["x1", "x2"], &[("y1", &["x1"]), ("y2", &["x2"])]).unwrap()
}

fn existential_signature(phi: &Dqbf) -> Vec<(String, Vec<String>)> {
    phi.existentials()
        .iter()
        .map(|e| {
            (
                phi.name(e.var).to_string(),
                e.deps.iter().map(|&d| phi.name(d).to_string()).collect(),
            )
        })
        .collect()
}

fn dnf_terms(phi: &Dqbf) -> Result<&Vec<Vec<Lit>>, String> {
    match phi.matrix() {
        Matrix::Dnf(terms) => Ok(terms),
        _ => Err("transform did not produce a DNF".into()),
    }
}

fn criterion4() -> Outcome {
    let mut r = common::rng(4);
    for i in 0..20 {
        let phi = common::random_dqbf(&mut r);
        let out = prop1_dnf_transform(&phi).map_err(|e| e.to_string())?;
        let a = solve_bruteforce(&phi, DEFAULT_BUDGET).map_err(|e| format!("#{i}: {e}"))?;
        let b = solve_bruteforce(&out, DEFAULT_BUDGET).map_err(|e| format!("#{i}: {e}"))?;
        ensure(a.is_sat() == b.is_sat(), || format!("#{i}: satisfiability changed"))?;
        ensure(existential_signature(&phi) == existential_signature(&out), || {
            format!("#{i}: existentials changed")
        })?;
        for term in dnf_terms(&out)? {
            let ex = term.iter().filter(|l| !out.is_universal(l.var)).count();
            ensure(ex <= 1, || format!("#{i}: term with {ex} existential literals"))?;
        }
    }

    let ex = worked_example();
    let out = prop1_dnf_transform(&ex).map_err(|e| e.to_string())?;
    let names: Vec<&str> = out.names().iter().map(String::as_str).collect();
    ensure(
        names == ["x1[0]", "x2[0]", "y1[0]", "y2[0]", "u1", "u2", "u3", "v1", "v2"],
        || format!("unexpected variables {names:?}"),
    )?;
    let universals: Vec<&str> = out.universals().iter().map(|&u| names[u]).collect();
    ensure(universals == ["x1[0]", "x2[0]", "u1", "u2", "u3", "v1", "v2"], || {
        format!("unexpected universal order {universals:?}")
    })?;
    ensure(existential_signature(&ex) == existential_signature(&out), || {
        "example existentials changed".into()
    })?;
    // (v1<->y1) & (v2<->y2) & (u1<->v1&x1&v2) & (u2<->x2|u1) & (u3<->!u2) -> u3
    for bits in 0..1u32 << 9 {
        let v: Vec<bool> = (0..9).map(|i| bits >> i & 1 == 1).collect();
        let [x1, x2, y1, y2, u1, u2, u3, v1, v2] = v[..] else {
            unreachable!()
        };
        let antecedent = (v1 == y1) && (v2 == y2) && (u1 == (v1 && x1 && v2)) && (u2 == (x2 || u1)) && (u3 == !u2);
        let printed = !antecedent || u3;
        ensure(out.eval_matrix(&v) == printed, || {
            format!("matrix differs from the printed one at {v:?}")
        })?;
    }
    for term in dnf_terms(&out)? {
        ensure(term.iter().filter(|l| !out.is_universal(l.var)).count() <= 1, || {
            "example term has two existentials".into()
        })?;
    }
    ensure(
        solve_bruteforce(&ex, DEFAULT_BUDGET).unwrap().is_sat()
            == solve_bruteforce(&out, DEFAULT_BUDGET).unwrap().is_sat(),
        || "example verdict changed".into(),
    )?;
    Ok("20 random formulas and the worked example".into())
}

fn dqbf_suite() -> Vec<(String, Dqbf)> {
    let mut out = Vec::new();
    let mut r = common::rng(5);
    for i in 0..20 {
        out.push((format!("random #{i}"), common::random_dqbf(&mut r)));
    }
    out.push(("worked example".into(), worked_example()));
    out.push((
        "dnf worked example".into(),
        prop1_dnf_transform(&worked_example()).unwrap(),
    ));
    out.push(("3col TRI".into(), project_3col_direct(&fixtures::tri())));
    out.push(("3col K4".into(), project_3col_direct(&fixtures::k4())));
    for (i, g) in common::graphs_n1().iter().enumerate() {
        out.push((
            format!("hamiltonian n1#{i}"),
            algorithm1(&nexp2dqbf::reductions::project_hamiltonian(g)),
        ));
    }
    out
}

fn criterion5() -> Outcome {
    let suite = dqbf_suite();
    for (label, phi) in &suite {
        let text = to_dqdimacs(phi);
        let back = parse_dqdimacs(&text).map_err(|e| format!("{label}: reparse {e}"))?;
        ensure(to_dqdimacs(&back) == text, || {
            format!("{label}: emission not stable under reparse")
        })?;
        let file = common::expansion::read(&text);
        ensure(file.vars == back.num_vars(), || {
            format!("{label}: header variable count")
        })?;
        let expected = solve_bruteforce(phi, DEFAULT_BUDGET).map_err(|e| format!("{label}: {e}"))?;
        ensure(common::expansion::decide(&file) == expected.is_sat(), || {
            format!("{label}: expansion disagrees")
        })?;
    }
    Ok(format!("{} files", suite.len()))
}

fn chain_bound(n: u64) -> usize {
    1 << ceil_log2(n)
}

fn criterion6() -> Outcome {
    let suite = common::sentence_suite();
    ensure(suite.len() >= 20, || format!("only {} sentences", suite.len()))?;
    let mut sat = 0;
    for (label, phi) in &suite {
        for n in 1..=4u64 {
            let esb = bsatfo_to_esb(phi, n).map_err(|e| format!("{label}: {e}"))?;
            let dq = esb_to_dqbf(&esb).map_err(|e| format!("{label}: {e}"))?;
            let chain = solve_bruteforce(&dq, CHAIN_BUDGET).map_err(|e| format!("{label} N={n}: {e}"))?;
            let direct =
                bounded_sat_bruteforce(phi, chain_bound(n), MODEL_BUDGET).map_err(|e| format!("{label}: {e}"))?;
            ensure(chain.is_sat() == direct.is_some(), || {
                format!(
                    "{label} N={n}: chain {} vs bounded {}",
                    chain.is_sat(),
                    direct.is_some()
                )
            })?;
            sat += chain.is_sat() as usize;
        }
    }
    Ok(format!("{} sentences x 4 bounds, {sat} satisfiable", suite.len()))
}

fn random_projection(r: &mut common::Rng, n: usize, m: usize) -> ProjectionCircuit {
    let c = common::random_circuit(r, "d", &[("x1", n), ("y1", m), ("x2", n), ("y2", m)], 6);
    ProjectionCircuit::new(c).unwrap()
}

fn criterion7() -> Outcome {
    let bsr_bound = esm_bound(FragmentClass::Bsr { m: 2 }) as usize;
    let mut esbs = Vec::new();
    let mut r = common::rng(71);
    for _ in 0..20 {
        esbs.push(common::random_esb(&mut r));
    }
    for (label, phi) in common::sentence_suite() {
        let sig = nexp2dqbf::folog::Signature::of(&phi).unwrap();
        if sig.functions.is_empty() && sig.predicates.values().all(|&a| a <= 1) {
            esbs.push(bsatfo_to_esb(&phi, 2).map_err(|e| format!("{label}: {e}"))?);
        }
    }
    for (i, esb) in esbs.iter().enumerate() {
        let truth = esb_bruteforce(esb, MODEL_BUDGET).map_err(|e| format!("esb #{i}: {e}"))?;
        let bsr = esb_to_bsr(esb).map_err(|e| format!("esb #{i}: {e}"))?;
        let model = bounded_sat_bruteforce(&bsr, bsr_bound, MODEL_BUDGET).map_err(|e| format!("bsr #{i}: {e}"))?;
        ensure(truth.is_some() == model.is_some(), || {
            format!("esb #{i}: ESB {} vs BSR {}", truth.is_some(), model.is_some())
        })?;
    }

    let mut ds: Vec<(String, ProjectionCircuit)> = projections()
        .into_iter()
        .filter(|(_, _, d)| d.point_width() <= 1 && d.value_width() <= 1)
        .map(|(l, _, d)| (l, d))
        .collect();
    let mut r = common::rng(72);
    for n in 0..=1 {
        for m in 0..=1 {
            for i in 0..8 {
                ds.push((format!("random n={n} m={m} #{i}"), random_projection(&mut r, n, m)));
            }
        }
    }
    let mut agreeing = 0;
    for (label, d) in &ds {
        let phi = algorithm2(d);
        let model = bounded_sat_bruteforce(&phi, 4, MODEL_BUDGET).map_err(|e| format!("{label}: {e}"))?;
        let g = agreement_search(d, SEARCH_BUDGET).map_err(|e| format!("{label}: {e}"))?;
        ensure(model.is_some() == g.is_some(), || {
            format!("{label}: FO2 {} vs agreement {}", model.is_some(), g.is_some())
        })?;
        agreeing += g.is_some() as usize;
    }

    for n in 1..=3usize {
        let names: Vec<String> = (1..=n).map(|i| format!("R{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let (feq, fsuc) = build_feq_fsuc(&refs).unwrap();
        let succ = build_successor(n).unwrap();
        // element 0 carries profile a, element 1 profile b; A and B pin x and y
        let pin = |f: &Formula| {
            Formula::exists(
                "x",
                Formula::exists(
                    "y",
                    Formula::And(vec![Formula::pred("A", &["x"]), Formula::pred("B", &["y"]), f.clone()]),
                ),
            )
        };
        for a in 0..1u64 << n {
            for b in 0..1u64 << n {
                let mut s = Structure::new(2);
                s.relations.insert("A".into(), vec![true, false]);
                s.relations.insert("B".into(), vec![false, true]);
                for (i, name) in names.iter().enumerate() {
                    s.relations.insert(name.clone(), vec![a >> i & 1 == 1, b >> i & 1 == 1]);
                }
                let mut bits = to_bits(a, n);
                bits.extend(to_bits(b, n));
                ensure(
                    fo_model_check(&pin(&fsuc), &s).unwrap() == succ.eval_bits(&bits),
                    || format!("fsuc n={n} differs at {a}->{b}"),
                )?;
                ensure(fo_model_check(&pin(&feq), &s).unwrap() == (a == b), || {
                    format!("feq n={n} differs at {a},{b}")
                })?;
            }
        }
    }
    Ok(format!(
        "{} ESB/BSR pairs, {} projections via FO2 ({agreeing} agreeing), fsuc n<=3",
        esbs.len(),
        ds.len()
    ))
}

fn criterion8() -> Outcome {
    let machine = fixtures::first1();
    let mut report = Vec::new();
    for word in ["00", "01", "10", "11"] {
        let d = project_ntm(&machine, word, 2).map_err(|e| e.to_string())?;
        let g = agreement_search(&d, SEARCH_BUDGET).map_err(|e| format!("{word}: {e}"))?;
        let run = ntm_run_oracle(&machine, word, 2).map_err(|e| format!("{word}: {e}"))?;
        ensure(g.is_some() == run.is_some(), || {
            format!("{word}: agreement {} vs run {}", g.is_some(), run.is_some())
        })?;
        ensure(run.is_some() == word.starts_with('1'), || {
            format!("{word}: unexpected verdict")
        })?;
        report.push(format!("{word}={}", if run.is_some() { "accept" } else { "reject" }));
    }
    Ok(report.join(" "))
}

fn criterion9() -> Outcome {
    let mut checked = 0;
    for inst in common::ntm_instances() {
        let d = project_ntm(&inst.machine, &inst.word, inst.t).map_err(|e| e.to_string())?;
        let m = inst.machine.cell_bits();
        ensure(d.value_width() == m, || {
            format!("value width {} != {m}", d.value_width())
        })?;
        let phi = algorithm1(&d);
        let t = inst.t;
        ensure(phi.universals().len() == 4 * t, || {
            format!("{} universals for t={t}", phi.universals().len())
        })?;
        let ex: &[Existential] = phi.existentials();
        ensure(ex.len() == 2 * m, || {
            format!("{} existentials, expected {}", ex.len(), 2 * m)
        })?;
        let x1: Vec<usize> = phi.universals()[..2 * t].to_vec();
        let x2: Vec<usize> = phi.universals()[2 * t..].to_vec();
        ensure(
            ex[..m].iter().all(|e| e.deps == x1) && ex[m..].iter().all(|e| e.deps == x2),
            || "copies do not depend on their own point".into(),
        )?;
        let text = to_dqdimacs(&phi);
        let a_line = text.lines().find(|l| l.starts_with("a ")).unwrap();
        ensure(a_line.split_whitespace().count() == 4 * t + 2, || {
            format!("a-line `{a_line}`")
        })?;
        let declared: Vec<usize> = text
            .lines()
            .filter(|l| l.starts_with("d "))
            .take(2 * m)
            .map(|l| l.split_whitespace().count() - 3)
            .collect();
        ensure(declared.iter().all(|&k| k == 2 * t), || {
            format!("d-lines depend on {declared:?}")
        })?;
        checked += 1;
    }
    Ok(format!(
        "{checked} NTM projections: 4t universals, {}-bit copies",
        fixtures::first1().cell_bits()
    ))
}

/// Label, check, time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 9] = [
        ("1 reduction suite", criterion1, 300),
        ("2 algorithm-1 bridge", criterion2, 120),
        ("3 three-colourability", criterion3, 30),
        ("4 DNF transform", criterion4, 60),
        ("5 DQDIMACS integrity", criterion5, 120),
        ("6 bounded FO chain", criterion6, 300),
        ("7 logic web", criterion7, 300),
        ("8 NTM projection", criterion8, 120),
        ("9 structural counts", criterion9, 60),
    ];
    let mut failed = Vec::new();
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        match (&outcome, in_time) {
            (Ok(detail), true) => println!("PASS criterion {name}: {detail} ({:.2}s)", took.as_secs_f64()),
            (Ok(detail), false) => {
                println!(
                    "FAIL criterion {name}: {detail} but took {:.2}s > {limit}s",
                    took.as_secs_f64()
                );
                failed.push(name);
            }
            (Err(why), _) => {
                println!("FAIL criterion {name}: {why} ({:.2}s)", took.as_secs_f64());
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
