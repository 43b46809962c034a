//! Built-in fixtures and enumerated instance families for `check`.

use std::collections::BTreeMap;

use nexp2dqbf::circuit::{from_bits, from_truth_table, Circuit};
use nexp2dqbf::fixtures;
use nexp2dqbf::reductions::{
    Instance, NtmInstance, Problem, SetFamilyInstance, SubsetSumInstance, SuccinctGraph, SuccinctSat,
};
use nexp2dqbf::Error;

/// Largest truth table an enumeration may range over (2^12 instances).
const MAX_TABLE_BITS: usize = 12;

fn table(name: &str, groups: &[(&str, usize)], mask: u64) -> Circuit {
    from_truth_table(name, groups, |bits| (mask >> from_bits(bits)) & 1 == 1)
}

fn graph(n: usize, mask: u64) -> SuccinctGraph {
    SuccinctGraph::new(table("g", &[("u", n), ("v", n)], mask)).expect("two equal groups")
}

fn set_family(mask: u64, k: u64) -> SetFamilyInstance {
    SetFamilyInstance::new(table("s", &[("e", 1), ("b", 1)], mask), k).expect("valid family")
}

fn subset_sum(n: usize, m: usize, c1: u64, c2: u64) -> SubsetSumInstance {
    SubsetSumInstance::new(table("c1", &[("a", n), ("b", m)], c1), table("c2", &[("a", n)], c2)).expect("valid")
}

fn sat(n: usize, m: usize, mask: u64) -> SuccinctSat {
    SuccinctSat::new(table("f", &[("t", 1), ("u", m), ("v", n)], mask), None, None).expect("valid")
}

/// Small hand-picked instances of every problem, both answers represented.
pub fn builtins() -> Vec<(String, Instance)> {
    let edge = || graph(1, 0b0100);
    let both = || graph(1, 0b0110);
    let empty1 = || SuccinctGraph::new(fixtures::edgeless_circuit(1)).expect("graph");
    let mut out: Vec<(String, Instance)> = Vec::new();
    let mut push = |label: &str, inst: Instance| out.push((label.to_string(), inst));

    push("3col tri", Instance::ThreeCol(fixtures::tri()));
    push("3col k4", Instance::ThreeCol(fixtures::k4()));
    push("3col c4", Instance::ThreeCol(fixtures::c4()));
    push("3col edgeless", Instance::ThreeCol(empty1()));

    push("hamiltonian c4", Instance::Hamiltonian(fixtures::c4()));
    push("hamiltonian k4", Instance::Hamiltonian(fixtures::k4()));
    push("hamiltonian tri", Instance::Hamiltonian(fixtures::tri()));
    push("hamiltonian two-cycle", Instance::Hamiltonian(both()));
    push("hamiltonian edgeless", Instance::Hamiltonian(empty1()));

    for k in 1..=3 {
        push(
            &format!("independentset tri k={k}"),
            Instance::IndependentSet(fixtures::tri(), k),
        );
    }
    push("independentset edgeless k=2", Instance::IndependentSet(empty1(), 2));
    push("independentset two-cycle k=2", Instance::IndependentSet(both(), 2));
    for k in 1..=2 {
        push(
            &format!("vertexcover tri k={k}"),
            Instance::VertexCover(fixtures::tri(), k),
        );
    }
    push("vertexcover edge k=1", Instance::VertexCover(both(), 1));
    push("dominatingset k4 k=1", Instance::DominatingSet(fixtures::k4(), 1));
    push("dominatingset edge k=1", Instance::DominatingSet(both(), 1));
    push("dominatingset edgeless k=1", Instance::DominatingSet(empty1(), 1));
    push("dominatingset tri k=2", Instance::DominatingSet(fixtures::tri(), 2));

    push("subgraphiso edge into two-cycle", Instance::SubgraphIso(edge(), both()));
    push(
        "subgraphiso edge into edgeless",
        Instance::SubgraphIso(edge(), empty1()),
    );
    push(
        "subgraphiso c4 into c4",
        Instance::SubgraphIso(fixtures::c4(), fixtures::c4()),
    );
    push(
        "subgraphiso edge into tri",
        Instance::SubgraphIso(edge(), fixtures::tri()),
    );

    push("setpacking disjoint k=2", Instance::SetPacking(set_family(0b1001, 2)));
    push("setpacking colliding k=2", Instance::SetPacking(set_family(0b0011, 2)));
    push("setpacking k=1", Instance::SetPacking(set_family(0b0011, 1)));

    push(
        "subsetsum (1,2) t=3",
        Instance::SubsetSum(subset_sum(2, 1, 0b1001, 0b0011)),
    );
    push(
        "subsetsum (1,1) t=3",
        Instance::SubsetSum(subset_sum(2, 1, 0b0011, 0b0011)),
    );
    push("subsetsum t=0", Instance::SubsetSum(subset_sum(2, 1, 0b0110, 0)));

    push("sat x0, x1", Instance::Sat(sat(1, 1, 0b1001)));
    push("sat x0, not x0", Instance::Sat(sat(1, 1, 0b10_0001)));

    for word in ["00", "01", "10", "11"] {
        push(
            &format!("ntm first1 t=2 word={word}"),
            Instance::Ntm(NtmInstance {
                machine: fixtures::first1(),
                word: word.to_string(),
                t: 2,
            }),
        );
    }
    out
}

/// Parses `n=2,m=1`.
pub fn parse_params(spec: &str) -> Result<BTreeMap<String, usize>, Error> {
    let mut out = BTreeMap::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("expected `name=value`, found `{part}`")))?;
        let v = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("`{part}` needs a numeric value")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn param(params: &BTreeMap<String, usize>, key: &str, problem: Problem) -> Result<usize, Error> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::InvalidParameter(format!("enumerating {problem} needs `{key}`")))
}

fn masks(entries: usize) -> Result<std::ops::Range<u64>, Error> {
    if entries > MAX_TABLE_BITS {
        return Err(Error::Capacity(format!(
            "{entries}-entry truth tables give 2^{entries} instances, at most 2^{MAX_TABLE_BITS} are enumerated"
        )));
    }
    Ok(0..1u64 << entries)
}

fn entries(width: usize) -> Result<usize, Error> {
    if width > 6 {
        return Err(Error::Capacity(format!(
            "a {width}-input truth table is too large to enumerate"
        )));
    }
    Ok(1 << width)
}

/// Every instance whose defining circuit is an arbitrary truth table of the
/// given shape. Subset-sum ranges over `C1` and takes the target table
/// `i mod 2^(2^n)` for the `i`-th `C1`.
pub fn enumerate(problem: Problem, params: &BTreeMap<String, usize>, k: u64) -> Result<Vec<(String, Instance)>, Error> {
    let known: &[&str] = match problem {
        Problem::SubsetSum | Problem::SetPacking | Problem::Sat => &["n", "m"],
        Problem::Ntm => return Err(Error::Unsupported("ntm instances are not enumerable".into())),
        _ => &["n"],
    };
    if let Some(extra) = params.keys().find(|p| !known.contains(&p.as_str())) {
        return Err(Error::InvalidParameter(format!(
            "{problem} enumeration does not take `{extra}`"
        )));
    }
    let n = param(params, "n", problem)?;
    let label = |i: u64| format!("{problem} #{i}");
    let mut out = Vec::new();
    match problem {
        Problem::SubsetSum => {
            let m = param(params, "m", problem)?;
            let targets = 1u64 << entries(n)?;
            for c1 in masks(entries(n + m)?)? {
                out.push((label(c1), Instance::SubsetSum(subset_sum(n, m, c1, c1 % targets))));
            }
        }
        Problem::SetPacking => {
            let m = param(params, "m", problem)?;
            for mask in masks(entries(n + m)?)? {
                let c = table("s", &[("e", n), ("b", m)], mask);
                out.push((label(mask), Instance::SetPacking(SetFamilyInstance::new(c, k)?)));
            }
        }
        Problem::Sat => {
            let m = param(params, "m", problem)?;
            for mask in masks(entries(1 + m + n)?)? {
                out.push((label(mask), Instance::Sat(sat(n, m, mask))));
            }
        }
        Problem::SubgraphIso => {
            let all: Vec<u64> = masks(entries(2 * n)?)?.collect();
            if all.len() * all.len() > 1 << MAX_TABLE_BITS {
                return Err(Error::Capacity(format!("{} graph pairs", all.len() * all.len())));
            }
            for &a in &all {
                for &b in &all {
                    out.push((
                        format!("{problem} #{a}/{b}"),
                        Instance::SubgraphIso(graph(n, a), graph(n, b)),
                    ));
                }
            }
        }
        _ => {
            for mask in masks(entries(2 * n)?)? {
                let g = graph(n, mask);
                let inst = match problem {
                    Problem::ThreeCol => Instance::ThreeCol(g),
                    Problem::Hamiltonian => Instance::Hamiltonian(g),
                    Problem::IndependentSet => Instance::IndependentSet(g, k),
                    Problem::VertexCover => Instance::VertexCover(g, k),
                    Problem::DominatingSet => Instance::DominatingSet(g, k),
                    _ => unreachable!("handled above"),
                };
                out.push((label(mask), inst));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params() {
        let p = parse_params("n=2, m=1").unwrap();
        assert_eq!(p["n"], 2);
        assert_eq!(p["m"], 1);
        assert!(parse_params("n").is_err());
    }

    #[test]
    fn enumeration_sizes() {
        let p = parse_params("n=2,m=1").unwrap();
        assert_eq!(enumerate(Problem::SubsetSum, &p, 1).unwrap().len(), 256);
        let p = parse_params("n=1").unwrap();
        assert_eq!(enumerate(Problem::Hamiltonian, &p, 1).unwrap().len(), 16);
        assert_eq!(enumerate(Problem::SubgraphIso, &p, 1).unwrap().len(), 256);
        assert!(enumerate(Problem::Hamiltonian, &parse_params("n=2").unwrap(), 1).is_err());
    }
}
