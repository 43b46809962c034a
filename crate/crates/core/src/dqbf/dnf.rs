//! Circuit matrix to DNF matrix with the same existentials.

use std::collections::HashSet;

use super::{fresh_name, Dqbf, Lit, Matrix, Var};
use crate::circuit::{GateKind, Ref};
use crate::error::Result;

/// Rewrites a circuit-matrix formula into an equisatisfiable one whose
/// matrix is a DNF.
///
/// Every gate gets a fresh universal `u`, every existential `y` a fresh
/// universal `v`. The matrix becomes
/// `(AND v<->y) AND (AND gate definitions) -> u_out`, written as the DNF of
/// its negated antecedent plus the output literal. Existential literals only
/// occur in the terms `v AND NOT y` and `NOT v AND y`. New universals are
/// ordered after the old ones: all `u`, then all `v`. DNF input is returned
/// unchanged; CNF input is first read as a circuit.
pub fn prop1_dnf_transform(phi: &Dqbf) -> Result<Dqbf> {
    let c = match &phi.matrix {
        Matrix::Dnf(_) => return Ok(phi.clone()),
        Matrix::Cnf(_) => phi.matrix_circuit(),
        Matrix::Circuit(c) => c.clone(),
    };
    let mut names = phi.names.clone();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut universals = phi.universals.clone();

    let gate_u: Vec<Var> = (0..c.gates().len())
        .map(|i| {
            names.push(fresh_name(&format!("u{}", i + 1), &mut taken));
            universals.push(names.len() - 1);
            names.len() - 1
        })
        .collect();
    let mut shadow: Vec<Option<Var>> = vec![None; phi.num_vars()];
    for (i, e) in phi.existentials.iter().enumerate() {
        names.push(fresh_name(&format!("v{}", i + 1), &mut taken));
        universals.push(names.len() - 1);
        shadow[e.var] = Some(names.len() - 1);
    }

    // input bits that are existentials are read through their shadow v
    let lit = |r: Ref| -> Lit {
        match r {
            Ref::Input { group, bit } => {
                let var = c.flat_index(group, bit);
                Lit::pos(shadow[var].unwrap_or(var))
            }
            Ref::Gate(i) => Lit::pos(gate_u[i]),
        }
    };

    let mut terms: Vec<Vec<Lit>> = Vec::new();
    for e in &phi.existentials {
        let v = shadow[e.var].expect("shadow of existential");
        terms.push(vec![Lit::pos(v), Lit::neg(e.var)]);
        terms.push(vec![Lit::neg(v), Lit::pos(e.var)]);
    }
    for (i, gate) in c.gates().iter().enumerate() {
        let u = gate_u[i];
        let ops: Vec<Lit> = gate.operands.iter().map(|&r| lit(r)).collect();
        // DNF of NOT (u <-> gate(ops))
        match gate.kind {
            GateKind::And => {
                for &a in &ops {
                    terms.push(vec![Lit::pos(u), a.negate()]);
                }
                let mut t = vec![Lit::neg(u)];
                t.extend(ops.iter().copied());
                terms.push(t);
            }
            GateKind::Or => {
                for &a in &ops {
                    terms.push(vec![Lit::neg(u), a]);
                }
                let mut t = vec![Lit::pos(u)];
                t.extend(ops.iter().map(|a| a.negate()));
                terms.push(t);
            }
            GateKind::Not => {
                terms.push(vec![Lit::pos(u), ops[0]]);
                terms.push(vec![Lit::neg(u), ops[0].negate()]);
            }
            GateKind::Xor => {
                let (a, b) = (ops[0], ops[1]);
                terms.push(vec![Lit::pos(u), a, b]);
                terms.push(vec![Lit::pos(u), a.negate(), b.negate()]);
                terms.push(vec![Lit::neg(u), a, b.negate()]);
                terms.push(vec![Lit::neg(u), a.negate(), b]);
            }
            GateKind::Const(v) => terms.push(vec![Lit::new(u, !v)]),
        }
    }
    terms.push(vec![lit(c.output())]);
    Dqbf::new(names, universals, phi.existentials.clone(), Matrix::Dnf(terms))
}
