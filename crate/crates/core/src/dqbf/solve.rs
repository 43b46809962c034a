//! Exact Skolem-table search and a universal-expansion cross-check.

use std::collections::HashMap;

use varisat::{ExtendFormula, Lit as SatLit, Solver, Var as SatVar};

use super::{tseitin, Dqbf, Matrix};
use crate::error::{Error, Result};

/// Default search budget: 2^20 table combinations.
pub const DEFAULT_BUDGET: u64 = 1 << 20;

const MAX_UNIVERSALS: usize = 20;
const MAX_READS: usize = 1 << 24;

/// A total Skolem function for one existential, indexed by the MSB-first
/// number of its dependency values (in declared dependency order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkolemTable {
    pub table: Vec<bool>,
}

impl SkolemTable {
    pub fn new(table: Vec<bool>) -> Self {
        SkolemTable { table }
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        SkolemTable {
            table: vec![value; 1 << arity],
        }
    }

    pub fn get(&self, index: usize) -> bool {
        self.table[index]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Vec<SkolemTable>),
    Unsat,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }
}

/// Precomputed view of which table entry each universal assignment reads.
struct Layout {
    nu: usize,
    /// universal variable positions in the full assignment
    uvars: Vec<usize>,
    /// entry offset per existential
    base: Vec<usize>,
    entries: usize,
}

impl Layout {
    fn new(phi: &Dqbf) -> Result<Self> {
        let nu = phi.universals().len();
        if nu > MAX_UNIVERSALS {
            return Err(Error::Capacity(format!("{nu} universals (limit {MAX_UNIVERSALS})")));
        }
        let mut base = Vec::new();
        let mut entries = 0usize;
        for e in phi.existentials() {
            base.push(entries);
            if e.deps.len() > MAX_UNIVERSALS {
                return Err(Error::Capacity("dependency set too large".into()));
            }
            entries += 1 << e.deps.len();
        }
        Ok(Layout {
            nu,
            uvars: phi.universals().to_vec(),
            base,
            entries,
        })
    }

    /// Index of the dependency tuple of existential `e` under `alpha`.
    fn dep_index(&self, phi: &Dqbf, pos_of: &[usize], e: usize, alpha: usize) -> usize {
        phi.existentials()[e].deps.iter().fold(0, |acc, &d| {
            let bit = (alpha >> (self.nu - 1 - pos_of[d])) & 1;
            (acc << 1) | bit
        })
    }
}

fn universal_positions(phi: &Dqbf) -> Vec<usize> {
    let mut pos = vec![usize::MAX; phi.num_vars()];
    for (i, &u) in phi.universals().iter().enumerate() {
        pos[u] = i;
    }
    pos
}

/// Checks that the tables make the matrix true under every universal
/// assignment.
pub fn check_skolem(phi: &Dqbf, tables: &[SkolemTable]) -> Result<bool> {
    if tables.len() != phi.existentials().len() {
        return Err(Error::InputArity(format!(
            "{} tables for {} existentials",
            tables.len(),
            phi.existentials().len()
        )));
    }
    for (e, t) in phi.existentials().iter().zip(tables) {
        if t.table.len() != 1usize << e.deps.len() {
            return Err(Error::InputArity(format!(
                "table for `{}` has {} entries, expected {}",
                phi.name(e.var),
                t.table.len(),
                1usize << e.deps.len()
            )));
        }
    }
    let layout = Layout::new(phi)?;
    let pos = universal_positions(phi);
    let mut vals = vec![false; phi.num_vars()];
    for alpha in 0..1usize << layout.nu {
        for (i, &u) in layout.uvars.iter().enumerate() {
            vals[u] = (alpha >> (layout.nu - 1 - i)) & 1 == 1;
        }
        for (ei, e) in phi.existentials().iter().enumerate() {
            vals[e.var] = tables[ei].get(layout.dep_index(phi, &pos, ei, alpha));
        }
        if !phi.eval_matrix(&vals) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact decision by search over Skolem table entries.
///
/// Entries are assigned existential by existential, each table in ascending
/// index order, trying 0 before 1, so the first witness found is the
/// lexicographically first one. After each assignment every universal
/// assignment that reads the entry is evaluated three-valued, which prunes
/// refuted prefixes. The search visits at most `2 * budget` nodes, which is
/// enough to exhaust any instance whose table space is at most `budget`;
/// going over returns a capacity error.
pub fn solve_bruteforce(phi: &Dqbf, budget: u64) -> Result<Verdict> {
    let layout = Layout::new(phi)?;
    let ne = phi.existentials().len();
    let reads = (1usize << layout.nu).saturating_mul(ne);
    if reads > MAX_READS {
        return Err(Error::Capacity(format!("{reads} table reads")));
    }
    let pos = universal_positions(phi);
    let n_alpha = 1usize << layout.nu;
    let mut readers: Vec<Vec<u32>> = vec![Vec::new(); layout.entries];
    let mut reads_of: Vec<u32> = Vec::with_capacity(reads);
    for alpha in 0..n_alpha {
        for e in 0..ne {
            let entry = layout.base[e] + layout.dep_index(phi, &pos, e, alpha);
            readers[entry].push(alpha as u32);
            reads_of.push(entry as u32);
        }
    }
    let mut remaining = vec![ne; n_alpha];
    let mut values: Vec<Option<bool>> = vec![None; layout.entries];

    let mut assignment: Vec<Option<bool>> = vec![None; phi.num_vars()];
    let mut scratch = Vec::new();
    let consistent = |alpha: usize,
                      values: &[Option<bool>],
                      remaining: &[usize],
                      assignment: &mut Vec<Option<bool>>,
                      scratch: &mut Vec<Option<bool>>|
     -> bool {
        for (i, &u) in layout.uvars.iter().enumerate() {
            assignment[u] = Some((alpha >> (layout.nu - 1 - i)) & 1 == 1);
        }
        for (e, ex) in phi.existentials().iter().enumerate() {
            assignment[ex.var] = values[reads_of[alpha * ne + e] as usize];
        }
        let v = phi.eval_matrix_partial(assignment, scratch);
        if remaining[alpha] == 0 {
            v == Some(true)
        } else {
            v != Some(false)
        }
    };

    // no existentials: a single pass over the universals decides
    if layout.entries == 0 {
        let ok = (0..n_alpha).all(|a| consistent(a, &values, &remaining, &mut assignment, &mut scratch));
        return Ok(if ok { Verdict::Sat(Vec::new()) } else { Verdict::Unsat });
    }
    // every assignment must at least be possible before anything is fixed
    if !(0..n_alpha).all(|a| consistent(a, &values, &remaining, &mut assignment, &mut scratch)) {
        return Ok(Verdict::Unsat);
    }

    let limit = budget.saturating_mul(2);
    let mut nodes: u64 = 0;
    let mut next = vec![0u8; layout.entries];
    let mut depth = 0usize;
    loop {
        if depth == layout.entries {
            let tables = phi
                .existentials()
                .iter()
                .enumerate()
                .map(|(e, ex)| {
                    let b = layout.base[e];
                    SkolemTable::new(
                        values[b..b + (1 << ex.deps.len())]
                            .iter()
                            .map(|v| v.unwrap_or(false))
                            .collect(),
                    )
                })
                .collect();
            return Ok(Verdict::Sat(tables));
        }
        if next[depth] == 2 {
            next[depth] = 0;
            if depth == 0 {
                return Ok(Verdict::Unsat);
            }
            depth -= 1;
            values[depth] = None;
            for &a in &readers[depth] {
                remaining[a as usize] += 1;
            }
            continue;
        }
        let v = next[depth] == 1;
        next[depth] += 1;
        nodes += 1;
        if nodes > limit {
            return Err(Error::Capacity(format!("search exceeded budget of {budget}")));
        }
        values[depth] = Some(v);
        for &a in &readers[depth] {
            remaining[a as usize] -= 1;
        }
        let ok = readers[depth]
            .iter()
            .all(|&a| consistent(a as usize, &values, &remaining, &mut assignment, &mut scratch));
        if ok {
            depth += 1;
        } else {
            values[depth] = None;
            for &a in &readers[depth] {
                remaining[a as usize] += 1;
            }
        }
    }
}

/// Decides the formula by expanding every universal assignment into a
/// propositional copy of the clause form and calling a CDCL SAT solver.
/// Existential copies are shared between assignments that agree on the
/// dependency set. Limited to 20 universals and 2^24 expanded clauses.
pub fn solve_by_expansion(phi: &Dqbf) -> Result<Verdict> {
    let cnf = tseitin(phi);
    let clauses = match cnf.matrix() {
        Matrix::Cnf(c) => c,
        _ => unreachable!("tseitin returns clause form"),
    };
    let layout = Layout::new(&cnf)?;
    let expanded = (1usize << layout.nu).saturating_mul(clauses.len());
    if expanded > MAX_READS {
        return Err(Error::Capacity(format!("{expanded} expanded clauses")));
    }
    let pos = universal_positions(&cnf);
    let mut ex_index = vec![usize::MAX; cnf.num_vars()];
    for (i, e) in cnf.existentials().iter().enumerate() {
        ex_index[e.var] = i;
    }
    let mut sat_vars: HashMap<(usize, usize), SatVar> = HashMap::new();
    let mut solver = Solver::new();
    let mut clause = Vec::new();
    for alpha in 0..1usize << layout.nu {
        'clauses: for c in clauses {
            clause.clear();
            for l in c {
                if pos[l.var] != usize::MAX {
                    let val = (alpha >> (layout.nu - 1 - pos[l.var])) & 1 == 1;
                    if val == l.positive {
                        continue 'clauses;
                    }
                } else {
                    let e = ex_index[l.var];
                    let key = (e, layout.dep_index(&cnf, &pos, e, alpha));
                    let next = sat_vars.len();
                    let v = *sat_vars.entry(key).or_insert_with(|| SatVar::from_index(next));
                    clause.push(SatLit::from_var(v, l.positive));
                }
            }
            solver.add_clause(&clause);
        }
    }
    let sat = solver
        .solve()
        .map_err(|e| Error::Capacity(format!("sat solver: {e}")))?;
    if !sat {
        return Ok(Verdict::Unsat);
    }
    let model = solver.model().unwrap_or_default();
    let mut value = vec![false; sat_vars.len()];
    for l in model {
        if l.index() < value.len() {
            value[l.index()] = l.is_positive();
        }
    }
    let tables = phi
        .existentials()
        .iter()
        .enumerate()
        .map(|(e, ex)| {
            SkolemTable::new(
                (0..1usize << ex.deps.len())
                    .map(|i| sat_vars.get(&(e, i)).map(|v| value[v.index()]).unwrap_or(false))
                    .collect(),
            )
        })
        .collect();
    Ok(Verdict::Sat(tables))
}
