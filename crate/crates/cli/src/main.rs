//! Command-line front end: reduce succinct instances to DQBF or first-order
//! sentences, solve the results exhaustively and cross-check against the
//! explicit oracles.
//!
//! Exit codes: 0 success, 1 `check` found a disagreement, 2 malformed input,
//! 3 unsupported parameter or budget exceeded, 10 SAT, 20 UNSAT.

mod manifest;
mod suite;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nexp2dqbf::circuit::{bit_string, emit_circuit, parse_circuit};
use nexp2dqbf::dqbf::esb::{dqbf_to_esb, esb_to_dqbf};
use nexp2dqbf::dqbf::{
    parse_dqdimacs, solve_bruteforce, solve_by_expansion, to_dqdimacs, tseitin, Dqbf, Matrix, Verdict, DEFAULT_BUDGET,
};
use nexp2dqbf::folog::{
    algorithm2, bounded_sat_bruteforce, bsatfo_to_esb, emit_formula, esb_to_bsr, parse_formula, skolemize, Formula,
    Signature,
};
use nexp2dqbf::oracle::{agreement_search, expand_graph, oracle_check, subset_sum_numbers, Answer, Witness};
use nexp2dqbf::reductions::{agreement_from_skolem, Instance, Problem, ProjectionCircuit};
use nexp2dqbf::Error;

use manifest::Manifest;

const EXIT_DISAGREE: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn at(path: &Path, e: Error) -> Self {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            code: EXIT_MALFORMED,
            message: format!("{}: {e}", path.display()),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_MALFORMED,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity(_) | Error::Unsupported(_) | Error::InvalidParameter(_) => EXIT_UNSUPPORTED,
            _ => EXIT_MALFORMED,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(
    name = "nexp2dqbf",
    version,
    about = "Succinct problems to DQBF and first-order logic, with exhaustive checkers"
)]
struct Cli {
    /// Search budget for the exhaustive solvers
    #[arg(long, global = true, env = "NEXP2DQBF_BUDGET", default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Target {
    Dqdimacs,
    /// Two-variable sentence over unary profile predicates
    Fo21,
    /// Bernays-Schoenfinkel-Ramsey sentence
    Bsr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Dqdimacs,
    Circuit,
    Fo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Solver {
    /// Universal expansion when it fits, budgeted brute force otherwise
    Auto,
    Brute,
    Expand,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce an instance manifest to DQDIMACS or a first-order sentence
    Reduce {
        /// Problem tag, checked against the manifest
        #[arg(long)]
        problem: Option<String>,
        /// Instance manifest
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Dqdimacs)]
        target: Target,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide a DQDIMACS file, sentence, projection circuit or manifest
    Solve {
        /// DQDIMACS, `.fo` sentence, `.circuit` projection or manifest
        input: PathBuf,
        /// Problem tag, checked against the manifest
        #[arg(long)]
        problem: Option<String>,
        /// Domain bound for sentences
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long, value_enum, default_value_t = Solver::Auto)]
        solver: Solver,
        /// Write the witness here when satisfiable
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Compare the oracle with reduce-then-solve
    Check {
        /// Check one manifest instead of the built-in fixtures
        #[arg(long)]
        input: Option<PathBuf>,
        /// Restrict the fixtures, or choose the family to enumerate
        #[arg(long)]
        problem: Option<String>,
        /// Enumerate all instances of a shape, e.g. `n=2,m=1`
        #[arg(long)]
        enumerate: Option<String>,
        /// Size parameter for enumerated graph and set problems
        #[arg(long, default_value_t = 1)]
        k: u64,
        /// Replace every reduction by a trivially true formula
        #[arg(long, hide = true)]
        mutate: bool,
    },
    /// Write the explicit object a manifest describes
    Expand {
        /// Instance manifest
        input: PathBuf,
        /// Problem tag, checked against the manifest
        #[arg(long)]
        problem: Option<String>,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert between circuit, DQDIMACS and sentence files
    Convert {
        /// Circuit, DQDIMACS, sentence or manifest file
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Format,
        /// Domain bound when converting a sentence to DQDIMACS
        #[arg(long)]
        bound: Option<u64>,
        /// Problem tag, checked against the manifest
        #[arg(long)]
        problem: Option<String>,
        /// Output file; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Dqdimacs,
    Circuit,
    Fo,
    Manifest,
}

fn kind_of(path: &Path, text: &str) -> Kind {
    match path.extension().and_then(|e| e.to_str()) {
        Some("dqdimacs" | "qdimacs" | "cnf") => return Kind::Dqdimacs,
        Some("circuit") => return Kind::Circuit,
        Some("fo" | "sexp") => return Kind::Fo,
        Some("manifest") => return Kind::Manifest,
        _ => {}
    }
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with(';'))
        .unwrap_or("");
    if first.starts_with("p ") || first.starts_with("c ") || first == "c" {
        Kind::Dqdimacs
    } else if first.starts_with('(') {
        Kind::Fo
    } else if first.starts_with("circuit") {
        Kind::Circuit
    } else {
        Kind::Manifest
    }
}

fn problem_arg(tag: &Option<String>) -> Result<Option<Problem>, Failure> {
    match tag {
        None => Ok(None),
        Some(t) => Problem::from_tag(t)
            .map(Some)
            .ok_or_else(|| Failure::usage(format!("unknown problem `{t}`"))),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn solve_dqbf(phi: &Dqbf, budget: u64, solver: Solver) -> Result<Verdict, Error> {
    match solver {
        Solver::Brute => solve_bruteforce(phi, budget),
        Solver::Expand => solve_by_expansion(phi),
        Solver::Auto => match solve_by_expansion(phi) {
            Err(e) if e.is_capacity() => solve_bruteforce(phi, budget).map_err(|x| match x {
                Error::Capacity(m) => Error::Capacity(format!("{m}; expansion: {e}")),
                other => other,
            }),
            other => other,
        },
    }
}

fn skolem_text(phi: &Dqbf, verdict: &Verdict) -> String {
    let mut out = String::new();
    if let Verdict::Sat(tables) = verdict {
        for (e, t) in phi.existentials().iter().zip(tables) {
            out.push_str(&format!("{} {}\n", phi.name(e.var), bit_string(&t.table)));
        }
    }
    out
}

fn signature_line(f: &Formula) -> Result<String, Failure> {
    let sig = Signature::of(f)?;
    let preds: Vec<String> = sig.predicates.iter().map(|(p, a)| format!("{p}/{a}")).collect();
    Ok(format!("predicates {}", preds.join(" ")))
}

fn load_instance(input: &Path, problem: &Option<String>) -> Result<Instance, Failure> {
    Manifest::load(input)?.instance(problem_arg(problem)?)
}

fn cmd_reduce(problem: &Option<String>, input: &Path, target: Target, out: &Option<PathBuf>) -> Result<u8, Failure> {
    let inst = load_instance(input, problem)?;
    let (text, summary) = match target {
        Target::Dqdimacs => {
            let phi = inst.to_dqbf()?;
            let clauses = match tseitin(&phi).matrix() {
                Matrix::Cnf(c) => c.len(),
                _ => unreachable!("clause form"),
            };
            let summary = format!(
                "universals {}, existentials {}, clauses {}",
                phi.universals().len(),
                phi.existentials().len(),
                clauses
            );
            (to_dqdimacs(&phi), summary)
        }
        Target::Fo21 => {
            let f = algorithm2(&inst.project()?);
            let summary = signature_line(&f)?;
            (emit_formula(&f), summary)
        }
        Target::Bsr => {
            let f = esb_to_bsr(&dqbf_to_esb(&inst.to_dqbf()?))?;
            let summary = signature_line(&f)?;
            (emit_formula(&f), summary)
        }
    };
    write_output(out, &ensure_newline(text))?;
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(0)
}

fn verdict_code(sat: bool) -> u8 {
    println!("{}", if sat { "SAT" } else { "UNSAT" });
    if sat {
        EXIT_SAT
    } else {
        EXIT_UNSAT
    }
}

fn agreement_witness(d: &ProjectionCircuit, g: &[u64]) -> String {
    Witness::Agreement {
        point_bits: d.point_width(),
        value_bits: d.value_width(),
        table: g.to_vec(),
    }
    .to_string()
}

fn cmd_solve(
    input: &Path,
    problem: &Option<String>,
    bound: Option<usize>,
    solver: Solver,
    witness: &Option<PathBuf>,
    budget: u64,
) -> Result<u8, Failure> {
    let text = manifest::read(input)?;
    let (sat, wit) = match kind_of(input, &text) {
        Kind::Dqdimacs => {
            let phi = parse_dqdimacs(&text).map_err(|e| Failure::at(input, e))?;
            let v = solve_dqbf(&phi, budget, solver)?;
            (v.is_sat(), skolem_text(&phi, &v))
        }
        Kind::Fo => {
            let phi = parse_formula(&text).map_err(|e| Failure::at(input, e))?;
            let bound = bound.ok_or_else(|| Failure::usage("solving a sentence needs --bound"))?;
            match bounded_sat_bruteforce(&phi, bound, budget)? {
                Some(s) => (true, s.to_string()),
                None => (false, String::new()),
            }
        }
        Kind::Circuit => {
            let c = parse_circuit(&text).map_err(|e| Failure::at(input, e))?;
            let d = ProjectionCircuit::new(c)?;
            match agreement_search(&d, budget)? {
                Some(g) => (true, agreement_witness(&d, &g)),
                None => (false, String::new()),
            }
        }
        Kind::Manifest => {
            let inst = load_instance(input, problem)?;
            match inst.project() {
                Ok(d) => match agreement_search(&d, budget)? {
                    Some(g) => (true, agreement_witness(&d, &g)),
                    None => (false, String::new()),
                },
                Err(Error::Unsupported(_)) => {
                    let phi = inst.to_dqbf()?;
                    let v = solve_dqbf(&phi, budget, solver)?;
                    (v.is_sat(), skolem_text(&phi, &v))
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    if let (true, Some(path)) = (sat, witness) {
        fs::write(path, ensure_newline(wit)).map_err(|e| Failure::io(path, e))?;
    }
    Ok(verdict_code(sat))
}

struct Outcome {
    label: String,
    oracle: Answer,
    verdict: Verdict,
    projection: Option<ProjectionCircuit>,
}

impl Outcome {
    fn agrees(&self) -> bool {
        self.oracle.is_yes() == self.verdict.is_sat()
    }
}

fn trivially_true(phi: &Dqbf) -> Dqbf {
    Dqbf::new(
        phi.names().to_vec(),
        phi.universals().to_vec(),
        phi.existentials().to_vec(),
        Matrix::Cnf(Vec::new()),
    )
    .expect("same prefix")
}

fn check_one(label: &str, inst: &Instance, budget: u64, mutate: bool) -> Result<Outcome, Failure> {
    let at = |e: Error| Failure {
        code: Failure::from(e.clone()).code,
        message: format!("{label}: {e}"),
    };
    let oracle = oracle_check(inst).map_err(at)?;
    let mut phi = inst.to_dqbf().map_err(at)?;
    if mutate {
        phi = trivially_true(&phi);
    }
    let verdict = solve_dqbf(&phi, budget, Solver::Auto).map_err(at)?;
    Ok(Outcome {
        label: label.to_string(),
        oracle,
        verdict,
        projection: inst.project().ok(),
    })
}

/// Runs `f` over `items` on all cores; results keep the input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}

fn cmd_check(
    input: &Option<PathBuf>,
    problem: &Option<String>,
    enumerate: &Option<String>,
    k: u64,
    mutate: bool,
    budget: u64,
) -> Result<u8, Failure> {
    let suite = match (input, enumerate) {
        (Some(_), Some(_)) => return Err(Failure::usage("--input and --enumerate are exclusive")),
        (Some(path), None) => vec![(path.display().to_string(), load_instance(path, problem)?)],
        (None, Some(spec)) => {
            let p = problem_arg(problem)?.ok_or_else(|| Failure::usage("--enumerate needs --problem"))?;
            suite::enumerate(p, &suite::parse_params(spec)?, k)?
        }
        (None, None) => {
            let only = problem_arg(problem)?;
            suite::builtins()
                .into_iter()
                .filter(|(_, i)| only.is_none_or(|p| i.problem() == p))
                .collect()
        }
    };
    let results = parallel_map(&suite, |(label, inst)| check_one(label, inst, budget, mutate));
    let mut disagreements = 0;
    for r in results {
        let o = r?;
        let oracle = if o.oracle.is_yes() { "yes" } else { "no" };
        let reduced = if o.verdict.is_sat() { "SAT" } else { "UNSAT" };
        if o.agrees() {
            println!("agree {}: oracle {oracle}, reduction {reduced}", o.label);
            continue;
        }
        disagreements += 1;
        println!("DISAGREE {}: oracle {oracle}, reduction {reduced}", o.label);
        if let Answer::Yes(w) = &o.oracle {
            println!("  oracle witness: {w}");
        }
        if let Verdict::Sat(tables) = &o.verdict {
            match o.projection.as_ref().map(|d| (d, agreement_from_skolem(d, tables))) {
                Some((d, Ok(g))) => println!("  reduction witness: {}", agreement_witness(d, &g)),
                _ => {
                    let bits: Vec<String> = tables.iter().map(|t| bit_string(&t.table)).collect();
                    println!("  reduction witness: skolem {}", bits.join(" "));
                }
            }
        }
    }
    if disagreements == 0 {
        println!("all {} instances agree", suite.len());
        Ok(0)
    } else {
        println!("{disagreements} of {} instances disagree", suite.len());
        Ok(EXIT_DISAGREE)
    }
}

fn bits(v: u64, w: usize) -> String {
    bit_string(&nexp2dqbf::circuit::to_bits(v, w))
}

fn expand_text(inst: &Instance) -> Result<String, Failure> {
    let graph = |g: &nexp2dqbf::reductions::SuccinctGraph, tag: &str| -> Result<String, Failure> {
        let e = expand_graph(g)?;
        let n = e.vertex_count();
        let mut s = format!("{tag}vertices {n}\n");
        for u in 0..n {
            for v in 0..n {
                if e.has(u, v) {
                    s.push_str(&format!(
                        "{tag}edge {} {}\n",
                        bits(u as u64, e.vertex_bits),
                        bits(v as u64, e.vertex_bits)
                    ));
                }
            }
        }
        Ok(s)
    };
    const MAX_LIST_BITS: usize = 12;
    let limit = |bits: usize| -> Result<(), Failure> {
        if bits > MAX_LIST_BITS {
            Err(Error::Capacity(format!("listing 2^{bits} entries")).into())
        } else {
            Ok(())
        }
    };
    Ok(match inst {
        Instance::ThreeCol(g) | Instance::Hamiltonian(g) => graph(g, "")?,
        Instance::IndependentSet(g, k) | Instance::VertexCover(g, k) | Instance::DominatingSet(g, k) => {
            format!("{}k {k}\n", graph(g, "")?)
        }
        Instance::SubgraphIso(g1, g2) => format!("{}{}", graph(g1, "pattern ")?, graph(g2, "host ")?),
        Instance::SetPacking(s) => {
            limit(s.element_bits + s.name_bits)?;
            let mut out = String::new();
            for b in 0..1u64 << s.name_bits {
                let members: Vec<String> = (0..1u64 << s.element_bits)
                    .filter(|&e| s.contains(b, e))
                    .map(|e| bits(e, s.element_bits))
                    .collect();
                out.push_str(&format!("set {} {{{}}}\n", bits(b, s.name_bits), members.join(" ")));
            }
            out.push_str(&format!("k {}\n", s.k));
            out
        }
        Instance::SubsetSum(s) => {
            let (numbers, target) = subset_sum_numbers(s)?;
            let list: Vec<String> = numbers.iter().map(u64::to_string).collect();
            format!("numbers {}\ntarget {target}\n", list.join(" "))
        }
        Instance::Sat(f) => {
            limit(1 + f.var_bits() + f.clause_bits())?;
            let mut out = format!("variables {}\n", 1u64 << f.var_bits());
            for c in 0..1u64 << f.clause_bits() {
                let mut lits = Vec::new();
                for v in 0..1u64 << f.var_bits() {
                    if f.contains(false, v, c) {
                        lits.push(format!("x{v}"));
                    }
                    if f.contains(true, v, c) {
                        lits.push(format!("-x{v}"));
                    }
                }
                out.push_str(&format!("clause {c}: {}\n", lits.join(" ")));
            }
            out
        }
        Instance::Ntm(i) => {
            let m = &i.machine;
            let word = m.encode_word(&i.word)?;
            limit(i.t)?;
            let mut row = Vec::new();
            for cell in 0..1usize << i.t {
                let code = match cell {
                    0 => m.head_code(m.initial, word.first().copied().unwrap_or(m.blank)),
                    c if c < word.len() => m.plain_code(word[c]),
                    _ => m.plain_code(m.blank),
                };
                row.push(bits(code, m.cell_bits()));
            }
            format!(
                "machine {}\ncell codes {} ({} bits)\ntableau {}x{}\nrow 0: {}\n",
                m.name,
                m.delta_size(),
                m.cell_bits(),
                1u64 << i.t,
                1u64 << i.t,
                row.join(" ")
            )
        }
    })
}

fn cmd_expand(input: &Path, problem: &Option<String>, out: &Option<PathBuf>) -> Result<u8, Failure> {
    let inst = load_instance(input, problem)?;
    write_output(out, &expand_text(&inst)?)?;
    Ok(0)
}

fn cmd_convert(
    input: &Path,
    to: Format,
    bound: Option<u64>,
    problem: &Option<String>,
    out: &Option<PathBuf>,
) -> Result<u8, Failure> {
    let text = manifest::read(input)?;
    let unsupported = |from: &str| -> Failure {
        Error::Unsupported(format!("no conversion from {from} to {to:?}").to_lowercase()).into()
    };
    let result = match kind_of(input, &text) {
        Kind::Circuit => {
            let c = parse_circuit(&text).map_err(|e| Failure::at(input, e))?;
            match to {
                Format::Circuit => emit_circuit(&c),
                Format::Dqdimacs => to_dqdimacs(&nexp2dqbf::reductions::algorithm1(&ProjectionCircuit::new(c)?)),
                Format::Fo => emit_formula(&algorithm2(&ProjectionCircuit::new(c)?)),
            }
        }
        Kind::Dqdimacs => {
            let phi = parse_dqdimacs(&text).map_err(|e| Failure::at(input, e))?;
            match to {
                Format::Dqdimacs => to_dqdimacs(&phi),
                Format::Circuit => emit_circuit(&phi.matrix_circuit()),
                Format::Fo => emit_formula(&esb_to_bsr(&dqbf_to_esb(&phi))?),
            }
        }
        Kind::Fo => {
            let phi = parse_formula(&text).map_err(|e| Failure::at(input, e))?;
            match to {
                Format::Fo => emit_formula(&phi),
                Format::Dqdimacs => {
                    let n = bound.ok_or_else(|| Failure::usage("converting a sentence to DQDIMACS needs --bound"))?;
                    to_dqdimacs(&esb_to_dqbf(&bsatfo_to_esb(&skolemize(&phi)?, n)?)?)
                }
                Format::Circuit => return Err(unsupported("sentence")),
            }
        }
        Kind::Manifest => {
            let inst = load_instance(input, problem)?;
            match to {
                Format::Dqdimacs => to_dqdimacs(&inst.to_dqbf()?),
                Format::Circuit => emit_circuit(inst.project()?.circuit()),
                Format::Fo => emit_formula(&algorithm2(&inst.project()?)),
            }
        }
    };
    write_output(out, &ensure_newline(result))?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let budget = cli.budget;
    match &cli.command {
        Command::Reduce {
            problem,
            input,
            target,
            out,
        } => cmd_reduce(problem, input, *target, out),
        Command::Solve {
            input,
            problem,
            bound,
            solver,
            witness,
        } => cmd_solve(input, problem, *bound, *solver, witness, budget),
        Command::Check {
            input,
            problem,
            enumerate,
            k,
            mutate,
        } => cmd_check(input, problem, enumerate, *k, *mutate, budget),
        Command::Expand { input, problem, out } => cmd_expand(input, problem, out),
        Command::Convert {
            input,
            to,
            bound,
            problem,
            out,
        } => cmd_convert(input, *to, *bound, problem, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
