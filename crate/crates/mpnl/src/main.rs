use clap::{Parser, Subcommand, ValueEnum};
use mpnl::diff::run_diff;
use mpnl::engine::{sat_finite, sat_integer, sat_natural, Budgets, Outcome, Stats, Verdict};
use mpnl::formula::{bounds, parse, translate_finite, translate_natural, ClosureTable, Formula};
use mpnl::fuzz::FuzzSpec;
use mpnl::semantics::{anchored, oracle_sweep, OracleBudget, SweepOutcome};
use mpnl::transform::{GeneratorKind, GeneratorWitness};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mpnlsat", about = "MPNL satisfiability over finite orders, N and Z")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainArg {
    Finite,
    Nat,
    Int,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Rows,
    Oracle,
    Translate,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide satisfiability of FORMULA over the chosen domain
    Check {
        #[arg(long, value_enum)]
        domain: DomainArg,
        #[arg(long, value_enum, default_value = "rows")]
        engine: EngineArg,
        /// Row budget per search phase
        #[arg(long)]
        max_rows: Option<u32>,
        #[arg(long)]
        max_nodes: Option<u64>,
        /// Largest domain size the brute-force oracle sweeps
        #[arg(long, default_value_t = 5)]
        max_domain: u32,
        /// Write the witness JSON here on Sat
        #[arg(long)]
        witness: Option<std::path::PathBuf>,
        /// Write a Graphviz rendering of the witness here on Sat
        #[arg(long)]
        dot: Option<std::path::PathBuf>,
        formula: String,
    },
    /// Print the closure, counting parameters and model bounds of FORMULA
    Closure { formula: String },
    /// Differential run of the engine against the brute-force oracle
    Diff {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Maximum AST size of generated formulas
        #[arg(long, default_value_t = 7)]
        size: u64,
        #[arg(long, default_value_t = 3)]
        max_k: u64,
        /// Also check sat_integer(translate_finite(f)) against the finite verdict
        #[arg(long)]
        translate: bool,
    },
}

fn parse_or_exit(src: &str) -> Result<Formula, ExitCode> {
    parse(src).map_err(|e| {
        eprintln!("parse error: {e}");
        ExitCode::from(3)
    })
}

fn write_or_exit(path: &std::path::Path, data: &str) -> Result<(), ExitCode> {
    std::fs::write(path, data).map_err(|e| {
        eprintln!("cannot write {}: {e}", path.display());
        ExitCode::from(3)
    })
}

fn emit(
    verdict: &Verdict,
    ct: &ClosureTable,
    witness: &Option<std::path::PathBuf>,
    dot: &Option<std::path::PathBuf>,
) -> Result<ExitCode, ExitCode> {
    println!("{}", serde_json::to_string_pretty(&verdict.to_json(ct)).unwrap());
    if let Outcome::Sat(w) = &verdict.outcome {
        if let Some(path) = witness {
            write_or_exit(path, &serde_json::to_string_pretty(&w.to_json(ct)).unwrap())?;
        }
        if let Some(path) = dot {
            write_or_exit(path, &w.structure.to_dot(ct))?;
        }
    }
    Ok(match verdict.outcome {
        Outcome::Sat(_) => ExitCode::SUCCESS,
        Outcome::Unsat => ExitCode::from(1),
        Outcome::Unknown => ExitCode::from(2),
    })
}

fn run_check(
    domain: DomainArg,
    engine: EngineArg,
    budgets: Budgets,
    max_domain: u32,
    witness: &Option<std::path::PathBuf>,
    dot: &Option<std::path::PathBuf>,
    formula: &str,
) -> Result<ExitCode, ExitCode> {
    let f = parse_or_exit(formula)?;
    match engine {
        EngineArg::Rows => {
            let v = match domain {
                DomainArg::Finite => sat_finite(&f, budgets),
                DomainArg::Nat => sat_natural(&f, budgets),
                DomainArg::Int => sat_integer(&f, budgets),
            };
            let ct = ClosureTable::build(&anchored(&f));
            emit(&v, &ct, witness, dot)
        }
        EngineArg::Oracle => {
            if !matches!(domain, DomainArg::Finite) {
                eprintln!("the brute-force oracle only decides the finite domain");
                return Err(ExitCode::from(3));
            }
            let ct = ClosureTable::build(&anchored(&f));
            let sweep = oracle_sweep(&ct, max_domain, OracleBudget::default());
            let outcome = match sweep {
                SweepOutcome::Witness { structure, .. } => Outcome::Sat(GeneratorWitness {
                    structure,
                    kind: GeneratorKind::Finite,
                }),
                SweepOutcome::NoModel => Outcome::Unsat,
                SweepOutcome::Budget => Outcome::Unknown,
            };
            let v = Verdict {
                outcome,
                stats: Stats::default(),
            };
            emit(&v, &ct, witness, dot)
        }
        EngineArg::Translate => {
            let tr = match domain {
                DomainArg::Finite => translate_finite(&f),
                DomainArg::Nat => translate_natural(&f),
                DomainArg::Int => {
                    eprintln!("--engine translate encodes finite/nat problems over Z; use --engine rows for int");
                    return Err(ExitCode::from(3));
                }
            };
            let tr = tr.map_err(|e| {
                eprintln!("translation error: {e}");
                ExitCode::from(3)
            })?;
            let v = sat_integer(&tr, budgets);
            let ct = ClosureTable::build(&anchored(&tr));
            emit(&v, &ct, witness, dot)
        }
    }
}

fn run_closure(formula: &str) -> Result<ExitCode, ExitCode> {
    let f = parse_or_exit(formula)?;
    let core = f.desugar();
    let ct = ClosureTable::build(&core);
    let entries: Vec<String> = (0..ct.num_entries())
        .map(|i| ct.entry_formula(i as u32).to_string())
        .collect();
    let report = json!({
        "formula": core.to_string(),
        "closure": entries,
        "k_values": ct.k_values(),
        "k_phi": ct.k_phi(),
        "p": ct.p_count(),
        "f": ct.f_count(),
        "threshold": ct.threshold(),
        "bounds": bounds(&ct),
    });
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(ExitCode::SUCCESS)
}

fn run_diff_cmd(spec: &FuzzSpec, translate: bool) -> ExitCode {
    let report = run_diff(spec, Budgets::default(), translate);
    println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
    if report.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Check {
            domain,
            engine,
            max_rows,
            max_nodes,
            max_domain,
            witness,
            dot,
            formula,
        } => {
            let mut budgets = Budgets::default();
            if let Some(r) = max_rows {
                budgets.max_rows = r;
            }
            if let Some(n) = max_nodes {
                budgets.max_nodes = n;
            }
            run_check(domain, engine, budgets, max_domain, &witness, &dot, &formula)
        }
        Cmd::Closure { formula } => run_closure(&formula),
        Cmd::Diff {
            seed,
            count,
            size,
            max_k,
            translate,
        } => {
            let spec = FuzzSpec {
                seed,
                count,
                max_size: size,
                max_k,
                ..Default::default()
            };
            Ok(run_diff_cmd(&spec, translate))
        }
    };
    match result {
        Ok(code) | Err(code) => code,
    }
}
