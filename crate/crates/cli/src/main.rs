use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use basecheck::committee::{self, CommitteeConfig, Variant};
use basecheck::dynamics::reduce_dynamics;
use basecheck::parser::parse_formula;
use basecheck::qbf::{closed_sentence, qdimacs::export_qdimacs};
use basecheck::semantics::{check_direct, CheckError, DEFAULT_ENUMERATION_CAP};
use basecheck::symbolic::{check_symbolic, Limits, Outcome, Stats, Verdict};
use basecheck::ProblemInstance;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "basecheck", version, about = "Model checker for only believing over belief bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the query of an instance (or `--formula`) at its actual state.
    Check {
        #[arg(long)]
        model: PathBuf,
        /// Formula text, or a file containing it. Replaces the model's query.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, value_enum, default_value_t = Engine::Auto)]
        engine: Engine,
        /// Seconds.
        #[arg(long, default_value_t = 600)]
        timeout: u64,
        #[arg(long, default_value_t = 50_000_000)]
        max_nodes: usize,
        #[arg(long, value_enum)]
        stats: Option<StatsFormat>,
    },
    /// Run the committee family and write one CSV row per size.
    BenchCommittee {
        #[arg(long, value_enum, default_value_t = VariantArg::First)]
        variant: VariantArg,
        #[arg(long, default_value_t = 3)]
        min: u32,
        #[arg(long, default_value_t = 10)]
        max: u32,
        /// Seconds per instance.
        #[arg(long, default_value_t = 600)]
        timeout: u64,
        #[arg(long, default_value_t = 50_000_000)]
        max_nodes: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the closed QBF of an instance.
    Translate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Qdimacs)]
        format: Format,
    },
    /// Print a committee instance as JSON.
    Committee {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = VariantArg::First)]
        variant: VariantArg,
        #[arg(long, value_enum)]
        query: Option<QueryArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Bdd,
    Enumerate,
    /// Enumeration when the context is small enough, BDDs otherwise.
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Qdimacs,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    First,
    Second,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::First => Variant::First,
            VariantArg::Second => Variant::Second,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum QueryArg {
    Phi0,
    HigherOrder,
    Chi0,
    Dynamic,
}

#[derive(Serialize)]
struct Row {
    n: u32,
    atom_count: usize,
    ratoms: usize,
    state_exponent: usize,
    verdict: Verdict,
    wall_ms: u128,
    peak_nodes: usize,
}

const EXIT_INPUT: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn run(cli: Cli) -> Res<u8> {
    match cli.command {
        Command::Check { model, formula, engine, timeout, max_nodes, stats } => {
            let inst = load(&model, formula.as_deref())?;
            let limits = Limits { max_nodes, timeout: Duration::from_secs(timeout) };
            let out = decide(&inst, engine, &limits)?;
            println!("{}", out.verdict);
            if let Some(r) = &out.reason {
                eprintln!("{r}");
            }
            match stats {
                Some(StatsFormat::Json) => println!("{}", serde_json::to_string(&out.stats)?),
                Some(StatsFormat::Text) => print_stats(&out.stats),
                None => {}
            }
            Ok(match out.verdict {
                Verdict::True => 0,
                Verdict::False => 1,
                Verdict::Ko => 2,
            })
        }
        Command::BenchCommittee { variant, min, max, timeout, max_nodes, csv } => {
            let sink: Box<dyn Write> = match csv {
                Some(p) => Box::new(fs::File::create(p)?),
                None => Box::new(io::stdout()),
            };
            let mut w = csv::Writer::from_writer(sink);
            let limits = Limits { max_nodes, timeout: Duration::from_secs(timeout) };
            for n in min..=max {
                let inst = committee::instance(&CommitteeConfig::benchmark(n), variant.into())?;
                let out = check_symbolic(&inst, &limits)?;
                let s = out.stats;
                w.serialize(Row {
                    n,
                    atom_count: s.atom_count,
                    ratoms: s.ratoms,
                    state_exponent: s.state_exponent,
                    verdict: out.verdict,
                    wall_ms: s.wall_ms,
                    peak_nodes: s.peak_nodes,
                })?;
                w.flush()?;
            }
            Ok(0)
        }
        Command::Translate { model, formula, format: Format::Qdimacs } => {
            let inst = load(&model, formula.as_deref())?.normalized();
            let phi = reduce_dynamics(&inst.query);
            let sentence = closed_sentence(&inst.with_query(phi))?;
            print!("{}", export_qdimacs(&sentence)?);
            Ok(0)
        }
        Command::Committee { n, variant, query } => {
            let cfg = CommitteeConfig::benchmark(n);
            let inst = match query {
                None => committee::instance(&cfg, variant.into())?,
                Some(q) => {
                    let qs = committee::queries(&cfg)?;
                    let phi = match q {
                        QueryArg::Phi0 => qs.phi0,
                        QueryArg::HigherOrder => qs.higher_order,
                        QueryArg::Chi0 => qs.chi0,
                        QueryArg::Dynamic => qs.dynamic,
                    };
                    committee::instance_with_query(&cfg, variant.into(), phi)?
                }
            };
            println!("{}", inst.to_json());
            Ok(0)
        }
    }
}

fn load(model: &Path, formula: Option<&str>) -> Res<ProblemInstance> {
    let inst = ProblemInstance::from_json(&fs::read_to_string(model)?)?;
    let Some(text) = formula else { return Ok(inst) };
    let text = match fs::read_to_string(text) {
        Ok(s) if Path::new(text).is_file() => s,
        _ => text.to_string(),
    };
    let inst = inst.with_query(parse_formula(text.trim())?);
    inst.validate()?;
    Ok(inst)
}

fn decide(inst: &ProblemInstance, engine: Engine, limits: &Limits) -> Res<Outcome> {
    let norm = inst.normalized();
    let ctx = norm.context().covering(&norm.initial_state, &norm.query);
    let enumerate = match engine {
        Engine::Bdd => false,
        Engine::Enumerate => true,
        Engine::Auto => ctx.bits() <= DEFAULT_ENUMERATION_CAP,
    };
    if !enumerate {
        return Ok(check_symbolic(inst, limits)?);
    }
    let started = Instant::now();
    let mut stats = Stats {
        atom_count: inst.atoms.len(),
        ratoms: basecheck::metrics::ratoms(&inst.vocab, &inst.query),
        state_exponent: basecheck::metrics::state_count_exponent(&inst.vocab, &inst.query, &inst.atoms, &inst.agents),
        ..Stats::default()
    };
    let result = check_direct(&norm.initial_state, &ctx, &norm.query);
    stats.wall_ms = started.elapsed().as_millis();
    match result {
        Ok(b) => Ok(Outcome { verdict: b.into(), reason: None, stats }),
        Err(e @ CheckError::CapExceeded { .. }) => {
            Ok(Outcome { verdict: Verdict::Ko, reason: Some(e.to_string()), stats })
        }
        Err(e) => Err(e.into()),
    }
}

fn print_stats(s: &Stats) {
    println!("atom_count: {}", s.atom_count);
    println!("ratoms: {}", s.ratoms);
    println!("state_exponent: {}", s.state_exponent);
    println!("peak_nodes: {}", s.peak_nodes);
    println!("wall_ms: {}", s.wall_ms);
}
