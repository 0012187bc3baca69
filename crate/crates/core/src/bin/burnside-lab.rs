use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use burnside_lab::error::Error;
use burnside_lab::lab::{run_scenario, Report, RunOptions};
use burnside_lab::scenario::{load_scenario, EpsilonSpec, Experiment, OutputFormat, Scenario};

#[derive(Parser)]
#[command(
    name = "burnside-lab",
    version,
    about = "Experiments on groups of area-preserving sphere diffeomorphisms"
)]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for report files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "BURNSIDE_LAB_THREADS")]
    threads: Option<usize>,
    /// Record wall-clock time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RadiusArgs {
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct MetricArgs {
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    radius: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ball sizes and growth exponent.
    Growth {
        #[arg(long)]
        radius: Option<usize>,
    },
    /// Derivative growth per word length.
    Derivs(RadiusArgs),
    /// Second-order norm growth against first-order growth.
    Crgrowth(RadiusArgs),
    /// Lyapunov exponents of the derivative cocycle.
    Lyapunov {
        /// `periodic:<letters>` (comma separated, `name^-1` for inverses) or `random`.
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        /// Start point `x,y,z`.
        #[arg(long)]
        start: Option<String>,
    },
    /// Averaged metric, tail and Lipschitz checks.
    Pesin(MetricArgs),
    /// Quasiconformal dilatation of the generators.
    Qc(MetricArgs),
    /// Pigeonhole recurrence and fixed points.
    Recur {
        #[arg(long)]
        radius: Option<usize>,
        /// Three points `x1,y1,z1,x2,y2,z2,x3,y3,z3`.
        #[arg(long)]
        triple: Option<String>,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Element orders of generators or listed words.
    Order {
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Conjugates of a rotation by shrinking twists.
    Conjfamily {
        /// Descending strengths, comma separated.
        #[arg(long)]
        strengths: Option<String>,
    },
    /// Every experiment the scenario lists.
    Run,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Truncated { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn numbers(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

fn point(text: &str, what: &str) -> Result<[f64; 3], Failure> {
    let v = numbers(text, what)?;
    <[f64; 3]>::try_from(v.as_slice()).map_err(|_| usage(format!("{what} needs three coordinates")))
}

/// Narrows the scenario to one experiment and applies command-line overrides.
fn configure(scenario: &mut Scenario, command: &Command) -> Result<Option<Experiment>, Failure> {
    let o = &mut scenario.options;
    let exp = match command {
        Command::Run => return Ok(None),
        Command::Growth { radius } => {
            o.growth.radius = radius.or(o.growth.radius);
            Experiment::Growth
        }
        Command::Derivs(a) | Command::Crgrowth(a) => {
            let target = if matches!(command, Command::Derivs(_)) {
                &mut o.derivs
            } else {
                &mut o.crgrowth
            };
            target.radius = a.radius.or(target.radius);
            target.budget = a.budget.or(target.budget);
            if matches!(command, Command::Derivs(_)) {
                Experiment::Derivs
            } else {
                Experiment::Crgrowth
            }
        }
        Command::Lyapunov { word, steps, start } => {
            if let Some(w) = word {
                o.lyapunov.word = match w.as_str() {
                    "random" => None,
                    _ => {
                        let letters = w.strip_prefix("periodic:").ok_or_else(|| {
                            usage("--word must be `periodic:<letters>` or `random`")
                        })?;
                        Some(
                            letters
                                .split([',', ' '])
                                .filter(|t| !t.is_empty())
                                .map(str::to_string)
                                .collect(),
                        )
                    }
                };
            }
            if let Some(s) = steps {
                o.lyapunov.steps = *s;
            }
            if let Some(s) = start {
                o.lyapunov.start = point(s, "--start")?;
            }
            Experiment::Lyapunov
        }
        Command::Pesin(a) | Command::Qc(a) => {
            o.pesin.radius = a.radius.or(o.pesin.radius);
            if let Some(e) = a.epsilon {
                scenario.epsilon = EpsilonSpec::One(e);
            }
            if matches!(command, Command::Pesin(_)) {
                Experiment::Pesin
            } else {
                Experiment::Qc
            }
        }
        Command::Recur {
            radius,
            triple,
            kmax,
        } => {
            o.recur.radius = radius.or(o.recur.radius);
            if let Some(k) = kmax {
                o.recur.kmax = *k;
            }
            if let Some(t) = triple {
                let v = numbers(t, "--triple")?;
                if v.len() != 9 {
                    return Err(usage("--triple needs nine numbers"));
                }
                o.recur.triple = Some([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]);
            }
            Experiment::Recur
        }
        Command::Order { kmax } => {
            if let Some(k) = kmax {
                o.order.kmax = *k;
            }
            Experiment::Order
        }
        Command::Conjfamily { strengths } => {
            if let Some(s) = strengths {
                o.conjfamily.strengths = numbers(s, "--strengths")?;
            }
            Experiment::Conjfamily
        }
    };
    scenario.experiments = vec![exp];
    Ok(Some(exp))
}

fn emit(path: Option<PathBuf>, body: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(&p, body).map_err(|e| Failure::from(Error::Io(e))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn output_single(report: &Report, exp: Experiment, cli: &Cli) -> Result<(), Failure> {
    let tables = report.csv_tables();
    let format = match cli.format {
        Some(Format::Csv) if tables.is_empty() => {
            return Err(usage(format!(
                "csv output is not available for `{}`",
                exp.name()
            )));
        }
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Json) => OutputFormat::Json,
        None if tables.is_empty() => OutputFormat::Json,
        None => report.scenario.output_format,
    };
    let block = report
        .block_json(exp)
        .ok_or_else(|| usage(report.errors.get(exp.name()).cloned().unwrap_or_default()))?;
    let name = &report.scenario.name;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::from(Error::Io(e)))?;
    }
    let file = |suffix: String| cli.out.as_ref().map(|d| d.join(format!("{name}-{suffix}")));
    match format {
        OutputFormat::Json => emit(file(format!("{}.json", exp.name())), &block),
        OutputFormat::Csv => {
            for (stem, body) in &tables {
                emit(file(format!("{stem}.csv")), body)?;
            }
            if cli.out.is_some() {
                emit(file(format!("{}.json", exp.name())), &block)?;
            }
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let path = cli
        .scenario
        .as_ref()
        .ok_or_else(|| usage("--scenario <path> is required"))?;
    let mut scenario = load_scenario(path)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let single = configure(&mut scenario, &cli.command)?;
    let report = run_scenario(&scenario, RunOptions { timing: cli.timing })?;
    for (block, message) in &report.errors {
        eprintln!("warning: {block}: {message}");
    }
    match single {
        Some(exp) => output_single(&report, exp, cli)?,
        None => match &cli.out {
            Some(dir) => {
                let format = match cli.format {
                    Some(Format::Csv) => OutputFormat::Csv,
                    Some(Format::Json) => OutputFormat::Json,
                    None => report.scenario.output_format,
                };
                for p in report.write_to(dir, format)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            None => print!("{}", report.to_json()),
        },
    }
    if report.truncated {
        return Err(Failure {
            code: 3,
            message: format!(
                "word ball truncated at the element cap of {}",
                scenario.element_cap
            ),
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
