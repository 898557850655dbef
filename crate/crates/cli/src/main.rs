use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mhrev_cli::chain::{parse_inline, read_distribution};
use mhrev_cli::{
    cmd_bd_sst, cmd_compare, cmd_info, cmd_mis, cmd_project, cmd_reversiblize, cmd_suite, Battery,
    ChainFile, CliError, Kind,
};
use mhrev_core::{ProbabilityDistribution, TargetSet, Tolerances};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "mhrev", version, about = "Metropolis-Hastings reversiblizations of Markov generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct TargetArg {
    /// Target law: inline (`0.5,0.5`), a JSON array file, or a chain file with `target`.
    #[arg(long)]
    target: Option<String>,
}

impl TargetArg {
    fn load(&self) -> Result<Option<ProbabilityDistribution>, CliError> {
        self.target.as_deref().map(read_distribution).transpose()
    }
}

#[derive(clap::Args)]
struct ToleranceArgs {
    #[arg(long, default_value_t = 1e-12)]
    tol_identity: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_order: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a chain file.
    Info { input: PathBuf },
    /// Write M1, M2, the additive reversiblization or a convex combination.
    Reversiblize {
        input: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        /// m1, m2, additive, convex:<alpha>, or convex together with --alpha.
        #[arg(long, default_value = "m1")]
        kind: String,
        #[arg(long)]
        alpha: Option<f64>,
        /// Output file; stdout if absent.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Compare Q, Q*, Qbar, M1 and M2 across all functionals.
    Compare {
        input: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        /// Observable for the asymptotic variance, e.g. `1,-1`; repeatable.
        #[arg(long = "f")]
        observables: Vec<String>,
        /// Occupation law for the rate function, e.g. `1,0`; repeatable.
        #[arg(long = "nu")]
        occupations: Vec<String>,
        /// Hitting set, e.g. `0,2`; repeatable. Defaults to singletons.
        #[arg(long = "hit")]
        hitting_sets: Vec<String>,
        /// Disjoint set pair for capacities, e.g. `0,1:3`; repeatable.
        #[arg(long = "sets")]
        set_pairs: Vec<String>,
        /// State pair for commute times, e.g. `0:2`; repeatable.
        #[arg(long = "commute")]
        commute_pairs: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        lambda_grid: Vec<f64>,
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        tolerances: ToleranceArgs,
    },
    /// Projection distances onto the reversible generators, with a sampling oracle.
    Project {
        input: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, env = "MHREV_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Closed-form spectra for independent-proposal chains.
    Mis {
        /// Proposal law, inline or file.
        #[arg(long)]
        proposal: String,
        /// Target law, inline or file.
        #[arg(long)]
        target: String,
    },
    /// Fastest strong stationary times of M1 and M2 for a birth-death chain.
    BdSst {
        input: PathBuf,
        #[command(flatten)]
        target: TargetArg,
        #[arg(long, value_delimiter = ',', default_value = "0.1,1,10")]
        alpha_grid: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol_order: f64,
    },
    /// Run the comparison over a directory of chain files and random instances.
    Suite {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 8)]
        max_states: usize,
        #[arg(long, env = "MHREV_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tolerances: ToleranceArgs,
    },
}

fn states(arg: &str) -> Result<Vec<usize>, CliError> {
    arg.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("cannot parse state `{s}` in `{arg}`")))
        })
        .collect()
}

fn vector(arg: &str) -> Result<Vec<f64>, CliError> {
    parse_inline(arg.trim()).unwrap_or_else(|| Err(CliError::Usage(format!("expected a list of numbers, got `{arg}`"))))
}

fn split_pair(arg: &str) -> Result<(&str, &str), CliError> {
    arg.split_once(':')
        .ok_or_else(|| CliError::Usage(format!("expected `left:right`, got `{arg}`")))
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("records serialize"));
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Info { input } => {
            print_json(&cmd_info(&ChainFile::read(&input)?)?);
        }
        Command::Reversiblize {
            input,
            target,
            kind,
            alpha,
            output,
        } => {
            let kind = match (kind.as_str(), alpha) {
                ("convex", Some(a)) => Kind::Convex(a),
                ("convex", None) => return Err(CliError::Usage("--kind convex needs --alpha".into())),
                (other, _) => other.parse()?,
            };
            let (file, _) = cmd_reversiblize(&ChainFile::read(&input)?, kind, target.load()?.as_ref())?;
            match output {
                Some(path) => fs::write(&path, file.to_json() + "\n").map_err(|e| CliError::io(&path, e))?,
                None => println!("{}", file.to_json()),
            }
        }
        Command::Compare {
            input,
            target,
            observables,
            occupations,
            hitting_sets,
            set_pairs,
            commute_pairs,
            lambda_grid,
            epsilon,
            format,
            tolerances,
        } => {
            let chain = ChainFile::read(&input)?;
            let n = chain.rates.len();
            let mut battery = Battery::defaults(n);
            battery.observables = observables.iter().map(|s| vector(s)).collect::<Result<_, _>>()?;
            battery.occupations = occupations
                .iter()
                .map(|s| Ok(ProbabilityDistribution::new(vector(s)?)?))
                .collect::<Result<_, CliError>>()?;
            if !hitting_sets.is_empty() {
                battery.hitting_sets = hitting_sets
                    .iter()
                    .map(|s| Ok(TargetSet::new(states(s)?, n)?))
                    .collect::<Result<_, CliError>>()?;
            }
            if !set_pairs.is_empty() {
                battery.set_pairs = set_pairs
                    .iter()
                    .map(|s| {
                        let (a, b) = split_pair(s)?;
                        Ok((TargetSet::new(states(a)?, n)?, TargetSet::new(states(b)?, n)?))
                    })
                    .collect::<Result<_, CliError>>()?;
            }
            if !commute_pairs.is_empty() {
                battery.commute_pairs = commute_pairs
                    .iter()
                    .map(|s| {
                        let (a, b) = split_pair(s)?;
                        let parse = |x: &str| states(x).and_then(|v| match v.as_slice() {
                            [x] => Ok(*x),
                            _ => Err(CliError::Usage(format!("commute pair `{s}` needs single states"))),
                        });
                        Ok((parse(a)?, parse(b)?))
                    })
                    .collect::<Result<_, CliError>>()?;
            }
            battery.lambdas = lambda_grid;
            battery.epsilon = epsilon;
            let tol = Tolerances {
                identity: tolerances.tol_identity,
                order: tolerances.tol_order,
            };
            let report = cmd_compare(&chain, target.load()?.as_ref(), &battery, &tol)?;
            match format {
                Format::Json => print_json(&report),
                Format::Csv => print!("{}", report.to_csv()),
            }
            if report.has_violation() {
                eprintln!("{} ordering clause(s) violated", report.violated);
                return Ok(ExitCode::from(1));
            }
        }
        Command::Project {
            input,
            target,
            samples,
            seed,
        } => {
            let record = cmd_project(&ChainFile::read(&input)?, target.load()?.as_ref(), samples, seed)?;
            print_json(&record);
            if !record.oracle_holds() {
                eprintln!("projection oracle found a closer reversible generator");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Mis { proposal, target } => {
            print_json(&cmd_mis(&read_distribution(&proposal)?, &read_distribution(&target)?)?);
        }
        Command::BdSst {
            input,
            target,
            alpha_grid,
            tol_order,
        } => {
            let record = cmd_bd_sst(&ChainFile::read(&input)?, target.load()?.as_ref(), &alpha_grid, tol_order)?;
            print_json(&record);
            if record.has_violation() {
                eprintln!("strong stationary time ordering violated");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Suite {
            dir,
            random,
            max_states,
            seed,
            tolerances,
        } => {
            let tol = Tolerances {
                identity: tolerances.tol_identity,
                order: tolerances.tol_order,
            };
            let record = cmd_suite(dir.as_deref(), random, max_states, seed, &tol)?;
            print_json(&record);
            for e in record.entries.iter().filter(|e| e.error.is_some()) {
                eprintln!("{}: {}", e.name, e.error.as_deref().unwrap_or_default());
            }
            if record.violated > 0 {
                eprintln!("{} ordering clause(s) violated", record.violated);
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
