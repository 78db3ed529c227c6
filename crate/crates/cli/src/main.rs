use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::LevelFilter;
use sfq_core::oracle::{exhaustive_search, two_level_propagate};
use sfq_core::propagate::{propagate, to_rotating_frame};
use sfq_core::{Alphabet, PulseSequence, ScoreMode, Scorer, SearchMode};
use sfq_evolve::sweep::{EXIT_SATISFIED, EXIT_UNSATISFIED};
use sfq_evolve::{run_sweep, sci, write_outputs, CliError, LengthRange, SweepConfig, SweepOutcome};

#[derive(Parser)]
#[command(name = "sfq-evolve", version, about = "Search SFQ pulse trains for single-qubit gates")]
struct Cli {
    /// Log every finished search.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search at one qubit frequency.
    Search {
        /// Qubit frequency, GHz.
        #[arg(long)]
        f0: f64,
        #[command(flatten)]
        opts: Opts,
    },
    /// Search every frequency of a grid (the built-in 21-point grid by default).
    Sweep {
        /// Comma-separated qubit frequencies, GHz; may be empty.
        #[arg(long)]
        frequencies: Option<String>,
        #[command(flatten)]
        opts: Opts,
    },
    /// Score a genome file (one '+-0' line or comma-separated integers).
    Score {
        genome: PathBuf,
        #[arg(long)]
        f0: f64,
        #[command(flatten)]
        opts: Opts,
    },
    /// Exhaustive search over short genomes, or a two-level closed-form check
    /// of a genome file.
    Oracle {
        #[arg(long)]
        f0: f64,
        /// Compare the propagator against the closed-form two-level product
        /// for this genome instead of searching.
        #[arg(long)]
        two_level: Option<PathBuf>,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sequence,
    Subsequence,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphabetArg {
    Bipolar,
    Unipolar,
}

#[derive(Args)]
struct Opts {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Genome length (shorthand for a one-element range).
    #[arg(long, conflicts_with = "length_range")]
    length: Option<usize>,
    /// Inclusive genome length range, A..B.
    #[arg(long)]
    length_range: Option<LengthRange>,
    #[arg(long)]
    max_rep: Option<usize>,
    #[arg(long, value_enum)]
    alphabet: Option<AlphabetArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds tried per frequency and length.
    #[arg(long)]
    seeds: Option<u64>,
    /// Concurrent searches.
    #[arg(long)]
    workers: Option<usize>,
    /// Scoring threads inside each search.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value = "sfq-out")]
    out: PathBuf,
    /// Generator frequency, GHz.
    #[arg(long)]
    f_g: Option<f64>,
    #[arg(long)]
    delta_theta: Option<f64>,
    /// Anharmonicity α/2π, GHz.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    /// Target y-rotation angle, rad.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    crossover_prob: Option<f64>,
    #[arg(long)]
    mutation_prob: Option<f64>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    angle_tol: Option<f64>,
    #[arg(long)]
    infid_tol: Option<f64>,
    #[arg(long)]
    angle_threshold: Option<f64>,
    /// Gate duration cap in subsequence mode, ns.
    #[arg(long)]
    max_duration: Option<f64>,
    #[arg(long)]
    seed_phase: Option<f64>,
    #[arg(long)]
    parity_tolerance: Option<f64>,
}

impl Opts {
    fn build(&self) -> Result<SweepConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => SweepConfig::load(path)?,
            None => SweepConfig::default(),
        };
        if let Some(m) = self.mode {
            c.mode = match m {
                ModeArg::Sequence => SearchMode::Sequence,
                ModeArg::Subsequence => SearchMode::Subsequence,
            };
        }
        if let Some(len) = self.length {
            c.lengths = LengthRange::single(len)?;
        }
        if let Some(r) = self.length_range {
            c.lengths = r;
        }
        if let Some(a) = self.alphabet {
            c.ga.alphabet = match a {
                AlphabetArg::Bipolar => Alphabet::Bipolar,
                AlphabetArg::Unipolar => Alphabet::Unipolar,
            };
        }
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { c.$($field).+ = v; })*
            };
        }
        set!(
            max_rep => ga.max_rep,
            seed => ga.rng_seed,
            seeds => seeds_per_point,
            workers => workers,
            threads => ga.threads,
            f_g => generator_ghz,
            delta_theta => delta_theta,
            alpha => anharmonicity_ghz,
            dim => dim,
            theta => theta_target,
            crossover_prob => ga.crossover_prob,
            mutation_prob => ga.mutation_prob,
            iterations => ga.max_iterations,
            angle_tol => ga.angle_tol,
            infid_tol => ga.infid_tol,
            angle_threshold => ga.angle_threshold,
            seed_phase => ga.seed_phase,
            parity_tolerance => ga.parity_tolerance,
        );
        if self.population.is_some() {
            c.ga.population_size = self.population;
        }
        if self.max_duration.is_some() {
            c.ga.max_duration = self.max_duration;
        }
        Ok(c)
    }
}

fn print_outcome(outcome: &SweepOutcome) {
    println!("  N  f0_ghz    length  duration_ns  angle_err  infidelity  ok");
    for r in &outcome.records {
        let length = match r.repetition {
            Some(rep) => format!("{}x{}", rep.subsequence_length, rep.repetitions),
            None => r.sequence_length.to_string(),
        };
        println!(
            "{:>3}  {:<8}  {:>6}  {:>11.2}  {:>9}  {:>10}  {}",
            r.index,
            r.f0,
            length,
            r.duration_ns,
            sci(r.angle_precision),
            sci(r.infidelity),
            if r.satisfied { "yes" } else { "no" }
        );
    }
    println!(
        "{} of {} frequencies within tolerance",
        outcome.satisfied_count(),
        outcome.records.len()
    );
}

fn sweep_and_write(config: &SweepConfig, out: &Path) -> Result<i32, CliError> {
    let outcome = run_sweep(config)?;
    write_outputs(&outcome, out, config.drive()?.tick())?;
    print_outcome(&outcome);
    println!("wrote {}", out.join("results.csv").display());
    Ok(outcome.exit_code())
}

fn parse_frequencies(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Config(format!("'{t}' is not a frequency")))
        })
        .collect()
}

fn read_genome(path: &Path, alphabet: Alphabet) -> Result<PulseSequence, CliError> {
    let text = std::fs::read_to_string(path)?;
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    Ok(if line.contains(',') {
        PulseSequence::parse_csv(line, alphabet)?
    } else {
        PulseSequence::parse_text(line, alphabet)?
    })
}

fn score_mode(config: &SweepConfig) -> Result<ScoreMode, CliError> {
    let ga = config.ga_for(config.lengths.start.max(4), config.ga.rng_seed);
    Ok(ga.score_mode(&config.drive()?)?)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Search { f0, opts } => {
            let mut config = opts.build()?;
            config.frequencies_ghz = vec![f0];
            sweep_and_write(&config, &opts.out)
        }
        Command::Sweep { frequencies, opts } => {
            let mut config = opts.build()?;
            if let Some(list) = frequencies {
                config.frequencies_ghz = parse_frequencies(&list)?;
            }
            sweep_and_write(&config, &opts.out)
        }
        Command::Score { genome, f0, opts } => {
            let config = opts.build()?;
            let seq = read_genome(&genome, config.ga.alphabet)?;
            let scorer = Scorer::new(&config.model(f0)?, &config.drive()?, &config.gate()?)
                .with_order(config.ga.order());
            let (rep, s) = scorer.score(&seq, score_mode(&config)?)?;
            let len = rep * seq.len();
            println!(
                "length {len} ({} x {rep}), duration {:.2} ns, angle error {}, infidelity {}",
                seq.len(),
                scorer.propagator().duration(len),
                sci(s.angle_error),
                sci(s.infidelity)
            );
            Ok(if s.satisfies(config.ga.angle_tol, config.ga.infid_tol) {
                EXIT_SATISFIED
            } else {
                EXIT_UNSATISFIED
            })
        }
        Command::Oracle { f0, two_level, opts } => {
            let config = opts.build()?;
            let drive = config.drive()?;
            if let Some(path) = two_level {
                let model = config.model(f0)?.with_dim(2)?;
                let seq = read_genome(&path, config.ga.alphabet)?;
                let u = propagate(&seq, &model, &drive);
                let v = two_level_propagate(&seq, &model, &drive)?;
                let dev = u.max_abs_diff(&v);
                let angle = sfq_core::fitness::extract_angle(&to_rotating_frame(&u, &model));
                println!("max |U - U_closed| = {}, rotation angle {angle:.9} rad", sci(dev));
                return Ok(if dev < 1e-12 { EXIT_SATISFIED } else { EXIT_UNSATISFIED });
            }
            let scorer = Scorer::new(&config.model(f0)?, &drive, &config.gate()?)
                .with_order(config.ga.order());
            let len = config.lengths.start;
            let report = exhaustive_search(len, config.ga.alphabet, &scorer, score_mode(&config)?)?;
            println!(
                "{} genomes of length {len}; best {} (x{}) angle error {}, infidelity {}",
                report.evaluated,
                report.best_genome,
                report.best_rep,
                sci(report.best_score.angle_error),
                sci(report.best_score.infidelity)
            );
            Ok(
                if report.best_score.satisfies(config.ga.angle_tol, config.ga.infid_tol) {
                    EXIT_SATISFIED
                } else {
                    EXIT_UNSATISFIED
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { LevelFilter::Info } else { LevelFilter::Warn };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sfq-evolve: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
