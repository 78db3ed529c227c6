//! Runs many independent searches and condenses them into one record per
//! frequency.
//!
//! Sequence mode keeps, per frequency, the lowest-infidelity result among
//! those meeting the angle tolerance (falling back to the best under the
//! score ordering). Subsequence mode walks lengths upwards and stops at the
//! shortest genome that meets both tolerances.

use std::cmp::Ordering;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use sfq_core::{evolve, FitnessOrder, GaResult, SearchMode};

use crate::config::SweepConfig;
use crate::error::CliError;
use crate::plot;
use crate::record::{sci, write_csv, ReportKind, Repetition, RunRecord};

/// Environment variable capping scoring threads inside each search.
pub const THREADS_ENV: &str = "SFQ_EVOLVE_THREADS";

pub const EXIT_SATISFIED: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_UNSATISFIED: i32 = 2;

/// `requested`, lowered to the value of [`THREADS_ENV`] when that is set to a
/// positive integer.
pub fn scoring_threads(requested: usize) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0);
    match cap {
        Some(c) => requested.min(c).max(1),
        None => requested.max(1),
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub kind: ReportKind,
    pub records: Vec<RunRecord>,
}

impl SweepOutcome {
    pub fn all_satisfied(&self) -> bool {
        self.records.iter().all(|r| r.satisfied)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_satisfied() {
            EXIT_SATISFIED
        } else {
            EXIT_UNSATISFIED
        }
    }

    pub fn satisfied_count(&self) -> usize {
        self.records.iter().filter(|r| r.satisfied).count()
    }
}

struct Candidate {
    freq: usize,
    len: usize,
    seed: u64,
    result: GaResult,
}

fn search(config: &SweepConfig, freq: usize, len: usize, seed: u64) -> Result<Candidate, CliError> {
    let f0 = config.frequencies_ghz[freq];
    let mut ga = config.ga_for(len, seed);
    ga.threads = scoring_threads(ga.threads);
    let result = evolve(&ga, &config.model(f0)?, &config.drive()?, &config.gate()?)?;
    let s = result.best.fitness();
    info!(
        "f0 = {f0} GHz, L = {len}, seed {seed}: angle {} infidelity {} after {} generations",
        sci(s.angle_error),
        sci(s.infidelity),
        result.generations_run
    );
    Ok(Candidate {
        freq,
        len,
        seed,
        result,
    })
}

fn satisfies(config: &SweepConfig, c: &Candidate) -> bool {
    c.result
        .best
        .fitness()
        .satisfies(config.ga.angle_tol, config.ga.infid_tol)
}

/// Index of the first candidate in `idx` that is minimal under `cmp`.
fn first_min(
    cands: &[Candidate],
    idx: impl Iterator<Item = usize>,
    cmp: impl Fn(&Candidate, &Candidate) -> Ordering,
) -> Option<usize> {
    idx.fold(None, |best, i| match best {
        Some(b) if cmp(&cands[i], &cands[b]) != Ordering::Less => Some(b),
        _ => Some(i),
    })
}

fn by_score(order: &FitnessOrder) -> impl Fn(&Candidate, &Candidate) -> Ordering + '_ {
    move |a, b| order.compare(a.result.best.fitness(), b.result.best.fitness())
}

fn to_record(config: &SweepConfig, c: &Candidate) -> Result<RunRecord, CliError> {
    let drive = config.drive()?;
    let best = &c.result.best;
    let (repetition, full_len) = match config.mode {
        SearchMode::Sequence => (None, c.len),
        SearchMode::Subsequence => (
            Some(Repetition {
                subsequence_length: c.len,
                repetitions: best.best_rep,
            }),
            c.len * best.best_rep,
        ),
    };
    Ok(RunRecord {
        index: c.freq + 1,
        delta_theta: config.delta_theta,
        f0: config.frequencies_ghz[c.freq],
        repetition,
        sequence_length: full_len,
        duration_ns: full_len as f64 * drive.tick(),
        angle_precision: best.fitness().angle_error,
        infidelity: best.fitness().infidelity,
        wall_time: c.result.wall_time,
        rng_seed: c.seed,
        satisfied: satisfies(config, c),
        genome: best.genome.clone(),
    })
}

fn run_jobs(
    config: &SweepConfig,
    pool: &rayon::ThreadPool,
    jobs: Vec<(usize, usize, u64)>,
) -> Result<Vec<Candidate>, CliError> {
    pool.install(|| {
        jobs.into_par_iter()
            .map(|(f, len, seed)| search(config, f, len, seed))
            .collect()
    })
}

/// Runs every search the config asks for. Results do not depend on
/// `config.workers`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutcome, CliError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let order = config.ga.order();
    let seeds = || config.ga.rng_seed..config.ga.rng_seed + config.seeds_per_point;
    let nf = config.frequencies_ghz.len();

    let chosen: Vec<Option<Candidate>> = match config.mode {
        SearchMode::Sequence => {
            let mut jobs = Vec::new();
            for f in 0..nf {
                for len in config.lengths.iter() {
                    jobs.extend(seeds().map(|s| (f, len, s)));
                }
            }
            let mut all = run_jobs(config, &pool, jobs)?;
            let mut per_freq: Vec<Vec<Candidate>> = (0..nf).map(|_| Vec::new()).collect();
            for c in all.drain(..) {
                per_freq[c.freq].push(c);
            }
            per_freq
                .into_iter()
                .map(|mut cands| {
                    let tol = config.ga.angle_tol;
                    let angle_ok: Vec<usize> = (0..cands.len())
                        .filter(|&i| cands[i].result.best.fitness().angle_error < tol)
                        .collect();
                    let pick = if angle_ok.is_empty() {
                        first_min(&cands, 0..cands.len(), by_score(&order))
                    } else {
                        first_min(&cands, angle_ok.into_iter(), |a, b| {
                            let (x, y) = (a.result.best.fitness(), b.result.best.fitness());
                            x.infidelity.total_cmp(&y.infidelity)
                        })
                    };
                    pick.map(|i| cands.swap_remove(i))
                })
                .collect()
        }
        SearchMode::Subsequence => {
            let mut resolved: Vec<Option<Candidate>> = (0..nf).map(|_| None).collect();
            let mut fallback: Vec<Option<Candidate>> = (0..nf).map(|_| None).collect();
            for len in config.lengths.iter() {
                let jobs: Vec<_> = (0..nf)
                    .filter(|&f| resolved[f].is_none())
                    .flat_map(|f| seeds().map(move |s| (f, len, s)))
                    .collect();
                if jobs.is_empty() {
                    break;
                }
                let mut by_freq: Vec<Vec<Candidate>> = (0..nf).map(|_| Vec::new()).collect();
                for c in run_jobs(config, &pool, jobs)? {
                    by_freq[c.freq].push(c);
                }
                for (f, cands) in by_freq.into_iter().enumerate() {
                    for c in cands {
                        let slot = if satisfies(config, &c) {
                            &mut resolved[f]
                        } else {
                            &mut fallback[f]
                        };
                        let better = slot
                            .as_ref()
                            .map_or(true, |b| by_score(&order)(&c, b) == Ordering::Less);
                        if better {
                            *slot = Some(c);
                        }
                    }
                }
            }
            resolved
                .into_iter()
                .zip(fallback)
                .map(|(r, fb)| r.or(fb))
                .collect()
        }
    };

    let records = chosen
        .iter()
        .flatten()
        .map(|c| to_record(config, c))
        .collect::<Result<Vec<_>, _>>()?;
    let kind = match config.mode {
        SearchMode::Sequence => ReportKind::Sequence,
        SearchMode::Subsequence => ReportKind::Subsequence,
    };
    Ok(SweepOutcome { kind, records })
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

/// Writes `results.csv`, one `seq_<N>.txt` per record (the full train) and
/// the plots. Returns the paths written.
pub fn write_outputs(outcome: &SweepOutcome, dir: &Path, drive_tick: f64) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    write_csv(&mut buf, outcome.kind, &outcome.records)?;
    let csv_path = dir.join("results.csv");
    write_atomic(&csv_path, &buf)?;
    let mut written = vec![csv_path];
    for r in &outcome.records {
        let path = dir.join(format!("seq_{}.txt", r.index));
        write_atomic(&path, format!("{}\n", r.full_train().to_text()).as_bytes())?;
        written.push(path);
    }
    written.extend(plot::emit_plot(&outcome.records, dir, drive_tick)?);
    Ok(written)
}
