//! Genetic search for pulse trains.
//!
//! One generation:
//!
//! 1. score every individual that has no score yet (parallel map);
//! 2. stop if some individual meets both tolerances;
//! 3. breed `N − 1` children by 3-way tournament selection, one-point
//!    crossover and single-site mutation;
//! 4. append the current best individual, giving `N` again;
//! 5. score the children, then replace the two worst of the new population
//!    with the two best of the previous one.
//!
//! All randomness comes from ChaCha streams keyed by (seed, generation, role),
//! and scoring never draws random numbers, so a seed fixes the result no
//! matter how many threads score the population.

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};
use std::sync::Arc;
use std::time::Instant;

use log::{debug, warn};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::fitness::{FitnessOrder, FitnessScore, ScoreMode, Scorer, TargetGate, MAX_REPETITIONS};
use crate::model::{DriveConfig, TransmonModel};
use crate::pulse::{Alphabet, Pulse, PulseSequence};

/// Phase offset of the seeding comb. A kick at rotating-frame phase φ turns
/// the qubit about the axis (sin φ, cos φ, 0) with sense set by its polarity;
/// at −π/2 the comb `sign(sin(ω0·t − π/2))` rotates about +y in the same sense
/// as `exp(i·θ·σ_y/2)`.
pub const ALIGNED_SEED_PHASE: f64 = -FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Sequence,
    Subsequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Genome length L: the full train in sequence mode, the repeated unit in
    /// subsequence mode.
    pub sequence_length: usize,
    pub mode: SearchMode,
    /// Largest repetition count tried in subsequence mode.
    pub max_rep: usize,
    /// Optional cap on the gate duration in ns; lowers `max_rep` so that
    /// `L·max_rep·T_g` stays within it.
    pub max_duration: Option<f64>,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Overrides N = 2L + 1.
    pub population_size: Option<usize>,
    pub max_iterations: usize,
    pub angle_tol: f64,
    pub infid_tol: f64,
    /// Switch-over of the score ordering from angle to infidelity.
    pub angle_threshold: f64,
    pub rng_seed: u64,
    pub alphabet: Alphabet,
    /// Scoring threads; 1 scores serially on the calling thread.
    pub threads: usize,
    /// Phase offset of the seeding comb, rad.
    pub seed_phase: f64,
    /// Allowed |zeros − pulses| / L of the seed.
    pub parity_tolerance: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            sequence_length: 114,
            mode: SearchMode::Sequence,
            max_rep: 35,
            max_duration: None,
            crossover_prob: 0.8,
            mutation_prob: 0.8,
            population_size: None,
            max_iterations: 500,
            angle_tol: 1e-5,
            infid_tol: 1e-4,
            angle_threshold: crate::fitness::DEFAULT_ANGLE_THRESHOLD,
            rng_seed: 0,
            alphabet: Alphabet::Bipolar,
            threads: 1,
            seed_phase: ALIGNED_SEED_PHASE,
            parity_tolerance: 0.2,
        }
    }
}

impl GaConfig {
    pub fn new(sequence_length: usize) -> Self {
        Self {
            sequence_length,
            ..Self::default()
        }
    }

    pub fn population(&self) -> usize {
        self.population_size.unwrap_or(2 * self.sequence_length + 1)
    }

    pub fn order(&self) -> FitnessOrder {
        FitnessOrder {
            angle_threshold: self.angle_threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequence_length < 4 {
            return domain(format!("sequence length must be >= 4, got {}", self.sequence_length));
        }
        for (name, p) in [
            ("crossover", self.crossover_prob),
            ("mutation", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return domain(format!("{name} probability must lie in [0, 1], got {p}"));
            }
        }
        if self.population() < 3 {
            return domain(format!("population must hold at least 3 individuals, got {}", self.population()));
        }
        if self.threads == 0 {
            return domain("thread count must be >= 1");
        }
        if self.mode == SearchMode::Subsequence && !(1..=MAX_REPETITIONS).contains(&self.max_rep) {
            return domain(format!(
                "max_rep must lie in 1..={MAX_REPETITIONS}, got {}",
                self.max_rep
            ));
        }
        Ok(())
    }

    /// Scoring mode with the repetition bound capped by `max_duration`.
    pub fn score_mode(&self, drive: &DriveConfig) -> Result<ScoreMode> {
        match self.mode {
            SearchMode::Sequence => Ok(ScoreMode::Sequence),
            SearchMode::Subsequence => {
                let mut max_rep = self.max_rep;
                if let Some(limit) = self.max_duration {
                    let unit = self.sequence_length as f64 * drive.tick();
                    // small slack so that exact multiples of T_g are admitted
                    let fit = ((limit + 1e-9) / unit).floor() as usize;
                    if fit == 0 {
                        return domain(format!(
                            "a single repetition ({unit:.3} ns) already exceeds the {limit} ns limit"
                        ));
                    }
                    max_rep = max_rep.min(fit);
                }
                Ok(ScoreMode::Subsequence { max_rep })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: PulseSequence,
    pub score: Option<FitnessScore>,
    /// Repetition count behind `score`; 1 in sequence mode.
    pub best_rep: usize,
}

impl Individual {
    pub fn new(genome: PulseSequence) -> Self {
        Self {
            genome,
            score: None,
            best_rep: 1,
        }
    }

    pub fn scored(genome: PulseSequence, score: FitnessScore, best_rep: usize) -> Self {
        Self {
            genome,
            score: Some(score),
            best_rep,
        }
    }

    /// Score of an evaluated individual.
    ///
    /// # Panics
    /// If the individual has not been scored.
    pub fn fitness(&self) -> &FitnessScore {
        self.score.as_ref().expect("individual has been scored")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaResult {
    pub best: Individual,
    /// Completed breeding rounds.
    pub generations_run: usize,
    pub terminated_early: bool,
    pub cancelled: bool,
    /// Best-ever score at the top of each generation.
    pub history: Vec<FitnessScore>,
    pub evaluations: usize,
    /// Seconds.
    pub wall_time: f64,
}

impl GaResult {
    pub fn satisfied(&self, config: &GaConfig) -> bool {
        self.best.fitness().satisfies(config.angle_tol, config.infid_tol)
    }
}

/// Cooperative cancellation, checked between generations.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, AtomicOrdering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(AtomicOrdering::SeqCst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
enum Role {
    Init = 1,
    Breed = 2,
}

fn stream(seed: u64, generation: u64, role: Role) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((role as u64) << 48) | generation);
    rng
}

/// `sign(sin(ω0·k·T_g + phase))` where `|sin| > threshold`, else 0, for
/// k = 0..len. Negative lobes become 0 in the unipolar alphabet.
pub fn harmonic_comb(
    model: &TransmonModel,
    drive: &DriveConfig,
    len: usize,
    threshold: f64,
    phase: f64,
    alphabet: Alphabet,
) -> Result<PulseSequence> {
    let symbols = (0..len)
        .map(|k| {
            let s = (model.omega0() * k as f64 * drive.tick() + phase).sin();
            // samples within rounding of a node count as zero
            match (s.abs() > threshold.max(1e-12), s > 0.0, alphabet) {
                (false, _, _) => Pulse::Zero,
                (true, true, _) => Pulse::Positive,
                (true, false, Alphabet::Bipolar) => Pulse::Negative,
                (true, false, Alphabet::Unipolar) => Pulse::Zero,
            }
        })
        .collect();
    PulseSequence::new(symbols, alphabet)
}

/// Bipolar comb `sign(sin(ω0·k·T_g))` thresholded at `threshold` (amplitude 1).
pub fn harmonic_seed(
    model: &TransmonModel,
    drive: &DriveConfig,
    len: usize,
    threshold: f64,
) -> Result<PulseSequence> {
    if !(0.0..1.0).contains(&threshold) {
        return domain(format!("threshold fraction must lie in [0, 1), got {threshold}"));
    }
    harmonic_comb(model, drive, len, threshold, 0.0, Alphabet::Bipolar)
}

/// Comb whose zero and pulse counts are as close to equal as the sampling
/// allows, found by bisection on the threshold.
pub fn balanced_seed(
    model: &TransmonModel,
    drive: &DriveConfig,
    config: &GaConfig,
) -> Result<PulseSequence> {
    let len = config.sequence_length;
    let comb = |t: f64| harmonic_comb(model, drive, len, t, config.seed_phase, config.alphabet);
    let imbalance = |s: &PulseSequence| s.zero_count() as isize - s.pulse_count() as isize;
    // zero count is non-decreasing in the threshold
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = comb(0.0)?;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let s = comb(mid)?;
        if imbalance(&s).abs() < imbalance(&best).abs() {
            best = s.clone();
        }
        if imbalance(&s) < 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let off = imbalance(&best).unsigned_abs() as f64 / len as f64;
    if off > config.parity_tolerance {
        warn!(
            "seed has {} zeros and {} pulses; parity off by {:.0}%",
            best.zero_count(),
            best.pulse_count(),
            100.0 * off
        );
    }
    Ok(best)
}

/// The seed followed by its single-site variants: every site replaced by each
/// of its alternative values. Truncated or padded with random single-site
/// variants to exactly `config.population()` individuals.
pub fn init_population(
    seed: &PulseSequence,
    config: &GaConfig,
    rng: &mut impl Rng,
) -> Result<Vec<Individual>> {
    if seed.len() != config.sequence_length {
        return domain(format!(
            "seed has length {}, expected {}",
            seed.len(),
            config.sequence_length
        ));
    }
    if seed.alphabet() != config.alphabet {
        return domain(format!(
            "seed alphabet {} differs from configured {}",
            seed.alphabet(),
            config.alphabet
        ));
    }
    let n = config.population();
    let mut population = Vec::with_capacity(n);
    population.push(Individual::new(seed.clone()));
    'sites: for (i, &p) in seed.symbols().iter().enumerate() {
        for &alt in seed.alphabet().alternatives(p) {
            if population.len() == n {
                break 'sites;
            }
            let mut v = seed.clone();
            v.set(i, alt)?;
            population.push(Individual::new(v));
        }
    }
    while population.len() < n {
        let mut v = seed.clone();
        single_site_change(&mut v, rng);
        population.push(Individual::new(v));
    }
    Ok(population)
}

fn single_site_change(genome: &mut PulseSequence, rng: &mut impl Rng) {
    let site = rng.gen_range(0..genome.len());
    let alts = genome.alphabet().alternatives(genome.symbols()[site]);
    let new = alts[rng.gen_range(0..alts.len())];
    genome.set(site, new).expect("alternatives stay in the alphabet");
}

/// Ranks indices best-first; ties go to the lower index.
fn rank(population: &[Individual], order: &FitnessOrder, idx: &mut [usize]) {
    idx.sort_by(|&a, &b| {
        order
            .compare(population[a].fitness(), population[b].fitness())
            .then(a.cmp(&b))
    });
}

fn best_index(population: &[Individual], order: &FitnessOrder) -> usize {
    (0..population.len())
        .min_by(|&a, &b| {
            order
                .compare(population[a].fitness(), population[b].fitness())
                .then(a.cmp(&b))
        })
        .expect("population is non-empty")
}

/// Draws 3 distinct individuals and returns the indices of the better two,
/// best first.
pub fn select_parents(
    population: &[Individual],
    order: &FitnessOrder,
    rng: &mut impl Rng,
) -> Result<(usize, usize)> {
    if population.len() < 3 {
        return domain(format!(
            "tournament needs at least 3 individuals, got {}",
            population.len()
        ));
    }
    let mut picks = sample(rng, population.len(), 3).into_vec();
    rank(population, order, &mut picks);
    Ok((picks[0], picks[1]))
}

/// Children of a one-point crossover at `point`: tails from `point` on are
/// swapped. `point == len` leaves both parents unchanged.
pub fn crossover_at(
    p1: &PulseSequence,
    p2: &PulseSequence,
    point: usize,
) -> (PulseSequence, PulseSequence) {
    assert_eq!(p1.len(), p2.len(), "crossover needs equal lengths");
    let (mut c1, mut c2) = (p1.clone(), p2.clone());
    if point < p1.len() {
        PulseSequence::swap_tails(&mut c1, &mut c2, point);
    }
    (c1, c2)
}

/// With probability `pc` swaps tails at a point drawn uniformly from
/// `1..len`; otherwise copies the parents. Returns the point used.
pub fn crossover(
    p1: &PulseSequence,
    p2: &PulseSequence,
    pc: f64,
    rng: &mut impl Rng,
) -> (PulseSequence, PulseSequence, Option<usize>) {
    let len = p1.len();
    if len >= 2 && rng.gen_bool(pc) {
        let point = rng.gen_range(1..len);
        let (c1, c2) = crossover_at(p1, p2, point);
        (c1, c2, Some(point))
    } else {
        (p1.clone(), p2.clone(), None)
    }
}

/// With probability `pm` changes one uniformly chosen site to one of its
/// alternative values. Returns whether a site changed.
pub fn mutate(genome: &mut PulseSequence, pm: f64, rng: &mut impl Rng) -> bool {
    if rng.gen_bool(pm) {
        single_site_change(genome, rng);
        true
    } else {
        false
    }
}

/// Hooks for long runs.
#[derive(Default)]
pub struct Hooks<'a> {
    /// Called at the top of every generation with the best-ever score.
    pub progress: Option<&'a mut dyn FnMut(usize, &FitnessScore)>,
    pub cancel: Option<CancelToken>,
}

/// Runs the search with a default hook set.
pub fn evolve(
    config: &GaConfig,
    model: &TransmonModel,
    drive: &DriveConfig,
    gate: &TargetGate,
) -> Result<GaResult> {
    let scorer = Scorer::new(model, drive, gate).with_order(config.order());
    evolve_with(config, &scorer, Hooks::default())
}

struct Population<'a> {
    scorer: &'a Scorer,
    mode: ScoreMode,
    pool: Option<rayon::ThreadPool>,
    evaluations: usize,
}

impl Population<'_> {
    fn score(&mut self, individuals: &mut [Individual]) -> Result<()> {
        let scorer = self.scorer;
        let mode = self.mode;
        let eval = |ind: &mut Individual| -> Result<()> {
            let (rep, score) = scorer.score(&ind.genome, mode)?;
            ind.score = Some(score);
            ind.best_rep = rep;
            Ok(())
        };
        let pending = individuals.iter().filter(|i| i.score.is_none()).count();
        match &self.pool {
            Some(pool) => pool.install(|| {
                individuals
                    .par_iter_mut()
                    .filter(|i| i.score.is_none())
                    .try_for_each(eval)
            })?,
            None => individuals
                .iter_mut()
                .filter(|i| i.score.is_none())
                .try_for_each(eval)?,
        }
        self.evaluations += pending;
        Ok(())
    }
}

/// Scores a batch with `threads` workers. Results do not depend on the
/// thread count.
pub fn score_population(
    scorer: &Scorer,
    mode: ScoreMode,
    individuals: &mut [Individual],
    threads: usize,
) -> Result<()> {
    let mut p = Population {
        scorer,
        mode,
        pool: build_pool(threads)?,
        evaluations: 0,
    };
    p.score(individuals)
}

fn build_pool(threads: usize) -> Result<Option<rayon::ThreadPool>> {
    if threads <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| crate::Error::ParameterDomain(format!("cannot start {threads} threads: {e}")))
}

/// Replaces the two worst of `next` with the two best of `previous`.
fn adjust(next: &mut [Individual], previous: &[Individual], order: &FitnessOrder) {
    let mut prev_idx: Vec<usize> = (0..previous.len()).collect();
    rank(previous, order, &mut prev_idx);
    let mut next_idx: Vec<usize> = (0..next.len()).collect();
    rank(next, order, &mut next_idx);
    // genomes already in the new generation are not inserted twice
    let fresh: Vec<usize> = prev_idx
        .into_iter()
        .filter(|&i| !next.iter().any(|c| c.genome == previous[i].genome))
        .take(2)
        .collect();
    for (&slot, &src) in next_idx.iter().rev().zip(&fresh) {
        next[slot] = previous[src].clone();
    }
}

/// Runs the genetic search with a caller-supplied scorer. The scorer's
/// ordering is replaced by the one in `config`.
pub fn evolve_with(config: &GaConfig, scorer: &Scorer, mut hooks: Hooks<'_>) -> Result<GaResult> {
    config.validate()?;
    let start = Instant::now();
    let scorer = scorer.clone().with_order(config.order());
    let order = config.order();
    let mode = config.score_mode(scorer.drive())?;
    let n = config.population();

    let seed = balanced_seed(scorer.model(), scorer.drive(), config)?;
    let mut population =
        init_population(&seed, config, &mut stream(config.rng_seed, 0, Role::Init))?;
    let mut engine = Population {
        scorer: &scorer,
        mode,
        pool: build_pool(config.threads)?,
        evaluations: 0,
    };

    let mut best_ever: Option<Individual> = None;
    let mut history = Vec::new();
    let mut terminated_early = false;
    let mut cancelled = false;
    let mut generations_run = 0;

    for generation in 0..=config.max_iterations {
        engine.score(&mut population)?;
        debug_assert_eq!(population.len(), n);

        let top = best_index(&population, &order);
        if best_ever
            .as_ref()
            .map_or(true, |b| order.is_better(population[top].fitness(), b.fitness()))
        {
            best_ever = Some(population[top].clone());
        }
        let best_score = *best_ever.as_ref().expect("set above").fitness();
        history.push(best_score);
        if let Some(cb) = hooks.progress.as_mut() {
            cb(generation, &best_score);
        }

        let mut satisfying: Vec<usize> = (0..n)
            .filter(|&i| population[i].fitness().satisfies(config.angle_tol, config.infid_tol))
            .collect();
        if !satisfying.is_empty() {
            rank(&population, &order, &mut satisfying);
            best_ever = Some(population[satisfying[0]].clone());
            terminated_early = true;
            debug!("generation {generation}: tolerances met");
            break;
        }
        if generation == config.max_iterations {
            break;
        }
        if hooks.cancel.as_ref().is_some_and(CancelToken::is_cancelled) {
            cancelled = true;
            break;
        }

        let mut rng = stream(config.rng_seed, generation as u64, Role::Breed);
        let mut next: Vec<Individual> = Vec::with_capacity(n);
        while next.len() < n {
            let (a, b) = select_parents(&population, &order, &mut rng)?;
            let (pa, pb) = (&population[a], &population[b]);
            let (mut c1, mut c2, point) =
                crossover(&pa.genome, &pb.genome, config.crossover_prob, &mut rng);
            let m1 = mutate(&mut c1, config.mutation_prob, &mut rng);
            let m2 = mutate(&mut c2, config.mutation_prob, &mut rng);
            // unchanged copies keep their parent's score
            let child = |g: PulseSequence, parent: &Individual, changed: bool| {
                if changed {
                    Individual::new(g)
                } else {
                    Individual {
                        genome: g,
                        score: parent.score,
                        best_rep: parent.best_rep,
                    }
                }
            };
            next.push(child(c1, pa, m1 || point.is_some()));
            if next.len() < n {
                next.push(child(c2, pb, m2 || point.is_some()));
            }
        }
        engine.score(&mut next)?;
        adjust(&mut next, &population, &order);
        population = next;
        generations_run = generation + 1;
    }

    Ok(GaResult {
        best: best_ever.expect("at least one generation is scored"),
        generations_run,
        terminated_early,
        cancelled,
        history,
        evaluations: engine.evaluations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// `Ordering` of two individuals under `order`, for callers that sort
/// populations themselves.
pub fn compare_individuals(a: &Individual, b: &Individual, order: &FitnessOrder) -> Ordering {
    order.compare(a.fitness(), b.fitness())
}
