//! Single-objective genetic algorithm over binary chromosomes, minimizing
//! measured mean drag.
//!
//! One generation: measure every unevaluated design, keep the `elite_count`
//! lowest-drag individuals, then breed offspring from randomly paired elites
//! by multi-point crossover and per-bit mutation until the next generation
//! is full. Offspring that decode to an infeasible shape are discarded and
//! regenerated. The campaign stops once the elite set has not changed for
//! `stall_generations` consecutive generations, or at `max_generations`.
//!
//! All randomness flows from one seed through named substreams (population
//! init, elite pairing, crossover, mutation), so campaigns replay exactly;
//! each generation record carries a digest of the stream states.

pub mod chromosome;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::geometry::{Domain, MorphShape};
use crate::rig::{FitnessEvaluator, RigError};

pub use chromosome::{Chromosome, CHROMOSOME_BITS, CROSSOVER_BOUNDARIES};

/// Attempts allowed per offspring slot before production is declared stuck.
pub const OFFSPRING_RETRY_CAP: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum EvolveError {
    #[error("invalid GA config: {0}")]
    InvalidConfig(String),
    #[error("feasible domain is empty (or too sparse to sample)")]
    EmptyDomain,
    #[error("population of {population} cannot supply {requested} elites")]
    NotEnoughIndividuals { population: usize, requested: usize },
    #[error("individual has no fitness; evaluate the population first")]
    Unevaluated,
    #[error("offspring production stalled: {attempts} consecutive rejections")]
    ProductionStalled { attempts: usize },
    #[error("fitness evaluation failed at generation {generation}: {source}")]
    Evaluator {
        generation: usize,
        #[source]
        source: RigError,
    },
    #[error("failed to persist generation record: {0}")]
    Sink(String),
}

/// Evolution-loop parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub initial_population: usize,
    pub generation_size: usize,
    pub elite_count: usize,
    pub crossover_points: usize,
    /// Per-bit flip probability applied to every offspring.
    pub mutation_rate: f64,
    pub stall_generations: usize,
    pub max_generations: usize,
    pub rng_seed: u64,
    /// Re-measure carried-over elites each generation instead of keeping
    /// their recorded fitness.
    pub reevaluate_elites: bool,
    /// Reject offspring duplicating a chromosome already present in the
    /// generation under construction.
    pub dedup_offspring: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            initial_population: 50,
            generation_size: 20,
            elite_count: 4,
            crossover_points: 4,
            mutation_rate: 0.05,
            stall_generations: 5,
            max_generations: 50,
            rng_seed: 0,
            reevaluate_elites: false,
            dedup_offspring: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        let fail = |msg: String| Err(EvolveError::InvalidConfig(msg));
        if self.elite_count == 0 || self.elite_count >= self.generation_size {
            return fail(format!(
                "elite_count must satisfy 0 < elite_count < generation_size ({} vs {})",
                self.elite_count, self.generation_size
            ));
        }
        if self.generation_size > self.initial_population {
            return fail(format!(
                "generation_size {} exceeds initial_population {}",
                self.generation_size, self.initial_population
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return fail(format!("mutation_rate must be in [0, 1], got {}", self.mutation_rate));
        }
        if self.crossover_points == 0 || self.crossover_points > CROSSOVER_BOUNDARIES {
            return fail(format!(
                "crossover_points must be in [1, {CROSSOVER_BOUNDARIES}], got {}",
                self.crossover_points
            ));
        }
        if self.stall_generations == 0 || self.max_generations == 0 {
            return fail("stall_generations and max_generations must be positive".into());
        }
        Ok(())
    }
}

/// One design with its measurement state.
#[derive(Debug, Clone)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub shape: MorphShape,
    /// Mean drag (absolute) or drag delta vs neutral, in newtons.
    pub fitness_n: Option<f64>,
    /// Generation index at which the fitness was measured.
    pub evaluated_at: Option<usize>,
}

impl Individual {
    pub fn from_shape(shape: MorphShape) -> Self {
        let indices = shape.indices.expect("evolution operates on grid shapes");
        Self {
            chromosome: Chromosome::from_indices(indices),
            shape,
            fitness_n: None,
            evaluated_at: None,
        }
    }

    pub fn fitness(&self) -> Result<f64, EvolveError> {
        self.fitness_n.ok_or(EvolveError::Unevaluated)
    }
}

/// The evaluated population of one generation.
#[derive(Debug, Clone)]
pub struct GenerationRecord {
    pub index: usize,
    pub population: Vec<Individual>,
    /// The `elite_count` lowest-fitness individuals, ascending.
    pub elites: Vec<Individual>,
    /// Digest of the RNG substream states after the generation.
    pub rng_digest: String,
}

/// Named RNG substreams; one root seed drives the whole campaign.
pub struct GaStreams {
    pub init: ChaCha8Rng,
    pub pairing: ChaCha8Rng,
    pub crossover: ChaCha8Rng,
    pub mutation: ChaCha8Rng,
    seed: u64,
}

impl GaStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Self {
            init: stream(1),
            pairing: stream(2),
            crossover: stream(3),
            mutation: stream(4),
            seed,
        }
    }

    /// Checksum of the substream positions, recorded per generation.
    pub fn digest(&self, generation: usize) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"morphlab.ga-streams");
        hasher.update(self.seed.to_le_bytes());
        hasher.update((generation as u64).to_le_bytes());
        for rng in [&self.init, &self.pairing, &self.crossover, &self.mutation] {
            hasher.update(rng.get_word_pos().to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Uniform draws over Θ until the initial population is full. Fully
/// determined by the init substream.
pub fn initialize_population(
    config: &GaConfig,
    domain: &Domain,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Individual>, EvolveError> {
    config.validate()?;
    let mut population = Vec::with_capacity(config.initial_population);
    for _ in 0..config.initial_population {
        let shape = domain.sample_uniform(rng).ok_or(EvolveError::EmptyDomain)?;
        population.push(Individual::from_shape(shape));
    }
    Ok(population)
}

/// The `elite_count` lowest-fitness individuals, ascending; ties broken by
/// lexicographic chromosome order so the result is permutation-invariant.
pub fn select_elites(
    population: &[Individual],
    elite_count: usize,
) -> Result<Vec<Individual>, EvolveError> {
    if population.len() < elite_count {
        return Err(EvolveError::NotEnoughIndividuals {
            population: population.len(),
            requested: elite_count,
        });
    }
    let mut ranked: Vec<&Individual> = population.iter().collect();
    for individual in &ranked {
        individual.fitness()?;
    }
    ranked.sort_by(|a, b| {
        a.fitness_n
            .unwrap()
            .total_cmp(&b.fitness_n.unwrap())
            .then_with(|| a.chromosome.cmp(&b.chromosome))
    });
    Ok(ranked.into_iter().take(elite_count).cloned().collect())
}

/// Multi-point crossover: `cut_count` distinct cuts on the interior bit
/// boundaries split both parents into segments, and the child copies each
/// segment from either parent with equal probability.
pub fn crossover<R: Rng>(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    cut_count: usize,
    rng: &mut R,
) -> Chromosome {
    debug_assert!((1..=CROSSOVER_BOUNDARIES).contains(&cut_count));
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, CROSSOVER_BOUNDARIES, cut_count)
        .into_iter()
        .map(|boundary| boundary + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(CHROMOSOME_BITS);

    let mut child = *parent_a;
    let mut segment_start = 0;
    for segment_end in cuts {
        let source = if rng.random_bool(0.5) { parent_a } else { parent_b };
        for position in segment_start..segment_end {
            child = child.with_bit(position, source.bit(position));
        }
        segment_start = segment_end;
    }
    child
}

/// Independent per-bit flips at the given rate.
pub fn mutate<R: Rng>(chromosome: &Chromosome, rate: f64, rng: &mut R) -> Chromosome {
    let mut out = *chromosome;
    for position in 0..CHROMOSOME_BITS {
        if rng.random_bool(rate) {
            out = out.flipped_bit(position);
        }
    }
    out
}

/// Elite pairs come from shuffling the elite list into disjoint pairs; the
/// queue reshuffles whenever it runs dry, so pairings vary across a
/// production round.
struct PairQueue {
    order: Vec<usize>,
    next: usize,
}

impl PairQueue {
    fn new(elite_count: usize) -> Self {
        Self { order: (0..elite_count).collect(), next: elite_count }
    }

    fn draw<R: Rng>(&mut self, rng: &mut R) -> (usize, usize) {
        if self.next + 1 >= self.order.len() {
            self.order.shuffle(rng);
            self.next = 0;
        }
        let pair = (self.order[self.next], self.order[self.next + 1]);
        self.next += 2;
        pair
    }
}

/// Builds the next generation: elites carried over with their fitness, plus
/// freshly bred unevaluated offspring up to `generation_size`. Offspring
/// that decode to an infeasible shape are rejected and retried, up to
/// [`OFFSPRING_RETRY_CAP`] attempts per slot.
pub fn produce_generation(
    elites: &[Individual],
    config: &GaConfig,
    domain: &Domain,
    streams: &mut GaStreams,
) -> Result<Vec<Individual>, EvolveError> {
    debug_assert_eq!(elites.len(), config.elite_count);
    let mut next_generation: Vec<Individual> = elites.to_vec();
    let mut pairs = PairQueue::new(elites.len());

    while next_generation.len() < config.generation_size {
        let mut accepted = false;
        for attempt in 0.. {
            if attempt >= OFFSPRING_RETRY_CAP {
                return Err(EvolveError::ProductionStalled { attempts: attempt });
            }
            let (i, j) = pairs.draw(&mut streams.pairing);
            let child = crossover(
                &elites[i].chromosome,
                &elites[j].chromosome,
                config.crossover_points,
                &mut streams.crossover,
            );
            let child = mutate(&child, config.mutation_rate, &mut streams.mutation);
            let Some(shape) = child.decode() else { continue };
            if !domain.contains(&shape) {
                continue;
            }
            if config.dedup_offspring
                && next_generation.iter().any(|ind| ind.chromosome == child)
            {
                continue;
            }
            next_generation.push(Individual {
                chromosome: child,
                shape,
                fitness_n: None,
                evaluated_at: None,
            });
            accepted = true;
            break;
        }
        debug_assert!(accepted);
    }
    Ok(next_generation)
}

/// Why a campaign stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "reason")]
pub enum TerminationReason {
    /// The elite chromosome set was unchanged for the configured number of
    /// consecutive generations.
    ElitesStalled,
    MaxGenerationsReached,
}

/// Completed campaign: every generation record plus the winning design.
#[derive(Debug)]
pub struct CampaignResult {
    pub records: Vec<GenerationRecord>,
    pub best: Individual,
    pub termination: TerminationReason,
    pub evaluator_calls: u64,
}

/// Receives each generation record as soon as it is complete, before the
/// next one is bred, so aborted campaigns keep their partial history.
pub trait GenerationSink {
    fn persist(&mut self, record: &GenerationRecord) -> Result<(), String>;
}

/// Discards records; campaigns that only need the in-memory result.
pub struct NoSink;

impl GenerationSink for NoSink {
    fn persist(&mut self, _record: &GenerationRecord) -> Result<(), String> {
        Ok(())
    }
}

/// Runs the full evolution loop against a fitness evaluator.
pub fn run_campaign(
    config: &GaConfig,
    domain: &Domain,
    evaluator: &mut dyn FitnessEvaluator,
    sink: &mut dyn GenerationSink,
) -> Result<CampaignResult, EvolveError> {
    config.validate()?;
    let mut streams = GaStreams::new(config.rng_seed);
    let mut population = initialize_population(config, domain, &mut streams.init)?;
    let mut records: Vec<GenerationRecord> = Vec::new();
    let mut evaluator_calls: u64 = 0;
    let mut previous_elites: Option<BTreeSet<Chromosome>> = None;
    let mut stalled_for = 0usize;

    for generation in 0..config.max_generations {
        evaluator
            .begin_generation(generation)
            .map_err(|source| EvolveError::Evaluator { generation, source })?;
        if config.reevaluate_elites && generation > 0 {
            for individual in &mut population {
                individual.fitness_n = None;
            }
        }
        for individual in &mut population {
            if individual.fitness_n.is_none() {
                let fitness = evaluator
                    .evaluate(&individual.shape)
                    .map_err(|source| EvolveError::Evaluator { generation, source })?;
                evaluator_calls += 1;
                individual.fitness_n = Some(fitness);
                individual.evaluated_at = Some(generation);
            }
        }

        let elites = select_elites(&population, config.elite_count)?;
        let record = GenerationRecord {
            index: generation,
            population: population.clone(),
            elites: elites.clone(),
            rng_digest: streams.digest(generation),
        };
        sink.persist(&record).map_err(EvolveError::Sink)?;
        records.push(record);

        let elite_set: BTreeSet<Chromosome> = elites.iter().map(|e| e.chromosome).collect();
        if previous_elites.as_ref() == Some(&elite_set) {
            stalled_for += 1;
        } else {
            stalled_for = 0;
        }
        previous_elites = Some(elite_set);

        let termination = if stalled_for >= config.stall_generations {
            Some(TerminationReason::ElitesStalled)
        } else if generation + 1 == config.max_generations {
            Some(TerminationReason::MaxGenerationsReached)
        } else {
            None
        };
        if let Some(termination) = termination {
            let best = elites.into_iter().next().expect("elite_count >= 1");
            return Ok(CampaignResult { records, best, termination, evaluator_calls });
        }

        population = produce_generation(&elites, config, domain, &mut streams)?;
    }
    unreachable!("loop exits through a termination reason");
}
