//! The memetic algorithm: a generational loop of fitness evaluation,
//! tournament selection and commonsense variation over a pool of semantic
//! networks.
//!
//! All random choices come from one ChaCha8 stream seeded from the run
//! configuration and consumed in a fixed sequential order. Fitness
//! evaluation is the only parallel part and is a pure function of each
//! genome, so a run is reproducible regardless of thread count.

pub mod config;
pub mod crossover;
pub mod mutation;
pub mod selection;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kb::KnowledgeBase;
use crate::semnet::{grow_random, NetworkError, SemanticNetwork};
use crate::sme::{best_gmap, MappingResult, SCORE_EPS};

pub use config::{ConfigError, EvolutionConfig};
pub use crossover::{crossover, crossover_type1, crossover_type2, CrossoverKind};
pub use mutation::{mutate, MutationKind};
pub use selection::tournament_index;

#[derive(Debug, thiserror::Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("base network has no relations")]
    EmptyBase,
}

/// A member of the meme pool.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: SemanticNetwork,
    cached_fitness: Option<f64>,
}

impl Individual {
    pub fn new(genome: SemanticNetwork) -> Self {
        Individual {
            genome,
            cached_fitness: None,
        }
    }

    pub fn fitness(&self) -> Option<f64> {
        self.cached_fitness
    }

    fn expect_fitness(&self) -> f64 {
        self.cached_fitness
            .expect("population evaluated before use")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub avg_fitness: f64,
    /// Relation count of the generation's best individual.
    pub best_size: usize,
    pub avg_size: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunStats {
    pub generations: Vec<GenerationStats>,
}

pub const STATS_CSV_HEADER: &str = "generation,best_fitness,avg_fitness,best_size,avg_size";

impl RunStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(STATS_CSV_HEADER);
        out.push('\n');
        for g in &self.generations {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                g.generation, g.best_fitness, g.avg_fitness, g.best_size, g.avg_size
            );
        }
        out
    }

    pub fn best_series(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best_fitness).collect()
    }
}

/// Outcome of a complete run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Individual,
    pub best_generation: usize,
    pub mapping: MappingResult,
    pub stats: RunStats,
}

/// `pop_size` randomly grown networks.
pub fn initialize<R: Rng + ?Sized>(
    cfg: &EvolutionConfig,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> Result<Vec<Individual>, EvolutionError> {
    (0..cfg.pop_size)
        .map(|_| {
            Ok(Individual::new(grow_random(
                kb,
                &[],
                cfg.c_max,
                cfg.timeout,
                rng,
            )?))
        })
        .collect()
}

/// Fill in missing fitness values. Parallel evaluation yields exactly the
/// same numbers as sequential evaluation.
pub fn evaluate(pop: &mut [Individual], base: &SemanticNetwork, cfg: &EvolutionConfig) {
    let eval = |ind: &mut Individual| {
        if ind.cached_fitness.is_none() {
            let m = best_gmap(base, &ind.genome, &cfg.score_weights, &cfg.search_limits);
            ind.cached_fitness = Some(m.fitness);
        }
    };
    if cfg.parallel {
        pop.par_iter_mut().for_each(eval);
    } else {
        pop.iter_mut().for_each(eval);
    }
}

/// Index of the first individual with maximal fitness.
fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.expect_fitness() > pop[best].expect_fitness() {
            best = i;
        }
    }
    best
}

pub fn generation_stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let best = best_index(pop);
    let n = pop.len() as f64;
    GenerationStats {
        generation,
        best_fitness: pop[best].expect_fitness(),
        avg_fitness: pop.iter().map(Individual::expect_fitness).sum::<f64>() / n,
        best_size: pop[best].genome.size(),
        avg_size: pop.iter().map(|i| i.genome.size() as f64).sum::<f64>() / n,
    }
}

/// Build the next generation from an evaluated population.
///
/// The crossover quota is filled with offspring of tournament-selected
/// parent pairs (an odd quota drops one offspring of the last pair at
/// random), the rest by mutating tournament-selected individuals. With
/// elitism a random offspring is then overwritten by the current best.
pub fn vary<R: Rng + ?Sized>(
    pop: &[Individual],
    cfg: &EvolutionConfig,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> Vec<Individual> {
    let fitnesses: Vec<f64> = pop.iter().map(Individual::expect_fitness).collect();
    let quota = cfg.crossover_quota();
    let select = |rng: &mut R| tournament_index(&fitnesses, cfg.s_size, cfg.s_prob, rng);

    let mut next = Vec::with_capacity(cfg.pop_size);
    while next.len() < quota {
        let (i, j) = (select(rng), select(rng));
        let (o1, o2, _) = crossover(&pop[i].genome, &pop[j].genome, kb, cfg.min_shared, rng);
        if quota - next.len() == 1 {
            next.push(Individual::new(if rng.gen_bool(0.5) { o1 } else { o2 }));
        } else {
            next.push(Individual::new(o1));
            next.push(Individual::new(o2));
        }
    }
    while next.len() < cfg.pop_size {
        let i = select(rng);
        let (child, kind) = mutate(&pop[i].genome, kb, cfg.timeout, cfg.min_shared, rng);
        next.push(match kind {
            Some(_) => Individual::new(child),
            None => pop[i].clone(),
        });
    }
    if cfg.elitism {
        let slot = rng.gen_range(0..next.len());
        next[slot] = pop[best_index(pop)].clone();
    }
    next
}

/// One generation: evaluate `pop`, record its statistics and produce its
/// successor.
pub fn step<R: Rng + ?Sized>(
    pop: &mut [Individual],
    generation: usize,
    base: &SemanticNetwork,
    cfg: &EvolutionConfig,
    kb: &KnowledgeBase,
    rng: &mut R,
) -> (Vec<Individual>, GenerationStats) {
    evaluate(pop, base, cfg);
    let stats = generation_stats(generation, pop);
    (vary(pop, cfg, kb, rng), stats)
}

/// A run in progress. Useful when each generation must be inspected;
/// otherwise see [`run`].
pub struct Evolution<'a> {
    base: &'a SemanticNetwork,
    kb: &'a KnowledgeBase,
    cfg: EvolutionConfig,
    rng: ChaCha8Rng,
    population: Vec<Individual>,
    generation: usize,
    evaluated: bool,
    best: Option<(Individual, usize)>,
    stall: usize,
    stats: RunStats,
}

impl<'a> Evolution<'a> {
    pub fn new(
        base: &'a SemanticNetwork,
        cfg: EvolutionConfig,
        kb: &'a KnowledgeBase,
    ) -> Result<Self, EvolutionError> {
        cfg.validate()?;
        if base.size() == 0 {
            return Err(EvolutionError::EmptyBase);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let population = initialize(&cfg, kb, &mut rng)?;
        Ok(Evolution {
            base,
            kb,
            cfg,
            rng,
            population,
            generation: 0,
            evaluated: false,
            best: None,
            stall: 0,
            stats: RunStats::default(),
        })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    /// Evaluate the current generation and record its statistics.
    pub fn evaluate(&mut self) -> &GenerationStats {
        if !self.evaluated {
            evaluate(&mut self.population, self.base, &self.cfg);
            let stats = generation_stats(self.generation, &self.population);
            let improved = match &self.best {
                None => true,
                Some((b, _)) => stats.best_fitness > b.expect_fitness() + SCORE_EPS,
            };
            if improved {
                let champion = self.population[best_index(&self.population)].clone();
                self.best = Some((champion, self.generation));
                self.stall = 0;
            } else {
                self.stall += 1;
            }
            self.stats.generations.push(stats);
            self.evaluated = true;
        }
        self.stats.generations.last().expect("just recorded")
    }

    /// Whether the stop criterion holds for the evaluated current generation.
    pub fn is_done(&self) -> bool {
        self.generation >= self.cfg.max_generations
            || (self.cfg.stall_generations > 0 && self.stall >= self.cfg.stall_generations)
    }

    /// Replace the population with its offspring.
    pub fn advance(&mut self) {
        self.evaluate();
        self.population = vary(&self.population, &self.cfg, self.kb, &mut self.rng);
        self.generation += 1;
        self.evaluated = false;
    }

    pub fn finish(mut self) -> RunOutcome {
        self.evaluate();
        let (best, best_generation) = self.best.expect("at least one generation evaluated");
        let mapping = best_gmap(
            self.base,
            &best.genome,
            &self.cfg.score_weights,
            &self.cfg.search_limits,
        );
        RunOutcome {
            best,
            best_generation,
            mapping,
            stats: self.stats,
        }
    }
}

/// Run until `max_generations` or until the best fitness has not improved
/// for `stall_generations` generations.
pub fn run(
    base: &SemanticNetwork,
    cfg: &EvolutionConfig,
    kb: &KnowledgeBase,
) -> Result<RunOutcome, EvolutionError> {
    let mut evo = Evolution::new(base, cfg.clone(), kb)?;
    loop {
        evo.evaluate();
        if evo.is_done() {
            break;
        }
        evo.advance();
    }
    Ok(evo.finish())
}
