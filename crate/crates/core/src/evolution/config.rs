use serde::{Deserialize, Serialize};

use crate::sme::{ScoreWeights, SearchLimits};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

/// Parameters of an evolutionary run. `Default` gives the reference
/// experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    /// Fraction of each generation produced by crossover.
    pub p_c: f64,
    /// Fraction of each generation produced by mutation; `p_c + p_m = 1`.
    pub p_m: f64,
    /// Concept target for randomly grown initial networks.
    pub c_max: usize,
    /// Minimum reliability score of knowledge base assertions.
    pub r_min: f64,
    /// Retry budget for network growth and for mutation.
    pub timeout: usize,
    pub s_size: usize,
    /// Probability that the fitter side wins a tournament contest.
    pub s_prob: f64,
    pub elitism: bool,
    pub max_generations: usize,
    /// Stop after this many generations without a new best fitness; 0
    /// disables the check.
    pub stall_generations: usize,
    pub rng_seed: u64,
    /// Substitutable relations required in each direction for two concepts
    /// to count as interchangeable.
    pub min_shared: usize,
    pub score_weights: ScoreWeights,
    pub search_limits: SearchLimits,
    /// Evaluate fitness on the rayon thread pool. Results are identical to
    /// sequential evaluation.
    pub parallel: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            pop_size: 200,
            p_c: 0.85,
            p_m: 0.15,
            c_max: 5,
            r_min: 2.0,
            timeout: 10,
            s_size: 8,
            s_prob: 0.8,
            elitism: true,
            max_generations: 50,
            stall_generations: 20,
            rng_seed: 0,
            min_shared: 1,
            score_weights: ScoreWeights::default(),
            search_limits: SearchLimits::default(),
            parallel: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError(msg));
        if self.pop_size == 0 {
            return fail("pop_size must be at least 1".into());
        }
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} = {p} is outside [0, 1]"));
            }
        }
        if (self.p_c + self.p_m - 1.0).abs() > 1e-9 {
            return fail(format!(
                "p_c + p_m must equal 1, got {}",
                self.p_c + self.p_m
            ));
        }
        if self.c_max == 0 {
            return fail("c_max must be at least 1".into());
        }
        if !self.r_min.is_finite() {
            return fail("r_min must be finite".into());
        }
        if self.timeout == 0 {
            return fail("timeout must be at least 1".into());
        }
        if self.s_size == 0 {
            return fail("s_size must be at least 1".into());
        }
        if !(0.5..=1.0).contains(&self.s_prob) {
            return fail(format!("s_prob = {} is outside [0.5, 1]", self.s_prob));
        }
        if self.min_shared == 0 {
            return fail("min_shared must be at least 1".into());
        }
        if self.search_limits.beam_width == 0 {
            return fail("beam_width must be at least 1".into());
        }
        self.score_weights
            .validate()
            .map_err(|e| ConfigError(e.to_string()))
    }

    /// Number of offspring produced by crossover in each generation.
    pub fn crossover_quota(&self) -> usize {
        ((self.pop_size as f64 * self.p_c).round() as usize).min(self.pop_size)
    }
}
