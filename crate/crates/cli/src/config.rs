use std::path::Path;

use anyhow::Context;
use memenet::EvolutionConfig;
use serde::Deserialize;

/// Flat TOML configuration. Every key is optional and overrides the
/// corresponding default.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub pop_size: Option<usize>,
    pub p_c: Option<f64>,
    pub p_m: Option<f64>,
    pub c_max: Option<usize>,
    pub r_min: Option<f64>,
    pub timeout: Option<usize>,
    pub s_size: Option<usize>,
    pub s_prob: Option<f64>,
    pub elitism: Option<bool>,
    pub max_generations: Option<usize>,
    pub stall_generations: Option<usize>,
    pub rng_seed: Option<u64>,
    pub min_shared: Option<usize>,
    pub w_base: Option<f64>,
    pub w_conn: Option<f64>,
    pub exact_limit: Option<usize>,
    pub beam_width: Option<usize>,
    pub parallel: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn apply(&self, cfg: &mut EvolutionConfig) {
        fn set<T: Copy>(slot: &mut T, value: Option<T>) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        set(&mut cfg.pop_size, self.pop_size);
        set(&mut cfg.p_c, self.p_c);
        set(&mut cfg.p_m, self.p_m);
        set(&mut cfg.c_max, self.c_max);
        set(&mut cfg.r_min, self.r_min);
        set(&mut cfg.timeout, self.timeout);
        set(&mut cfg.s_size, self.s_size);
        set(&mut cfg.s_prob, self.s_prob);
        set(&mut cfg.elitism, self.elitism);
        set(&mut cfg.max_generations, self.max_generations);
        set(&mut cfg.stall_generations, self.stall_generations);
        set(&mut cfg.rng_seed, self.rng_seed);
        set(&mut cfg.min_shared, self.min_shared);
        set(&mut cfg.score_weights.w_base, self.w_base);
        set(&mut cfg.score_weights.w_conn, self.w_conn);
        set(&mut cfg.search_limits.exact_limit, self.exact_limit);
        set(&mut cfg.search_limits.beam_width, self.beam_width);
        set(&mut cfg.parallel, self.parallel);
    }
}
