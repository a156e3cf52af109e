//! Experiment configuration (JSON).

use serde::{Deserialize, Serialize};

use crate::engine::PopulationCaps;
use crate::error::{Error, Result};
use crate::laws::{BranchingLaw, ChildLaw, DisplacementSpec, OffspringSpec};
use crate::spine::{MANY_TO_ONE_MAX_N, MAX_SPINE_HORIZON};
use crate::stats::FIXED_POINT_MIN_N0;

/// Largest tree horizon accepted by the configuration.
pub const MAX_HORIZON: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OffspringConfig {
    PoissonMean(f64),
    Deterministic(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapsConfig {
    pub max_particles: u64,
}

impl Default for CapsConfig {
    fn default() -> Self {
        Self {
            max_particles: PopulationCaps::default().max_particles,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailConfig {
    /// `x` values for the profile `e^x P(M_n <= alpha_n - x)`.
    pub upper_bound_x: Vec<f64>,
    pub bootstrap_resamples: usize,
    pub bootstrap_level: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            upper_bound_x: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            bootstrap_resamples: 1000,
            bootstrap_level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitConfig {
    /// Bootstrap resamples of the KS distance at the fitted constant.
    pub bootstrap_resamples: usize,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MartingaleConfig {
    pub horizons: Vec<usize>,
    pub replicas: usize,
    pub fixed_point_n0: usize,
    pub fixed_point_samples: usize,
}

impl Default for MartingaleConfig {
    fn default() -> Self {
        Self {
            horizons: vec![4, 8, 12],
            replicas: 10_000,
            fixed_point_n0: 10,
            fixed_point_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManyToOneConfig {
    pub horizons: Vec<usize>,
    pub replicas: usize,
}

impl Default for ManyToOneConfig {
    fn default() -> Self {
        Self {
            horizons: vec![1, 2, 4],
            replicas: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpineConfig {
    pub marginal_n: usize,
    pub target_ess: usize,
    pub max_raw: usize,
    pub mixture: f64,
    pub j_max: usize,
    pub series_replicas: usize,
    pub tolerance: f64,
}

impl Default for SpineConfig {
    fn default() -> Self {
        Self {
            marginal_n: 8,
            target_ess: 1_000_000,
            max_raw: 20_000_000,
            mixture: crate::spine::DEFENSIVE_MIX,
            j_max: 12,
            series_replicas: 10_000,
            tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WalkConfig {
    pub renewal_x: Vec<f64>,
    pub renewal_replicas: usize,
    pub renewal_horizon: u64,
    pub local_horizons: Vec<usize>,
    pub local_y: f64,
    pub local_h: f64,
    pub local_replicas: usize,
    pub big_jump_n: usize,
    pub big_jump_x: f64,
    pub big_jump_window: f64,
    pub big_jump_replicas: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            renewal_x: vec![50.0, 100.0, 200.0],
            renewal_replicas: 100_000,
            renewal_horizon: crate::rwalk::RENEWAL_HORIZON,
            local_horizons: vec![50, 100, 200],
            local_y: 10.0,
            local_h: 1.0,
            local_replicas: 200_000,
            big_jump_n: 200,
            big_jump_x: 2.0,
            big_jump_window: crate::rwalk::BIG_JUMP_WINDOW,
            big_jump_replicas: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermoConfig {
    pub horizons: Vec<usize>,
    pub replicas: usize,
    pub gibbs_betas: Vec<f64>,
}

impl Default for ThermoConfig {
    fn default() -> Self {
        Self {
            horizons: vec![8, 12, 16],
            replicas: 200,
            gibbs_betas: vec![0.5, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BigJumpTreeConfig {
    /// Conditioning level `x` in `M_n <= alpha_n - x`.
    pub x: f64,
    /// Drops must occur at generation `>= n - late_window`.
    pub late_window: usize,
}

impl Default for BigJumpTreeConfig {
    fn default() -> Self {
        Self { x: 2.0, late_window: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub law: DisplacementSpec,
    /// Defaults to Poisson with mean `E[e^X]`.
    pub offspring: Option<OffspringConfig>,
    /// Tree horizons; the first and last are used for the limit-law trend and
    /// the last for the tail criteria.
    pub horizons: Vec<usize>,
    /// Replicas per horizon.
    pub replicas: Vec<usize>,
    /// Tail regression grid.
    pub x_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub root_seed: u64,
    pub caps: CapsConfig,
    pub output_dir: String,
    pub tail: TailConfig,
    pub limit: LimitConfig,
    pub martingale: MartingaleConfig,
    pub many_to_one: ManyToOneConfig,
    pub spine: SpineConfig,
    pub walk: WalkConfig,
    pub thermo: ThermoConfig,
    pub big_jump: BigJumpTreeConfig,
    /// Scale factor applied to every replica count for the determinism
    /// probe of `checkall`.
    pub determinism_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            law: DisplacementSpec::default(),
            offspring: None,
            horizons: vec![10, 18],
            replicas: vec![30_000, 30_000],
            x_grid: vec![1.5, 2.0, 2.5, 3.0, 3.5],
            beta_grid: (1..=40).map(|i| i as f64 * 0.1).collect(),
            root_seed: 20_240_601,
            caps: CapsConfig::default(),
            output_dir: "runs".into(),
            tail: TailConfig::default(),
            limit: LimitConfig::default(),
            martingale: MartingaleConfig::default(),
            many_to_one: ManyToOneConfig::default(),
            spine: SpineConfig::default(),
            walk: WalkConfig::default(),
            thermo: ThermoConfig::default(),
            big_jump: BigJumpTreeConfig::default(),
            determinism_scale: 0.01,
        }
    }
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg = Self::parse_unchecked(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without running [`ExperimentConfig::problems`].
    pub fn parse_unchecked(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Branching law described by `law` and `offspring`.
    pub fn branching_law(&self) -> Result<BranchingLaw> {
        match self.offspring {
            None => Ok(BranchingLaw::hyp2(self.law.clone())),
            Some(OffspringConfig::PoissonMean(l)) => BranchingLaw::new(
                ChildLaw::Tilted(self.law.clone()),
                OffspringSpec::PoissonMean(l),
            ),
            Some(OffspringConfig::Deterministic(_)) => Err(Error::Config(
                "the heavy-tailed law needs Poisson offspring with mean E[e^X]".into(),
            )),
        }
    }

    pub fn caps(&self) -> PopulationCaps {
        PopulationCaps {
            max_particles: self.caps.max_particles,
            ..PopulationCaps::default()
        }
    }

    /// Every problem with the configuration, in field order.
    pub fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        if let Err(e) = self.branching_law() {
            p.push(format!("offspring: {e}"));
        }
        if self.horizons.is_empty() {
            p.push("horizons: must not be empty".into());
        }
        for &n in &self.horizons {
            if n == 0 || n > MAX_HORIZON {
                p.push(format!("horizons: {n} outside 1..={MAX_HORIZON}"));
            }
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            p.push("horizons: must be strictly increasing".into());
        }
        if self.replicas.len() != self.horizons.len() {
            p.push(format!(
                "replicas: {} entries for {} horizons",
                self.replicas.len(),
                self.horizons.len()
            ));
        }
        for &r in &self.replicas {
            if r == 0 {
                p.push("replicas: every entry must be positive".into());
            }
        }
        if self.x_grid.len() < crate::stats::MIN_TAIL_POINTS || !increasing(&self.x_grid) {
            p.push("x_grid: needs at least 3 strictly increasing values".into());
        }
        if self.x_grid.iter().any(|x| !x.is_finite()) {
            p.push("x_grid: values must be finite".into());
        }
        if self.beta_grid.is_empty()
            || !increasing(&self.beta_grid)
            || self.beta_grid.iter().any(|&b| !(b > 0.0 && b.is_finite()))
        {
            p.push("beta_grid: needs positive, finite, strictly increasing values".into());
        }
        if self.caps.max_particles == 0 {
            p.push("caps.max_particles: must be positive".into());
        }
        if self.output_dir.is_empty() {
            p.push("output_dir: must not be empty".into());
        }
        if self.tail.upper_bound_x.is_empty() || !self.tail.upper_bound_x.contains(&1.0) {
            p.push("tail.upper_bound_x: must contain x = 1".into());
        }
        if self.tail.bootstrap_resamples == 0 {
            p.push("tail.bootstrap_resamples: must be positive".into());
        }
        if !(self.tail.bootstrap_level > 0.0 && self.tail.bootstrap_level < 1.0) {
            p.push("tail.bootstrap_level: must lie in (0, 1)".into());
        }
        if self.limit.bootstrap_resamples < 2 {
            p.push("limit.bootstrap_resamples: needs at least 2".into());
        }
        let m = &self.martingale;
        if m.horizons.is_empty() || m.horizons.iter().any(|&n| n == 0 || n > MAX_HORIZON) {
            p.push(format!("martingale.horizons: values must lie in 1..={MAX_HORIZON}"));
        }
        if m.replicas < 2 {
            p.push("martingale.replicas: needs at least 2".into());
        }
        if m.fixed_point_n0 < FIXED_POINT_MIN_N0 || m.fixed_point_n0 > MAX_HORIZON {
            p.push(format!(
                "martingale.fixed_point_n0: must lie in {FIXED_POINT_MIN_N0}..={MAX_HORIZON}"
            ));
        }
        if m.fixed_point_samples == 0 {
            p.push("martingale.fixed_point_samples: must be positive".into());
        }
        let mo = &self.many_to_one;
        if mo.horizons.is_empty() || mo.horizons.iter().any(|&n| n == 0 || n > MANY_TO_ONE_MAX_N) {
            p.push(format!("many_to_one.horizons: values must lie in 1..={MANY_TO_ONE_MAX_N}"));
        }
        if mo.replicas < 2 {
            p.push("many_to_one.replicas: needs at least 2".into());
        }
        let s = &self.spine;
        if s.marginal_n > MAX_SPINE_HORIZON {
            p.push(format!("spine.marginal_n: must be <= {MAX_SPINE_HORIZON}"));
        }
        if s.target_ess == 0 || s.max_raw == 0 {
            p.push("spine.target_ess and spine.max_raw: must be positive".into());
        }
        if !(0.0..1.0).contains(&s.mixture) {
            p.push("spine.mixture: must lie in [0, 1)".into());
        }
        if s.j_max == 0 || s.j_max > MAX_HORIZON {
            p.push(format!("spine.j_max: must lie in 1..={MAX_HORIZON}"));
        }
        if s.series_replicas < 2 {
            p.push("spine.series_replicas: needs at least 2".into());
        }
        if !(s.tolerance >= 0.0) {
            p.push("spine.tolerance: must be nonnegative".into());
        }
        let w = &self.walk;
        if w.renewal_x.len() < 2
            || !increasing(&w.renewal_x)
            || w.renewal_x.iter().any(|&x| !(x > 0.0 && x.is_finite()))
        {
            p.push("walk.renewal_x: needs at least 2 positive increasing values".into());
        }
        if w.renewal_replicas < 2 || w.renewal_horizon == 0 {
            p.push("walk.renewal_replicas (>= 2) and walk.renewal_horizon (> 0) required".into());
        }
        if w.local_horizons.is_empty() || !(w.local_h > 0.0) || w.local_replicas == 0 {
            p.push("walk.local_*: needs horizons, h > 0 and replicas > 0".into());
        }
        if w.big_jump_n < 2 || w.big_jump_replicas == 0 || !(w.big_jump_window > 0.0) {
            p.push("walk.big_jump_*: needs n >= 2, replicas > 0 and a positive window".into());
        }
        let t = &self.thermo;
        if t.horizons.is_empty() || t.horizons.iter().any(|&n| n == 0 || n > MAX_HORIZON) {
            p.push(format!("thermo.horizons: values must lie in 1..={MAX_HORIZON}"));
        }
        if t.replicas == 0 {
            p.push("thermo.replicas: must be positive".into());
        }
        if t.gibbs_betas.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            p.push("thermo.gibbs_betas: must be positive".into());
        }
        if self.big_jump.late_window == 0 {
            p.push("big_jump.late_window: must be positive".into());
        }
        if !(self.determinism_scale > 0.0 && self.determinism_scale <= 1.0) {
            p.push("determinism_scale: must lie in (0, 1]".into());
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p.join("; ")))
        }
    }

    /// Copy with every replica and sample count multiplied by `f` (at least
    /// 2 each), for quick end-to-end runs.
    pub fn scaled(&self, f: f64) -> Self {
        let sc = |r: usize| ((r as f64 * f).round() as usize).max(2);
        let mut c = self.clone();
        c.replicas = c.replicas.iter().map(|&r| sc(r)).collect();
        c.tail.bootstrap_resamples = sc(c.tail.bootstrap_resamples);
        c.limit.bootstrap_resamples = sc(c.limit.bootstrap_resamples);
        c.martingale.replicas = sc(c.martingale.replicas);
        c.martingale.fixed_point_samples = sc(c.martingale.fixed_point_samples);
        c.many_to_one.replicas = sc(c.many_to_one.replicas);
        c.spine.target_ess = sc(c.spine.target_ess);
        c.spine.max_raw = sc(c.spine.max_raw);
        c.spine.series_replicas = sc(c.spine.series_replicas);
        c.walk.renewal_replicas = sc(c.walk.renewal_replicas);
        c.walk.local_replicas = sc(c.walk.local_replicas);
        c.walk.big_jump_replicas = sc(c.walk.big_jump_replicas);
        c.thermo.replicas = sc(c.thermo.replicas);
        c
    }
}
