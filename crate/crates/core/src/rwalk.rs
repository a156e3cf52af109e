//! The one-dimensional walk `S_n` with i.i.d. increments of the spine law.

use serde::{Deserialize, Serialize};

use crate::engine::{fmt_opt_f64, fmt_opt_usize};
use crate::error::{domain, Result};
use crate::laws::{zeta_n, DisplacementSpec};
use crate::parallel::par_map_indexed;
use crate::seed::{derive_seed, rng_from_seed, task, SimRng};
use crate::stats::median;
use crate::sum::mean_stderr;

/// Increment law of a walk.
pub trait StepLaw: Sync {
    fn sample_step(&self, rng: &mut SimRng) -> f64;
    fn mean_step(&self) -> f64;
}

impl StepLaw for DisplacementSpec {
    #[inline]
    fn sample_step(&self, rng: &mut SimRng) -> f64 {
        self.sample_x(rng)
    }

    fn mean_step(&self) -> f64 {
        self.m()
    }
}

/// Simple increment laws for checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestStep {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
}

impl StepLaw for TestStep {
    fn sample_step(&self, rng: &mut SimRng) -> f64 {
        use rand::Rng;
        match *self {
            TestStep::Constant(c) => c,
            TestStep::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }

    fn mean_step(&self) -> f64 {
        match *self {
            TestStep::Constant(c) => c,
            TestStep::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkPath {
    pub start: f64,
    /// `S_0, ..., S_n`.
    pub positions: Vec<f64>,
    /// `X_1, ..., X_n`.
    pub increments: Vec<f64>,
}

fn walk_with<L: StepLaw + ?Sized>(law: &L, n: usize, rng: &mut SimRng) -> WalkPath {
    let mut positions = Vec::with_capacity(n + 1);
    let mut increments = Vec::with_capacity(n);
    let mut s = 0.0;
    positions.push(s);
    for _ in 0..n {
        let x = law.sample_step(rng);
        s += x;
        increments.push(x);
        positions.push(s);
    }
    WalkPath {
        start: 0.0,
        positions,
        increments,
    }
}

pub fn simulate_walk<L: StepLaw + ?Sized>(law: &L, n: usize, seed: u64) -> WalkPath {
    walk_with(law, n, &mut rng_from_seed(seed))
}

/// First and second 1-based indices `j` with `X_j < -zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropTimes {
    pub tau: Option<usize>,
    pub tau2: Option<usize>,
}

pub fn drop_times(increments: &[f64], zeta: f64) -> Result<DropTimes> {
    if !(zeta > 0.0) {
        return Err(domain(format!("zeta must be positive (got {zeta})")));
    }
    let mut hits = increments
        .iter()
        .enumerate()
        .filter(|(_, &x)| x < -zeta)
        .map(|(j, _)| j + 1);
    Ok(DropTimes {
        tau: hits.next(),
        tau2: hits.next(),
    })
}

/// Which reading of the renewal plateau the estimate supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlateauReading {
    /// `R(x)/x -> m`.
    Mean,
    /// `R(x)/x -> 1/m`.
    InverseMean,
    /// `m = 1`: both readings coincide.
    Indistinguishable,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalEstimate {
    pub x_grid: Vec<f64>,
    pub r_values: Vec<f64>,
    pub ratios: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub replicas: usize,
    /// Replicas that hit the safety horizon; they are excluded.
    pub aborted: usize,
    pub horizon: u64,
    pub plateau: f64,
    pub reading: PlateauReading,
}

pub const RENEWAL_HORIZON: u64 = 10_000_000;
/// Relative tolerance used to match the plateau to `m` or `1/m`, and for the
/// stability of the last two ratios.
pub const PLATEAU_TOL: f64 = 0.1;

impl RenewalEstimate {
    /// Relative change of `R(x)/x` between the last two grid points.
    pub fn plateau_drift(&self) -> f64 {
        match self.ratios.as_slice() {
            [.., a, b] => (b / a - 1.0).abs(),
            _ => f64::NAN,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,R,R_over_x,stderr\n");
        for i in 0..self.x_grid.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.x_grid[i], self.r_values[i], self.ratios[i], self.stderrs[i]
            ));
        }
        s
    }
}

pub fn plateau_reading(plateau: f64, m: f64) -> PlateauReading {
    let close = |a: f64, b: f64| (a / b - 1.0).abs() <= PLATEAU_TOL;
    match (close(plateau, m), close(plateau, 1.0 / m)) {
        (true, true) => PlateauReading::Indistinguishable,
        (true, false) => PlateauReading::Mean,
        (false, true) => PlateauReading::InverseMean,
        (false, false) => PlateauReading::Neither,
    }
}

/// Counts, for each `x`, the indices `n >= 0` with `max_{k<=n} S_k <= x`:
/// this is the first time the walk exceeds `x`.
fn exceedance_counts<L: StepLaw + ?Sized>(
    law: &L,
    x_grid: &[f64],
    horizon: u64,
    rng: &mut SimRng,
) -> Option<Vec<f64>> {
    let mut counts = vec![0.0; x_grid.len()];
    let mut next = 0;
    let mut s = 0.0;
    let mut n = 0u64;
    while next < x_grid.len() {
        if n >= horizon {
            return None;
        }
        n += 1;
        s += law.sample_step(rng);
        while next < x_grid.len() && s > x_grid[next] {
            counts[next] = n as f64;
            next += 1;
        }
    }
    Some(counts)
}

pub fn renewal_r<L: StepLaw + ?Sized>(
    law: &L,
    x_grid: &[f64],
    replicas: usize,
    horizon: u64,
    root_seed: u64,
    threads: usize,
) -> Result<RenewalEstimate> {
    if x_grid.is_empty() || x_grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(domain("renewal grid must be nonempty, positive and finite"));
    }
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("renewal grid must be strictly increasing"));
    }
    if !(law.mean_step() > 0.0) {
        return Err(domain("renewal estimation needs positive drift"));
    }
    if replicas < 2 {
        return Err(domain("renewal estimation needs at least 2 replicas"));
    }
    let runs = par_map_indexed(threads, replicas, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::RENEWAL, r as u64));
        exceedance_counts(law, x_grid, horizon, &mut rng)
    });
    let aborted = runs.iter().filter(|r| r.is_none()).count();
    let done: Vec<Vec<f64>> = runs.into_iter().flatten().collect();
    if done.len() < 2 {
        return Err(domain(format!("{aborted} of {replicas} renewal replicas hit the horizon")));
    }
    let mut r_values = Vec::with_capacity(x_grid.len());
    let mut stderrs = Vec::with_capacity(x_grid.len());
    for i in 0..x_grid.len() {
        let col: Vec<f64> = done.iter().map(|c| c[i]).collect();
        let (m, se) = mean_stderr(&col);
        r_values.push(m);
        stderrs.push(se);
    }
    let ratios: Vec<f64> = r_values.iter().zip(x_grid).map(|(r, x)| r / x).collect();
    let plateau = *ratios.last().unwrap();
    Ok(RenewalEstimate {
        x_grid: x_grid.to_vec(),
        reading: plateau_reading(plateau, law.mean_step()),
        plateau,
        r_values,
        ratios,
        stderrs,
        replicas: done.len(),
        aborted,
        horizon,
    })
}

/// Minimum expected hit count for an unflagged local probability.
pub const MIN_LOCAL_HITS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProbEstimate {
    pub n: usize,
    pub y: f64,
    pub h: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub hits: usize,
    pub replicas: usize,
    pub flagged: bool,
}

/// Direct estimate of `P(S_n - y in [0, h])`.
pub fn local_prob<L: StepLaw + ?Sized>(
    law: &L,
    n: usize,
    y: f64,
    h: f64,
    replicas: usize,
    root_seed: u64,
    threads: usize,
) -> Result<LocalProbEstimate> {
    if !(h > 0.0) || !y.is_finite() {
        return Err(domain(format!("local probability needs h > 0 and finite y (h={h}, y={y})")));
    }
    if replicas == 0 {
        return Err(domain("local probability needs replicas > 0"));
    }
    let inside = par_map_indexed(threads, replicas, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::LOCAL_PROB, r as u64));
        let s: f64 = (0..n).fold(0.0, |s, _| s + law.sample_step(&mut rng));
        let d = s - y;
        d >= 0.0 && d <= h
    });
    let hits = inside.iter().filter(|&&b| b).count();
    let p = hits as f64 / replicas as f64;
    Ok(LocalProbEstimate {
        n,
        y,
        h,
        estimate: p,
        stderr: (p * (1.0 - p) / replicas as f64).sqrt(),
        hits,
        replicas,
        flagged: hits < MIN_LOCAL_HITS,
    })
}

/// `estimate * n^alpha / l(n)` for each horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledLocalProb {
    pub estimate: LocalProbEstimate,
    pub scaled: f64,
}

pub fn scaled_local_probs(
    spec: &DisplacementSpec,
    horizons: &[usize],
    y: f64,
    h: f64,
    replicas: usize,
    root_seed: u64,
    threads: usize,
) -> Result<Vec<ScaledLocalProb>> {
    horizons
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let seed = derive_seed(root_seed, task::LOCAL_PROB, 1 << 40 | i as u64);
            let estimate = local_prob(spec, n, y, h, replicas, seed, threads)?;
            let nf = n as f64;
            Ok(ScaledLocalProb {
                scaled: estimate.estimate * nf.powf(spec.alpha()) / spec.slowvar().value(nf),
                estimate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigJumpQuery {
    pub n: usize,
    pub x: f64,
    /// Window below `alpha_n - x` that the walk may not leave after `tau`.
    pub window: f64,
    pub alpha_n: f64,
    pub replicas: usize,
}

pub const BIG_JUMP_WINDOW: f64 = 10.0;
pub const MIN_BIG_JUMP_HITS: usize = 100;

impl BigJumpQuery {
    pub fn for_spec(spec: &DisplacementSpec, n: usize, x: f64, replicas: usize) -> Self {
        BigJumpQuery {
            n,
            x,
            window: BIG_JUMP_WINDOW,
            alpha_n: spec.alpha_n(n as u64),
            replicas,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigJumpRow {
    pub replica: usize,
    pub tau: Option<usize>,
    pub tau2: Option<usize>,
    pub jump_over_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigJumpProfile {
    pub query: BigJumpQuery,
    pub zeta: f64,
    pub hits: usize,
    pub one_drop_fraction: f64,
    pub second_drop_fraction: f64,
    /// Median of `n - tau` over hits with a drop.
    pub median_gap: Option<f64>,
    pub median_jump_over_n: Option<f64>,
    pub inconclusive: bool,
    pub rows: Vec<BigJumpRow>,
}

impl BigJumpProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("replica,tau,tau2,jump_over_n\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.replica,
                fmt_opt_usize(r.tau),
                fmt_opt_usize(r.tau2),
                fmt_opt_f64(r.jump_over_n)
            ));
        }
        s
    }
}

/// Walks conditioned on `S_n <= alpha_n - x` and
/// `min_{tau <= j <= n} S_j >= alpha_n - x - window` (vacuous when no drop
/// occurs), by rejection.
pub fn big_jump_profile<L: StepLaw + ?Sized>(
    law: &L,
    query: &BigJumpQuery,
    root_seed: u64,
    threads: usize,
) -> Result<BigJumpProfile> {
    let BigJumpQuery {
        n,
        x,
        window,
        alpha_n,
        replicas,
    } = *query;
    if n < 2 {
        return Err(domain("big-jump profile needs n >= 2"));
    }
    if !(window > 0.0) || !x.is_finite() || !alpha_n.is_finite() {
        return Err(domain("big-jump profile needs a positive window and finite levels"));
    }
    let zeta = zeta_n(n as u64)?;
    let level = alpha_n - x;
    let rows = par_map_indexed(threads, replicas, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::BIG_JUMP, r as u64));
        let path = walk_with(law, n, &mut rng);
        if path.positions[n] > level {
            return None;
        }
        let drops = drop_times(&path.increments, zeta).expect("zeta > 0");
        if let Some(t) = drops.tau {
            let low = path.positions[t..].iter().copied().fold(f64::INFINITY, f64::min);
            if low < level - window {
                return None;
            }
        }
        Some(BigJumpRow {
            replica: r,
            tau: drops.tau,
            tau2: drops.tau2,
            jump_over_n: drops.tau.map(|t| path.increments[t - 1] / n as f64),
        })
    });
    let rows: Vec<BigJumpRow> = rows.into_iter().flatten().collect();
    let hits = rows.len();
    let frac = |f: &dyn Fn(&BigJumpRow) -> bool| {
        if hits == 0 {
            f64::NAN
        } else {
            rows.iter().filter(|r| f(r)).count() as f64 / hits as f64
        }
    };
    let one_drop_fraction = frac(&|r| r.tau.is_some() && r.tau2.is_none());
    let second_drop_fraction = frac(&|r| r.tau2.is_some());
    let gaps: Vec<f64> = rows.iter().filter_map(|r| r.tau.map(|t| (n - t) as f64)).collect();
    let jumps: Vec<f64> = rows.iter().filter_map(|r| r.jump_over_n).collect();
    Ok(BigJumpProfile {
        query: *query,
        zeta,
        hits,
        one_drop_fraction,
        second_drop_fraction,
        median_gap: median(&gaps),
        median_jump_over_n: median(&jumps),
        inconclusive: hits < MIN_BIG_JUMP_HITS,
        rows,
    })
}
