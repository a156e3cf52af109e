//! Empirical distributions, KS distances, tail and limit-law fits.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{sample_martingale, BrwParams};
use crate::error::{domain, Error, Result};
use crate::parallel::par_map_indexed;
use crate::seed::{derive_seed, rng_from_seed, task};
use crate::sum::CompensatedSum;

/// Empirical CDF `x -> #{samples <= x} / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

pub fn ecdf(samples: &[f64]) -> Result<Ecdf> {
    if samples.is_empty() {
        return Err(domain("ECDF of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(domain("ECDF input contains NaN"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ecdf { sorted })
}

impl Ecdf {
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `(x, F(x))` at every distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = (i + 1) as f64 / n,
                _ => out.push((x, (i + 1) as f64 / n)),
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,F\n");
        for (x, f) in self.steps() {
            s.push_str(&format!("{x},{f}\n"));
        }
        s
    }
}

fn check_sample(name: &str, xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(domain(format!("{name}: empty sample")));
    }
    if xs.iter().any(|x| x.is_nan()) {
        return Err(domain(format!("{name}: sample contains NaN")));
    }
    Ok(())
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    check_sample("first sample", a)?;
    check_sample("second sample", b)?;
    let wa: Vec<(f64, f64)> = a.iter().map(|&x| (x, 1.0)).collect();
    ks_weighted_two_sample(&wa, b)
}

/// KS distance between a weighted sample `(x, w)` and an unweighted one.
pub fn ks_weighted_two_sample(a: &[(f64, f64)], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("KS distance of an empty sample"));
    }
    if a.iter().any(|p| p.0.is_nan() || !(p.1 >= 0.0) || !p.1.is_finite()) || b.iter().any(|x| x.is_nan()) {
        return Err(domain("KS input contains NaN or invalid weights"));
    }
    let total: f64 = a.iter().map(|p| p.1).collect::<CompensatedSum>().value();
    if !(total > 0.0) {
        return Err(domain("weighted sample has zero total weight"));
    }
    let mut a = a.to_vec();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut b = b.to_vec();
    b.sort_by(f64::total_cmp);
    let nb = b.len() as f64;
    let (mut i, mut j) = (0, 0);
    let mut fa = CompensatedSum::new();
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(p), Some(&q)) => p.0.min(q),
            (Some(p), None) => p.0,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i].0 == x {
            fa.add(a[i].1);
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((fa.value() / total - j as f64 / nb).abs());
    }
    Ok(d.min(1.0))
}

/// One-sample KS distance against a continuous or discrete CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(a: &[f64], cdf: F) -> Result<f64> {
    check_sample("sample", a)?;
    let e = ecdf(a)?;
    let mut d: f64 = 0.0;
    let mut below = 0.0;
    for (x, f) in e.steps() {
        let c = cdf(x);
        let c_left = cdf(prev_float(x));
        d = d.max((f - c).abs()).max((below - c_left).abs());
        below = f;
    }
    Ok(d.min(1.0))
}

fn prev_float(x: f64) -> f64 {
    if x.is_infinite() {
        return x;
    }
    if x == 0.0 {
        return -f64::from_bits(1);
    }
    let bits = x.to_bits();
    f64::from_bits(if x > 0.0 { bits - 1 } else { bits + 1 })
}

/// Sample median (mean of the two middle values for even sizes).
pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() || xs.iter().any(|x| x.is_nan()) {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

/// Minimum hits before a grid point enters the tail regression.
pub const MIN_TAIL_HITS: usize = 30;
pub const MIN_TAIL_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub x_window: [f64; 2],
    pub slope: f64,
    pub intercept: f64,
    pub cstar_tail: f64,
    pub r2: f64,
    pub stderr_slope: f64,
    /// Grid points used, with their probability estimates and hit counts.
    pub points: Vec<TailPoint>,
    pub dropped: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailPoint {
    pub x: f64,
    pub p: f64,
    pub hits: usize,
}

/// OLS of `ln p` against `x` over the given points.
pub fn fit_log_linear(points: &[TailPoint]) -> Result<TailFit> {
    let used: Vec<TailPoint> = points.iter().copied().filter(|p| p.hits >= MIN_TAIL_HITS).collect();
    let dropped: Vec<f64> = points.iter().filter(|p| p.hits < MIN_TAIL_HITS).map(|p| p.x).collect();
    if used.len() < MIN_TAIL_POINTS {
        return Err(Error::Insufficient(format!(
            "tail fit needs {MIN_TAIL_POINTS} grid points with >= {MIN_TAIL_HITS} hits, got {}",
            used.len()
        )));
    }
    if used.iter().any(|p| !(p.p > 0.0)) {
        return Err(domain("tail probabilities must be positive"));
    }
    let k = used.len() as f64;
    let mx = used.iter().map(|p| p.x).sum::<f64>() / k;
    let my = used.iter().map(|p| p.p.ln()).sum::<f64>() / k;
    let sxx: f64 = used.iter().map(|p| (p.x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(domain("tail grid points coincide"));
    }
    let sxy: f64 = used.iter().map(|p| (p.x - mx) * (p.p.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = used
        .iter()
        .map(|p| (p.p.ln() - intercept - slope * p.x).powi(2))
        .sum();
    let syy: f64 = used.iter().map(|p| (p.p.ln() - my).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr_slope = if used.len() > 2 {
        (sse / (k - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let lo = used.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let hi = used.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    Ok(TailFit {
        x_window: [lo, hi],
        slope,
        intercept,
        cstar_tail: intercept.exp(),
        r2,
        stderr_slope,
        points: used,
        dropped,
    })
}

/// `P(M <= alpha_n - x)` at each grid point, over all samples (extinct trees
/// enter as `+inf`).
pub fn tail_points(m_samples: &[f64], alpha_n: f64, x_grid: &[f64]) -> Result<Vec<TailPoint>> {
    if m_samples.is_empty() {
        return Err(domain("tail fit of an empty sample"));
    }
    if m_samples.iter().any(|x| x.is_nan()) {
        return Err(domain("tail sample contains NaN"));
    }
    let mut sorted = m_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(x_grid
        .iter()
        .map(|&x| {
            let hits = sorted.partition_point(|&m| m <= alpha_n - x);
            TailPoint {
                x,
                p: hits as f64 / n,
                hits,
            }
        })
        .collect())
}

pub fn tail_fit(m_samples: &[f64], alpha_n: f64, x_grid: &[f64]) -> Result<TailFit> {
    fit_log_linear(&tail_points(m_samples, alpha_n, x_grid)?)
}

/// Percentile bootstrap interval for `cstar_tail`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInterval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub resamples: usize,
    pub refused: usize,
}

pub fn bootstrap_cstar_tail(
    m_samples: &[f64],
    alpha_n: f64,
    x_grid: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapInterval> {
    if resamples == 0 || !(level > 0.0 && level < 1.0) {
        return Err(domain("bootstrap needs resamples > 0 and a level in (0,1)"));
    }
    let n = m_samples.len();
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(resamples);
    let mut refused = 0;
    let mut buf = vec![0.0; n];
    for _ in 0..resamples {
        for b in buf.iter_mut() {
            *b = m_samples[rng.random_range(0..n)];
        }
        match tail_fit(&buf, alpha_n, x_grid) {
            Ok(f) => values.push(f.cstar_tail),
            Err(_) => refused += 1,
        }
    }
    if values.is_empty() {
        return Err(Error::Insufficient("every bootstrap resample was refused".into()));
    }
    values.sort_by(f64::total_cmp);
    let q = |p: f64| values[((p * (values.len() - 1) as f64).round() as usize).min(values.len() - 1)];
    let a = (1.0 - level) / 2.0;
    Ok(BootstrapInterval {
        level,
        lo: q(a),
        hi: q(1.0 - a),
        resamples,
        refused,
    })
}

/// `E[exp(-c e^x W)]` over the given `W` samples.
pub fn limit_cdf(cstar: f64, x: f64, w_samples: &[f64]) -> f64 {
    if w_samples.is_empty() {
        return f64::NAN;
    }
    let t = cstar * x.exp();
    let s: CompensatedSum = w_samples
        .iter()
        .map(|&w| if w == 0.0 || t == 0.0 { 1.0 } else { (-t * w).exp() })
        .collect();
    s.value() / w_samples.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitFit {
    pub cstar_fit: f64,
    pub ks_at_fit: f64,
    pub samples: usize,
    pub w_samples: usize,
    pub c_grid: [f64; 2],
}

/// Laplace transform `t -> mean exp(-t w)` tabulated on a log grid of `t`.
struct LaplaceTable {
    log_t0: f64,
    step: f64,
    values: Vec<f64>,
    zero_mass: f64,
}

impl LaplaceTable {
    const POINTS: usize = 4001;
    const LOG_T_MIN: f64 = -30.0;
    const LOG_T_MAX: f64 = 30.0;

    fn new(w: &[f64]) -> Self {
        let step = (Self::LOG_T_MAX - Self::LOG_T_MIN) / (Self::POINTS - 1) as f64;
        let values = (0..Self::POINTS)
            .map(|i| limit_cdf((Self::LOG_T_MIN + step * i as f64).exp(), 0.0, w))
            .collect();
        let zero_mass = w.iter().filter(|&&x| x == 0.0).count() as f64 / w.len() as f64;
        Self {
            log_t0: Self::LOG_T_MIN,
            step,
            values,
            zero_mass,
        }
    }

    fn eval_log(&self, log_t: f64) -> f64 {
        let u = (log_t - self.log_t0) / self.step;
        if u <= 0.0 {
            return 1.0 - (1.0 - self.values[0]) * (log_t - self.log_t0).exp();
        }
        let last = self.values.len() - 1;
        if u >= last as f64 {
            return self.zero_mass;
        }
        let i = u.floor() as usize;
        let f = u - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Fits `c` in `P(Y >= x) = E[exp(-c e^x W)]` for `Y = M_n - alpha_n` by
/// minimizing the KS distance over a log grid of `c`, refined by golden
/// section. Extinct trees enter as `Y = +inf` paired with `W = 0`.
pub fn fit_cstar_limit(m_minus_alpha: &[f64], w_samples: &[f64]) -> Result<LimitFit> {
    check_sample("M_n - alpha_n", m_minus_alpha)?;
    check_sample("W", w_samples)?;
    if w_samples.iter().any(|&w| w < 0.0) {
        return Err(domain("W samples must be nonnegative"));
    }
    if w_samples.iter().all(|&w| w == 0.0) {
        return Err(domain(
            "all W samples are zero (extinct trees only); the limit law needs survivors",
        ));
    }
    let finite: Vec<f64> = m_minus_alpha.iter().copied().filter(|x| x.is_finite()).collect();
    if finite.len() < 2 || finite.iter().all(|&x| x == finite[0]) {
        return Err(domain("M_n - alpha_n samples are degenerate"));
    }
    let table = LaplaceTable::new(w_samples);
    let e = ecdf(m_minus_alpha)?;
    let steps: Vec<(f64, f64)> = e.steps().into_iter().filter(|s| s.0.is_finite()).collect();
    let ks = |log_c: f64| -> f64 {
        // Model CDF of Y at x is 1 - L(c e^x); compare on both sides of each jump.
        let mut d: f64 = 0.0;
        let mut below = 0.0;
        for &(x, f) in &steps {
            let model = 1.0 - table.eval_log(log_c + x);
            d = d.max((f - model).abs()).max((below - model).abs());
            below = f;
        }
        let upper = 1.0 - table.zero_mass;
        d.max((below - upper).abs())
    };
    let (lo, hi) = (1e-4f64.ln(), 1e6f64.ln());
    let grid = 400;
    let h = (hi - lo) / grid as f64;
    let mut best = (lo, ks(lo));
    for i in 1..=grid {
        let lc = lo + h * i as f64;
        let v = ks(lc);
        if v < best.1 {
            best = (lc, v);
        }
    }
    let (mut a, mut b) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (ks(c), ks(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ks(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ks(d);
        }
    }
    let (lc, v) = if fc < fd { (c, fc) } else { (d, fd) };
    let (lc, v) = if v < best.1 { (lc, v) } else { best };
    Ok(LimitFit {
        cstar_fit: lc.exp(),
        ks_at_fit: v,
        samples: m_minus_alpha.len(),
        w_samples: w_samples.len(),
        c_grid: [lo.exp(), hi.exp()],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub n0: usize,
    pub samples: usize,
    pub ks: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub const FIXED_POINT_KS_THRESHOLD: f64 = 0.02;
pub const FIXED_POINT_MIN_N0: usize = 6;

/// Compares `W_{n0}` with `sum_{|u|=1} e^{-V(u)} W_{n0}^{(u)}` built from a
/// fresh family and independent copies. Replica `r` of each side uses its own
/// derived stream.
pub fn fixed_point_check(params: &BrwParams, samples: usize, root_seed: u64, threads: usize) -> Result<FixedPointReport> {
    let n0 = params.horizon_n;
    if n0 < FIXED_POINT_MIN_N0 {
        return Err(domain(format!("fixed-point check needs n0 >= {FIXED_POINT_MIN_N0} (got {n0})")));
    }
    if samples == 0 {
        return Err(domain("fixed-point check needs samples > 0"));
    }
    let direct = par_map_indexed(threads, samples, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::FIXED_POINT, 2 * r as u64));
        sample_martingale(params, &mut rng)
    });
    let assembled = par_map_indexed(threads, samples, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::FIXED_POINT, 2 * r as u64 + 1));
        let k = params.law.sample_offspring(&mut rng);
        let disps: Vec<f64> = (0..k).map(|_| params.law.sample_child(&mut rng)).collect();
        let mut acc = CompensatedSum::new();
        for d in disps {
            acc.add((-d).exp() * sample_martingale(params, &mut rng)?);
        }
        Ok(acc.value())
    });
    let direct = direct.into_iter().collect::<Result<Vec<f64>>>()?;
    let assembled = assembled.into_iter().collect::<Result<Vec<f64>>>()?;
    let ks = ks_two_sample(&direct, &assembled)?;
    Ok(FixedPointReport {
        n0,
        samples,
        ks,
        threshold: FIXED_POINT_KS_THRESHOLD,
        passed: ks < FIXED_POINT_KS_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Exp1};

    #[test]
    fn ks_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[0.5]).unwrap(), 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ecdf(&[]).is_err());
    }

    #[test]
    fn ks_is_symmetric() {
        let a = [0.3, 1.2, -0.4, 2.2, 0.3];
        let b = [0.1, 0.3, 5.0];
        assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&b, &a).unwrap());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn ecdf_steps_and_eval() {
        let e = ecdf(&[2.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.eval(0.5), 0.0);
        assert_eq!(e.eval(2.0), 0.75);
        assert_eq!(e.steps(), vec![(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
        assert!(e.to_csv().starts_with("x,F\n1,0.25\n"));
    }

    #[test]
    fn one_sample_ks_uniform() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
        // Point mass against its own CDF.
        let d = ks_one_sample(&[1.0; 5], |x| if x >= 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(d, 0.0);
    }

    fn synthetic(c: f64, slope: f64) -> Vec<TailPoint> {
        [1.5, 2.0, 2.5, 3.0, 3.5]
            .iter()
            .map(|&x| TailPoint {
                x,
                p: c * (slope * x).exp(),
                hits: 1000,
            })
            .collect()
    }

    #[test]
    fn tail_fit_exact_exponential() {
        let f = fit_log_linear(&synthetic(0.4, -1.0)).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-12);
        assert!((f.cstar_tail - 0.4).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let f = fit_log_linear(&synthetic(1.0, -2.0)).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
    }

    #[test]
    fn tail_fit_drops_thin_points() {
        let mut pts = synthetic(0.4, -1.0);
        pts[4].hits = 29;
        let f = fit_log_linear(&pts).unwrap();
        assert_eq!(f.points.len(), 4);
        assert_eq!(f.dropped, vec![3.5]);
        pts[3].hits = 3;
        pts[2].hits = 0;
        assert!(matches!(fit_log_linear(&pts), Err(Error::Insufficient(_))));
    }

    #[test]
    fn tail_points_count_extinct_as_misses() {
        let m = [0.0, 1.0, 2.0, f64::INFINITY];
        let pts = tail_points(&m, 3.0, &[1.0, 2.5]).unwrap();
        assert_eq!(pts[0].hits, 3);
        assert_eq!(pts[0].p, 0.75);
        assert_eq!(pts[1].hits, 1);
    }

    #[test]
    fn limit_cdf_examples() {
        assert_eq!(limit_cdf(0.0, 3.0, &[1.0, 2.0]), 1.0);
        assert!((limit_cdf(0.7, 0.4, &[1.0]) - (-0.7 * 0.4f64.exp()).exp()).abs() < 1e-15);
        let v = limit_cdf(1.0, 0.0, &[0.0, 2.0]);
        assert!((v - 0.567_667_641_618_306_4).abs() < 1e-15);
    }

    #[test]
    fn limit_cdf_monotone() {
        let w = [0.0, 0.3, 1.1, 2.5];
        let mut prev = 1.0;
        for i in -40..40 {
            let v = limit_cdf(0.4, i as f64 * 0.2, &w);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        let mut prev = 1.0;
        for i in 0..40 {
            let v = limit_cdf(i as f64 * 0.1, 0.5, &w);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn limit_fit_recovers_synthetic_constant() {
        let c0 = 0.4;
        let mut rng = rng_from_seed(11);
        let w: Vec<f64> = (0..100_000)
            .map(|i| if i % 10 == 0 { 0.0 } else { Exp1.sample(&mut rng) })
            .collect();
        let y: Vec<f64> = w
            .iter()
            .map(|&wi| {
                if wi == 0.0 {
                    f64::INFINITY
                } else {
                    let e: f64 = Exp1.sample(&mut rng);
                    (e / (c0 * wi)).ln()
                }
            })
            .collect();
        let fit = fit_cstar_limit(&y, &w).unwrap();
        assert!((fit.cstar_fit / c0 - 1.0).abs() < 0.1, "{fit:?}");
        assert!(fit.ks_at_fit < 0.01);
    }

    #[test]
    fn limit_fit_refuses_degenerate_input() {
        assert!(fit_cstar_limit(&[1.0, 2.0], &[0.0, 0.0]).is_err());
        assert!(fit_cstar_limit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn fixed_point_degenerate_law_fails() {
        let law = crate::laws::BranchingLaw::point_mass(1, 0.5).unwrap();
        let params = BrwParams::new(law, 6).unwrap();
        let r = fixed_point_check(&params, 50, 1, 1).unwrap();
        assert_eq!(r.ks, 1.0);
        assert!(!r.passed);
        let params = BrwParams::new(crate::laws::BranchingLaw::default(), 5).unwrap();
        assert!(fixed_point_check(&params, 10, 1, 1).is_err());
    }

    #[test]
    fn bootstrap_contains_point_estimate() {
        let mut rng = rng_from_seed(12);
        let m: Vec<f64> = (0..5000).map(|_| Exp1.sample(&mut rng)).collect();
        let grid = [-1.0, -0.5, 0.0];
        let fit = tail_fit(&m, 2.0, &grid).unwrap();
        let ci = bootstrap_cstar_tail(&m, 2.0, &grid, 1000, 0.95, 13).unwrap();
        assert!(ci.lo <= fit.cstar_tail && fit.cstar_tail <= ci.hi, "{ci:?} {}", fit.cstar_tail);
    }
}
