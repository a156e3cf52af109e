//! Spine decomposition under the size-biased measure `Q`.
//!
//! Two samplers are provided. [`sample_spine_family`] is the weighted form:
//! one first-generation family drawn under `P`, one contribution per
//! candidate spine child with weight `e^{-xi_i}`. [`sample_spine_step`] draws
//! a `Q`-step directly, using the fact that for i.i.d. displacements the
//! spine increment has the tilted law and its siblings are an independent
//! size-biased family.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{traverse, PopulationCaps, Visitor};
use crate::error::{domain, Error, Result};
use crate::laws::BranchingLaw;
use crate::parallel::par_map_indexed;
use crate::seed::{derive_seed, rng_from_seed, task};
use crate::stats::ks_weighted_two_sample;
use crate::sum::{mean_stderr, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpineStep {
    pub spine_disp: f64,
    pub sibling_disps: Vec<f64>,
    pub weight: f64,
}

/// One `P`-family, returned as its candidate spine contributions.
/// An empty family yields no contribution.
pub fn sample_spine_family<R: Rng + ?Sized>(law: &BranchingLaw, rng: &mut R) -> Vec<SpineStep> {
    let k = law.sample_offspring(rng) as usize;
    let disps: Vec<f64> = (0..k).map(|_| law.sample_child(rng)).collect();
    (0..k)
        .map(|i| SpineStep {
            spine_disp: disps[i],
            sibling_disps: disps
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &d)| d)
                .collect(),
            weight: (-disps[i]).exp(),
        })
        .collect()
}

/// One step drawn exactly under `Q`. The weight is `E[W_1]`, which is 1 for
/// a normalized law.
pub fn sample_spine_step<R: Rng + ?Sized>(law: &BranchingLaw, rng: &mut R) -> SpineStep {
    let spine_disp = law.sample_spine_displacement(rng);
    let k = law.sample_spine_siblings(rng);
    let sibling_disps = (0..k).map(|_| law.sample_child(rng)).collect();
    SpineStep {
        spine_disp,
        sibling_disps,
        weight: law.mean_w1(),
    }
}

/// `W_1 prod_j g/q(xi_j)` of one proposed family, evaluated as
/// `sum_i e^{-xi_i} g/q(xi_i) prod_{j != i} g/q(xi_j)` so that a far-left
/// displacement cannot overflow `W_1`. `laplace` is `E[e^{-xi}]` per child.
fn family_weight(disps: &[f64], eps: f64, laplace: f64, ratios: &mut Vec<f64>) -> f64 {
    if eps == 0.0 {
        return disps.iter().map(|d| (-d).exp()).sum();
    }
    ratios.clear();
    ratios.extend(disps.iter().map(|&d| 1.0 / ((1.0 - eps) + eps * (-d).exp() / laplace)));
    (0..disps.len())
        .map(|i| {
            let others: f64 = (0..disps.len()).filter(|&j| j != i).map(|j| ratios[j]).product();
            others / ((1.0 - eps) * disps[i].exp() + eps / laplace)
        })
        .sum()
}

/// Probability of drawing a child displacement from the spine law instead of
/// the child law in [`weighted_spine_position`].
pub const DEFENSIVE_MIX: f64 = 0.4;

/// Weighted draw of `V(w_n)`. Each generation is one family: its size is
/// proposed from the size-biased offspring law and its displacements from
/// `q = (1-eps) g + eps g_spine` (`g` the child law). The spine child is
/// selected with probability `e^{-xi_i}/W_1` and the weight picks up
/// `W_1 (E[nu]/nu) prod_j g(xi_j)/q(xi_j)`. Plain `W_1` weighting of
/// `P`-families has infinite second moment for heavy spine laws; the mixture
/// keeps `e^{-xi} g/q <= E[e^{-xi}]/eps`.
fn weighted_spine_position<R: Rng + ?Sized>(
    law: &BranchingLaw,
    n: usize,
    eps: f64,
    rng: &mut R,
) -> (f64, f64) {
    let laplace = law.mean_w1() / law.offspring().mean();
    let mean_nu = law.offspring().mean();
    let mut pos = 0.0;
    let mut weight = 1.0;
    let mut disps = Vec::new();
    let mut cum = Vec::new();
    let mut ratios = Vec::new();
    for _ in 0..n {
        let k = law.sample_spine_siblings(rng) as usize + 1;
        disps.clear();
        for _ in 0..k {
            let d = if eps > 0.0 && rng.random::<f64>() < eps {
                law.sample_spine_displacement(rng)
            } else {
                law.sample_child(rng)
            };
            disps.push(d);
        }
        let dmin = disps.iter().copied().fold(f64::INFINITY, f64::min);
        cum.clear();
        let mut acc = 0.0;
        for &d in &disps {
            acc += (dmin - d).exp();
            cum.push(acc);
        }
        let u = rng.random::<f64>() * acc;
        let i = cum.partition_point(|&c| c <= u).min(k - 1);
        pos += disps[i];

        let family = family_weight(&disps, eps, laplace, &mut ratios);
        weight *= family * mean_nu / k as f64;
    }
    (pos, weight)
}

/// Outcome of [`spine_marginal_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpineMarginalReport {
    pub n: usize,
    pub ks: f64,
    pub effective_samples: f64,
    pub raw_samples: usize,
    pub direct_samples: usize,
    pub threshold: f64,
    pub passed: bool,
    pub inconclusive: bool,
}

pub const SPINE_KS_THRESHOLD: f64 = 0.01;
pub const MIN_EFFECTIVE_SAMPLES: f64 = 1e3;
pub const MAX_SPINE_HORIZON: usize = 12;
const SPINE_CHUNK: usize = 1 << 16;

/// Kish effective sample size `(sum w)^2 / sum w^2`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: CompensatedSum = weights.iter().copied().collect();
    let s2: CompensatedSum = weights.iter().map(|w| w * w).collect();
    if s2.value() > 0.0 {
        s.value() * s.value() / s2.value()
    } else {
        0.0
    }
}

/// Compares the weighted law of `V(w_n)` with `target_ess` direct draws of
/// the walk `S_n`. Weighted samples are added in fixed chunks until the
/// effective sample size reaches `target_ess` or `max_raw` draws were made.
pub fn spine_marginal_check(
    law: &BranchingLaw,
    n: usize,
    eps: f64,
    target_ess: usize,
    max_raw: usize,
    root_seed: u64,
    threads: usize,
) -> Result<SpineMarginalReport> {
    if n > MAX_SPINE_HORIZON {
        return Err(domain(format!(
            "weighted spine sampling supports n <= {MAX_SPINE_HORIZON} (got {n})"
        )));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(domain(format!("mixture weight must lie in [0,1) (got {eps})")));
    }
    if target_ess == 0 {
        return Err(domain("target effective sample size must be positive"));
    }
    let mut weighted: Vec<(f64, f64)> = Vec::new();
    let mut ess = 0.0;
    while weighted.len() < max_raw && ess < target_ess as f64 {
        let start = weighted.len();
        let len = SPINE_CHUNK.min(max_raw - start);
        let chunk = par_map_indexed(threads, len, |i| {
            let seed = derive_seed(root_seed, task::SPINE_MARGINAL, (start + i) as u64);
            weighted_spine_position(law, n, eps, &mut rng_from_seed(seed))
        });
        weighted.extend(chunk);
        let w: Vec<f64> = weighted.iter().map(|p| p.1).collect();
        ess = effective_sample_size(&w);
    }
    let direct = par_map_indexed(threads, target_ess, |i| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::WALK_REFERENCE, i as u64));
        (0..n).fold(0.0, |s, _| s + law.sample_spine_displacement(&mut rng))
    });
    let ks = ks_weighted_two_sample(&weighted, &direct)?;
    let inconclusive = ess < MIN_EFFECTIVE_SAMPLES;
    Ok(SpineMarginalReport {
        n,
        ks,
        effective_samples: ess,
        raw_samples: weighted.len(),
        direct_samples: direct.len(),
        threshold: SPINE_KS_THRESHOLD,
        passed: !inconclusive && ks < SPINE_KS_THRESHOLD,
        inconclusive,
    })
}

/// Both sides of the many-to-one identity
/// `E[sum_{|u|=n} g(V(u_1..u_n))] = E[W_1]^n E_Q[e^{S_n} g(S_1..S_n)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManyToOneReport {
    pub n: usize,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
}

impl ManyToOneReport {
    /// `|lhs - rhs|` in units of the combined standard error.
    pub fn z_score(&self) -> f64 {
        let se = self.lhs_stderr.hypot(self.rhs_stderr);
        let diff = (self.lhs - self.rhs).abs();
        if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Path functionals used by the checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathFunctional {
    One,
    /// `1{min_k V(u_k) >= 0}`.
    MinNonNegative,
}

impl PathFunctional {
    pub fn eval(&self, path: &[f64]) -> f64 {
        match self {
            PathFunctional::One => 1.0,
            PathFunctional::MinNonNegative => {
                if path.iter().all(|&v| v >= 0.0) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

struct FunctionalVisitor<'a, G> {
    g: &'a G,
    buf: Vec<f64>,
    sum: CompensatedSum,
}

impl<G: Fn(&[f64]) -> f64> Visitor for FunctionalVisitor<'_, G> {
    fn node(&mut self, _depth: usize, _path: &[f64]) {}

    fn leaf(&mut self, _depth: usize, parent_path: &[f64], pos: f64) {
        self.buf.clear();
        self.buf.extend_from_slice(&parent_path[1..]);
        self.buf.push(pos);
        self.sum.add((self.g)(&self.buf));
    }
}

pub const MANY_TO_ONE_MAX_N: usize = 6;

pub fn many_to_one_check<G>(
    law: &BranchingLaw,
    n: usize,
    g: G,
    replicas: usize,
    root_seed: u64,
    threads: usize,
) -> Result<ManyToOneReport>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    if n == 0 || n > MANY_TO_ONE_MAX_N {
        return Err(domain(format!(
            "many-to-one check needs 1 <= n <= {MANY_TO_ONE_MAX_N} (got {n})"
        )));
    }
    if replicas < 2 {
        return Err(domain("many-to-one check needs at least 2 replicas"));
    }
    let cap = PopulationCaps::default().max_particles;
    let tree: Vec<Result<f64>> = par_map_indexed(threads, replicas, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::MANY_TO_ONE_TREE, r as u64));
        let mut v = FunctionalVisitor {
            g: &g,
            buf: Vec::with_capacity(n),
            sum: CompensatedSum::new(),
        };
        traverse(law, n, 0.0, cap, &mut rng, &mut v)?;
        Ok(v.sum.value())
    });
    let tree = tree.into_iter().collect::<Result<Vec<f64>>>()?;
    let growth = law.mean_w1().powi(n as i32);
    let walk = par_map_indexed(threads, replicas, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::MANY_TO_ONE_WALK, r as u64));
        let mut path = Vec::with_capacity(n);
        let mut s = 0.0;
        for _ in 0..n {
            s += law.sample_spine_displacement(&mut rng);
            path.push(s);
        }
        growth * s.exp() * g(&path)
    });
    let (lhs, lhs_stderr) = mean_stderr(&tree);
    let (rhs, rhs_stderr) = mean_stderr(&walk);
    Ok(ManyToOneReport {
        n,
        lhs,
        lhs_stderr,
        rhs,
        rhs_stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub j: usize,
    pub term: f64,
    pub stderr: f64,
}

/// Spine series for `c_*`. `j_terms[0]` is exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CstarEstimate {
    pub j_terms: Vec<SeriesTerm>,
    /// First `j` meeting the stopping rule, or `j_max` if none did.
    pub truncation_j: usize,
    pub truncated: bool,
    pub prefactor: f64,
    pub series_sum: f64,
    pub cstar: f64,
    pub stderr: f64,
    pub replicas: usize,
    pub aborted: usize,
}

/// Series settings. Terms are compared against
/// `max(tolerance, 2 stderr_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSettings {
    pub j_max: usize,
    pub replicas: usize,
    pub tolerance: f64,
    pub caps: PopulationCaps,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self {
            j_max: 12,
            replicas: 10_000,
            tolerance: 1e-3,
            caps: PopulationCaps::default(),
        }
    }
}

/// Tracks, for each absolute generation, the minimum over sibling subtrees
/// and how many nodes attain it.
struct GenerationMinVisitor<'a> {
    offset: usize,
    mins: &'a mut [f64],
    ties: &'a mut [u64],
}

impl GenerationMinVisitor<'_> {
    #[inline]
    fn record(&mut self, gen: usize, v: f64) {
        if v < self.mins[gen] {
            self.mins[gen] = v;
            self.ties[gen] = 1;
        } else if v == self.mins[gen] {
            self.ties[gen] += 1;
        }
    }
}

impl Visitor for GenerationMinVisitor<'_> {
    #[inline]
    fn node(&mut self, depth: usize, path: &[f64]) {
        self.record(self.offset + depth, path[depth]);
    }

    #[inline]
    fn leaf(&mut self, depth: usize, _parent_path: &[f64], pos: f64) {
        self.record(self.offset + depth, pos);
    }
}

/// One spine system of depth `j_max`: returns for every `j` the sample
/// `weight_j * 1{V(w_j) = M_j} / eta_j`.
fn spine_system_sample<R: Rng + ?Sized>(
    law: &BranchingLaw,
    j_max: usize,
    cap: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let steps: Vec<SpineStep> = (0..j_max).map(|_| sample_spine_step(law, rng)).collect();
    let mut spine = vec![0.0; j_max + 1];
    for (k, st) in steps.iter().enumerate() {
        spine[k + 1] = spine[k] + st.spine_disp;
    }
    let mut mins = vec![f64::INFINITY; j_max + 1];
    let mut ties = vec![0u64; j_max + 1];
    let mut visited = 0u64;
    for (k, st) in steps.iter().enumerate() {
        // Siblings of w_{k+1} live in generation k + 1.
        let gen = k + 1;
        for &d in &st.sibling_disps {
            let mut v = GenerationMinVisitor {
                offset: gen,
                mins: &mut mins,
                ties: &mut ties,
            };
            let remaining = cap.saturating_sub(visited);
            visited += traverse(law, j_max - gen, spine[k] + d, remaining, rng, &mut v)
                .map_err(|e| match e {
                    Error::Aborted { particles_visited, .. } => Error::Aborted {
                        particles_visited: visited + particles_visited,
                        cap,
                    },
                    other => other,
                })?;
        }
    }
    let mut out = Vec::with_capacity(j_max + 1);
    let mut weight = 1.0;
    for j in 0..=j_max {
        if j > 0 {
            weight *= steps[j - 1].weight;
        }
        let v = spine[j];
        let sample = if v < mins[j] {
            weight
        } else if v == mins[j] {
            weight / (1 + ties[j]) as f64
        } else {
            0.0
        };
        out.push(sample);
    }
    Ok(out)
}

/// Raw series `sum_j E_Q[1{V(w_j) = M_j} / eta_j]` without prefactor.
pub fn spine_series(law: &BranchingLaw, settings: &SeriesSettings, root_seed: u64, threads: usize) -> Result<CstarEstimate> {
    estimate_with_prefactor(law, settings, 1.0, root_seed, threads)
}

/// `c_* = m^{-(alpha+1)} sum_j E_Q[1{V(w_j) = M_j} / eta_j]` for the heavy
/// tailed law.
pub fn estimate_cstar_series(
    law: &BranchingLaw,
    settings: &SeriesSettings,
    root_seed: u64,
    threads: usize,
) -> Result<CstarEstimate> {
    let spec = law
        .displacement()
        .ok_or_else(|| domain("c_* series needs the heavy-tailed displacement law"))?;
    let prefactor = spec.m().powf(-(spec.alpha() + 1.0));
    estimate_with_prefactor(law, settings, prefactor, root_seed, threads)
}

fn estimate_with_prefactor(
    law: &BranchingLaw,
    settings: &SeriesSettings,
    prefactor: f64,
    root_seed: u64,
    threads: usize,
) -> Result<CstarEstimate> {
    let SeriesSettings {
        j_max,
        replicas,
        tolerance,
        caps,
    } = *settings;
    if j_max == 0 {
        return Err(domain("j_max must be at least 1"));
    }
    if replicas < 2 {
        return Err(domain("the series needs at least 2 replicas"));
    }
    if !(tolerance >= 0.0) {
        return Err(domain("tolerance must be nonnegative"));
    }
    let samples = par_map_indexed(threads, replicas, |r| {
        let mut rng = rng_from_seed(derive_seed(root_seed, task::CSTAR, r as u64));
        spine_system_sample(law, j_max, caps.max_particles, &mut rng)
    });
    let mut ok = Vec::with_capacity(replicas);
    let mut aborted = 0;
    for s in samples {
        match s {
            Ok(v) => ok.push(v),
            Err(Error::Aborted { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }
    if ok.len() < 2 {
        return Err(Error::Insufficient(format!(
            "only {} spine systems completed ({aborted} aborted)",
            ok.len()
        )));
    }
    let mut j_terms = Vec::with_capacity(j_max + 1);
    for j in 0..=j_max {
        let col: Vec<f64> = ok.iter().map(|v| v[j]).collect();
        let (term, stderr) = mean_stderr(&col);
        j_terms.push(SeriesTerm { j, term, stderr });
    }
    let totals: Vec<f64> = ok.iter().map(|v| v.iter().copied().collect::<CompensatedSum>().value()).collect();
    let (series_sum, series_se) = mean_stderr(&totals);
    let stop = j_terms
        .iter()
        .skip(1)
        .find(|t| t.term < tolerance.max(2.0 * t.stderr))
        .map(|t| t.j);
    Ok(CstarEstimate {
        truncation_j: stop.unwrap_or(j_max),
        truncated: stop.is_none(),
        prefactor,
        series_sum,
        cstar: prefactor * series_sum,
        stderr: prefactor * series_se,
        replicas: ok.len(),
        aborted,
        j_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_single_child_family() {
        let law = BranchingLaw::point_mass(1, 0.7).unwrap();
        let mut rng = rng_from_seed(1);
        let fam = sample_spine_family(&law, &mut rng);
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[0].weight, (-0.7f64).exp());
        assert!(fam[0].sibling_disps.is_empty());
    }

    #[test]
    fn family_weights_sum_to_w1() {
        let law = BranchingLaw::default();
        let mut rng = rng_from_seed(2);
        for _ in 0..200 {
            let fam = sample_spine_family(&law, &mut rng);
            let total: f64 = fam.iter().map(|s| s.weight).sum();
            let mut disps: Vec<f64> = fam.iter().map(|s| s.spine_disp).collect();
            let w1: f64 = disps.iter().map(|d| (-d).exp()).sum();
            assert!((total - w1).abs() <= 1e-12 * w1.max(1.0));
            for s in &fam {
                assert_eq!(s.sibling_disps.len() + 1, fam.len());
                let mut all = s.sibling_disps.clone();
                all.push(s.spine_disp);
                all.sort_by(f64::total_cmp);
                disps.sort_by(f64::total_cmp);
                assert_eq!(all, disps);
            }
        }
    }

    #[test]
    fn exact_step_has_unit_weight_for_normalized_law() {
        let law = BranchingLaw::default();
        let st = sample_spine_step(&law, &mut rng_from_seed(3));
        assert!((st.weight - 1.0).abs() < 1e-9);
    }

    #[test]
    fn marginal_at_zero_is_exact() {
        let law = BranchingLaw::default();
        let r = spine_marginal_check(&law, 0, DEFENSIVE_MIX, 2000, 10_000, 4, 1).unwrap();
        assert_eq!(r.ks, 0.0);
    }

    #[test]
    fn marginal_rejects_long_horizon() {
        assert!(spine_marginal_check(&BranchingLaw::default(), 13, DEFENSIVE_MIX, 10, 10, 0, 1).is_err());
    }

    #[test]
    fn point_mass_series_is_geometric() {
        let d = 0.5;
        let law = BranchingLaw::point_mass(1, d).unwrap();
        let settings = SeriesSettings {
            j_max: 6,
            replicas: 4,
            ..SeriesSettings::default()
        };
        let est = spine_series(&law, &settings, 5, 1).unwrap();
        for t in &est.j_terms {
            let expected = (-(t.j as f64) * d).exp();
            assert!((t.term - expected).abs() < 1e-12, "j={} {}", t.j, t.term);
            assert_eq!(t.stderr, 0.0);
        }
    }

    #[test]
    fn cstar_prefactor_and_first_term() {
        let law = BranchingLaw::default();
        let settings = SeriesSettings {
            j_max: 3,
            replicas: 200,
            ..SeriesSettings::default()
        };
        let est = estimate_cstar_series(&law, &settings, 6, 1).unwrap();
        assert!((est.prefactor - 279.508_497_187_473_7).abs() < 1e-9);
        assert_eq!(est.j_terms[0].term, 1.0);
        assert!(est.j_terms.iter().all(|t| t.term >= 0.0 && t.term <= 1.0 + 1e-9));
        assert!(est.cstar > 0.0 && est.cstar.is_finite());
    }

    #[test]
    fn cstar_needs_heavy_law() {
        let law = BranchingLaw::point_mass(2, 1.0).unwrap();
        assert!(estimate_cstar_series(&law, &SeriesSettings::default(), 0, 1).is_err());
    }

    #[test]
    fn many_to_one_point_mass_is_exact() {
        let law = BranchingLaw::point_mass(2, 0.3).unwrap();
        let r = many_to_one_check(&law, 3, |_| 1.0, 10, 7, 1).unwrap();
        assert_eq!(r.lhs, 8.0);
        assert!((r.rhs - 8.0).abs() < 1e-12);
    }

    #[test]
    fn many_to_one_rejects_bad_horizon() {
        let law = BranchingLaw::default();
        assert!(many_to_one_check(&law, 0, |_| 1.0, 10, 0, 1).is_err());
        assert!(many_to_one_check(&law, 7, |_| 1.0, 10, 0, 1).is_err());
    }

    #[test]
    fn family_weight_survives_far_left_displacements() {
        let mut buf = Vec::new();
        let (eps, l) = (0.4, 0.43);
        let naive = |d: &[f64]| {
            let w1: f64 = d.iter().map(|x| (-x).exp()).sum();
            let r: f64 = d.iter().map(|&x| 1.0 / ((1.0 - eps) + eps * (-x).exp() / l)).product();
            w1 * r
        };
        for d in [vec![0.3], vec![-1.5, 0.2, 1.9], vec![-4.0, -2.0]] {
            let w = family_weight(&d, eps, l, &mut buf);
            assert!((w / naive(&d) - 1.0).abs() < 1e-12);
        }
        let w = family_weight(&[-900.0, 0.5], eps, l, &mut buf);
        assert!(naive(&[-900.0, 0.5]).is_nan());
        assert!(w.is_finite() && w > 0.0 && w <= l / eps * 2.0 / (1.0 - eps));
    }

    #[test]
    fn ess_of_equal_weights_is_count() {
        assert_eq!(effective_sample_size(&[2.0; 10]), 10.0);
        assert_eq!(effective_sample_size(&[0.0; 3]), 0.0);
    }
}
