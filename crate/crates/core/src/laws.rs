//! Displacement and offspring laws, the log-generating function, free energy,
//! and the deterministic norming sequences.
//!
//! The walk increment `X` has density
//!
//! ```text
//! f_X(y) = c |y|^(-alpha-1)   for y <= x0      (c = p_left * alpha * |x0|^alpha)
//!        = (1 - p_left) / b   for 0 <= y <= b
//!        = 0                  otherwise
//! ```
//!
//! and children of a particle are displaced by i.i.d. draws from the tilted
//! density `e^y f_X(y) / s` with `s = E[e^X]`, their number being Poisson with
//! mean `s`. Under this construction `phi(1) = 0` and the size-biased spine
//! steps are distributed as `X`.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};

/// Absolute tolerance for the adaptive quadrature behind [`DisplacementSpec::log_mgf`].
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Step of the finite difference used for `phi'(beta_c-)`.
pub const DERIVATIVE_STEP: f64 = 1e-5;
/// Tolerance on `phi(beta_c)/beta_c - phi'(beta_c-)` separating first from second order.
pub const ORDER_GAP_TOL: f64 = 1e-3;
/// Upper end of the search interval for `beta_c`.
pub const BETA_MAX: f64 = 10.0;

/// Constant slowly varying function `ell(x) = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum SlowVarSpec {
    Constant { c: f64 },
}

impl SlowVarSpec {
    pub fn value(&self, _x: f64) -> f64 {
        match *self {
            SlowVarSpec::Constant { c } => c,
        }
    }
}

/// Flat wire form of [`DisplacementSpec`]. Derived quantities are optional on
/// input; when present they must agree with the recomputed values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisplacementWire {
    alpha: f64,
    gamma_witness: f64,
    x0: f64,
    p_left: f64,
    right_hi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slowvar_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s: Option<f64>,
}

/// Heavy-left-tailed increment law: reflected Pareto below `x0` mixed with a
/// uniform law on `[0, right_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DisplacementWire", into = "DisplacementWire")]
pub struct DisplacementSpec {
    alpha: f64,
    gamma_witness: f64,
    x0: f64,
    p_left: f64,
    right_hi: f64,
    slowvar: SlowVarSpec,
    m: f64,
    s: f64,
    /// Unnormalized mass of the tilted law below `x0`, i.e. `E[e^X; X <= x0]`.
    tilted_left: f64,
    tilted_left_prob: f64,
    expm1_hi: f64,
}

impl TryFrom<DisplacementWire> for DisplacementSpec {
    type Error = Error;

    fn try_from(w: DisplacementWire) -> Result<Self> {
        let spec = DisplacementSpec::new(w.alpha, w.x0, w.p_left, w.right_hi)?
            .with_gamma_witness(w.gamma_witness)?;
        let check = |name: &str, given: Option<f64>, actual: f64| -> Result<()> {
            match given {
                Some(g) if (g - actual).abs() > 1e-9 * actual.abs().max(1.0) => Err(config(
                    format!("{name} = {g} disagrees with the derived value {actual}"),
                )),
                _ => Ok(()),
            }
        };
        check("slowvar_c", w.slowvar_c, spec.slowvar.value(0.0))?;
        check("m", w.m, spec.m)?;
        check("s", w.s, spec.s)?;
        Ok(spec)
    }
}

impl From<DisplacementSpec> for DisplacementWire {
    fn from(s: DisplacementSpec) -> Self {
        DisplacementWire {
            alpha: s.alpha,
            gamma_witness: s.gamma_witness,
            x0: s.x0,
            p_left: s.p_left,
            right_hi: s.right_hi,
            slowvar_c: Some(s.slowvar.value(0.0)),
            m: Some(s.m),
            s: Some(s.s),
        }
    }
}

impl Default for DisplacementSpec {
    fn default() -> Self {
        DisplacementSpec::new(2.5, -1.0, 0.3, 2.0).expect("default law is valid")
    }
}

impl DisplacementSpec {
    pub fn new(alpha: f64, x0: f64, p_left: f64, right_hi: f64) -> Result<Self> {
        let mut problems = Vec::new();
        if !(alpha > 1.0 && alpha.is_finite()) {
            problems.push(format!("alpha must be > 1 (got {alpha})"));
        }
        if !(x0 < 0.0 && x0.is_finite()) {
            problems.push(format!("x0 must be negative (got {x0})"));
        }
        if !(p_left > 0.0 && p_left < 1.0) {
            problems.push(format!("p_left must lie in (0, 1) (got {p_left})"));
        }
        if !(right_hi > 0.0 && right_hi.is_finite()) {
            problems.push(format!("right_hi must be positive (got {right_hi})"));
        }
        if !problems.is_empty() {
            return Err(config(problems.join("; ")));
        }
        let m = p_left * x0 * alpha / (alpha - 1.0) + (1.0 - p_left) * right_hi / 2.0;
        if m <= 0.0 {
            return Err(config(format!("mean of X must be positive (got {m})")));
        }
        let c = p_left * alpha * x0.abs().powf(alpha);
        let mut spec = DisplacementSpec {
            alpha,
            gamma_witness: 4.0,
            x0,
            p_left,
            right_hi,
            slowvar: SlowVarSpec::Constant { c },
            m,
            s: f64::NAN,
            tilted_left: f64::NAN,
            tilted_left_prob: f64::NAN,
            expm1_hi: right_hi.exp_m1(),
        };
        spec.tilted_left = spec.left_mgf(1.0);
        spec.s = spec.tilted_left + spec.right_mgf(1.0);
        spec.tilted_left_prob = spec.tilted_left / spec.s;
        if spec.s <= 1.0 {
            return Err(config(format!(
                "E[e^X] must exceed 1 for a supercritical tree (got {})",
                spec.s
            )));
        }
        Ok(spec)
    }

    pub fn with_gamma_witness(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 3.0) {
            return Err(config(format!("gamma_witness must be > 3 (got {gamma})")));
        }
        self.gamma_witness = gamma;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma_witness(&self) -> f64 {
        self.gamma_witness
    }
    pub fn x0(&self) -> f64 {
        self.x0
    }
    pub fn p_left(&self) -> f64 {
        self.p_left
    }
    pub fn right_hi(&self) -> f64 {
        self.right_hi
    }
    pub fn slowvar(&self) -> SlowVarSpec {
        self.slowvar
    }
    /// `E[X]`.
    pub fn m(&self) -> f64 {
        self.m
    }
    /// `E[e^X]`, the mean number of children.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn density_x(&self, y: f64) -> f64 {
        if y <= self.x0 {
            self.slowvar.value(y) * y.abs().powf(-self.alpha - 1.0)
        } else if (0.0..=self.right_hi).contains(&y) {
            (1.0 - self.p_left) / self.right_hi
        } else {
            0.0
        }
    }

    /// `P(X <= y)`.
    pub fn cdf_x(&self, y: f64) -> f64 {
        if y <= self.x0 {
            self.p_left * (y / self.x0).powf(-self.alpha)
        } else if y < 0.0 {
            self.p_left
        } else if y < self.right_hi {
            self.p_left + (1.0 - self.p_left) * y / self.right_hi
        } else {
            1.0
        }
    }

    pub fn mean_x(&self) -> f64 {
        self.m
    }

    /// `E[X^2]` in closed form (finite only for `alpha > 2`).
    pub fn second_moment_x(&self) -> f64 {
        let left = if self.alpha > 2.0 {
            self.p_left * self.alpha / (self.alpha - 2.0) * self.x0 * self.x0
        } else {
            f64::INFINITY
        };
        left + (1.0 - self.p_left) * self.right_hi * self.right_hi / 3.0
    }

    // E[e^{theta X}; X <= x0] after substituting y = x0 / u on (0, 1].
    fn left_mgf(&self, theta: f64) -> f64 {
        let (a, x0) = (self.alpha, self.x0);
        let f = |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                u.powf(a - 1.0) * (theta * x0 / u).exp()
            }
        };
        self.p_left * a * quadrature::integrate(f, 0.0, 1.0, QUADRATURE_TOL).integral
    }

    // E[e^{theta X}; 0 <= X <= b], closed form.
    fn right_mgf(&self, theta: f64) -> f64 {
        let b = self.right_hi;
        let w = 1.0 - self.p_left;
        if theta == 0.0 {
            w
        } else {
            w * (theta * b).exp_m1() / (theta * b)
        }
    }

    /// `log E[e^{theta X}]` for `theta >= 0`.
    pub fn log_mgf(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(domain(format!(
                "log_mgf needs theta >= 0 (got {theta}); the left tail diverges otherwise"
            )));
        }
        if theta == 0.0 {
            return Ok(0.0);
        }
        Ok((self.left_mgf(theta) + self.right_mgf(theta)).ln())
    }

    /// `phi(beta) = log E[sum_{|u|=1} e^{-beta V(u)}]`, equal to
    /// `log E[e^{(1-beta) X}]` for `beta <= 1` and `+inf` beyond.
    pub fn phi(&self, beta: f64) -> f64 {
        if beta > 1.0 {
            f64::INFINITY
        } else {
            self.log_mgf(1.0 - beta).expect("1 - beta >= 0")
        }
    }

    /// Infinite-volume free energy: `phi` on `[0, 1]`, `beta * phi(1) = 0` beyond.
    pub fn free_energy(&self, beta: f64) -> Result<f64> {
        if !(beta >= 0.0) {
            return Err(domain(format!("free energy needs beta >= 0 (got {beta})")));
        }
        if beta <= 1.0 {
            Ok(self.phi(beta))
        } else {
            Ok(beta * self.phi(1.0))
        }
    }

    /// `(alpha + 1) log n - log ell(n)`.
    pub fn alpha_n(&self, n: u64) -> f64 {
        let n = n.max(1) as f64;
        (self.alpha + 1.0) * n.ln() - self.slowvar.value(n).ln()
    }

    /// Draw from the increment law `X`.
    pub fn sample_x<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.p_left {
            // Reuse the uniform: u / p_left is U(0,1) given the branch.
            let v = 1.0 - u / self.p_left;
            self.x0 * v.powf(-1.0 / self.alpha)
        } else {
            let v = (u - self.p_left) / (1.0 - self.p_left);
            v * self.right_hi
        }
    }

    /// Probability that a tilted draw lands in the left component.
    pub fn tilted_left_probability(&self) -> f64 {
        self.tilted_left_prob
    }

    /// Draw from the tilted law `s^{-1} e^y f_X(y) dy`.
    #[inline]
    pub fn sample_child_displacement<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let p = self.tilted_left_prob;
        if u < p {
            loop {
                let e: f64 = Exp1.sample(rng);
                let y = self.x0 - e;
                let accept = (y / self.x0).powf(-self.alpha - 1.0);
                if rng.random::<f64>() < accept {
                    return y;
                }
            }
        } else {
            let v = (u - p) / (1.0 - p);
            // v * expm1(b) >= 0, so ln(1 + .) loses nothing to cancellation.
            (1.0 + v * self.expm1_hi).ln()
        }
    }

    /// Density of the tilted child-displacement law.
    pub fn child_density(&self, y: f64) -> f64 {
        y.exp() * self.density_x(y) / self.s
    }
}

/// `n / (log n)^3`, the big-jump threshold.
pub fn zeta_n(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("zeta_n needs n >= 2 (got {n})")));
    }
    let ln = (n as f64).ln();
    Ok(n as f64 / (ln * ln * ln))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum OffspringSpec {
    PoissonMean(f64),
    /// Test-only mode, exempt from the normalization `phi(1) = 0`.
    Deterministic(u32),
}

impl OffspringSpec {
    pub fn mean(&self) -> f64 {
        match *self {
            OffspringSpec::PoissonMean(l) => l,
            OffspringSpec::Deterministic(k) => k as f64,
        }
    }
}

/// Poisson sampler by inversion against a precomputed CDF table. Offspring
/// means here are small (around 2), where one uniform and a short scan beat
/// the general-purpose samplers; draws in the far tail beyond the table fall
/// back to sequential inversion.
#[derive(Debug, Clone)]
struct PoissonTable {
    lambda: f64,
    cdf: Vec<f64>,
    /// `guide[j]` is the smallest `k` with `cdf[k] > j / GUIDE`.
    guide: Vec<u32>,
}

const GUIDE: usize = 64;

impl PoissonTable {
    fn new(lambda: f64) -> Self {
        let mut cdf = Vec::new();
        let mut pmf = (-lambda).exp();
        let mut acc = 0.0;
        let mut k = 0u32;
        while acc < 1.0 - 1e-15 && k < 1000 {
            acc += pmf;
            cdf.push(acc);
            k += 1;
            pmf *= lambda / k as f64;
        }
        let guide = (0..GUIDE)
            .map(|j| {
                let t = j as f64 / GUIDE as f64;
                cdf.iter().position(|&c| c > t).unwrap_or(cdf.len() - 1) as u32
            })
            .collect();
        PoissonTable { lambda, cdf, guide }
    }

    #[inline]
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let mut k = self.guide[(u * GUIDE as f64) as usize] as usize;
        while k < self.cdf.len() {
            if u < self.cdf[k] {
                return k as u32;
            }
            k += 1;
        }
        self.tail_sample(u)
    }

    // Sequential inversion past the table.
    #[cold]
    fn tail_sample(&self, u: f64) -> u32 {
        let mut k = self.cdf.len() as u32;
        let mut acc = *self.cdf.last().unwrap();
        let mut pmf = (-self.lambda).exp();
        for i in 1..=k {
            pmf *= self.lambda / i as f64;
        }
        while u >= acc && pmf > 0.0 {
            acc += pmf;
            if u < acc {
                return k;
            }
            k += 1;
            pmf *= self.lambda / k as f64;
        }
        k
    }
}

/// Law of a single child displacement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum ChildLaw {
    /// Tilted draws `s^{-1} e^y f_X(y)`.
    Tilted(DisplacementSpec),
    PointMass(f64),
    Gaussian { mean: f64, sd: f64 },
}

/// Point process of children: `nu` i.i.d. displacements, `nu` independent of them.
#[derive(Debug, Clone)]
pub struct BranchingLaw {
    child: ChildLaw,
    offspring: OffspringSpec,
    poisson: Option<PoissonTable>,
    normal: Option<Normal<f64>>,
    spine_normal: Option<Normal<f64>>,
    mean_w1: f64,
}

impl PartialEq for BranchingLaw {
    fn eq(&self, other: &Self) -> bool {
        self.child == other.child && self.offspring == other.offspring
    }
}

impl Default for BranchingLaw {
    fn default() -> Self {
        BranchingLaw::hyp2(DisplacementSpec::default())
    }
}

impl BranchingLaw {
    pub fn new(child: ChildLaw, offspring: OffspringSpec) -> Result<Self> {
        let poisson = match offspring {
            OffspringSpec::PoissonMean(l) => {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(config(format!("Poisson mean must be positive (got {l})")));
                }
                if let ChildLaw::Tilted(spec) = &child {
                    if (l - spec.s()).abs() > 1e-9 * spec.s() {
                        return Err(config(format!(
                            "Poisson mean {l} must equal E[e^X] = {}",
                            spec.s()
                        )));
                    }
                }
                Some(PoissonTable::new(l))
            }
            OffspringSpec::Deterministic(k) => {
                if k < 1 {
                    return Err(config("deterministic offspring needs k >= 1"));
                }
                None
            }
        };
        let (normal, spine_normal) = match child {
            ChildLaw::Gaussian { mean, sd } => {
                if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
                    return Err(config(format!("invalid Gaussian child law ({mean}, {sd})")));
                }
                (
                    Some(Normal::new(mean, sd).map_err(|e| config(e.to_string()))?),
                    Some(Normal::new(mean - sd * sd, sd).map_err(|e| config(e.to_string()))?),
                )
            }
            ChildLaw::PointMass(d) if !d.is_finite() => {
                return Err(config("point-mass displacement must be finite"))
            }
            _ => (None, None),
        };
        let mut law = BranchingLaw {
            child,
            offspring,
            poisson,
            normal,
            spine_normal,
            mean_w1: f64::NAN,
        };
        law.mean_w1 = law.phi(1.0).exp();
        Ok(law)
    }

    /// The canonical construction: Poisson(s) children with tilted displacements.
    pub fn hyp2(spec: DisplacementSpec) -> Self {
        let s = spec.s();
        BranchingLaw::new(ChildLaw::Tilted(spec), OffspringSpec::PoissonMean(s))
            .expect("canonical construction is always valid")
    }

    /// `k` children, each displaced by exactly `d`.
    pub fn point_mass(k: u32, d: f64) -> Result<Self> {
        BranchingLaw::new(ChildLaw::PointMass(d), OffspringSpec::Deterministic(k))
    }

    /// Binary Gaussian branching normalized to `phi(1) = 0`, `phi'(1) = 0`.
    pub fn gaussian_boundary() -> Self {
        let mean = 2.0 * std::f64::consts::LN_2;
        BranchingLaw::new(
            ChildLaw::Gaussian {
                mean,
                sd: mean.sqrt(),
            },
            OffspringSpec::Deterministic(2),
        )
        .expect("boundary preset is valid")
    }

    pub fn child(&self) -> &ChildLaw {
        &self.child
    }

    pub fn offspring(&self) -> OffspringSpec {
        self.offspring
    }

    pub fn displacement(&self) -> Option<&DisplacementSpec> {
        match &self.child {
            ChildLaw::Tilted(spec) => Some(spec),
            _ => None,
        }
    }

    /// Continuous child laws make ties at the minimum a null event.
    pub fn is_continuous(&self) -> bool {
        !matches!(self.child, ChildLaw::PointMass(_))
    }

    #[inline(always)]
    pub fn sample_offspring<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match (self.offspring, &self.poisson) {
            (OffspringSpec::Deterministic(k), _) => k,
            (_, Some(p)) => p.sample(rng),
            _ => unreachable!("Poisson offspring always carries a sampler"),
        }
    }

    #[inline(always)]
    pub fn sample_child<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.child {
            ChildLaw::Tilted(spec) => spec.sample_child_displacement(rng),
            ChildLaw::PointMass(d) => *d,
            ChildLaw::Gaussian { .. } => self.normal.as_ref().unwrap().sample(rng),
        }
    }

    /// Number of siblings of the spine child: size-biased offspring minus one.
    pub fn sample_spine_siblings<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self.offspring {
            OffspringSpec::Deterministic(k) => k - 1,
            // Size-biased Poisson(l) is 1 + Poisson(l).
            OffspringSpec::PoissonMean(_) => self.sample_offspring(rng),
        }
    }

    /// Spine displacement: the child law reweighted by `e^{-y}`.
    pub fn sample_spine_displacement<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.child {
            ChildLaw::Tilted(spec) => spec.sample_x(rng),
            ChildLaw::PointMass(d) => *d,
            ChildLaw::Gaussian { .. } => self.spine_normal.as_ref().unwrap().sample(rng),
        }
    }

    /// `log E[e^{-beta xi}]` for one child displacement.
    fn log_child_laplace(&self, beta: f64) -> f64 {
        match &self.child {
            ChildLaw::Tilted(spec) => {
                if beta > 1.0 {
                    f64::INFINITY
                } else {
                    spec.log_mgf(1.0 - beta).expect("1 - beta >= 0") - spec.s().ln()
                }
            }
            ChildLaw::PointMass(d) => -beta * d,
            ChildLaw::Gaussian { mean, sd } => -beta * mean + 0.5 * beta * beta * sd * sd,
        }
    }

    pub fn phi(&self, beta: f64) -> f64 {
        self.offspring.mean().ln() + self.log_child_laplace(beta)
    }

    /// `E[W_1] = e^{phi(1)}`.
    pub fn mean_w1(&self) -> f64 {
        self.mean_w1
    }

    /// Right end of the effective domain of `phi` on the positive axis.
    pub fn phi_domain_end(&self) -> f64 {
        match self.child {
            ChildLaw::Tilted(_) => 1.0,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitionOrder {
    FirstOrder,
    SecondOrder,
    NoInteriorMinimizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub beta_c: f64,
    pub phi_at_beta_c: f64,
    pub left_derivative: f64,
    pub order: TransitionOrder,
}

/// Locates `beta_c = argmin phi(beta)/beta` on `(0, BETA_MAX]` and compares
/// `phi(beta_c)/beta_c` with the left derivative `phi'(beta_c-)`.
pub fn classify_transition(law: &BranchingLaw) -> PhaseReport {
    let upper = BETA_MAX.min(law.phi_domain_end());
    let g = |b: f64| law.phi(b) / b;
    const GRID: usize = 400;
    let grid: Vec<f64> = (1..=GRID).map(|i| upper * i as f64 / GRID as f64).collect();
    let (imin, _) = grid
        .iter()
        .map(|&b| g(b))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });

    let left_derivative =
        |b: f64| (law.phi(b) - law.phi(b - 2.0 * DERIVATIVE_STEP)) / (2.0 * DERIVATIVE_STEP);

    if imin == GRID - 1 {
        let b = grid[imin];
        if upper < law.phi_domain_end() {
            return PhaseReport {
                beta_c: b,
                phi_at_beta_c: law.phi(b),
                left_derivative: left_derivative(b),
                order: TransitionOrder::NoInteriorMinimizer,
            };
        }
    }

    let beta_c = if imin == GRID - 1 {
        upper
    } else {
        let lo = if imin == 0 { upper * 1e-6 } else { grid[imin - 1] };
        golden_section_min(g, lo, grid[imin + 1], 1e-10)
    };
    let phi_c = law.phi(beta_c);
    let d = left_derivative(beta_c);
    let gap = phi_c / beta_c - d;
    let order = if gap > ORDER_GAP_TOL {
        TransitionOrder::FirstOrder
    } else if gap.abs() <= ORDER_GAP_TOL {
        TransitionOrder::SecondOrder
    } else {
        // A negative gap contradicts the minimality of beta_c.
        TransitionOrder::NoInteriorMinimizer
    };
    PhaseReport {
        beta_c,
        phi_at_beta_c: phi_c,
        left_derivative: d,
        order,
    }
}

/// Infinite-volume free energy of a branching law: `phi(beta)` up to the
/// critical inverse temperature, linear `beta phi(beta_c)/beta_c` beyond.
pub fn free_energy_of(law: &BranchingLaw, beta: f64) -> Result<f64> {
    if let Some(spec) = law.displacement() {
        return spec.free_energy(beta);
    }
    if !(beta >= 0.0) {
        return Err(domain(format!("free energy needs beta >= 0 (got {beta})")));
    }
    let report = classify_transition(law);
    if report.order == TransitionOrder::NoInteriorMinimizer || beta <= report.beta_c {
        Ok(law.phi(beta))
    } else {
        Ok(beta * report.phi_at_beta_c / report.beta_c)
    }
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - invphi * (b - a);
    let mut d = a + invphi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
