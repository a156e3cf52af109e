//! Partition functions `Z_n(beta) = sum_{|u|=n} e^{-beta V(u)}` and Gibbs
//! measure statistics.

use serde::{Deserialize, Serialize};

use crate::engine::{traverse, BrwParams, Visitor};
use crate::error::{domain, Result};
use crate::laws::free_energy_of;
use crate::parallel::par_map_indexed;
use crate::seed::{derive_seed, rng_from_seed, task};
use crate::sum::CompensatedSum;

/// Accumulates `sum e^{-beta (V - a)}` for several `beta` at once, with the
/// anchor `a` following the running minimum so every term is at most 1.
struct PartitionVisitor {
    betas: Vec<f64>,
    sums: Vec<CompensatedSum>,
    anchor: f64,
    leaves: u64,
}

impl PartitionVisitor {
    fn new(betas: &[f64]) -> Self {
        Self {
            betas: betas.to_vec(),
            sums: vec![CompensatedSum::new(); betas.len()],
            anchor: f64::INFINITY,
            leaves: 0,
        }
    }

    /// `log Z(beta_i)`, or `None` if no leaf was seen.
    fn log_z(&self) -> Option<Vec<f64>> {
        if self.leaves == 0 {
            return None;
        }
        Some(
            self.betas
                .iter()
                .zip(&self.sums)
                .map(|(b, s)| s.value().ln() - b * self.anchor)
                .collect(),
        )
    }
}

impl Visitor for PartitionVisitor {
    #[inline]
    fn node(&mut self, _depth: usize, _path: &[f64]) {}

    #[inline]
    fn leaf(&mut self, _depth: usize, _parent_path: &[f64], v: f64) {
        self.leaves += 1;
        if v < self.anchor {
            if self.anchor.is_finite() {
                let shift = self.anchor - v;
                for (b, s) in self.betas.iter().zip(self.sums.iter_mut()) {
                    s.scale((-b * shift).exp());
                }
            }
            self.anchor = v;
        }
        let d = v - self.anchor;
        for (b, s) in self.betas.iter().zip(self.sums.iter_mut()) {
            s.add((-b * d).exp());
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermoTrace {
    pub n: usize,
    pub beta_grid: Vec<f64>,
    /// `F_n(beta) = log Z_n(beta) / n`; NaN when the tree died out.
    pub f_n_values: Vec<f64>,
    pub f_limit: Vec<f64>,
    pub survived: bool,
    pub leaves: u64,
}

pub const THERMO_FN_HEADER: &str = "n,beta,F_n,F_limit";
pub const THERMO_GIBBS_HEADER: &str = "n,beta,participation_ratio,max_atom";

impl ThermoTrace {
    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for i in 0..self.beta_grid.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.n, self.beta_grid[i], self.f_n_values[i], self.f_limit[i]
            ));
        }
        s
    }

    /// Smallest discrete second difference of `F_n` on the grid (scaled by
    /// the spacing); nonnegative up to rounding for a convex trace.
    pub fn min_second_difference(&self) -> f64 {
        let b = &self.beta_grid;
        let f = &self.f_n_values;
        (1..b.len().saturating_sub(1))
            .map(|i| {
                let l = (f[i] - f[i - 1]) / (b[i] - b[i - 1]);
                let r = (f[i + 1] - f[i]) / (b[i + 1] - b[i]);
                r - l
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_betas(beta_grid: &[f64]) -> Result<()> {
    if beta_grid.is_empty() || beta_grid.iter().any(|&b| !(b >= 0.0 && b.is_finite())) {
        return Err(domain("beta grid must be nonempty, finite and nonnegative"));
    }
    if beta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("beta grid must be strictly increasing"));
    }
    Ok(())
}

/// One tree, every `beta` in a single traversal.
pub fn partition_trace(params: &BrwParams, beta_grid: &[f64], seed: u64) -> Result<ThermoTrace> {
    check_betas(beta_grid)?;
    let n = params.horizon_n;
    if n == 0 {
        return Err(domain("partition functions need n >= 1"));
    }
    let f_limit = beta_grid
        .iter()
        .map(|&b| free_energy_of(&params.law, b))
        .collect::<Result<Vec<f64>>>()?;
    let mut v = PartitionVisitor::new(beta_grid);
    let mut rng = rng_from_seed(seed);
    traverse(&params.law, n, 0.0, params.caps.max_particles, &mut rng, &mut v)?;
    let (f_n_values, survived) = match v.log_z() {
        Some(l) => (l.iter().map(|x| x / n as f64).collect(), true),
        None => (vec![f64::NAN; beta_grid.len()], false),
    };
    Ok(ThermoTrace {
        n,
        beta_grid: beta_grid.to_vec(),
        f_n_values,
        f_limit,
        survived,
        leaves: v.leaves,
    })
}

pub fn partition_traces(
    params: &BrwParams,
    beta_grid: &[f64],
    root_seed: u64,
    replicas: usize,
    threads: usize,
) -> Vec<Result<ThermoTrace>> {
    par_map_indexed(threads, replicas, |r| {
        partition_trace(params, beta_grid, derive_seed(root_seed, task::THERMO, r as u64))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsStats {
    pub beta: f64,
    pub participation_ratio: f64,
    pub max_atom: f64,
    pub support_size_eff: f64,
}

impl GibbsStats {
    fn from_log_z(beta: f64, log_z: f64, log_z2: f64, log_top: f64) -> Self {
        let participation_ratio = (log_z2 - 2.0 * log_z).exp().min(1.0);
        GibbsStats {
            beta,
            participation_ratio,
            max_atom: (log_top - log_z).exp().min(1.0),
            support_size_eff: 1.0 / participation_ratio,
        }
    }

    pub fn csv_row(&self, n: usize) -> String {
        format!("{},{},{},{}\n", n, self.beta, self.participation_ratio, self.max_atom)
    }
}

/// Gibbs weights `e^{-beta V(u)} / Z_n(beta)` of a list of leaf positions.
pub fn gibbs_masses(leaves: &[f64], beta: f64) -> Result<Vec<f64>> {
    if leaves.is_empty() {
        return Err(domain("Gibbs measure of an empty generation"));
    }
    let a = leaves.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = leaves.iter().map(|v| (-beta * (v - a)).exp()).collect();
    let z: f64 = w.iter().copied().collect::<CompensatedSum>().value();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// Participation ratio `sum mu^2`, largest atom and `1/sum mu^2` of the
/// Gibbs measure at generation `n`.
pub fn gibbs_stats(params: &BrwParams, beta: f64, seed: u64) -> Result<GibbsStats> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(domain(format!("Gibbs statistics need beta > 0 (got {beta})")));
    }
    let mut v = PartitionVisitor::new(&[beta, 2.0 * beta]);
    let mut rng = rng_from_seed(seed);
    traverse(
        &params.law,
        params.horizon_n,
        0.0,
        params.caps.max_particles,
        &mut rng,
        &mut v,
    )?;
    let lz = v
        .log_z()
        .ok_or_else(|| domain("Gibbs measure undefined: the tree died out"))?;
    Ok(GibbsStats::from_log_z(beta, lz[0], lz[1], -beta * v.anchor))
}

pub fn gibbs_stats_many(
    params: &BrwParams,
    beta: f64,
    root_seed: u64,
    replicas: usize,
    threads: usize,
) -> Vec<Result<GibbsStats>> {
    par_map_indexed(threads, replicas, |r| {
        gibbs_stats(params, beta, derive_seed(root_seed, task::GIBBS, r as u64))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::materialize_generations;
    use crate::laws::BranchingLaw;

    #[test]
    fn flat_binary_tree() {
        let params = BrwParams::new(BranchingLaw::point_mass(2, 0.0).unwrap(), 5).unwrap();
        let t = partition_trace(&params, &[0.0, 0.5, 1.0, 4.0], 1).unwrap();
        for (f, l) in t.f_n_values.iter().zip(&t.f_limit) {
            assert!((f - 2f64.ln()).abs() < 1e-14);
            assert!((l - 2f64.ln()).abs() < 1e-12);
        }
        assert_eq!(t.leaves, 32);
        let g = gibbs_stats(&params, 1.3, 1).unwrap();
        assert!((g.participation_ratio - 1.0 / 32.0).abs() < 1e-15);
        assert!((g.max_atom - 1.0 / 32.0).abs() < 1e-15);
        assert!((g.support_size_eff - 32.0).abs() < 1e-10);
    }

    #[test]
    fn single_leaf_tree() {
        let params = BrwParams::new(BranchingLaw::point_mass(1, 0.4).unwrap(), 6).unwrap();
        let g = gibbs_stats(&params, 2.0, 3).unwrap();
        assert_eq!((g.participation_ratio, g.max_atom, g.support_size_eff), (1.0, 1.0, 1.0));
    }

    #[test]
    fn streaming_matches_direct_sums() {
        let params = BrwParams::new(BranchingLaw::default(), 6).unwrap();
        let betas = [0.0, 0.3, 1.0, 2.5, 8.0];
        for seed in 0..20u64 {
            let gens = materialize_generations(&params, seed).unwrap();
            let leaves = &gens[6];
            let t = partition_trace(&params, &betas, seed).unwrap();
            if leaves.is_empty() {
                assert!(!t.survived);
                assert!(t.f_n_values.iter().all(|f| f.is_nan()));
                assert!(gibbs_stats(&params, 1.0, seed).is_err());
                continue;
            }
            for (i, &b) in betas.iter().enumerate() {
                let z: f64 = leaves.iter().map(|v| (-b * v).exp()).sum();
                assert!((t.f_n_values[i] - z.ln() / 6.0).abs() < 1e-12, "seed {seed} beta {b}");
            }
            let mu = gibbs_masses(leaves, 1.7).unwrap();
            assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let g = gibbs_stats(&params, 1.7, seed).unwrap();
            let pr: f64 = mu.iter().map(|m| m * m).sum();
            let top = mu.iter().copied().fold(0.0, f64::max);
            assert!((g.participation_ratio - pr).abs() < 1e-12);
            assert!((g.max_atom - top).abs() < 1e-12);
            assert!(g.max_atom * g.max_atom <= g.participation_ratio + 1e-15);
            assert!(g.participation_ratio <= g.max_atom + 1e-15);
        }
    }

    #[test]
    fn huge_beta_does_not_overflow() {
        let params = BrwParams::new(BranchingLaw::default(), 8).unwrap();
        let t = partition_trace(&params, &[100.0, 1000.0], 9).unwrap();
        if t.survived {
            assert!(t.f_n_values.iter().all(|f| f.is_finite()));
        }
    }

    #[test]
    fn traces_are_convex() {
        let params = BrwParams::new(BranchingLaw::default(), 8).unwrap();
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
        for r in partition_traces(&params, &grid, 5, 30, 1) {
            let t = r.unwrap();
            if t.survived {
                assert!(t.min_second_difference() >= -1e-6);
            }
        }
    }

    #[test]
    fn bad_grids_are_rejected() {
        let params = BrwParams::new(BranchingLaw::default(), 3).unwrap();
        assert!(partition_trace(&params, &[], 0).is_err());
        assert!(partition_trace(&params, &[1.0, 0.5], 0).is_err());
        assert!(gibbs_stats(&params, 0.0, 0).is_err());
    }
}
