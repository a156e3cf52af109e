//! Streaming depth-first simulation of the branching random walk.
//!
//! A tree of depth `n` is enumerated in preorder holding only the current
//! root-to-node path, so memory is `O(n)` while the work is proportional to
//! the number of particles. Children are generated lazily: a node draws its
//! offspring count, then each child's displacement is drawn just before that
//! child's subtree is explored. Every consumer of a seed (the minimum, the
//! martingale trace, the partition sums, the debug materializer) follows this
//! exact draw order, so they all see the same tree.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laws::{zeta_n, BranchingLaw};
use crate::parallel::par_map_indexed;
use crate::seed::{derive_seed, rng_from_seed, task};
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OverflowPolicy {
    #[default]
    AbortReplica,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationCaps {
    /// Upper bound on the number of nodes visited in one tree (root included).
    pub max_particles: u64,
    #[serde(default)]
    pub on_overflow: OverflowPolicy,
}

impl Default for PopulationCaps {
    fn default() -> Self {
        PopulationCaps {
            max_particles: 200_000_000,
            on_overflow: OverflowPolicy::AbortReplica,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrwParams {
    pub law: BranchingLaw,
    pub horizon_n: usize,
    pub caps: PopulationCaps,
}

impl BrwParams {
    pub fn new(law: BranchingLaw, horizon_n: usize) -> Result<Self> {
        BrwParams::with_caps(law, horizon_n, PopulationCaps::default())
    }

    pub fn with_caps(law: BranchingLaw, horizon_n: usize, caps: PopulationCaps) -> Result<Self> {
        if horizon_n < 1 {
            return Err(crate::error::config("horizon_n must be >= 1"));
        }
        if caps.max_particles < 1 {
            return Err(crate::error::config("caps.max_particles must be >= 1"));
        }
        Ok(BrwParams {
            law,
            horizon_n,
            caps,
        })
    }

    /// Drop threshold `zeta_n`; horizons below 2 borrow `zeta_2`.
    pub fn drop_threshold(&self) -> f64 {
        zeta_n(self.horizon_n.max(2) as u64).expect("n >= 2")
    }
}

/// First and second large drops along a path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropDecomposition {
    pub zeta: f64,
    /// First 1-based index `i` with `path[i] - path[i-1] < -zeta`; `None` is infinity.
    pub tau: Option<usize>,
    pub tau2: Option<usize>,
    /// Increment at `tau`.
    pub drop_size: Option<f64>,
}

impl DropDecomposition {
    pub fn none(zeta: f64) -> Self {
        DropDecomposition {
            zeta,
            tau: None,
            tau2: None,
            drop_size: None,
        }
    }

    /// Scans the increments of a position sequence `path[0..=n]`.
    pub fn from_positions(path: &[f64], zeta: f64) -> Self {
        let mut out = DropDecomposition::none(zeta);
        for i in 1..path.len() {
            let inc = path[i] - path[i - 1];
            if inc < -zeta {
                if out.tau.is_none() {
                    out.tau = Some(i);
                    out.drop_size = Some(inc);
                } else {
                    out.tau2 = Some(i);
                    break;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumReport {
    pub survived: bool,
    /// `M_n`, `+inf` on extinction.
    pub m_n: f64,
    /// `W_n = sum_{|u|=n} e^{-V(u)}`.
    pub w_n: f64,
    pub eta_n: u64,
    /// Positions `V(u_0), ..., V(u_n)` along the first minimizing ray found
    /// in preorder; empty on extinction.
    pub min_path: Vec<f64>,
    pub particles_visited: u64,
    pub drops: DropDecomposition,
}

pub const REPORT_CSV_HEADER: &str =
    "replica,survived,m_n,w_n,eta_n,tau,tau2,drop_size,particles_visited";

pub(crate) fn fmt_opt_usize(x: Option<usize>) -> String {
    x.map_or_else(|| "inf".to_string(), |v| v.to_string())
}

pub(crate) fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

impl MinimumReport {
    pub fn csv_row(&self, replica: usize) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            replica,
            self.survived,
            self.m_n,
            self.w_n,
            self.eta_n,
            fmt_opt_usize(self.drops.tau),
            fmt_opt_usize(self.drops.tau2),
            fmt_opt_f64(self.drops.drop_size),
            self.particles_visited
        )
    }
}

/// Receives every node of a preorder traversal. `path[0..=depth]` holds the
/// positions from the traversal root down to the current node.
pub(crate) trait Visitor {
    fn node(&mut self, depth: usize, path: &[f64]);

    /// Nodes of the last generation arrive here instead, with the path of
    /// their parent and their own position (`depth` is the leaf's depth).
    fn leaf(&mut self, depth: usize, parent_path: &[f64], pos: f64);
}

/// Preorder traversal of a tree of `levels` generations rooted at `start`.
/// Returns the number of nodes visited, or aborts once `cap` is exceeded.
pub(crate) fn traverse<R: Rng + ?Sized, V: Visitor>(
    law: &BranchingLaw,
    levels: usize,
    start: f64,
    cap: u64,
    rng: &mut R,
    visitor: &mut V,
) -> Result<u64> {
    let mut path = Vec::with_capacity(levels + 1);
    path.push(start);
    let mut visited = 0u64;
    descend(law, levels, 0, &mut path, rng, &mut visited, cap, visitor)?;
    Ok(visited)
}

#[allow(clippy::too_many_arguments)]
fn descend<R: Rng + ?Sized, V: Visitor>(
    law: &BranchingLaw,
    levels: usize,
    depth: usize,
    path: &mut Vec<f64>,
    rng: &mut R,
    visited: &mut u64,
    cap: u64,
    visitor: &mut V,
) -> Result<()> {
    *visited += 1;
    if *visited > cap {
        return Err(Error::Aborted {
            particles_visited: *visited,
            cap,
        });
    }
    if depth == levels {
        // Only reached when the traversal root itself is a leaf.
        let (parent, pos) = path.split_at(depth);
        visitor.leaf(depth, parent, pos[0]);
        return Ok(());
    }
    visitor.node(depth, path);
    let here = path[depth];
    let k = law.sample_offspring(rng);
    if depth + 1 == levels {
        *visited += k as u64;
        if *visited > cap {
            return Err(Error::Aborted {
                particles_visited: *visited,
                cap,
            });
        }
        for _ in 0..k {
            let d = law.sample_child(rng);
            visitor.leaf(levels, path, here + d);
        }
        return Ok(());
    }
    for _ in 0..k {
        let d = law.sample_child(rng);
        path.push(here + d);
        descend(law, levels, depth + 1, path, rng, visited, cap, visitor)?;
        path.pop();
    }
    Ok(())
}

struct MinimumVisitor {
    n: usize,
    min: f64,
    eta: u64,
    w: CompensatedSum,
    min_path: Vec<f64>,
}

impl Visitor for MinimumVisitor {
    #[inline]
    fn node(&mut self, _depth: usize, _path: &[f64]) {}

    #[inline]
    fn leaf(&mut self, depth: usize, parent_path: &[f64], v: f64) {
        debug_assert_eq!(depth, self.n);
        self.w.add((-v).exp());
        if v < self.min {
            self.min = v;
            self.eta = 1;
            self.min_path.clear();
            self.min_path.extend_from_slice(parent_path);
            self.min_path.push(v);
        } else if v == self.min {
            self.eta += 1;
        }
    }
}

/// Exact `M_n`, `W_n`, `eta_n` and a minimizing ray for one tree.
pub fn simulate_tree(params: &BrwParams, seed: u64) -> Result<MinimumReport> {
    let n = params.horizon_n;
    let mut rng = rng_from_seed(seed);
    let mut v = MinimumVisitor {
        n,
        min: f64::INFINITY,
        eta: 0,
        w: CompensatedSum::new(),
        min_path: Vec::with_capacity(n + 1),
    };
    let visited = traverse(
        &params.law,
        n,
        0.0,
        params.caps.max_particles,
        &mut rng,
        &mut v,
    )?;
    let zeta = params.drop_threshold();
    let survived = v.eta > 0;
    let drops = if survived {
        DropDecomposition::from_positions(&v.min_path, zeta)
    } else {
        DropDecomposition::none(zeta)
    };
    Ok(MinimumReport {
        survived,
        m_n: v.min,
        w_n: v.w.value(),
        eta_n: v.eta,
        min_path: v.min_path,
        particles_visited: visited,
        drops,
    })
}

struct WeightVisitor {
    w: CompensatedSum,
}

impl Visitor for WeightVisitor {
    #[inline]
    fn node(&mut self, _depth: usize, _path: &[f64]) {}

    #[inline]
    fn leaf(&mut self, _depth: usize, _parent_path: &[f64], v: f64) {
        self.w.add((-v).exp());
    }
}

/// `W_n` alone for one tree started at 0.
pub fn sample_martingale<R: Rng + ?Sized>(params: &BrwParams, rng: &mut R) -> Result<f64> {
    let mut v = WeightVisitor {
        w: CompensatedSum::new(),
    };
    traverse(
        &params.law,
        params.horizon_n,
        0.0,
        params.caps.max_particles,
        rng,
        &mut v,
    )?;
    Ok(v.w.value())
}

/// Seed of replica `r` in [`simulate_many`].
pub fn replica_seed(root_seed: u64, replica: usize) -> u64 {
    derive_seed(root_seed, task::SIMULATE, replica as u64)
}

/// Runs `replicas` independent trees; entry `r` always uses
/// [`replica_seed`]`(root_seed, r)` whatever the number of threads.
pub fn simulate_many(
    params: &BrwParams,
    root_seed: u64,
    replicas: usize,
    threads: usize,
) -> Vec<Result<MinimumReport>> {
    par_map_indexed(threads, replicas, |r| {
        simulate_tree(params, replica_seed(root_seed, r))
    })
}

/// Survived, completed and aborted counts over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BatchCounts {
    pub completed: usize,
    pub survived: usize,
    pub aborted: usize,
}

pub fn batch_counts(outcomes: &[Result<MinimumReport>]) -> BatchCounts {
    let mut c = BatchCounts::default();
    for o in outcomes {
        match o {
            Ok(r) => {
                c.completed += 1;
                if r.survived {
                    c.survived += 1;
                }
            }
            Err(_) => c.aborted += 1,
        }
    }
    c
}

pub fn minimizing_path_diagnostics(report: &MinimumReport, zeta: f64) -> Result<DropDecomposition> {
    if !report.survived {
        return Err(domain("drop diagnostics need a surviving tree"));
    }
    if !(zeta > 0.0) {
        return Err(domain(format!("zeta must be positive (got {zeta})")));
    }
    Ok(DropDecomposition::from_positions(&report.min_path, zeta))
}

struct TraceVisitor {
    sums: Vec<CompensatedSum>,
}

impl Visitor for TraceVisitor {
    #[inline]
    fn node(&mut self, depth: usize, path: &[f64]) {
        if depth > 0 {
            self.sums[depth - 1].add((-path[depth]).exp());
        }
    }

    #[inline]
    fn leaf(&mut self, depth: usize, _parent_path: &[f64], pos: f64) {
        if depth > 0 {
            self.sums[depth - 1].add((-pos).exp());
        }
    }
}

/// `W_1, ..., W_n` for the tree grown from `seed`.
pub fn martingale_trace(params: &BrwParams, seed: u64) -> Result<Vec<f64>> {
    let n = params.horizon_n;
    let mut rng = rng_from_seed(seed);
    let mut v = TraceVisitor {
        sums: vec![CompensatedSum::new(); n],
    };
    traverse(
        &params.law,
        n,
        0.0,
        params.caps.max_particles,
        &mut rng,
        &mut v,
    )?;
    Ok(v.sums.iter().map(|s| s.value()).collect())
}

/// Largest horizon accepted by [`materialize_generations`].
pub const MATERIALIZE_MAX_DEPTH: usize = 6;

/// Debug mode: builds the whole tree in an arena with an explicit stack,
/// following the same draw order as the streaming traversal, and returns the
/// positions of each generation `0..=n` in preorder.
pub fn materialize_generations(params: &BrwParams, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = params.horizon_n;
    if n > MATERIALIZE_MAX_DEPTH {
        return Err(domain(format!(
            "materialization is limited to n <= {MATERIALIZE_MAX_DEPTH}"
        )));
    }
    struct Node {
        depth: usize,
        pos: f64,
    }
    let mut rng = rng_from_seed(seed);
    let mut arena = vec![Node { depth: 0, pos: 0.0 }];
    // (arena index, children still to generate)
    let mut stack: Vec<(usize, u32)> = Vec::new();
    let k = if n > 0 { params.law.sample_offspring(&mut rng) } else { 0 };
    stack.push((0, k));
    while let Some(top) = stack.last_mut() {
        if top.1 == 0 {
            stack.pop();
            continue;
        }
        top.1 -= 1;
        let parent = top.0;
        let d = params.law.sample_child(&mut rng);
        let depth = arena[parent].depth + 1;
        let pos = arena[parent].pos + d;
        arena.push(Node { depth, pos });
        if arena.len() as u64 > params.caps.max_particles {
            return Err(Error::Aborted {
                particles_visited: arena.len() as u64,
                cap: params.caps.max_particles,
            });
        }
        let idx = arena.len() - 1;
        let k = if depth < n {
            params.law.sample_offspring(&mut rng)
        } else {
            0
        };
        stack.push((idx, k));
    }
    let mut generations = vec![Vec::new(); n + 1];
    for node in &arena {
        generations[node.depth].push(node.pos);
    }
    Ok(generations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laws::DisplacementSpec;

    fn params(law: BranchingLaw, n: usize) -> BrwParams {
        BrwParams::new(law, n).unwrap()
    }

    #[test]
    fn single_path_tree() {
        let d = 0.7;
        let p = params(BranchingLaw::point_mass(1, d).unwrap(), 5);
        let r = simulate_tree(&p, 1).unwrap();
        assert!(r.survived);
        assert!((r.m_n - 5.0 * d).abs() < 1e-12);
        assert_eq!(r.eta_n, 1);
        assert!((r.w_n - (-5.0 * d).exp()).abs() < 1e-12);
        assert_eq!(r.particles_visited, 6);
        assert_eq!(r.min_path.len(), 6);
    }

    #[test]
    fn full_binary_tree_at_zero() {
        let n = 10;
        let p = params(BranchingLaw::point_mass(2, 0.0).unwrap(), n);
        let r = simulate_tree(&p, 1).unwrap();
        assert_eq!(r.m_n, 0.0);
        assert_eq!(r.eta_n, 1 << n);
        assert_eq!(r.w_n, (1u64 << n) as f64);
        assert_eq!(r.particles_visited, (1 << (n + 1)) - 1);
        let trace = martingale_trace(&p, 1).unwrap();
        for (k, w) in trace.iter().enumerate() {
            assert_eq!(*w, (1u64 << (k + 1)) as f64);
        }
    }

    #[test]
    fn point_mass_trace() {
        let p = params(BranchingLaw::point_mass(1, 0.3).unwrap(), 6);
        let trace = martingale_trace(&p, 5).unwrap();
        for (k, w) in trace.iter().enumerate() {
            assert!((w - (-0.3 * (k + 1) as f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn drop_examples() {
        // increments 1, -5, 2, -7
        let path = [0.0, 1.0, -4.0, -2.0, -9.0];
        let d = DropDecomposition::from_positions(&path, 4.0);
        assert_eq!(d.tau, Some(2));
        assert_eq!(d.tau2, Some(4));
        assert_eq!(d.drop_size, Some(-5.0));
        let d = DropDecomposition::from_positions(&path, 10.0);
        assert_eq!((d.tau, d.tau2, d.drop_size), (None, None, None));
    }

    #[test]
    fn diagnostics_refuse_extinct_trees() {
        let r = MinimumReport {
            survived: false,
            m_n: f64::INFINITY,
            w_n: 0.0,
            eta_n: 0,
            min_path: vec![],
            particles_visited: 1,
            drops: DropDecomposition::none(1.0),
        };
        assert!(minimizing_path_diagnostics(&r, 1.0).is_err());
    }

    #[test]
    fn extinction_invariants_and_ray_validity() {
        let p = params(BranchingLaw::default(), 8);
        let mut extinct = 0;
        for seed in 0..400 {
            let r = simulate_tree(&p, seed).unwrap();
            if r.survived {
                assert!(r.eta_n >= 1 && r.m_n.is_finite() && r.w_n > 0.0);
                assert_eq!(r.min_path.len(), 9);
                assert_eq!(r.min_path[0], 0.0);
                assert_eq!(r.min_path[8], r.m_n);
                let spec = DisplacementSpec::default();
                for w in r.min_path.windows(2) {
                    let inc = w[1] - w[0];
                    assert!(inc <= spec.x0() + 1e-9 || (-1e-9..=2.0 + 1e-9).contains(&inc));
                }
            } else {
                extinct += 1;
                assert_eq!(r.m_n, f64::INFINITY);
                assert_eq!(r.eta_n, 0);
                assert_eq!(r.w_n, 0.0);
            }
        }
        assert!(extinct > 0);
    }

    #[test]
    fn streaming_matches_materialized_tree() {
        for n in 1..=6 {
            let p = params(BranchingLaw::default(), n);
            for seed in 0..200 {
                let r = simulate_tree(&p, seed).unwrap();
                let gens = materialize_generations(&p, seed).unwrap();
                let w: CompensatedSum = gens[n].iter().map(|v| (-v).exp()).collect();
                assert_eq!(r.w_n, w.value());
                let total: usize = gens.iter().map(|g| g.len()).sum();
                assert_eq!(r.particles_visited, total as u64);
                let m = gens[n].iter().copied().fold(f64::INFINITY, f64::min);
                assert_eq!(r.m_n, m);
                let trace = martingale_trace(&p, seed).unwrap();
                assert_eq!(trace[n - 1], r.w_n);
            }
        }
    }

    #[test]
    fn cap_overflow_aborts() {
        let caps = PopulationCaps {
            max_particles: 100,
            on_overflow: OverflowPolicy::AbortReplica,
        };
        let p = BrwParams::with_caps(BranchingLaw::point_mass(2, 0.0).unwrap(), 10, caps).unwrap();
        match simulate_tree(&p, 0) {
            Err(Error::Aborted {
                particles_visited,
                cap,
            }) => {
                assert_eq!(cap, 100);
                assert!(particles_visited > 100 && particles_visited <= 102);
            }
            other => panic!("expected abort, got {other:?}"),
        }
        let outcomes = simulate_many(&p, 3, 4, 2);
        assert_eq!(batch_counts(&outcomes).aborted, 4);
    }

    #[test]
    fn many_is_reproducible_and_thread_independent() {
        let p = params(BranchingLaw::default(), 7);
        let one = simulate_many(&p, 17, 1, 1);
        assert_eq!(one[0], simulate_tree(&p, replica_seed(17, 0)));
        let a = simulate_many(&p, 17, 64, 1);
        let b = simulate_many(&p, 17, 64, 4);
        assert_eq!(a, b);
    }

    #[test]
    fn csv_row_layout() {
        let p = params(BranchingLaw::point_mass(1, 0.5).unwrap(), 2);
        let r = simulate_tree(&p, 0).unwrap();
        assert_eq!(r.csv_row(3), format!("3,true,1,{},1,inf,inf,NA,3", (-1.0f64).exp()));
        assert_eq!(REPORT_CSV_HEADER.split(',').count(), r.csv_row(0).split(',').count());
    }
}
