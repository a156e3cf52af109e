//! Statistical examples. Frozen constants come from pilot runs with the
//! same seeds; tolerances are a few Monte Carlo standard errors.

use brwlab::engine::{martingale_trace, replica_seed, simulate_many, simulate_tree, BrwParams};
use brwlab::laws::{zeta_n, BranchingLaw, DisplacementSpec};
use brwlab::parallel::{default_threads, par_map_indexed};
use brwlab::rwalk::*;
use brwlab::seed::{derive_seed, rng_from_seed};
use brwlab::spine::{many_to_one_check, sample_spine_family, spine_marginal_check, DEFENSIVE_MIX};
use brwlab::stats::{fixed_point_check, ks_one_sample};
use brwlab::sum::mean_stderr;
use brwlab::thermo::{gibbs_stats_many, partition_traces};

fn spec() -> DisplacementSpec {
    DisplacementSpec::default()
}

fn law() -> BranchingLaw {
    BranchingLaw::hyp2(spec())
}

fn threads() -> usize {
    default_threads()
}

#[test]
fn martingale_trace_has_unit_mean() {
    let params = BrwParams::new(law(), 10).unwrap();
    let traces: Vec<Vec<f64>> = par_map_indexed(threads(), 10_000, |r| {
        martingale_trace(&params, derive_seed(1, 0, r as u64)).unwrap()
    });
    for k in 0..10 {
        let w: Vec<f64> = traces.iter().map(|t| t[k]).collect();
        let (m, se) = mean_stderr(&w);
        assert!((m - 1.0).abs() < 3.0 * se, "k={} mean={m} se={se}", k + 1);
    }
}

#[test]
fn single_replica_matches_simulate_tree() {
    let params = BrwParams::new(law(), 8).unwrap();
    let many = simulate_many(&params, 77, 1, 1);
    assert_eq!(many[0], simulate_tree(&params, replica_seed(77, 0)));
}

#[test]
fn minimum_below_centering_at_n10() {
    const FROZEN: f64 = 0.85485;
    let params = BrwParams::new(law(), 10).unwrap();
    let a = spec().alpha_n(10);
    let reps = simulate_many(&params, 106, 100_000, threads());
    let m: Vec<f64> = reps.iter().map(|r| r.as_ref().unwrap().m_n).collect();
    let p = m.iter().filter(|&&x| x <= a).count() as f64 / m.len() as f64;
    assert!(p > 0.0 && p < 1.0);
    let se = (p * (1.0 - p) / 1e5).sqrt();
    assert!((p - FROZEN).abs() < 4.0 * se, "p={p}");
}

#[test]
fn spine_families_have_mean_m() {
    let law = law();
    let steps: Vec<(f64, f64)> = par_map_indexed(threads(), 1_000_000, |r| {
        let mut rng = rng_from_seed(derive_seed(2, 0, r as u64));
        sample_spine_family(&law, &mut rng)
            .iter()
            .fold((0.0, 0.0), |(a, b), s| (a + s.weight * s.spine_disp, b + s.weight))
    });
    let num: Vec<f64> = steps.iter().map(|s| s.0).collect();
    let den: Vec<f64> = steps.iter().map(|s| s.1).collect();
    let (mn, sn) = mean_stderr(&num);
    let (md, _) = mean_stderr(&den);
    assert!((md - 1.0).abs() < 0.01, "mean W1 {md}");
    assert!((mn - 0.2).abs() < 3.0 * sn, "{mn} +- {sn}");
}

#[test]
fn spine_marginal_at_one_step() {
    let r = spine_marginal_check(&law(), 1, DEFENSIVE_MIX, 100_000, 2_000_000, 3, threads()).unwrap();
    assert!(r.ks < 0.01 && r.passed && !r.inconclusive, "{r:?}");
}

#[test]
fn spine_marginal_of_single_child_law_is_noise() {
    let law = BranchingLaw::new(
        brwlab::laws::ChildLaw::Gaussian { mean: 0.5, sd: 1.0 },
        brwlab::laws::OffspringSpec::Deterministic(1),
    )
    .unwrap();
    let r = spine_marginal_check(&law, 3, 0.0, 50_000, 1_000_000, 4, threads()).unwrap();
    assert!(r.ks < 0.02, "{r:?}");
}

#[test]
fn many_to_one_counts_are_s_to_the_n() {
    let s = spec().s();
    for n in [1usize, 3] {
        let r = many_to_one_check(&law(), n, |_| 1.0, 100_000, 5 + n as u64, threads()).unwrap();
        let target = s.powi(n as i32);
        assert!((r.lhs - target).abs() < 3.0 * r.lhs_stderr, "n={n} {r:?}");
        assert!((r.rhs - target).abs() < 3.0 * r.rhs_stderr.max(1e-12), "n={n} {r:?}");
    }
}

#[test]
fn walk_law_of_large_numbers_and_variance() {
    let sp = spec();
    let ends: Vec<f64> = par_map_indexed(threads(), 10_000, |r| {
        let p = simulate_walk(&sp, 1000, derive_seed(6, 0, r as u64));
        p.positions[1000] / 1000.0
    });
    let (m, se) = mean_stderr(&ends);
    assert!((m - 0.2).abs() < 3.0 * se, "{m} +- {se}");

    let x: Vec<f64> = par_map_indexed(threads(), 1_000_000, |r| {
        simulate_walk(&sp, 1, derive_seed(7, 0, r as u64)).increments[0]
    });
    let var = sp.second_moment_x() - sp.mean_x().powi(2);
    let sq: Vec<f64> = x.iter().map(|v| (v - sp.mean_x()).powi(2)).collect();
    let (v, vse) = mean_stderr(&sq);
    assert!((v - var).abs() < 3.0 * vse, "{v} +- {vse} vs {var}");
    let ks = ks_one_sample(&x, |y| sp.cdf_x(y)).unwrap();
    assert!(ks < 0.005, "ks={ks}");
}

#[test]
fn first_drop_time_has_geometric_law() {
    let sp = spec();
    let n = 100;
    let zeta = zeta_n(n as u64).unwrap();
    let hit: Vec<f64> = par_map_indexed(threads(), 100_000, |r| {
        let p = simulate_walk(&sp, n, derive_seed(8, 0, r as u64));
        f64::from(drop_times(&p.increments, zeta).unwrap().tau.is_some() as u8)
    });
    let (p, se) = mean_stderr(&hit);
    let q = 0.3 * zeta.powf(-2.5);
    let exact = 1.0 - (1.0 - q).powi(n as i32);
    assert!((p - exact).abs() < 3.0 * se.max(1e-4), "{p} vs {exact}");
}

#[test]
fn renewal_plateau_is_inverse_mean() {
    const FROZEN: [f64; 3] = [5.054895, 5.024902, 5.0163095];
    let r = renewal_r(&spec(), &[50.0, 100.0, 200.0], 20_000, RENEWAL_HORIZON, 101, threads()).unwrap();
    assert_eq!(r.reading, PlateauReading::InverseMean);
    assert!(r.plateau_drift() < 0.1);
    for i in 0..3 {
        let tol = 4.0 * r.stderrs[i] / r.x_grid[i];
        assert!((r.ratios[i] - FROZEN[i]).abs() < tol, "{:?}", r.ratios);
    }
    assert!(r.r_values.iter().all(|&v| v >= 1.0));
}

#[test]
fn local_probabilities_are_frozen() {
    // Scaled values estimate * n^alpha / l(n) grow with n here: y = 10 lies
    // inside the central part of the law of S_n for these horizons.
    const FROZEN: [f64; 3] = [0.03918, 0.02059, 0.00635];
    let l = scaled_local_probs(&spec(), &[50, 100, 200], 10.0, 1.0, 200_000, 102, threads()).unwrap();
    for (x, f) in l.iter().zip(FROZEN) {
        assert!((x.estimate.estimate - f).abs() < 4.0 * x.estimate.stderr, "{x:?}");
        assert!(!x.estimate.flagged);
    }
    assert!(l[2].scaled / l[0].scaled > 3.0);
}

#[test]
fn big_jump_walk_profile_is_frozen() {
    // At n = 200, zeta_n is about 1.35 and P(X < -zeta_n) about 0.14, so the
    // conditioned walks make many small drops rather than one big one.
    let q = BigJumpQuery::for_spec(&spec(), 200, 2.0, 100_000);
    let b = big_jump_profile(&spec(), &q, 103, threads()).unwrap();
    assert_eq!(b.hits, 49);
    assert!(b.inconclusive);
    assert_eq!(b.one_drop_fraction, 0.0);
    assert_eq!(b.second_drop_fraction, 1.0);
    assert!(b.median_jump_over_n.unwrap().abs() < 0.02);
}

#[test]
fn free_energy_trends() {
    let law = law();
    let ln_s = spec().s().ln();
    let mut last_abs = f64::INFINITY;
    for n in [8usize, 12, 16] {
        let p = BrwParams::new(law.clone(), n).unwrap();
        let tr: Vec<_> = partition_traces(&p, &[0.0, 1.0], 104, 200, threads())
            .into_iter()
            .map(|t| t.unwrap())
            .filter(|t| t.survived)
            .collect();
        let f0: Vec<f64> = tr.iter().map(|t| t.f_n_values[0]).collect();
        let a1: Vec<f64> = tr.iter().map(|t| t.f_n_values[1].abs()).collect();
        let (m0, _) = mean_stderr(&f0);
        let (m1, _) = mean_stderr(&a1);
        assert!((m0 - ln_s).abs() < 0.03, "n={n} F_n(0)={m0}");
        assert!(m1 < last_abs, "n={n} |F_n(1)|={m1}");
        last_abs = m1;
    }
}

#[test]
fn gibbs_measure_freezes() {
    const FROZEN: [f64; 2] = [0.00017623840980119117, 0.49430641289348826];
    let p = BrwParams::new(law(), 14).unwrap();
    let mut means = Vec::new();
    for (beta, frozen) in [0.5, 3.0].into_iter().zip(FROZEN) {
        let pr: Vec<f64> = gibbs_stats_many(&p, beta, 105, 1000, threads())
            .into_iter()
            .filter_map(|g| g.ok())
            .map(|g| g.participation_ratio)
            .collect();
        let (m, se) = mean_stderr(&pr);
        assert!((m - frozen).abs() < 4.0 * se, "beta={beta} {m}");
        means.push(m);
    }
    assert!(means[1] > means[0]);
}

#[test]
fn fixed_point_does_not_degrade_with_depth() {
    let ks = |n0| {
        let p = BrwParams::new(law(), n0).unwrap();
        fixed_point_check(&p, 100_000, 9, threads()).unwrap().ks
    };
    let (k6, k8) = (ks(6), ks(8));
    assert!(k8 <= k6 + 0.006, "ks6={k6} ks8={k8}");
    assert!(k6 < 0.02);
}
