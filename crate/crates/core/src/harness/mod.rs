//! Orchestration: cached experiment data, stage outputs, manifests.

pub mod checks;
pub mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::engine::{simulate_many, BrwParams, MinimumReport, REPORT_CSV_HEADER};
use crate::error::{Error, Result};
use crate::laws::BranchingLaw;
use crate::rwalk::{
    big_jump_profile, renewal_r, scaled_local_probs, BigJumpQuery, RenewalEstimate, TestStep,
};
use crate::seed::{derive_seed, rng_from_seed, task};
use crate::spine::{
    estimate_cstar_series, many_to_one_check, spine_marginal_check, CstarEstimate,
    ManyToOneReport, PathFunctional, SeriesSettings, SpineMarginalReport,
};
use crate::stats::{
    bootstrap_cstar_tail, ecdf, fit_cstar_limit, fixed_point_check, tail_fit, tail_points,
    BootstrapInterval, FixedPointReport, LimitFit, TailFit,
};
use crate::sum::mean_stderr;
use crate::thermo::{gibbs_stats_many, partition_traces, THERMO_FN_HEADER, THERMO_GIBBS_HEADER};

pub use checks::CriterionOutcome;
pub use config::ExperimentConfig;

/// Trees of one horizon; aborted replicas are counted, never averaged.
#[derive(Debug, Clone)]
pub struct TreeBatch {
    pub n: usize,
    pub alpha_n: f64,
    pub seed: u64,
    /// `(replica, report)` for completed replicas, in replica order.
    pub reports: Vec<(usize, MinimumReport)>,
    pub aborted: usize,
}

impl TreeBatch {
    /// `M_n` of every completed tree, `+inf` for extinct ones.
    pub fn minima(&self) -> Vec<f64> {
        self.reports.iter().map(|(_, r)| r.m_n).collect()
    }

    pub fn martingales(&self) -> Vec<f64> {
        self.reports.iter().map(|(_, r)| r.w_n).collect()
    }

    pub fn survivors(&self) -> usize {
        self.reports.iter().filter(|(_, r)| r.survived).count()
    }

    /// `M_n - alpha_n`, `+inf` for extinct trees.
    pub fn centered(&self) -> Vec<f64> {
        self.reports.iter().map(|(_, r)| r.m_n - self.alpha_n).collect()
    }
}

/// Limit-law fit at one horizon with a bootstrap spread of its KS distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSummary {
    pub n: usize,
    pub fit: LimitFit,
    pub ks_bootstrap_mean: f64,
    pub ks_bootstrap_sd: f64,
    pub resamples: usize,
}

/// Tail summary at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSummary {
    pub n: usize,
    pub alpha_n: f64,
    pub completed: usize,
    pub survived: usize,
    pub aborted: usize,
    pub fit: std::result::Result<TailFit, String>,
    pub fit_survivors: std::result::Result<TailFit, String>,
    pub bootstrap: std::result::Result<BootstrapInterval, String>,
    /// `(x, P(M_n <= alpha_n - x), e^x P)`.
    pub upper_bound: Vec<(f64, f64, f64)>,
}

/// Experiment session: validated configuration plus lazily computed, shared
/// results. Every cached value depends only on the configuration.
pub struct Suite {
    pub config: ExperimentConfig,
    pub law: BranchingLaw,
    pub threads: usize,
    batches: Vec<OnceLock<Arc<TreeBatch>>>,
    limits: Vec<OnceLock<Arc<std::result::Result<LimitSummary, String>>>>,
    tails: Vec<OnceLock<Arc<TailSummary>>>,
    series: OnceLock<Arc<std::result::Result<CstarEstimate, String>>>,
}

/// Root seed of a task stage.
pub fn stage_seed(root_seed: u64, task_id: u64) -> u64 {
    derive_seed(root_seed, task_id, 0)
}

impl Suite {
    pub fn new(config: ExperimentConfig, threads: usize) -> Result<Self> {
        config.validate()?;
        let law = config.branching_law()?;
        let k = config.horizons.len();
        Ok(Suite {
            law,
            threads: threads.max(1),
            batches: (0..k).map(|_| OnceLock::new()).collect(),
            limits: (0..k).map(|_| OnceLock::new()).collect(),
            tails: (0..k).map(|_| OnceLock::new()).collect(),
            series: OnceLock::new(),
            config,
        })
    }

    pub fn seed(&self, task_id: u64) -> u64 {
        stage_seed(self.config.root_seed, task_id)
    }

    pub fn params(&self, n: usize) -> Result<BrwParams> {
        BrwParams::with_caps(self.law.clone(), n, self.config.caps())
    }

    pub fn horizon_seed(&self, n: usize) -> u64 {
        derive_seed(self.config.root_seed, task::HORIZON, n as u64)
    }

    pub fn batch(&self, idx: usize) -> Arc<TreeBatch> {
        self.batches[idx]
            .get_or_init(|| {
                let n = self.config.horizons[idx];
                let params = self.params(n).expect("validated horizon");
                let seed = self.horizon_seed(n);
                let out = simulate_many(&params, seed, self.config.replicas[idx], self.threads);
                let mut reports = Vec::with_capacity(out.len());
                let mut aborted = 0;
                for (r, o) in out.into_iter().enumerate() {
                    match o {
                        Ok(rep) => reports.push((r, rep)),
                        Err(_) => aborted += 1,
                    }
                }
                Arc::new(TreeBatch {
                    n,
                    alpha_n: self.config.law.alpha_n(n as u64),
                    seed,
                    reports,
                    aborted,
                })
            })
            .clone()
    }

    pub fn last_index(&self) -> usize {
        self.config.horizons.len() - 1
    }

    pub fn tail(&self, idx: usize) -> Arc<TailSummary> {
        self.tails[idx]
            .get_or_init(|| {
                let b = self.batch(idx);
                let m = b.minima();
                let grid = &self.config.x_grid;
                let fit = tail_fit(&m, b.alpha_n, grid).map_err(|e| e.to_string());
                let surv: Vec<f64> = m.iter().copied().filter(|x| x.is_finite()).collect();
                let fit_survivors = if surv.is_empty() {
                    Err("no surviving trees".to_string())
                } else {
                    tail_fit(&surv, b.alpha_n, grid).map_err(|e| e.to_string())
                };
                let bootstrap = if m.is_empty() {
                    Err("no completed trees".to_string())
                } else {
                    bootstrap_cstar_tail(
                        &m,
                        b.alpha_n,
                        grid,
                        self.config.tail.bootstrap_resamples,
                        self.config.tail.bootstrap_level,
                        derive_seed(self.seed(task::BOOTSTRAP), 0, b.n as u64),
                    )
                    .map_err(|e| e.to_string())
                };
                let upper_bound = if m.is_empty() {
                    Vec::new()
                } else {
                    tail_points(&m, b.alpha_n, &self.config.tail.upper_bound_x)
                        .expect("nonempty sample")
                        .into_iter()
                        .map(|p| (p.x, p.p, p.x.exp() * p.p))
                        .collect()
                };
                Arc::new(TailSummary {
                    n: b.n,
                    alpha_n: b.alpha_n,
                    completed: b.reports.len(),
                    survived: b.survivors(),
                    aborted: b.aborted,
                    fit,
                    fit_survivors,
                    bootstrap,
                    upper_bound,
                })
            })
            .clone()
    }

    pub fn limit(&self, idx: usize) -> Arc<std::result::Result<LimitSummary, String>> {
        self.limits[idx]
            .get_or_init(|| Arc::new(self.compute_limit(idx).map_err(|e| e.to_string())))
            .clone()
    }

    fn compute_limit(&self, idx: usize) -> Result<LimitSummary> {
        let b = self.batch(idx);
        let y = b.centered();
        let w = b.martingales();
        let fit = fit_cstar_limit(&y, &w)?;
        let resamples = self.config.limit.bootstrap_resamples;
        let seed = derive_seed(self.seed(task::BOOTSTRAP), 1, b.n as u64);
        let ks: Vec<f64> = crate::parallel::par_map_indexed(self.threads, resamples, |i| {
            let mut rng = rng_from_seed(derive_seed(seed, 0, i as u64));
            let k = y.len();
            let (mut yy, mut ww) = (Vec::with_capacity(k), Vec::with_capacity(k));
            for _ in 0..k {
                let j = rng.random_range(0..k);
                yy.push(y[j]);
                ww.push(w[j]);
            }
            fit_cstar_limit(&yy, &ww).map(|f| f.ks_at_fit).unwrap_or(f64::NAN)
        });
        let ks: Vec<f64> = ks.into_iter().filter(|x| x.is_finite()).collect();
        if ks.len() < 2 {
            return Err(Error::Insufficient("bootstrap of the limit fit failed".into()));
        }
        let (mean, se) = mean_stderr(&ks);
        Ok(LimitSummary {
            n: b.n,
            fit,
            ks_bootstrap_mean: mean,
            ks_bootstrap_sd: se * (ks.len() as f64).sqrt(),
            resamples: ks.len(),
        })
    }

    pub fn series(&self) -> Arc<std::result::Result<CstarEstimate, String>> {
        self.series
            .get_or_init(|| {
                let s = &self.config.spine;
                let settings = SeriesSettings {
                    j_max: s.j_max,
                    replicas: s.series_replicas,
                    tolerance: s.tolerance,
                    caps: self.config.caps(),
                };
                Arc::new(
                    estimate_cstar_series(&self.law, &settings, self.seed(task::CSTAR), self.threads)
                        .map_err(|e| e.to_string()),
                )
            })
            .clone()
    }

    pub fn fixed_point(&self) -> Result<FixedPointReport> {
        let m = &self.config.martingale;
        fixed_point_check(
            &self.params(m.fixed_point_n0)?,
            m.fixed_point_samples,
            self.seed(task::FIXED_POINT),
            self.threads,
        )
    }

    pub fn spine_marginal(&self) -> Result<SpineMarginalReport> {
        let s = &self.config.spine;
        spine_marginal_check(
            &self.law,
            s.marginal_n,
            s.mixture,
            s.target_ess,
            s.max_raw,
            self.seed(task::SPINE_MARGINAL),
            self.threads,
        )
    }

    pub fn many_to_one(&self) -> Result<Vec<(PathFunctional, ManyToOneReport)>> {
        let mo = &self.config.many_to_one;
        let mut out = Vec::new();
        for (gi, g) in [PathFunctional::One, PathFunctional::MinNonNegative].into_iter().enumerate() {
            for &n in &mo.horizons {
                let seed = derive_seed(self.seed(task::MANY_TO_ONE_TREE), gi as u64, n as u64);
                let r = many_to_one_check(&self.law, n, |p| g.eval(p), mo.replicas, seed, self.threads)?;
                out.push((g, r));
            }
        }
        Ok(out)
    }

    /// `(n, mean W_n, stderr)` over fresh trees.
    pub fn martingale_means(&self) -> Result<Vec<(usize, f64, f64, usize)>> {
        let m = &self.config.martingale;
        let mut out = Vec::new();
        for &n in &m.horizons {
            let params = self.params(n)?;
            let seed = derive_seed(self.seed(task::MARTINGALE), 0, n as u64);
            let ws = crate::parallel::par_map_indexed(self.threads, m.replicas, |r| {
                let mut rng = rng_from_seed(derive_seed(seed, task::MARTINGALE, r as u64));
                crate::engine::sample_martingale(&params, &mut rng)
            });
            let aborted = ws.iter().filter(|w| w.is_err()).count();
            let ws: Vec<f64> = ws.into_iter().filter_map(|w| w.ok()).collect();
            let (mean, se) = mean_stderr(&ws);
            out.push((n, mean, se, aborted));
        }
        Ok(out)
    }

    pub fn renewal(&self) -> Result<(RenewalEstimate, RenewalEstimate)> {
        let w = &self.config.walk;
        let seed = self.seed(task::RENEWAL);
        let main = renewal_r(&self.config.law, &w.renewal_x, w.renewal_replicas, w.renewal_horizon, seed, self.threads)?;
        let oracle = renewal_r(&TestStep::Constant(1.0), &w.renewal_x, 2, w.renewal_horizon, seed, self.threads)?;
        Ok((main, oracle))
    }

    /// Aborted replicas per tree batch that has been computed.
    pub fn abort_counts(&self) -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for (i, cell) in self.batches.iter().enumerate() {
            if let Some(b) = cell.get() {
                m.insert(format!("trees_n{}", self.config.horizons[i]), b.aborted);
            }
        }
        if let Some(s) = self.series.get() {
            if let Ok(e) = s.as_ref() {
                m.insert("cstar_series".into(), e.aborted);
            }
        }
        m
    }
}

/// Reproducibility record of a run. `timing` is written separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_hash: String,
    pub config_hash: String,
    pub code_version: String,
    pub root_seed: u64,
    pub task_seeds: BTreeMap<String, u64>,
    pub abort_counts: BTreeMap<String, usize>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn config_hash(config: &ExperimentConfig) -> String {
    sha256_hex(serde_json::to_string(config).expect("config serializes").as_bytes())
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        let config_hash = config_hash(config);
        let code_version = env!("CARGO_PKG_VERSION").to_string();
        let manifest_hash =
            sha256_hex(format!("{config_hash}:{code_version}:{}", config.root_seed).as_bytes())[..16]
                .to_string();
        let s = |t| stage_seed(config.root_seed, t);
        let mut task_seeds = BTreeMap::new();
        for &n in &config.horizons {
            task_seeds.insert(
                format!("trees_n{n}"),
                derive_seed(config.root_seed, task::HORIZON, n as u64),
            );
        }
        for (name, t) in [
            ("martingale", task::MARTINGALE),
            ("fixed_point", task::FIXED_POINT),
            ("spine_marginal", task::SPINE_MARGINAL),
            ("many_to_one", task::MANY_TO_ONE_TREE),
            ("cstar", task::CSTAR),
            ("renewal", task::RENEWAL),
            ("local_prob", task::LOCAL_PROB),
            ("big_jump", task::BIG_JUMP),
            ("thermo", task::THERMO),
            ("gibbs", task::GIBBS),
            ("bootstrap", task::BOOTSTRAP),
        ] {
            task_seeds.insert(name.to_string(), s(t));
        }
        RunManifest {
            manifest_hash,
            config_hash,
            code_version,
            root_seed: config.root_seed,
            task_seeds,
            abort_counts: BTreeMap::new(),
        }
    }
}

/// One rendered output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

fn csv_file(name: &str, hash: &str, header: &str, body: &str) -> OutputFile {
    OutputFile {
        name: name.to_string(),
        contents: format!("# manifest={hash}\n{header}\n{body}"),
    }
}

fn json_file(name: &str, hash: &str, data: Value) -> OutputFile {
    let v = json!({ "manifest": hash, "data": data });
    OutputFile {
        name: name.to_string(),
        contents: serde_json::to_string_pretty(&v).expect("json") + "\n",
    }
}

fn or_refused<T: Serialize>(r: &std::result::Result<T, String>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("json"),
        Err(e) => json!({ "refused": e }),
    }
}

/// Subcommands that produce outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Simulate,
    Tail,
    LimitLaw,
    Cstar,
    Rw,
    Thermo,
    ManyToOne,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Simulate,
        Stage::Tail,
        Stage::LimitLaw,
        Stage::Cstar,
        Stage::Rw,
        Stage::Thermo,
        Stage::ManyToOne,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::Tail => "tail",
            Stage::LimitLaw => "limit-law",
            Stage::Cstar => "cstar",
            Stage::Rw => "rw",
            Stage::Thermo => "thermo",
            Stage::ManyToOne => "manytoone",
        }
    }
}

/// Renders the files of one stage.
pub fn render_stage(suite: &Suite, stage: Stage, hash: &str) -> Result<Vec<OutputFile>> {
    let cfg = &suite.config;
    let mut files = Vec::new();
    match stage {
        Stage::Simulate => {
            let mut summary = Vec::new();
            for i in 0..cfg.horizons.len() {
                let b = suite.batch(i);
                let body: String = b.reports.iter().map(|(r, rep)| rep.csv_row(*r) + "\n").collect();
                files.push(csv_file(&format!("simulate_n{}.csv", b.n), hash, REPORT_CSV_HEADER, &body));
                summary.push(json!({
                    "n": b.n,
                    "alpha_n": b.alpha_n,
                    "replicas": cfg.replicas[i],
                    "completed": b.reports.len(),
                    "survived": b.survivors(),
                    "aborted": b.aborted,
                    "seed": b.seed,
                }));
            }
            files.push(json_file("simulate_summary.json", hash, json!(summary)));
        }
        Stage::Tail => {
            for i in 0..cfg.horizons.len() {
                let t = suite.tail(i);
                let v = json!({
                    "n": t.n,
                    "alpha_n": t.alpha_n,
                    "orientation": "P(M_n <= alpha_n - x)",
                    "completed": t.completed,
                    "survived": t.survived,
                    "aborted": t.aborted,
                    "fit": or_refused(&t.fit),
                    "fit_survivors": or_refused(&t.fit_survivors),
                    "cstar_tail_bootstrap": or_refused(&t.bootstrap),
                    "upper_bound": t.upper_bound.iter()
                        .map(|&(x, p, s)| json!({"x": x, "p": p, "exp_x_p": s}))
                        .collect::<Vec<_>>(),
                });
                files.push(json_file(&format!("tail_n{}.json", t.n), hash, v));
            }
        }
        Stage::LimitLaw => {
            for i in 0..cfg.horizons.len() {
                let b = suite.batch(i);
                let l = suite.limit(i);
                let v = json!({
                    "n": b.n,
                    "orientation": "P(M_n >= alpha_n + x) vs E[exp(-c e^x W_n)]",
                    "limit": or_refused(l.as_ref()),
                });
                files.push(json_file(&format!("limit_n{}.json", b.n), hash, v));
                let y = b.centered();
                if !y.is_empty() {
                    let e = ecdf(&y)?;
                    let body: String = e
                        .steps()
                        .into_iter()
                        .filter(|s| s.0.is_finite())
                        .map(|(x, f)| format!("{x},{f}\n"))
                        .collect();
                    files.push(csv_file(&format!("ecdf_n{}.csv", b.n), hash, "x,F", &body));
                }
            }
        }
        Stage::Cstar => {
            let series = suite.series();
            files.push(json_file("cstar_series.json", hash, or_refused(series.as_ref())));
            let t = suite.tail(suite.last_index());
            files.push(json_file(
                "cstar_crosscheck.json",
                hash,
                checks::cstar_comparison(series.as_ref(), &t),
            ));
        }
        Stage::Rw => {
            let (renewal, oracle) = suite.renewal()?;
            files.push(csv_file("renewal.csv", hash, "x,R,R_over_x,stderr", strip_header(&renewal.to_csv())));
            files.push(json_file(
                "renewal.json",
                hash,
                json!({
                    "estimate": renewal,
                    "plateau_drift": renewal.plateau_drift(),
                    "mean_step": cfg.law.m(),
                    "unit_step_oracle": oracle,
                }),
            ));
            let w = &cfg.walk;
            let local = scaled_local_probs(
                &cfg.law,
                &w.local_horizons,
                w.local_y,
                w.local_h,
                w.local_replicas,
                suite.seed(task::LOCAL_PROB),
                suite.threads,
            )?;
            files.push(json_file("local_prob.json", hash, json!(local)));
            let q = BigJumpQuery {
                window: w.big_jump_window,
                ..BigJumpQuery::for_spec(&cfg.law, w.big_jump_n, w.big_jump_x, w.big_jump_replicas)
            };
            let prof = big_jump_profile(&cfg.law, &q, suite.seed(task::BIG_JUMP), suite.threads)?;
            files.push(csv_file("big_jump.csv", hash, "replica,tau,tau2,jump_over_n", strip_header(&prof.to_csv())));
            let mut summary = serde_json::to_value(&prof).expect("json");
            summary.as_object_mut().expect("object").remove("rows");
            files.push(json_file("big_jump.json", hash, summary));
        }
        Stage::Thermo => {
            let t = &cfg.thermo;
            let mut fn_body = String::new();
            let mut gibbs_body = String::new();
            let mut summary = Vec::new();
            for &n in &t.horizons {
                let params = suite.params(n)?;
                let seed = derive_seed(suite.seed(task::THERMO), 0, n as u64);
                let traces = partition_traces(&params, &cfg.beta_grid, seed, t.replicas, suite.threads);
                let ok: Vec<_> = traces.into_iter().filter_map(|r| r.ok()).filter(|t| t.survived).collect();
                for (i, &b) in cfg.beta_grid.iter().enumerate() {
                    let vals: Vec<f64> = ok.iter().map(|t| t.f_n_values[i]).collect();
                    let mean = if vals.is_empty() { f64::NAN } else { mean_stderr(&vals).0 };
                    let limit = crate::laws::free_energy_of(&suite.law, b)?;
                    fn_body.push_str(&format!("{n},{b},{mean},{limit}\n"));
                }
                let mut g_summary = Vec::new();
                for &b in &t.gibbs_betas {
                    let gseed = derive_seed(suite.seed(task::GIBBS), n as u64, b.to_bits());
                    let stats: Vec<_> = gibbs_stats_many(&params, b, gseed, t.replicas, suite.threads)
                        .into_iter()
                        .filter_map(|r| r.ok())
                        .collect();
                    let pr: Vec<f64> = stats.iter().map(|s| s.participation_ratio).collect();
                    let top: Vec<f64> = stats.iter().map(|s| s.max_atom).collect();
                    let (pr_mean, pr_se) = if pr.is_empty() { (f64::NAN, f64::NAN) } else { mean_stderr(&pr) };
                    let top_mean = if top.is_empty() { f64::NAN } else { mean_stderr(&top).0 };
                    gibbs_body.push_str(&format!("{n},{b},{pr_mean},{top_mean}\n"));
                    g_summary.push(json!({"beta": b, "participation_ratio": pr_mean, "stderr": pr_se, "max_atom": top_mean, "samples": stats.len()}));
                }
                summary.push(json!({"n": n, "survived": ok.len(), "replicas": t.replicas, "gibbs": g_summary}));
            }
            files.push(csv_file("thermo_fn.csv", hash, THERMO_FN_HEADER, &fn_body));
            files.push(csv_file("thermo_gibbs.csv", hash, THERMO_GIBBS_HEADER, &gibbs_body));
            files.push(json_file("thermo.json", hash, json!(summary)));
        }
        Stage::ManyToOne => {
            let reports = suite.many_to_one()?;
            let v: Vec<Value> = reports
                .iter()
                .map(|(g, r)| json!({"g": g, "report": r, "z": r.z_score()}))
                .collect();
            let mart: Vec<Value> = suite
                .martingale_means()?
                .into_iter()
                .map(|(n, mean, se, aborted)| json!({"n": n, "mean_w": mean, "stderr": se, "aborted": aborted}))
                .collect();
            files.push(json_file("many_to_one.json", hash, json!({"many_to_one": v, "martingale": mart})));
        }
    }
    Ok(files)
}

fn strip_header(csv: &str) -> &str {
    csv.split_once('\n').map(|(_, rest)| rest).unwrap_or("")
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub files: Vec<OutputFile>,
    pub acceptance: Option<Vec<CriterionOutcome>>,
    pub timing: BTreeMap<String, f64>,
}

impl RunOutcome {
    pub fn aborted_total(&self) -> usize {
        self.manifest.abort_counts.values().sum()
    }

    pub fn acceptance_failed(&self) -> bool {
        self.acceptance.as_ref().is_some_and(|a| a.iter().any(|c| !c.passed))
    }

    /// Writes every file under `out/<manifest hash>/` and returns that path.
    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        let dir = out.join(&self.manifest.manifest_hash);
        let io = |e: std::io::Error| Error::Config(format!("cannot write {}: {e}", dir.display()));
        std::fs::create_dir_all(&dir).map_err(io)?;
        for f in &self.files {
            std::fs::write(dir.join(&f.name), &f.contents).map_err(io)?;
        }
        let manifest = serde_json::to_string_pretty(&self.manifest).expect("json") + "\n";
        std::fs::write(dir.join("manifest.json"), manifest).map_err(io)?;
        let timing = serde_json::to_string_pretty(&self.timing).expect("json") + "\n";
        std::fs::write(dir.join("timing.json"), timing).map_err(io)?;
        Ok(dir)
    }
}

/// Runs the given stages, and the acceptance suite when `acceptance` is set.
pub fn run(suite: &Suite, stages: &[Stage], acceptance: bool) -> Result<RunOutcome> {
    let mut manifest = RunManifest::new(&suite.config);
    let hash = manifest.manifest_hash.clone();
    let mut files = Vec::new();
    let mut timing = BTreeMap::new();
    for &s in stages {
        let t = Instant::now();
        files.extend(render_stage(suite, s, &hash)?);
        timing.insert(s.name().to_string(), t.elapsed().as_secs_f64());
    }
    let acceptance = if acceptance {
        let outcomes = checks::run_all(suite, &mut timing);
        files.push(csv_file(
            "acceptance.csv",
            &hash,
            "id,name,passed,detail",
            &outcomes.iter().map(|c| c.csv_row()).collect::<String>(),
        ));
        files.push(json_file("acceptance.json", &hash, json!(outcomes)));
        Some(outcomes)
    } else {
        None
    };
    manifest.abort_counts = suite.abort_counts();
    Ok(RunOutcome {
        manifest,
        files,
        acceptance,
        timing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ExperimentConfig {
        ExperimentConfig {
            horizons: vec![4, 6],
            ..ExperimentConfig::default()
        }
        .scaled(1e-3)
    }

    #[test]
    fn manifest_hash_tracks_config() {
        let a = RunManifest::new(&tiny());
        let b = RunManifest::new(&tiny());
        assert_eq!(a, b);
        let c = RunManifest::new(&ExperimentConfig { root_seed: 1, ..tiny() });
        assert_ne!(a.manifest_hash, c.manifest_hash);
        assert_eq!(a.manifest_hash.len(), 16);
    }

    #[test]
    fn every_output_embeds_the_manifest_hash() {
        let suite = Suite::new(tiny(), 1).unwrap();
        let out = run(&suite, &[Stage::Simulate, Stage::Tail, Stage::Cstar], false).unwrap();
        let h = &out.manifest.manifest_hash;
        assert!(!out.files.is_empty());
        for f in &out.files {
            assert!(f.contents.contains(h.as_str()), "{}", f.name);
        }
    }

    #[test]
    fn zero_replicas_is_a_config_error() {
        let cfg = ExperimentConfig {
            replicas: vec![0, 0],
            ..ExperimentConfig::default()
        };
        assert!(matches!(Suite::new(cfg, 1), Err(Error::Config(_))));
    }
}
