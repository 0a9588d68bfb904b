//! Experiment commands behind the `tandem-qos` binary.
//!
//! Each `cmd_*` function computes its result from an [`ExperimentConfig`]
//! and returns it as data; [`Output`] renders the CSV/JSON files the
//! binary writes. CSV files start with a `#` line carrying the config hash
//! and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::allocator::{
    baseline_service_slots, ConstantRate, FixedLevel, PowerPolicy, PowerVector,
};
use crate::channel::{rate_of, ChannelParams, SlotChannel};
use crate::config::{ExperimentConfig, LinkConfig};
use crate::error::{Error, Result};
use crate::learner::evaluate::{evaluate_link, service_cap, LinkReport};
use crate::learner::train::{reference_level, ValidationRow};
use crate::learner::{evaluate, train, Checkpoint, LinkSpec, PolicyParams, Report, TrainLog};
use crate::queueing::sharded_tandem_curve;
use crate::service::{service_pmf, RateStats};
use crate::snc::{
    max_feasible_theta, optimized_tandem_bound, single_bound, solve_theta_star, tandem_bound,
    ThetaStar,
};
use crate::stats::{ks_test_normal, KsResult, MeanEstimate, Proportion};

/// Independent Monte Carlo shards for the long tandem simulations.
pub const SIM_SHARDS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Ul,
    Dl,
}

impl Link {
    pub fn name(self) -> &'static str {
        match self {
            Link::Ul => "ul",
            Link::Dl => "dl",
        }
    }

    pub fn config(self, cfg: &ExperimentConfig) -> &LinkConfig {
        match self {
            Link::Ul => &cfg.ul,
            Link::Dl => &cfg.dl,
        }
    }
}

/// `# config_sha256=… seed=…`
pub fn provenance_line(cfg: &ExperimentConfig) -> String {
    format!("# config_sha256={} seed={}\n", cfg.hash(), cfg.seed)
}

/// Seed for one (purpose, link, INR) combination, derived from the config
/// seed so every command is reproducible on its own.
fn derived_seed(cfg: &ExperimentConfig, purpose: u64, link: Option<Link>, inr_db: f64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let link_id = link.map_or(0, |l| l as u64 + 1);
    rng.set_stream(purpose << 40 | link_id << 32 | (inr_db * 1000.0).round() as i64 as u32 as u64);
    rng.next_u64()
}

fn theta_star(cfg: &ExperimentConfig) -> Result<ThetaStar> {
    solve_theta_star(&cfg.arrival, &cfg.qos)
}

pub fn checkpoint_path(out_dir: &Path, link: Link, inr_db: f64) -> PathBuf {
    out_dir
        .join("checkpoints")
        .join(format!("{}_inr{}.json", link.name(), inr_db))
}

// ---------------------------------------------------------------- solve-theta

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SolveTheta {
    /// θ* (1/ms).
    pub theta_star: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub ln_a: f64,
    /// `ln A / θ*` (ms).
    pub x0: f64,
    pub bound_at_d_max: f64,
    /// θ* sits at the lower search edge: the target is met for any θ.
    pub at_lower_edge: bool,
}

pub fn cmd_solve_theta(cfg: &ExperimentConfig) -> Result<SolveTheta> {
    let t = theta_star(cfg)?;
    let q = t.exponent;
    Ok(SolveTheta {
        theta_star: q.theta(),
        a: q.a_const(),
        ln_a: q.ln_a(),
        x0: q.x0(),
        bound_at_d_max: t.bound,
        at_lower_edge: t.at_lower_edge,
    })
}

// ---------------------------------------------------------------- bound-curve

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundRow {
    pub d_max_ms: f64,
    pub single_bound: f64,
    pub tandem_bound: f64,
}

/// Single-node and tandem bounds at θ* over the configured delay sweep.
pub fn cmd_bound_curve(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let q = theta_star(cfg)?.exponent;
    cfg.bound_sim
        .d_grid()
        .into_iter()
        .map(|d| {
            Ok(BoundRow {
                d_max_ms: d,
                single_bound: single_bound(&q, d),
                tandem_bound: tandem_bound(&q, &q, d)?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- bound-vs-sim

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundSimRow {
    pub d_max_ms: f64,
    pub tandem_bound: f64,
    /// Exponent attaining the bound (1/ms).
    pub theta: f64,
    pub mc: Proportion,
}

/// Exponential service at both nodes (mean `bound_sim.mean_service_ms`)
/// fed by the configured arrivals: the tandem bound, minimized over the
/// admissible θ, against a Monte Carlo estimate.
pub fn cmd_bound_vs_sim(cfg: &ExperimentConfig) -> Result<Vec<BoundSimRow>> {
    let b = &cfg.bound_sim;
    let mean = b.mean_service_ms;
    // E[e^{θδ}] = 1/(1 − θ·mean) for θ < 1/mean.
    let ln_mgf = |t: f64| {
        if t * mean < 1.0 {
            -(1.0 - t * mean).ln()
        } else {
            f64::INFINITY
        }
    };
    let theta_max = max_feasible_theta(&cfg.arrival, ln_mgf, 1.0 / mean).ok_or_else(|| {
        Error::infeasible(format!(
            "mean service {mean} ms is not stable under these arrivals"
        ))
    })?;
    let grid = b.d_grid();
    let service = Exp::new(1.0 / mean).map_err(|e| Error::invalid(e.to_string()))?;
    let arrivals = cfg.arrival;
    let draw = |rng: &mut ChaCha8Rng| {
        (
            arrivals.sample_interarrival(rng),
            service.sample(rng),
            service.sample(rng),
        )
    };
    let mc = sharded_tandem_curve(
        b.n_packets,
        SIM_SHARDS,
        derived_seed(cfg, 1, None, 0.0),
        &grid,
        draw,
    )?;
    grid.iter()
        .zip(mc)
        .map(|(&d, mc)| {
            let (bound, theta) = optimized_tandem_bound(&cfg.arrival, theta_max, d)?;
            Ok(BoundSimRow {
                d_max_ms: d,
                tandem_bound: bound,
                theta,
                mc,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- policies

/// Power policy used by the single-link commands.
#[derive(Debug, Clone)]
pub enum LinkPolicy {
    /// Water-filling at a fixed level.
    Fixed(FixedLevel),
    Learned(PolicyParams),
    Baseline(ConstantRate),
}

impl PowerPolicy for LinkPolicy {
    fn allocate(&self, slot: &SlotChannel) -> PowerVector {
        match self {
            LinkPolicy::Fixed(p) => p.allocate(slot),
            LinkPolicy::Learned(p) => p.allocate(slot),
            LinkPolicy::Baseline(p) => p.allocate(slot),
        }
    }

    fn allocate_batch(&self, slots: &[SlotChannel]) -> Vec<PowerVector> {
        match self {
            LinkPolicy::Fixed(p) => p.allocate_batch(slots),
            LinkPolicy::Learned(p) => p.allocate_batch(slots),
            LinkPolicy::Baseline(p) => p.allocate_batch(slots),
        }
    }
}

impl LinkPolicy {
    pub fn describe(&self) -> String {
        match self {
            LinkPolicy::Fixed(p) => format!("fixed water level {:.6e} W", p.0),
            LinkPolicy::Learned(p) => format!("learned policy {:?}", p.dims()),
            LinkPolicy::Baseline(p) => format!("constant rate {:.6e} bit/s", p.rate),
        }
    }
}

/// Water-filling at the mean water level of the constant-rate allocation
/// that sends a packet over `x₀`.
pub fn reference_policy(cfg: &ExperimentConfig, link: Link, inr_db: f64) -> Result<LinkPolicy> {
    let q = theta_star(cfg)?.exponent;
    let chan = cfg.channel_params(link.config(cfg), inr_db)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg, 2, Some(link), inr_db));
    let probe = chan.sample_slots(2048, &mut rng);
    let (level, _) = reference_level(&probe, &cfg.link_setup(link.config(cfg), q))?;
    Ok(LinkPolicy::Fixed(FixedLevel(level)))
}

// ---------------------------------------------------------------- service-dist

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PmfRow {
    pub k: usize,
    pub gaussian: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ServiceDist {
    pub link: Link,
    pub inr_db: f64,
    pub policy: String,
    pub n_packets: usize,
    pub stats: RateStats,
    pub total_variation: f64,
    pub rows: Vec<PmfRow>,
}

/// Service-time PMF of one link under `policy`: the Gaussian
/// approximation fitted to the simulated slot rates, against the
/// histogram of the simulated service times. Simulates `eval.n_slots`
/// slots.
pub fn cmd_service_dist(
    cfg: &ExperimentConfig,
    link: Link,
    inr_db: f64,
    policy: &LinkPolicy,
) -> Result<ServiceDist> {
    let q = theta_star(cfg)?.exponent;
    let lc = link.config(cfg);
    let chan = cfg.channel_params(lc, inr_db)?;
    let cap = service_cap(&cfg.qos, chan.slot_len);
    let seed = derived_seed(cfg, 3, Some(link), inr_db);
    let rep = evaluate_link(
        policy,
        &chan,
        lc.packet_bits,
        &cfg.arrival,
        &q,
        cfg.eval.n_slots,
        cap,
        seed,
    )?;
    let stats = rep
        .rate_stats
        .ok_or(Error::EmptyClass("interfered or interference-free"))?;
    let ga = service_pmf(
        &stats,
        &cfg.link_setup(lc, q).service(),
        cfg.train.pmf_tol,
        cap,
    )?;
    let len = ga.pmf.len().max(rep.service.pmf.len());
    let rows = (0..len)
        .map(|i| PmfRow {
            k: i + 1,
            gaussian: ga.pmf.get(i).copied().unwrap_or(0.0),
            empirical: rep.service.pmf.get(i).copied().unwrap_or(0.0),
        })
        .collect();
    Ok(ServiceDist {
        link,
        inr_db,
        policy: policy.describe(),
        n_packets: rep.n_packets,
        stats,
        total_variation: ga.total_variation(&rep.service),
        rows,
    })
}

// ---------------------------------------------------------------- baseline

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BaselineRow {
    pub inr_db: f64,
    pub k_slots: usize,
    pub ul_power: MeanEstimate,
    pub dl_power: MeanEstimate,
}

/// Average power of the fixed-service-time baseline at every INR of the
/// grid, over `eval.n_slots` slots per link.
pub fn cmd_baseline(cfg: &ExperimentConfig) -> Result<Vec<BaselineRow>> {
    let q = theta_star(cfg)?.exponent;
    let k = baseline_service_slots(&q, cfg.channel.slot_ms)?;
    cfg.channel
        .inr_grid_db
        .iter()
        .map(|&inr| {
            let power = |link: Link| -> Result<MeanEstimate> {
                let lc = link.config(cfg);
                let chan = cfg.channel_params(lc, inr)?;
                let policy = ConstantRate::for_packet(lc.packet_bits, k, chan.slot_len, chan.w0);
                let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg, 4, Some(link), inr));
                let mut acc = crate::stats::RunningMoments::default();
                let mut left = cfg.eval.n_slots;
                while left > 0 {
                    let slots = chan.sample_slots(left.min(4096), &mut rng);
                    left -= slots.len();
                    policy
                        .allocate_batch(&slots)
                        .iter()
                        .for_each(|p| acc.push(p.total()));
                }
                Ok(acc.estimate())
            };
            Ok(BaselineRow {
                inr_db: inr,
                k_slots: k,
                ul_power: power(Link::Ul)?,
                dl_power: power(Link::Dl)?,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone, Serialize)]
pub struct TrainOutcome {
    pub link: Link,
    pub inr_db: f64,
    pub selected_iter: usize,
    pub feasible: bool,
    pub validation: crate::learner::Objective,
    /// `mgf/A − 1` on the validation pool.
    pub normalized_constraint: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub params: PolicyParams,
    #[serde(skip)]
    pub log: TrainLog,
    #[serde(skip)]
    pub checkpoint: Checkpoint,
}

/// Trains the UL then the DL policy at `inr_db`. On divergence the error
/// is returned together with the log up to that point.
pub fn cmd_train(
    cfg: &ExperimentConfig,
    inr_db: f64,
) -> std::result::Result<Vec<TrainOutcome>, (Error, Option<TrainLog>)> {
    let q = theta_star(cfg).map_err(|e| (e, None))?.exponent;
    let mut out = Vec::new();
    for link in [Link::Ul, Link::Dl] {
        out.push(train_link(cfg, link, inr_db, q)?);
    }
    Ok(out)
}

/// Trains one link's policy.
pub fn train_link(
    cfg: &ExperimentConfig,
    link: Link,
    inr_db: f64,
    q: crate::snc::QosExponent,
) -> std::result::Result<TrainOutcome, (Error, Option<TrainLog>)> {
    let lc = link.config(cfg);
    let chan = cfg.channel_params(lc, inr_db).map_err(|e| (e, None))?;
    let setup = cfg.link_setup(lc, q);
    let seed = derived_seed(cfg, 5, Some(link), inr_db);
    let mut log = TrainLog::default();
    let trained = match train(
        &cfg.train,
        &chan,
        &setup,
        &mut ChaCha8Rng::seed_from_u64(seed),
        &mut log,
    ) {
        Ok(t) => t,
        Err(e) => return Err((e, Some(log))),
    };
    let checkpoint = Checkpoint::new(
        trained.params.clone(),
        trained.dual,
        trained.selected_iter,
        seed,
    );
    Ok(TrainOutcome {
        link,
        inr_db,
        selected_iter: trained.selected_iter,
        feasible: trained.feasible,
        validation: trained.validation,
        normalized_constraint: trained.validation.mgf / q.a_const() - 1.0,
        lambda: trained.dual.lambda,
        params: trained.params,
        log,
        checkpoint,
    })
}

fn load_policy(out_dir: &Path, link: Link, inr_db: f64) -> Result<PolicyParams> {
    let path = checkpoint_path(out_dir, link, inr_db);
    if !path.exists() {
        return Err(Error::Checkpoint(format!(
            "missing {} checkpoint for INR {inr_db} dB at {} (run `train` first)",
            link.name(),
            path.display()
        )));
    }
    Ok(Checkpoint::load(&path)?.params)
}

// ---------------------------------------------------------------- evaluate

/// Evaluates UL/DL policies at `inr_db` against the baseline.
pub fn evaluate_pair(
    cfg: &ExperimentConfig,
    inr_db: f64,
    ul: &LinkPolicy,
    dl: &LinkPolicy,
) -> Result<Report> {
    let q = theta_star(cfg)?.exponent;
    let (cu, cd) = (
        cfg.channel_params(&cfg.ul, inr_db)?,
        cfg.channel_params(&cfg.dl, inr_db)?,
    );
    evaluate(
        ul,
        dl,
        LinkSpec {
            chan: &cu,
            m_bits: cfg.ul.packet_bits,
        },
        LinkSpec {
            chan: &cd,
            m_bits: cfg.dl.packet_bits,
        },
        &cfg.arrival,
        &cfg.qos,
        &q,
        cfg.eval.n_slots,
        cfg.eval.n_packets,
        derived_seed(cfg, 6, None, inr_db),
    )
}

/// Evaluates the checkpoints stored under `out_dir` for `inr_db`.
pub fn cmd_evaluate(cfg: &ExperimentConfig, inr_db: f64) -> Result<Report> {
    let ul = LinkPolicy::Learned(load_policy(&cfg.out_dir, Link::Ul, inr_db)?);
    let dl = LinkPolicy::Learned(load_policy(&cfg.out_dir, Link::Dl, inr_db)?);
    evaluate_pair(cfg, inr_db, &ul, &dl)
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub inr_db: f64,
    /// `learned`, or `baseline` for the baseline-against-itself control.
    pub policy: String,
    pub ul_baseline_w: f64,
    pub ul_power_w: f64,
    pub ul_gain: f64,
    pub ul_audit: f64,
    pub dl_baseline_w: f64,
    pub dl_power_w: f64,
    pub dl_gain: f64,
    pub dl_audit: f64,
    pub violation: Proportion,
    pub baseline_violation: Proportion,
}

impl CompareRow {
    pub fn from_report(inr_db: f64, policy: &str, r: &Report) -> Self {
        CompareRow {
            inr_db,
            policy: policy.into(),
            ul_baseline_w: r.baseline_ul.mean_power.mean,
            ul_power_w: r.ul.mean_power.mean,
            ul_gain: r.gain_ul,
            ul_audit: r.ul.audit.product,
            dl_baseline_w: r.baseline_dl.mean_power.mean,
            dl_power_w: r.dl.mean_power.mean,
            dl_gain: r.gain_dl,
            dl_audit: r.dl.audit.product,
            violation: r.violation,
            baseline_violation: r.baseline_violation,
        }
    }
}

/// Learned against baseline power at every INR of the grid, from stored
/// checkpoints, plus one baseline-against-itself control row at the
/// configured INR.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::new();
    for &inr in &cfg.channel.inr_grid_db {
        rows.push(CompareRow::from_report(
            inr,
            "learned",
            &cmd_evaluate(cfg, inr)?,
        ));
    }
    let q = theta_star(cfg)?.exponent;
    let k = baseline_service_slots(&q, cfg.channel.slot_ms)?;
    let inr = cfg.channel.inr_db;
    let base = |l: &LinkConfig| {
        LinkPolicy::Baseline(ConstantRate::for_packet(
            l.packet_bits,
            k,
            cfg.channel.slot_ms,
            cfg.channel.rb_bandwidth_hz,
        ))
    };
    let control = evaluate_pair(cfg, inr, &base(&cfg.ul), &base(&cfg.dl))?;
    rows.push(CompareRow::from_report(inr, "baseline", &control));
    Ok(rows)
}

// ---------------------------------------------------------------- ks-test

#[derive(Debug, Clone, Serialize)]
pub struct KsReport {
    pub link: Link,
    pub inr_db: f64,
    pub policy: String,
    pub interfered: KsResult,
    pub interference_free: KsResult,
}

/// Per-class slot rates of `n` independent slots each.
pub fn class_rates(
    chan: &ChannelParams,
    policy: &impl PowerPolicy,
    n: usize,
    rng: &mut impl RngCore,
) -> (Vec<f64>, Vec<f64>) {
    let (mut inter, mut clear) = (Vec::with_capacity(n), Vec::with_capacity(n));
    while inter.len() < n || clear.len() < n {
        let slots = chan.sample_slots(1024, rng);
        for (slot, p) in slots.iter().zip(policy.allocate_batch(&slots)) {
            let r = rate_of(p.as_slice(), &slot.gamma, chan.w0);
            let bucket = if slot.interfered {
                &mut inter
            } else {
                &mut clear
            };
            if bucket.len() < n {
                bucket.push(r);
            }
        }
    }
    (inter, clear)
}

/// KS test of the per-class slot rates against Gaussians fitted to them,
/// `eval.ks_samples` slots per class.
pub fn cmd_ks_test(
    cfg: &ExperimentConfig,
    link: Link,
    inr_db: f64,
    policy: &LinkPolicy,
) -> Result<KsReport> {
    let chan = cfg.channel_params(link.config(cfg), inr_db)?;
    if !(chan.p_interf > 0.0 && chan.p_interf < 1.0) {
        return Err(Error::EmptyClass("interfered or interference-free"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derived_seed(cfg, 7, Some(link), inr_db));
    let (inter, clear) = class_rates(&chan, policy, cfg.eval.ks_samples, &mut rng);
    Ok(KsReport {
        link,
        inr_db,
        policy: policy.describe(),
        interfered: ks_test_normal(&inter),
        interference_free: ks_test_normal(&clear),
    })
}

// ---------------------------------------------------------------- rendering

/// Renders command results as CSV with the provenance line on top.
pub struct Output<'a> {
    pub cfg: &'a ExperimentConfig,
}

impl Output<'_> {
    fn csv(&self, header: &str, lines: impl IntoIterator<Item = String>) -> String {
        let mut s = provenance_line(self.cfg);
        s.push_str(header);
        s.push('\n');
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }

    pub fn bound_curve(&self, rows: &[BoundRow]) -> String {
        self.csv(
            "d_max_ms,single_bound,tandem_bound",
            rows.iter()
                .map(|r| format!("{},{:e},{:e}", r.d_max_ms, r.single_bound, r.tandem_bound)),
        )
    }

    pub fn bound_vs_sim(&self, rows: &[BoundSimRow]) -> String {
        self.csv(
            "d_max_ms,tandem_bound,theta,mc_violation,mc_std_err,mc_lower,mc_upper,mc_packets",
            rows.iter().map(|r| {
                format!(
                    "{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                    r.d_max_ms,
                    r.tandem_bound,
                    r.theta,
                    r.mc.estimate,
                    r.mc.std_err,
                    r.mc.lower,
                    r.mc.upper,
                    r.mc.trials
                )
            }),
        )
    }

    pub fn service_dist(&self, d: &ServiceDist) -> String {
        self.csv(
            "k,gaussian_pmf,empirical_pmf",
            d.rows
                .iter()
                .map(|r| format!("{},{:e},{:e}", r.k, r.gaussian, r.empirical)),
        )
    }

    pub fn baseline(&self, rows: &[BaselineRow]) -> String {
        self.csv(
            "inr_db,k_slots,ul_power_w,ul_std_err,dl_power_w,dl_std_err",
            rows.iter().map(|r| {
                format!(
                    "{},{},{:e},{:e},{:e},{:e}",
                    r.inr_db,
                    r.k_slots,
                    r.ul_power.mean,
                    r.ul_power.std_err,
                    r.dl_power.mean,
                    r.dl_power.std_err
                )
            }),
        )
    }

    pub fn train_log(&self, log: &TrainLog) -> String {
        let mut s = provenance_line(self.cfg);
        s.push_str(&log.to_csv());
        s
    }

    pub fn validation_log(&self, rows: &[ValidationRow]) -> String {
        self.csv(
            "iter,mean_power_w,constraint_value,feasible",
            rows.iter().map(|r| {
                format!(
                    "{},{:e},{:e},{}",
                    r.iter, r.mean_power_w, r.constraint_value, r.feasible
                )
            }),
        )
    }

    pub fn compare(&self, rows: &[CompareRow]) -> String {
        self.csv(
            "inr_db,policy,ul_baseline_w,ul_power_w,ul_gain,ul_audit,dl_baseline_w,dl_power_w,dl_gain,dl_audit,\
             violation,violation_std_err,baseline_violation,baseline_violation_std_err",
            rows.iter().map(|r| {
                let mut s = String::new();
                write!(
                    s,
                    "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                    r.inr_db,
                    r.policy,
                    r.ul_baseline_w,
                    r.ul_power_w,
                    r.ul_gain,
                    r.ul_audit,
                    r.dl_baseline_w,
                    r.dl_power_w,
                    r.dl_gain,
                    r.dl_audit,
                    r.violation.estimate,
                    r.violation.std_err,
                    r.baseline_violation.estimate,
                    r.baseline_violation.std_err
                )
                .expect("writing to a String");
                s
            }),
        )
    }
}

/// The JSON form of a link report without the PMF.
pub fn link_summary(r: &LinkReport) -> serde_json::Value {
    serde_json::json!({
        "mean_power_w": r.mean_power.mean,
        "std_err_w": r.mean_power.std_err,
        "n_packets": r.n_packets,
        "censored": r.censored,
        "audit_product": r.audit.product,
        "audit_feasible": r.audit.feasible,
    })
}
