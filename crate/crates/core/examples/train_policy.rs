// Trains the small UL policy at INR 10 dB and compares it with the
// fixed-service-time baseline.
//
// `cargo run --release --example train_policy -- 2000` for a full run.

use tandem_qos::cli::{evaluate_pair, train_link, Link, LinkPolicy};
use tandem_qos::config::{ExperimentConfig, ExperimentKind};
use tandem_qos::snc::solve_theta_star;

pub fn run_example(n_iters: usize) -> tandem_qos::Result<f64> {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Smoke);
    cfg.train.n_iters = n_iters;
    cfg.train.eval_every = (n_iters / 10).max(1);
    cfg.eval.n_slots = 50_000;
    cfg.eval.n_packets = 100_000;
    let inr = 10.0;
    let q = solve_theta_star(&cfg.arrival, &cfg.qos)?.exponent;

    let t = train_link(&cfg, Link::Ul, inr, q).map_err(|(e, _)| e)?;
    for row in t.log.rows.iter().step_by((n_iters / 8).max(1)) {
        println!(
            "iter {:>5}: power {:.4e} W  mgf/A - 1 = {:+.3}  lambda = {:.3e}",
            row.iter,
            row.mean_power_w,
            row.constraint_value / q.a_const(),
            row.lambda
        );
    }
    println!(
        "kept iteration {} (feasible: {}), validation power {:.4e} W",
        t.selected_iter, t.feasible, t.validation.mean_power
    );

    let learned = LinkPolicy::Learned(t.params);
    let r = evaluate_pair(&cfg, inr, &learned, &learned_dl(&cfg, inr)?)?;
    println!(
        "UL power {:.4e} W vs baseline {:.4e} W: gain {:+.1}%  audit {:.3}",
        r.ul.mean_power.mean,
        r.baseline_ul.mean_power.mean,
        100.0 * r.gain_ul,
        r.ul.audit.product
    );
    Ok(r.gain_ul)
}

// DL is served by the reference-level policy here; it only matters for
// the end-to-end part of the report.
fn learned_dl(cfg: &ExperimentConfig, inr: f64) -> tandem_qos::Result<LinkPolicy> {
    tandem_qos::cli::reference_policy(cfg, Link::Dl, inr)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(400);
    run_example(n).map(|_| ())
}
