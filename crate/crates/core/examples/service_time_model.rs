// Gaussian-approximation service-time PMF for the UL link against the
// PMF observed when the same policy serves packets back to back.

use tandem_qos::cli::{cmd_service_dist, reference_policy, Link};
use tandem_qos::config::ExperimentConfig;

pub fn run_example(n_slots: usize) -> tandem_qos::Result<f64> {
    let mut cfg = ExperimentConfig::default();
    cfg.eval.n_slots = n_slots;
    let policy = reference_policy(&cfg, Link::Ul, cfg.channel.inr_db)?;
    let d = cmd_service_dist(&cfg, Link::Ul, cfg.channel.inr_db, &policy)?;
    println!("policy: {}", d.policy);
    println!(
        "interfered slots: rate {:.4e} +/- {:.3e} bit/s",
        d.stats.mu_i,
        d.stats.var_i.sqrt()
    );
    println!(
        "clear slots:      rate {:.4e} +/- {:.3e} bit/s",
        d.stats.mu_u,
        d.stats.var_u.sqrt()
    );
    println!("{:>3} {:>10} {:>10}", "k", "gaussian", "simulated");
    for r in d
        .rows
        .iter()
        .filter(|r| r.gaussian > 1e-6 || r.empirical > 0.0)
    {
        println!("{:>3} {:>10.5} {:>10.5}", r.k, r.gaussian, r.empirical);
    }
    println!(
        "total variation {:.4} over {} packets",
        d.total_variation, d.n_packets
    );
    Ok(d.total_variation)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000_000);
    run_example(n).map(|_| ())
}
