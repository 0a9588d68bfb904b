// Exponential service (mean 5 ms) at both nodes: the tandem bound,
// tightened over all admissible exponents, against simulation.
//
// `cargo run --release --example bound_vs_simulation -- 10000000` runs
// the full ten million packets; the default is one million.

use tandem_qos::cli::cmd_bound_vs_sim;
use tandem_qos::config::ExperimentConfig;

pub fn run_example(n_packets: usize) -> tandem_qos::Result<Vec<(f64, f64, f64)>> {
    let mut cfg = ExperimentConfig::default();
    cfg.bound_sim.n_packets = n_packets;
    cfg.bound_sim.d_step_ms = 10.0;
    let rows = cmd_bound_vs_sim(&cfg)?;
    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "d (ms)", "bound", "simulated", "std err"
    );
    for r in &rows {
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>10.2e}",
            r.d_max_ms, r.tandem_bound, r.mc.estimate, r.mc.std_err
        );
    }
    println!(
        "bound minimized at theta = {:.4} /ms",
        rows.last().map_or(f64::NAN, |r| r.theta)
    );
    Ok(rows
        .iter()
        .map(|r| (r.d_max_ms, r.tandem_bound, r.mc.estimate))
        .collect())
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    let n = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1_000_000);
    run_example(n).map(|_| ())
}
