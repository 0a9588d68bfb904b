// Trains UL and DL policies across the INR grid and prints the power
// saved against the baseline, with the moment audit and the end-to-end
// violation estimate. Takes several minutes in release mode.

use tandem_qos::cli::{cmd_train, evaluate_pair, CompareRow, LinkPolicy, Output};
use tandem_qos::config::{ExperimentConfig, ExperimentKind};

pub fn run_example(cfg: &ExperimentConfig) -> tandem_qos::Result<Vec<CompareRow>> {
    let mut rows = Vec::new();
    for &inr in &cfg.channel.inr_grid_db {
        eprintln!("INR {inr} dB");
        let trained = cmd_train(cfg, inr).map_err(|(e, _)| e)?;
        let [ul, dl] = [0, 1].map(|i| LinkPolicy::Learned(trained[i].params.clone()));
        let r = evaluate_pair(cfg, inr, &ul, &dl)?;
        rows.push(CompareRow::from_report(inr, "learned", &r));
    }
    print!("{}", Output { cfg }.compare(&rows));
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    let mut cfg = ExperimentConfig::preset(ExperimentKind::Smoke);
    if let Some(n) = std::env::args().nth(1).and_then(|s| s.parse().ok()) {
        cfg.train.n_iters = n;
    }
    run_example(&cfg).map(|_| ())
}
