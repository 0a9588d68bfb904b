// Experiment configs: presets, partial JSON overrides and the hash that
// tags every output file.

use tandem_qos::cli::provenance_line;
use tandem_qos::config::{ExperimentConfig, ExperimentKind};

pub fn run_example() -> tandem_qos::Result<ExperimentConfig> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "kind": "smoke",
            "seed": 7,
            "qos": { "d_max_ms": 25.0, "eps_max": 1e-3 },
            "channel": { "inr_db": 15.0 },
            "train": { "n_iters": 300 }
        }"#,
    )?;
    assert_eq!(cfg.kind, ExperimentKind::Smoke);
    println!(
        "UL: {} RBs, {:.1} bit packets",
        cfg.ul.n_rb, cfg.ul.packet_bits
    );
    println!(
        "DL: {} RBs, {:.1} bit packets",
        cfg.dl.n_rb, cfg.dl.packet_bits
    );
    println!(
        "network {:?}, {} iterations",
        cfg.train.dims, cfg.train.n_iters
    );
    print!("{}", provenance_line(&cfg));

    let table = ExperimentConfig::default();
    println!("default config hash {}", table.hash());

    match ExperimentConfig::from_json(r#"{"channel": {"n_antenas": 4}}"#) {
        Ok(_) => println!("typo accepted?"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(cfg)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    let cfg = run_example()?;
    if std::env::args().any(|a| a == "--dump") {
        println!("{}", cfg.to_json());
    }
    Ok(())
}
