// Per-class slot rates under fixed-level water-filling, tested for
// normality with Kolmogorov-Smirnov on both links.

use tandem_qos::cli::{cmd_ks_test, reference_policy, Link};
use tandem_qos::config::ExperimentConfig;

pub fn run_example() -> tandem_qos::Result<Vec<f64>> {
    let cfg = ExperimentConfig::default();
    let mut p_values = Vec::new();
    for link in [Link::Ul, Link::Dl] {
        let policy = reference_policy(&cfg, link, cfg.channel.inr_db)?;
        let r = cmd_ks_test(&cfg, link, cfg.channel.inr_db, &policy)?;
        for (class, ks) in [
            ("interfered", &r.interfered),
            ("clear", &r.interference_free),
        ] {
            println!(
                "{} {class:<10} n={} mean {:.4e} std {:.3e}  D={:.4} p={:.3}",
                link.name(),
                ks.n,
                ks.fitted_mean,
                ks.fitted_std,
                ks.statistic,
                ks.p_value
            );
            p_values.push(ks.p_value);
        }
    }
    Ok(p_values)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example().map(|_| ())
}
