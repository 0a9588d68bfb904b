// Single-node and tandem violation bounds against the delay budget, and
// the closed-form tandem bound against numerical convolution.

use tandem_qos::arrival::ArrivalParams;
use tandem_qos::snc::{
    single_bound, solve_theta_star, tandem_bound, tandem_bound_numeric, QosTarget,
};

pub fn run_example() -> tandem_qos::Result<f64> {
    let q = solve_theta_star(&ArrivalParams::default(), &QosTarget::default())?.exponent;
    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "d (ms)", "single", "tandem", "numeric"
    );
    let mut worst: f64 = 0.0;
    for i in 0..=30 {
        let d = i as f64;
        let closed = tandem_bound(&q, &q, d)?;
        let numeric = tandem_bound_numeric(&q, &q, d);
        worst = worst.max((closed - numeric).abs());
        if i % 3 == 0 {
            println!(
                "{d:>6} {:>12.4e} {closed:>12.4e} {numeric:>12.4e}",
                single_bound(&q, d)
            );
        }
    }
    println!("largest closed-form vs numeric gap: {worst:.2e}");
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example().map(|_| ())
}
