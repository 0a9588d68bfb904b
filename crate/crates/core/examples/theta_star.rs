// QoS exponent for the 120 fps source with a 20 ms, 1e-3 delay target.
//
// Run with `cargo run --example theta_star`.

use tandem_qos::arrival::ArrivalParams;
use tandem_qos::snc::{solve_theta_star, tandem_bound, QosTarget};

pub fn run_example() -> tandem_qos::Result<f64> {
    let arrivals = ArrivalParams::default();
    let target = QosTarget::new(20.0, 1e-3)?;
    let star = solve_theta_star(&arrivals, &target)?;
    let q = star.exponent;
    println!("theta* = {:.12} 1/ms", q.theta());
    println!("A      = {:.6} (ln A = {:.6})", q.a_const(), q.ln_a());
    println!("x0     = {:.6} ms", q.x0());
    println!(
        "bound at {} ms = {:.3e}",
        target.d_max_ms,
        tandem_bound(&q, &q, target.d_max_ms)?
    );

    // Looser budgets need a smaller exponent.
    for d in [15.0, 30.0, 50.0] {
        let t = solve_theta_star(&arrivals, &QosTarget::new(d, 1e-3)?)?;
        println!("D_max = {d:>4} ms -> theta* = {:.4}", t.exponent.theta());
    }
    Ok(q.theta())
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example().map(|_| ())
}
