// Exact FIFO delays through one node and through the UL/DL tandem for a
// short random trace, then a violation estimate from a long one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tandem_qos::arrival::ArrivalParams;
use tandem_qos::queueing::{
    default_warmup, delay_single, delay_tandem, empirical_violation, Trace,
};

pub fn run_example() -> tandem_qos::Result<f64> {
    let arrivals = ArrivalParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let n = 8;
    let tau = arrivals.sample_interarrivals(n - 1, &mut rng);
    let s1: Vec<f64> = (0..n).map(|_| rng.random_range(2..=9) as f64).collect();
    let s2: Vec<f64> = (0..n).map(|_| rng.random_range(2..=9) as f64).collect();
    let trace = Trace::new(tau, s1, Some(s2))?;
    let one = delay_single(&trace);
    let both = delay_tandem(&trace)?;
    println!(
        "{:>3} {:>8} {:>8} {:>10} {:>10}",
        "n", "delta1", "delta2", "D single", "D tandem"
    );
    for i in 0..n {
        println!(
            "{i:>3} {:>8} {:>8} {:>10.3} {:>10.3}",
            trace.service1()[i],
            trace.service2().unwrap()[i],
            one.as_slice()[i],
            both.as_slice()[i]
        );
    }
    print!("\ntrace as CSV:\n{}", trace.to_csv());

    // Heavier run: service uniform on 1..=8 slots at both nodes.
    let n = 200_000;
    let tau = arrivals.sample_interarrivals(n - 1, &mut rng);
    let s1 = (0..n).map(|_| rng.random_range(1..=8) as f64).collect();
    let s2 = (0..n).map(|_| rng.random_range(1..=8) as f64).collect();
    let delays = delay_tandem(&Trace::new(tau, s1, Some(s2))?)?;
    let v = empirical_violation(&delays, 20.0, default_warmup(n))?;
    println!(
        "\nP(D >= 20 ms) = {:.3e}  (95% CI {:.3e} .. {:.3e}, {} packets)",
        v.estimate, v.lower, v.upper, v.trials
    );
    Ok(v.estimate)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example().map(|_| ())
}
