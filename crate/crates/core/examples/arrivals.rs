// The truncated-Gaussian inter-arrival process: moments, sampling and
// the negative exponential moment that enters every bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tandem_qos::arrival::ArrivalParams;

pub fn run_example() -> tandem_qos::Result<()> {
    let a = ArrivalParams::default();
    println!(
        "mu = {:.3} ms, sigma = {} ms, support [{:.2}, {:.2}] ms",
        a.mu(),
        a.sigma(),
        a.b1(),
        a.b2()
    );
    println!(
        "truncated mean {:.4} ms, variance {:.4} ms^2",
        a.truncated_mean(),
        a.truncated_variance()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let gaps = a.sample_interarrivals(200_000, &mut rng);
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    println!("sample mean over {} gaps: {mean:.4} ms", gaps.len());

    for theta in [0.1, 0.5, 1.0, 1.2675] {
        let exact = a.neg_mgf(theta)?;
        let mc = gaps.iter().map(|t| (-theta * t).exp()).sum::<f64>() / gaps.len() as f64;
        println!("E[exp(-{theta} tau)] = {exact:.6e}  (Monte Carlo {mc:.6e})");
    }

    let slow = ArrivalParams::from_frame_rate(60.0)?;
    println!("60 fps source: mean gap {:.3} ms", slow.truncated_mean());
    Ok(())
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example()
}
