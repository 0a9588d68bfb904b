// Water-filling over the RBs of one slot, at a given level and for a
// target rate, and the fixed-service-time baseline built on it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tandem_qos::allocator::{
    baseline_average_power, baseline_service_slots, waterfill_at_level, waterfill_for_rate,
};
use tandem_qos::arrival::ArrivalParams;
use tandem_qos::channel::{slot_rate, ChannelParams};
use tandem_qos::snc::{solve_theta_star, QosTarget};

pub fn run_example() -> tandem_qos::Result<f64> {
    let chan = ChannelParams::from_db(8, 110.5, 180e3, -173.0, 52, 1.0, 0.5, 10.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let slot = chan.sample_slot(&mut rng);
    println!("slot interfered: {}, {} RBs", slot.interfered, slot.n_rb());

    let level = 2e-4;
    let p = waterfill_at_level(&slot.gamma, level);
    let active = p.as_slice().iter().filter(|x| **x > 0.0).count();
    println!(
        "level {level:e} W: {active} active RBs, {:.4e} W, {:.3e} bit/s",
        p.total(),
        slot_rate(p.as_slice(), &slot, chan.w0)?
    );

    let target = 1e5 / 6e-3;
    let (p, w) = waterfill_for_rate(&slot.gamma, target, chan.w0)?;
    println!(
        "rate {target:.4e} bit/s needs level {w:.4e} W, total {:.4e} W (achieved {:.6e})",
        p.total(),
        slot_rate(p.as_slice(), &slot, chan.w0)?
    );

    let q = solve_theta_star(&ArrivalParams::default(), &QosTarget::default())?.exponent;
    let k = baseline_service_slots(&q, 1.0)?;
    println!("\nbaseline: every packet served in {k} slots");
    let mut last = 0.0;
    for inr in [0.0, 5.0, 10.0, 15.0, 20.0] {
        let c = ChannelParams::from_db(8, 110.5, 180e3, -173.0, 52, 1.0, 0.5, inr)?;
        let est = baseline_average_power(&c, 1e5, k, &mut rng, 20_000)?;
        println!(
            "  INR {inr:>4} dB: UL power {:.4e} W (+/- {:.1e})",
            est.mean, est.std_err
        );
        last = est.mean;
    }
    Ok(last)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example().map(|_| ())
}
