// The policy network treats resource blocks as a set: permuting the RBs
// of a slot permutes the allocation and leaves the water level alone.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tandem_qos::allocator::PowerPolicy;
use tandem_qos::channel::{ChannelParams, SlotChannel};
use tandem_qos::learner::PolicyParams;

pub fn run_example() -> tandem_qos::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chan = ChannelParams::from_db(8, 110.5, 180e3, -173.0, 16, 1.0, 0.5, 10.0)?;
    let probe = chan.sample_slots(256, &mut rng);
    let mut params = PolicyParams::init_for(&[1, 8, 16, 16, 8, 1], &probe, 2e-4, &mut rng)?;
    // Random last layer too, so the output actually depends on the input.
    let last = params.layers.last_mut().unwrap();
    for t in last.tensors_mut() {
        t.iter_mut()
            .for_each(|w| *w = rand::Rng::random_range(&mut rng, -0.5..0.5));
    }

    let slot = chan.sample_slot(&mut rng);
    let (level, p) = params.pe_forward(&slot);
    println!("water level {level:.6e} W, total power {:.6e} W", p.total());

    let mut worst: f64 = 0.0;
    let mut perm: Vec<usize> = (0..slot.n_rb()).collect();
    for _ in 0..100 {
        perm.shuffle(&mut rng);
        let shuffled = SlotChannel::new(
            perm.iter().map(|&i| slot.gamma[i]).collect(),
            slot.interfered,
        )?;
        let p2 = params.allocate(&shuffled);
        for (j, &i) in perm.iter().enumerate() {
            worst = worst.max((p2.as_slice()[j] - p.as_slice()[i]).abs());
        }
    }
    println!("largest deviation over 100 permutations: {worst:.2e} W");
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> tandem_qos::Result<()> {
    run_example().map(|_| ())
}
