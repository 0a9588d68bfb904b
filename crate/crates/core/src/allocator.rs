//! Water-filling primitives and the fixed-service-time baseline policy.

use rand::RngCore;

use crate::channel::{rate_of, ChannelParams, SlotChannel};
use crate::error::{Error, Result};
use crate::snc::QosExponent;
use crate::stats::{MeanEstimate, RunningMoments};

/// Per-RB transmit powers (W), all nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerVector(Vec<f64>);

impl PowerVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::invalid("transmit powers must be nonnegative"));
        }
        Ok(PowerVector(p))
    }

    pub fn zeros(n: usize) -> Self {
        PowerVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maps a slot's channel state to a power allocation.
pub trait PowerPolicy {
    fn allocate(&self, slot: &SlotChannel) -> PowerVector;

    /// Allocates a run of slots; policies with a cheaper batched path
    /// override this.
    fn allocate_batch(&self, slots: &[SlotChannel]) -> Vec<PowerVector> {
        slots.iter().map(|s| self.allocate(s)).collect()
    }
}

impl<F: Fn(&SlotChannel) -> PowerVector> PowerPolicy for F {
    fn allocate(&self, slot: &SlotChannel) -> PowerVector {
        self(slot)
    }
}

/// `p_i = max(0, w − 1/γ_i)`.
pub fn waterfill_at_level(gamma: &[f64], level: f64) -> PowerVector {
    let level = level.max(0.0);
    PowerVector(gamma.iter().map(|g| (level - 1.0 / g).max(0.0)).collect())
}

/// Water level and allocation reaching `r_target` bit/s with minimum
/// total power.
///
/// The active set is found exactly: with the `j` strongest RBs active,
/// `ln w = (r·ln2/w0 − Σ ln γ_i) / j`, and the right `j` is the one whose
/// level lies between `1/γ_j` and `1/γ_{j+1}`.
pub fn waterfill_for_rate(gamma: &[f64], r_target: f64, w0: f64) -> Result<(PowerVector, f64)> {
    if !(r_target >= 0.0) || !r_target.is_finite() {
        return Err(Error::invalid(format!(
            "rate target must be finite and nonnegative, got {r_target}"
        )));
    }
    if gamma.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::invalid("SINR entries must be positive"));
    }
    if r_target == 0.0 {
        return Ok((PowerVector::zeros(gamma.len()), 0.0));
    }
    let mut sorted: Vec<f64> = gamma.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let nats = r_target * std::f64::consts::LN_2 / w0;
    let mut ln_sum = 0.0;
    let mut level = f64::NAN;
    for (j, g) in sorted.iter().enumerate() {
        ln_sum += g.ln();
        let count = (j + 1) as f64;
        let candidate = ((nats - ln_sum) / count).exp();
        let next_floor = sorted.get(j + 1).map_or(f64::INFINITY, |g| 1.0 / g);
        if candidate * g > 1.0 && candidate <= next_floor {
            level = candidate;
            break;
        }
    }
    if !level.is_finite() {
        return Err(Error::infeasible(format!(
            "no finite water level reaches {r_target:.4e} bit/s"
        )));
    }
    // One Newton polish on the achieved rate; dR/dw = w0·n_active/(w ln 2).
    let p = waterfill_at_level(gamma, level);
    let achieved = rate_of(p.as_slice(), gamma, w0);
    let active = p.as_slice().iter().filter(|x| **x > 0.0).count() as f64;
    let slope = w0 * active / (level * std::f64::consts::LN_2);
    if slope > 0.0 && ((achieved - r_target) / r_target).abs() > 1e-12 {
        level -= (achieved - r_target) / slope;
    }
    Ok((waterfill_at_level(gamma, level), level))
}

/// Policy that water-fills every slot at a fixed level.
#[derive(Debug, Clone, Copy)]
pub struct FixedLevel(pub f64);

impl PowerPolicy for FixedLevel {
    fn allocate(&self, slot: &SlotChannel) -> PowerVector {
        waterfill_at_level(&slot.gamma, self.0)
    }
}

/// Baseline policy: minimum power reaching the same rate in every slot.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRate {
    pub rate: f64,
    pub w0: f64,
}

impl ConstantRate {
    /// Spreads `m_bits` uniformly over `k_slots` slots of `slot_ms`.
    pub fn for_packet(m_bits: f64, k_slots: usize, slot_ms: f64, w0: f64) -> Self {
        ConstantRate {
            rate: m_bits / (k_slots as f64 * slot_ms * 1e-3),
            w0,
        }
    }
}

impl PowerPolicy for ConstantRate {
    fn allocate(&self, slot: &SlotChannel) -> PowerVector {
        waterfill_for_rate(&slot.gamma, self.rate, self.w0)
            .expect("positive SINR always admits a finite water level")
            .0
    }
}

/// Largest constant service time (slots) satisfying
/// `e^{θ k T_f}·E[e^{−θτ}] ≤ 1`, i.e. `floor(ln A / (θ T_f))`.
pub fn baseline_service_slots(q: &QosExponent, slot_ms: f64) -> Result<usize> {
    let exact = q.ln_a() / (q.theta() * slot_ms);
    let k = (exact * (1.0 + 1e-12)).floor();
    if k < 1.0 {
        return Err(Error::infeasible(format!(
            "arrivals too fast for any constant service time (ln A/(θ T_f) = {exact:.4})"
        )));
    }
    Ok(k as usize)
}

/// Monte Carlo average of the baseline's total slot power over `n_slots`
/// fresh channel draws.
pub fn baseline_average_power(
    chan: &ChannelParams,
    m_bits: f64,
    k_slots: usize,
    rng: &mut impl RngCore,
    n_slots: usize,
) -> Result<MeanEstimate> {
    let slots = (0..n_slots).map(|_| chan.sample_slot(rng));
    baseline_average_power_over(slots, chan, m_bits, k_slots)
}

/// Same as [`baseline_average_power`] over a caller-supplied slot sequence.
pub fn baseline_average_power_over(
    slots: impl IntoIterator<Item = SlotChannel>,
    chan: &ChannelParams,
    m_bits: f64,
    k_slots: usize,
) -> Result<MeanEstimate> {
    if k_slots == 0 {
        return Err(Error::invalid(
            "baseline service time must be at least one slot",
        ));
    }
    let policy = ConstantRate::for_packet(m_bits, k_slots, chan.slot_len, chan.w0);
    let mut acc = RunningMoments::default();
    for slot in slots {
        let (p, _) = waterfill_for_rate(&slot.gamma, policy.rate, chan.w0)?;
        acc.push(p.total());
    }
    Ok(acc.estimate())
}
