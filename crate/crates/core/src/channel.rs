//! Per-slot OFDM channel states, per-slot rates and simulated packet
//! service times.
//!
//! Units: power in W, bandwidth in Hz, rates in bit/s, slot length in ms.
//! dB quantities are only accepted by the `from_db` constructor.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::allocator::PowerPolicy;
use crate::error::{Error, Result};

/// Default hard cap on simulated service time, as a multiple of the
/// delay budget expressed in slots.
pub const SERVICE_CAP_FACTOR: usize = 10;

/// Relative slack when testing whether a packet is complete, so a rate
/// solved to the packet size is not pushed into an extra slot by round-off.
pub const PACKET_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n_antennas: usize,
    /// Large-scale gain (linear, < 1 for a loss).
    pub alpha: f64,
    /// RB bandwidth (Hz).
    pub w0: f64,
    /// Noise PSD (W/Hz).
    pub n0: f64,
    pub p_interf: f64,
    /// Interference power (W).
    pub rho_i2: f64,
    pub n_rb: usize,
    /// Slot length (ms).
    pub slot_len: f64,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_antennas >= 1
            && self.alpha > 0.0
            && self.w0 > 0.0
            && self.n0 > 0.0
            && self.rho_i2 >= 0.0
            && (0.0..=1.0).contains(&self.p_interf)
            && self.n_rb >= 1
            && self.slot_len > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "invalid channel parameters: {self:?}"
            )))
        }
    }

    /// Builds linear parameters from the dB-domain settings.
    ///
    /// `pathloss_db` is a loss: `alpha = 10^(−pathloss_db/10)`. The
    /// interference power is `w0·n0·10^(inr_db/10)`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_db(
        n_antennas: usize,
        pathloss_db: f64,
        w0: f64,
        noise_psd_dbm_hz: f64,
        n_rb: usize,
        slot_ms: f64,
        p_interf: f64,
        inr_db: f64,
    ) -> Result<Self> {
        let n0 = 10f64.powf((noise_psd_dbm_hz - 30.0) / 10.0);
        let params = ChannelParams {
            n_antennas,
            alpha: 10f64.powf(-pathloss_db / 10.0),
            w0,
            n0,
            p_interf,
            rho_i2: w0 * n0 * 10f64.powf(inr_db / 10.0),
            n_rb,
            slot_len: slot_ms,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn noise_power(&self) -> f64 {
        self.w0 * self.n0
    }

    /// Slot length in seconds.
    pub fn slot_seconds(&self) -> f64 {
        self.slot_len * 1e-3
    }

    /// Unit-power SINR for small-scale gain `g`.
    pub fn sinr(&self, g: f64, interfered: bool) -> f64 {
        let denom = self.noise_power() + if interfered { self.rho_i2 } else { 0.0 };
        self.alpha * g / denom
    }

    /// Draws one slot: a Bernoulli interference flag and `n_rb` i.i.d.
    /// Gamma(N_t, 1) gains (squared norm of a Rayleigh MRC/MRT channel).
    pub fn sample_slot(&self, rng: &mut impl RngCore) -> SlotChannel {
        let gains = Gamma::new(self.n_antennas as f64, 1.0).expect("shape is positive");
        let interfered = self.p_interf > 0.0 && rng.random_bool(self.p_interf);
        let gamma = (0..self.n_rb)
            .map(|_| self.sinr(gains.sample(rng), interfered))
            .collect();
        SlotChannel { gamma, interfered }
    }

    pub fn sample_slots(&self, n: usize, rng: &mut impl RngCore) -> Vec<SlotChannel> {
        (0..n).map(|_| self.sample_slot(rng)).collect()
    }
}

/// Channel state of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotChannel {
    /// Unit-power SINR per RB (1/W).
    pub gamma: Vec<f64>,
    pub interfered: bool,
}

impl SlotChannel {
    pub fn new(gamma: Vec<f64>, interfered: bool) -> Result<Self> {
        if gamma.is_empty() || gamma.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::invalid("SINR entries must be positive and finite"));
        }
        Ok(SlotChannel { gamma, interfered })
    }

    pub fn n_rb(&self) -> usize {
        self.gamma.len()
    }
}

/// Sum rate `w0·Σ log2(1 + p_i γ_i)` in bit/s.
pub fn slot_rate(power: &[f64], chan: &SlotChannel, w0: f64) -> Result<f64> {
    if power.len() != chan.gamma.len() {
        return Err(Error::invalid(format!(
            "power vector has {} entries, channel has {} RBs",
            power.len(),
            chan.gamma.len()
        )));
    }
    if power.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::invalid("transmit powers must be nonnegative"));
    }
    Ok(rate_of(power, &chan.gamma, w0))
}

pub(crate) fn rate_of(power: &[f64], gamma: &[f64], w0: f64) -> f64 {
    w0 * power
        .iter()
        .zip(gamma)
        .map(|(p, g)| (p * g).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Service time in slots for one packet of `packet_bits`, consuming
/// slots from `slots` and allocating power with `policy`.
///
/// Returns the smallest `k` whose accumulated bits reach the packet
/// size. Fails if `k` would exceed `cap`.
pub fn simulate_service_time(
    policy: &impl PowerPolicy,
    packet_bits: f64,
    slots: &mut impl Iterator<Item = SlotChannel>,
    params: &ChannelParams,
    cap: usize,
) -> Result<usize> {
    if !(packet_bits > 0.0) {
        return Err(Error::invalid("packet size must be positive"));
    }
    let mut rates = std::iter::from_fn(|| {
        slots.next().map(|slot| {
            let p = policy.allocate(&slot);
            rate_of(p.as_slice(), &slot.gamma, params.w0)
        })
    });
    next_service_time(&mut rates, packet_bits, params.slot_seconds(), cap)?
        .ok_or_else(|| Error::invalid("slot stream exhausted before the packet completed"))
}

/// Service time of the next packet drawn from a stream of per-slot rates.
///
/// `Ok(None)` means the stream ran out mid-packet.
pub fn next_service_time(
    rates: &mut impl Iterator<Item = f64>,
    packet_bits: f64,
    slot_seconds: f64,
    cap: usize,
) -> Result<Option<usize>> {
    let mut bits = 0.0;
    let mut k = 0;
    while bits < packet_bits * (1.0 - PACKET_REL_TOL) {
        if k == cap {
            return Err(Error::infeasible(format!(
                "service time exceeds the cap of {cap} slots ({bits:.4e} of {packet_bits:.4e} bits sent)"
            )));
        }
        match rates.next() {
            Some(r) => bits += r * slot_seconds,
            None => return Ok(None),
        }
        k += 1;
    }
    Ok(Some(k))
}

/// Splits a rate stream into consecutive packet service times (slots).
/// A trailing partial packet is dropped.
pub fn service_times_from_rates(
    rates: &[f64],
    packet_bits: f64,
    slot_seconds: f64,
    cap: usize,
) -> Result<Vec<usize>> {
    let mut stream = rates.iter().copied();
    let mut out = Vec::new();
    while let Some(k) = next_service_time(&mut stream, packet_bits, slot_seconds, cap)? {
        out.push(k);
    }
    Ok(out)
}
