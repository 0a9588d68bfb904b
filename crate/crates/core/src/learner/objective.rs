//! Lagrangian of the power-minimization problem and its gradient.
//!
//! For a batch of slots the objective is
//!
//! ```text
//! L = mean_s P_s + λ·( Σ_k P{δ = k T_f}·e^{θ* k T_f} − A )
//! ```
//!
//! where the service-time PMF comes from the Gaussian approximation fed
//! with the batch's per-class rate mean and population variance, and
//! `A = 1/E[e^{−θ*τ}]`.

use serde::Serialize;

use crate::channel::SlotChannel;
use crate::error::{Error, Result};
use crate::service::{gaussian_mgf_with_grad, RateStats, ServiceSetup};
use crate::snc::QosExponent;
use crate::stats::RunningMoments;

use super::network::{Cache, LayerGrad, PolicyParams};

/// Per-link constants entering the constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSetup {
    pub m_bits: f64,
    /// Slot length (ms).
    pub slot_ms: f64,
    pub p_interf: f64,
    /// RB bandwidth (Hz).
    pub w0: f64,
    pub exponent: QosExponent,
    pub pmf_tol: f64,
    /// Largest service time (slots) kept in the PMF.
    pub k_cap: usize,
}

impl LinkSetup {
    pub fn service(&self) -> ServiceSetup {
        ServiceSetup {
            p_interf: self.p_interf,
            m_bits: self.m_bits,
            slot_ms: self.slot_ms,
        }
    }
}

/// Power, rate and active-RB count of water-filling `gamma` at `level`.
pub fn waterfill_outcome(gamma: &[f64], level: f64, w0: f64) -> (f64, f64, usize) {
    let (mut power, mut nats, mut active) = (0.0, 0.0, 0);
    for g in gamma {
        let x = level * g;
        if x > 1.0 {
            power += level - 1.0 / g;
            nats += x.ln();
            active += 1;
        }
    }
    (power, w0 * nats / std::f64::consts::LN_2, active)
}

/// Value of the Lagrangian and its parts on one batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Objective {
    pub value: f64,
    pub mean_power: f64,
    /// `E[e^{θ*δ}]` under the Gaussian approximation.
    pub mgf: f64,
    /// `mgf − A`; nonpositive when the moment condition holds.
    pub constraint: f64,
    pub stats: RateStats,
    pub k_max: usize,
    /// False when the service-time tail was cut at `k_cap`.
    pub complete: bool,
}

/// Activation budget (floats) for keeping the forward pass around.
const CACHE_FLOATS: usize = 1 << 25;

struct BatchState {
    levels: Vec<f64>,
    cache: Option<Cache>,
    rates: Vec<f64>,
    active: Vec<usize>,
    objective: Objective,
    d_stats: [f64; 4],
}

fn evaluate(
    params: &PolicyParams,
    lambda: f64,
    batch: &[SlotChannel],
    setup: &LinkSetup,
) -> Result<BatchState> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!(
            "multiplier must be nonnegative, got {lambda}"
        )));
    }
    let (levels, cache) = params.forward_cached(batch, CACHE_FLOATS)?;
    let mut rates = Vec::with_capacity(batch.len());
    let mut active = Vec::with_capacity(batch.len());
    let mut power = RunningMoments::default();
    let (mut inter, mut clear) = (RunningMoments::default(), RunningMoments::default());
    for (slot, &w) in batch.iter().zip(&levels) {
        let (p, r, n) = waterfill_outcome(&slot.gamma, w, setup.w0);
        power.push(p);
        if slot.interfered {
            inter.push(r);
        } else {
            clear.push(r);
        }
        rates.push(r);
        active.push(n);
    }
    if inter.count() == 0 {
        return Err(Error::EmptyClass("interfered"));
    }
    if clear.count() == 0 {
        return Err(Error::EmptyClass("interference-free"));
    }
    let stats = RateStats {
        mu_i: inter.mean(),
        var_i: inter.population_variance(),
        mu_u: clear.mean(),
        var_u: clear.population_variance(),
        n_i: inter.count(),
        n_u: clear.count(),
    };
    let m = gaussian_mgf_with_grad(
        &stats,
        &setup.service(),
        setup.exponent.theta(),
        setup.pmf_tol,
        setup.k_cap,
    );
    if !m.mgf.is_finite() {
        return Err(Error::NonFiniteGradient("service-time MGF".into()));
    }
    let constraint = m.mgf - setup.exponent.a_const();
    let objective = Objective {
        value: power.mean() + lambda * constraint,
        mean_power: power.mean(),
        mgf: m.mgf,
        constraint,
        stats,
        k_max: m.k_max,
        complete: m.complete,
    };
    Ok(BatchState {
        levels,
        cache,
        rates,
        active,
        objective,
        d_stats: m.grad,
    })
}

/// Lagrangian value at multiplier `lambda`.
pub fn lagrangian(
    params: &PolicyParams,
    lambda: f64,
    batch: &[SlotChannel],
    setup: &LinkSetup,
) -> Result<Objective> {
    Ok(evaluate(params, lambda, batch, setup)?.objective)
}

/// Gradient of the Lagrangian with respect to the weights. The gradient
/// with respect to λ is `Objective::constraint`.
pub fn gradients(
    params: &PolicyParams,
    lambda: f64,
    batch: &[SlotChannel],
    setup: &LinkSetup,
) -> Result<(Objective, Vec<LayerGrad>)> {
    weighted_gradients(params, lambda, batch, setup, 1.0, lambda)
}

/// Gradient of `power_weight·mean_power + mgf_weight·mgf`; the objective
/// reported alongside is the Lagrangian at `lambda`.
pub(crate) fn weighted_gradients(
    params: &PolicyParams,
    lambda: f64,
    batch: &[SlotChannel],
    setup: &LinkSetup,
    power_weight: f64,
    mgf_weight: f64,
) -> Result<(Objective, Vec<LayerGrad>)> {
    let state = evaluate(params, lambda, batch, setup)?;
    if state.d_stats.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient(
            "service-time MGF with respect to the rate statistics".into(),
        ));
    }
    let st = &state.objective.stats;
    let b = batch.len() as f64;
    let [g_mu_i, g_var_i, g_mu_u, g_var_u] = state.d_stats;
    let (n_i, n_u) = (st.n_i as f64, st.n_u as f64);
    let mut d_levels = Vec::with_capacity(batch.len());
    for (s, slot) in batch.iter().enumerate() {
        let (w, r, n) = (state.levels[s], state.rates[s], state.active[s] as f64);
        // dP/dw = n_active and dr/dw = w0·n_active/(w ln 2) on the active set.
        let mut d = power_weight * n / b;
        if mgf_weight != 0.0 && n > 0.0 && w > 0.0 {
            let d_rate = if slot.interfered {
                g_mu_i / n_i + g_var_i * 2.0 * (r - st.mu_i) / n_i
            } else {
                g_mu_u / n_u + g_var_u * 2.0 * (r - st.mu_u) / n_u
            };
            d += mgf_weight * d_rate * setup.w0 * n / (w * std::f64::consts::LN_2);
        }
        d_levels.push(d);
    }
    if let Some(s) = d_levels.iter().position(|d| !d.is_finite()) {
        return Err(Error::NonFiniteGradient(format!(
            "water level of batch slot {s}"
        )));
    }
    let grads = params.backward_cached(batch, state.cache, &d_levels)?;
    for (l, g) in grads.iter().enumerate() {
        if g.tensors().iter().any(|t| t.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFiniteGradient(format!("weights of layer {l}")));
        }
    }
    Ok((state.objective, grads))
}
