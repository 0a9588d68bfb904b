//! Gaussian approximation of per-slot rates and the resulting packet
//! service-time distribution and moment generating function.
//!
//! Rates are split by the slot's interference state. Over `k` slots with
//! `i` interfered ones the cumulative rate is taken as Gaussian with mean
//! `i·μ_I + (k−i)·μ_U` and variance `i·σ_I² + (k−i)·σ_U²`, and the packet
//! is done within `k` slots when that sum reaches `M / T_f` (bit/s, with
//! `T_f` converted to seconds).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math::{binomial_pmf, log_sum_exp, normal_pdf, q_function};
use crate::stats::RunningMoments;

/// Default truncation tolerance for the PMF tail.
pub const DEFAULT_PMF_TOL: f64 = 1e-9;

/// Per-class mean and population variance of the slot rate (bit/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateStats {
    pub mu_i: f64,
    pub var_i: f64,
    pub mu_u: f64,
    pub var_u: f64,
    pub n_i: usize,
    pub n_u: usize,
}

impl RateStats {
    /// Stats from explicit moments, for callers that already reduced them.
    pub fn from_moments(mu_i: f64, var_i: f64, mu_u: f64, var_u: f64) -> Result<Self> {
        if !(var_i >= 0.0 && var_u >= 0.0) || !(mu_i.is_finite() && mu_u.is_finite()) {
            return Err(Error::invalid(
                "rate variances must be nonnegative and means finite",
            ));
        }
        Ok(RateStats {
            mu_i,
            var_i,
            mu_u,
            var_u,
            n_i: 0,
            n_u: 0,
        })
    }
}

/// Sample mean and population variance per interference class.
///
/// Each sample is `(rate, interfered)`. Both classes need at least two
/// samples.
pub fn estimate_stats(samples: impl IntoIterator<Item = (f64, bool)>) -> Result<RateStats> {
    let mut interfered = RunningMoments::default();
    let mut clear = RunningMoments::default();
    for (rate, flag) in samples {
        if flag {
            interfered.push(rate);
        } else {
            clear.push(rate);
        }
    }
    for (acc, name) in [(&interfered, "interfered"), (&clear, "interference-free")] {
        match acc.count() {
            0 => return Err(Error::EmptyClass(name)),
            1 => {
                return Err(Error::invalid(format!(
                    "the {name} class has a single sample"
                )))
            }
            _ => {}
        }
    }
    Ok(RateStats {
        mu_i: interfered.mean(),
        var_i: interfered.population_variance(),
        mu_u: clear.mean(),
        var_u: clear.population_variance(),
        n_i: interfered.count(),
        n_u: clear.count(),
    })
}

/// Inputs shared by the CDF, PMF and MGF evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceSetup {
    pub p_interf: f64,
    pub m_bits: f64,
    /// Slot length (ms).
    pub slot_ms: f64,
}

impl ServiceSetup {
    /// Rate that must be accumulated over the service slots, `M / T_f`.
    fn threshold(&self) -> f64 {
        self.m_bits / (self.slot_ms * 1e-3)
    }
}

/// `P{δ ≤ k·T_f}` under the Gaussian approximation.
pub fn service_cdf(stats: &RateStats, setup: &ServiceSetup, k: usize) -> f64 {
    cdf_terms(stats, setup, k, None)
}

/// Evaluates the CDF and, when `grad` is given, accumulates its partial
/// derivatives with respect to `(μ_I, σ_I², μ_U, σ_U²)`.
fn cdf_terms(
    stats: &RateStats,
    setup: &ServiceSetup,
    k: usize,
    mut grad: Option<&mut [f64; 4]>,
) -> f64 {
    assert!(k >= 1, "service time is at least one slot");
    let c = setup.threshold();
    let mut total = 0.0;
    for i in 0..=k {
        let weight = binomial_pmf(k, i, setup.p_interf);
        if weight == 0.0 {
            continue;
        }
        let (fi, fu) = (i as f64, (k - i) as f64);
        let mean = fi * stats.mu_i + fu * stats.mu_u;
        let var = fi * stats.var_i + fu * stats.var_u;
        if var <= 0.0 {
            if mean >= c {
                total += weight;
            }
            continue;
        }
        let sd = var.sqrt();
        let z = (c - mean) / sd;
        total += weight * q_function(z);
        if let Some(g) = grad.as_deref_mut() {
            // dQ/dz = −φ(z); dz/dμ = −count/σ; dz/dvar = −z·count/(2σ²).
            let dq = -normal_pdf(z) * weight;
            g[0] += dq * (-fi / sd);
            g[1] += dq * (-z * fi / (2.0 * var));
            g[2] += dq * (-fu / sd);
            g[3] += dq * (-z * fu / (2.0 * var));
        }
    }
    total
}

/// Service-time PMF over `k = 1..=K_max` slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceTimeDist {
    /// `pmf[k − 1] = P{δ = k·T_f}`.
    pub pmf: Vec<f64>,
    /// Slot length (ms).
    pub slot_ms: f64,
}

impl ServiceTimeDist {
    pub fn k_max(&self) -> usize {
        self.pmf.len()
    }

    pub fn mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn point_mass(k: usize, slot_ms: f64) -> Self {
        let mut pmf = vec![0.0; k];
        pmf[k - 1] = 1.0;
        ServiceTimeDist { pmf, slot_ms }
    }

    /// Empirical PMF of simulated service times (in slots).
    pub fn from_samples(samples: &[usize], slot_ms: f64) -> Result<Self> {
        let k_max = *samples
            .iter()
            .max()
            .ok_or_else(|| Error::invalid("no service-time samples"))?;
        if samples.contains(&0) {
            return Err(Error::invalid("service times are at least one slot"));
        }
        let mut pmf = vec![0.0; k_max];
        for &k in samples {
            pmf[k - 1] += 1.0;
        }
        let n = samples.len() as f64;
        pmf.iter_mut().for_each(|p| *p /= n);
        Ok(ServiceTimeDist { pmf, slot_ms })
    }

    /// Total-variation distance `½ Σ |p_k − q_k|`.
    pub fn total_variation(&self, other: &ServiceTimeDist) -> f64 {
        let n = self.pmf.len().max(other.pmf.len());
        let at = |d: &ServiceTimeDist, k: usize| d.pmf.get(k).copied().unwrap_or(0.0);
        0.5 * (0..n)
            .map(|k| (at(self, k) - at(other, k)).abs())
            .sum::<f64>()
    }
}

/// PMF by differencing the CDF, truncated at the smallest `K_max` with
/// `1 − P{δ ≤ K_max} < tol`. Negative differences from round-off are
/// clamped to zero and the PMF is not renormalized.
pub fn service_pmf(
    stats: &RateStats,
    setup: &ServiceSetup,
    tol: f64,
    cap: usize,
) -> Result<ServiceTimeDist> {
    let mut pmf = Vec::new();
    let mut prev = 0.0;
    for k in 1..=cap {
        let cdf = service_cdf(stats, setup, k);
        pmf.push((cdf - prev).max(0.0));
        prev = cdf;
        if 1.0 - cdf < tol {
            return Ok(ServiceTimeDist {
                pmf,
                slot_ms: setup.slot_ms,
            });
        }
    }
    Err(Error::infeasible(format!(
        "service-time tail still {:.3e} after the cap of {cap} slots",
        1.0 - prev
    )))
}

/// `ln E[e^{θδ}] = ln Σ_k pmf_k e^{θ k T_f}`.
pub fn ln_service_mgf(dist: &ServiceTimeDist, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::invalid(format!(
            "theta must be nonnegative, got {theta}"
        )));
    }
    Ok(log_sum_exp(
        dist.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| p.ln() + theta * (k + 1) as f64 * dist.slot_ms),
    ))
}

/// `E[e^{θδ}]`; switches to log-sum-exp when `θ·K_max·T_f > 500`.
pub fn service_mgf(dist: &ServiceTimeDist, theta: f64) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::invalid(format!(
            "theta must be nonnegative, got {theta}"
        )));
    }
    if theta * dist.k_max() as f64 * dist.slot_ms > 500.0 {
        return ln_service_mgf(dist, theta).map(f64::exp);
    }
    Ok(dist
        .pmf
        .iter()
        .enumerate()
        .map(|(k, p)| p * (theta * (k + 1) as f64 * dist.slot_ms).exp())
        .sum())
}

/// MGF of the Gaussian-approximated service time together with its
/// gradient with respect to `(μ_I, σ_I², μ_U, σ_U²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfWithGrad {
    pub mgf: f64,
    pub grad: [f64; 4],
    pub k_max: usize,
    /// False when the tail never dropped below `tol` before `cap`; the
    /// remaining mass is then counted at `cap + 1` slots.
    pub complete: bool,
}

/// Evaluates `Σ_k pmf_k e^{θ k T_f}` and its derivatives in one pass.
/// `K_max` is selected exactly as in [`service_pmf`] and treated as fixed.
pub fn gaussian_mgf_with_grad(
    stats: &RateStats,
    setup: &ServiceSetup,
    theta: f64,
    tol: f64,
    cap: usize,
) -> MgfWithGrad {
    let mut mgf = 0.0;
    let mut grad = [0.0; 4];
    let mut prev = 0.0;
    let mut prev_grad = [0.0; 4];
    for k in 1..=cap {
        let mut g = [0.0; 4];
        let cdf = cdf_terms(stats, setup, k, Some(&mut g));
        let diff = cdf - prev;
        let weight = (theta * k as f64 * setup.slot_ms).exp();
        if diff > 0.0 {
            mgf += diff * weight;
            for j in 0..4 {
                grad[j] += (g[j] - prev_grad[j]) * weight;
            }
        }
        prev = cdf;
        prev_grad = g;
        if 1.0 - cdf < tol {
            return MgfWithGrad {
                mgf,
                grad,
                k_max: k,
                complete: true,
            };
        }
    }
    // Unresolved tail mass is charged at cap + 1 slots, so a policy that
    // cannot finish packets is not mistaken for a cheap one.
    let weight = (theta * (cap + 1) as f64 * setup.slot_ms).exp();
    mgf += (1.0 - prev) * weight;
    for j in 0..4 {
        grad[j] -= prev_grad[j] * weight;
    }
    MgfWithGrad {
        mgf,
        grad,
        k_max: cap,
        complete: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup(p: f64, m: f64) -> ServiceSetup {
        ServiceSetup {
            p_interf: p,
            m_bits: m,
            slot_ms: 1.0,
        }
    }

    #[test]
    fn stats_by_hand() {
        let s = estimate_stats([(1.0, true), (3.0, true), (5.0, false), (5.0, false)]).unwrap();
        assert_eq!((s.mu_i, s.var_i), (2.0, 1.0));
        assert_eq!((s.mu_u, s.var_u), (5.0, 0.0));
        assert_eq!((s.n_i, s.n_u), (2, 2));
        let err = estimate_stats([(1.0, false), (2.0, false)]).unwrap_err();
        assert!(matches!(err, Error::EmptyClass("interfered")));
    }

    #[test]
    fn cdf_without_interference_single_term() {
        let stats = RateStats::from_moments(1e6, 4e10, 2e6, 1e10).unwrap();
        // P_I = 0: only the i = 0 term, Q((M/T − k·μ_U)/√(k·σ_U²)).
        let m = 5000.0;
        for k in 1..6 {
            let direct = q_function((m / 1e-3 - k as f64 * 2e6) / (k as f64 * 1e10).sqrt());
            assert!((service_cdf(&stats, &setup(0.0, m), k) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn tiny_packet_done_in_one_slot() {
        let stats = RateStats::from_moments(1e6, 1e10, 2e6, 1e10).unwrap();
        assert!((service_cdf(&stats, &setup(0.5, 1e-9), 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_rate_ceiling() {
        // 1e6 bit/s carries 1000 bits per slot; 2500 bits need 3 slots.
        let stats = RateStats::from_moments(1e6, 0.0, 1e6, 0.0).unwrap();
        let dist = service_pmf(&stats, &setup(0.5, 2500.0), DEFAULT_PMF_TOL, 100).unwrap();
        assert_eq!(dist.pmf, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn pmf_mass_and_cap() {
        let stats = RateStats::from_moments(0.6e6, 2e10, 1.1e6, 3e10).unwrap();
        let dist = service_pmf(&stats, &setup(0.5, 4000.0), 1e-9, 200).unwrap();
        assert!(dist.mass() >= 1.0 - 1e-9 && dist.mass() <= 1.0 + 1e-12);
        assert!(service_pmf(&stats, &setup(0.5, 4e6), 1e-9, 50).is_err());
    }

    #[test]
    fn mgf_cases() {
        let stats = RateStats::from_moments(0.6e6, 2e10, 1.1e6, 3e10).unwrap();
        let dist = service_pmf(&stats, &setup(0.5, 4000.0), 1e-9, 200).unwrap();
        assert!((service_mgf(&dist, 0.0).unwrap() - dist.mass()).abs() < 1e-15);
        let point = ServiceTimeDist::point_mass(5, 1.0);
        assert!((service_mgf(&point, 0.1).unwrap() - 0.5f64.exp()).abs() < 1e-15);
        assert!(service_mgf(&point, -1.0).is_err());
        // Log-sum-exp path agrees with the direct sum where both are finite.
        let big = ServiceTimeDist {
            pmf: vec![0.25, 0.5, 0.25],
            slot_ms: 100.0,
        };
        let theta = 2.0;
        let direct: f64 = (0..3)
            .map(|k| big.pmf[k] * (theta * 100.0 * (k + 1) as f64).exp())
            .sum();
        let v = service_mgf(&big, theta).unwrap();
        assert!(((v - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn grad_path_matches_value_path() {
        let stats = RateStats::from_moments(0.6e6, 2e10, 1.1e6, 3e10).unwrap();
        let s = setup(0.5, 4000.0);
        let dist = service_pmf(&stats, &s, 1e-9, 200).unwrap();
        let g = gaussian_mgf_with_grad(&stats, &s, 0.9, 1e-9, 200);
        assert!(g.complete && g.k_max == dist.k_max());
        let v = service_mgf(&dist, 0.9).unwrap();
        assert!(((g.mgf - v) / v).abs() < 1e-13);
    }

    #[test]
    fn grad_matches_finite_differences() {
        let base = [0.6e6, 2e10, 1.1e6, 3e10];
        let s = setup(0.5, 4000.0);
        let eval = |x: [f64; 4]| {
            let st = RateStats::from_moments(x[0], x[1], x[2], x[3]).unwrap();
            gaussian_mgf_with_grad(&st, &s, 0.9, 1e-9, 200)
        };
        let g = eval(base).grad;
        for j in 0..4 {
            let h = base[j] * 1e-6;
            let (mut up, mut dn) = (base, base);
            up[j] += h;
            dn[j] -= h;
            let fd = (eval(up).mgf - eval(dn).mgf) / (2.0 * h);
            assert!(
                ((fd - g[j]) / g[j]).abs() < 1e-5,
                "coord {j}: {fd} vs {}",
                g[j]
            );
        }
    }

    #[test]
    fn truncated_tail_is_charged_and_differentiable() {
        let base = [0.6e6, 2e10, 1.1e6, 3e10];
        let s = setup(0.5, 4000.0);
        let eval = |x: [f64; 4]| {
            let st = RateStats::from_moments(x[0], x[1], x[2], x[3]).unwrap();
            gaussian_mgf_with_grad(&st, &s, 0.9, 1e-9, 3)
        };
        let st = RateStats::from_moments(base[0], base[1], base[2], base[3]).unwrap();
        let cdf3 = service_cdf(&st, &s, 3);
        let dist = service_pmf(&st, &s, 1e-9, 200).unwrap();
        let partial: f64 = (0..3)
            .map(|k| dist.pmf[k] * (0.9 * (k + 1) as f64).exp())
            .sum();
        let cut = eval(base);
        assert!(!cut.complete && cut.k_max == 3);
        let expected = partial + (1.0 - cdf3) * (0.9f64 * 4.0).exp();
        assert!(((cut.mgf - expected) / expected).abs() < 1e-12);
        for j in 0..4 {
            let h = base[j] * 1e-6;
            let (mut up, mut dn) = (base, base);
            up[j] += h;
            dn[j] -= h;
            let fd = (eval(up).mgf - eval(dn).mgf) / (2.0 * h);
            assert!(((fd - cut.grad[j]) / cut.grad[j]).abs() < 1e-5);
        }
    }

    proptest! {
        #[test]
        fn cdf_monotone(k in 1usize..15, m in 1000.0f64..6000.0, dm in 0.0f64..1000.0) {
            let stats = RateStats::from_moments(0.6e6, 2e10, 1.1e6, 3e10).unwrap();
            let a = service_cdf(&stats, &setup(0.5, m), k);
            prop_assert!(service_cdf(&stats, &setup(0.5, m), k + 1) >= a - 1e-12);
            prop_assert!(service_cdf(&stats, &setup(0.5, m + dm), k) <= a + 1e-12);
        }
    }
}
