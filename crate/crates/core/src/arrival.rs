//! Truncated-Gaussian packet inter-arrival process.
//!
//! All times are in milliseconds. The default parameters are the
//! 120 fps video source: mean `1000/120` ms, standard deviation 2 ms,
//! truncated to ±5 ms around the mean. The source tables give these
//! values without units; milliseconds is the reading used everywhere.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ln_normal_interval, normal_cdf, normal_pdf, normal_quantile};

/// Parameters of the truncated Gaussian inter-arrival time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArrivalSpec", into = "ArrivalSpec")]
pub struct ArrivalParams {
    mu: f64,
    sigma: f64,
    b1: f64,
    b2: f64,
}

impl ArrivalParams {
    pub fn new(mu: f64, sigma: f64, b1: f64, b2: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "arrival sigma must be positive, got {sigma}"
            )));
        }
        if !(b1 > 0.0) {
            return Err(Error::invalid(format!(
                "arrival lower bound must be positive, got {b1}"
            )));
        }
        if !(b1 < mu && mu < b2) {
            return Err(Error::invalid(format!(
                "arrival mean must lie strictly inside the truncation interval: {b1} < {mu} < {b2}"
            )));
        }
        Ok(ArrivalParams { mu, sigma, b1, b2 })
    }

    /// Video source at `fps` frames per second with the standard jitter
    /// profile (σ = 2 ms, truncation ±5 ms).
    pub fn from_frame_rate(fps: f64) -> Result<Self> {
        Self::from_frame_rate_with(fps, 2.0, 5.0)
    }

    pub fn from_frame_rate_with(fps: f64, sigma: f64, half_width: f64) -> Result<Self> {
        if !(fps > 0.0) {
            return Err(Error::invalid(format!(
                "frame rate must be positive, got {fps}"
            )));
        }
        let mu = 1000.0 / fps;
        Self::new(mu, sigma, mu - half_width, mu + half_width)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn frame_rate(&self) -> f64 {
        1000.0 / self.mu
    }

    fn standardized_bounds(&self) -> (f64, f64) {
        (
            (self.b1 - self.mu) / self.sigma,
            (self.b2 - self.mu) / self.sigma,
        )
    }

    /// Mean of the truncated distribution.
    pub fn truncated_mean(&self) -> f64 {
        let (alpha, beta) = self.standardized_bounds();
        let z = normal_cdf(beta) - normal_cdf(alpha);
        self.mu + self.sigma * (normal_pdf(alpha) - normal_pdf(beta)) / z
    }

    /// Variance of the truncated distribution.
    pub fn truncated_variance(&self) -> f64 {
        let (alpha, beta) = self.standardized_bounds();
        let z = normal_cdf(beta) - normal_cdf(alpha);
        let shift = (normal_pdf(alpha) - normal_pdf(beta)) / z;
        self.sigma
            * self.sigma
            * (1.0 + (alpha * normal_pdf(alpha) - beta * normal_pdf(beta)) / z - shift * shift)
    }

    /// Density of the truncated distribution at `t`.
    pub fn density(&self, t: f64) -> f64 {
        if t < self.b1 || t > self.b2 {
            return 0.0;
        }
        let (alpha, beta) = self.standardized_bounds();
        let z = normal_cdf(beta) - normal_cdf(alpha);
        normal_pdf((t - self.mu) / self.sigma) / (self.sigma * z)
    }

    /// Draws one inter-arrival time by inverting the truncated CDF.
    pub fn sample_interarrival(&self, rng: &mut impl RngCore) -> f64 {
        let (alpha, beta) = self.standardized_bounds();
        let lo = normal_cdf(alpha);
        let hi = normal_cdf(beta);
        let u = open_unit(rng);
        let t = self.mu + self.sigma * normal_quantile(lo + u * (hi - lo));
        // Quantile round-off can land exactly on a bound.
        t.clamp(self.b1.next_up(), self.b2.next_down())
    }

    /// `ln E[e^{−θτ}]`.
    pub fn ln_neg_mgf(&self, theta: f64) -> Result<f64> {
        if !(theta >= 0.0) {
            return Err(Error::invalid(format!(
                "theta must be nonnegative, got {theta}"
            )));
        }
        if theta == 0.0 {
            return Ok(0.0);
        }
        let (alpha, beta) = self.standardized_bounds();
        let shift = theta * self.sigma;
        Ok(
            -theta * self.mu
                + 0.5 * shift * shift
                + ln_normal_interval(alpha + shift, beta + shift)
                - ln_normal_interval(alpha, beta),
        )
    }

    /// `E[e^{−θτ}]`, exact for the truncated Gaussian.
    pub fn neg_mgf(&self, theta: f64) -> Result<f64> {
        self.ln_neg_mgf(theta).map(f64::exp)
    }

    /// Arrival instants `a(1..n)` with `a(1) = 0`.
    pub fn generate_arrivals(&self, n: usize, rng: &mut impl RngCore) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::invalid("arrival count must be at least 1"));
        }
        let mut arrivals = Vec::with_capacity(n);
        let mut t = 0.0;
        arrivals.push(t);
        for _ in 1..n {
            t += self.sample_interarrival(rng);
            arrivals.push(t);
        }
        Ok(arrivals)
    }

    pub fn sample_interarrivals(&self, n: usize, rng: &mut impl RngCore) -> Vec<f64> {
        (0..n).map(|_| self.sample_interarrival(rng)).collect()
    }
}

impl Default for ArrivalParams {
    fn default() -> Self {
        ArrivalParams::from_frame_rate(120.0).expect("default arrival parameters are valid")
    }
}

/// Uniform draw on the open interval (0, 1).
pub(crate) fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Config-file form: either explicit moments/bounds or a frame-rate shorthand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ArrivalSpec {
    Explicit(ExplicitSpec),
    FrameRate(FrameRateSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitSpec {
    mu_ms: f64,
    sigma_ms: f64,
    b1_ms: f64,
    b2_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRateSpec {
    fps: f64,
    #[serde(default)]
    sigma_ms: Option<f64>,
    #[serde(default)]
    half_width_ms: Option<f64>,
}

impl TryFrom<ArrivalSpec> for ArrivalParams {
    type Error = Error;

    fn try_from(spec: ArrivalSpec) -> Result<Self> {
        match spec {
            ArrivalSpec::Explicit(ExplicitSpec {
                mu_ms,
                sigma_ms,
                b1_ms,
                b2_ms,
            }) => ArrivalParams::new(mu_ms, sigma_ms, b1_ms, b2_ms),
            ArrivalSpec::FrameRate(FrameRateSpec {
                fps,
                sigma_ms,
                half_width_ms,
            }) => ArrivalParams::from_frame_rate_with(
                fps,
                sigma_ms.unwrap_or(2.0),
                half_width_ms.unwrap_or(5.0),
            ),
        }
    }
}

impl From<ArrivalParams> for ArrivalSpec {
    fn from(p: ArrivalParams) -> Self {
        ArrivalSpec::Explicit(ExplicitSpec {
            mu_ms: p.mu,
            sigma_ms: p.sigma,
            b1_ms: p.b1,
            b2_ms: p.b2,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::integrate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table_params() -> ArrivalParams {
        ArrivalParams::new(8.33, 2.0, 3.33, 13.33).unwrap()
    }

    #[test]
    fn rejects_invalid() {
        assert!(ArrivalParams::new(8.0, 0.0, 3.0, 13.0).is_err());
        assert!(ArrivalParams::new(8.0, 2.0, 0.0, 13.0).is_err());
        assert!(ArrivalParams::new(14.0, 2.0, 3.0, 13.0).is_err());
        assert!(table_params().neg_mgf(-0.1).is_err());
    }

    #[test]
    fn samples_inside_bounds() {
        let p = table_params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100_000 {
            let t = p.sample_interarrival(&mut rng);
            assert!(t > 3.33 && t < 13.33);
        }
    }

    #[test]
    fn degenerate_sigma_collapses_to_mean() {
        let p = ArrivalParams::new(8.33, 1e-9, 3.33, 13.33).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            assert!((p.sample_interarrival(&mut rng) - 8.33).abs() < 1e-7);
        }
        let theta = 0.3;
        assert!((p.neg_mgf(theta).unwrap() - (-theta * 8.33f64).exp()).abs() < 1e-9);
        let a = p.generate_arrivals(3, &mut rng).unwrap();
        assert!((a[1] - 8.33).abs() < 1e-7 && (a[2] - 16.66).abs() < 1e-7);
    }

    #[test]
    fn neg_mgf_at_zero_is_one() {
        assert_eq!(table_params().neg_mgf(0.0).unwrap(), 1.0);
    }

    #[test]
    fn neg_mgf_matches_quadrature() {
        let p = table_params();
        for &theta in &[0.01, 0.1, 0.5, 1.0, 2.0, 3.5, 5.0] {
            let oracle = integrate(
                |t| (-theta * t).exp() * p.density(t),
                p.b1(),
                p.b2(),
                1e-300,
                1e-14,
            );
            let v = p.neg_mgf(theta).unwrap();
            assert!(
                ((v - oracle) / oracle).abs() < 1e-9,
                "theta {theta}: {v} vs {oracle}"
            );
        }
        let theta = 0.1;
        let oracle = integrate(
            |t| (-theta * t).exp() * p.density(t),
            p.b1(),
            p.b2(),
            1e-300,
            1e-14,
        );
        assert!((p.neg_mgf(theta).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn neg_mgf_decreasing_and_log_convex() {
        let p = ArrivalParams::default();
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let ln: Vec<f64> = grid.iter().map(|&t| p.ln_neg_mgf(t).unwrap()).collect();
        for w in ln.windows(2) {
            assert!(w[1] < w[0]);
        }
        for w in ln.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-12);
        }
        // Large exponents stay finite.
        assert!(p.ln_neg_mgf(1000.0).unwrap().is_finite());
    }

    #[test]
    fn sample_mean_matches_truncated_mean() {
        let p = table_params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let mean = (0..n).map(|_| p.sample_interarrival(&mut rng)).sum::<f64>() / n as f64;
        let se = (p.truncated_variance() / n as f64).sqrt();
        assert!((mean - p.truncated_mean()).abs() < 3.0 * se);
    }

    #[test]
    fn arrivals_start_at_zero() {
        let p = ArrivalParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert_eq!(p.generate_arrivals(1, &mut rng).unwrap(), vec![0.0]);
        let a = p.generate_arrivals(100_000, &mut rng).unwrap();
        for w in a.windows(2) {
            let gap = w[1] - w[0];
            assert!(gap > p.b1() && gap < p.b2());
        }
        let mean_gap = a.last().unwrap() / (a.len() - 1) as f64;
        let se = (p.truncated_variance() / (a.len() - 1) as f64).sqrt();
        assert!((mean_gap - p.truncated_mean()).abs() < 3.0 * se);
    }

    #[test]
    fn config_forms() {
        let p: ArrivalParams = serde_json::from_str(r#"{"fps": 120}"#).unwrap();
        assert!((p.mu() - 1000.0 / 120.0).abs() < 1e-12);
        assert!((p.b1() - (p.mu() - 5.0)).abs() < 1e-12);
        let q: ArrivalParams =
            serde_json::from_str(r#"{"mu_ms": 8.0, "sigma_ms": 1.0, "b1_ms": 4.0, "b2_ms": 12.0}"#)
                .unwrap();
        assert_eq!(q.sigma(), 1.0);
        let round: ArrivalParams =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(round, p);
        assert!(serde_json::from_str::<ArrivalParams>(r#"{"fps": 120, "bogus": 1}"#).is_err());
    }
}
