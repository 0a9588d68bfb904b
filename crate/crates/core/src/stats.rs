//! Monte Carlo summaries: running moments, Wilson intervals and a
//! one-sample Kolmogorov–Smirnov test against a fitted Gaussian.

use serde::Serialize;

use crate::math::normal_cdf;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningMoments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance (1/n normalizer).
    pub fn population_variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn estimate(&self) -> MeanEstimate {
        let std_err = if self.n < 2 {
            0.0
        } else {
            (self.sample_variance() / self.n as f64).sqrt()
        };
        MeanEstimate {
            mean: self.mean,
            std_err,
            n: self.n,
        }
    }
}

/// Binomial proportion with a 95% Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    /// `sqrt(p(1-p)/n)`.
    pub std_err: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize) -> Self {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z = 1.959_963_984_540_054;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Proportion {
            successes,
            trials,
            estimate: p,
            std_err: (p * (1.0 - p) / n).sqrt(),
            lower: (center - half).max(0.0),
            upper: (center + half).min(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub fitted_mean: f64,
    pub fitted_std: f64,
}

/// Two-sided KS test of `samples` against the Gaussian fitted to the same
/// samples (mean and sample standard deviation).
///
/// The p-value uses the asymptotic Kolmogorov distribution with the
/// Stephens small-sample correction; fitting first makes it conservative.
pub fn ks_test_normal(samples: &[f64]) -> KsResult {
    let n = samples.len();
    assert!(n >= 2, "KS test needs at least two samples");
    let mut acc = RunningMoments::default();
    samples.iter().for_each(|x| acc.push(*x));
    let mean = acc.mean();
    let std = acc.sample_variance().sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = if std > 0.0 {
        sorted
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let f = normal_cdf((x - mean) / std);
                (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
            })
            .fold(0.0, f64::max)
    } else {
        1.0
    };
    let sqrt_n = nf.sqrt();
    let p_value = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    KsResult {
        statistic,
        p_value,
        n,
        fitted_mean: mean,
        fitted_std: std,
    }
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
