//! Numerical helpers shared across the crate: Gaussian tail functions,
//! binomial weights, log-sum-exp and an adaptive Gauss–Kronrod integrator.

use std::f64::consts::{LN_2, PI, SQRT_2};

use libm::erfc;
use statrs::function::erf::erfc_inv;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Gaussian Q-function, `P(Z > z)`.
pub fn q_function(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Inverse of the standard normal CDF on (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    let x = -SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    // One Newton step against the accurate CDF tightens erfc_inv.
    let err = if x < 0.0 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - q_function(x)
    };
    let dens = normal_pdf(x);
    if dens > 0.0 {
        x - err / dens
    } else {
        x
    }
}

/// `ln Q(z)`, finite for arbitrarily large `z`.
pub fn ln_q_function(z: f64) -> f64 {
    if z < 8.0 {
        return q_function(z).ln();
    }
    // Mills ratio by continued fraction: Q(z) = φ(z) / (z + 1/(z + 2/(z + 3/(z + ...))))
    let mut tail = z;
    for k in (1..=60).rev() {
        tail = z + k as f64 / tail;
    }
    -0.5 * z * z - LN_SQRT_2PI - tail.ln()
}

/// `ln(Φ(hi) − Φ(lo))` for `lo < hi`, computed without cancellation in
/// either tail.
pub fn ln_normal_interval(lo: f64, hi: f64) -> f64 {
    debug_assert!(lo <= hi);
    if lo >= 0.0 {
        // Q(lo) − Q(hi)
        let a = ln_q_function(lo);
        let b = ln_q_function(hi);
        a + (-(b - a).exp()).ln_1p()
    } else if hi <= 0.0 {
        // Q(−hi) − Q(−lo)
        let a = ln_q_function(-hi);
        let b = ln_q_function(-lo);
        a + (-(b - a).exp()).ln_1p()
    } else {
        (1.0 - q_function(hi) - q_function(-lo)).ln()
    }
}

/// Binomial probability `C(n, i) p^i (1 − p)^(n − i)`.
pub fn binomial_pmf(n: usize, i: usize, p: f64) -> f64 {
    if i > n {
        return 0.0;
    }
    if p <= 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    if p >= 1.0 {
        return if i == n { 1.0 } else { 0.0 };
    }
    let ln_c = ln_factorial(n) - ln_factorial(i) - ln_factorial(n - i);
    (ln_c + i as f64 * p.ln() + (n - i) as f64 * (-p).ln_1p()).exp()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ln Σ exp(x_i)`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn log2(x: f64) -> f64 {
    x.ln() / LN_2
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (G7/K15) quadrature of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the
/// summed estimate falls below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (value, err) = gk15(&mut f, a, b);
    let mut segments = vec![(a, b, value, err)];
    for _ in 0..2000 {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let total_err: f64 = segments.iter().map(|s| s.3).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    segments.iter().map(|s| s.2).sum()
}
