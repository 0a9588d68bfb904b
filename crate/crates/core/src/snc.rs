//! Martingale delay-violation bounds for the single queue and the
//! two-node tandem, and the solver for the QoS exponent that meets a
//! target violation probability with equality.
//!
//! For one node fed by the arrival process, the violation probability is
//! bounded by `A·e^{−θx}` with `A = 1/E[e^{−θτ}]`, valid whenever the
//! service times satisfy `E[e^{θδ}]·E[e^{−θτ}] ≤ 1`. The capped
//! complement `f̄(x) = 1 − min(1, A e^{−θx})` is the CDF of `x₀ + Exp(θ)`
//! with `x₀ = ln A / θ`, so the tandem bound `1 − f̄_u ∗ f̄_d` is the tail
//! of a shifted Gamma(2, θ) when both nodes share θ.

use serde::{Deserialize, Serialize};

use crate::arrival::ArrivalParams;
use crate::error::{Error, Result};
use crate::math::integrate;

/// Lower edge of the θ search bracket (1/ms).
pub const THETA_MIN: f64 = 1e-6;
/// θ beyond which the target is declared infeasible (1/ms).
pub const THETA_CAP: f64 = 1e3;

/// Delay budget and target violation probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosTarget {
    pub d_max_ms: f64,
    pub eps_max: f64,
}

impl QosTarget {
    pub fn new(d_max_ms: f64, eps_max: f64) -> Result<Self> {
        let target = QosTarget { d_max_ms, eps_max };
        target.validate()?;
        Ok(target)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_max_ms > 0.0) {
            return Err(Error::invalid(format!(
                "delay budget must be positive, got {}",
                self.d_max_ms
            )));
        }
        if !(self.eps_max > 0.0 && self.eps_max < 1.0) {
            return Err(Error::invalid(format!(
                "target violation must lie in (0, 1), got {}",
                self.eps_max
            )));
        }
        Ok(())
    }
}

impl Default for QosTarget {
    fn default() -> Self {
        QosTarget {
            d_max_ms: 20.0,
            eps_max: 1e-3,
        }
    }
}

/// QoS exponent θ (1/ms) with its arrival factor `A = 1/E[e^{−θτ}]`,
/// kept as `ln A` so large exponents do not overflow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosExponent {
    theta: f64,
    ln_a: f64,
}

impl QosExponent {
    pub fn new(theta: f64, a_const: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::invalid(format!(
                "QoS exponent must be positive, got {theta}"
            )));
        }
        if !(a_const >= 1.0 && a_const.is_finite()) {
            return Err(Error::invalid(format!(
                "arrival factor must be at least 1, got {a_const}"
            )));
        }
        QosExponent::from_ln_a(theta, a_const.ln())
    }

    pub fn from_ln_a(theta: f64, ln_a: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::invalid(format!(
                "QoS exponent must be positive, got {theta}"
            )));
        }
        if !(ln_a >= 0.0 && ln_a.is_finite()) {
            return Err(Error::invalid(format!(
                "ln of the arrival factor must be nonnegative, got {ln_a}"
            )));
        }
        Ok(QosExponent { theta, ln_a })
    }

    /// Exponent `theta` with the factor implied by `arrivals`.
    pub fn from_arrivals(arrivals: &ArrivalParams, theta: f64) -> Result<Self> {
        // ln E[e^{−θτ}] ≤ 0 analytically; clip round-off just above zero.
        QosExponent::from_ln_a(theta, (-arrivals.ln_neg_mgf(theta)?).max(0.0))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn a_const(&self) -> f64 {
        self.ln_a.exp()
    }

    pub fn ln_a(&self) -> f64 {
        self.ln_a
    }

    /// Point where the single-node bound reaches 1: `ln A / θ`.
    pub fn x0(&self) -> f64 {
        self.ln_a / self.theta
    }
}

/// `min(1, A·e^{−θ d})`.
pub fn single_bound(q: &QosExponent, d_max: f64) -> f64 {
    (q.ln_a - q.theta * d_max).exp().min(1.0)
}

/// `f̄(x) = 1 − min(1, A e^{−θx})`.
pub fn fbar(q: &QosExponent, x: f64) -> f64 {
    if x <= q.x0() {
        0.0
    } else {
        (1.0 - (q.ln_a - q.theta * x).exp()).max(0.0)
    }
}

/// `1 − (f̄_u ∗ f̄_d)(d_max)` for two nodes sharing θ, in closed form.
pub fn tandem_bound(q_u: &QosExponent, q_d: &QosExponent, d_max: f64) -> Result<f64> {
    if (q_u.theta - q_d.theta).abs() > 1e-12 * q_u.theta.max(q_d.theta) {
        return Err(Error::invalid(format!(
            "tandem nodes must share the QoS exponent ({} vs {})",
            q_u.theta, q_d.theta
        )));
    }
    let slack = d_max - q_u.x0() - q_d.x0();
    if slack <= 0.0 {
        return Ok(1.0);
    }
    let u = q_u.theta * slack;
    Ok(((-u).exp() * (1.0 + u)).min(1.0))
}

/// Same bound by numerical Stieltjes integration `∫ f̄_u(d − y) df̄_d(y)`,
/// valid for any pair of exponents.
///
/// The integral is split at the start of the support of `f̄_d`, where a
/// CDF jump is carried as a point mass.
pub fn tandem_bound_numeric(q_u: &QosExponent, q_d: &QosExponent, d_max: f64) -> f64 {
    let start_u = q_u.x0().max(0.0);
    let start_d = q_d.x0().max(0.0);
    let upper = d_max - start_u;
    if upper <= start_d {
        return 1.0;
    }
    let jump = fbar(q_d, start_d);
    let atom = jump * fbar(q_u, d_max - start_d);
    let density = |y: f64| q_d.theta * (q_d.ln_a - q_d.theta * y).exp();
    let continuous = integrate(
        |y| fbar(q_u, d_max - y) * density(y),
        start_d,
        upper,
        1e-14,
        1e-13,
    );
    (1.0 - atom - continuous).clamp(0.0, 1.0)
}

/// Tandem bound with both nodes driven by `arrivals` at exponent θ.
pub fn arrival_tandem_bound(arrivals: &ArrivalParams, theta: f64, d_max: f64) -> Result<f64> {
    let q = QosExponent::from_arrivals(arrivals, theta)?;
    tandem_bound(&q, &q, d_max)
}

/// Result of the θ* search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaStar {
    pub exponent: QosExponent,
    /// Bound value at the returned exponent.
    pub bound: f64,
    /// The target is already met at the lower bracket edge, so θ* is
    /// pinned there rather than found by bisection.
    pub at_lower_edge: bool,
}

/// Finds θ* with `1 − f̄_u ∗ f̄_d(θ*, D_max) = ε_max` by bisection.
///
/// The upper bracket starts at 1/ms and doubles until the bound drops
/// below the target; reaching [`THETA_CAP`] means infeasible.
pub fn solve_theta_star(arrivals: &ArrivalParams, target: &QosTarget) -> Result<ThetaStar> {
    target.validate()?;
    let d = target.d_max_ms;
    let eps = target.eps_max;
    let bound = |theta: f64| arrival_tandem_bound(arrivals, theta, d);

    let at_min = bound(THETA_MIN)?;
    if at_min <= eps {
        return Ok(ThetaStar {
            exponent: QosExponent::from_arrivals(arrivals, THETA_MIN)?,
            bound: at_min,
            at_lower_edge: true,
        });
    }
    let mut hi = 1.0;
    while bound(hi)? >= eps {
        hi *= 2.0;
        if hi > THETA_CAP {
            return Err(Error::infeasible(format!(
                "no QoS exponent up to {THETA_CAP}/ms meets violation {eps:e} at {d} ms"
            )));
        }
    }

    // The bound must cross the target once on the bracket; locate the
    // crossing on a log grid before bisecting.
    let grid: Vec<f64> = (0..=256)
        .map(|i| THETA_MIN * (hi / THETA_MIN).powf(i as f64 / 256.0))
        .collect();
    let below: Vec<bool> = grid
        .iter()
        .map(|&t| bound(t).map(|b| b < eps))
        .collect::<Result<_>>()?;
    let first_below = below
        .iter()
        .position(|&b| b)
        .expect("upper edge is below target");
    if below[first_below..].iter().any(|&b| !b) {
        return Err(Error::infeasible(
            "bound crosses the target more than once on the bracket",
        ));
    }
    let (mut lo, mut hi) = (grid[first_below - 1], grid[first_below]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let b = bound(mid)?;
        if (b - eps).abs() <= 1e-13 * eps || mid == lo || mid == hi {
            lo = mid;
            hi = mid;
            break;
        }
        if b >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Pick whichever end is closer to the target.
    let (b_lo, b_hi) = (bound(lo)?, bound(hi)?);
    let theta = if (b_lo - eps).abs() <= (b_hi - eps).abs() {
        lo
    } else {
        hi
    };
    Ok(ThetaStar {
        exponent: QosExponent::from_arrivals(arrivals, theta)?,
        bound: bound(theta)?,
        at_lower_edge: false,
    })
}

/// Outcome of the moment condition `E[e^{θδ}]·E[e^{−θτ}] ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub feasible: bool,
    pub product: f64,
    /// `1 − product`.
    pub slack: f64,
}

pub fn feasibility_check(service_mgf: f64, arrival_neg_mgf: f64) -> Feasibility {
    let product = service_mgf * arrival_neg_mgf;
    Feasibility {
        feasible: product <= 1.0,
        product,
        slack: 1.0 - product,
    }
}

/// Largest θ (up to `cap`) with `ln E[e^{θδ}] + ln E[e^{−θτ}] ≤ 0`, for a
/// service log-MGF that is convex in θ. `None` if no θ > 0 qualifies.
pub fn max_feasible_theta(
    arrivals: &ArrivalParams,
    ln_service_mgf: impl Fn(f64) -> f64,
    cap: f64,
) -> Option<f64> {
    let excess = |t: f64| {
        let v = ln_service_mgf(t) + arrivals.ln_neg_mgf(t).unwrap_or(f64::INFINITY);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    // The excess is convex and zero at θ = 0: either it rises right away
    // (unstable) or it dips and crosses zero once.
    let probe = THETA_MIN;
    if excess(probe) > 0.0 {
        return None;
    }
    if excess(cap) <= 0.0 {
        return Some(cap);
    }
    let (mut lo, mut hi) = (probe, cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(lo)
}

/// Tightest tandem bound at `d_max` over the exponents the service
/// admits: `min` of the bound over `θ ∈ (0, θ_max]`, where `θ_max` is the
/// largest θ meeting the moment condition. Returns the bound and the θ
/// attaining it.
pub fn optimized_tandem_bound(
    arrivals: &ArrivalParams,
    theta_max: f64,
    d_max: f64,
) -> Result<(f64, f64)> {
    if !(theta_max > 0.0) {
        return Err(Error::invalid(format!(
            "θ_max must be positive, got {theta_max}"
        )));
    }
    let bound = |t: f64| arrival_tandem_bound(arrivals, t, d_max);
    // Coarse log grid, then golden-section refinement around the best
    // grid point.
    let n = 400;
    let lo_edge = theta_max * 1e-4;
    let grid: Vec<f64> = (0..=n)
        .map(|i| lo_edge * (theta_max / lo_edge).powf(i as f64 / n as f64))
        .collect();
    let values: Vec<f64> = grid.iter().map(|&t| bound(t)).collect::<Result<_>>()?;
    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("grid is nonempty");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (bound(c)?, bound(d)?);
    for _ in 0..100 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = bound(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = bound(d)?;
        }
        if b - a <= 1e-12 * b {
            break;
        }
    }
    let mut out = (values[best], grid[best]);
    for (v, t) in [(fc, c), (fd, d)] {
        if v < out.0 {
            out = (v, t);
        }
    }
    Ok(out)
}
