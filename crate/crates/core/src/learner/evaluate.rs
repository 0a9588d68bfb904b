//! Monte Carlo evaluation of UL/DL policies: average power, simulated
//! service times, the moment-condition audit and end-to-end violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::allocator::{baseline_service_slots, ConstantRate, PowerPolicy};
use crate::arrival::ArrivalParams;
use crate::channel::{rate_of, ChannelParams, PACKET_REL_TOL};
use crate::error::Result;
use crate::queueing::{TandemQueue, DEFAULT_WARMUP_FRACTION};
use crate::service::{ln_service_mgf, RateStats, ServiceTimeDist};
use crate::snc::{feasibility_check, Feasibility, QosExponent, QosTarget};
use crate::stats::{MeanEstimate, Proportion, RunningMoments};

const CHUNK: usize = 2048;

/// Simulation outcome of one link under one policy.
#[derive(Debug, Clone, Serialize)]
pub struct LinkReport {
    pub mean_power: MeanEstimate,
    pub n_slots: usize,
    /// Completed packets (including censored ones).
    pub n_packets: usize,
    /// Packets still unfinished after `cap` slots; recorded at `cap`.
    pub censored: usize,
    /// Empirical service-time PMF (slots).
    pub service: ServiceTimeDist,
    /// `E[e^{θ*δ}]·E[e^{−θ*τ}]` with the empirical MGF.
    pub audit: Feasibility,
    /// Per-class slot-rate moments; `None` if a class never occurred.
    pub rate_stats: Option<RateStats>,
}

/// Runs `policy` over `n_slots` channel draws from `seed`, cutting the
/// rate stream into back-to-back packets of `m_bits`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_link(
    policy: &impl PowerPolicy,
    chan: &ChannelParams,
    m_bits: f64,
    arrivals: &ArrivalParams,
    exponent: &QosExponent,
    n_slots: usize,
    cap: usize,
    seed: u64,
) -> Result<LinkReport> {
    chan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut power = RunningMoments::default();
    let (mut inter, mut clear) = (RunningMoments::default(), RunningMoments::default());
    let mut counts = vec![0usize; cap];
    let (mut bits, mut k, mut censored) = (0.0, 0usize, 0usize);
    let mut left = n_slots;
    while left > 0 {
        let slots = chan.sample_slots(left.min(CHUNK), &mut rng);
        left -= slots.len();
        for (slot, p) in slots.iter().zip(policy.allocate_batch(&slots)) {
            power.push(p.total());
            let r = rate_of(p.as_slice(), &slot.gamma, chan.w0);
            if slot.interfered {
                inter.push(r)
            } else {
                clear.push(r)
            }
            bits += r * chan.slot_seconds();
            k += 1;
            let done = bits >= m_bits * (1.0 - PACKET_REL_TOL);
            if done || k == cap {
                counts[k - 1] += 1;
                censored += usize::from(!done);
                bits = 0.0;
                k = 0;
            }
        }
    }
    let n_packets: usize = counts.iter().sum();
    let last = counts.iter().rposition(|c| *c > 0).map_or(1, |i| i + 1);
    let pmf = counts[..last]
        .iter()
        .map(|c| *c as f64 / n_packets.max(1) as f64)
        .collect();
    let service = ServiceTimeDist {
        pmf,
        slot_ms: chan.slot_len,
    };
    let theta = exponent.theta();
    let product = if n_packets == 0 {
        f64::INFINITY
    } else {
        (ln_service_mgf(&service, theta)? + arrivals.ln_neg_mgf(theta)?).exp()
    };
    Ok(LinkReport {
        mean_power: power.estimate(),
        n_slots,
        n_packets,
        censored,
        service,
        audit: feasibility_check(product, 1.0),
        rate_stats: (inter.count() >= 2 && clear.count() >= 2).then(|| RateStats {
            mu_i: inter.mean(),
            var_i: inter.population_variance(),
            mu_u: clear.mean(),
            var_u: clear.population_variance(),
            n_i: inter.count(),
            n_u: clear.count(),
        }),
    })
}

/// Draws service times (ms) i.i.d. from an empirical PMF.
pub struct ServiceSampler {
    cdf: Vec<f64>,
    slot_ms: f64,
}

impl ServiceSampler {
    pub fn new(dist: &ServiceTimeDist) -> Self {
        let mut acc = 0.0;
        let cdf = dist.pmf.iter().map(|p| {
            acc += p;
            acc
        });
        let mut cdf: Vec<f64> = cdf.collect();
        if let Some(last) = cdf.last_mut() {
            *last = f64::INFINITY;
        }
        ServiceSampler {
            cdf,
            slot_ms: dist.slot_ms,
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        (self.cdf.partition_point(|c| *c <= u) + 1) as f64 * self.slot_ms
    }
}

/// Fraction of packets whose end-to-end delay reaches `target.d_max_ms`
/// in a tandem simulation with service times resampled from `ul` and `dl`.
pub fn tandem_violation(
    arrivals: &ArrivalParams,
    ul: &ServiceTimeDist,
    dl: &ServiceTimeDist,
    target: &QosTarget,
    n_packets: usize,
    seed: u64,
) -> Proportion {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (su, sd) = (ServiceSampler::new(ul), ServiceSampler::new(dl));
    let warmup = (n_packets as f64 * DEFAULT_WARMUP_FRACTION) as usize;
    let mut queue = TandemQueue::default();
    let mut hits = 0;
    for n in 0..n_packets {
        let gap = if n == 0 {
            0.0
        } else {
            arrivals.sample_interarrival(&mut rng)
        };
        let d = queue.push(gap, su.sample(&mut rng), sd.sample(&mut rng));
        if n >= warmup && d >= target.d_max_ms {
            hits += 1;
        }
    }
    Proportion::new(hits, n_packets - warmup)
}

/// One link's inputs for [`evaluate`].
#[derive(Debug, Clone, Copy)]
pub struct LinkSpec<'a> {
    pub chan: &'a ChannelParams,
    pub m_bits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub ul: LinkReport,
    pub dl: LinkReport,
    pub baseline_ul: LinkReport,
    pub baseline_dl: LinkReport,
    pub baseline_slots: usize,
    /// `(P_base − P)/P_base`.
    pub gain_ul: f64,
    pub gain_dl: f64,
    pub violation: Proportion,
    pub baseline_violation: Proportion,
}

/// Full comparison of learned (or any) UL/DL policies against the
/// fixed-service-time baseline, on common channel draws.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    ul_policy: &impl PowerPolicy,
    dl_policy: &impl PowerPolicy,
    ul: LinkSpec,
    dl: LinkSpec,
    arrivals: &ArrivalParams,
    target: &QosTarget,
    exponent: &QosExponent,
    n_slots: usize,
    n_packets: usize,
    seed: u64,
) -> Result<Report> {
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let (seed_ul, seed_dl, seed_sim): (u64, u64, u64) =
        (seeds.random(), seeds.random(), seeds.random());
    let cap = service_cap(target, ul.chan.slot_len);
    let k = baseline_service_slots(exponent, ul.chan.slot_len)?;
    let rep_ul = evaluate_link(
        ul_policy, ul.chan, ul.m_bits, arrivals, exponent, n_slots, cap, seed_ul,
    )?;
    let rep_dl = evaluate_link(
        dl_policy, dl.chan, dl.m_bits, arrivals, exponent, n_slots, cap, seed_dl,
    )?;
    let baseline = |l: &LinkSpec, s: u64| {
        let policy = ConstantRate::for_packet(l.m_bits, k, l.chan.slot_len, l.chan.w0);
        evaluate_link(
            &policy, l.chan, l.m_bits, arrivals, exponent, n_slots, cap, s,
        )
    };
    let base_ul = baseline(&ul, seed_ul)?;
    let base_dl = baseline(&dl, seed_dl)?;
    let gain = |b: &LinkReport, p: &LinkReport| {
        (b.mean_power.mean - p.mean_power.mean) / b.mean_power.mean
    };
    Ok(Report {
        gain_ul: gain(&base_ul, &rep_ul),
        gain_dl: gain(&base_dl, &rep_dl),
        violation: tandem_violation(
            arrivals,
            &rep_ul.service,
            &rep_dl.service,
            target,
            n_packets,
            seed_sim,
        ),
        baseline_violation: tandem_violation(
            arrivals,
            &base_ul.service,
            &base_dl.service,
            target,
            n_packets,
            seed_sim,
        ),
        ul: rep_ul,
        dl: rep_dl,
        baseline_ul: base_ul,
        baseline_dl: base_dl,
        baseline_slots: k,
    })
}

/// Service cap in slots: ten delay budgets.
pub fn service_cap(target: &QosTarget, slot_ms: f64) -> usize {
    ((crate::channel::SERVICE_CAP_FACTOR as f64 * target.d_max_ms / slot_ms).ceil() as usize).max(1)
}
