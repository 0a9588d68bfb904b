//! Exact FIFO packet delays for one node and for the two-node tandem,
//! and empirical delay-budget violation estimates.
//!
//! The single-node delay is the max-plus expression
//! `D(n) = max_m [Σ_{k=m..n} δ(k) − Σ_{k=m..n−1} τ(k)]`, evaluated by the
//! equivalent recursion `D(n) = δ(n) + max(0, D(n−1) − τ(n−1))`. For the
//! tandem, node-1 departures drive node 2 and the end-to-end delay is
//! node-2 departure minus arrival; the unit tests check both against the
//! brute-force maxima.

use std::fmt::Write as _;
use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stats::Proportion;

/// Share of leading packets discarded before estimating violations.
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

/// Inter-arrival and service times (ms) for `n` packets.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    interarrivals: Vec<f64>,
    service1: Vec<f64>,
    service2: Option<Vec<f64>>,
}

impl Trace {
    /// `interarrivals[k]` separates packets `k` and `k + 1`, so it has one
    /// entry fewer than each service sequence. Service times may be zero
    /// (a degenerate node); inter-arrival times must be positive.
    pub fn new(
        interarrivals: Vec<f64>,
        service1: Vec<f64>,
        service2: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = service1.len();
        if n == 0 {
            return Err(Error::invalid("trace must contain at least one packet"));
        }
        if interarrivals.len() + 1 != n {
            return Err(Error::invalid(format!(
                "trace with {n} packets needs {} inter-arrival times, got {}",
                n - 1,
                interarrivals.len()
            )));
        }
        if let Some(s2) = &service2 {
            if s2.len() != n {
                return Err(Error::invalid("service sequences differ in length"));
            }
        }
        if interarrivals.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::invalid("inter-arrival times must be positive"));
        }
        let services = service1.iter().chain(service2.iter().flatten());
        if services.clone().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::invalid("service times must be nonnegative"));
        }
        Ok(Trace {
            interarrivals,
            service1,
            service2,
        })
    }

    pub fn len(&self) -> usize {
        self.service1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.service1.is_empty()
    }

    pub fn interarrivals(&self) -> &[f64] {
        &self.interarrivals
    }

    pub fn service1(&self) -> &[f64] {
        &self.service1
    }

    pub fn service2(&self) -> Option<&[f64]> {
        self.service2.as_deref()
    }

    /// CSV with header `tau_ms,delta1_ms,delta2_ms`; the last row has an
    /// empty `tau_ms`, and `delta2_ms` is empty for single-node traces.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau_ms,delta1_ms,delta2_ms\n");
        for k in 0..self.len() {
            let tau = self
                .interarrivals
                .get(k)
                .map(|t| t.to_string())
                .unwrap_or_default();
            let d2 = self
                .service2
                .as_ref()
                .map(|s| s[k].to_string())
                .unwrap_or_default();
            writeln!(out, "{tau},{},{d2}", self.service1[k]).unwrap();
        }
        out
    }

    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty trace CSV"))??;
        if header.trim() != "tau_ms,delta1_ms,delta2_ms" {
            return Err(Error::invalid(format!(
                "unexpected trace CSV header: {header}"
            )));
        }
        let mut taus = Vec::new();
        let mut s1 = Vec::new();
        let mut s2 = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(Error::invalid(format!(
                    "trace CSV row {row}: expected 3 columns"
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::invalid(format!("trace CSV row {row}: bad number {s:?}")))
            };
            if !cols[0].is_empty() {
                taus.push(parse(cols[0])?);
            }
            s1.push(parse(cols[1])?);
            if !cols[2].is_empty() {
                s2.push(parse(cols[2])?);
            }
        }
        let service2 = if s2.is_empty() { None } else { Some(s2) };
        Trace::new(taus, s1, service2)
    }
}

/// Per-packet delays (ms).
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySeq(pub Vec<f64>);

impl DelaySeq {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn lindley(interarrivals: &[f64], service: &[f64]) -> Vec<f64> {
    let mut delays = Vec::with_capacity(service.len());
    let mut prev = 0.0f64;
    for (n, &delta) in service.iter().enumerate() {
        let carried = if n == 0 {
            0.0
        } else {
            (prev - interarrivals[n - 1]).max(0.0)
        };
        prev = delta + carried;
        delays.push(prev);
    }
    delays
}

/// Single-node delays using `service1`.
pub fn delay_single(trace: &Trace) -> DelaySeq {
    DelaySeq(lindley(&trace.interarrivals, &trace.service1))
}

/// End-to-end delays through node 1 then node 2. Requires `service2`.
pub fn delay_tandem(trace: &Trace) -> Result<DelaySeq> {
    let service2 = trace
        .service2
        .as_ref()
        .ok_or_else(|| Error::invalid("tandem delay needs a second service sequence"))?;
    let first = lindley(&trace.interarrivals, &trace.service1);
    let mut arrival = 0.0;
    let mut last_departure = f64::NEG_INFINITY;
    let mut delays = Vec::with_capacity(first.len());
    for n in 0..first.len() {
        if n > 0 {
            arrival += trace.interarrivals[n - 1];
        }
        let ready = arrival + first[n];
        last_departure = ready.max(last_departure) + service2[n];
        delays.push(last_departure - arrival);
    }
    Ok(DelaySeq(delays))
}

/// Streaming form of [`delay_tandem`] for runs too long to store.
///
/// Times are kept relative to the latest arrival, so nothing grows with
/// the packet count.
#[derive(Debug, Clone, Copy, Default)]
pub struct TandemQueue {
    started: bool,
    /// Node-1 sojourn of the previous packet.
    prev_first: f64,
    /// Node-2 departure of the previous packet, relative to its arrival.
    prev_out: f64,
}

impl TandemQueue {
    /// Feeds the next packet; `gap` is the time since the previous arrival
    /// (ignored for the first packet). Returns its end-to-end delay.
    pub fn push(&mut self, gap: f64, service1: f64, service2: f64) -> f64 {
        let (first, out) = if self.started {
            let first = service1 + (self.prev_first - gap).max(0.0);
            (first, first.max(self.prev_out - gap) + service2)
        } else {
            self.started = true;
            (service1, service1 + service2)
        };
        self.prev_first = first;
        self.prev_out = out;
        out
    }
}

/// Violation probabilities at every budget in `d_values` (ascending) from
/// a long tandem run split into `shards` independent runs.
///
/// Shard `i` draws from stream `i` of a ChaCha generator seeded with
/// `seed` and discards its own first 10% of packets. `draw` returns the
/// next (inter-arrival gap, node-1 service, node-2 service). Shards run on
/// scoped threads; counts are summed in shard order, so the result does
/// not depend on scheduling.
pub fn sharded_tandem_curve<F>(
    n_packets: usize,
    shards: usize,
    seed: u64,
    d_values: &[f64],
    draw: F,
) -> Result<Vec<Proportion>>
where
    F: Fn(&mut ChaCha8Rng) -> (f64, f64, f64) + Sync,
{
    if shards == 0 || n_packets < 10 * shards {
        return Err(Error::invalid(format!(
            "{n_packets} packets cannot fill {shards} shards"
        )));
    }
    if d_values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("delay budgets must be ascending"));
    }
    let run = |shard: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shard as u64);
        let len = n_packets / shards + usize::from(shard < n_packets % shards);
        let warmup = default_warmup(len);
        // hist[j]: delays exceeding exactly the first j budgets.
        let mut hist = vec![0usize; d_values.len() + 1];
        let mut queue = TandemQueue::default();
        for n in 0..len {
            let (gap, s1, s2) = draw(&mut rng);
            let d = queue.push(gap, s1, s2);
            if n >= warmup {
                hist[d_values.partition_point(|b| *b <= d)] += 1;
            }
        }
        (hist, len - warmup)
    };
    let results: Vec<(Vec<usize>, usize)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..shards).map(|i| scope.spawn(move || run(i))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard panicked"))
            .collect()
    });
    let mut hist = vec![0usize; d_values.len() + 1];
    let mut trials = 0;
    for (h, n) in &results {
        hist.iter_mut().zip(h).for_each(|(a, b)| *a += b);
        trials += n;
    }
    let mut above = 0;
    let mut out = vec![Proportion::new(0, trials); d_values.len()];
    for j in (0..d_values.len()).rev() {
        above += hist[j + 1];
        out[j] = Proportion::new(above, trials);
    }
    Ok(out)
}

fn warmup_skip(len: usize, warmup: usize) -> Result<usize> {
    if len <= warmup {
        return Err(Error::invalid(format!(
            "{len} delays leave nothing after a warmup of {warmup}"
        )));
    }
    Ok(warmup)
}

/// Default warmup: the first 10% of packets.
pub fn default_warmup(len: usize) -> usize {
    (len as f64 * DEFAULT_WARMUP_FRACTION) as usize
}

/// Fraction of post-warmup packets with `D(n) ≥ d_max`.
pub fn empirical_violation(delays: &DelaySeq, d_max: f64, warmup: usize) -> Result<Proportion> {
    let skip = warmup_skip(delays.len(), warmup)?;
    let tail = &delays.0[skip..];
    let hits = tail.iter().filter(|d| **d >= d_max).count();
    Ok(Proportion::new(hits, tail.len()))
}

/// [`empirical_violation`] at many budgets, sorting once.
pub fn violation_curve(
    delays: &DelaySeq,
    d_values: &[f64],
    warmup: usize,
) -> Result<Vec<Proportion>> {
    let skip = warmup_skip(delays.len(), warmup)?;
    let mut sorted = delays.0[skip..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(d_values
        .iter()
        .map(|&d| {
            let below = sorted.partition_point(|x| *x < d);
            Proportion::new(n - below, n)
        })
        .collect())
}
