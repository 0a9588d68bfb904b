//! Primal-dual training of the water-level network.
//!
//! Weights descend the Lagrangian with Adam; the multiplier ascends along
//! the constraint and is projected onto `λ ≥ 0`. Internally both terms
//! are normalized: the power by a reference power `P_ref` and the moment
//! condition by `A`, so the step sizes do not depend on the link's power
//! scale. The reported λ is converted back to the unnormalized Lagrangian.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::waterfill_for_rate;
use crate::channel::{ChannelParams, SlotChannel};
use crate::error::{Error, Result};

use super::network::{LayerGrad, PolicyParams, DEFAULT_DIMS};
use super::objective::{lagrangian, waterfill_outcome, weighted_gradients, LinkSetup, Objective};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub dims: Vec<usize>,
    pub batch_size: usize,
    pub primal_lr: f64,
    /// Learning rate at the last iteration as a fraction of `primal_lr`
    /// (exponential schedule; 1 keeps it constant).
    pub lr_final_fraction: f64,
    pub dual_lr: f64,
    /// Starting value of the normalized multiplier. Starting at zero lets
    /// the first steps drive whole slot classes to zero power, where the
    /// water-filling hinge has no gradient left to recover.
    pub dual_init: f64,
    /// Divergence threshold on the normalized multiplier.
    pub lambda_cap: f64,
    pub n_iters: usize,
    pub n_train_slots: usize,
    pub n_val_slots: usize,
    /// Validation period (iterations).
    pub eval_every: usize,
    /// Training and selection require `E[e^{θδ}] ≤ (1 − margin)·A`.
    pub constraint_margin: f64,
    pub pmf_tol: f64,
    /// After this many consecutive infeasible validations, go back to the
    /// best feasible weights with half the step size (0 disables).
    ///
    /// When interfered-slot rates are nearly deterministic the service-time
    /// CDF is close to a step function; a step past its edge lands on a
    /// flat infeasible plateau that gradients cannot leave.
    pub restart_after: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dims: DEFAULT_DIMS.to_vec(),
            batch_size: 1024,
            primal_lr: 1e-3,
            lr_final_fraction: 0.1,
            dual_lr: 0.05,
            dual_init: 1.0,
            lambda_cap: 1e6,
            n_iters: 3000,
            n_train_slots: 500_000,
            n_val_slots: 10_000,
            eval_every: 50,
            constraint_margin: 0.0,
            pmf_tol: 1e-9,
            restart_after: 4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.batch_size >= 2
            && self.primal_lr > 0.0
            && self.lr_final_fraction > 0.0
            && self.dual_lr >= 0.0
            && self.dual_init >= 0.0
            && self.lambda_cap > 0.0
            && self.n_train_slots >= self.batch_size
            && self.n_val_slots >= 2
            && self.eval_every >= 1
            && (0.0..1.0).contains(&self.constraint_margin)
            && self.pmf_tol > 0.0;
        if !ok {
            return Err(Error::Config(format!(
                "invalid training settings: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Lagrange multiplier in the unnormalized Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRow {
    pub iter: usize,
    pub mean_power_w: f64,
    /// `E[e^{θ*δ}] − A` on the batch.
    pub constraint_value: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationRow {
    pub iter: usize,
    pub mean_power_w: f64,
    pub constraint_value: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
    pub validation: Vec<ValidationRow>,
}

impl TrainLog {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,mean_power_w,constraint_value,lambda\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e}",
                r.iter, r.mean_power_w, r.constraint_value, r.lambda
            );
        }
        s
    }
}

/// Result of [`train`].
#[derive(Debug, Clone)]
pub struct Trained {
    pub params: PolicyParams,
    pub dual: DualState,
    /// Iteration whose weights were kept.
    pub selected_iter: usize,
    /// Validation objective of the kept weights.
    pub validation: Objective,
    /// Whether the kept weights meet the (margined) constraint on the
    /// validation slots.
    pub feasible: bool,
}

/// Deterministic training pool: slot `i` is drawn from its own ChaCha
/// stream, so the pool never has to be held in memory.
#[derive(Debug, Clone, Copy)]
pub struct SlotPool {
    pub seed: u64,
    pub len: usize,
}

impl SlotPool {
    pub fn slot(&self, chan: &ChannelParams, i: usize) -> SlotChannel {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        chan.sample_slot(&mut rng)
    }

    pub fn slots(&self, chan: &ChannelParams, range: std::ops::Range<usize>) -> Vec<SlotChannel> {
        range.map(|i| self.slot(chan, i)).collect()
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(params: &PolicyParams) -> Self {
        let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
        Adam {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut PolicyParams, grads: &[LayerGrad], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        let gs = grads.iter().flat_map(|g| g.tensors());
        for (((w, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(gs)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..w.len() {
                m[i] = Self::B1 * m[i] + (1.0 - Self::B1) * g[i];
                v[i] = Self::B2 * v[i] + (1.0 - Self::B2) * g[i] * g[i];
                w[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + Self::EPS);
            }
        }
    }
}

/// Reference level and power: minimum-power water-filling that sends the
/// packet at a constant rate over `x₀` of the QoS exponent.
pub fn reference_level(probe: &[SlotChannel], link: &LinkSetup) -> Result<(f64, f64)> {
    let x0_ms = link.exponent.x0().max(link.slot_ms);
    let rate = link.m_bits / (x0_ms * 1e-3);
    let (mut level, mut power) = (0.0, 0.0);
    for s in probe {
        let (_, w) = waterfill_for_rate(&s.gamma, rate, link.w0)?;
        level += w;
        power += waterfill_outcome(&s.gamma, w, link.w0).0;
    }
    let n = probe.len() as f64;
    Ok((level / n, power / n))
}

/// Trains one link's policy. Rows are appended to `log` as they are
/// produced, so it also holds the history when training aborts.
pub fn train(
    cfg: &TrainConfig,
    chan: &ChannelParams,
    link: &LinkSetup,
    rng: &mut impl RngCore,
    log: &mut TrainLog,
) -> Result<Trained> {
    cfg.validate()?;
    chan.validate()?;
    let pool = SlotPool {
        seed: rng.next_u64(),
        len: cfg.n_train_slots,
    };
    let val_pool = SlotPool {
        seed: rng.next_u64(),
        len: cfg.n_val_slots,
    };
    let mut init_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());
    let mut batch_rng = ChaCha8Rng::seed_from_u64(rng.next_u64());

    let val = val_pool.slots(chan, 0..val_pool.len);
    let probe = &val[..val.len().min(2048)];
    let (level_ref, p_ref) = reference_level(probe, link)?;
    let mut params = PolicyParams::init_for(&cfg.dims, probe, level_ref, &mut init_rng)?;
    let a = link.exponent.a_const();
    let bound = 1.0 - cfg.constraint_margin;
    let to_lambda = |nu: f64| nu * p_ref / a;

    let mut adam = Adam::new(&params);
    let mut nu = cfg.dual_init;
    let mut best: Option<(usize, PolicyParams, Objective, f64)> = None;
    let mut last_val = None;
    let mut infeasible_run = 0;
    let mut lr_scale = 1.0;

    for iter in 0..=cfg.n_iters {
        if iter % cfg.eval_every == 0 || iter == cfg.n_iters {
            let o = lagrangian(&params, 0.0, &val, link)?;
            let feasible = o.complete && o.mgf <= bound * a;
            log.validation.push(ValidationRow {
                iter,
                mean_power_w: o.mean_power,
                constraint_value: o.constraint,
                feasible,
            });
            if feasible && best.as_ref().is_none_or(|b| o.mean_power < b.2.mean_power) {
                best = Some((iter, params.clone(), o, nu));
            }
            last_val = Some(o);
            infeasible_run = if feasible { 0 } else { infeasible_run + 1 };
            if cfg.restart_after > 0 && infeasible_run >= cfg.restart_after && iter < cfg.n_iters {
                if let Some((_, kept, _, _)) = &best {
                    // The multiplier keeps its grown value, so the retry
                    // weighs the constraint more heavily.
                    params = kept.clone();
                    adam = Adam::new(&params);
                    lr_scale *= 0.5;
                    infeasible_run = 0;
                }
            }
        }
        if iter == cfg.n_iters {
            break;
        }
        let batch: Vec<SlotChannel> = (0..cfg.batch_size)
            .map(|_| pool.slot(chan, batch_rng.random_range(0..pool.len)))
            .collect();
        let (o, grads) =
            weighted_gradients(&params, to_lambda(nu), &batch, link, 1.0 / p_ref, nu / a).map_err(
                |e| match e {
                    Error::NonFiniteGradient(node) => Error::Divergence {
                        iteration: iter,
                        reason: format!("non-finite gradient at {node}"),
                    },
                    other => other,
                },
            )?;
        if !o.value.is_finite() {
            return Err(Error::Divergence {
                iteration: iter,
                reason: "non-finite Lagrangian".into(),
            });
        }
        let lr = lr_scale
            * cfg.primal_lr
            * cfg
                .lr_final_fraction
                .powf(iter as f64 / cfg.n_iters.max(1) as f64);
        adam.step(&mut params, &grads, lr);
        // Clipping the normalized violation keeps one bad batch from
        // throwing the multiplier far off.
        let violation = (o.mgf / a - bound).clamp(-1.0, 1.0);
        nu = (nu + cfg.dual_lr * violation).max(0.0);
        log.rows.push(LogRow {
            iter,
            mean_power_w: o.mean_power,
            constraint_value: o.constraint,
            lambda: to_lambda(nu),
        });
        if nu > cfg.lambda_cap {
            return Err(Error::Divergence {
                iteration: iter,
                reason: format!("multiplier exceeded the cap {}", cfg.lambda_cap),
            });
        }
    }

    Ok(match best {
        Some((selected_iter, params, validation, nu)) => Trained {
            params,
            dual: DualState {
                lambda: to_lambda(nu),
            },
            selected_iter,
            validation,
            feasible: true,
        },
        None => Trained {
            params,
            dual: DualState {
                lambda: to_lambda(nu),
            },
            selected_iter: cfg.n_iters,
            validation: last_val.expect("validated at the last iteration"),
            feasible: false,
        },
    })
}

pub const CHECKPOINT_FORMAT: &str = "tandem-qos-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON checkpoint of a trained policy. Matrices are row-major
/// `d_in × d_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub dims: Vec<usize>,
    pub params: PolicyParams,
    pub lambda: f64,
    pub iteration: usize,
    pub seed: u64,
}

impl Checkpoint {
    pub fn new(params: PolicyParams, dual: DualState, iteration: usize, seed: u64) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            dims: params.dims(),
            params,
            lambda: dual.lambda,
            iteration,
            seed,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Checkpoint(format!("cannot read {}: {e}", path.display())))?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        if ck.format != CHECKPOINT_FORMAT || ck.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                ck.format, ck.version
            )));
        }
        ck.params.validate()?;
        if ck.dims != ck.params.dims() {
            return Err(Error::Checkpoint(
                "declared dims disagree with the weights".into(),
            ));
        }
        if !(ck.lambda >= 0.0) {
            return Err(Error::Checkpoint("negative multiplier".into()));
        }
        Ok(ck)
    }
}
