//! Experiment configuration.
//!
//! A config file is JSON. Its `kind` picks a preset (`table1`, the
//! reference system, or `smoke`, a reduced 8-RB variant that trains in
//! seconds); every other key overrides the preset. Unknown keys are
//! rejected. Serializing a resolved config and reading it back gives the
//! same config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::arrival::ArrivalParams;
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::learner::{LinkSetup, TrainConfig};
use crate::snc::{QosExponent, QosTarget};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    #[default]
    Table1,
    Smoke,
}

/// Radio settings shared by both links, in the units of the parameter
/// table (dB, dBm/Hz, Hz, ms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub n_antennas: usize,
    pub pathloss_db: f64,
    pub rb_bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub slot_ms: f64,
    pub interference_prob: f64,
    /// INR used by single-point commands (train, evaluate, service-dist).
    pub inr_db: f64,
    /// INRs swept by `baseline`, `compare` and `train --all-inr`.
    pub inr_grid_db: Vec<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            n_antennas: 8,
            pathloss_db: 35.3 + 37.6 * 2.0,
            rb_bandwidth_hz: 180e3,
            noise_psd_dbm_hz: -173.0,
            slot_ms: 1.0,
            interference_prob: 0.5,
            inr_db: 10.0,
            inr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub n_rb: usize,
    pub packet_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    /// Channel slots simulated per link for power and the service PMF.
    pub n_slots: usize,
    /// Packets in the end-to-end tandem simulation.
    pub n_packets: usize,
    /// Samples per interference class for the KS test.
    pub ks_samples: usize,
}

/// Exponential-service tandem used by `bound-vs-sim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSimConfig {
    pub mean_service_ms: f64,
    pub n_packets: usize,
    pub d_from_ms: f64,
    pub d_to_ms: f64,
    pub d_step_ms: f64,
}

impl BoundSimConfig {
    pub fn d_grid(&self) -> Vec<f64> {
        let n = ((self.d_to_ms - self.d_from_ms) / self.d_step_ms + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.d_from_ms + i as f64 * self.d_step_ms)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub arrival: ArrivalParams,
    pub channel: ChannelConfig,
    pub ul: LinkConfig,
    pub dl: LinkConfig,
    pub qos: QosTarget,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub bound_sim: BoundSimConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::preset(ExperimentKind::Table1)
    }
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        let table1 = ExperimentConfig {
            kind,
            arrival: ArrivalParams::default(),
            channel: ChannelConfig::default(),
            ul: LinkConfig {
                n_rb: 52,
                packet_bits: 1e5,
            },
            dl: LinkConfig {
                n_rb: 133,
                packet_bits: 1e6,
            },
            qos: QosTarget::default(),
            train: TrainConfig::default(),
            eval: EvalConfig {
                n_slots: 1_000_000,
                n_packets: 10_000_000,
                ks_samples: 1000,
            },
            bound_sim: BoundSimConfig {
                mean_service_ms: 5.0,
                n_packets: 10_000_000,
                d_from_ms: 0.0,
                d_to_ms: 120.0,
                d_step_ms: 2.0,
            },
            seed: 2024,
            out_dir: PathBuf::from("out"),
        };
        match kind {
            ExperimentKind::Table1 => table1,
            ExperimentKind::Smoke => {
                // Eight RBs per link; packets shrink with the RB count so the
                // per-RB load stays that of the full links.
                let scale = |l: LinkConfig| LinkConfig {
                    n_rb: 8,
                    packet_bits: l.packet_bits * 8.0 / l.n_rb as f64,
                };
                ExperimentConfig {
                    ul: scale(table1.ul),
                    dl: scale(table1.dl),
                    train: TrainConfig {
                        dims: vec![1, 8, 16, 16, 8, 1],
                        n_iters: 2000,
                        ..TrainConfig::default()
                    },
                    // The empirical MGF audit is carried by rare long
                    // service times; 2e5 slots leave it ~5% noisy.
                    eval: EvalConfig {
                        n_slots: 2_000_000,
                        ..table1.eval
                    },
                    ..table1
                }
            }
        }
    }

    /// Parses a config: `kind` selects the preset, remaining keys are
    /// merged over it (objects recursively, everything else replaced).
    pub fn from_json(text: &str) -> Result<Self> {
        let user: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if !user.is_object() {
            return Err(Error::Config("top level must be a JSON object".into()));
        }
        let kind = match user.get("kind") {
            Some(k) => {
                ExperimentKind::deserialize(k).map_err(|e| Error::Config(format!("kind: {e}")))?
            }
            None => ExperimentKind::default(),
        };
        let mut merged = serde_json::to_value(ExperimentConfig::preset(kind))?;
        // The arrival section has two alternative forms, so it is taken
        // as a whole rather than merged.
        let mut user = user;
        if let Some(arrival) = user.as_object_mut().and_then(|o| o.remove("arrival")) {
            merged["arrival"] = arrival;
        }
        merge(&mut merged, user);
        let cfg: ExperimentConfig =
            serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(
            serde_json::to_string(self)
                .expect("config serializes")
                .as_bytes(),
        );
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.qos
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.train.validate()?;
        let c = &self.channel;
        if c.inr_grid_db.is_empty()
            || c.inr_grid_db
                .iter()
                .chain([&c.inr_db])
                .any(|x| !x.is_finite())
        {
            return Err(Error::Config(
                "INR values must be finite and the grid nonempty".into(),
            ));
        }
        for (name, l) in [("ul", &self.ul), ("dl", &self.dl)] {
            if l.n_rb == 0 || !(l.packet_bits > 0.0) {
                return Err(Error::Config(format!(
                    "{name}: need n_rb ≥ 1 and packet_bits > 0"
                )));
            }
        }
        if self.eval.n_slots == 0 || self.eval.n_packets < 10 || self.eval.ks_samples < 8 {
            return Err(Error::Config("eval sizes too small".into()));
        }
        let b = &self.bound_sim;
        if !(b.mean_service_ms > 0.0
            && b.d_step_ms > 0.0
            && b.d_to_ms >= b.d_from_ms
            && b.d_from_ms >= 0.0)
            || b.n_packets < 10
        {
            return Err(Error::Config(
                "bound_sim: invalid sweep or service mean".into(),
            ));
        }
        for inr in c.inr_grid_db.iter().chain([&c.inr_db]) {
            self.channel_params(&self.ul, *inr)?;
        }
        Ok(())
    }

    pub fn channel_params(&self, link: &LinkConfig, inr_db: f64) -> Result<ChannelParams> {
        let c = &self.channel;
        ChannelParams::from_db(
            c.n_antennas,
            c.pathloss_db,
            c.rb_bandwidth_hz,
            c.noise_psd_dbm_hz,
            link.n_rb,
            c.slot_ms,
            c.interference_prob,
            inr_db,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn link_setup(&self, link: &LinkConfig, exponent: QosExponent) -> LinkSetup {
        LinkSetup {
            m_bits: link.packet_bits,
            slot_ms: self.channel.slot_ms,
            p_interf: self.channel.interference_prob,
            w0: self.channel.rb_bandwidth_hz,
            exponent,
            pmf_tol: self.train.pmf_tol,
            k_cap: crate::learner::evaluate::service_cap(&self.qos, self.channel.slot_ms),
        }
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
