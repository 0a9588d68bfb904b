//! Permutation-equivariant network mapping a slot's SINR vector to a
//! water level.
//!
//! Every RB carries a feature row. A layer maps row `x_j` of a slot to
//! `act(x_j·E + mean_j(x)·G + b)`, so permuting the RBs permutes the rows
//! and nothing else. The last layer emits one scalar per RB; those are
//! mean-pooled, passed through a ReLU and multiplied by a fixed
//! `level_scale` to give the water level in watts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::{waterfill_at_level, PowerPolicy, PowerVector};
use crate::channel::SlotChannel;
use crate::error::{Error, Result};

/// Layer widths used for the full-size policy.
pub const DEFAULT_DIMS: [usize; 6] = [1, 256, 512, 512, 256, 1];

/// Upper bound on `rows × width` held at once by the chunked passes.
const CHUNK_FLOATS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

/// One shared-weight layer. Matrices are `d_in × d_out`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeLayer {
    pub d_in: usize,
    pub d_out: usize,
    pub elem: Vec<f64>,
    pub agg: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl PeLayer {
    fn zeros(d_in: usize, d_out: usize, activation: Activation) -> Self {
        PeLayer {
            d_in,
            d_out,
            elem: vec![0.0; d_in * d_out],
            agg: vec![0.0; d_in * d_out],
            bias: vec![0.0; d_out],
            activation,
        }
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [&mut self.elem, &mut self.agg, &mut self.bias]
    }

    fn check(&self) -> Result<()> {
        let n = self.d_in * self.d_out;
        if self.d_in == 0
            || self.d_out == 0
            || self.elem.len() != n
            || self.agg.len() != n
            || self.bias.len() != self.d_out
        {
            return Err(Error::Checkpoint(format!(
                "layer {}x{} has inconsistent weights",
                self.d_in, self.d_out
            )));
        }
        if self
            .elem
            .iter()
            .chain(&self.agg)
            .chain(&self.bias)
            .any(|w| !w.is_finite())
        {
            return Err(Error::Checkpoint("non-finite weight".into()));
        }
        Ok(())
    }
}

/// Weights plus the fixed input standardization and output scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub layers: Vec<PeLayer>,
    /// Input feature is `(ln γ − feature_mean) / feature_std`.
    pub feature_mean: f64,
    pub feature_std: f64,
    /// Water level (W) produced by a pooled output of 1.
    pub level_scale: f64,
}

impl PolicyParams {
    /// Xavier-uniform weights on every layer except the last, which starts
    /// at zero weights and unit bias so the initial level is `level_scale`
    /// for every slot.
    pub fn init(
        dims: &[usize],
        feature_mean: f64,
        feature_std: f64,
        level_scale: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if dims.len() < 2 || dims[0] != 1 || *dims.last().unwrap() != 1 || dims.contains(&0) {
            return Err(Error::invalid(format!(
                "layer dims must run from 1 to 1, got {dims:?}"
            )));
        }
        if !(feature_std > 0.0 && level_scale > 0.0 && feature_mean.is_finite()) {
            return Err(Error::invalid(
                "feature std and level scale must be positive",
            ));
        }
        let n_layers = dims.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        for (l, pair) in dims.windows(2).enumerate() {
            let (d_in, d_out) = (pair[0], pair[1]);
            let last = l + 1 == n_layers;
            let mut layer = PeLayer::zeros(
                d_in,
                d_out,
                if last {
                    Activation::Identity
                } else {
                    Activation::Tanh
                },
            );
            if last {
                layer.bias.fill(1.0);
            } else {
                let a = (6.0 / (d_in + d_out) as f64).sqrt();
                layer
                    .elem
                    .iter_mut()
                    .for_each(|w| *w = rng.random_range(-a..a));
                layer
                    .agg
                    .iter_mut()
                    .for_each(|w| *w = rng.random_range(-a..a));
            }
            layers.push(layer);
        }
        Ok(PolicyParams {
            layers,
            feature_mean,
            feature_std,
            level_scale,
        })
    }

    /// Same as [`PolicyParams::init`] with the input standardization
    /// measured on `probe`.
    pub fn init_for(
        dims: &[usize],
        probe: &[SlotChannel],
        level_scale: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut acc = crate::stats::RunningMoments::default();
        probe
            .iter()
            .flat_map(|s| &s.gamma)
            .for_each(|g| acc.push(g.ln()));
        if acc.count() < 2 {
            return Err(Error::invalid(
                "probe batch is too small to standardize inputs",
            ));
        }
        let std = acc.population_variance().sqrt().max(1e-6);
        PolicyParams::init(dims, acc.mean(), std, level_scale, rng)
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.layers[0].d_in];
        d.extend(self.layers.iter().map(|l| l.d_out));
        d
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Checkpoint("no layers".into()));
        }
        for l in &self.layers {
            l.check()?;
        }
        let dims = self.dims();
        let chained = self.layers.windows(2).all(|w| w[0].d_out == w[1].d_in);
        if !chained || dims[0] != 1 || *dims.last().unwrap() != 1 {
            return Err(Error::Checkpoint(format!(
                "layer dims do not chain from 1 to 1: {dims:?}"
            )));
        }
        if !(self.feature_std > 0.0 && self.level_scale > 0.0) {
            return Err(Error::Checkpoint(
                "feature std and level scale must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn n_weights(&self) -> usize {
        self.layers
            .iter()
            .map(|l| 2 * l.elem.len() + l.bias.len())
            .sum()
    }

    /// Weight tensors in a fixed order: per layer `elem`, `agg`, `bias`.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [&l.elem[..], &l.agg[..], &l.bias[..]])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.elem[..], &mut l.agg[..], &mut l.bias[..]])
            .collect()
    }

    fn max_width(&self) -> usize {
        self.dims().into_iter().max().unwrap_or(1)
    }

    fn chunk_slots(&self, n_rb: usize) -> usize {
        (CHUNK_FLOATS / (n_rb * self.max_width())).max(1)
    }

    /// Water levels for a run of slots.
    pub fn levels(&self, slots: &[SlotChannel]) -> Result<Vec<f64>> {
        let n_rb = common_rb_count(slots)?;
        let mut out = Vec::with_capacity(slots.len());
        for chunk in slots.chunks(self.chunk_slots(n_rb)) {
            out.extend(self.forward(chunk, n_rb).levels);
        }
        Ok(out)
    }

    /// Water level and the resulting water-filling allocation for one slot.
    pub fn pe_forward(&self, slot: &SlotChannel) -> (f64, PowerVector) {
        let w = self.forward(std::slice::from_ref(slot), slot.n_rb()).levels[0];
        (w, waterfill_at_level(&slot.gamma, w))
    }

    /// Gradient of `Σ_s d_levels[s]·w_s` with respect to every weight.
    ///
    /// Runs in chunks of slots, recomputing each chunk's forward pass, so
    /// memory stays bounded for wide networks.
    pub fn backward(&self, slots: &[SlotChannel], d_levels: &[f64]) -> Result<Vec<LayerGrad>> {
        assert_eq!(slots.len(), d_levels.len());
        let n_rb = common_rb_count(slots)?;
        let mut grads: Vec<LayerGrad> = self.layers.iter().map(LayerGrad::zeros_like).collect();
        let step = self.chunk_slots(n_rb);
        for (chunk, d_chunk) in slots.chunks(step).zip(d_levels.chunks(step)) {
            let fwd = self.forward(chunk, n_rb);
            self.backward_chunk(&fwd, d_chunk, &mut grads);
        }
        Ok(grads)
    }

    /// Forward pass that keeps the activations for [`Self::backward_cached`]
    /// when they fit in `max_floats`; otherwise the backward pass
    /// recomputes them chunk by chunk.
    pub(crate) fn forward_cached(
        &self,
        slots: &[SlotChannel],
        max_floats: usize,
    ) -> Result<(Vec<f64>, Option<Cache>)> {
        let n_rb = common_rb_count(slots)?;
        let per_row: usize = self.dims().iter().sum();
        if slots.len() * n_rb * per_row > max_floats {
            return Ok((self.levels(slots)?, None));
        }
        let fwd = self.forward(slots, n_rb);
        Ok((fwd.levels.clone(), Some(Cache(fwd))))
    }

    pub(crate) fn backward_cached(
        &self,
        slots: &[SlotChannel],
        cache: Option<Cache>,
        d_levels: &[f64],
    ) -> Result<Vec<LayerGrad>> {
        match cache {
            Some(Cache(fwd)) => {
                let mut grads: Vec<LayerGrad> =
                    self.layers.iter().map(LayerGrad::zeros_like).collect();
                self.backward_chunk(&fwd, d_levels, &mut grads);
                Ok(grads)
            }
            None => self.backward(slots, d_levels),
        }
    }

    fn forward(&self, slots: &[SlotChannel], n_rb: usize) -> Forward {
        let batch = slots.len();
        let rows = batch * n_rb;
        let mut x: Vec<f64> = Vec::with_capacity(rows);
        for s in slots {
            x.extend(
                s.gamma
                    .iter()
                    .map(|g| (g.ln() - self.feature_mean) / self.feature_std),
            );
        }
        let mut acts = vec![x];
        for layer in &self.layers {
            let input = acts.last().unwrap();
            let d_out = layer.d_out;
            // Broadcast the per-slot term mean(x)·G + b, then add x·E on top.
            let means = slot_means(input, batch, n_rb, layer.d_in);
            let mut shared = vec![0.0; batch * d_out];
            for row in shared.chunks_exact_mut(d_out) {
                row.copy_from_slice(&layer.bias);
            }
            gemm(
                batch,
                layer.d_in,
                d_out,
                &means,
                false,
                &layer.agg,
                false,
                &mut shared,
                1.0,
            );
            let mut z = vec![0.0; rows * d_out];
            for (zs, sh) in z
                .chunks_exact_mut(n_rb * d_out)
                .zip(shared.chunks_exact(d_out))
            {
                for row in zs.chunks_exact_mut(d_out) {
                    row.copy_from_slice(sh);
                }
            }
            gemm(
                rows,
                layer.d_in,
                d_out,
                input,
                false,
                &layer.elem,
                false,
                &mut z,
                1.0,
            );
            if layer.activation == Activation::Tanh {
                z.iter_mut().for_each(|v| *v = tanh(*v));
            }
            acts.push(z);
        }
        let out = acts.last().unwrap();
        let pooled: Vec<f64> = out
            .chunks(n_rb)
            .map(|c| c.iter().sum::<f64>() / n_rb as f64)
            .collect();
        let levels = pooled
            .iter()
            .map(|p| self.level_scale * p.max(0.0))
            .collect();
        Forward {
            batch,
            n_rb,
            acts,
            pooled,
            levels,
        }
    }

    fn backward_chunk(&self, fwd: &Forward, d_levels: &[f64], grads: &mut [LayerGrad]) {
        let (batch, n_rb) = (fwd.batch, fwd.n_rb);
        let rows = batch * n_rb;
        let inv_n = 1.0 / n_rb as f64;
        let mut dy = Vec::with_capacity(rows);
        for (s, &dl) in d_levels.iter().enumerate() {
            let dp = if fwd.pooled[s] > 0.0 {
                dl * self.level_scale
            } else {
                0.0
            };
            dy.extend(std::iter::repeat_n(dp * inv_n, n_rb));
        }
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let x = &fwd.acts[l];
            let y = &fwd.acts[l + 1];
            let (d_in, d_out) = (layer.d_in, layer.d_out);
            let mut dz = dy;
            if layer.activation == Activation::Tanh {
                dz.iter_mut().zip(y).for_each(|(d, y)| *d *= 1.0 - y * y);
            }
            let g = &mut grads[l];
            gemm(d_in, rows, d_out, x, true, &dz, false, &mut g.elem, 1.0);
            let sums = slot_sums(&dz, batch, n_rb, d_out);
            let means = slot_means(x, batch, n_rb, d_in);
            gemm(
                d_in, batch, d_out, &means, true, &sums, false, &mut g.agg, 1.0,
            );
            for row in sums.chunks_exact(d_out) {
                g.bias.iter_mut().zip(row).for_each(|(b, v)| *b += v);
            }
            if l == 0 {
                break;
            }
            let mut dx = vec![0.0; rows * d_in];
            gemm(
                rows,
                d_out,
                d_in,
                &dz,
                false,
                &layer.elem,
                true,
                &mut dx,
                0.0,
            );
            let mut shared = vec![0.0; batch * d_in];
            gemm(
                batch,
                d_out,
                d_in,
                &sums,
                false,
                &layer.agg,
                true,
                &mut shared,
                0.0,
            );
            for (block, sh) in dx
                .chunks_exact_mut(n_rb * d_in)
                .zip(shared.chunks_exact(d_in))
            {
                for row in block.chunks_exact_mut(d_in) {
                    row.iter_mut().zip(sh).for_each(|(d, v)| *d += v * inv_n);
                }
            }
            dy = dx;
        }
    }
}

impl PowerPolicy for PolicyParams {
    fn allocate(&self, slot: &SlotChannel) -> PowerVector {
        self.pe_forward(slot).1
    }

    fn allocate_batch(&self, slots: &[SlotChannel]) -> Vec<PowerVector> {
        let levels = self
            .levels(slots)
            .expect("slots in one batch share the RB count");
        slots
            .iter()
            .zip(levels)
            .map(|(s, w)| waterfill_at_level(&s.gamma, w))
            .collect()
    }
}

/// Gradient of one layer, shaped like [`PeLayer`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub elem: Vec<f64>,
    pub agg: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrad {
    fn zeros_like(layer: &PeLayer) -> Self {
        LayerGrad {
            elem: vec![0.0; layer.elem.len()],
            agg: vec![0.0; layer.agg.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }

    pub fn tensors(&self) -> [&[f64]; 3] {
        [&self.elem, &self.agg, &self.bias]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 3] {
        [&mut self.elem, &mut self.agg, &mut self.bias]
    }
}

/// Activations kept between a forward and a backward pass.
pub(crate) struct Cache(Forward);

struct Forward {
    batch: usize,
    n_rb: usize,
    /// `acts[0]` is the standardized input, `acts[l + 1]` the output of layer `l`.
    acts: Vec<Vec<f64>>,
    pooled: Vec<f64>,
    levels: Vec<f64>,
}

/// `tanh` through one `exp`; about twice as fast as `f64::tanh` and
/// accurate to a few ulps of 1 in absolute terms.
#[inline]
fn tanh(x: f64) -> f64 {
    1.0 - 2.0 / ((2.0 * x).exp() + 1.0)
}

fn common_rb_count(slots: &[SlotChannel]) -> Result<usize> {
    let n = slots
        .first()
        .map(|s| s.n_rb())
        .ok_or_else(|| Error::invalid("empty slot batch"))?;
    if n == 0 || slots.iter().any(|s| s.n_rb() != n) {
        return Err(Error::invalid(
            "all slots in a batch need the same nonzero RB count",
        ));
    }
    Ok(n)
}

fn slot_sums(m: &[f64], batch: usize, n_rb: usize, width: usize) -> Vec<f64> {
    let mut out = vec![0.0; batch * width];
    for (acc, block) in out
        .chunks_exact_mut(width)
        .zip(m.chunks_exact(n_rb * width))
    {
        for row in block.chunks_exact(width) {
            acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
        }
    }
    out
}

fn slot_means(m: &[f64], batch: usize, n_rb: usize, width: usize) -> Vec<f64> {
    let mut out = slot_sums(m, batch, n_rb, width);
    let inv = 1.0 / n_rb as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    out
}

/// `C ← op(A)·op(B) + beta·C` on row-major buffers, with `op(A)` of
/// shape `m × k` and `op(B)` of shape `k × n`.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    a_t: bool,
    b: &[f64],
    b_t: bool,
    c: &mut [f64],
    beta: f64,
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    let (rsa, csa) = if a_t {
        (1, m as isize)
    } else {
        (k as isize, 1)
    };
    let (rsb, csb) = if b_t {
        (1, k as isize)
    } else {
        (n as isize, 1)
    };
    // SAFETY: the asserts above cover every index the strides can reach.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_params(dims: &[usize], seed: u64) -> PolicyParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = PolicyParams::init(dims, 11.0, 1.3, 2e-3, &mut rng).unwrap();
        // Give the output layer weights too, so every path is exercised.
        for l in &mut p.layers {
            for t in [&mut l.elem, &mut l.agg, &mut l.bias] {
                t.iter_mut().for_each(|w| *w += rng.random_range(-0.5..0.5));
            }
        }
        p.layers.last_mut().unwrap().bias.fill(1.5);
        p
    }

    fn random_slot(n: usize, rng: &mut impl Rng) -> SlotChannel {
        SlotChannel::new(
            (0..n)
                .map(|_| (rng.random_range(8.0..14.0f64)).exp())
                .collect(),
            false,
        )
        .unwrap()
    }

    /// Independent evaluation with plain loops over (row, in, out).
    fn straight_line_level(p: &PolicyParams, gamma: &[f64]) -> f64 {
        let n = gamma.len();
        let mut h: Vec<Vec<f64>> = gamma
            .iter()
            .map(|g| vec![(g.ln() - p.feature_mean) / p.feature_std])
            .collect();
        for layer in &p.layers {
            let mean: Vec<f64> = (0..layer.d_in)
                .map(|c| h.iter().map(|r| r[c]).sum::<f64>() / n as f64)
                .collect();
            h = h
                .iter()
                .map(|row| {
                    (0..layer.d_out)
                        .map(|o| {
                            let mut z = layer.bias[o];
                            for c in 0..layer.d_in {
                                z += row[c] * layer.elem[c * layer.d_out + o]
                                    + mean[c] * layer.agg[c * layer.d_out + o];
                            }
                            match layer.activation {
                                Activation::Tanh => z.tanh(),
                                Activation::Identity => z,
                            }
                        })
                        .collect()
                })
                .collect();
        }
        let pooled = h.iter().map(|r| r[0]).sum::<f64>() / n as f64;
        p.level_scale * pooled.max(0.0)
    }

    #[test]
    fn init_starts_at_level_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = PolicyParams::init(&[1, 4, 8, 4, 1], 10.0, 1.0, 0.25, &mut rng).unwrap();
        assert_eq!(p.dims(), vec![1, 4, 8, 4, 1]);
        let slot = random_slot(7, &mut rng);
        assert_eq!(p.pe_forward(&slot).0, 0.25);
        assert!(PolicyParams::init(&[2, 4, 1], 0.0, 1.0, 1.0, &mut rng).is_err());
        assert!(PolicyParams::init(&[1, 4, 2], 0.0, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn default_dims_and_weight_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = PolicyParams::init(&DEFAULT_DIMS, 0.0, 1.0, 1.0, &mut rng).unwrap();
        let expected: usize = DEFAULT_DIMS
            .windows(2)
            .map(|w| 2 * w[0] * w[1] + w[1])
            .sum();
        assert_eq!(p.n_weights(), expected);
        p.validate().unwrap();
    }

    #[test]
    fn matches_straight_line_evaluation() {
        let p = random_params(&[1, 5, 7, 3, 1], 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let slots: Vec<SlotChannel> = (0..20).map(|_| random_slot(9, &mut rng)).collect();
        let levels = p.levels(&slots).unwrap();
        for (s, w) in slots.iter().zip(levels) {
            let oracle = straight_line_level(&p, &s.gamma);
            assert!(
                (w - oracle).abs() <= 1e-12 * oracle.abs().max(1e-3),
                "{w} vs {oracle}"
            );
        }
    }

    #[test]
    fn equal_gains_give_equal_power() {
        let p = random_params(&[1, 6, 6, 1], 7);
        let slot = SlotChannel::new(vec![3e4; 12], true).unwrap();
        let (_, power) = p.pe_forward(&slot);
        assert!(power.as_slice().iter().all(|x| *x == power.as_slice()[0]));
    }

    #[test]
    fn backward_matches_finite_differences() {
        let p = random_params(&[1, 4, 5, 1], 8);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let slots: Vec<SlotChannel> = (0..6).map(|_| random_slot(5, &mut rng)).collect();
        let weights: Vec<f64> = (0..slots.len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let objective = |q: &PolicyParams| -> f64 {
            q.levels(&slots)
                .unwrap()
                .iter()
                .zip(&weights)
                .map(|(w, c)| w * c)
                .sum()
        };
        let grads = p.backward(&slots, &weights).unwrap();
        let mut checked = 0;
        for (l, g) in grads.iter().enumerate() {
            for (t, gt) in g.tensors().iter().enumerate() {
                for i in 0..gt.len() {
                    let h = 1e-6;
                    let mut up = p.clone();
                    let mut dn = p.clone();
                    up.layers[l].tensors_mut()[t][i] += h;
                    dn.layers[l].tensors_mut()[t][i] -= h;
                    let fd = (objective(&up) - objective(&dn)) / (2.0 * h);
                    assert!(
                        (fd - gt[i]).abs() <= 1e-7 * (1.0 + fd.abs()),
                        "layer {l} tensor {t} idx {i}: {fd} vs {}",
                        gt[i]
                    );
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, p.n_weights());
    }

    #[test]
    fn chunked_backward_matches_single_pass() {
        let p = random_params(&[1, 3, 1], 10);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let slots: Vec<SlotChannel> = (0..5).map(|_| random_slot(4, &mut rng)).collect();
        let d = vec![1.0; 5];
        let whole = p.backward(&slots, &d).unwrap();
        let mut parts: Vec<LayerGrad> = p.layers.iter().map(LayerGrad::zeros_like).collect();
        for s in slots.chunks(2).zip(d.chunks(2)) {
            let fwd = p.forward(s.0, 4);
            p.backward_chunk(&fwd, s.1, &mut parts);
        }
        for (a, b) in whole.iter().zip(&parts) {
            for (x, y) in a.elem.iter().zip(&b.elem) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
