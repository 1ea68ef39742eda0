//! Multi-layer perceptron `G(x - x_i, f_i)` with exact backpropagation.
//!
//! Hidden layers use `tanh`; the output layer is linear. Inputs are
//! standardized with a fixed per-input shift and scale, and outputs are
//! multiplied by a fixed `output_scale`. Those three are set once by the
//! trainer from data statistics and are not trained; with their identity
//! defaults the network is a plain MLP.
//!
//! All trainable values live in one flat vector. For each layer in order:
//! the weight matrix (`out x in`, row-major) followed by the bias.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LocalFeature;
use crate::{Error, Result, Vec3};

/// One regression example: query offset from the anchor, the anchor's
/// features, and the true displacement to the clean surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub relpos: Vec3,
    pub feature: LocalFeature,
    pub target: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceptronParams {
    sizes: Vec<usize>,
    values: Vec<f64>,
    input_shift: Vec<f64>,
    input_scale: Vec<f64>,
    output_scale: f64,
    feature_k: usize,
}

#[derive(Debug, Clone, Copy)]
struct LayerView {
    w: usize,
    b: usize,
    inputs: usize,
    outputs: usize,
}

impl PerceptronParams {
    /// All-zero network with the given layer sizes (input first, output 3).
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::invalid("a perceptron needs at least input and output sizes"));
        }
        if sizes[0] < 3 || *sizes.last().unwrap() != 3 || sizes.contains(&0) {
            return Err(Error::invalid(format!(
                "bad layer sizes {sizes:?}: input must be >= 3, output must be 3, no empty layer"
            )));
        }
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(PerceptronParams {
            sizes: sizes.to_vec(),
            values: vec![0.0; count],
            input_shift: vec![0.0; sizes[0]],
            input_scale: vec![1.0; sizes[0]],
            output_scale: 1.0,
            feature_k: 0,
        })
    }

    /// Glorot-uniform weights and zero biases from a seeded ChaCha8 stream.
    pub fn init(sizes: &[usize], seed: u64) -> Result<Self> {
        let mut params = Self::zeros(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in params.layers() {
            let limit = (6.0 / (layer.inputs + layer.outputs) as f64).sqrt();
            for v in &mut params.values[layer.w..layer.b] {
                *v = rng.random_range(-limit..limit);
            }
        }
        Ok(params)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn feature_dim(&self) -> usize {
        self.sizes[0] - 3
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn input_shift(&self) -> &[f64] {
        &self.input_shift
    }

    pub fn input_scale(&self) -> &[f64] {
        &self.input_scale
    }

    pub fn output_scale(&self) -> f64 {
        self.output_scale
    }

    pub fn set_normalization(&mut self, shift: Vec<f64>, scale: Vec<f64>, output_scale: f64) -> Result<()> {
        let d = self.input_dim();
        if shift.len() != d || scale.len() != d {
            return Err(Error::invalid(format!("normalization vectors must have length {d}")));
        }
        let bad = |v: f64| !(v.is_finite() && v > 0.0);
        if shift.iter().any(|v| !v.is_finite()) || scale.iter().copied().any(bad) || bad(output_scale) {
            return Err(Error::invalid("normalization must be finite with positive scales"));
        }
        self.input_shift = shift;
        self.input_scale = scale;
        self.output_scale = output_scale;
        Ok(())
    }

    /// Neighborhood size the features were extracted with during training;
    /// 0 when unknown.
    pub fn feature_k(&self) -> usize {
        self.feature_k
    }

    pub fn set_feature_k(&mut self, k: usize) {
        self.feature_k = k;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn layers(&self) -> Vec<LayerView> {
        let mut offset = 0;
        self.sizes
            .windows(2)
            .map(|w| {
                let view = LayerView {
                    w: offset,
                    b: offset + w[0] * w[1],
                    inputs: w[0],
                    outputs: w[1],
                };
                offset = view.b + w[1];
                view
            })
            .collect()
    }

    fn standardized_input(&self, relpos: &Vec3, feature: &[f64]) -> Result<Vec<f64>> {
        if feature.len() != self.feature_dim() {
            return Err(Error::invalid(format!(
                "feature has {} entries, network expects {}",
                feature.len(),
                self.feature_dim()
            )));
        }
        Ok(relpos
            .iter()
            .chain(feature)
            .zip(self.input_shift.iter().zip(&self.input_scale))
            .map(|(v, (s, k))| (v - s) / k)
            .collect())
    }

    /// Activations of every layer, input first, raw (unscaled) output last.
    fn forward_trace(&self, input: Vec<f64>) -> Vec<Vec<f64>> {
        let layers = self.layers();
        let mut acts = Vec::with_capacity(layers.len() + 1);
        acts.push(input);
        for (l, layer) in layers.iter().enumerate() {
            let prev = &acts[l];
            let last = l + 1 == layers.len();
            let out: Vec<f64> = (0..layer.outputs)
                .map(|o| {
                    let row = &self.values[layer.w + o * layer.inputs..layer.w + (o + 1) * layer.inputs];
                    let z = row.iter().zip(prev).map(|(w, a)| w * a).sum::<f64>() + self.values[layer.b + o];
                    if last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    /// Backpropagates `dy` (gradient w.r.t. the raw output) through a trace,
    /// accumulating parameter gradients into `grad` and returning the
    /// gradient w.r.t. the standardized input.
    fn backward(&self, acts: &[Vec<f64>], dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let layers = self.layers();
        let mut delta = dy.to_vec();
        for (l, layer) in layers.iter().enumerate().rev() {
            let prev = &acts[l];
            for o in 0..layer.outputs {
                let d = delta[o];
                grad[layer.b + o] += d;
                let row = layer.w + o * layer.inputs;
                for (g, a) in grad[row..row + layer.inputs].iter_mut().zip(prev) {
                    *g += d * a;
                }
            }
            let mut dprev = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                let row = &self.values[layer.w + o * layer.inputs..layer.w + (o + 1) * layer.inputs];
                for (dp, w) in dprev.iter_mut().zip(row) {
                    *dp += d * w;
                }
            }
            if l > 0 {
                // prev holds tanh activations
                for (dp, a) in dprev.iter_mut().zip(prev) {
                    *dp *= 1.0 - a * a;
                }
            }
            delta = dprev;
        }
        delta
    }
}

/// Network output for one anchor/query pair.
pub fn mlp_forward(params: &PerceptronParams, relpos: &Vec3, feature: &[f64]) -> Result<Vec3> {
    let input = params.standardized_input(relpos, feature)?;
    let acts = params.forward_trace(input);
    let y = acts.last().unwrap();
    Ok(Vec3::new(y[0], y[1], y[2]) * params.output_scale)
}

/// Gradient of `upstream · G(relpos, feature)` with respect to `relpos`.
pub fn input_gradient(params: &PerceptronParams, relpos: &Vec3, feature: &[f64], upstream: &Vec3) -> Result<Vec3> {
    let input = params.standardized_input(relpos, feature)?;
    let acts = params.forward_trace(input);
    let dy: Vec<f64> = upstream.iter().map(|u| u * params.output_scale).collect();
    let mut scratch = vec![0.0; params.values.len()];
    let du = params.backward(&acts, &dy, &mut scratch);
    Ok(Vec3::new(
        du[0] / params.input_scale[0],
        du[1] / params.input_scale[1],
        du[2] / params.input_scale[2],
    ))
}

/// Mean squared error over the batch and its exact gradient with respect
/// to every trainable value (same layout as [`PerceptronParams::values`]).
pub fn loss_and_grad(params: &PerceptronParams, batch: &[Sample]) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::invalid("empty training batch"));
    }
    let inv = 1.0 / batch.len() as f64;
    let mut grad = vec![0.0; params.values.len()];
    let mut loss = 0.0;
    for s in batch {
        let input = params.standardized_input(&s.relpos, s.feature.as_slice())?;
        let acts = params.forward_trace(input);
        let y = acts.last().unwrap();
        let resid: Vec<f64> = (0..3).map(|k| y[k] * params.output_scale - s.target[k]).collect();
        loss += resid.iter().map(|r| r * r).sum::<f64>() * inv;
        let dy: Vec<f64> = resid.iter().map(|r| 2.0 * r * params.output_scale * inv).collect();
        params.backward(&acts, &dy, &mut grad);
    }
    Ok((loss, grad))
}

const MAGIC: &[u8; 8] = b"PCDMLP\0\0";
const FORMAT_VERSION: u32 = 1;

impl PerceptronParams {
    /// Little-endian binary serialization:
    ///
    /// ```text
    /// magic "PCDMLP\0\0" | u32 version | u32 feature_k | u32 layer count | u32 sizes...
    /// f64 input_shift[in] | f64 input_scale[in] | f64 output_scale
    /// u64 value count | f64 values...
    /// ```
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.feature_k as u32).to_le_bytes());
        out.extend_from_slice(&(self.sizes.len() as u32).to_le_bytes());
        for &s in &self.sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        for v in self.input_shift.iter().chain(&self.input_scale) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.output_scale.to_le_bytes());
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Model("bad magic".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported version {version}")));
        }
        let feature_k = r.u32()? as usize;
        let n = r.u32()? as usize;
        if n > 64 {
            return Err(Error::Model(format!("implausible layer count {n}")));
        }
        let sizes = (0..n).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let mut params = PerceptronParams::zeros(&sizes).map_err(|e| Error::Model(e.to_string()))?;
        params.feature_k = feature_k;
        let d = params.input_dim();
        let shift = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let scale = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        let output_scale = r.f64()?;
        params
            .set_normalization(shift, scale, output_scale)
            .map_err(|e| Error::Model(e.to_string()))?;
        let count = r.u64()? as usize;
        if count != params.values.len() {
            return Err(Error::Model(format!(
                "value count {count} does not match sizes (expected {})",
                params.values.len()
            )));
        }
        for v in params.values.iter_mut() {
            *v = r.f64()?;
        }
        if r.pos != bytes.len() {
            return Err(Error::Model("trailing bytes".into()));
        }
        if !params.is_finite() {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes).map_err(|e| match e {
            Error::Model(m) => Error::Model(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Model("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
