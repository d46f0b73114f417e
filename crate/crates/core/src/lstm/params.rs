use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::{InputLayout, TrainConfig};
use crate::error::{Error, Result};

/// Dense row-major array with an explicit shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn check(&self, name: &str) -> Result<()> {
        if self.shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{name}: {:?}", self.shape),
                got: format!("{} values", self.data.len()),
            });
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {name}")));
        }
        Ok(())
    }
}

/// LSTM layer weights. Gate blocks are laid out `[i | f | g | o]` along the
/// last dimension of each array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub input_dim: usize,
    pub hidden: usize,
    /// input_dim × 4H
    pub kernel: Tensor,
    /// H × 4H
    pub recurrent: Tensor,
    /// 4H
    pub bias: Tensor,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmParams {
            input_dim,
            hidden,
            kernel: Tensor::zeros(&[input_dim, 4 * hidden]),
            recurrent: Tensor::zeros(&[hidden, 4 * hidden]),
            bias: Tensor::zeros(&[4 * hidden]),
        }
    }
}

/// Linear (no activation) fully connected layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub input_dim: usize,
    pub units: usize,
    /// input_dim × units
    pub kernel: Tensor,
    pub bias: Tensor,
}

impl DenseParams {
    pub fn zeros(input_dim: usize, units: usize) -> Self {
        DenseParams {
            input_dim,
            units,
            kernel: Tensor::zeros(&[input_dim, units]),
            bias: Tensor::zeros(&[units]),
        }
    }
}

/// Every learnable array of the LSTM + dense stack, plus how a look-back window
/// is fed to the LSTM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub look_back: usize,
    pub layout: InputLayout,
    pub lstm: LstmParams,
    pub dense: Vec<DenseParams>,
}

impl ModelParams {
    /// All-zero parameters with the architecture described by `config`.
    pub fn zeros(config: &TrainConfig) -> Result<Self> {
        config.validate()?;
        let (_, input_dim) = config.input_layout.sequence_shape(config.look_back);
        let lstm = LstmParams::zeros(input_dim, config.hidden_size);
        let mut dense = Vec::with_capacity(config.dense_units.len());
        let mut fan_in = config.hidden_size;
        for &units in &config.dense_units {
            dense.push(DenseParams::zeros(fan_in, units));
            fan_in = units;
        }
        Ok(ModelParams {
            look_back: config.look_back,
            layout: config.input_layout,
            lstm,
            dense,
        })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    /// Fixed order: LSTM kernel, recurrent, bias, then kernel/bias of each dense layer.
    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.lstm.kernel, &self.lstm.recurrent, &self.lstm.bias];
        for d in &self.dense {
            out.push(&d.kernel);
            out.push(&d.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![
            &mut self.lstm.kernel,
            &mut self.lstm.recurrent,
            &mut self.lstm.bias,
        ];
        for d in &mut self.dense {
            out.push(&mut d.kernel);
            out.push(&mut d.bias);
        }
        out
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut out = vec![
            "lstm.kernel".to_string(),
            "lstm.recurrent".into(),
            "lstm.bias".into(),
        ];
        for i in 0..self.dense.len() {
            out.push(format!("dense{i}.kernel"));
            out.push(format!("dense{i}.bias"));
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors()
            .iter()
            .flat_map(|t| t.data.iter().copied())
            .collect()
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} parameters", self.num_params()),
                got: format!("{}", flat.len()),
            });
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            let n = t.len();
            t.data.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn output_dim(&self) -> usize {
        self.dense
            .last()
            .map(|d| d.units)
            .unwrap_or(self.lstm.hidden)
    }

    /// Checks that shapes chain through the stack and every entry is finite.
    pub fn validate(&self) -> Result<()> {
        let (_, input_dim) = self.layout.sequence_shape(self.look_back);
        let h = self.lstm.hidden;
        let mismatch = |what: &str, expected: String, got: String| Error::ShapeMismatch {
            expected: format!("{what} {expected}"),
            got,
        };
        if self.lstm.input_dim != input_dim {
            return Err(mismatch(
                "lstm input_dim",
                input_dim.to_string(),
                self.lstm.input_dim.to_string(),
            ));
        }
        for (t, shape, name) in [
            (&self.lstm.kernel, vec![input_dim, 4 * h], "lstm.kernel"),
            (&self.lstm.recurrent, vec![h, 4 * h], "lstm.recurrent"),
            (&self.lstm.bias, vec![4 * h], "lstm.bias"),
        ] {
            if t.shape != shape {
                return Err(mismatch(
                    name,
                    format!("{shape:?}"),
                    format!("{:?}", t.shape),
                ));
            }
            t.check(name)?;
        }
        let mut fan_in = h;
        for (i, d) in self.dense.iter().enumerate() {
            if d.input_dim != fan_in
                || d.kernel.shape != [fan_in, d.units]
                || d.bias.shape != [d.units]
            {
                return Err(mismatch(
                    &format!("dense{i}"),
                    format!("[{fan_in}, {}]", d.units),
                    format!("{:?}", d.kernel.shape),
                ));
            }
            d.kernel.check(&format!("dense{i}.kernel"))?;
            d.bias.check(&format!("dense{i}.bias"))?;
            fan_in = d.units;
        }
        if self.output_dim() != 1 {
            return Err(mismatch(
                "output",
                "1".into(),
                self.output_dim().to_string(),
            ));
        }
        Ok(())
    }
}

/// Half-width of the Glorot uniform interval.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn glorot_uniform<R: Rng>(rng: &mut R, t: &mut Tensor) {
    let (fan_in, fan_out) = (t.shape[0], t.shape[1]);
    let limit = glorot_limit(fan_in, fan_out);
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
    t.data.iter_mut().for_each(|v| *v = dist.sample(rng));
}

/// Fills a `rows × cols` tensor with a random matrix whose rows (if
/// rows ≤ cols) or columns (otherwise) are orthonormal. Uses modified
/// Gram–Schmidt on a Gaussian matrix, which equals QR with a positive
/// diagonal in R.
fn orthogonal<R: Rng>(rng: &mut R, t: &mut Tensor) {
    let (rows, cols) = (t.shape[0], t.shape[1]);
    let (long, short) = (rows.max(cols), rows.min(cols));
    // `short` vectors of length `long`
    let mut vecs: Vec<Vec<f64>> = (0..short)
        .map(|_| (0..long).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    for k in 0..short {
        for j in 0..k {
            let (done, rest) = vecs.split_at_mut(k);
            let dot: f64 = done[j].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
            rest[0]
                .iter_mut()
                .zip(&done[j])
                .for_each(|(v, q)| *v -= dot * q);
        }
        let norm = vecs[k].iter().map(|v| v * v).sum::<f64>().sqrt();
        vecs[k].iter_mut().for_each(|v| *v /= norm);
    }
    for (k, v) in t.data.iter_mut().enumerate() {
        let (r, c) = (k / cols, k % cols);
        *v = if rows <= cols { vecs[r][c] } else { vecs[c][r] };
    }
}

/// Glorot-uniform input and dense kernels, orthogonal recurrent kernel, zero
/// biases except a unit forget-gate bias. Fully determined by `seed`.
pub fn init_params(config: &TrainConfig, seed: u64) -> Result<ModelParams> {
    let mut p = ModelParams::zeros(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    glorot_uniform(&mut rng, &mut p.lstm.kernel);
    orthogonal(&mut rng, &mut p.lstm.recurrent);
    let h = p.lstm.hidden;
    p.lstm.bias.data[h..2 * h].iter_mut().for_each(|b| *b = 1.0);
    for d in &mut p.dense {
        glorot_uniform(&mut rng, &mut d.kernel);
    }
    Ok(p)
}
