use super::params::{DenseParams, LstmParams, ModelParams};
use crate::error::{Error, Result};
use crate::preprocess::WindowedDataset;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `out[k] += Σ_j x[j] · w[j, k]` for a row-major `x.len() × out.len()` kernel.
fn accumulate_matvec(x: &[f64], w: &[f64], out: &mut [f64]) {
    let n = out.len();
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let row = &w[j * n..(j + 1) * n];
        for (o, &wk) in out.iter_mut().zip(row) {
            *o += xj * wk;
        }
    }
}

/// Activations of one LSTM timestep, kept for backprop.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Post-activation gates `[i | f | g | o]`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct LstmCache {
    pub steps: Vec<StepCache>,
}

/// Runs the cell over `xs` (row-major `timesteps × input_dim`) from `(h0, c0)`
/// and returns the final hidden state.
pub fn lstm_forward(
    p: &LstmParams,
    xs: &[f64],
    h0: &[f64],
    c0: &[f64],
) -> Result<(Vec<f64>, LstmCache)> {
    let h = p.hidden;
    if h0.len() != h || c0.len() != h {
        return Err(Error::ShapeMismatch {
            expected: format!("initial state of length {h}"),
            got: format!("h0 {}, c0 {}", h0.len(), c0.len()),
        });
    }
    if xs.is_empty() || !xs.len().is_multiple_of(p.input_dim) {
        return Err(Error::ShapeMismatch {
            expected: format!("timesteps × {}", p.input_dim),
            got: format!("{} values", xs.len()),
        });
    }
    let mut h_t = h0.to_vec();
    let mut c_t = c0.to_vec();
    let mut cache = LstmCache {
        steps: Vec::with_capacity(xs.len() / p.input_dim),
    };
    for x in xs.chunks_exact(p.input_dim) {
        let mut z = p.bias.data.clone();
        accumulate_matvec(x, &p.kernel.data, &mut z);
        accumulate_matvec(&h_t, &p.recurrent.data, &mut z);
        for k in 0..h {
            z[k] = sigmoid(z[k]);
            z[h + k] = sigmoid(z[h + k]);
            z[2 * h + k] = z[2 * h + k].tanh();
            z[3 * h + k] = sigmoid(z[3 * h + k]);
        }
        let mut c_new = vec![0.0; h];
        let mut tanh_c = vec![0.0; h];
        let mut h_new = vec![0.0; h];
        for k in 0..h {
            c_new[k] = z[h + k] * c_t[k] + z[k] * z[2 * h + k];
            tanh_c[k] = c_new[k].tanh();
            h_new[k] = z[3 * h + k] * tanh_c[k];
        }
        cache.steps.push(StepCache {
            x: x.to_vec(),
            h_prev: std::mem::replace(&mut h_t, h_new),
            c_prev: std::mem::replace(&mut c_t, c_new.clone()),
            gates: z,
            c: c_new,
            tanh_c,
        });
    }
    Ok((h_t, cache))
}

/// Backpropagation through time. Accumulates parameter gradients into `grads`
/// and returns `(dL/dh0, dL/dc0)`.
pub fn lstm_backward(
    p: &LstmParams,
    cache: &LstmCache,
    dh_final: &[f64],
    grads: &mut LstmParams,
) -> (Vec<f64>, Vec<f64>) {
    let h = p.hidden;
    let n4 = 4 * h;
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; n4];
    for step in cache.steps.iter().rev() {
        let g = &step.gates;
        for k in 0..h {
            let (i, f, gg, o) = (g[k], g[h + k], g[2 * h + k], g[3 * h + k]);
            let d_o = dh[k] * step.tanh_c[k];
            dc[k] += dh[k] * o * (1.0 - step.tanh_c[k] * step.tanh_c[k]);
            let d_i = dc[k] * gg;
            let d_g = dc[k] * i;
            let d_f = dc[k] * step.c_prev[k];
            dz[k] = d_i * i * (1.0 - i);
            dz[h + k] = d_f * f * (1.0 - f);
            dz[2 * h + k] = d_g * (1.0 - gg * gg);
            dz[3 * h + k] = d_o * o * (1.0 - o);
            dc[k] *= f;
        }
        for (j, &xj) in step.x.iter().enumerate() {
            let row = &mut grads.kernel.data[j * n4..(j + 1) * n4];
            row.iter_mut().zip(&dz).for_each(|(w, d)| *w += xj * d);
        }
        for (m, &hm) in step.h_prev.iter().enumerate() {
            let row = &mut grads.recurrent.data[m * n4..(m + 1) * n4];
            row.iter_mut().zip(&dz).for_each(|(w, d)| *w += hm * d);
        }
        grads
            .bias
            .data
            .iter_mut()
            .zip(&dz)
            .for_each(|(b, d)| *b += d);
        for (m, dhm) in dh.iter_mut().enumerate() {
            let row = &p.recurrent.data[m * n4..(m + 1) * n4];
            *dhm = row.iter().zip(&dz).map(|(u, d)| u * d).sum();
        }
    }
    (dh, dc)
}

fn dense_forward(d: &DenseParams, x: &[f64]) -> Vec<f64> {
    let mut out = d.bias.data.clone();
    accumulate_matvec(x, &d.kernel.data, &mut out);
    out
}

/// Per-sample activations from [`forward_cached`].
#[derive(Debug, Clone)]
pub struct SampleCache {
    lstm: LstmCache,
    /// Input to each dense layer (the first is the final LSTM hidden state).
    dense_inputs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ForwardCache {
    samples: Vec<SampleCache>,
    pub predictions: Vec<f64>,
}

fn check_batch(params: &ModelParams, x_batch: &[f64]) -> Result<usize> {
    let lb = params.look_back;
    if lb == 0 || !x_batch.len().is_multiple_of(lb) {
        return Err(Error::ShapeMismatch {
            expected: format!("batch × {lb}"),
            got: format!("{} values", x_batch.len()),
        });
    }
    Ok(x_batch.len() / lb)
}

fn forward_one(params: &ModelParams, window: &[f64]) -> Result<(f64, SampleCache)> {
    let h = params.lstm.hidden;
    let zeros = vec![0.0; h];
    let (h_final, lstm) = lstm_forward(&params.lstm, window, &zeros, &zeros)?;
    let mut dense_inputs = Vec::with_capacity(params.dense.len());
    let mut a = h_final;
    for d in &params.dense {
        let next = dense_forward(d, &a);
        dense_inputs.push(a);
        a = next;
    }
    Ok((a[0], SampleCache { lstm, dense_inputs }))
}

/// Forward pass over a row-major `batch × look_back` block, keeping activations.
pub fn forward_cached(params: &ModelParams, x_batch: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
    check_batch(params, x_batch)?;
    let mut samples = Vec::new();
    let mut predictions = Vec::new();
    for window in x_batch.chunks_exact(params.look_back) {
        let (y, c) = forward_one(params, window)?;
        predictions.push(y);
        samples.push(c);
    }
    Ok((
        predictions.clone(),
        ForwardCache {
            samples,
            predictions,
        },
    ))
}

/// Predictions for a row-major `batch × look_back` block. Zero initial state per window.
pub fn model_forward(params: &ModelParams, x_batch: &[f64]) -> Result<Vec<f64>> {
    check_batch(params, x_batch)?;
    x_batch
        .chunks_exact(params.look_back)
        .map(|w| forward_one(params, w).map(|(y, _)| y))
        .collect()
}

pub fn predict(params: &ModelParams, ds: &WindowedDataset) -> Result<Vec<f64>> {
    if ds.look_back != params.look_back {
        return Err(Error::ShapeMismatch {
            expected: format!("look_back {}", params.look_back),
            got: format!("look_back {}", ds.look_back),
        });
    }
    model_forward(params, ds.x())
}

/// Gradient of `mean((pred − target)²)` with respect to every parameter.
pub fn backward(
    params: &ModelParams,
    cache: &ForwardCache,
    targets: &[f64],
) -> Result<ModelParams> {
    let n = cache.predictions.len();
    if targets.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: targets.len(),
        });
    }
    let mut grads = params.zeros_like();
    for ((sample, &pred), &y) in cache.samples.iter().zip(&cache.predictions).zip(targets) {
        let mut delta = vec![2.0 * (pred - y) / n as f64];
        for (li, d) in params.dense.iter().enumerate().rev() {
            let input = &sample.dense_inputs[li];
            let g = &mut grads.dense[li];
            for (j, &a) in input.iter().enumerate() {
                let row = &mut g.kernel.data[j * d.units..(j + 1) * d.units];
                row.iter_mut().zip(&delta).for_each(|(w, dl)| *w += a * dl);
            }
            g.bias
                .data
                .iter_mut()
                .zip(&delta)
                .for_each(|(b, dl)| *b += dl);
            delta = (0..d.input_dim)
                .map(|j| {
                    let row = &d.kernel.data[j * d.units..(j + 1) * d.units];
                    row.iter().zip(&delta).map(|(w, dl)| w * dl).sum()
                })
                .collect();
        }
        lstm_backward(&params.lstm, &sample.lstm, &delta, &mut grads.lstm);
    }
    Ok(grads)
}

fn check_lengths(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.len() != target.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: target.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target)?;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / pred.len() as f64)
}

pub fn mae(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target)?;
    Ok(pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t).abs())
        .sum::<f64>()
        / pred.len() as f64)
}
