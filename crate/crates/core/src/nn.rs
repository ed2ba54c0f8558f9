//! A small fully connected network over a flat parameter vector.
//!
//! Hidden layers use `tanh`, the output layer is linear. Parameters are laid
//! out layer by layer, each layer as a row-major `n_out × n_in` weight block
//! followed by its `n_out` biases.

use crate::error::{Result, RrpError};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Parameter count of a network with the given layer sizes.
pub fn param_count(layer_sizes: &[usize]) -> usize {
    layer_sizes.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
}

impl DenseNet {
    /// Uniform initialisation in `±1/√n_in` per layer.
    pub fn new(layer_sizes: &[usize], rng: &mut SeededRng) -> Result<Self> {
        Self::check_sizes(layer_sizes)?;
        let mut params = Vec::with_capacity(param_count(layer_sizes));
        for w in layer_sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..(w[0] + 1) * w[1] {
                params.push(rng.uniform_range(-bound, bound));
            }
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            params,
        })
    }

    pub fn from_params(layer_sizes: &[usize], params: Vec<f64>) -> Result<Self> {
        Self::check_sizes(layer_sizes)?;
        let expected = param_count(layer_sizes);
        if params.len() != expected {
            return Err(RrpError::invalid(format!(
                "expected {expected} parameters for layers {layer_sizes:?}, got {}",
                params.len()
            )));
        }
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            params,
        })
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        Self::from_params(layer_sizes, vec![0.0; param_count(layer_sizes)])
    }

    fn check_sizes(layer_sizes: &[usize]) -> Result<()> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(RrpError::invalid(format!(
                "layer sizes must list at least two positive widths, got {layer_sizes:?}"
            )));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn num_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(RrpError::invalid(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    /// Activations of every layer, input first, output last.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        acts.push(x.to_vec());
        let mut offset = 0;
        for l in 0..self.num_layers() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let biases = &self.params[offset + n_in * n_out..offset + (n_in + 1) * n_out];
            let input = &acts[l];
            let hidden = l + 1 < self.num_layers();
            let out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &weights[o * n_in..(o + 1) * n_in];
                    let z = biases[o] + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
                    if hidden {
                        z.tanh()
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
            offset += (n_in + 1) * n_out;
        }
        acts
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.activations(x).pop().unwrap())
    }

    /// Vector-Jacobian product: accumulates `Jᵀ·out_grad` into `acc`.
    fn backprop_into(&self, acts: &[Vec<f64>], out_grad: &[f64], acc: &mut [f64]) {
        let mut delta = out_grad.to_vec();
        let mut offset = self.params.len();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            offset -= (n_in + 1) * n_out;
            let input = &acts[l];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut acc[offset + o * n_in..offset + (o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
                acc[offset + n_in * n_out + o] += d;
            }
            if l > 0 {
                let weights = &self.params[offset..offset + n_in * n_out];
                let mut prev = vec![0.0; n_in];
                for o in 0..n_out {
                    let d = delta[o];
                    for (p, w) in prev.iter_mut().zip(&weights[o * n_in..(o + 1) * n_in]) {
                        *p += d * w;
                    }
                }
                // tanh' = 1 − tanh²
                for (p, a) in prev.iter_mut().zip(input) {
                    *p *= 1.0 - a * a;
                }
                delta = prev;
            }
        }
    }

    /// `Jᵀ(x)·out_grad`, the gradient of `out_grad · f_θ(x)` with respect to θ.
    pub fn vjp(&self, x: &[f64], out_grad: &[f64]) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.num_params()];
        self.vjp_accumulate(x, out_grad, &mut acc)?;
        Ok(acc)
    }

    pub fn vjp_accumulate(&self, x: &[f64], out_grad: &[f64], acc: &mut [f64]) -> Result<()> {
        self.check_input(x)?;
        if out_grad.len() != self.output_dim() || acc.len() != self.num_params() {
            return Err(RrpError::invalid("vjp buffer dimensions do not match the network"));
        }
        let acts = self.activations(x);
        self.backprop_into(&acts, out_grad, acc);
        Ok(())
    }

    /// `J[k][j] = ∂f(x)[k]/∂θ[j]`, one reverse pass per output.
    pub fn jacobian(&self, x: &[f64]) -> Result<Jacobian> {
        self.check_input(x)?;
        let acts = self.activations(x);
        let (m, p) = (self.output_dim(), self.num_params());
        let mut data = vec![0.0; m * p];
        let mut seed = vec![0.0; m];
        for k in 0..m {
            seed[k] = 1.0;
            self.backprop_into(&acts, &seed, &mut data[k * p..(k + 1) * p]);
            seed[k] = 0.0;
        }
        Ok(Jacobian { rows: m, cols: p, data })
    }

    /// Mean half squared error `(1/B) Σ ½‖f(x_i) − y_i‖²`.
    pub fn mse_loss(&self, batch: &LabeledBatch) -> Result<f64> {
        let mut total = 0.0;
        for (x, y) in batch.iter() {
            let out = self.forward(x)?;
            self.check_label(y)?;
            total += 0.5 * out.iter().zip(y).map(|(f, t)| (f - t).powi(2)).sum::<f64>();
        }
        Ok(total / batch.len() as f64)
    }

    /// Exact gradient of [`DenseNet::mse_loss`].
    pub fn grad(&self, batch: &LabeledBatch) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.num_params()];
        let scale = 1.0 / batch.len() as f64;
        for (x, y) in batch.iter() {
            self.check_input(x)?;
            self.check_label(y)?;
            let acts = self.activations(x);
            let residual: Vec<f64> = acts
                .last()
                .unwrap()
                .iter()
                .zip(y)
                .map(|(f, t)| scale * (f - t))
                .collect();
            self.backprop_into(&acts, &residual, &mut acc);
        }
        Ok(acc)
    }

    fn check_label(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.output_dim() {
            return Err(RrpError::invalid(format!(
                "label has dimension {}, network outputs {}",
                y.len(),
                self.output_dim()
            )));
        }
        Ok(())
    }

    /// Returns `θ − α·gradient` as a new network.
    pub fn sgd_step(&self, gradient: &[f64], alpha: f64) -> Result<DenseNet> {
        let mut next = self.clone();
        next.apply_gradient(gradient, alpha)?;
        Ok(next)
    }

    /// In-place `θ ← θ − α·gradient`.
    pub fn apply_gradient(&mut self, gradient: &[f64], alpha: f64) -> Result<()> {
        if !(alpha > 0.0) {
            return Err(RrpError::invalid(format!(
                "learning rate must be positive, got {alpha}"
            )));
        }
        if gradient.len() != self.num_params() {
            return Err(RrpError::invalid(format!(
                "gradient has {} entries, network has {} parameters",
                gradient.len(),
                self.num_params()
            )));
        }
        for (p, g) in self.params.iter_mut().zip(gradient) {
            *p -= alpha * g;
        }
        Ok(())
    }

    /// Polyak averaging `θ ← τ·source + (1 − τ)·θ`.
    pub fn soft_update_from(&mut self, source: &DenseNet, tau: f64) {
        debug_assert_eq!(self.layer_sizes, source.layer_sizes);
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }
}

/// Inputs paired with regression labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    inputs: Vec<Vec<f64>>,
    labels: Vec<Vec<f64>>,
}

impl LabeledBatch {
    pub fn new(inputs: Vec<Vec<f64>>, labels: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(RrpError::invalid("batch must be non-empty"));
        }
        if inputs.len() != labels.len() {
            return Err(RrpError::invalid(format!(
                "batch has {} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        Ok(Self { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn labels(&self) -> &[Vec<f64>] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.inputs
            .iter()
            .zip(&self.labels)
            .map(|(x, y)| (x.as_slice(), y.as_slice()))
    }

    /// The sub-batch at the given positions.
    pub fn select(&self, indices: &[usize]) -> Result<LabeledBatch> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(RrpError::invalid(format!("batch index {bad} out of range")));
        }
        LabeledBatch::new(
            indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }
}

/// Row-major `m × p` matrix of output-parameter derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Jacobian {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.cols + j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.cols..(k + 1) * self.cols]
    }

    /// `self · otherᵀ`, an `m × m` matrix stored row-major.
    pub fn times_transpose(&self, other: &Jacobian) -> Vec<f64> {
        debug_assert_eq!(self.cols, other.cols);
        let mut out = vec![0.0; self.rows * other.rows];
        for a in 0..self.rows {
            for b in 0..other.rows {
                out[a * other.rows + b] = self.row(a).iter().zip(other.row(b)).map(|(x, y)| x * y).sum();
            }
        }
        out
    }

    /// `J·v` for a parameter-space vector `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|k| self.row(k).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Straightforward matrix-chain evaluation, independent of `activations`.
    fn reference_forward(sizes: &[usize], params: &[f64], x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        let mut off = 0;
        for l in 0..sizes.len() - 1 {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let mut z = vec![0.0; n_out];
            for o in 0..n_out {
                z[o] = params[off + n_in * n_out + o];
                for i in 0..n_in {
                    z[o] += params[off + o * n_in + i] * a[i];
                }
            }
            off += (n_in + 1) * n_out;
            a = if l + 2 < sizes.len() {
                z.iter().map(|v| v.tanh()).collect()
            } else {
                z
            };
        }
        a
    }

    fn random_input(rng: &mut SeededRng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.uniform_range(-1.0, 1.0)).collect()
    }

    #[test]
    fn param_count_formula() {
        assert_eq!(param_count(&[2, 8, 2]), 3 * 8 + 9 * 2);
        let mut rng = SeededRng::new(0);
        assert_eq!(
            DenseNet::new(&[3, 5, 4, 1], &mut rng).unwrap().num_params(),
            4 * 5 + 6 * 4 + 5
        );
    }

    #[test]
    fn identity_linear_layer() {
        let net = DenseNet::from_params(&[2, 2], vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(net.forward(&[0.3, -2.0]).unwrap(), vec![0.3, -2.0]);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = DenseNet::zeros(&[3, 4, 2]).unwrap();
        assert_eq!(net.forward(&[1.0, -5.0, 2.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn forward_matches_reference() {
        let mut rng = SeededRng::new(9);
        let sizes = [3, 7, 5, 2];
        let net = DenseNet::new(&sizes, &mut rng).unwrap();
        for _ in 0..20 {
            let x = random_input(&mut rng, 3);
            let got = net.forward(&x).unwrap();
            let want = reference_forward(&sizes, net.params(), &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let net = DenseNet::zeros(&[3, 2]).unwrap();
        assert!(matches!(net.forward(&[1.0]), Err(RrpError::InvalidArgument(_))));
    }

    #[test]
    fn mse_examples() {
        let net = DenseNet::zeros(&[1, 1]).unwrap();
        let b = LabeledBatch::new(vec![vec![0.5]], vec![vec![2.0]]).unwrap();
        assert_eq!(net.mse_loss(&b).unwrap(), 2.0);
        let fit = LabeledBatch::new(vec![vec![0.5]], vec![vec![0.0]]).unwrap();
        assert_eq!(net.mse_loss(&fit).unwrap(), 0.0);
        assert!(net.grad(&fit).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn mse_matches_explicit_sum() {
        let mut rng = SeededRng::new(4);
        let net = DenseNet::new(&[2, 6, 3], &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..5).map(|_| random_input(&mut rng, 2)).collect();
        let ys: Vec<Vec<f64>> = (0..5).map(|_| random_input(&mut rng, 3)).collect();
        let batch = LabeledBatch::new(xs.clone(), ys.clone()).unwrap();
        let mut want = 0.0;
        for (x, y) in xs.iter().zip(&ys) {
            let f = reference_forward(&[2, 6, 3], net.params(), x);
            for k in 0..3 {
                want += 0.5 * (f[k] - y[k]) * (f[k] - y[k]);
            }
        }
        want /= 5.0;
        assert!((net.mse_loss(&batch).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn scalar_linear_gradient() {
        // f(x) = w·x with bias fixed at 0: d(½w²)/dw = w
        let net = DenseNet::from_params(&[1, 1], vec![3.0, 0.0]).unwrap();
        let b = LabeledBatch::new(vec![vec![1.0]], vec![vec![0.0]]).unwrap();
        assert_eq!(net.grad(&b).unwrap()[0], 3.0);
    }

    #[test]
    fn sgd_step_arithmetic_and_purity() {
        let net = DenseNet::from_params(&[1, 1], vec![1.0, 1.0]).unwrap();
        let next = net.sgd_step(&[2.0, -2.0], 0.5).unwrap();
        assert_eq!(next.params(), &[0.0, 2.0]);
        assert_eq!(net.params(), &[1.0, 1.0]);
        assert_eq!(net.sgd_step(&[0.0, 0.0], 0.1).unwrap(), net);
        assert!(net.sgd_step(&[0.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn descent_on_random_batch() {
        let mut rng = SeededRng::new(21);
        let net = DenseNet::new(&[2, 8, 2], &mut rng).unwrap();
        let xs: Vec<Vec<f64>> = (0..8).map(|_| random_input(&mut rng, 2)).collect();
        let ys: Vec<Vec<f64>> = (0..8).map(|_| random_input(&mut rng, 2)).collect();
        let b = LabeledBatch::new(xs, ys).unwrap();
        let g = net.grad(&b).unwrap();
        let next = net.sgd_step(&g, 1e-2).unwrap();
        assert!(next.mse_loss(&b).unwrap() < net.mse_loss(&b).unwrap());
    }

    #[test]
    fn linear_jacobian_is_kronecker() {
        // f(x) = Wx + b with W 2×3
        let mut rng = SeededRng::new(1);
        let net = DenseNet::new(&[3, 2], &mut rng).unwrap();
        let x = [0.5, -1.5, 2.0];
        let j = net.jacobian(&x).unwrap();
        for k in 0..2 {
            for o in 0..2 {
                for (i, &xi) in x.iter().enumerate() {
                    let want = if k == o { xi } else { 0.0 };
                    assert_eq!(j.get(k, o * 3 + i), want);
                }
                assert_eq!(j.get(k, 6 + o), if k == o { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn scalar_grad_equals_jacobian_row() {
        let mut rng = SeededRng::new(12);
        let net = DenseNet::new(&[3, 5, 1], &mut rng).unwrap();
        let x = random_input(&mut rng, 3);
        let f = net.forward(&x).unwrap()[0];
        let batch = LabeledBatch::new(vec![x.clone()], vec![vec![f - 1.0]]).unwrap();
        let g = net.grad(&batch).unwrap();
        let j = net.jacobian(&x).unwrap();
        assert_eq!(g.as_slice(), j.row(0));
    }

    #[test]
    fn linearization_error_is_superlinear() {
        let mut rng = SeededRng::new(33);
        let net = DenseNet::new(&[2, 8, 2], &mut rng).unwrap();
        let x = random_input(&mut rng, 2);
        let dir: Vec<f64> = (0..net.num_params()).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let j = net.jacobian(&x).unwrap();
        let f0 = net.forward(&x).unwrap();
        let mut ratios = Vec::new();
        for scale in [1e-2, 1e-3, 1e-4] {
            let step: Vec<f64> = dir.iter().map(|d| -d * scale).collect();
            let moved = net.sgd_step(&step, 1.0).unwrap();
            let f1 = moved.forward(&x).unwrap();
            let lin = j.apply(&dir.iter().map(|d| d * scale).collect::<Vec<_>>());
            let err: f64 = (0..2).map(|k| (f1[k] - f0[k] - lin[k]).powi(2)).sum::<f64>().sqrt();
            ratios.push(err / scale);
        }
        // err/‖Δθ‖ shrinks roughly tenfold per decade
        assert!(ratios[1] < 0.2 * ratios[0]);
        assert!(ratios[2] < 0.2 * ratios[1]);
    }

    proptest! {
        #[test]
        fn forward_is_deterministic(seed in any::<u64>()) {
            let mut rng = SeededRng::new(seed);
            let net = DenseNet::new(&[2, 4, 3], &mut rng).unwrap();
            let x = random_input(&mut rng, 2);
            prop_assert_eq!(net.forward(&x).unwrap(), net.clone().forward(&x).unwrap());
        }
    }
}
