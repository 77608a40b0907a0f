//! One-hidden-layer perceptron regressor trained on squared error with Adam.

use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output `a`.
    fn deriv(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

impl FromStr for Activation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "relu" | "rectifier" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            _ => Err(format!("unknown activation `{s}` (expected relu or tanh)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub hidden: usize,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// L2 penalty on the weights (not the biases).
    pub alpha: f64,
    /// Required epoch-loss improvement; `n_iter_no_change` epochs without it stop training.
    pub tol: f64,
    pub n_iter_no_change: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            hidden: 100,
            activation: Activation::Relu,
            learning_rate: 1e-3,
            epochs: 200,
            batch_size: 32,
            alpha: 1e-4,
            tol: 1e-4,
            n_iter_no_change: 10,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub inputs: usize,
    pub hidden: usize,
    pub activation: Activation,
    /// hidden × inputs, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
    /// (epoch, mean training loss) per completed epoch.
    pub log: Vec<(usize, f64)>,
}

impl Mlp {
    /// Glorot-uniform initialization.
    pub fn init(inputs: usize, hidden: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let b1_bound = (6.0 / (inputs + hidden) as f64).sqrt();
        let b2_bound = (6.0 / (hidden + 1) as f64).sqrt();
        Mlp {
            inputs,
            hidden,
            activation,
            w1: (0..inputs * hidden).map(|_| rng.gen_range(-b1_bound..b1_bound)).collect(),
            b1: (0..hidden).map(|_| rng.gen_range(-b1_bound..b1_bound)).collect(),
            w2: (0..hidden).map(|_| rng.gen_range(-b2_bound..b2_bound)).collect(),
            b2: rng.gen_range(-b2_bound..b2_bound),
            log: Vec::new(),
        }
    }

    fn hidden_out(&self, x: &[f64], h: &mut [f64]) {
        for (k, hk) in h.iter_mut().enumerate() {
            let row = &self.w1[k * self.inputs..(k + 1) * self.inputs];
            let z = self.b1[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            *hk = self.activation.apply(z);
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut h = vec![0.0; self.hidden];
        self.hidden_out(x, &mut h);
        self.b2 + self.w2.iter().zip(&h).map(|(w, a)| w * a).sum::<f64>()
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }

    /// Parameters flattened as w1, b1, w2, b2.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.param_count());
        v.extend(&self.w1);
        v.extend(&self.b1);
        v.extend(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn set_flat_params(&mut self, p: &[f64]) {
        let (a, rest) = p.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, d) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2 = d[0];
    }

    /// Batch loss ½·mean squared error + (alpha / 2m)·‖W‖² and its gradient
    /// in `flat_params` order.
    pub fn loss_and_grad(&self, x: &[&[f64]], y: &[f64], alpha: f64) -> (f64, Vec<f64>) {
        let m = x.len() as f64;
        let (ni, nh) = (self.inputs, self.hidden);
        let mut g = vec![0.0; self.param_count()];
        let (gw1, rest) = g.split_at_mut(ni * nh);
        let (gb1, rest) = rest.split_at_mut(nh);
        let (gw2, gb2) = rest.split_at_mut(nh);
        let mut h = vec![0.0; nh];
        let mut loss = 0.0;
        for (xi, yi) in x.iter().zip(y) {
            self.hidden_out(xi, &mut h);
            let out = self.b2 + self.w2.iter().zip(&h).map(|(w, a)| w * a).sum::<f64>();
            let err = out - yi;
            loss += 0.5 * err * err;
            let d_out = err / m;
            gb2[0] += d_out;
            for k in 0..nh {
                gw2[k] += d_out * h[k];
                let dz = d_out * self.w2[k] * self.activation.deriv(h[k]);
                if dz != 0.0 {
                    gb1[k] += dz;
                    let row = &mut gw1[k * ni..(k + 1) * ni];
                    for (gr, v) in row.iter_mut().zip(xi.iter()) {
                        *gr += dz * v;
                    }
                }
            }
        }
        loss /= m;
        if alpha > 0.0 {
            let sq: f64 = self.w1.iter().chain(&self.w2).map(|w| w * w).sum();
            loss += alpha / (2.0 * m) * sq;
            for (gr, w) in gw1.iter_mut().zip(&self.w1) {
                *gr += alpha / m * w;
            }
            for (gr, w) in gw2.iter_mut().zip(&self.w2) {
                *gr += alpha / m * w;
            }
        }
        (loss, g)
    }

    pub fn fit(x: &[Vec<f64>], y: &[f64], p: &MlpParams, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Mlp::init(x[0].len(), p.hidden, p.activation, &mut rng);
        let np = net.param_count();
        let (mut m1, mut m2) = (vec![0.0; np], vec![0.0; np]);
        let mut params = net.flat_params();
        let mut order: Vec<usize> = (0..x.len()).collect();
        let batch = p.batch_size.min(x.len()).max(1);
        let mut step = 0i32;
        let mut best = f64::INFINITY;
        let mut stale = 0;
        for epoch in 1..=p.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch) {
                let bx: Vec<&[f64]> = chunk.iter().map(|&i| x[i].as_slice()).collect();
                let by: Vec<f64> = chunk.iter().map(|&i| y[i]).collect();
                let (loss, g) = net.loss_and_grad(&bx, &by, p.alpha);
                if !loss.is_finite() {
                    return Err(Error::Training {
                        iteration: epoch,
                        message: format!("non-finite loss {loss}"),
                    });
                }
                epoch_loss += loss * chunk.len() as f64;
                step += 1;
                let c1 = 1.0 - p.beta1.powi(step);
                let c2 = 1.0 - p.beta2.powi(step);
                let lr = p.learning_rate * c2.sqrt() / c1;
                for k in 0..np {
                    m1[k] = p.beta1 * m1[k] + (1.0 - p.beta1) * g[k];
                    m2[k] = p.beta2 * m2[k] + (1.0 - p.beta2) * g[k] * g[k];
                    params[k] -= lr * m1[k] / (m2[k].sqrt() + p.adam_eps);
                }
                net.set_flat_params(&params);
            }
            epoch_loss /= x.len() as f64;
            if !epoch_loss.is_finite() {
                return Err(Error::Training {
                    iteration: epoch,
                    message: format!("non-finite epoch loss {epoch_loss}"),
                });
            }
            net.log.push((epoch, epoch_loss));
            if epoch_loss > best - p.tol {
                stale += 1;
            } else {
                stale = 0;
            }
            best = best.min(epoch_loss);
            if stale >= p.n_iter_no_change {
                break;
            }
        }
        Ok(net)
    }

    /// Training log as `iteration,loss` CSV.
    pub fn write_log_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "iteration,loss")?;
        for (i, l) in &self.log {
            writeln!(w, "{i},{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..5).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y = x.iter().map(|r| r[0] * 0.7 - r[2] + 0.1).collect();
        (x, y)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (x, y) = fixture();
        let xs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        for act in [Activation::Tanh, Activation::Relu] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let mut net = Mlp::init(3, 4, act, &mut rng);
            let (_, g) = net.loss_and_grad(&xs, &y, 1e-2);
            let base = net.flat_params();
            let h = 1e-6;
            for k in 0..base.len() {
                let mut p = base.clone();
                p[k] += h;
                net.set_flat_params(&p);
                let up = net.loss_and_grad(&xs, &y, 1e-2).0;
                p[k] -= 2.0 * h;
                net.set_flat_params(&p);
                let down = net.loss_and_grad(&xs, &y, 1e-2).0;
                net.set_flat_params(&base);
                let num = (up - down) / (2.0 * h);
                let rel = (num - g[k]).abs() / num.abs().max(g[k].abs()).max(1e-8);
                assert!(rel < 1e-4 || (num - g[k]).abs() < 1e-10, "{act:?} param {k}: {} vs {num}", g[k]);
            }
        }
    }

    #[test]
    fn learns_linear_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Vec<f64>> = (0..200).map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x.iter().map(|r| 0.5 * r[0] - 0.3 * r[1]).collect();
        let m = Mlp::fit(&x, &y, &MlpParams::default(), 1).unwrap();
        let mse: f64 = x.iter().zip(&y).map(|(r, t)| (m.predict(r) - t).powi(2)).sum::<f64>() / 200.0;
        assert!(mse < 5e-3, "mse {mse}");
        let mut csv = Vec::new();
        m.write_log_csv(&mut csv).unwrap();
        assert!(String::from_utf8(csv).unwrap().starts_with("iteration,loss\n1,"));
    }

    #[test]
    fn divergence_reports_iteration() {
        let x = vec![vec![1e200], vec![-1e200]];
        let y = vec![1e200, -1e200];
        let err = Mlp::fit(&x, &y, &MlpParams::default(), 0).unwrap_err();
        assert!(matches!(err, Error::Training { iteration: 1, .. }), "{err}");
    }
}
