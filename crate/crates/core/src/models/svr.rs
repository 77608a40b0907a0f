//! Epsilon-insensitive support vector regression with an RBF kernel,
//! trained by sequential minimal optimization on the dual.
//!
//! The dual is written over 2n variables: `a[i]` (sign +1) and `a[n+i]`
//! (sign -1) for sample i, minimizing ½ aᵀQa + pᵀa subject to
//! Σ sign·a = 0 and 0 ≤ a ≤ C, with p = ε − y for the first half and
//! ε + y for the second. Working pairs are picked by maximal violation
//! for i and a second-order gain estimate for j.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// `None` means 1 / (d · var(X)).
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            gamma: None,
            tol: 1e-3,
            max_iter: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Svr {
    pub gamma: f64,
    pub support: Vec<Vec<f64>>,
    /// a[i] − a[n+i] for each retained support vector, in [−C, C].
    pub coef: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// 1 / (d · var) over every entry of X; 1 if X is constant.
pub fn scale_gamma(x: &[Vec<f64>]) -> f64 {
    let d = x[0].len();
    let n = (x.len() * d) as f64;
    let mean = x.iter().flatten().sum::<f64>() / n;
    let var = x.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 && d > 0 {
        1.0 / (d as f64 * var)
    } else {
        1.0
    }
}

/// Kernel rows computed on demand and kept.
struct KernelCache<'a> {
    x: &'a [Vec<f64>],
    gamma: f64,
    rows: Vec<Option<Vec<f64>>>,
}

impl<'a> KernelCache<'a> {
    fn new(x: &'a [Vec<f64>], gamma: f64) -> Self {
        KernelCache {
            x,
            gamma,
            rows: vec![None; x.len()],
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        if self.rows[i].is_none() {
            let xi = &self.x[i];
            self.rows[i] = Some(self.x.iter().map(|xj| rbf(self.gamma, xi, xj)).collect());
        }
        self.rows[i].as_deref().unwrap()
    }
}

/// Dual solution over the full training set, before support extraction.
pub struct DualSolution {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub iterations: usize,
}

pub fn solve_dual(x: &[Vec<f64>], y: &[f64], p: &SvrParams) -> Result<DualSolution> {
    let n = x.len();
    let l = 2 * n;
    let c = p.c;
    let gamma = p.gamma.unwrap_or_else(|| scale_gamma(x));
    let mut k = KernelCache::new(x, gamma);
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let mut alpha = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { p.epsilon - y[t] } else { p.epsilon + y[t - n] })
        .collect();
    const TAU: f64 = 1e-12;
    let mut iter = 0;
    loop {
        // i: maximal violator among the "up" set
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..l {
            let v = if sign(t) > 0.0 {
                if alpha[t] < c {
                    -grad[t]
                } else {
                    continue;
                }
            } else if alpha[t] > 0.0 {
                grad[t]
            } else {
                continue;
            };
            if v >= gmax {
                gmax = v;
                i = t;
            }
        }
        if i == usize::MAX {
            break;
        }
        let si = sign(i);
        let ki = k.row(i % n).to_vec();
        let kii = 1.0;
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j = usize::MAX;
        let mut best = f64::INFINITY;
        for t in 0..l {
            let st = sign(t);
            // Q_it = s_i s_t K; quad = Q_ii + Q_tt − 2 s_t Q_it... written per case
            let qit = si * st * ki[t % n];
            if st > 0.0 {
                if alpha[t] > 0.0 {
                    let diff = gmax + grad[t];
                    gmax2 = gmax2.max(grad[t]);
                    if diff > 0.0 {
                        let quad = kii + 1.0 - 2.0 * si * qit;
                        let q = if quad > 0.0 { quad } else { TAU };
                        let obj = -diff * diff / q;
                        if obj <= best {
                            best = obj;
                            j = t;
                        }
                    }
                }
            } else if alpha[t] < c {
                let diff = gmax - grad[t];
                gmax2 = gmax2.max(-grad[t]);
                if diff > 0.0 {
                    let quad = kii + 1.0 + 2.0 * si * qit;
                    let q = if quad > 0.0 { quad } else { TAU };
                    let obj = -diff * diff / q;
                    if obj <= best {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if gmax + gmax2 < p.tol || j == usize::MAX {
            break;
        }
        iter += 1;
        if iter > p.max_iter {
            log::warn!("SVR solver hit max_iter={} before reaching tol", p.max_iter);
            break;
        }

        let sj = sign(j);
        let kj = k.row(j % n).to_vec();
        let qij = si * sj * ki[j % n];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if si != sj {
            let quad = (2.0 + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (2.0 - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        for t in 0..l {
            let st = sign(t);
            grad[t] += st * (si * ki[t % n] * di + sj * kj[t % n] * dj);
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Numeric("SVR gradient became non-finite".into()));
        }
    }

    // intercept from free variables, else midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        if alpha[t] >= c {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    let rho = if free > 0 { sum / free as f64 } else { (ub + lb) / 2.0 };
    let beta = (0..n).map(|i| alpha[i] - alpha[n + i]).collect();
    Ok(DualSolution {
        beta,
        alpha,
        rho,
        gamma,
        iterations: iter,
    })
}

impl Svr {
    pub fn fit(x: &[Vec<f64>], y: &[f64], p: &SvrParams) -> Result<Self> {
        let sol = solve_dual(x, y, p)?;
        let mut support = Vec::new();
        let mut coef = Vec::new();
        for (i, b) in sol.beta.iter().enumerate() {
            if *b != 0.0 {
                support.push(x[i].clone());
                coef.push(*b);
            }
        }
        Ok(Svr {
            gamma: sol.gamma,
            support,
            coef,
            intercept: -sol.rho,
            iterations: sol.iterations,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .support
                .iter()
                .zip(&self.coef)
                .map(|(s, b)| b * rbf(self.gamma, s, x))
                .sum::<f64>()
    }
}

/// Primal objective minus dual objective for coefficients `beta` and
/// intercept `b` on the training data. Nonnegative; zero at the optimum.
pub fn duality_gap(x: &[Vec<f64>], y: &[f64], beta: &[f64], b: f64, gamma: f64, c: f64, eps: f64) -> f64 {
    let n = x.len();
    let mut kb = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            kb[i] += rbf(gamma, &x[i], &x[j]) * beta[j];
        }
    }
    let quad: f64 = beta.iter().zip(&kb).map(|(a, k)| a * k).sum();
    let hinge: f64 = (0..n).map(|i| ((y[i] - kb[i] - b).abs() - eps).max(0.0)).sum();
    let primal = 0.5 * quad + c * hinge;
    let dual = -0.5 * quad - eps * beta.iter().map(|v| v.abs()).sum::<f64>()
        + y.iter().zip(beta).map(|(t, v)| t * v).sum::<f64>();
    primal - dual
}
