//! CART regression trees grown by variance reduction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(k) => k.min(d).max(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf(f64),
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a TreeParams,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    features: Vec<usize>,
}

struct Best {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn leaf_value(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
    }

    /// Best split of `idx` on feature `f`, scored by Σ_l²/n_l + Σ_r²/n_r
    /// (equivalent to maximal reduction in squared error). `None` when
    /// the feature is constant over the node.
    fn best_on(&self, idx: &mut [usize], f: usize, total: f64) -> Option<(f64, f64)> {
        let x = self.x;
        idx.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
        let n = idx.len();
        if x[idx[0]][f] == x[idx[n - 1]][f] {
            return None;
        }
        let mut best: Option<(f64, f64)> = None;
        let mut left = 0.0;
        for k in 0..n - 1 {
            left += self.y[idx[k]];
            let (a, b) = (x[idx[k]][f], x[idx[k + 1]][f]);
            if a == b {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = (n - k - 1) as f64;
            let right = total - left;
            let score = left * left / nl + right * right / nr;
            if best.is_none_or(|(s, _)| score > s) {
                let mut t = a + (b - a) / 2.0;
                if t >= b || !t.is_finite() {
                    t = a;
                }
                best = Some((score, t));
            }
        }
        best
    }

    fn grow(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.leaf_value(idx)));
        let n = idx.len();
        if n < self.params.min_samples_split || self.params.max_depth.is_some_and(|m| depth >= m) {
            return id;
        }
        let first = self.y[idx[0]];
        if idx.iter().all(|&i| self.y[i] == first) {
            return id;
        }
        let total: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let parent = total * total / n as f64;

        // Visit features in random order until `mtry` non-constant ones were scored.
        self.features.shuffle(&mut self.rng);
        let order = self.features.clone();
        let mut best: Option<Best> = None;
        let mut scored = 0;
        for f in order {
            if scored >= self.mtry {
                break;
            }
            if let Some((score, threshold)) = self.best_on(idx, f, total) {
                scored += 1;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(Best {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        let Some(best) = best else { return id };
        if best.score <= parent + 1e-12 * parent.abs() {
            return id;
        }
        let x = self.x;
        idx.sort_by(|&a, &b| x[a][best.feature].total_cmp(&x[b][best.feature]));
        let cut = idx.partition_point(|&i| x[i][best.feature] <= best.threshold);
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }
}

impl Tree {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &TreeParams, seed: u64) -> Self {
        let idx: Vec<usize> = (0..x.len()).collect();
        Self::fit_indices(x, y, idx, params, seed)
    }

    /// Grow on the (possibly repeated) sample indices `idx`.
    pub fn fit_indices(x: &[Vec<f64>], y: &[f64], mut idx: Vec<usize>, params: &TreeParams, seed: u64) -> Self {
        let d = x[0].len();
        let mut b = Builder {
            x,
            y,
            params,
            mtry: params.max_features.resolve(d),
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes: Vec::new(),
            features: (0..d).collect(),
        };
        b.grow(&mut idx, 0);
        Tree { nodes: b.nodes }
    }

    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf(value)],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }

    /// Every threshold used on `feature`.
    pub fn thresholds(&self, feature: usize) -> Vec<f64> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split {
                    feature: f, threshold, ..
                } if *f == feature => Some(*threshold),
                _ => None,
            })
            .collect()
    }
}
