//! Bootstrap-aggregated CART forests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};

pub const DEFAULT_TREES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub tree: TreeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Each tree sees n samples drawn with replacement. Tree seeds are drawn
    /// up front from `seed`, so the result does not depend on scheduling.
    pub fn fit(x: &[Vec<f64>], y: &[f64], p: &ForestParams, seed: u64) -> Self {
        let n = x.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seeds: Vec<u64> = (0..p.n_estimators).map(|_| rng.gen()).collect();
        let trees = seeds
            .par_iter()
            .map(|&s| {
                let mut r = ChaCha8Rng::seed_from_u64(s);
                let idx: Vec<usize> = (0..n).map(|_| r.gen_range(0..n)).collect();
                Tree::fit_indices(x, y, idx, &p.tree, r.gen())
            })
            .collect();
        Forest { trees }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}
