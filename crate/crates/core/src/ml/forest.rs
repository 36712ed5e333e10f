//! Bagged ensemble of CART trees with majority voting.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, DecisionTree, TreeParams};
use super::{check_data, stream_rng, Classifier, MlError};

/// Features examined at each node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubset {
    /// `⌈√n_features⌉` drawn per node.
    Sqrt,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub max_features: FeatureSubset,
}

impl ForestParams {
    /// 500 trees, depth 20, at least 2 samples per leaf.
    pub fn reference() -> ForestParams {
        ForestParams {
            n_trees: 500,
            max_depth: Some(20),
            min_samples_leaf: 2,
            bootstrap: true,
            max_features: FeatureSubset::Sqrt,
        }
    }

    /// One unbagged tree over all features; equivalent to `fit_tree`.
    pub fn single_tree() -> ForestParams {
        ForestParams {
            n_trees: 1,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: false,
            max_features: FeatureSubset::All,
        }
    }

    pub fn tree_params(&self, n_features: usize) -> TreeParams {
        TreeParams {
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            max_features: match self.max_features {
                FeatureSubset::Sqrt => Some(ceil_sqrt(n_features)),
                FeatureSubset::All => None,
            },
        }
    }
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams::reference()
    }
}

fn ceil_sqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r.max(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    pub params: ForestParams,
    pub seed: u64,
}

/// Mean and spread of per-tree normalized importances.
#[derive(Clone, Debug, PartialEq)]
pub struct Importance {
    /// Sums to 1 unless `degenerate`.
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub degenerate: bool,
}

/// Tree `t` of the forest `fit_forest(x, y, n_classes, params, seed)`.
/// Trees draw from independent streams so they can be fit in any order.
pub fn fit_forest_tree(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
    seed: u64,
    t: usize,
) -> Result<DecisionTree, MlError> {
    check_data(x, y, n_classes)?;
    let mut rng = stream_rng(seed, t as u64);
    let n = x.len();
    let samples = if params.bootstrap {
        (0..n).map(|_| rng.random_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    Ok(grow_tree(x, y, n_classes, samples, params.tree_params(x[0].len()), &mut rng))
}

pub fn fit_forest(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &ForestParams,
    seed: u64,
) -> Result<RandomForest, MlError> {
    if params.n_trees == 0 {
        return Err(MlError::BadParam("n_trees must be at least 1"));
    }
    let trees = (0..params.n_trees)
        .map(|t| fit_forest_tree(x, y, n_classes, params, seed, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RandomForest::from_trees(trees, *params, seed))
}

impl RandomForest {
    /// Trees must be non-empty and share class count and width.
    pub fn from_trees(trees: Vec<DecisionTree>, params: ForestParams, seed: u64) -> RandomForest {
        assert!(!trees.is_empty(), "a forest needs at least one tree");
        let (k, w) = (trees[0].n_classes, trees[0].n_features);
        assert!(
            trees.iter().all(|t| t.n_classes == k && t.n_features == w),
            "trees disagree on shape"
        );
        RandomForest { trees, params, seed }
    }

    pub fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    /// Votes per class, one per tree.
    pub fn votes(&self, x: &[f64]) -> Vec<u32> {
        let mut v = vec![0u32; self.n_classes()];
        for t in &self.trees {
            v[t.predict_label(x)] += 1;
        }
        v
    }

    /// Per-tree importances normalized to sum 1, then averaged; the mean is
    /// renormalized and the standard deviation scaled alike. Trees without
    /// splits contribute zeros.
    pub fn feature_importance(&self) -> Importance {
        let w = self.n_features();
        let per_tree: Vec<Vec<f64>> = self
            .trees
            .iter()
            .map(|t| {
                let mut imp = t.raw_importance();
                let total: f64 = imp.iter().sum();
                if total > 0.0 {
                    imp.iter_mut().for_each(|v| *v /= total);
                }
                imp
            })
            .collect();
        let m = per_tree.len() as f64;
        let mut mean = vec![0.0; w];
        for imp in &per_tree {
            mean.iter_mut().zip(imp).for_each(|(a, b)| *a += b / m);
        }
        let mut std = vec![0.0; w];
        for imp in &per_tree {
            for ((s, v), mu) in std.iter_mut().zip(imp).zip(&mean) {
                *s += (v - mu) * (v - mu) / m;
            }
        }
        std.iter_mut().for_each(|s| *s = libm::sqrt(*s));
        let total: f64 = mean.iter().sum();
        if total == 0.0 {
            return Importance {
                mean,
                std,
                degenerate: true,
            };
        }
        mean.iter_mut().for_each(|v| *v /= total);
        std.iter_mut().for_each(|v| *v /= total);
        Importance {
            mean,
            std,
            degenerate: false,
        }
    }
}

impl Classifier for RandomForest {
    fn n_classes(&self) -> usize {
        self.trees[0].n_classes
    }

    /// Vote shares.
    fn class_scores(&self, x: &[f64]) -> Vec<f64> {
        let m = self.trees.len() as f64;
        self.votes(x).into_iter().map(|v| f64::from(v) / m).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::tree::{fit_tree, TreeNode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Ten uniform features; the label is decided by features 3 and 7.
    fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..10).map(|_| rng.random::<f64>()).collect()).collect();
        let y = x.iter().map(|r| usize::from(r[3] > 0.5) * 2 + usize::from(r[7] > 0.5)).collect();
        (x, y)
    }

    fn small(n_trees: usize) -> ForestParams {
        ForestParams {
            n_trees,
            max_depth: Some(8),
            ..ForestParams::reference()
        }
    }

    #[test]
    fn reference_hyperparameters() {
        let p = ForestParams::reference();
        assert_eq!((p.n_trees, p.max_depth, p.min_samples_leaf), (500, Some(20), 2));
        assert_eq!(ForestParams::default(), p);
    }

    #[test]
    fn ceil_sqrt_values() {
        let got: Vec<usize> = [1, 2, 4, 5, 9, 10, 27, 36, 37].iter().map(|&n| ceil_sqrt(n)).collect();
        assert_eq!(got, vec![1, 2, 2, 3, 3, 4, 6, 6, 7]);
    }

    #[test]
    fn seeded_fit_is_deterministic() {
        let (x, y) = separable(120, 1);
        let a = fit_forest(&x, &y, 4, &small(15), 9).unwrap();
        let b = fit_forest(&x, &y, 4, &small(15), 9).unwrap();
        assert_eq!(a, b);
        let c = fit_forest(&x, &y, 4, &small(15), 10).unwrap();
        assert_ne!(a.trees, c.trees);
    }

    #[test]
    fn single_unbagged_tree_equals_cart() {
        let (x, y) = separable(80, 2);
        let f = fit_forest(&x, &y, 4, &ForestParams::single_tree(), 3).unwrap();
        let t = fit_tree(&x, &y, 4, TreeParams::default()).unwrap();
        assert_eq!(f.trees[0], t);
        let (probe, _) = separable(50, 99);
        for r in &probe {
            assert_eq!(f.predict(r), t.predict_label(r));
        }
    }

    #[test]
    fn predict_is_mode_of_trees() {
        let (x, y) = separable(100, 4);
        let f = fit_forest(&x, &y, 4, &small(9), 5).unwrap();
        let (probe, _) = separable(100, 6);
        for r in &probe {
            let mut counts = [0usize; 4];
            f.trees.iter().for_each(|t| counts[t.predict_label(r)] += 1);
            let max = *counts.iter().max().unwrap();
            let mode = counts.iter().position(|&c| c == max).unwrap();
            assert_eq!(f.predict(r), mode);
            let shares: f64 = f.class_scores(r).iter().sum();
            assert!((shares - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_tree_tie_goes_to_lower_label() {
        let leaf = |label| TreeNode::Leaf { label, counts: vec![0; 3] };
        let tree = |label| DecisionTree { nodes: vec![leaf(label)], n_features: 1, n_classes: 3 };
        let f = RandomForest::from_trees(vec![tree(2), tree(1)], small(2), 0);
        assert_eq!(f.predict(&[0.0]), 1);
        assert_eq!(f.rank_classes(&[0.0]), vec![1, 2, 0]);
    }

    #[test]
    fn importance_concentrates_on_informative_features() {
        let (x, y) = separable(300, 7);
        let f = fit_forest(&x, &y, 4, &small(60), 8).unwrap();
        let imp = f.feature_importance();
        assert!(!imp.degenerate);
        assert!((imp.mean.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp.mean[3] + imp.mean[7] > 0.85, "{:?}", imp.mean);
        assert!(imp.std.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn single_informative_feature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // With two columns every node sees both, so noise never wins a split.
        let x: Vec<Vec<f64>> = (0..200).map(|_| (0..2).map(|_| rng.random::<f64>()).collect()).collect();
        let y: Vec<usize> = x.iter().map(|r| usize::from(r[0] > 0.3)).collect();
        let f = fit_forest(&x, &y, 2, &small(40), 1).unwrap();
        let m = f.feature_importance().mean;
        assert!(m[0] > 0.9, "{m:?}");
    }

    #[test]
    fn unused_feature_has_zero_importance() {
        // Column 1 is constant so no split can use it.
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 1.0]).collect();
        let y: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let f = fit_forest(&x, &y, 2, &small(10), 0).unwrap();
        assert_eq!(f.feature_importance().mean[1], 0.0);
    }

    #[test]
    fn no_splits_is_degenerate() {
        let x = vec![vec![1.0], vec![2.0]];
        let f = fit_forest(&x, &[0, 0], 2, &small(3), 0).unwrap();
        let imp = f.feature_importance();
        assert!(imp.degenerate);
        assert_eq!(imp.mean, vec![0.0]);
    }

    #[test]
    fn zero_trees_rejected() {
        let p = ForestParams { n_trees: 0, ..ForestParams::reference() };
        assert!(matches!(fit_forest(&[vec![0.0]], &[0], 1, &p, 0), Err(MlError::BadParam(_))));
    }

    #[test]
    fn forest_training_accuracy_not_below_tree() {
        let (x, y) = separable(200, 11);
        // Label noise so neither model is trivially perfect.
        let y: Vec<usize> = y.iter().enumerate().map(|(i, &l)| if i % 13 == 0 { (l + 1) % 4 } else { l }).collect();
        let params = ForestParams { n_trees: 50, ..ForestParams::reference() };
        let f = fit_forest(&x, &y, 4, &params, 2).unwrap();
        let t = fit_tree(&x, &y, 4, params.tree_params(10)).unwrap();
        let acc = |p: &dyn Fn(&[f64]) -> usize| x.iter().zip(&y).filter(|(r, &l)| p(r) == l).count();
        let (fa, ta) = (acc(&|r| f.predict(r)), acc(&|r| t.predict_label(r)));
        assert!(fa >= ta, "{fa} {ta}");
    }
}
