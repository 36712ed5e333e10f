//! CART classification tree grown on gini impurity.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_data, stream_rng, Classifier, MlError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features examined per node; `None` examines all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

/// Node of a tree stored as an arena; children are indices into it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Sample-weighted gini decrease: `n·g − n_l·g_l − n_r·g_r`.
        decrease: f64,
    },
    Leaf {
        label: usize,
        /// Training samples of each class that reached this leaf.
        counts: Vec<u32>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root at index 0.
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
    pub n_classes: usize,
}

/// `1 − Σ p_c²`; zero for an empty histogram.
pub fn gini(counts: &[u32]) -> f64 {
    let n: u64 = counts.iter().map(|&c| u64::from(c)).sum();
    if n == 0 {
        return 0.0;
    }
    let sq: u64 = counts.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
    1.0 - sq as f64 / (n * n) as f64
}

fn majority(counts: &[u32]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// Candidate split quality `Σ l²/n_l + Σ r²/n_r` as an exact fraction.
#[derive(Clone, Copy)]
struct Quality {
    num: u128,
    den: u128,
}

impl Quality {
    fn of(sq_l: u64, n_l: u64, sq_r: u64, n_r: u64) -> Quality {
        Quality {
            num: u128::from(sq_l) * u128::from(n_r) + u128::from(sq_r) * u128::from(n_l),
            den: u128::from(n_l) * u128::from(n_r),
        }
    }

    fn beats(self, other: Quality) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    quality: Quality,
}

struct Grower<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    rng: &'a mut R,
    nodes: Vec<TreeNode>,
    /// Scratch buffer of (value, label) pairs.
    column: Vec<(f64, usize)>,
}

impl<R: Rng> Grower<'_, R> {
    fn histogram(&self, samples: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.n_classes];
        for &i in samples {
            counts[self.y[i]] += 1;
        }
        counts
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let counts = self.histogram(&samples);
        let n = samples.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        let min_leaf = self.params.min_samples_leaf.max(1);
        let split = if pure || depth_reached || n < 2 * min_leaf {
            None
        } else {
            self.best_split(&samples, &counts)
        };
        let Some(best) = split else {
            self.nodes.push(TreeNode::Leaf {
                label: majority(&counts),
                counts,
            });
            return id;
        };
        // Placeholder until the children exist.
        self.nodes.push(TreeNode::Leaf {
            label: 0,
            counts: Vec::new(),
        });
        let (l, r): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.x[i][best.feature] <= best.threshold);
        let g = |c: &[u32], m: usize| m as f64 * gini(c);
        let decrease = g(&counts, n) - g(&self.histogram(&l), l.len()) - g(&self.histogram(&r), r.len());
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
            decrease: decrease.max(0.0),
        };
        id
    }

    /// Highest gini decrease over the examined features, lowest feature then
    /// lowest threshold on ties. `None` if no split strictly reduces impurity.
    fn best_split(&mut self, samples: &[usize], counts: &[u32]) -> Option<Best> {
        let n_features = self.x[0].len();
        let features: Vec<usize> = match self.params.max_features {
            Some(m) if m < n_features => {
                let mut f = index::sample(self.rng, n_features, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..n_features).collect(),
        };
        let n = samples.len() as u64;
        let min_leaf = self.params.min_samples_leaf.max(1) as u64;
        let parent_sq: u64 = counts.iter().map(|&c| u64::from(c) * u64::from(c)).sum();
        // A split must beat the parent's own Σc²/n.
        let parent = Quality { num: u128::from(parent_sq), den: u128::from(n) };
        let mut best: Option<Best> = None;
        let mut left = vec![0u64; self.n_classes];
        for f in features {
            self.column.clear();
            self.column.extend(samples.iter().map(|&i| (self.x[i][f], self.y[i])));
            self.column.sort_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            let (mut sq_l, mut sq_r) = (0u64, parent_sq);
            for k in 0..self.column.len() - 1 {
                let (v, label) = self.column[k];
                let r_c = u64::from(counts[label]) - left[label];
                sq_l += 2 * left[label] + 1;
                sq_r -= 2 * r_c - 1;
                left[label] += 1;
                let next = self.column[k + 1].0;
                let n_l = k as u64 + 1;
                if v == next || n_l < min_leaf || n - n_l < min_leaf {
                    continue;
                }
                let q = Quality::of(sq_l, n_l, sq_r, n - n_l);
                let bar = best.as_ref().map_or(parent, |b| b.quality);
                if q.beats(bar) {
                    let mid = v + (next - v) / 2.0;
                    best = Some(Best {
                        feature: f,
                        threshold: if mid < next { mid } else { v },
                        quality: q,
                    });
                }
            }
        }
        best
    }
}

/// Grows a tree on the multiset `samples` of row indices (bootstrap
/// duplicates allowed). Inputs must already be validated.
pub(crate) fn grow_tree<R: Rng>(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    samples: Vec<usize>,
    params: TreeParams,
    rng: &mut R,
) -> DecisionTree {
    let mut g = Grower {
        x,
        y,
        n_classes,
        params,
        rng,
        nodes: Vec::new(),
        column: Vec::with_capacity(samples.len()),
    };
    g.grow(samples, 0);
    DecisionTree {
        nodes: g.nodes,
        n_features: x[0].len(),
        n_classes,
    }
}

/// CART on all rows. Candidate thresholds are midpoints between adjacent
/// distinct values. Growth stops at `max_depth`, at pure nodes, when a child
/// would hold fewer than `min_samples_leaf` samples, or when no split lowers
/// impurity.
pub fn fit_tree(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: TreeParams,
) -> Result<DecisionTree, MlError> {
    check_data(x, y, n_classes)?;
    // Only consulted when `max_features` limits the candidates.
    let mut rng = stream_rng(0, 0);
    Ok(grow_tree(x, y, n_classes, (0..x.len()).collect(), params, &mut rng))
}

impl DecisionTree {
    /// Index of the leaf that `x` falls into.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = self.nodes[i]
        {
            i = if x[feature] <= threshold { left } else { right };
        }
        i
    }

    pub fn predict_label(&self, x: &[f64]) -> usize {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { label, .. } => *label,
            TreeNode::Split { .. } => unreachable!("leaf_index stops at leaves"),
        }
    }

    /// Longest root-to-leaf edge count.
    pub fn depth(&self) -> usize {
        fn walk(t: &DecisionTree, i: usize) -> usize {
            match t.nodes[i] {
                TreeNode::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        walk(self, 0)
    }

    pub fn n_splits(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Split { .. })).count()
    }

    /// Summed split decreases per feature.
    pub fn raw_importance(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.n_features];
        for node in &self.nodes {
            if let TreeNode::Split { feature, decrease, .. } = *node {
                imp[feature] += decrease;
            }
        }
        imp
    }
}

impl Classifier for DecisionTree {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// One-hot on the leaf label.
    fn class_scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        s[self.predict_label(x)] = 1.0;
        s
    }
}
