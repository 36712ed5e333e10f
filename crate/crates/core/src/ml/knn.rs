//! k-nearest-neighbor vote on standardized features.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_data, Classifier, MlError};
use crate::features::Standardizer;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_classes: usize,
    pub standardizer: Standardizer,
    /// Standardized training rows.
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    /// Stores the training set, standardized with statistics fitted on it.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, k: usize) -> Result<KnnModel, MlError> {
        check_data(x, y, n_classes)?;
        if k == 0 || k > x.len() {
            return Err(MlError::KOutOfRange { k, n: x.len() });
        }
        let standardizer = Standardizer::fit(x)?;
        Ok(KnnModel {
            k,
            n_classes,
            rows: standardizer.transform_all(x),
            standardizer,
            labels: y.to_vec(),
        })
    }

    /// Training indices of the `k` nearest rows by Euclidean distance,
    /// lower index first at equal distance.
    pub fn neighbors(&self, x: &[f64]) -> Vec<usize> {
        let q = self.standardizer.transform(x);
        let mut d: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d.into_iter().take(self.k).map(|(_, i)| i).collect()
    }
}

impl Classifier for KnnModel {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Share of the `k` neighbors carrying each label.
    fn class_scores(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.n_classes];
        for i in self.neighbors(x) {
            s[self.labels[i]] += 1.0 / self.k as f64;
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data() -> (Vec<Vec<f64>>, Vec<usize>) {
        let x = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 5.0], vec![9.0, 9.0], vec![8.0, 9.0]];
        (x, vec![0, 0, 1, 2, 2])
    }

    #[test]
    fn exact_match_with_k1() {
        let (x, y) = data();
        let m = KnnModel::fit(&x, &y, 3, 1).unwrap();
        for (r, &l) in x.iter().zip(&y) {
            assert_eq!(m.predict(r), l);
        }
    }

    #[test]
    fn k_equal_to_n_is_global_majority() {
        let (x, y) = data();
        let m = KnnModel::fit(&x, &y, 3, 5).unwrap();
        // Classes 0 and 2 both have two samples; the lower label wins.
        assert_eq!(m.predict(&[9.0, 9.0]), 0);
        let m = KnnModel::fit(&x[..3], &y[..3], 3, 3).unwrap();
        assert_eq!(m.predict(&[100.0, 100.0]), 0);
    }

    #[test]
    fn equidistant_neighbors_prefer_lower_index() {
        let x = vec![vec![1.0], vec![-1.0]];
        let m = KnnModel::fit(&x, &[1, 0], 2, 1).unwrap();
        assert_eq!(m.neighbors(&[0.0]), vec![0]);
        assert_eq!(m.predict(&[0.0]), 1);
    }

    #[test]
    fn bad_k() {
        let (x, y) = data();
        assert_eq!(KnnModel::fit(&x, &y, 3, 6), Err(MlError::KOutOfRange { k: 6, n: 5 }));
        assert_eq!(KnnModel::fit(&x, &y, 3, 0), Err(MlError::KOutOfRange { k: 0, n: 5 }));
    }
}
