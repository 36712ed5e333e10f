//! Gaussian naive Bayes.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_data, Classifier, MlError};

pub const VAR_FLOOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub n_classes: usize,
    /// Per class; empty for classes absent from training.
    pub means: Vec<Vec<f64>>,
    pub vars: Vec<Vec<f64>>,
    /// `ln((n_c + 1) / (n + n_classes))`.
    pub log_prior: Vec<f64>,
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<GaussianNb, MlError> {
        let w = check_data(x, y, n_classes)?;
        let mut count = vec![0usize; n_classes];
        let mut means = vec![vec![0.0; w]; n_classes];
        for (r, &c) in x.iter().zip(y) {
            count[c] += 1;
            means[c].iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        for (m, &n) in means.iter_mut().zip(&count) {
            m.iter_mut().for_each(|v| *v /= n.max(1) as f64);
        }
        let mut vars = vec![vec![0.0; w]; n_classes];
        for (r, &c) in x.iter().zip(y) {
            for ((s, v), m) in vars[c].iter_mut().zip(r).zip(&means[c]) {
                *s += (v - m) * (v - m);
            }
        }
        for (s, &n) in vars.iter_mut().zip(&count) {
            s.iter_mut().for_each(|v| *v = (*v / n.max(1) as f64).max(VAR_FLOOR));
        }
        for c in 0..n_classes {
            if count[c] == 0 {
                means[c].clear();
                vars[c].clear();
            }
        }
        let denom = (x.len() + n_classes) as f64;
        let log_prior = count.iter().map(|&n| libm::log((n + 1) as f64 / denom)).collect();
        Ok(GaussianNb {
            n_classes,
            means,
            vars,
            log_prior,
        })
    }
}

impl Classifier for GaussianNb {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// Log-posterior up to a shared constant; `-inf` for unseen classes.
    fn class_scores(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| {
                if self.means[c].is_empty() {
                    return f64::NEG_INFINITY;
                }
                let ll: f64 = x
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.vars[c])
                    .map(|((v, m), s)| -0.5 * (libm::log(2.0 * core::f64::consts::PI * s) + (v - m) * (v - m) / s))
                    .sum();
                self.log_prior[c] + ll
            })
            .collect()
    }
}
