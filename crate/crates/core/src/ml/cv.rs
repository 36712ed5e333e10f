//! k-fold cross-validation and grid search.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::forest::ForestParams;
use super::{stream_rng, Classifier, MlError};

/// Disjoint test folds covering every sample once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Folds {
    pub folds: Vec<Vec<usize>>,
    /// False when some class was too small to spread over every fold.
    pub stratified: bool,
}

/// Each class is shuffled and dealt round-robin across folds, continuing
/// the deal from class to class so fold sizes differ by at most one. If a
/// present class has fewer samples than folds, all samples are shuffled and
/// dealt together instead.
pub fn kfold_indices(y: &[usize], k: usize, seed: u64) -> Result<Folds, MlError> {
    if k < 2 {
        return Err(MlError::BadParam("at least 2 folds are needed"));
    }
    if k > y.len() {
        return Err(MlError::BadParam("more folds than samples"));
    }
    let n_classes = y.iter().max().map_or(0, |&m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (i, &c) in y.iter().enumerate() {
        by_class[c].push(i);
    }
    let stratified = by_class.iter().all(|c| c.is_empty() || c.len() >= k);
    let mut rng = stream_rng(seed, 0);
    let order: Vec<usize> = if stratified {
        by_class
            .into_iter()
            .flat_map(|mut c| {
                c.shuffle(&mut rng);
                c
            })
            .collect()
    } else {
        log::warn!("a class has fewer than {k} samples; folds are not stratified");
        let mut all: Vec<usize> = (0..y.len()).collect();
        all.shuffle(&mut rng);
        all
    };
    let mut folds = vec![Vec::new(); k];
    for (j, i) in order.into_iter().enumerate() {
        folds[j % k].push(i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(Folds { folds, stratified })
}

/// Mean held-out accuracy over the folds.
pub fn cross_val_accuracy<M, F>(x: &[Vec<f64>], y: &[usize], folds: &Folds, mut fit: F) -> Result<f64, MlError>
where
    M: Classifier,
    F: FnMut(&[Vec<f64>], &[usize]) -> Result<M, MlError>,
{
    let mut in_fold = vec![usize::MAX; y.len()];
    for (f, idx) in folds.folds.iter().enumerate() {
        idx.iter().for_each(|&i| in_fold[i] = f);
    }
    let mut total = 0.0;
    for (f, test) in folds.folds.iter().enumerate() {
        let train: Vec<usize> = (0..y.len()).filter(|&i| in_fold[i] != f).collect();
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let model = fit(&tx, &ty)?;
        let hits = test.iter().filter(|&&i| model.predict(&x[i]) == y[i]).count();
        total += hits as f64 / test.len() as f64;
    }
    Ok(total / folds.folds.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvResult<P> {
    pub best: P,
    pub best_index: usize,
    /// Mean accuracy of each grid point, in grid order.
    pub accuracy: Vec<f64>,
    pub stratified: bool,
}

/// Picks the grid point with the highest cross-validated accuracy; the
/// earliest point wins ties. All points share one fold assignment.
pub fn grid_search_cv<P, M, F>(
    x: &[Vec<f64>],
    y: &[usize],
    grid: &[P],
    folds: usize,
    seed: u64,
    mut fit: F,
) -> Result<CvResult<P>, MlError>
where
    P: Clone,
    M: Classifier,
    F: FnMut(&P, &[Vec<f64>], &[usize]) -> Result<M, MlError>,
{
    if grid.is_empty() {
        return Err(MlError::BadParam("empty parameter grid"));
    }
    if x.len() != y.len() {
        return Err(MlError::LengthMismatch { x: x.len(), y: y.len() });
    }
    let f = kfold_indices(y, folds, seed)?;
    let accuracy = grid
        .iter()
        .map(|p| cross_val_accuracy(x, y, &f, |tx, ty| fit(p, tx, ty)))
        .collect::<Result<Vec<_>, _>>()?;
    let best_index = select_best(&accuracy);
    Ok(CvResult {
        best: grid[best_index].clone(),
        best_index,
        accuracy,
        stratified: f.stratified,
    })
}

/// First index of the maximum.
pub fn select_best(accuracy: &[f64]) -> usize {
    let mut best = 0;
    for (i, &a) in accuracy.iter().enumerate() {
        if a > accuracy[best] {
            best = i;
        }
    }
    best
}

/// 27 points: trees in {100, 300, 500} × depth in {10, 20, unlimited} ×
/// min leaf in {1, 2, 4}, trees varying slowest.
pub fn default_forest_grid() -> Vec<ForestParams> {
    let mut grid = Vec::with_capacity(27);
    for n_trees in [100, 300, 500] {
        for max_depth in [Some(10), Some(20), None] {
            for min_samples_leaf in [1, 2, 4] {
                grid.push(ForestParams {
                    n_trees,
                    max_depth,
                    min_samples_leaf,
                    ..ForestParams::reference()
                });
            }
        }
    }
    grid
}
