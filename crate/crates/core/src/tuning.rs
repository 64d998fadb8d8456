//! Stratified k-fold cross-validation and hyperparameter grids.
use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::stratified_folds;
use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_macro_f1: Vec<f64>,
    pub mean_macro_f1: f64,
    /// Confusion counts pooled over all held-out folds.
    pub pooled: ConfusionMatrix,
}

/// Runs `fit_predict(train, held_out)` once per fold and scores binary
/// predictions by macro-F1. Folds run concurrently; results keep fold order.
pub fn cross_validate<F>(
    targets: &[bool],
    class_names: (&str, &str),
    folds: usize,
    seed: u64,
    fit_predict: F,
) -> Result<CvReport>
where
    F: Fn(&[usize], &[usize]) -> Result<Vec<bool>> + Sync,
{
    let assignment = stratified_folds(targets, folds, seed)?;
    let results = (0..folds)
        .into_par_iter()
        .map(|k| {
            let (held, train): (Vec<usize>, Vec<usize>) =
                (0..targets.len()).partition(|&i| assignment[i] == k);
            let predicted = fit_predict(&train, &held)?;
            if predicted.len() != held.len() {
                return Err(Error::DimensionMismatch {
                    expected: held.len(),
                    found: predicted.len(),
                });
            }
            let golds: Vec<bool> = held.iter().map(|&i| targets[i]).collect();
            ConfusionMatrix::binary(class_names, &golds, &predicted)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pooled = ConfusionMatrix::new(&[class_names.0, class_names.1]);
    for m in &results {
        for g in 0..2 {
            for p in 0..2 {
                pooled.counts[g][p] += m.counts[g][p];
            }
        }
    }
    let fold_macro_f1: Vec<f64> = results.iter().map(ConfusionMatrix::macro_f1).collect();
    Ok(CvReport {
        mean_macro_f1: fold_macro_f1.iter().sum::<f64>() / folds as f64,
        fold_macro_f1,
        pooled,
    })
}

/// Named value lists whose cartesian product is searched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grid {
    axes: Vec<(String, Vec<String>)>,
}

impl Grid {
    /// Parses `key=v1,v2,...` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut axes: Vec<(String, Vec<String>)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let (key, values) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("grid line {}: expected key=v1,v2", n + 1)))?;
            let key = key.trim().to_string();
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return Err(Error::Config(format!("grid line {}: no values for {key}", n + 1)));
            }
            if axes.iter().any(|(k, _)| *k == key) {
                return Err(Error::Config(format!("grid key {key} repeated")));
            }
            axes.push((key, values));
        }
        if axes.is_empty() {
            return Err(Error::Config("grid is empty".into()));
        }
        Ok(Grid { axes })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.axes.iter().map(|(k, _)| k.as_str())
    }

    /// All grid points, last axis varying fastest.
    pub fn points(&self) -> Vec<BTreeMap<String, String>> {
        let mut points = vec![BTreeMap::new()];
        for (key, values) in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(key.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_product() {
        let g = Grid::parse("a=1,2\n# note\nb = x, y, z\n").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0]["a"], "1");
        assert_eq!(pts[0]["b"], "x");
        assert_eq!(pts[5]["a"], "2");
        assert_eq!(pts[5]["b"], "z");
        assert!(Grid::parse("a\n").is_err());
        assert!(Grid::parse("").is_err());
    }

    #[test]
    fn oracle_predictor_scores_one() {
        let targets: Vec<bool> = (0..40).map(|i| i % 4 == 0).collect();
        let r = cross_validate(&targets, ("n", "p"), 5, 1, |_, held| {
            Ok(held.iter().map(|&i| targets[i]).collect())
        })
        .unwrap();
        assert_eq!(r.fold_macro_f1.len(), 5);
        assert_eq!(r.mean_macro_f1, 1.0);
        assert_eq!(r.pooled.total(), 40);
    }
}
