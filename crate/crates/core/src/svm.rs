//! Linear SVM with class-wise hinge penalties, trained by subgradient descent
//! on the primal objective.
use std::path::Path;

use num_traits::Num;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Scaler};
use crate::num::{dot, Scalar};
use crate::persist;

const KIND: &str = "svm";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Hinge penalty on positive-class examples.
    pub alpha_pos: f64,
    /// Hinge penalty on negative-class examples.
    pub alpha_neg: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Stop once an epoch changes the objective by less than this (relative).
    pub tolerance: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            alpha_pos: 1.0,
            alpha_neg: 1.0,
            epochs: 200,
            learning_rate: 0.01,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "svm {name} must be positive, got {v}"
                )))
            }
        };
        positive("alpha_pos", self.alpha_pos)?;
        positive("alpha_neg", self.alpha_neg)?;
        positive("learning_rate", self.learning_rate)?;
        positive("tolerance", self.tolerance)?;
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("svm epochs must be positive".into()));
        }
        Ok(())
    }

    /// Inverse class-frequency penalties, `n / (2 n_class)`.
    pub fn balanced_alphas(n_pos: usize, n_neg: usize) -> (f64, f64) {
        let n = (n_pos + n_neg) as f64;
        (n / (2.0 * n_pos.max(1) as f64), n / (2.0 * n_neg.max(1) as f64))
    }

    pub fn with_balanced_alphas(&self, n_pos: usize, n_neg: usize) -> Self {
        let (alpha_pos, alpha_neg) = Self::balanced_alphas(n_pos, n_neg);
        SvmConfig {
            alpha_pos,
            alpha_neg,
            ..self.clone()
        }
    }
}

/// Feature vector with target `+1` or `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub x: FeatureVector,
    pub y: i8,
}

impl LabeledVector {
    pub fn new(x: FeatureVector, y: i8) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::InvalidArgument(format!(
                "svm target must be +1 or -1, got {y}"
            )));
        }
        Ok(LabeledVector { x, y })
    }

    pub fn from_bool(x: FeatureVector, positive: bool) -> Self {
        LabeledVector {
            x,
            y: if positive { 1 } else { -1 },
        }
    }
}

/// `w·w/2 + Σ α(y)·max(0, 1 − y(w·x + b))` in any numeric type.
pub fn hinge_objective<T>(w: &[T], b: &T, xs: &[Vec<T>], ys: &[i8], alpha_pos: &T, alpha_neg: &T) -> T
where
    T: Num + Clone + PartialOrd,
{
    let two = T::one() + T::one();
    let mut total = w.iter().fold(T::zero(), |acc, v| acc + v.clone() * v.clone()) / two;
    for (x, &y) in xs.iter().zip(ys) {
        let score = w
            .iter()
            .zip(x)
            .fold(b.clone(), |acc, (wi, xi)| acc + wi.clone() * xi.clone());
        let margin = if y > 0 { score } else { T::zero() - score };
        let slack = T::one() - margin;
        if slack > T::zero() {
            let alpha = if y > 0 {
                alpha_pos.clone()
            } else {
                alpha_neg.clone()
            };
            total = total + alpha * slack;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SvmModel<T: Scalar> {
    pub weights: Vec<T>,
    pub bias: T,
    pub scaler: Scaler<T>,
    pub config: SvmConfig,
    pub schema_id: String,
    /// Best objective seen after each epoch.
    pub objective_history: Vec<f64>,
}

fn check_uniform(data: &[LabeledVector]) -> Result<(&str, usize)> {
    let first = data
        .first()
        .ok_or_else(|| Error::InvalidArgument("svm training needs data".into()))?;
    let (schema, dim) = (first.x.schema_id.as_str(), first.x.len());
    for d in data {
        if d.x.schema_id != schema {
            return Err(Error::SchemaMismatch {
                expected: schema.to_string(),
                found: d.x.schema_id.clone(),
            });
        }
        if d.x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: d.x.len(),
            });
        }
        if d.y != 1 && d.y != -1 {
            return Err(Error::InvalidArgument(format!(
                "svm target must be +1 or -1, got {}",
                d.y
            )));
        }
        if d.x.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("svm training feature".into()));
        }
    }
    let pos = data.iter().filter(|d| d.y > 0).count();
    if pos == 0 || pos == data.len() {
        return Err(Error::SingleClass {
            stage: "svm".into(),
            present: if pos == 0 { "-1".into() } else { "+1".into() },
        });
    }
    Ok((schema, dim))
}

struct Fit<T> {
    weights: Vec<T>,
    bias: T,
    history: Vec<f64>,
}

fn objective<T: Scalar>(w: &[T], b: T, xs: &[Vec<T>], ys: &[i8], config: &SvmConfig) -> f64 {
    hinge_objective(w, &b, xs, ys, &T::of(config.alpha_pos), &T::of(config.alpha_neg)).to_f64_lossy()
}

fn subgradient_descent<T: Scalar>(xs: &[Vec<T>], ys: &[i8], config: &SvmConfig) -> Result<Fit<T>> {
    let dim = xs[0].len();
    let n = T::of(xs.len() as f64);
    let alpha_pos = T::of(config.alpha_pos);
    let alpha_neg = T::of(config.alpha_neg);
    let mut w = vec![T::zero(); dim];
    let mut b = T::zero();
    let mut best = (w.clone(), b, objective(&w, b, xs, ys, config));
    let mut history = Vec::with_capacity(config.epochs);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut previous = best.2;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let eta = T::of(config.learning_rate / (1.0 + epoch as f64));
        for &i in &order {
            let (x, y) = (&xs[i], T::of(ys[i] as f64));
            let margin = y * (dot(&w, x) + b);
            // per-sample share of the regularizer
            for wj in w.iter_mut() {
                *wj -= eta * *wj / n;
            }
            if margin < T::one() {
                let step = eta * if ys[i] > 0 { alpha_pos } else { alpha_neg } * y;
                for (wj, &xj) in w.iter_mut().zip(x) {
                    *wj += step * xj;
                }
                b += step;
            }
        }
        let obj = objective(&w, b, xs, ys, config);
        if !obj.is_finite() {
            return Err(Error::TrainingAborted(format!(
                "svm objective diverged at epoch {epoch}"
            )));
        }
        if obj < best.2 {
            best = (w.clone(), b, obj);
        }
        history.push(best.2);
        if (previous - obj).abs() <= config.tolerance * previous.abs().max(1.0) {
            break;
        }
        previous = obj;
    }
    Ok(Fit {
        weights: best.0,
        bias: best.1,
        history,
    })
}

/// Trains on already-scaled vectors; the model carries an identity scaler.
pub fn train_svm<T: Scalar>(data: &[LabeledVector], config: &SvmConfig) -> Result<SvmModel<T>> {
    config.validate()?;
    let (schema, dim) = check_uniform(data)?;
    let xs: Vec<Vec<T>> = data
        .iter()
        .map(|d| d.x.values.iter().map(|&v| T::of(v)).collect())
        .collect();
    let ys: Vec<i8> = data.iter().map(|d| d.y).collect();
    let fit = subgradient_descent(&xs, &ys, config)?;
    Ok(SvmModel {
        weights: fit.weights,
        bias: fit.bias,
        scaler: Scaler::identity(schema, dim),
        config: config.clone(),
        schema_id: schema.to_string(),
        objective_history: fit.history,
    })
}

/// Fits a scaler on the raw vectors, then trains on the scaled data.
pub fn fit_svm<T: Scalar>(
    features: &[FeatureVector],
    targets: &[bool],
    config: &SvmConfig,
) -> Result<SvmModel<T>> {
    if features.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: features.len(),
            found: targets.len(),
        });
    }
    config.validate()?;
    let scaler = Scaler::<T>::fit(features)?;
    let data: Vec<LabeledVector> = features
        .iter()
        .zip(targets)
        .map(|(x, &t)| LabeledVector::from_bool(x.clone(), t))
        .collect();
    check_uniform(&data)?;
    let xs = features
        .iter()
        .map(|x| scaler.apply(x))
        .collect::<Result<Vec<_>>>()?;
    let ys: Vec<i8> = data.iter().map(|d| d.y).collect();
    let fit = subgradient_descent(&xs, &ys, config)?;
    Ok(SvmModel {
        weights: fit.weights,
        bias: fit.bias,
        schema_id: scaler.schema_id.clone(),
        scaler,
        config: config.clone(),
        objective_history: fit.history,
    })
}

impl<T: Scalar> SvmModel<T> {
    /// Model with the given parameters and an identity scaler.
    pub fn from_parts(weights: Vec<T>, bias: T, schema_id: &str) -> Self {
        SvmModel {
            scaler: Scaler::identity(schema_id, weights.len()),
            weights,
            bias,
            config: SvmConfig::default(),
            schema_id: schema_id.to_string(),
            objective_history: Vec::new(),
        }
    }

    pub fn decision(&self, x: &FeatureVector) -> Result<T> {
        let z = self.scaler.apply(x)?;
        Ok(dot(&self.weights, &z) + self.bias)
    }

    /// `true` for the positive class; a zero decision counts as positive.
    pub fn predict(&self, x: &FeatureVector) -> Result<bool> {
        Ok(self.decision(x)? >= T::zero())
    }

    pub fn predict_sign(&self, x: &FeatureVector) -> Result<i8> {
        Ok(if self.predict(x)? { 1 } else { -1 })
    }

    /// Objective of this model on `data`, after applying its scaler.
    pub fn objective(&self, data: &[LabeledVector], config: &SvmConfig) -> Result<T> {
        let xs = data
            .iter()
            .map(|d| self.scaler.apply(&d.x))
            .collect::<Result<Vec<_>>>()?;
        let ys: Vec<i8> = data.iter().map(|d| d.y).collect();
        Ok(hinge_objective(
            &self.weights,
            &self.bias,
            &xs,
            &ys,
            &T::of(config.alpha_pos),
            &T::of(config.alpha_neg),
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        persist::to_string(KIND, T::NAME, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SvmModel<T> = persist::from_str(KIND, T::NAME, text)?;
        if model.weights.len() != model.scaler.dim() {
            return Err(Error::Format("svm weight and scaler lengths differ".into()));
        }
        if model.weights.iter().chain([&model.bias]).any(|v| !v.is_finite()) {
            return Err(Error::Format("svm parameters are not finite".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[f64], y: i8) -> LabeledVector {
        LabeledVector::new(FeatureVector::new(v.to_vec(), "t").unwrap(), y).unwrap()
    }

    #[test]
    fn zero_model_objective_and_tie() {
        let data = vec![lv(&[1.0], 1), lv(&[2.0], -1), lv(&[3.0], -1)];
        let cfg = SvmConfig {
            alpha_pos: 2.0,
            alpha_neg: 0.5,
            ..Default::default()
        };
        let m = SvmModel::<f64>::from_parts(vec![0.0], 0.0, "t");
        assert_eq!(m.objective(&data, &cfg).unwrap(), 3.0);
        assert_eq!(m.decision(&data[0].x).unwrap(), 0.0);
        assert!(m.predict(&data[0].x).unwrap());
    }

    #[test]
    fn separated_data_has_no_slack() {
        let data = vec![lv(&[2.0, 0.0], 1), lv(&[-2.0, 0.0], -1)];
        let m = SvmModel::<f64>::from_parts(vec![1.0, 0.5], 0.0, "t");
        assert_eq!(m.objective(&data, &SvmConfig::default()).unwrap(), 0.625);
    }

    #[test]
    fn decision_arithmetic() {
        let m = SvmModel::<f64>::from_parts(vec![1.0, 0.0], -1.0, "t");
        assert_eq!(m.decision(&lv(&[3.0, 5.0], 1).x).unwrap(), 2.0);
        let m = SvmModel::<f64>::from_parts(vec![0.7, -1.3], 0.0, "t");
        let x = lv(&[3.0, 5.0], 1).x;
        let neg = lv(&[-3.0, -5.0], 1).x;
        assert_eq!(m.decision(&neg).unwrap(), -m.decision(&x).unwrap());
    }

    #[test]
    fn symmetric_pair() {
        let data = vec![lv(&[-1.0], -1), lv(&[1.0], 1)];
        let cfg = SvmConfig {
            learning_rate: 0.5,
            epochs: 500,
            ..Default::default()
        };
        let m = train_svm::<f64>(&data, &cfg).unwrap();
        assert!((m.bias / m.weights[0]).abs() <= 0.1, "{m:?}");
        assert!(!m.predict(&data[0].x).unwrap() && m.predict(&data[1].x).unwrap());
    }

    #[test]
    fn rejects_single_class_and_bad_targets() {
        assert!(train_svm::<f64>(&[lv(&[1.0], 1), lv(&[2.0], 1)], &SvmConfig::default()).is_err());
        assert!(LabeledVector::new(FeatureVector::new(vec![1.0], "t").unwrap(), 0).is_err());
    }

    #[test]
    fn round_trip_and_newer_version() {
        let m = SvmModel::<f64>::from_parts(vec![0.1, -0.3], 0.7, "t");
        let text = m.to_json().unwrap();
        assert_eq!(SvmModel::<f64>::from_json(&text).unwrap(), m);
        assert!(SvmModel::<f32>::from_json(&text).is_err());
        let newer = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(
            SvmModel::<f64>::from_json(&newer),
            Err(Error::Format(_))
        ));
    }
}
