//! From-scratch classifiers, stratified cross-validation, metrics and the
//! stability summary.
//!
//! Every sample matrix is reduced to one vector by averaging its rows; the
//! pooled vectors are standardized with statistics of the training fold
//! before any model sees them.

pub mod cv;
pub mod gnb;
pub mod knn;
pub mod metrics;
pub mod softmax;
pub mod stability;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::derive_seed;
use crate::error::{Error, Result};
use crate::fusion::{Kind, Representation, ZScaler};

pub use cv::stratified_kfold;
pub use gnb::GaussianNb;
pub use knn::Knn;
pub use metrics::{metrics, Metrics};
pub use softmax::{softmax_train, SoftmaxConfig, SoftmaxModel};
pub use stability::{ranking, stability_report, MethodStability, MetricStability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Softmax,
    Knn,
    Gnb,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Softmax, Model::Knn, Model::Gnb];

    pub fn name(&self) -> &'static str {
        match self {
            Model::Softmax => "softmax",
            Model::Knn => "knn",
            Model::Gnb => "gnb",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "softmax" => Ok(Model::Softmax),
            "knn" => Ok(Model::Knn),
            "gnb" | "nb" => Ok(Model::Gnb),
            other => Err(Error::InvalidConfig(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub n_splits: usize,
    pub softmax: SoftmaxConfig,
    pub knn_k: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            n_splits: 5,
            softmax: SoftmaxConfig::default(),
            knn_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub model: String,
    pub method: String,
    pub fold: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub macro_auc: f64,
}

/// Per-column mean and standard deviation; zero-variance columns keep
/// unit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(xs: &[&Vec<f64>]) -> Result<Self> {
        let first = xs.first().ok_or(Error::EmptyTrain)?;
        let d = first.len();
        let n = xs.len() as f64;
        let mut mean = vec![0.0; d];
        for x in xs {
            mean.iter_mut().zip(x.iter()).for_each(|(m, v)| *m += v / n);
        }
        let mut var = vec![0.0; d];
        for x in xs {
            for j in 0..d {
                var[j] += (x[j] - mean[j]).powi(2) / n;
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                if v.sqrt() > 1e-12 * (1.0 + v.sqrt()) {
                    v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Number of classes implied by the largest label.
pub fn n_classes(labels: &[u8]) -> usize {
    labels.iter().copied().max().map_or(0, |m| m as usize + 1)
}

/// Pooled, standardized train and test vectors for one fold. HSTF feature
/// columns are standardized on the training rows before pooling.
fn fold_vectors(rep: &Representation, train: &[usize], test: &[usize]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let pooled: Vec<Vec<f64>> = if rep.kind == Kind::Hstf {
        let scaler = ZScaler::fit(&rep.samples, train, rep.window_len)?;
        rep.samples.iter().map(|s| scaler.apply(s).mean_pooled()).collect()
    } else {
        rep.samples.iter().map(|s| s.mean_pooled()).collect()
    };
    let train_refs: Vec<&Vec<f64>> = train.iter().map(|&i| &pooled[i]).collect();
    let st = Standardizer::fit(&train_refs)?;
    Ok((
        train.iter().map(|&i| st.apply(&pooled[i])).collect(),
        test.iter().map(|&i| st.apply(&pooled[i])).collect(),
    ))
}

/// Fits `model` and returns predicted labels and per-class scores.
pub fn fit_predict(
    model: Model,
    train_x: &[Vec<f64>],
    train_y: &[u8],
    test_x: &[Vec<f64>],
    n_classes: usize,
    cfg: &ClassifyConfig,
    seed: u64,
) -> Result<(Vec<u8>, Vec<Vec<f64>>)> {
    let out: Vec<(usize, Vec<f64>)> = match model {
        Model::Softmax => {
            let m = softmax_train(train_x, train_y, n_classes, &cfg.softmax, seed)?;
            test_x.iter().map(|x| m.predict(x)).collect()
        }
        Model::Knn => {
            let m = Knn::fit(train_x, train_y, n_classes, cfg.knn_k)?;
            test_x.par_iter().map(|x| m.predict(x)).collect()
        }
        Model::Gnb => {
            let m = GaussianNb::fit(train_x, train_y, n_classes)?;
            test_x.iter().map(|x| m.predict(x)).collect()
        }
    };
    Ok(out.into_iter().map(|(l, s)| (l as u8, s)).unzip())
}

/// Stratified k-fold evaluation of each model on `rep`. Results are ordered
/// by model (as given) and then fold. Fold `f` is trained with seed
/// `derive_seed(seed, f)`; the split itself uses `seed`.
pub fn cross_validate(
    rep: &Representation,
    models: &[Model],
    cfg: &ClassifyConfig,
    seed: u64,
) -> Result<Vec<FoldResult>> {
    let labels = rep.labels();
    let k = n_classes(&labels);
    if k < 2 {
        return Err(Error::DegenerateLabels("need at least two classes"));
    }
    let folds = stratified_kfold(&labels, cfg.n_splits, seed)?;
    let method = rep.method_label();
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let train = cv::complement(labels.len(), test);
            let (train_x, test_x) = fold_vectors(rep, &train, test)?;
            let train_y: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
            let test_y: Vec<u8> = test.iter().map(|&i| labels[i]).collect();
            models
                .iter()
                .map(|&m| {
                    let (pred, scores) =
                        fit_predict(m, &train_x, &train_y, &test_x, k, cfg, derive_seed(seed, f as u64))?;
                    let r = metrics(&test_y, &pred, &scores, k)?;
                    Ok(FoldResult {
                        model: m.name().to_string(),
                        method: method.clone(),
                        fold: f,
                        accuracy: r.accuracy,
                        macro_f1: r.macro_f1,
                        macro_auc: r.macro_auc,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(models.len() * folds.len());
    for mi in 0..models.len() {
        for fold in &per_fold {
            out.push(fold[mi].clone());
        }
    }
    Ok(out)
}

/// Fold-averaged `[accuracy, macro_f1, macro_auc]` per model and method,
/// in first-seen order.
pub fn fold_means(results: &[FoldResult]) -> Vec<(String, String, [f64; 3], [f64; 3])> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in results {
        let key = (r.model.clone(), r.method.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(model, method)| {
            let rows: Vec<[f64; 3]> = results
                .iter()
                .filter(|r| r.model == model && r.method == method)
                .map(|r| [r.accuracy, r.macro_f1, r.macro_auc])
                .collect();
            let n = rows.len() as f64;
            let mut mean = [0.0; 3];
            let mut std = [0.0; 3];
            for k in 0..3 {
                mean[k] = rows.iter().map(|r| r[k]).sum::<f64>() / n;
                std[k] = (rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n).sqrt();
            }
            (model, method, mean, std)
        })
        .collect()
}

/// Stability rows per method, computed across the models' fold means.
pub fn stability_from_results(results: &[FoldResult]) -> Result<Vec<MethodStability>> {
    let means = fold_means(results);
    let mut methods: Vec<(String, Vec<[f64; 3]>)> = Vec::new();
    for (_, method, mean, _) in means {
        match methods.iter_mut().find(|(m, _)| *m == method) {
            Some((_, rows)) => rows.push(mean),
            None => methods.push((method, vec![mean])),
        }
    }
    stability_report(&methods)
}
