//! Decision functions on the one-dimensional feature `b(t)` and the
//! machinery to fit and score them against exact ground truth.
//!
//! The positive class is always "non-zero coefficient". Datasets built from a
//! tensor hold one row per canonical triple with its orbit weight, so every
//! accuracy below is an accuracy over ordered triples.

mod fit;
mod rules;
mod stats;

use rayon::prelude::*;

use crate::bloading::BLoadingTable;
use crate::error::{Error, Result};
use crate::kronecker::{orbit_weight, KroneckerTensor};

pub use fit::{
    bayes_upper_bound, best_threshold, cross_validate, fit_logistic, split_indices,
    LogisticFit, MajorityByValue, DEFAULT_SEED,
};
pub use rules::{
    f1_kan, f2_boundary, f2_logistic, f3_symbolic, fixed_snn, locate_crossing, sigma,
    snn_logit, F2_INTERCEPT, F2_SLOPE, SNN_BIAS, SNN_UNITS,
};
pub use stats::{gamma_moments, gamma_moments_weighted, GammaFit};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Row {
    pub b: f64,
    pub nonzero: bool,
    pub triple: (usize, usize, usize),
    /// Number of ordered triples this row stands for.
    pub weight: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    FullOrdered,
    CanonicalWeighted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub n: usize,
    pub rows: Vec<Row>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    /// One row per canonical triple, weighted by orbit size.
    pub fn from_tensor(tensor: &KroneckerTensor, table: &BLoadingTable) -> Result<Self> {
        if tensor.n() != table.n {
            return Err(Error::invalid(format!(
                "tensor n = {} but b-table n = {}",
                tensor.n(),
                table.n
            )));
        }
        let rows = tensor
            .iter()
            .map(|((i, j, k), g)| Row {
                b: table.b_sorted(i, j, k),
                nonzero: g != 0,
                triple: (i, j, k),
                weight: orbit_weight(i, j, k),
            })
            .collect();
        Ok(LabeledDataset {
            n: tensor.n(),
            rows,
            provenance: Provenance::CanonicalWeighted,
        })
    }

    /// Unit-weight rows from bare `(b, nonzero)` points, for synthetic data.
    pub fn from_points(points: &[(f64, bool)]) -> Self {
        LabeledDataset {
            n: 0,
            rows: points
                .iter()
                .enumerate()
                .map(|(i, &(b, nonzero))| Row {
                    b,
                    nonzero,
                    triple: (i, i, i),
                    weight: 1,
                })
                .collect(),
            provenance: Provenance::FullOrdered,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.rows.iter().map(|r| r.weight).sum()
    }

    /// Weighted fraction of non-zero rows.
    pub fn nonzero_fraction(&self) -> f64 {
        let nz: u64 = self.rows.iter().filter(|r| r.nonzero).map(|r| r.weight).sum();
        nz as f64 / self.total_weight() as f64
    }

    pub(crate) fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            n: self.n,
            rows: idx.iter().map(|&i| self.rows[i]).collect(),
            provenance: self.provenance,
        }
    }
}

/// A classifier on `b(t)`: `true` means "predict non-zero".
pub trait Predictor: Sync {
    fn predict(&self, b: f64) -> bool;

    /// Decision boundary in `b`, where one exists.
    fn boundary(&self) -> Option<f64> {
        None
    }
}

/// Every published rule plus the fitted ones, behind one type.
#[derive(Clone, Debug, PartialEq)]
pub enum DecisionRule {
    /// `σ(m − b) ≥ 1/2`.
    Kan { mean: f64 },
    /// Published logistic coefficients.
    Logistic,
    /// `F₃(b) ≥ 1/2`.
    Symbolic,
    /// Fixed seven-unit network.
    SmallNetwork,
    /// Non-zero iff `b < threshold`.
    Threshold(f64),
    /// `σ(slope·b + intercept) ≥ 1/2`.
    Fitted { slope: f64, intercept: f64 },
    Constant(bool),
}

impl Predictor for DecisionRule {
    fn predict(&self, b: f64) -> bool {
        match *self {
            DecisionRule::Kan { mean } => f1_kan(b, mean) >= 0.5,
            DecisionRule::Logistic => f2_logistic(b) >= 0.5,
            DecisionRule::Symbolic => f3_symbolic(b).is_some_and(|v| v >= 0.5),
            DecisionRule::SmallNetwork => fixed_snn(b) >= 0.5,
            DecisionRule::Threshold(t) => b < t,
            DecisionRule::Fitted { slope, intercept } => sigma(slope * b + intercept) >= 0.5,
            DecisionRule::Constant(c) => c,
        }
    }

    fn boundary(&self) -> Option<f64> {
        match *self {
            DecisionRule::Kan { mean } => Some(mean),
            DecisionRule::Logistic => Some(f2_boundary()),
            DecisionRule::Symbolic => {
                locate_crossing(|b| f3_symbolic(b).unwrap_or(f64::NAN), 0.5, 1.0, 300.0)
            }
            DecisionRule::SmallNetwork => locate_crossing(snn_logit, 0.0, 0.0, 300.0),
            DecisionRule::Threshold(t) => Some(t),
            DecisionRule::Fitted { slope, intercept } => Some(-intercept / slope),
            DecisionRule::Constant(_) => None,
        }
    }
}

impl<F: Fn(f64) -> bool + Sync> Predictor for F {
    fn predict(&self, b: f64) -> bool {
        self(b)
    }
}

/// Accuracy and confusion matrix. Rows are the truth (zero, non-zero),
/// columns the prediction (zero, non-zero); counts are ordered triples.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierReport {
    pub accuracy: f64,
    pub confusion: [[u64; 2]; 2],
    pub boundary: Option<f64>,
    pub split_seed: Option<u64>,
}

impl ClassifierReport {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    /// Share of the errors that were predicted non-zero.
    pub fn false_nonzero_share(&self) -> f64 {
        let fp = self.confusion[0][1];
        let fn_ = self.confusion[1][0];
        if fp + fn_ == 0 {
            0.0
        } else {
            fp as f64 / (fp + fn_) as f64
        }
    }
}

pub(crate) fn confusion<P: Predictor + ?Sized>(predictor: &P, rows: &[Row]) -> [[u64; 2]; 2] {
    rows.par_iter()
        .fold(
            || [[0u64; 2]; 2],
            |mut acc, r| {
                acc[r.nonzero as usize][predictor.predict(r.b) as usize] += r.weight;
                acc
            },
        )
        .reduce(
            || [[0u64; 2]; 2],
            |mut a, b| {
                for t in 0..2 {
                    for p in 0..2 {
                        a[t][p] += b[t][p];
                    }
                }
                a
            },
        )
}

pub fn evaluate<P: Predictor + ?Sized>(predictor: &P, data: &LabeledDataset) -> ClassifierReport {
    let confusion = confusion(predictor, &data.rows);
    let total: u64 = confusion.iter().flatten().sum();
    let correct = confusion[0][0] + confusion[1][1];
    ClassifierReport {
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        confusion,
        boundary: predictor.boundary(),
        split_seed: None,
    }
}
