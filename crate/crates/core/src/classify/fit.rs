//! Fitted classifiers: logistic regression by Newton's method, the
//! threshold stump, k-fold cross-validation and the majority-vote ceiling.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{confusion, evaluate, ClassifierReport, DecisionRule, LabeledDataset, Predictor, Row};
use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;

const NEWTON_TOLERANCE: f64 = 1e-10;
const NEWTON_MAX_ITERATIONS: usize = 100;

/// Rows in canonical triple order, then a ChaCha8 shuffle seeded with `seed`.
/// The result does not depend on the input row order.
pub fn split_indices(data: &LabeledDataset, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| row_key(&data.rows[a]).cmp(&row_key(&data.rows[b])));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx
}

fn row_key(r: &Row) -> ((usize, usize, usize), u64, bool, u64) {
    (r.triple, r.b.to_bits(), r.nonzero, r.weight)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticFit {
    pub slope: f64,
    pub intercept: f64,
    pub iterations: usize,
    /// Held-out evaluation.
    pub report: ClassifierReport,
}

impl LogisticFit {
    pub fn boundary(&self) -> f64 {
        -self.intercept / self.slope
    }

    pub fn rule(&self) -> DecisionRule {
        DecisionRule::Fitted {
            slope: self.slope,
            intercept: self.intercept,
        }
    }
}

/// Maximum-likelihood `σ(slope·b + intercept)` for "non-zero", fitted on a
/// seeded `train_fraction` split and scored on the rest.
pub fn fit_logistic(data: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<LogisticFit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie strictly between 0 and 1"));
    }
    let order = split_indices(data, seed);
    let cut = (train_fraction * order.len() as f64).round() as usize;
    let (train_idx, test_idx) = order.split_at(cut.min(order.len()));
    if test_idx.is_empty() || train_idx.is_empty() {
        return Err(Error::invalid("split leaves an empty train or test set"));
    }
    let train = data.subset(train_idx);
    let test = data.subset(test_idx);
    let (slope, intercept, iterations) = newton(&train.rows)?;
    let mut report = evaluate(&DecisionRule::Fitted { slope, intercept }, &test);
    report.split_seed = Some(seed);
    Ok(LogisticFit {
        slope,
        intercept,
        iterations,
        report,
    })
}

/// Newton iterations on the weighted log-likelihood in standardised `b`.
fn newton(rows: &[Row]) -> Result<(f64, f64, usize)> {
    let w_total: f64 = rows.iter().map(|r| r.weight as f64).sum();
    let w_pos: f64 = rows.iter().filter(|r| r.nonzero).map(|r| r.weight as f64).sum();
    if w_pos == 0.0 || w_pos == w_total {
        return Err(Error::Degenerate("training data holds a single class".into()));
    }
    let mean = rows.iter().map(|r| r.weight as f64 * r.b).sum::<f64>() / w_total;
    let var = rows
        .iter()
        .map(|r| r.weight as f64 * (r.b - mean).powi(2))
        .sum::<f64>()
        / w_total;
    if var <= 0.0 {
        return Err(Error::Degenerate("all training b values coincide".into()));
    }
    let scale = var.sqrt();
    let xs: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| ((r.b - mean) / scale, r.nonzero as u8 as f64, r.weight as f64))
        .collect();

    let loglik = |b0: f64, b1: f64| -> f64 {
        xs.iter()
            .map(|&(x, y, w)| {
                let z = b0 + b1 * x;
                // log σ(z) = -softplus(-z)
                let ll = if y > 0.5 { -softplus(-z) } else { -softplus(z) };
                w * ll
            })
            .sum()
    };

    let (mut b0, mut b1) = (0.0f64, 0.0f64);
    let mut current = loglik(b0, b1);
    let mut separable = false;
    let mut iterations = 0;
    for it in 1..=NEWTON_MAX_ITERATIONS {
        iterations = it;
        let (mut g0, mut g1, mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y, w) in &xs {
            let p = super::sigma(b0 + b1 * x);
            let r = w * (y - p);
            g0 += r;
            g1 += r * x;
            let v = w * p * (1.0 - p);
            h00 += v;
            h01 += v * x;
            h11 += v * x * x;
        }
        let det = h00 * h11 - h01 * h01;
        // Also catches a NaN determinant.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        let singular = !(det > 1e-300 * w_total * w_total);
        if singular {
            separable = true;
            break;
        }
        let d0 = (h11 * g0 - h01 * g1) / det;
        let d1 = (h00 * g1 - h01 * g0) / det;
        // Step halving keeps the likelihood non-decreasing.
        let mut t = 1.0;
        let (mut n0, mut n1, mut next) = (b0 + d0, b1 + d1, loglik(b0 + d0, b1 + d1));
        while next < current && t > 1e-8 {
            t *= 0.5;
            n0 = b0 + t * d0;
            n1 = b1 + t * d1;
            next = loglik(n0, n1);
        }
        let change = (n0 - b0).abs().max((n1 - b1).abs());
        b0 = n0;
        b1 = n1;
        current = next;
        if change < NEWTON_TOLERANCE {
            return Ok(unstandardise(b0, b1, mean, scale, it));
        }
    }
    // Separated classes drive |slope| to infinity; the boundary is still
    // meaningful as long as the training rows are all classified correctly.
    let rule = DecisionRule::Fitted {
        slope: b1,
        intercept: b0,
    };
    let perfect = xs.iter().all(|&(x, y, _)| rule.predict(x) == (y > 0.5));
    if perfect && (separable || iterations == NEWTON_MAX_ITERATIONS) {
        return Ok(unstandardise(b0, b1, mean, scale, iterations));
    }
    Err(Error::Convergence { iterations })
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn unstandardise(b0: f64, b1: f64, mean: f64, scale: f64, it: usize) -> (f64, f64, usize) {
    let slope = b1 / scale;
    (slope, b0 - slope * mean, it)
}

/// Distinct b values in ascending order with their (zero, non-zero) weights.
fn grouped_exact(rows: &[Row]) -> Vec<(f64, u64, u64)> {
    let mut sorted: Vec<&Row> = rows.iter().collect();
    sorted.sort_by(|a, b| a.b.total_cmp(&b.b));
    let mut groups: Vec<(f64, u64, u64)> = Vec::new();
    for r in sorted {
        match groups.last_mut() {
            Some(g) if g.0 == r.b => {
                if r.nonzero {
                    g.2 += r.weight
                } else {
                    g.1 += r.weight
                }
            }
            _ => {
                let (z, nz) = if r.nonzero { (0, r.weight) } else { (r.weight, 0) };
                groups.push((r.b, z, nz));
            }
        }
    }
    groups
}

/// Best rule "non-zero iff `b < threshold`". Candidate thresholds are the
/// midpoints between consecutive distinct b values plus `±∞`; the smallest
/// threshold wins ties.
pub fn best_threshold(data: &LabeledDataset) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::invalid("best_threshold needs at least one row"));
    }
    let groups = grouped_exact(&data.rows);
    let total: u64 = groups.iter().map(|g| g.1 + g.2).sum();
    let mut correct: i128 = groups.iter().map(|g| g.1 as i128).sum();
    let mut best = (f64::NEG_INFINITY, correct);
    for (idx, &(b, zero, nonzero)) in groups.iter().enumerate() {
        correct += nonzero as i128 - zero as i128;
        if correct > best.1 {
            let threshold = match groups.get(idx + 1) {
                // Adjacent values one ulp apart have no representable midpoint.
                Some(next) => {
                    let mid = 0.5 * (b + next.0);
                    if mid > b && mid <= next.0 {
                        mid
                    } else {
                        next.0
                    }
                }
                None => f64::INFINITY,
            };
            best = (threshold, correct);
        }
    }
    Ok((best.0, best.1 as f64 / total as f64))
}

/// Seeded k-fold cross-validation of [`best_threshold`]; returns the mean
/// and (population) standard deviation of the held-out fold accuracies.
pub fn cross_validate(data: &LabeledDataset, folds: usize, seed: u64) -> Result<(f64, f64)> {
    if folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if folds > data.len() {
        return Err(Error::invalid(format!(
            "{folds} folds requested for {} rows",
            data.len()
        )));
    }
    let order = split_indices(data, seed);
    let len = order.len();
    let mut accs = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = len / folds + usize::from(f < len % folds);
        let held: Vec<usize> = order[start..start + size].to_vec();
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        start += size;
        let (threshold, _) = best_threshold(&data.subset(&train))?;
        let c = confusion(&DecisionRule::Threshold(threshold), &data.subset(&held).rows);
        let total: u64 = c.iter().flatten().sum();
        accs.push((c[0][0] + c[1][1]) as f64 / total as f64);
    }
    let mean = accs.iter().sum::<f64>() / folds as f64;
    let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / folds as f64;
    Ok((mean, var.sqrt()))
}

/// Resolution used to decide that two b values are the same. Conjugate
/// partitions have equal b-loadings in exact arithmetic but the computed
/// values can differ in the last few bits.
const VALUE_QUANTUM: f64 = 1e-8;

fn value_key(b: f64) -> i64 {
    (b / VALUE_QUANTUM).round() as i64
}

/// Majority label per distinct b value.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorityByValue {
    labels: BTreeMap<i64, bool>,
}

impl MajorityByValue {
    pub fn fit(data: &LabeledDataset) -> Self {
        let mut tally: BTreeMap<i64, (u64, u64)> = BTreeMap::new();
        for r in &data.rows {
            let e = tally.entry(value_key(r.b)).or_default();
            if r.nonzero {
                e.1 += r.weight;
            } else {
                e.0 += r.weight;
            }
        }
        MajorityByValue {
            labels: tally.into_iter().map(|(k, (z, nz))| (k, nz >= z)).collect(),
        }
    }
}

impl Predictor for MajorityByValue {
    /// Unseen values fall back to "non-zero".
    fn predict(&self, b: f64) -> bool {
        self.labels.get(&value_key(b)).copied().unwrap_or(true)
    }
}

/// Accuracy of the per-value majority vote: the best any classifier that
/// only sees `b(t)` can do on this data.
pub fn bayes_upper_bound(data: &LabeledDataset) -> f64 {
    evaluate(&MajorityByValue::fit(data), data).accuracy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloading::b_loadings;
    use crate::characters::character_table;
    use crate::kronecker::kronecker_tensor;

    fn separable() -> LabeledDataset {
        let mut pts = Vec::new();
        for rep in 0..10 {
            for i in 0..=45 {
                pts.push((i as f64 + rep as f64 * 1e-3, true));
            }
            for i in 55..=100 {
                pts.push((i as f64 + rep as f64 * 1e-3, false));
            }
        }
        LabeledDataset::from_points(&pts)
    }

    fn real(n: usize) -> LabeledDataset {
        let chars = character_table(n).unwrap();
        let tensor = kronecker_tensor(n, &chars).unwrap();
        LabeledDataset::from_tensor(&tensor, &b_loadings(n).unwrap()).unwrap()
    }

    #[test]
    fn logistic_on_separated_data() {
        let fit = fit_logistic(&separable(), 0.66, 7).unwrap();
        assert!(fit.slope < 0.0);
        let edge = fit.boundary();
        assert!(edge > 45.009 && edge < 55.0, "{edge}");
        assert_eq!(fit.report.accuracy, 1.0);
        assert_eq!(fit.report.split_seed, Some(7));
    }

    #[test]
    fn logistic_recovers_a_known_model() {
        // Deterministic labels drawn from σ(-0.1 b + 5) by quantile.
        let mut pts = Vec::new();
        for i in 0..2000 {
            let b = i as f64 * 0.05;
            let p = super::super::sigma(-0.1 * b + 5.0);
            let u = ((i * 7919) % 1000) as f64 / 1000.0 + 0.0005;
            pts.push((b, u < p));
        }
        let fit = fit_logistic(&LabeledDataset::from_points(&pts), 0.66, 1).unwrap();
        assert!((fit.boundary() - 50.0).abs() < 3.0, "{}", fit.boundary());
        assert!(fit.slope < 0.0);
    }

    #[test]
    fn logistic_rejects_single_class() {
        let data = LabeledDataset::from_points(&[(1.0, true), (2.0, true), (3.0, true)]);
        assert!(matches!(fit_logistic(&data, 0.66, 1), Err(Error::Degenerate(_))));
        assert!(fit_logistic(&data, 1.0, 1).is_err());
    }

    #[test]
    fn threshold_cases() {
        let data = LabeledDataset::from_points(&[(1.0, true), (9.0, true), (21.0, false), (30.0, false)]);
        let (t, acc) = best_threshold(&data).unwrap();
        assert_eq!(acc, 1.0);
        assert!(t > 10.0 && t < 20.0);
        let one = LabeledDataset::from_points(&[(5.0, false)]);
        let (t, acc) = best_threshold(&one).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(t, f64::NEG_INFINITY);
        let one = LabeledDataset::from_points(&[(5.0, true)]);
        assert_eq!(best_threshold(&one).unwrap(), (f64::INFINITY, 1.0));
        assert!(best_threshold(&LabeledDataset::from_points(&[])).is_err());
    }

    #[test]
    fn threshold_beats_the_prior_and_bayes_beats_threshold() {
        for n in 5..=10 {
            let data = real(n);
            let (_, acc) = best_threshold(&data).unwrap();
            let prior = data.nonzero_fraction().max(1.0 - data.nonzero_fraction());
            assert!(acc >= prior - 1e-12);
            assert!(bayes_upper_bound(&data) >= acc - 1e-12);
        }
    }

    #[test]
    fn threshold_sweep_matches_direct_scoring() {
        let data = real(8);
        let (t, acc) = best_threshold(&data).unwrap();
        let rep = evaluate(&DecisionRule::Threshold(t), &data);
        assert!((rep.accuracy - acc).abs() < 1e-12);
    }

    #[test]
    fn cross_validation_contract() {
        let data = separable();
        assert_eq!(cross_validate(&data, 10, 3).unwrap(), (1.0, 0.0));
        let real = real(9);
        let a = cross_validate(&real, 10, 42).unwrap();
        assert_eq!(a, cross_validate(&real, 10, 42).unwrap());
        let mut reversed = real.clone();
        reversed.rows.reverse();
        assert_eq!(a, cross_validate(&reversed, 10, 42).unwrap());
        assert!(cross_validate(&data, 1, 3).is_err());
        let tiny = LabeledDataset::from_points(&[(1.0, true), (2.0, false)]);
        assert!(cross_validate(&tiny, 3, 3).is_err());
    }

    #[test]
    fn bayes_cases() {
        let exact = LabeledDataset::from_points(&[(1.0, true), (2.0, false), (3.0, true)]);
        assert_eq!(bayes_upper_bound(&exact), 1.0);
        let shared = LabeledDataset::from_points(&[(4.0, true), (4.0, true), (4.0, true), (4.0, false)]);
        assert_eq!(bayes_upper_bound(&shared), 0.75);
    }

    #[test]
    fn split_is_order_independent() {
        let data = real(6);
        let mut rev = data.clone();
        rev.rows.reverse();
        let a: Vec<_> = split_indices(&data, 5).iter().map(|&i| data.rows[i].triple).collect();
        let b: Vec<_> = split_indices(&rev, 5).iter().map(|&i| rev.rows[i].triple).collect();
        assert_eq!(a, b);
    }
}
