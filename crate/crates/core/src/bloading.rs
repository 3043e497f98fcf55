//! Difference matrix `Z_n`, its Perron vector, and the b-loadings derived
//! from it: `b_λ = 100 (w_λ - w_min) / (w_max - w_min)`, `b(t) = b_λ + b_μ + b_ν`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::characters::CharacterTable;
use crate::error::{Error, Result};
use crate::kronecker::{sort3, ClassSums, KroneckerTensor};
use crate::partitions::{l1_unchecked, PartitionSet, MAX_ENUMERATION_N};

pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 10_000;

/// Symmetric `p(n) × p(n)` matrix of pairwise L1 distances. Entries are at
/// most `2(n - 1)` and are stored as bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceMatrix {
    n: usize,
    p: usize,
    entries: Vec<u8>,
}

impl DifferenceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.p + j] as u32
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.entries[i * self.p..(i + 1) * self.p]
    }
}

pub fn difference_matrix(n: usize) -> Result<DifferenceMatrix> {
    if !(1..=MAX_ENUMERATION_N).contains(&n) {
        return Err(Error::UnsupportedSize {
            what: "difference matrix",
            n,
            min: 1,
            max: MAX_ENUMERATION_N,
        });
    }
    let set = PartitionSet::new(n)?;
    Ok(difference_matrix_of(&set))
}

fn difference_matrix_of(set: &PartitionSet) -> DifferenceMatrix {
    let p = set.len();
    let items = set.as_slice();
    let entries: Vec<u8> = items
        .par_iter()
        .flat_map_iter(|a| items.iter().map(move |b| l1_unchecked(a.parts(), b.parts()) as u8))
        .collect();
    DifferenceMatrix {
        n: set.n(),
        p,
        entries,
    }
}

/// Dominant eigenpair of a difference matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PerronVector {
    pub eigenvalue: f64,
    /// Unit Euclidean norm, strictly positive.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

fn mat_vec(z: &DifferenceMatrix, w: &[f64]) -> Vec<f64> {
    (0..z.p)
        .map(|i| z.row(i).iter().zip(w).map(|(&a, &x)| a as f64 * x).sum())
        .collect()
}

fn unit(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Power iteration from the all-ones vector, renormalised every step.
/// Stops when successive iterates agree to [`POWER_TOLERANCE`] in ∞-norm.
pub fn perron_vector(z: &DifferenceMatrix) -> Result<PerronVector> {
    let p = z.p;
    let mut w = vec![1.0; p];
    unit(&mut w);
    for iteration in 1..=POWER_MAX_ITERATIONS {
        let mut next = mat_vec(z, &w);
        if unit(&mut next) == 0.0 {
            // Zero matrix (n = 1).
            return Ok(PerronVector {
                eigenvalue: 0.0,
                vector: w,
                iterations: iteration,
            });
        }
        let delta = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        if delta < POWER_TOLERANCE {
            let zw = mat_vec(z, &w);
            let eigenvalue = zw.iter().zip(&w).map(|(a, b)| a * b).sum();
            if w.iter().any(|&x| x <= 0.0) {
                return Err(Error::Inconsistent("Perron vector has a non-positive entry".into()));
            }
            return Ok(PerronVector {
                eigenvalue,
                vector: w,
                iterations: iteration,
            });
        }
    }
    Err(Error::Convergence {
        iterations: POWER_MAX_ITERATIONS,
    })
}

/// `‖Z w − λ w‖∞`.
pub fn eigen_residual(z: &DifferenceMatrix, pv: &PerronVector) -> f64 {
    mat_vec(z, &pv.vector)
        .iter()
        .zip(&pv.vector)
        .map(|(a, b)| (a - pv.eigenvalue * b).abs())
        .fold(0.0, f64::max)
}

/// b-loadings of every partition of `n` plus the ordered-triple moments of `b(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BLoadingTable {
    pub n: usize,
    pub partitions: PartitionSet,
    pub eigenvalue: f64,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    /// Mean of `b(t)` over all ordered triples (`m`).
    pub mean_b3: f64,
    /// Standard deviation of `b(t)` over all ordered triples (`s`).
    pub std_b3: f64,
}

impl BLoadingTable {
    pub fn size(&self) -> usize {
        self.b.len()
    }

    /// `b(t)`, summed in ascending index order.
    pub fn b_of_triple(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        let p = self.size();
        if i >= p || j >= p || k >= p {
            return Err(Error::invalid(format!(
                "triple ({i}, {j}, {k}) out of range for p({}) = {p}",
                self.n
            )));
        }
        let (a, b, c) = sort3(i, j, k);
        Ok(self.b_sorted(a, b, c))
    }

    #[inline]
    pub(crate) fn b_sorted(&self, a: usize, b: usize, c: usize) -> f64 {
        self.b[a] + self.b[b] + self.b[c]
    }

    /// Rebuilds a table from the Perron data (cache reader).
    pub fn from_parts(n: usize, eigenvalue: f64, w: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let partitions = PartitionSet::new(n)?;
        if w.len() != partitions.len() || b.len() != partitions.len() {
            return Err(Error::invalid(format!(
                "b-table for n = {n} needs {} entries",
                partitions.len()
            )));
        }
        let (mean_b3, std_b3) = triple_moments(&b);
        Ok(BLoadingTable {
            n,
            partitions,
            eigenvalue,
            w,
            b,
            mean_b3,
            std_b3,
        })
    }
}

/// `b(t)` is a sum of three independent uniform draws from the `b` values,
/// so its mean is `3·mean(b)` and its variance `3·var(b)`.
fn triple_moments(b: &[f64]) -> (f64, f64) {
    let p = b.len() as f64;
    let mean = b.iter().sum::<f64>() / p;
    let var = b.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / p;
    (3.0 * mean, (3.0 * var).sqrt())
}

pub fn b_loadings(n: usize) -> Result<BLoadingTable> {
    if n < 3 {
        return Err(Error::Degenerate(format!(
            "b-loadings are undefined for n = {n} (w_max = w_min)"
        )));
    }
    let set = PartitionSet::new(n)?;
    let z = difference_matrix_of(&set);
    let pv = perron_vector(&z)?;
    let w = pv.vector;
    let w_min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let w_max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if w_max - w_min <= 0.0 {
        return Err(Error::Degenerate(format!("w_max = w_min for n = {n}")));
    }
    let b: Vec<f64> = w.iter().map(|&x| 100.0 * ((x - w_min) / (w_max - w_min))).collect();
    let (mean_b3, std_b3) = triple_moments(&b);
    Ok(BLoadingTable {
        n,
        partitions: set,
        eigenvalue: pv.eigenvalue,
        w,
        b,
        mean_b3,
        std_b3,
    })
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("inputs disagree on n ({a} vs {b})")));
    }
    Ok(())
}

/// Minimal `b(t)` over vanishing coefficients, with its canonical triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BStar {
    pub value: f64,
    pub triple: (usize, usize, usize),
}

/// `b★ = min { b(t) : g(t) = 0 }` from a materialised tensor.
pub fn b_star(tensor: &KroneckerTensor, table: &BLoadingTable) -> Result<BStar> {
    check_same_n(tensor.n(), table.n)?;
    tensor
        .iter()
        .filter(|&(_, g)| g == 0)
        .map(|((i, j, k), _)| BStar {
            value: table.b_sorted(i, j, k),
            triple: (i, j, k),
        })
        .min_by(|x, y| x.value.total_cmp(&y.value).then(x.triple.cmp(&y.triple)))
        .ok_or(Error::NoZeroCoefficient(tensor.n()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScanOutcome {
    /// First vanishing coefficient in ascending `b(t)` order.
    Exact(BStar),
    /// Budget ran out; every triple with `b(t)` below `value` was non-zero.
    LowerBound { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanResult {
    pub outcome: ScanOutcome,
    pub evaluations: u64,
}

struct Candidate {
    key: f64,
    triple: (usize, usize, usize),
    pos: (usize, usize, usize),
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.triple.cmp(&other.triple))
    }
}

/// Yields canonical triples in ascending `b(t)`.
///
/// Positions `a ≤ c ≤ d` index the b-values sorted ascending; each multiset
/// has exactly one parent (`d-1`, else `(c-1, c-1)`, else `(a-1, a-1, a-1)`)
/// whose sum is no larger, so a heap over the frontier suffices.
struct AscendingTriples<'a> {
    table: &'a BLoadingTable,
    order: Vec<usize>,
    heap: BinaryHeap<Reverse<Candidate>>,
}

impl<'a> AscendingTriples<'a> {
    fn new(table: &'a BLoadingTable) -> Self {
        let mut order: Vec<usize> = (0..table.size()).collect();
        order.sort_by(|&x, &y| table.b[x].total_cmp(&table.b[y]).then(x.cmp(&y)));
        let mut it = AscendingTriples {
            table,
            order,
            heap: BinaryHeap::new(),
        };
        if table.size() > 0 {
            it.push((0, 0, 0));
        }
        it
    }

    fn push(&mut self, pos: (usize, usize, usize)) {
        let (i, j, k) = sort3(self.order[pos.0], self.order[pos.1], self.order[pos.2]);
        self.heap.push(Reverse(Candidate {
            key: self.table.b_sorted(i, j, k),
            triple: (i, j, k),
            pos,
        }));
    }

    fn peek_key(&self) -> Option<f64> {
        self.heap.peek().map(|c| c.0.key)
    }
}

impl Iterator for AscendingTriples<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        let Reverse(top) = self.heap.pop()?;
        let (a, c, d) = top.pos;
        let p = self.order.len();
        if d + 1 < p {
            self.push((a, c, d + 1));
        }
        if d == c && c + 1 < p {
            self.push((a, c + 1, c + 1));
        }
        if a == c && c == d && a + 1 < p {
            self.push((a + 1, a + 1, a + 1));
        }
        Some(top)
    }
}

const SCAN_BATCH: usize = 2048;

/// Keys within this distance of the first zero are re-examined so that
/// rounding in `b(t)` cannot hide a smaller zero behind the heap order.
const SCAN_SLACK: f64 = 1e-9;

/// Finds `b★` without a materialised tensor by evaluating `g` in ascending
/// `b(t)` order until the first zero. Batches are evaluated in parallel; the
/// first zero in scan order wins, so the result is thread-count independent.
pub fn b_star_scan(
    n: usize,
    table: &BLoadingTable,
    chars: &CharacterTable,
    budget: u64,
) -> Result<ScanResult> {
    if budget == 0 {
        return Err(Error::invalid("scan budget must be positive"));
    }
    check_same_n(n, table.n)?;
    check_same_n(n, chars.n())?;
    let sums = ClassSums::new(chars)?;
    let mut triples = AscendingTriples::new(table);
    let mut used: u64 = 0;
    let mut last_key = 0.0f64;
    let mut best: Option<BStar> = None;

    let consider = |best: &mut Option<BStar>, key: f64, triple| {
        let cand = BStar { value: key, triple };
        let better = match best {
            None => true,
            Some(b) => key.total_cmp(&b.value).then(triple.cmp(&b.triple)) == Ordering::Less,
        };
        if better {
            *best = Some(cand);
        }
    };

    while best.is_none() {
        let room = (budget - used).min(SCAN_BATCH as u64) as usize;
        if room == 0 {
            return Ok(ScanResult {
                outcome: ScanOutcome::LowerBound { value: last_key },
                evaluations: used,
            });
        }
        let batch: Vec<Candidate> = triples.by_ref().take(room).collect();
        if batch.is_empty() {
            return Err(Error::NoZeroCoefficient(n));
        }
        let values: Vec<u64> = batch
            .par_iter()
            .map(|c| sums.coefficient(c.triple.0, c.triple.1, c.triple.2))
            .collect::<Result<_>>()?;
        let mut threshold = f64::INFINITY;
        for (cand, g) in batch.iter().zip(values) {
            if cand.key > threshold {
                break;
            }
            used += 1;
            last_key = cand.key;
            if g == 0 {
                consider(&mut best, cand.key, cand.triple);
                threshold = best.map_or(f64::INFINITY, |b| b.value + SCAN_SLACK);
            }
        }
    }

    let limit = best.map_or(f64::INFINITY, |b| b.value + SCAN_SLACK);
    while triples.peek_key().is_some_and(|k| k <= limit) {
        let Some(cand) = triples.next() else { break };
        used += 1;
        if sums.coefficient(cand.triple.0, cand.triple.1, cand.triple.2)? == 0 {
            consider(&mut best, cand.key, cand.triple);
        }
    }
    let best = best.ok_or(Error::NoZeroCoefficient(n))?;
    Ok(ScanResult {
        outcome: ScanOutcome::Exact(best),
        evaluations: used,
    })
}

/// Ordered triples with `b(t) < threshold`, and `p(n)³`.
///
/// For each ordered pair `(i, j)` a binary search over the sorted b-values
/// counts admissible `k`. Candidates within a whisker of the threshold are
/// rechecked with [`BLoadingTable::b_of_triple`], so the count agrees exactly
/// with a direct loop over all triples.
pub fn count_below(table: &BLoadingTable, threshold: f64) -> (u64, u64) {
    let p = table.size();
    let total = (p as u64).pow(3);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| table.b[x].total_cmp(&table.b[y]));
    let sorted: Vec<f64> = order.iter().map(|&i| table.b[i]).collect();
    let slack = 1e-9 * threshold.abs().max(1.0);
    let count = (0..p)
        .into_par_iter()
        .map(|i| {
            let mut row: u64 = 0;
            for j in 0..p {
                let pair = table.b[i] + table.b[j];
                let lo = sorted.partition_point(|&x| pair + x < threshold - slack);
                let hi = sorted.partition_point(|&x| pair + x < threshold + slack);
                row += lo as u64;
                for &k in &order[lo..hi] {
                    let (a, b, c) = sort3(i, j, k);
                    if table.b_sorted(a, b, c) < threshold {
                        row += 1;
                    }
                }
            }
            row
        })
        .sum();
    (count, total)
}
