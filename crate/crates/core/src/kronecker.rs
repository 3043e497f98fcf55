//! Kronecker coefficients `g_{λ,μ}^ν` from the character inner product
//! `g = (1/n!) Σ_ρ |C_ρ| χ_λ(ρ) χ_μ(ρ) χ_ν(ρ)`.
//!
//! Class sums run in `i128`. When a cheap magnitude bound shows the sum
//! cannot overflow, the unchecked kernel is used; otherwise every step is
//! checked and an overflow switches to arbitrary precision.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::characters::{factorial, CharacterTable};
use crate::error::{Error, Result};
use crate::partitions::Partition;

/// Largest `n` for which the whole tensor is materialised.
pub const MAX_TENSOR_N: usize = 16;

/// Number of distinct orderings of `(i, j, k)`: 1, 3 or 6.
pub fn orbit_weight(i: usize, j: usize, k: usize) -> u64 {
    match (i == j, j == k, i == k) {
        (true, true, _) => 1,
        (false, false, false) => 6,
        _ => 3,
    }
}

pub(crate) fn sort3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let mut t = [i, j, k];
    t.sort_unstable();
    (t[0], t[1], t[2])
}

/// Precomputed rows `|C_ρ| · χ_λ(ρ)` shared by every class sum.
#[derive(Clone, Debug)]
pub struct ClassSums<'a> {
    table: &'a CharacterTable,
    weighted: Vec<Vec<i128>>,
    weighted_l1: Vec<u128>,
    row_max: Vec<u128>,
    nfact: i128,
}

impl<'a> ClassSums<'a> {
    pub fn new(table: &'a CharacterTable) -> Result<Self> {
        let p = table.size();
        let sizes: Vec<i128> = table.classes().iter().map(|c| c.class_size as i128).collect();
        let weighted: Vec<Vec<i128>> = (0..p)
            .map(|l| {
                table
                    .row(l)
                    .iter()
                    .zip(&sizes)
                    .map(|(&x, &s)| x as i128 * s)
                    .collect()
            })
            .collect();
        let weighted_l1 = weighted
            .iter()
            .map(|w| w.iter().map(|x| x.unsigned_abs()).fold(0u128, u128::saturating_add))
            .collect();
        let row_max = (0..p)
            .map(|l| table.row(l).iter().map(|x| x.unsigned_abs() as u128).max().unwrap_or(0))
            .collect();
        Ok(ClassSums {
            table,
            weighted,
            weighted_l1,
            row_max,
            nfact: factorial(table.n())? as i128,
        })
    }

    pub fn table(&self) -> &CharacterTable {
        self.table
    }

    /// `g` for partition indices `(a, b, c)`.
    pub fn coefficient(&self, a: usize, b: usize, c: usize) -> Result<u64> {
        let bound = self.weighted_l1[a]
            .checked_mul(self.row_max[b])
            .and_then(|x| x.checked_mul(self.row_max[c]));
        let sum = match bound {
            Some(bound) if bound <= i128::MAX as u128 => Ok(self.sum_unchecked(a, b, c)),
            _ => self.sum_checked(a, b, c),
        };
        match sum {
            Ok(s) => self.divide(s),
            Err(()) => self.divide_big(self.sum_big(a, b, c)),
        }
    }

    fn sum_unchecked(&self, a: usize, b: usize, c: usize) -> i128 {
        let (rb, rc) = (self.table.row(b), self.table.row(c));
        self.weighted[a]
            .iter()
            .zip(rb.iter().zip(rc))
            .map(|(&w, (&x, &y))| w * (x as i128 * y as i128))
            .sum()
    }

    fn sum_checked(&self, a: usize, b: usize, c: usize) -> Result<i128, ()> {
        let (rb, rc) = (self.table.row(b), self.table.row(c));
        self.weighted[a]
            .iter()
            .zip(rb.iter().zip(rc))
            .try_fold(0i128, |acc, (&w, (&x, &y))| {
                w.checked_mul(x as i128 * y as i128)
                    .and_then(|t| acc.checked_add(t))
            })
            .ok_or(())
    }

    pub(crate) fn sum_big(&self, a: usize, b: usize, c: usize) -> BigInt {
        let (rb, rc) = (self.table.row(b), self.table.row(c));
        self.weighted[a]
            .iter()
            .zip(rb.iter().zip(rc))
            .map(|(&w, (&x, &y))| BigInt::from(w) * BigInt::from(x) * BigInt::from(y))
            .sum()
    }

    fn divide(&self, sum: i128) -> Result<u64> {
        if sum % self.nfact != 0 || sum < 0 {
            return Err(Error::Inconsistent(format!(
                "class sum {sum} is not a non-negative multiple of {}!",
                self.table.n()
            )));
        }
        u64::try_from(sum / self.nfact)
            .map_err(|_| Error::Inconsistent("Kronecker coefficient exceeds u64".into()))
    }

    fn divide_big(&self, sum: BigInt) -> Result<u64> {
        let nfact = BigInt::from(self.nfact);
        let zero = BigInt::from(0);
        if &sum % &nfact != zero || sum < zero {
            return Err(Error::Inconsistent(format!(
                "class sum {sum} is not a non-negative multiple of {}!",
                self.table.n()
            )));
        }
        u64::try_from(sum / nfact)
            .map_err(|_| Error::Inconsistent("Kronecker coefficient exceeds u64".into()))
    }
}

/// `g_{λ,μ}^ν` for three partitions of the table's `n`.
pub fn kronecker_coefficient(
    lambda: &Partition,
    mu: &Partition,
    nu: &Partition,
    t: &CharacterTable,
) -> Result<u64> {
    let set = t.partitions();
    let idx = |q: &Partition| {
        if q.n() != t.n() {
            return Err(Error::invalid(format!(
                "{q} is not a partition of {}",
                t.n()
            )));
        }
        set.index_of(q)
    };
    let (a, b, c) = (idx(lambda)?, idx(mu)?, idx(nu)?);
    ClassSums::new(t)?.coefficient(a, b, c)
}

/// All `g(t)` over canonical triples `i ≤ j ≤ k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KroneckerTensor {
    n: usize,
    p: usize,
    /// Offset of the first `(i, j, j)` entry; indexed `i * p + j`.
    pair_offsets: Vec<usize>,
    values: Vec<u32>,
}

fn pair_offsets(p: usize) -> Vec<usize> {
    let mut offsets = vec![usize::MAX; p * p];
    let mut at = 0;
    for i in 0..p {
        for j in i..p {
            offsets[i * p + j] = at;
            at += p - j;
        }
    }
    offsets
}

/// Number of multisets of size 3 from `p` items.
pub fn canonical_count(p: usize) -> usize {
    p * (p + 1) * (p + 2) / 6
}

impl KroneckerTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `p(n)`.
    pub fn size(&self) -> usize {
        self.p
    }

    /// `p(n)³`.
    pub fn total_triples(&self) -> u64 {
        (self.p as u64).pow(3)
    }

    pub fn canonical_len(&self) -> usize {
        self.values.len()
    }

    /// Value at a canonical triple; the caller guarantees `i ≤ j ≤ k < p`.
    pub fn get_sorted(&self, i: usize, j: usize, k: usize) -> u32 {
        self.values[self.pair_offsets[i * self.p + j] + (k - j)]
    }

    /// `g(t)` for any ordering of the indices.
    pub fn get(&self, i: usize, j: usize, k: usize) -> Result<u32> {
        if i >= self.p || j >= self.p || k >= self.p {
            return Err(Error::invalid(format!(
                "triple ({i}, {j}, {k}) out of range for p({}) = {}",
                self.n, self.p
            )));
        }
        let (a, b, c) = sort3(i, j, k);
        Ok(self.get_sorted(a, b, c))
    }

    pub fn is_nonzero(&self, i: usize, j: usize, k: usize) -> Result<bool> {
        Ok(self.get(i, j, k)? != 0)
    }

    /// Canonical triples in lexicographic order with their coefficient.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), u32)> + '_ {
        let p = self.p;
        (0..p)
            .flat_map(move |i| (i..p).flat_map(move |j| (j..p).map(move |k| (i, j, k))))
            .zip(self.values.iter().copied())
    }

    /// Fraction of ordered triples with `g ≠ 0`.
    pub fn nonzero_ratio(&self) -> f64 {
        self.nonzero_ordered() as f64 / self.total_triples() as f64
    }

    /// Count of ordered triples with `g ≠ 0`.
    pub fn nonzero_ordered(&self) -> u64 {
        self.iter()
            .filter(|&(_, g)| g != 0)
            .map(|((i, j, k), _)| orbit_weight(i, j, k))
            .sum()
    }

    /// Rebuilds a tensor from canonical-order values (cache reader).
    pub fn from_values(n: usize, p: usize, values: Vec<u32>) -> Result<Self> {
        if values.len() != canonical_count(p) {
            return Err(Error::invalid(format!(
                "tensor for p = {p} needs {} canonical entries, got {}",
                canonical_count(p),
                values.len()
            )));
        }
        Ok(KroneckerTensor {
            n,
            p,
            pair_offsets: pair_offsets(p),
            values,
        })
    }
}

/// Builds the full tensor for `n ≤ 16`, one contiguous chunk per first index.
pub fn kronecker_tensor(n: usize, chars: &CharacterTable) -> Result<KroneckerTensor> {
    if !(1..=MAX_TENSOR_N).contains(&n) {
        return Err(Error::UnsupportedSize {
            what: "full Kronecker tensor",
            n,
            min: 1,
            max: MAX_TENSOR_N,
        });
    }
    if chars.n() != n {
        return Err(Error::invalid(format!(
            "character table is for n = {}, requested n = {n}",
            chars.n()
        )));
    }
    let sums = ClassSums::new(chars)?;
    let p = chars.size();
    let chunks: Vec<Vec<u32>> = (0..p)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity((i..p).map(|j| p - j).sum());
            for j in i..p {
                for k in j..p {
                    let g = sums.coefficient(i, j, k)?;
                    let g = u32::try_from(g).map_err(|_| {
                        Error::Inconsistent(format!("g({i},{j},{k}) = {g} saturates u32"))
                    })?;
                    out.push(g);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let values = chunks.concat();
    KroneckerTensor::from_values(n, p, values)
}
