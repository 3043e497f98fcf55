//! Exact character tables of `S_n` via the Murnaghan–Nakayama rule.
//!
//! Border strips are removed using beta-numbers: removing an `r`-strip from
//! `λ` is the same as lowering one bead of its beta-set by `r` onto an empty
//! position. The sign is `(-1)^h` where `h` counts the beads jumped over.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::partitions::{index_in, enumerate_partitions, Partition, PartitionSet};

/// Largest `n` for which a full character table is built.
pub const MAX_TABLE_N: usize = 20;

/// Conjugacy class of cycle type `rho`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassData {
    pub rho: Partition,
    /// `z_ρ = Π i^{m_i} · m_i!`
    pub centralizer_order: u64,
    /// `n! / z_ρ`
    pub class_size: u64,
}

/// `Π i^{m_i} · m_i!` over the part multiplicities `m_i` of `rho`.
pub fn centralizer_order(rho: &Partition) -> Result<u64> {
    let overflow = || Error::invalid(format!("centralizer order of {rho} overflows u64"));
    let mut z: u64 = 1;
    for (part, &mult) in rho.multiplicities().iter().enumerate().skip(1) {
        for k in 1..=mult as u64 {
            z = z
                .checked_mul(part as u64)
                .and_then(|z| z.checked_mul(k))
                .ok_or_else(overflow)?;
        }
    }
    Ok(z)
}

pub fn factorial(n: usize) -> Result<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)).ok_or(Error::UnsupportedSize {
        what: "factorial in u64",
        n,
        min: 0,
        max: 20,
    })
}

/// Every way to remove a border strip of length `r` from `parts`.
/// Yields the remaining shape and the strip height (rows spanned minus one).
pub(crate) fn remove_border_strips(parts: &[u32], r: u32) -> Vec<(Vec<u32>, u32)> {
    let len = parts.len();
    let beta: Vec<i64> = parts
        .iter()
        .enumerate()
        .map(|(i, &p)| p as i64 + (len - 1 - i) as i64)
        .collect();
    let mut out = Vec::new();
    for (i, &b) in beta.iter().enumerate() {
        let target = b - r as i64;
        if target < 0 || beta.contains(&target) {
            continue;
        }
        // beta is strictly decreasing; beads strictly between target and b
        // sit at indices i+1.. with value > target.
        let height = beta[i + 1..].iter().take_while(|&&x| x > target).count() as u32;
        let mut next = beta.clone();
        next[i] = target;
        next.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<u32> = next
            .iter()
            .enumerate()
            .map(|(j, &x)| (x - (len - 1 - j) as i64) as u32)
            .filter(|&p| p > 0)
            .collect();
        out.push((shape, height));
    }
    out
}

fn sign(height: u32) -> i64 {
    if height.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `χ_λ(ρ)` computed with a memo on `(remaining shape, remaining cycle suffix)`.
/// Cycle parts are consumed largest-first.
pub fn mn_character(lambda: &Partition, rho: &Partition) -> Result<i64> {
    if lambda.n() != rho.n() {
        return Err(Error::invalid(format!(
            "character of a partition of {} on a class of {}",
            lambda.n(),
            rho.n()
        )));
    }
    let mut memo = HashMap::new();
    mn_memo(lambda.parts(), rho.parts(), 0, &mut memo)
}

fn mn_memo(
    shape: &[u32],
    rho: &[u32],
    depth: usize,
    memo: &mut HashMap<(Vec<u32>, usize), i64>,
) -> Result<i64> {
    if depth == rho.len() {
        return Ok(if shape.is_empty() { 1 } else { 0 });
    }
    if let Some(&v) = memo.get(&(shape.to_vec(), depth)) {
        return Ok(v);
    }
    let mut total: i64 = 0;
    for (rest, h) in remove_border_strips(shape, rho[depth]) {
        let sub = mn_memo(&rest, rho, depth + 1, memo)?;
        total = total
            .checked_add(sign(h) * sub)
            .ok_or_else(|| Error::Inconsistent("character value overflows i64".into()))?;
    }
    memo.insert((shape.to_vec(), depth), total);
    Ok(total)
}

/// Exact `p(n) × p(n)` character table, rows = irreducibles `λ`,
/// columns = classes `ρ`, both in canonical partition order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterTable {
    n: usize,
    partitions: PartitionSet,
    chi: Vec<i64>,
    classes: Vec<ClassData>,
}

/// Result of the first-orthogonality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalityReport {
    pub passed: bool,
    /// First `(λ, μ)` row pair whose inner product is wrong.
    pub first_failure: Option<(usize, usize)>,
}

impl CharacterTable {
    /// Builds and verifies the table (orthogonality included).
    pub fn new(n: usize) -> Result<Self> {
        character_table_with(n, true)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p(n)`.
    pub fn size(&self) -> usize {
        self.partitions.len()
    }

    pub fn partitions(&self) -> &PartitionSet {
        &self.partitions
    }

    pub fn classes(&self) -> &[ClassData] {
        &self.classes
    }

    /// `χ_λ(ρ)` by indices.
    pub fn chi(&self, lambda: usize, rho: usize) -> i64 {
        self.chi[lambda * self.size() + rho]
    }

    /// All class values of irreducible `lambda`.
    pub fn row(&self, lambda: usize) -> &[i64] {
        let p = self.size();
        &self.chi[lambda * p..(lambda + 1) * p]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[i64] {
        &self.chi
    }

    /// Irreducible dimensions (the identity-class column).
    pub fn dimensions(&self) -> Vec<i64> {
        let id = self.size() - 1;
        (0..self.size()).map(|l| self.chi(l, id)).collect()
    }

    /// Reassembles a table from raw parts (used by the cache reader);
    /// the structural invariants are re-checked.
    pub fn from_raw(n: usize, chi: Vec<i64>, centralizers: Vec<u64>) -> Result<Self> {
        let partitions = PartitionSet::new(n)?;
        let p = partitions.len();
        if chi.len() != p * p || centralizers.len() != p {
            return Err(Error::invalid(format!(
                "table for n = {n} needs {} entries and {p} centralizers",
                p * p
            )));
        }
        let classes = class_data(&partitions)?;
        for (c, &z) in classes.iter().zip(&centralizers) {
            if c.centralizer_order != z {
                return Err(Error::Inconsistent(format!(
                    "stored centralizer {z} for class {} disagrees with {}",
                    c.rho, c.centralizer_order
                )));
            }
        }
        let table = CharacterTable {
            n,
            partitions,
            chi,
            classes,
        };
        table.check_structure()?;
        Ok(table)
    }

    /// Trivial row, sign row and `Σ dim² = n!`.
    fn check_structure(&self) -> Result<()> {
        let p = self.size();
        if self.row(0).iter().any(|&x| x != 1) {
            return Err(Error::Inconsistent("trivial row is not all ones".into()));
        }
        for (r, class) in self.classes.iter().enumerate() {
            let expected = if (self.n - class.rho.len()).is_multiple_of(2) { 1 } else { -1 };
            if self.chi(p - 1, r) != expected {
                return Err(Error::Inconsistent(format!(
                    "sign character wrong on class {}",
                    class.rho
                )));
            }
        }
        let sum_sq: i128 = self.dimensions().iter().map(|&d| (d as i128) * (d as i128)).sum();
        if sum_sq != factorial(self.n)? as i128 {
            return Err(Error::Inconsistent(format!(
                "sum of squared dimensions {sum_sq} != {}!",
                self.n
            )));
        }
        Ok(())
    }
}

fn class_data(partitions: &PartitionSet) -> Result<Vec<ClassData>> {
    let nfact = factorial(partitions.n())?;
    partitions
        .iter()
        .map(|rho| {
            let z = centralizer_order(rho)?;
            Ok(ClassData {
                rho: rho.clone(),
                centralizer_order: z,
                class_size: nfact / z,
            })
        })
        .collect()
}

/// Character table of `S_n`; `verify` runs the orthogonality self-check.
pub fn character_table_with(n: usize, verify: bool) -> Result<CharacterTable> {
    if !(1..=MAX_TABLE_N).contains(&n) {
        return Err(Error::UnsupportedSize {
            what: "character table",
            n,
            min: 1,
            max: MAX_TABLE_N,
        });
    }
    // tables[m] holds the full table of S_m. Entry (λ, ρ) of S_m only needs
    // S_{m - ρ_1} at (λ minus a strip, ρ minus its largest part).
    let mut levels: Vec<Vec<Partition>> = vec![Vec::new()];
    let mut tables: Vec<Vec<i64>> = vec![vec![1]];
    for m in 1..=n {
        let parts = enumerate_partitions(m)?;
        let p = parts.len();
        let columns: Vec<Vec<i64>> = parts
            .par_iter()
            .map(|rho| column(rho, &parts, &levels, &tables))
            .collect::<Result<_>>()?;
        let mut table = vec![0i64; p * p];
        for (r, col) in columns.iter().enumerate() {
            for (l, &v) in col.iter().enumerate() {
                table[l * p + r] = v;
            }
        }
        levels.push(parts);
        tables.push(table);
    }
    let partitions = PartitionSet::new(n)?;
    let classes = class_data(&partitions)?;
    let table = CharacterTable {
        n,
        partitions,
        chi: tables.pop().unwrap_or_default(),
        classes,
    };
    table.check_structure()?;
    if verify {
        let report = verify_orthogonality(&table);
        if let Some((a, b)) = report.first_failure {
            return Err(Error::Inconsistent(format!(
                "row orthogonality fails for ({}, {})",
                table.partitions[a], table.partitions[b]
            )));
        }
    }
    Ok(table)
}

fn column(
    rho: &Partition,
    shapes: &[Partition],
    levels: &[Vec<Partition>],
    tables: &[Vec<i64>],
) -> Result<Vec<i64>> {
    let r = rho.parts()[0];
    let rest_n = rho.n() - r as usize;
    let tail_col = if rest_n == 0 {
        0
    } else {
        let tail = Partition::from_parts_unchecked(rho.parts()[1..].to_vec());
        index_in(&levels[rest_n], &tail, rest_n)?
    };
    let sub_p = levels[rest_n].len().max(1);
    shapes
        .iter()
        .map(|lambda| {
            let mut total: i64 = 0;
            for (shape, h) in remove_border_strips(lambda.parts(), r) {
                let sub = if rest_n == 0 {
                    1
                } else {
                    let row = index_in(
                        &levels[rest_n],
                        &Partition::from_parts_unchecked(shape),
                        rest_n,
                    )?;
                    tables[rest_n][row * sub_p + tail_col]
                };
                total = total
                    .checked_add(sign(h) * sub)
                    .ok_or_else(|| Error::Inconsistent("character value overflows i64".into()))?;
            }
            Ok(total)
        })
        .collect()
}

/// Character table with verification; alias of [`CharacterTable::new`].
pub fn character_table(n: usize) -> Result<CharacterTable> {
    CharacterTable::new(n)
}

/// Checks `Σ_ρ |C_ρ| χ_λ(ρ) χ_μ(ρ) = n! δ_{λμ}` in exact integers.
pub fn verify_orthogonality(t: &CharacterTable) -> OrthogonalityReport {
    let p = t.size();
    let nfact = match factorial(t.n) {
        Ok(f) => f as i128,
        Err(_) => {
            return OrthogonalityReport {
                passed: false,
                first_failure: Some((0, 0)),
            }
        }
    };
    let sizes: Vec<i128> = t.classes.iter().map(|c| c.class_size as i128).collect();
    let first_failure = (0..p)
        .into_par_iter()
        .find_map_first(|a| {
            let weighted: Vec<i128> = t
                .row(a)
                .iter()
                .zip(&sizes)
                .map(|(&x, &s)| x as i128 * s)
                .collect();
            (a..p).find_map(|b| {
                let dot = weighted
                    .iter()
                    .zip(t.row(b))
                    .try_fold(0i128, |acc, (&w, &y)| w.checked_mul(y as i128)?.checked_add(acc));
                let expected = if a == b { nfact } else { 0 };
                (dot != Some(expected)).then_some((a, b))
            })
        });
    OrthogonalityReport {
        passed: first_failure.is_none(),
        first_failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    /// Unmemoized recursion consuming cycle parts smallest-first.
    fn naive_character(shape: &[u32], cycles: &[u32]) -> i64 {
        match cycles.split_last() {
            None => i64::from(shape.is_empty()),
            Some((&r, rest)) => remove_border_strips(shape, r)
                .into_iter()
                .map(|(s, h)| sign(h) * naive_character(&s, rest))
                .sum(),
        }
    }

    /// Hook-length formula `n! / Π hooks`.
    fn hook_dimension(lambda: &Partition) -> u64 {
        let conj = lambda.conjugate();
        let mut prod: u64 = 1;
        for (i, &row) in lambda.parts().iter().enumerate() {
            for j in 0..row as usize {
                let arm = row as usize - j - 1;
                let leg = conj.parts()[j] as usize - i - 1;
                prod *= (arm + leg + 1) as u64;
            }
        }
        factorial(lambda.n()).unwrap() / prod
    }

    #[test]
    fn centralizers() {
        assert_eq!(centralizer_order(&p(&[1, 1, 1])).unwrap(), 6);
        assert_eq!(centralizer_order(&p(&[3])).unwrap(), 3);
        assert_eq!(centralizer_order(&p(&[2, 1])).unwrap(), 2);
        assert_eq!(centralizer_order(&p(&[2, 2, 1])).unwrap(), 8);
        assert!(centralizer_order(&Partition::new(vec![1; 21]).unwrap()).is_err());
    }

    #[test]
    fn class_sizes_sum_to_factorial() {
        for n in 1..=20 {
            let set = PartitionSet::new(n).unwrap();
            let classes = class_data(&set).unwrap();
            let nf = factorial(n).unwrap();
            let total: u128 = classes.iter().map(|c| c.class_size as u128).sum();
            assert_eq!(total, nf as u128);
            for c in &classes {
                assert_eq!(c.class_size as u128 * c.centralizer_order as u128, nf as u128);
            }
        }
    }

    #[test]
    fn single_characters() {
        assert_eq!(mn_character(&p(&[5]), &p(&[3, 2])).unwrap(), 1);
        assert_eq!(mn_character(&p(&[1, 1, 1]), &p(&[2, 1])).unwrap(), -1);
        assert_eq!(mn_character(&p(&[2, 1]), &p(&[3])).unwrap(), -1);
        assert!(mn_character(&p(&[2, 1]), &p(&[2])).is_err());
    }

    #[test]
    fn s3_table() {
        let t = character_table(3).unwrap();
        let rows: Vec<Vec<i64>> = (0..3).map(|l| t.row(l).to_vec()).collect();
        assert_eq!(rows, vec![vec![1, 1, 1], vec![-1, 0, 2], vec![1, -1, 1]]);
    }

    #[test]
    fn s4_dimensions_and_trivial_case() {
        let t = character_table(4).unwrap();
        assert_eq!(t.dimensions(), vec![1, 3, 2, 3, 1]);
        assert_eq!(t.dimensions().iter().map(|d| d * d).sum::<i64>(), 24);
        let one = character_table(1).unwrap();
        assert_eq!(one.entries(), &[1]);
    }

    #[test]
    fn dimensions_match_hook_lengths() {
        for n in 1..=16 {
            let t = character_table_with(n, false).unwrap();
            for (l, lambda) in t.partitions().iter().enumerate() {
                assert_eq!(t.chi(l, t.size() - 1) as u64, hook_dimension(lambda));
            }
        }
    }

    #[test]
    fn size_cap() {
        assert!(matches!(character_table(0), Err(Error::UnsupportedSize { .. })));
        assert!(matches!(character_table(21), Err(Error::UnsupportedSize { .. })));
    }

    #[test]
    fn orthogonality_detects_perturbation() {
        let t = character_table(5).unwrap();
        assert!(verify_orthogonality(&t).passed);
        let mut bad = t.clone();
        let width = bad.size();
        bad.chi[2 * width + 3] += 1;
        let report = verify_orthogonality(&bad);
        assert!(!report.passed);
        assert_eq!(report.first_failure, Some((0, 2)));
    }

    #[test]
    fn orthogonality_n14_is_fast() {
        let start = std::time::Instant::now();
        let t = character_table_with(14, false).unwrap();
        assert!(verify_orthogonality(&t).passed);
        assert!(start.elapsed().as_secs_f64() < 10.0);
    }

    #[test]
    fn column_orthogonality() {
        for n in 1..=10 {
            let t = character_table(n).unwrap();
            let sz = t.size();
            for a in 0..sz {
                for b in 0..sz {
                    let dot: i128 = (0..sz).map(|l| t.chi(l, a) as i128 * t.chi(l, b) as i128).sum();
                    let expected = if a == b { t.classes()[a].centralizer_order as i128 } else { 0 };
                    assert_eq!(dot, expected, "n = {n} classes {a},{b}");
                }
            }
        }
    }

    #[test]
    fn sign_twist() {
        for n in 1..=10 {
            let t = character_table(n).unwrap();
            let set = t.partitions();
            for (l, lambda) in set.iter().enumerate() {
                let lc = set.index_of(&lambda.conjugate()).unwrap();
                for (r, class) in t.classes().iter().enumerate() {
                    let s = if (n - class.rho.len()) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(t.chi(lc, r), s * t.chi(l, r));
                }
            }
        }
    }

    #[test]
    fn memoized_agrees_with_naive() {
        for n in 1..=9 {
            let t = character_table(n).unwrap();
            for (l, lambda) in t.partitions().iter().enumerate() {
                for (r, class) in t.classes().iter().enumerate() {
                    let naive = naive_character(lambda.parts(), class.rho.parts());
                    assert_eq!(t.chi(l, r), naive);
                    assert_eq!(mn_character(lambda, &class.rho).unwrap(), naive);
                }
            }
        }
    }

    #[test]
    fn identical_under_thread_counts() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| character_table_with(12, false).unwrap());
        let b = four.install(|| character_table_with(12, false).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn raw_round_trip_checks_structure() {
        let t = character_table(6).unwrap();
        let z: Vec<u64> = t.classes().iter().map(|c| c.centralizer_order).collect();
        let back = CharacterTable::from_raw(6, t.entries().to_vec(), z.clone()).unwrap();
        assert_eq!(back, t);
        let mut broken = t.entries().to_vec();
        broken[0] = 2;
        assert!(CharacterTable::from_raw(6, broken, z).is_err());
    }
}
