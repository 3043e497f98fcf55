//! Integer partitions of `n` in descending lexicographic order.
//!
//! `P(n)` is always ordered so that index 0 is `(n)` and index `p(n) - 1` is
//! `(1, …, 1)`. Every matrix, vector and tensor in the crate is indexed in
//! this order.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest `n` for which `P(n)` may be enumerated.
pub const MAX_ENUMERATION_N: usize = 40;

/// A non-increasing sequence of positive parts, stored unpadded.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Validates and wraps a part list. Trailing zeros are accepted and dropped.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.is_empty() {
            return Err(Error::invalid("a partition needs at least one positive part"));
        }
        if parts.contains(&0) {
            return Err(Error::invalid(format!("zero part inside {parts:?}")));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!("parts {parts:?} are not non-increasing")));
        }
        Ok(Partition { parts })
    }

    pub(crate) fn from_parts_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(parts.iter().all(|&p| p > 0));
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of positive parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn n(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    /// Zero-padded length-`n` view.
    pub fn pad(&self, n: usize) -> Result<Vec<u32>> {
        if self.n() != n {
            return Err(Error::invalid(format!(
                "partition {self} has size {}, cannot pad to length {n}",
                self.n()
            )));
        }
        let mut v = self.parts.clone();
        v.resize(n, 0);
        Ok(v)
    }

    /// Transpose of the Young diagram.
    pub fn conjugate(&self) -> Partition {
        let first = self.parts.first().copied().unwrap_or(0) as usize;
        let mut out = vec![0u32; first];
        for &p in &self.parts {
            for slot in out.iter_mut().take(p as usize) {
                *slot += 1;
            }
        }
        Partition { parts: out }
    }

    /// Multiplicity of each part size; entry `i` counts parts equal to `i`.
    pub fn multiplicities(&self) -> Vec<u32> {
        let max = self.parts.first().copied().unwrap_or(0) as usize;
        let mut m = vec![0u32; max + 1];
        for &p in &self.parts {
            m[p as usize] += 1;
        }
        m
    }

    /// Parses a whitespace-separated part list such as `"12 4 2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::invalid(format!("bad part {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

impl fmt::Display for Partition {
    /// Space-separated parts, e.g. `12 4 2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Sum of `|a_i - b_i|` over zero-padded vectors. Always even.
pub fn l1_distance(a: &Partition, b: &Partition) -> Result<u32> {
    if a.n() != b.n() {
        return Err(Error::invalid(format!(
            "l1_distance between partitions of {} and {}",
            a.n(),
            b.n()
        )));
    }
    Ok(l1_unchecked(a.parts(), b.parts()))
}

pub(crate) fn l1_unchecked(a: &[u32], b: &[u32]) -> u32 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            x.abs_diff(y)
        })
        .sum()
}

/// All partitions of `n`, index 0 = `(n)`, last = `(1ⁿ)`.
pub fn enumerate_partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::UnsupportedSize {
            what: "partition enumeration",
            n,
            min: 1,
            max: MAX_ENUMERATION_N,
        });
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    descend(n as u32, n as u32, &mut stack, &mut out);
    Ok(out)
}

fn descend(remaining: u32, max_part: u32, stack: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition::from_parts_unchecked(stack.clone()));
        return;
    }
    for part in (1..=remaining.min(max_part)).rev() {
        stack.push(part);
        descend(remaining - part, part, stack, out);
        stack.pop();
    }
}

/// `P(n)` in canonical order, with index lookup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionSet {
    n: usize,
    items: Vec<Partition>,
}

impl PartitionSet {
    pub fn new(n: usize) -> Result<Self> {
        Ok(PartitionSet {
            n,
            items: enumerate_partitions(n)?,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p(n)`.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Partition> {
        self.items.get(index)
    }

    pub fn as_slice(&self) -> &[Partition] {
        &self.items
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.items.iter()
    }

    /// Binary search in the descending order.
    pub fn index_of(&self, p: &Partition) -> Result<usize> {
        index_in(&self.items, p, self.n)
    }
}

impl std::ops::Index<usize> for PartitionSet {
    type Output = Partition;

    fn index(&self, index: usize) -> &Partition {
        &self.items[index]
    }
}

pub(crate) fn index_in(items: &[Partition], p: &Partition, n: usize) -> Result<usize> {
    if p.n() != n {
        return Err(Error::NotFound(format!("{p} is not a partition of {n}")));
    }
    items
        .binary_search_by(|probe| match probe.cmp(p) {
            Ordering::Less => Ordering::Greater,
            Ordering::Greater => Ordering::Less,
            Ordering::Equal => Ordering::Equal,
        })
        .map_err(|_| Error::NotFound(format!("{p} is not a partition of {n}")))
}

/// Position of `p` in [`enumerate_partitions`]`(n)`.
pub fn index_of(p: &Partition, n: usize) -> Result<usize> {
    let items = enumerate_partitions(n)?;
    index_in(&items, p, n)
}
