//! Equal-width weighted histograms with optional per-class counts.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub total: u64,
    pub nonzero: u64,
    pub zero: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bins: Vec<Bin>,
    pub labeled: bool,
}

/// Bins `values` over `[min, max]`; the last bin is closed. With `labels`,
/// every row also lands in a per-class count.
pub fn histogram(
    values: &[f64],
    weights: &[u64],
    labels: Option<&[bool]>,
    bins: usize,
) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::invalid("bin count must be at least 1"));
    }
    if values.is_empty() {
        return Err(Error::invalid("histogram of an empty input"));
    }
    if weights.len() != values.len() || labels.is_some_and(|l| l.len() != values.len()) {
        return Err(Error::invalid("values, weights and labels differ in length"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("histogram values must be finite".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|i| Bin {
            lo: lo + width * i as f64,
            hi: if i + 1 == bins { hi } else { lo + width * (i + 1) as f64 },
            total: 0,
            nonzero: 0,
            zero: 0,
        })
        .collect();
    for (at, (&v, &w)) in values.iter().zip(weights).enumerate() {
        let slot = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        let bin = &mut out[slot];
        bin.total += w;
        if let Some(l) = labels {
            if l[at] {
                bin.nonzero += w;
            } else {
                bin.zero += w;
            }
        }
    }
    Ok(Histogram { bins: out, labeled: labels.is_some() })
}

impl Histogram {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.labeled {
            writeln!(w, "bin,lo,hi,count,nonzero,zero")?;
        } else {
            writeln!(w, "bin,lo,hi,count")?;
        }
        for (i, b) in self.bins.iter().enumerate() {
            if self.labeled {
                writeln!(w, "{i},{:.6},{:.6},{},{},{}", b.lo, b.hi, b.total, b.nonzero, b.zero)?;
            } else {
                writeln!(w, "{i},{:.6},{:.6},{}", b.lo, b.hi, b.total)?;
            }
        }
        Ok(())
    }

    /// Weighted mean bin centre of one class.
    pub fn class_mean(&self, nonzero: bool) -> Option<f64> {
        let (mut mass, mut sum) = (0u64, 0.0);
        for b in &self.bins {
            let c = if nonzero { b.nonzero } else { b.zero };
            mass += c;
            sum += c as f64 * (b.lo + b.hi) / 2.0;
        }
        (mass > 0).then(|| sum / mass as f64)
    }
}
