//! Labeled triple rows in CSV or JSON-lines form.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bloading::BLoadingTable;
use crate::characters::CharacterTable;
use crate::error::{Error, Result};
use crate::kronecker::{orbit_weight, ClassSums, KroneckerTensor};
use crate::partitions::PartitionSet;

/// Which features accompany each row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureMode {
    /// All three padded partitions, `3n` integers.
    Full3n,
    /// First three and last three entries of each padded partition.
    Ends18,
    /// No partition features; `b` is the only input.
    Bsum1,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Full3n => "full3n",
            FeatureMode::Ends18 => "ends18",
            FeatureMode::Bsum1 => "bsum1",
        }
    }

    pub fn width(self, n: usize) -> usize {
        match self {
            FeatureMode::Full3n => 3 * n,
            FeatureMode::Ends18 => 18,
            FeatureMode::Bsum1 => 0,
        }
    }

    /// Feature block for a single padded partition.
    pub fn block(self, padded: &[u32]) -> Vec<u32> {
        match self {
            FeatureMode::Full3n => padded.to_vec(),
            FeatureMode::Ends18 => {
                let n = padded.len();
                let head = (0..3).map(|i| padded.get(i).copied().unwrap_or(0));
                let tail = (0..3).map(|i| {
                    (n + i).checked_sub(3).and_then(|x| padded.get(x)).copied().unwrap_or(0)
                });
                head.chain(tail).collect()
            }
            FeatureMode::Bsum1 => Vec::new(),
        }
    }

    pub fn column_names(self, n: usize) -> Vec<String> {
        match self {
            FeatureMode::Full3n => (1..=3)
                .flat_map(|s| (1..=n).map(move |c| format!("p{s}_{c}")))
                .collect(),
            FeatureMode::Ends18 => (1..=3)
                .flat_map(|s| {
                    ["h1", "h2", "h3", "t3", "t2", "t1"]
                        .into_iter()
                        .map(move |c| format!("p{s}_{c}"))
                })
                .collect(),
            FeatureMode::Bsum1 => Vec::new(),
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full3n" => Ok(FeatureMode::Full3n),
            "ends18" => Ok(FeatureMode::Ends18),
            "bsum1" => Ok(FeatureMode::Bsum1),
            _ => Err(Error::InvalidArgument(format!(
                "unknown feature mode {s:?}; expected full3n, ends18 or bsum1"
            ))),
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json-lines" => Ok(Format::Jsonl),
            _ => Err(Error::InvalidArgument(format!(
                "unknown format {s:?}; expected csv or jsonl"
            ))),
        }
    }
}

/// One canonical triple with its label and loading.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleRecord {
    pub triple: (usize, usize, usize),
    pub padded: [Vec<u32>; 3],
    pub g: u32,
    pub b: f64,
    pub orbit_weight: u64,
}

impl TripleRecord {
    pub fn features(&self, mode: FeatureMode) -> Vec<u32> {
        self.padded.iter().flat_map(|p| mode.block(p)).collect()
    }
}

/// Canonical triples in tensor order.
pub fn records<'a>(
    tensor: &'a KroneckerTensor,
    table: &'a BLoadingTable,
) -> Result<impl Iterator<Item = TripleRecord> + 'a> {
    if tensor.n() != table.n {
        return Err(Error::invalid(format!(
            "tensor is for n = {}, b-table for n = {}",
            tensor.n(),
            table.n
        )));
    }
    let n = tensor.n();
    let set = PartitionSet::new(n)?;
    let padded: Vec<Vec<u32>> = set.iter().map(|p| p.pad(n)).collect::<Result<_>>()?;
    Ok(tensor.iter().map(move |((i, j, k), g)| TripleRecord {
        triple: (i, j, k),
        padded: [padded[i].clone(), padded[j].clone(), padded[k].clone()],
        g,
        b: table.b_of_triple(i, j, k).expect("indices from the tensor"),
        orbit_weight: orbit_weight(i, j, k),
    }))
}

fn header(mode: FeatureMode, n: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["i", "j", "k", "orbit_weight"].map(String::from).to_vec();
    cols.extend(mode.column_names(n));
    cols.extend(["b", "g", "nonzero"].map(String::from));
    cols
}

/// Writes every canonical row; returns the row count.
pub fn export_dataset<W: Write>(
    tensor: &KroneckerTensor,
    table: &BLoadingTable,
    mode: FeatureMode,
    format: Format,
    out: W,
) -> Result<u64> {
    let n = tensor.n();
    if mode == FeatureMode::Ends18 && n < 3 {
        return Err(Error::UnsupportedSize { what: "ends18 export", n, min: 3, max: usize::MAX });
    }
    let mut rows = 0u64;
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(header(mode, n)).map_err(csv_error)?;
            for r in records(tensor, table)? {
                let mut fields = vec![
                    r.triple.0.to_string(),
                    r.triple.1.to_string(),
                    r.triple.2.to_string(),
                    r.orbit_weight.to_string(),
                ];
                fields.extend(r.features(mode).iter().map(u32::to_string));
                fields.push(format!("{:.6}", r.b));
                fields.push(r.g.to_string());
                fields.push(u8::from(r.g > 0).to_string());
                w.write_record(&fields).map_err(csv_error)?;
                rows += 1;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut w = std::io::BufWriter::new(out);
            for r in records(tensor, table)? {
                let features: Vec<String> = r.features(mode).iter().map(u32::to_string).collect();
                writeln!(
                    w,
                    "{{\"i\":{},\"j\":{},\"k\":{},\"orbit_weight\":{},\"features\":[{}],\"b\":{:.6},\"g\":{},\"nonzero\":{}}}",
                    r.triple.0,
                    r.triple.1,
                    r.triple.2,
                    r.orbit_weight,
                    features.join(","),
                    r.b,
                    r.g,
                    r.g > 0
                )?;
                rows += 1;
            }
            w.flush()?;
        }
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Domain(format!("csv: {other:?}")),
    }
}

/// A row read back from an export.
#[derive(Clone, Debug, PartialEq)]
pub struct ExportedRow {
    pub triple: (usize, usize, usize),
    pub orbit_weight: u64,
    pub features: Vec<u32>,
    pub b: f64,
    pub g: u32,
    pub nonzero: bool,
}

fn parse<T: FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Domain(format!("row {line}: bad {what} field {s:?}")))
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ExportedRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let width = reader.headers().map_err(csv_error)?.len();
    if width < 7 {
        return Err(Error::Domain(format!("csv header has {width} columns, need at least 7")));
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let f: Vec<&str> = rec.iter().collect();
        let nonzero = match f[width - 1] {
            "0" => false,
            "1" => true,
            other => return Err(Error::Domain(format!("row {line}: bad nonzero field {other:?}"))),
        };
        rows.push(ExportedRow {
            triple: (parse(f[0], "i", line)?, parse(f[1], "j", line)?, parse(f[2], "k", line)?),
            orbit_weight: parse(f[3], "orbit_weight", line)?,
            features: f[4..width - 3]
                .iter()
                .map(|x| parse(x, "feature", line))
                .collect::<Result<_>>()?,
            b: parse(f[width - 3], "b", line)?,
            g: parse(f[width - 2], "g", line)?,
            nonzero,
        });
    }
    Ok(rows)
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<ExportedRow>> {
    let mut rows = Vec::new();
    for (line, text) in input.lines().enumerate() {
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Domain(format!("row {line}: {e}")))?;
        let bad = |what: &str| Error::Domain(format!("row {line}: bad {what} field"));
        let uint = |key: &str| v.get(key).and_then(|x| x.as_u64()).ok_or_else(|| bad(key));
        rows.push(ExportedRow {
            triple: (uint("i")? as usize, uint("j")? as usize, uint("k")? as usize),
            orbit_weight: uint("orbit_weight")?,
            features: v
                .get("features")
                .and_then(|x| x.as_array())
                .ok_or_else(|| bad("features"))?
                .iter()
                .map(|x| x.as_u64().map(|y| y as u32).ok_or_else(|| bad("features")))
                .collect::<Result<_>>()?,
            b: v.get("b").and_then(|x| x.as_f64()).ok_or_else(|| bad("b"))?,
            g: u32::try_from(uint("g")?).map_err(|_| bad("g"))?,
            nonzero: v.get("nonzero").and_then(|x| x.as_bool()).ok_or_else(|| bad("nonzero"))?,
        });
    }
    Ok(rows)
}

/// Recomputes `g` and `b` for a seeded random `fraction` of rows (at least one)
/// and returns how many were checked. Any mismatch is an internal
/// inconsistency.
pub fn verify_rows(
    rows: &[ExportedRow],
    chars: &CharacterTable,
    table: &BLoadingTable,
    fraction: f64,
    seed: u64,
) -> Result<usize> {
    if rows.is_empty() {
        return Ok(0);
    }
    let sums = ClassSums::new(chars)?;
    let take = ((rows.len() as f64 * fraction).ceil() as usize).clamp(1, rows.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, rows.len(), take).into_vec();
    picked.sort_unstable();
    for &at in &picked {
        let r = &rows[at];
        let (i, j, k) = r.triple;
        let g = sums.coefficient(i, j, k)?;
        let b = table.b_of_triple(i, j, k)?;
        let b_text: f64 = format!("{b:.6}").parse().expect("formatted float");
        if g != r.g as u64 || (g > 0) != r.nonzero || b_text != r.b {
            return Err(Error::Inconsistent(format!(
                "row {at} ({i}, {j}, {k}): exported g = {}, b = {}; recomputed g = {g}, b = {b_text}",
                r.g, r.b
            )));
        }
        if r.orbit_weight != orbit_weight(i, j, k) {
            return Err(Error::Inconsistent(format!("row {at}: orbit weight {}", r.orbit_weight)));
        }
    }
    Ok(take)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloading::b_loadings;
    use crate::characters::character_table;
    use crate::kronecker::kronecker_tensor;

    fn setup(n: usize) -> (CharacterTable, KroneckerTensor, BLoadingTable) {
        let chars = character_table(n).unwrap();
        let tensor = kronecker_tensor(n, &chars).unwrap();
        (chars, tensor, b_loadings(n).unwrap())
    }

    #[test]
    fn ends18_block_pads_with_zeros() {
        let padded = crate::partitions::Partition::new(vec![12, 4, 2]).unwrap().pad(18).unwrap();
        assert_eq!(FeatureMode::Ends18.block(&padded), vec![12, 4, 2, 0, 0, 0]);
        assert_eq!(FeatureMode::Ends18.block(&[3, 1, 1, 1]), vec![3, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn bsum1_at_six_has_all_multisets() {
        let (_, tensor, table) = setup(6);
        let mut buf = Vec::new();
        let n = export_dataset(&tensor, &table, FeatureMode::Bsum1, Format::Csv, &mut buf).unwrap();
        assert_eq!(n, 286);
        let rows = read_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 286);
        assert_eq!(rows.iter().map(|r| r.orbit_weight).sum::<u64>(), 1331);
        assert!(rows.iter().all(|r| r.features.is_empty()));
    }

    #[test]
    fn csv_and_jsonl_agree_and_round_trip() {
        let (chars, tensor, table) = setup(7);
        for mode in [FeatureMode::Full3n, FeatureMode::Ends18, FeatureMode::Bsum1] {
            let mut csv_buf = Vec::new();
            export_dataset(&tensor, &table, mode, Format::Csv, &mut csv_buf).unwrap();
            let mut json_buf = Vec::new();
            export_dataset(&tensor, &table, mode, Format::Jsonl, &mut json_buf).unwrap();
            let a = read_csv(&csv_buf[..]).unwrap();
            let b = read_jsonl(&json_buf[..]).unwrap();
            assert_eq!(a, b);
            assert!(a.iter().all(|r| r.features.len() == mode.width(7)));
            for (r, ((i, j, k), g)) in a.iter().zip(tensor.iter()) {
                assert_eq!(r.triple, (i, j, k));
                assert_eq!(r.g, g);
                let b6: f64 = format!("{:.6}", table.b_of_triple(i, j, k).unwrap()).parse().unwrap();
                assert_eq!(r.b.to_bits(), b6.to_bits());
            }
            assert_eq!(verify_rows(&a, &chars, &table, 0.01, 42).unwrap(), 7);
        }
    }

    #[test]
    fn verify_catches_a_tampered_row() {
        let (chars, tensor, table) = setup(6);
        let mut buf = Vec::new();
        export_dataset(&tensor, &table, FeatureMode::Bsum1, Format::Csv, &mut buf).unwrap();
        let mut rows = read_csv(&buf[..]).unwrap();
        rows[5].g += 1;
        assert!(matches!(
            verify_rows(&rows, &chars, &table, 1.0, 1),
            Err(Error::Inconsistent(_))
        ));
    }
}
