//! Labeled datasets and the geometric preconditions the trainers check:
//! empirical covariance, symmetrization under negation, and the radius of
//! the input set.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TronError};
use crate::linalg::{RealMatrix, RealVector};

/// One training pair `(x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub x: RealVector,
    pub y: f64,
}

impl LabeledSample {
    pub fn new(x: RealVector, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(TronError::NonFinite("label"));
        }
        Ok(LabeledSample { x, y })
    }
}

/// How labels are assigned to the mirror points added by [`Dataset::symmetrize`].
///
/// No relation between the label of `x` and the label of `-x` is imposed by
/// the training guarantees, so the rule is a free choice.
#[derive(Debug, Clone)]
pub enum LabelRule {
    /// Mirror points get label 0 (the default; matches the worked two-point set).
    Zero,
    /// Mirror points copy the label of the original point.
    Copy,
    /// Mirror points get `f(-x)` from a caller-supplied map.
    Custom(fn(&RealVector) -> f64),
}

/// Non-empty multiset of samples sharing one input dimension.
///
/// Duplicates are kept: functionally identical nets of different widths are
/// distinct objects, and duplicated data points carry meaning for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    n: usize,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Result<Self> {
        let first = samples.first().ok_or(TronError::EmptyDataset)?;
        let n = first.x.dim();
        for s in &samples {
            if s.x.dim() != n {
                return Err(TronError::DimensionMismatch {
                    context: "Dataset::new",
                    expected: n,
                    got: s.x.dim(),
                });
            }
        }
        Ok(Dataset { samples, n })
    }

    pub fn from_pairs(pairs: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let samples = pairs
            .into_iter()
            .map(|(x, y)| LabeledSample::new(RealVector::new(x)?, y))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledSample> {
        self.samples.iter()
    }

    /// Empirical second moment `(1/S) sum_i x_i x_i^T` (symmetric PSD).
    pub fn empirical_covariance(&self) -> RealMatrix {
        let mut sigma = RealMatrix::zeros(self.n, self.n);
        let w = 1.0 / self.samples.len() as f64;
        for s in &self.samples {
            sigma.add_outer(w, &s.x);
        }
        sigma
    }

    /// Max Euclidean norm over the input set.
    pub fn radius(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.x.norm())
            .fold(0.0f64, f64::max)
    }

    /// Close the input set under negation.
    ///
    /// Original samples are preserved; for every input `x` whose negation is
    /// not already present (as a multiset: counts of `x` and `-x` must match),
    /// a mirror sample `-x` is appended with a label given by `rule`. Already
    /// symmetric inputs come back unchanged.
    pub fn symmetrize(&self, rule: LabelRule) -> Dataset {
        let mut counts: HashMap<Vec<u64>, i64> = HashMap::new();
        for s in &self.samples {
            *counts.entry(sign_key(&s.x, 1.0)).or_insert(0) += 1;
        }
        let mut out = self.samples.clone();
        // Deficit of -x relative to x, consumed as we append mirrors.
        let mut deficit: HashMap<Vec<u64>, i64> = HashMap::new();
        for s in &self.samples {
            let key_neg = sign_key(&s.x, -1.0);
            let have_neg = counts.get(&key_neg).copied().unwrap_or(0);
            let key = sign_key(&s.x, 1.0);
            let have = counts.get(&key).copied().unwrap_or(0);
            if have_neg >= have {
                continue;
            }
            let d = deficit.entry(key).or_insert(have - have_neg);
            if *d > 0 {
                *d -= 1;
                let mx = s.x.neg();
                let y = match rule {
                    LabelRule::Zero => 0.0,
                    LabelRule::Copy => s.y,
                    LabelRule::Custom(f) => f(&mx),
                };
                out.push(LabeledSample { x: mx, y });
            }
        }
        Dataset {
            samples: out,
            n: self.n,
        }
    }

    /// True when every input's negation is present with matching multiplicity.
    pub fn is_input_symmetric(&self) -> bool {
        self.asymmetric_index().is_none()
    }

    /// Index of the first sample whose negation is under-represented, if any.
    pub fn asymmetric_index(&self) -> Option<usize> {
        let mut counts: HashMap<Vec<u64>, i64> = HashMap::new();
        for s in &self.samples {
            *counts.entry(sign_key(&s.x, 1.0)).or_insert(0) += 1;
        }
        for (i, s) in self.samples.iter().enumerate() {
            let have = counts.get(&sign_key(&s.x, 1.0)).copied().unwrap_or(0);
            let have_neg = counts.get(&sign_key(&s.x, -1.0)).copied().unwrap_or(0);
            if have != have_neg {
                return Some(i);
            }
        }
        None
    }

    /// Load from CSV with header `x0,...,x{n-1},y`, one sample per row.
    pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(TronError::Format(
                "dataset csv needs at least one input column and a label column".into(),
            ));
        }
        let n = headers.len() - 1;
        for (i, h) in headers.iter().take(n).enumerate() {
            let expect = format!("x{i}");
            if h != expect {
                return Err(TronError::Format(format!(
                    "dataset csv header column {i} is {h:?}, expected {expect:?}"
                )));
            }
        }
        if &headers[n] != "y" {
            return Err(TronError::Format(format!(
                "dataset csv last header column is {:?}, expected \"y\"",
                &headers[n]
            )));
        }
        let mut samples = Vec::new();
        for (row_idx, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != n + 1 {
                return Err(TronError::Format(format!(
                    "dataset csv row {} has {} columns, expected {}",
                    row_idx + 1,
                    record.len(),
                    n + 1
                )));
            }
            let mut x = Vec::with_capacity(n);
            for field in record.iter().take(n) {
                x.push(parse_f64(field, row_idx)?);
            }
            let y = parse_f64(&record[n], row_idx)?;
            samples.push(LabeledSample::new(RealVector::new(x)?, y)?);
        }
        Dataset::new(samples)
    }

    pub fn read_csv_path(path: &Path) -> Result<Dataset> {
        let file = std::fs::File::open(path)?;
        Dataset::read_csv(file)
    }

    /// Write in the same CSV layout the loader accepts.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let header: Vec<String> = (0..self.n)
            .map(|i| format!("x{i}"))
            .chain(std::iter::once("y".to_string()))
            .collect();
        writeln!(writer, "{}", header.join(","))?;
        for s in &self.samples {
            let mut fields: Vec<String> = s.x.as_slice().iter().map(|v| fmt_f64(*v)).collect();
            fields.push(fmt_f64(s.y));
            writeln!(writer, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Round-trip-safe float formatting: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str, row: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        TronError::Format(format!("dataset csv row {}: bad float {field:?}", row + 1))
    })
}

/// Bit-exact hash key for `sign * x`, with -0.0 normalized to 0.0.
fn sign_key(x: &RealVector, sign: f64) -> Vec<u64> {
    x.as_slice()
        .iter()
        .map(|v| {
            let s = sign * v;
            let s = if s == 0.0 { 0.0 } else { s };
            s.to_bits()
        })
        .collect()
}
