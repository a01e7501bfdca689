//! Series container and the plain-text CSV format used for input and output.
//!
//! A CSV series file holds one sample per row in the first column. The first
//! row may be a header. An empty field or `NA` marks a missing sample.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SsaError};

/// Finite real sequence with an optional presence mask.
///
/// Missing positions hold `NaN` in `values`; `mask[i]` is `true` when sample
/// `i` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<Vec<bool>>,
}

impl Series {
    /// Complete series. All samples must be finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(SsaError::SeriesTooShort { len: 0, min: 1 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SsaError::NonFinite(i));
        }
        Ok(Self { values, mask: None })
    }

    /// Series with explicit presence mask. Values at missing positions are ignored.
    pub fn with_mask(mut values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != values.len() {
            return Err(SsaError::MaskLength {
                mask: mask.len(),
                len: values.len(),
            });
        }
        if values.is_empty() {
            return Err(SsaError::SeriesTooShort { len: 0, min: 1 });
        }
        if !mask.iter().any(|&p| p) {
            return Err(SsaError::NoPresentSamples);
        }
        for (i, (v, &present)) in values.iter_mut().zip(&mask).enumerate() {
            if present {
                if !v.is_finite() {
                    return Err(SsaError::NonFinite(i));
                }
            } else {
                *v = f64::NAN;
            }
        }
        if mask.iter().all(|&p| p) {
            return Ok(Self { values, mask: None });
        }
        Ok(Self {
            values,
            mask: Some(mask),
        })
    }

    /// Builds a series from optional samples; `None` is missing.
    pub fn from_options(samples: &[Option<f64>]) -> Result<Self> {
        let values = samples.iter().map(|s| s.unwrap_or(f64::NAN)).collect();
        let mask = samples.iter().map(Option::is_some).collect();
        Self::with_mask(values, mask)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mask(&self) -> Option<&[bool]> {
        self.mask.as_deref()
    }

    pub fn is_present(&self, i: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[i])
    }

    pub fn has_missing(&self) -> bool {
        self.mask.is_some()
    }

    pub fn present_count(&self) -> usize {
        match &self.mask {
            None => self.values.len(),
            Some(m) => m.iter().filter(|&&p| p).count(),
        }
    }

    /// Mean over present samples.
    pub fn present_mean(&self) -> f64 {
        let (sum, count) = (0..self.len())
            .filter(|&i| self.is_present(i))
            .fold((0.0, 0usize), |(s, c), i| (s + self.values[i], c + 1));
        sum / count as f64
    }

    /// Values as `Option`s, `None` at missing positions.
    pub fn to_options(&self) -> Vec<Option<f64>> {
        (0..self.len())
            .map(|i| self.is_present(i).then(|| self.values[i]))
            .collect()
    }

    pub fn read_csv<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let mut samples = Vec::new();
        let mut lines = text.lines();
        // trailing blank lines are end-of-file padding, not missing samples
        let total = text.lines().count()
            - text.lines().rev().take_while(|l| l.trim().is_empty()).count();
        for row in 0..total {
            let line = lines.next().unwrap_or("");
            let field = line.split(',').next().unwrap_or("").trim();
            let field = field.trim_matches('"').trim();
            if field.is_empty() || field == "NA" {
                samples.push(None);
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => samples.push(Some(v)),
                Ok(_) => {
                    return Err(SsaError::Parse(format!(
                        "row {}: non-finite value '{field}'",
                        row + 1
                    )))
                }
                // a non-numeric first row is a header
                Err(_) if row == 0 => {}
                Err(_) => {
                    return Err(SsaError::Parse(format!(
                        "row {}: cannot parse '{field}' as a number",
                        row + 1
                    )))
                }
            }
        }
        if samples.is_empty() {
            return Err(SsaError::Parse("no samples".into()));
        }
        Self::from_options(&samples)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes one sample per row with a `value` header; missing samples as `NA`.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "value")?;
        for i in 0..self.len() {
            if self.is_present(i) {
                writeln!(writer, "{}", format_g17(self.values[i]))?;
            } else {
                writeln!(writer, "NA")?;
            }
        }
        Ok(())
    }
}

/// Formats a double with 17 significant digits.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.16e}")
}
