//! Outcome histograms — counted (from trial runs) or exact (from Born
//! probabilities) — and their CSV export.

use std::io::{self, Write};

use crate::scalar::Real;

/// Labeled outcome distribution. Counted histograms keep both counts and the
/// derived frequencies; exact distributions carry probabilities only.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<T> {
    labels: Vec<String>,
    counts: Option<Vec<u64>>,
    probabilities: Vec<T>,
}

impl<T: Real> Histogram<T> {
    /// Exact distribution; probabilities must already sum to ~1.
    pub fn exact(labels: Vec<String>, probabilities: Vec<T>) -> Self {
        assert_eq!(labels.len(), probabilities.len());
        Self {
            labels,
            counts: None,
            probabilities,
        }
    }

    /// Counted histogram; probabilities are count/total (all zero for an
    /// empty run).
    pub fn from_counts(labels: Vec<String>, counts: Vec<u64>) -> Self {
        assert_eq!(labels.len(), counts.len());
        let total: u64 = counts.iter().sum();
        let probabilities = counts
            .iter()
            .map(|&c| {
                if total == 0 {
                    T::zero()
                } else {
                    T::from_u64(c).unwrap() / T::from_u64(total).unwrap()
                }
            })
            .collect();
        Self {
            labels,
            counts: Some(counts),
            probabilities,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> Option<&[u64]> {
        self.counts.as_deref()
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn total_count(&self) -> u64 {
        self.counts.as_ref().map_or(0, |c| c.iter().sum())
    }

    pub fn probabilities_f64(&self) -> Vec<f64> {
        self.probabilities.iter().map(|p| p.as_f64()).collect()
    }

    /// Writes `label,count,probability` rows; the count cell is empty for
    /// exact distributions.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "label,count,probability")?;
        for (i, label) in self.labels.iter().enumerate() {
            match &self.counts {
                Some(counts) => writeln!(w, "{},{},{}", label, counts[i], self.probabilities[i])?,
                None => writeln!(w, "{},,{}", label, self.probabilities[i])?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}
