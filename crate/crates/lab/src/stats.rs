//! Ensemble summary statistics.

use serde::{Deserialize, Serialize};
use ucc_ordering::units::HARTREE_TO_KCAL_PER_MOL;

/// Summary of a set of energies (Hartree). `std` uses the n−1 denominator;
/// for a single member it is reported as 0 with `std_defined = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub std_defined: bool,
    pub min: f64,
    pub max: f64,
    pub range: f64,
    pub nonconverged: usize,
}

impl Summary {
    /// `values` must be nonempty.
    pub fn from_values(values: &[f64], converged: &[bool]) -> Self {
        assert!(!values.is_empty(), "summary of no values");
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let (std, std_defined) = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            ((ss / (n - 1) as f64).sqrt(), true)
        } else {
            (0.0, false)
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            n,
            mean,
            std,
            std_defined,
            min,
            max,
            range: max - min,
            nonconverged: converged.iter().filter(|c| !**c).count(),
        }
    }

    pub fn kcal(&self) -> KcalSummary {
        let k = |v: f64| v * HARTREE_TO_KCAL_PER_MOL;
        KcalSummary {
            mean: k(self.mean),
            std: k(self.std),
            min: k(self.min),
            max: k(self.max),
            range: k(self.range),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KcalSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub range: f64,
}

/// Linear-interpolated quantile of sorted data, `q` in [0, 1].
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Indices of values above the upper Tukey fence `Q3 + 1.5·IQR`.
pub fn upper_outliers(values: &[f64]) -> Vec<usize> {
    if values.len() < 4 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    let fence = q3 + 1.5 * (q3 - q1);
    (0..values.len()).filter(|&i| values[i] > fence).collect()
}
