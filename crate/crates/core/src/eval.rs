//! Surface-vs-ground-truth metrics: mean and median-mean absolute
//! column-wise error in pixels, and precision within k pixels.

use serde::Serialize;

use crate::error::ModelError;
use crate::types::Surface;

/// Per-slice error summary.
#[derive(Debug, Clone, Serialize)]
pub struct SliceMetrics {
    pub slice: usize,
    pub mean_abs_error: f64,
    pub max_abs_error: usize,
}

/// Evaluation report for one predicted surface.
#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    /// Mean over all pixels of `|pred - gt|`.
    pub mean_error: f64,
    /// Median over slices of the per-slice mean absolute error. For an even
    /// slice count this is the mean of the two middle values.
    pub median_mean_error: f64,
    /// `(k, fraction of pixels with |pred - gt| <= k)`, sorted by `k`.
    pub precision_at: Vec<(usize, f64)>,
    pub per_slice: Vec<SliceMetrics>,
}

impl MetricsReport {
    /// Precision at tolerance `k`, if it was requested.
    pub fn precision(&self, k: usize) -> Option<f64> {
        self.precision_at
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|(_, f)| *f)
    }

    /// Plain-text table: one headline row of errors and precisions, then a
    /// per-slice breakdown.
    pub fn text_table(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let mut header = format!("{:<10} {:>10} {:>12}", "", "Mean", "Median Mean");
        for (k, _) in &self.precision_at {
            let label = format!("{k} px");
            let _ = write!(header, " {label:>9}");
        }
        out.push_str(&header);
        out.push('\n');
        let mut row = format!(
            "{:<10} {:>10.3} {:>12.3}",
            "surface", self.mean_error, self.median_mean_error
        );
        for (_, frac) in &self.precision_at {
            let _ = write!(row, " {:>8.1}%", frac * 100.0);
        }
        out.push_str(&row);
        out.push('\n');
        out.push('\n');
        out.push_str("per-slice mean |error| (max):\n");
        for s in &self.per_slice {
            let _ = writeln!(
                out,
                "  slice {:>4}: {:>8.3} ({})",
                s.slice, s.mean_abs_error, s.max_abs_error
            );
        }
        out
    }
}

/// Compares a predicted surface against ground truth at the given precision
/// tolerances. Fails with `DimMismatch` when shapes disagree.
pub fn evaluate(pred: &Surface, gt: &Surface, ks: &[usize]) -> Result<MetricsReport, ModelError> {
    if pred.dims() != gt.dims() {
        return Err(ModelError::DimMismatch(format!(
            "prediction is {:?}, ground truth is {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    let (l, phi) = pred.dims();
    let total = (l * phi) as f64;

    let mut abs_sum = 0.0f64;
    let mut per_slice = Vec::with_capacity(l);
    let mut within = vec![0usize; ks.len()];
    for i in 0..l {
        let mut slice_sum = 0.0f64;
        let mut slice_max = 0usize;
        for j in 0..phi {
            let d = pred.label(i, j).abs_diff(gt.label(i, j));
            slice_sum += d as f64;
            slice_max = slice_max.max(d);
            for (slot, &k) in within.iter_mut().zip(ks) {
                if d <= k {
                    *slot += 1;
                }
            }
        }
        abs_sum += slice_sum;
        per_slice.push(SliceMetrics {
            slice: i,
            mean_abs_error: slice_sum / phi as f64,
            max_abs_error: slice_max,
        });
    }

    let mut slice_means: Vec<f64> = per_slice.iter().map(|s| s.mean_abs_error).collect();
    slice_means.sort_by(|a, b| a.partial_cmp(b).expect("finite means"));
    let median_mean = if l % 2 == 1 {
        slice_means[l / 2]
    } else {
        (slice_means[l / 2 - 1] + slice_means[l / 2]) / 2.0
    };

    let mut precision_at: Vec<(usize, f64)> = ks
        .iter()
        .zip(within)
        .map(|(&k, n)| (k, n as f64 / total))
        .collect();
    precision_at.sort_by_key(|(k, _)| *k);

    Ok(MetricsReport {
        mean_error: abs_sum / total,
        median_mean_error: median_mean,
        precision_at,
        per_slice,
    })
}
