//! Parameter estimation from labeled sequences.
//!
//! The template profile comes from per-offset sample means and variances of
//! intensity around labeled boundaries. The pairwise parameters come from
//! the statistics of adjacent-label differences in the labeled surfaces:
//! `sigma_hat` is their sample standard deviation, `alpha` is one more than
//! the largest observed jump (so every training surface stays feasible under
//! its own parameters), and the per-column weights shrink smoothing where a
//! column's incident differences are noisier.

use crate::error::ModelError;
use crate::types::{Surface, TemplateModel, TopoSequence, VARIANCE_FLOOR};

/// Mean and Bessel-corrected sample variance; variance is 0 for n < 2.
fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}

/// Estimates a length-`t` template from labeled (sequence, surface) pairs:
/// for each offset, the sample mean and variance of the intensities at
/// `label + offset` over every labeled column. Offsets falling outside a
/// column are skipped; an offset with no in-range sample at all is an error.
pub fn learn_template(
    labeled: &[(&TopoSequence, &Surface)],
    t: usize,
) -> Result<TemplateModel, ModelError> {
    if t == 0 || t % 2 == 0 {
        return Err(ModelError::InvalidParameter(format!(
            "template length must be odd and >= 1, got {t}"
        )));
    }
    if labeled.is_empty() {
        return Err(ModelError::InsufficientData(
            "no labeled sequences provided".into(),
        ));
    }
    for (seq, surf) in labeled {
        let (l, phi, rho) = seq.dims();
        if surf.dims() != (l, phi) {
            return Err(ModelError::DimMismatch(format!(
                "labels are {:?} but the sequence is {l}x{phi}",
                surf.dims()
            )));
        }
        if !surf.in_bounds(rho) {
            return Err(ModelError::InvalidParameter(
                "training label exceeds rho - 1".into(),
            ));
        }
    }

    let half = (t - 1) as isize / 2;
    let mut mu = Vec::with_capacity(t);
    let mut sigma = Vec::with_capacity(t);
    for p in -half..=half {
        let mut samples = Vec::new();
        for (seq, surf) in labeled {
            let (l, phi, rho) = seq.dims();
            for i in 0..l {
                for j in 0..phi {
                    let r = surf.label(i, j) as isize + p;
                    if r >= 0 && r < rho as isize {
                        samples.push(seq.intensity_at(i, j, r as usize) as f64);
                    }
                }
            }
        }
        if samples.is_empty() {
            return Err(ModelError::InsufficientData(format!(
                "template offset {p} has no in-range training sample"
            )));
        }
        let (m, v) = mean_and_variance(&samples);
        mu.push(m);
        sigma.push(v);
    }
    TemplateModel::new(mu, sigma)
}

/// Learned pairwise parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEstimate {
    pub alpha: usize,
    pub sigma_hat: f64,
    pub beta: Vec<f64>,
}

/// Estimates `(alpha, sigma_hat, beta)` from labeled surfaces.
///
/// Differences are taken over every adjacent pair, intra-slice and
/// inter-slice. With `per_column_beta` the weight of column `j` is
/// `sigma_hat^2 / max(var_j, floor)` over the differences incident to `j`,
/// normalized to mean 1; otherwise every weight is 1.
pub fn learn_pairwise(
    labeled: &[&Surface],
    per_column_beta: bool,
) -> Result<PairwiseEstimate, ModelError> {
    let phi = match labeled.first() {
        Some(s) => s.dims().1,
        None => {
            return Err(ModelError::InsufficientData(
                "no labeled surfaces provided".into(),
            ))
        }
    };
    if labeled.iter().any(|s| s.dims().1 != phi) {
        return Err(ModelError::DimMismatch(
            "labeled surfaces disagree on phi".into(),
        ));
    }

    let mut diffs: Vec<f64> = Vec::new();
    let mut per_column: Vec<Vec<f64>> = vec![Vec::new(); phi];
    let mut max_jump = 0usize;
    for surf in labeled {
        let (l, _) = surf.dims();
        for i in 0..l {
            for j in 0..phi {
                let s = surf.label(i, j) as f64;
                if j + 1 < phi {
                    let d = surf.label(i, j + 1) as f64 - s;
                    diffs.push(d);
                    per_column[j].push(d);
                    per_column[j + 1].push(d);
                    max_jump = max_jump.max(surf.label(i, j + 1).abs_diff(surf.label(i, j)));
                }
                if i + 1 < l {
                    let d = surf.label(i + 1, j) as f64 - s;
                    diffs.push(d);
                    per_column[j].push(d);
                    max_jump = max_jump.max(surf.label(i + 1, j).abs_diff(surf.label(i, j)));
                }
            }
        }
    }
    if diffs.is_empty() {
        return Err(ModelError::InsufficientData(
            "labeled surfaces contain no adjacent label pairs".into(),
        ));
    }

    let (_, var) = mean_and_variance(&diffs);
    let sigma_hat = var.sqrt().max(VARIANCE_FLOOR);
    let alpha = max_jump + 1;

    let beta = if per_column_beta {
        let raw: Vec<f64> = per_column
            .iter()
            .map(|d| {
                let v = if d.is_empty() {
                    0.0
                } else {
                    mean_and_variance(d).1
                };
                sigma_hat * sigma_hat / v.max(VARIANCE_FLOOR)
            })
            .collect();
        let mean = raw.iter().sum::<f64>() / phi as f64;
        raw.into_iter().map(|b| b / mean).collect()
    } else {
        vec![1.0; phi]
    };

    Ok(PairwiseEstimate {
        alpha,
        sigma_hat,
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_from_columns(columns: Vec<Vec<f32>>) -> TopoSequence {
        // One slice; each inner vec is a column profile.
        let phi = columns.len();
        let rho = columns[0].len();
        let intensity: Vec<f32> = columns.into_iter().flatten().collect();
        TopoSequence::new(1, phi, rho, intensity, vec![0; phi], vec![None]).unwrap()
    }

    #[test]
    fn exact_profile_is_recovered_with_floor_variance() {
        // Two columns carrying the same profile (5, 9, 5) around label 2.
        let seq = seq_from_columns(vec![
            vec![0.0, 5.0, 9.0, 5.0, 0.0],
            vec![0.0, 5.0, 9.0, 5.0, 0.0],
        ]);
        let surf = Surface::new(1, 2, vec![2, 2]).unwrap();
        let tmpl = learn_template(&[(&seq, &surf)], 3).unwrap();
        assert_eq!(tmpl.mu(), &[5.0, 9.0, 5.0]);
        assert_eq!(tmpl.sigma(), &[VARIANCE_FLOOR, VARIANCE_FLOOR, VARIANCE_FLOOR]);
    }

    #[test]
    fn two_sample_mean() {
        let seq = seq_from_columns(vec![
            vec![1.0, 3.0, 1.0],
            vec![1.0, 7.0, 1.0],
        ]);
        let surf = Surface::new(1, 2, vec![1, 1]).unwrap();
        let tmpl = learn_template(&[(&seq, &surf)], 1).unwrap();
        assert_eq!(tmpl.mu(), &[5.0]); // (3 + 7) / 2
        assert_eq!(tmpl.sigma(), &[8.0]); // Bessel: ((3-5)^2 + (7-5)^2) / 1
    }

    #[test]
    fn starved_offset_is_an_error() {
        // All labels at row 0: offset -1 never lands in range.
        let seq = seq_from_columns(vec![vec![1.0, 2.0, 3.0]]);
        let surf = Surface::new(1, 1, vec![0]).unwrap();
        let err = learn_template(&[(&seq, &surf)], 3).unwrap_err();
        assert!(matches!(err, ModelError::InsufficientData(_)));
    }

    #[test]
    fn flat_surfaces_give_degenerate_estimates() {
        let flat = Surface::filled(3, 4, 7);
        let est = learn_pairwise(&[&flat], true).unwrap();
        assert_eq!(est.alpha, 1);
        assert_eq!(est.sigma_hat, VARIANCE_FLOOR);
        assert_eq!(est.beta, vec![1.0; 4]);
    }

    #[test]
    fn hand_computed_differences() {
        // Labels 5,4,4,5 in one slice: diffs -1, 0, +1.
        let surf = Surface::new(1, 4, vec![5, 4, 4, 5]).unwrap();
        let est = learn_pairwise(&[&surf], false).unwrap();
        assert!((est.sigma_hat - 1.0).abs() < 1e-12); // sample std of {-1,0,1}
        assert_eq!(est.alpha, 2);
        assert_eq!(est.beta, vec![1.0; 4]);
    }

    #[test]
    fn noisier_columns_get_smaller_beta() {
        // Columns 0..2 flat; columns 2..4 oscillate.
        let mut labels = Vec::new();
        for i in 0..6 {
            let wiggle = if i % 2 == 0 { 3 } else { 0 };
            labels.extend_from_slice(&[10, 10, 10, 10 + wiggle]);
        }
        let surf = Surface::new(6, 4, labels).unwrap();
        let est = learn_pairwise(&[&surf], true).unwrap();
        let mean = est.beta.iter().sum::<f64>() / 4.0;
        assert!((mean - 1.0).abs() < 1e-12, "beta mean {mean}");
        assert!(est.beta[3] < mean, "rough column should get less smoothing");
        assert!(est.beta[0] > est.beta[3]);
    }

    #[test]
    fn training_surfaces_stay_feasible_under_learned_alpha() {
        let surf = Surface::new(2, 3, vec![4, 6, 9, 4, 7, 9]).unwrap();
        let est = learn_pairwise(&[&surf], true).unwrap();
        let (l, phi) = surf.dims();
        for i in 0..l {
            for j in 0..phi {
                if j + 1 < phi {
                    assert!(surf.label(i, j).abs_diff(surf.label(i, j + 1)) < est.alpha);
                }
                if i + 1 < l {
                    assert!(surf.label(i, j).abs_diff(surf.label(i + 1, j)) < est.alpha);
                }
            }
        }
    }
}
