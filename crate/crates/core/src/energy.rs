//! Cost terms and total-energy evaluation.
//!
//! The total energy of a surface is the sum of a unary cost per (slice,
//! column) pixel and a pairwise cost per undirected 4-neighbor edge, each
//! edge counted once. The unary cost combines a template appearance term, an
//! air-margin term, and a bottom-bin term; extra evidence (pins and ranges)
//! enters as additional hard constraints. The pairwise cost is the negative
//! log of a zero-mean Gaussian in the label difference, truncated to +inf
//! outside the window `|s - s_hat| < alpha`.
//!
//! Edge weight convention: the edge between columns `j` and `j+1` of a slice
//! and the edge between slices at column `j` both use `beta_j`; for the
//! horizontal edge that is the weight of its left column. Every solver in
//! this crate shares these definitions, so their energies are directly
//! comparable.

use crate::error::ModelError;
use crate::types::{EnergyParams, ExtraEvidence, Surface, TemplateModel, TopoSequence};

/// Template appearance cost of placing the boundary at row `s` of `column`:
/// squared residuals against the template profile, weighted by inverse
/// variance. Template offsets falling outside the column contribute zero.
pub fn template_cost(column: &[f32], tmpl: &TemplateModel, s: usize) -> f64 {
    let half = tmpl.half() as isize;
    let rho = column.len() as isize;
    let mut total = 0.0f64;
    for (k, p) in (-half..=half).enumerate() {
        let r = s as isize + p;
        if r < 0 || r >= rho {
            continue;
        }
        let residual = column[r as usize] as f64 - tmpl.mu()[k];
        total += residual * residual / tmpl.sigma()[k];
    }
    total
}

/// Air-margin cost: infinite at or above the air surface, zero more than
/// `tau` rows below it, and a linear ramp in between.
pub fn air_cost(s: usize, a: usize, tau: usize) -> f64 {
    if s <= a {
        return f64::INFINITY;
    }
    let d = s - a;
    if d > tau {
        0.0
    } else {
        (tau - d) as f64
    }
}

/// Bottom-bin cost: infinite above the bound `b`, zero at or below it.
pub fn bin_cost(s: usize, b: usize) -> f64 {
    if s < b {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Pairwise smoothness cost between neighboring labels `s` and `s_hat`:
/// `beta * (-ln N(s - s_hat; 0, sigma_hat))` while `|s - s_hat| < alpha`,
/// infinite outside the window. The Gaussian normalization constant stays in
/// so the value is the exact negative log density; it shifts every finite
/// energy equally and never changes the argmin.
pub fn pairwise_cost(s: usize, s_hat: usize, beta: f64, sigma_hat: f64, alpha: usize) -> f64 {
    let diff = s.abs_diff(s_hat);
    if diff >= alpha {
        return f64::INFINITY;
    }
    let d = diff as f64;
    beta * (d * d / (2.0 * sigma_hat * sigma_hat) + gaussian_log_norm(sigma_hat))
}

/// `ln(sigma_hat * sqrt(2 * pi))`, the Gaussian normalization constant.
pub fn gaussian_log_norm(sigma_hat: f64) -> f64 {
    (sigma_hat * (2.0 * std::f64::consts::PI).sqrt()).ln()
}

/// Precomputed unary costs for every (slice, column, label). Entries are
/// +inf exactly where a hard constraint (air, bin, or extra evidence)
/// excludes the label.
#[derive(Debug, Clone)]
pub struct UnaryTable {
    l: usize,
    phi: usize,
    rho: usize,
    data: Vec<f64>,
}

impl UnaryTable {
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l, self.phi, self.rho)
    }

    pub fn get(&self, i: usize, j: usize, s: usize) -> f64 {
        self.data[(i * self.phi + j) * self.rho + s]
    }

    /// All `rho` costs of one column, contiguous.
    pub fn column(&self, i: usize, j: usize) -> &[f64] {
        let base = (i * self.phi + j) * self.rho;
        &self.data[base..base + self.rho]
    }

    /// The contiguous interval of finite entries in a column, or `None` if
    /// the whole column is infinite. Hard constraints are all intervals, so
    /// the finite set is an interval by construction.
    pub fn finite_window(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        let col = self.column(i, j);
        let lo = col.iter().position(|c| c.is_finite())?;
        let hi = col.iter().rposition(|c| c.is_finite())?;
        Some((lo, hi))
    }
}

/// The label interval allowed by extra evidence at (i, j); inverted
/// (`lo > hi`) when constraints conflict.
fn extra_interval(extra: &ExtraEvidence, i: usize, j: usize, rho: usize) -> (usize, usize) {
    let mut lo = 0usize;
    let mut hi = rho - 1;
    for p in &extra.pins {
        if p.slice == i && p.column == j {
            lo = lo.max(p.label);
            hi = hi.min(p.label);
        }
    }
    for r in &extra.ranges {
        if r.slice == i && r.column == j {
            lo = lo.max(r.lo);
            hi = hi.min(r.hi);
        }
    }
    (lo, hi)
}

/// Builds the full unary table: template + air + bin (at the designated
/// column only) + extra-evidence hard constraints.
///
/// Expects a sequence that passes [`crate::types::validate_sequence`].
/// Fails with `EmptyFeasibleSet` naming the first column whose labels are
/// all excluded.
pub fn build_unary(
    seq: &TopoSequence,
    params: &EnergyParams,
    extra: &ExtraEvidence,
) -> Result<UnaryTable, ModelError> {
    extra.validate(seq)?;
    let (l, phi, rho) = seq.dims();
    let mut data = vec![0.0f64; l * phi * rho];
    for i in 0..l {
        let bin = seq.bin(i);
        for j in 0..phi {
            let column = seq.column(i, j);
            let a = seq.air_at(i, j);
            let (elo, ehi) = extra_interval(extra, i, j, rho);
            let base = (i * phi + j) * rho;
            let mut any_finite = false;
            for s in 0..rho {
                let mut cost = if s < elo || s > ehi {
                    f64::INFINITY
                } else {
                    air_cost(s, a, params.tau)
                };
                if let Some((ji, bi)) = bin {
                    if ji == j {
                        cost += bin_cost(s, bi);
                    }
                }
                if cost.is_finite() {
                    cost += template_cost(column, &params.template, s);
                    any_finite = true;
                }
                data[base + s] = cost;
            }
            if !any_finite {
                return Err(ModelError::EmptyFeasibleSet { slice: i, column: j });
            }
        }
    }
    Ok(UnaryTable { l, phi, rho, data })
}

/// Unary cost of one pixel, computed directly (no table).
fn unary_point(
    seq: &TopoSequence,
    params: &EnergyParams,
    extra: &ExtraEvidence,
    i: usize,
    j: usize,
    s: usize,
) -> f64 {
    let rho = seq.rows();
    let (elo, ehi) = extra_interval(extra, i, j, rho);
    if s < elo || s > ehi {
        return f64::INFINITY;
    }
    let mut cost = air_cost(s, seq.air_at(i, j), params.tau);
    if let Some((ji, bi)) = seq.bin(i) {
        if ji == j {
            cost += bin_cost(s, bi);
        }
    }
    if cost.is_finite() {
        cost += template_cost(seq.column(i, j), &params.template, s);
    }
    cost
}

/// Sum of pairwise costs over the undirected 4-neighbor grid, each edge once.
fn pairwise_sum(surface: &Surface, params: &EnergyParams) -> f64 {
    let (l, phi) = surface.dims();
    let mut total = 0.0f64;
    for i in 0..l {
        for j in 0..phi {
            let s = surface.label(i, j);
            if j + 1 < phi {
                total += pairwise_cost(
                    s,
                    surface.label(i, j + 1),
                    params.beta_at(j),
                    params.sigma_hat,
                    params.alpha,
                );
            }
            if i + 1 < l {
                total += pairwise_cost(
                    s,
                    surface.label(i + 1, j),
                    params.beta_at(j),
                    params.sigma_hat,
                    params.alpha,
                );
            }
        }
    }
    total
}

/// Total energy of a surface under the model: sum of unary costs plus the
/// pairwise sum over the 4-neighbor grid. Returns +inf if any term is
/// infinite. Panics if dimensions disagree or labels exceed `rho - 1`.
pub fn total_energy(
    surface: &Surface,
    seq: &TopoSequence,
    params: &EnergyParams,
    extra: &ExtraEvidence,
) -> f64 {
    let (l, phi, rho) = seq.dims();
    assert_eq!(surface.dims(), (l, phi), "surface/sequence dims disagree");
    assert!(surface.in_bounds(rho), "surface label out of range");
    let mut total = 0.0f64;
    for i in 0..l {
        for j in 0..phi {
            total += unary_point(seq, params, extra, i, j, surface.label(i, j));
        }
    }
    total + pairwise_sum(surface, params)
}

/// Total energy evaluated against a prebuilt unary table. Identical to
/// [`total_energy`] when `unary` was built from the same inputs; solvers use
/// this to avoid recomputing template costs.
pub fn total_energy_with_unary(
    surface: &Surface,
    unary: &UnaryTable,
    params: &EnergyParams,
) -> f64 {
    let (l, phi, _) = unary.dims();
    assert_eq!(surface.dims(), (l, phi), "surface/table dims disagree");
    let mut total = 0.0f64;
    for i in 0..l {
        for j in 0..phi {
            total += unary.get(i, j, surface.label(i, j));
        }
    }
    total + pairwise_sum(surface, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Pin;

    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

    fn tmpl3() -> TemplateModel {
        TemplateModel::new(vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn template_zero_residual_is_zero() {
        let col = vec![1.0f32, 2.0, 1.0, 0.0];
        assert_eq!(template_cost(&col, &tmpl3(), 1), 0.0);
    }

    #[test]
    fn template_hand_values() {
        let col = vec![1.0f32, 2.0, 1.0, 0.0];
        // s=2 samples rows 1..3: (2-1)^2 + (1-2)^2 + (0-1)^2 = 3
        assert_eq!(template_cost(&col, &tmpl3(), 2), 3.0);
    }

    #[test]
    fn template_boundary_offsets_contribute_zero() {
        let col = vec![1.0f32, 2.0, 1.0, 0.0];
        // s=0: offset -1 is out of range; rows 0,1 against mu[1], mu[2]:
        // (1-2)^2 + (2-1)^2 = 2
        assert_eq!(template_cost(&col, &tmpl3(), 0), 2.0);
    }

    #[test]
    fn air_cost_cases() {
        assert_eq!(air_cost(9, 10, 10), f64::INFINITY); // s - a < 0
        assert_eq!(air_cost(10, 10, 10), f64::INFINITY); // coincident surfaces
        assert_eq!(air_cost(22, 10, 10), 0.0); // s - a = 12 > tau
        assert_eq!(air_cost(14, 10, 10), 6.0); // tau - (s - a) = 10 - 4
    }

    #[test]
    fn bin_cost_cases() {
        assert_eq!(bin_cost(49, 50), f64::INFINITY);
        assert_eq!(bin_cost(50, 50), 0.0);
        for s in 0..4 {
            assert_eq!(bin_cost(s, 0), 0.0);
        }
    }

    #[test]
    fn pairwise_hand_values() {
        let c0 = pairwise_cost(5, 5, 1.0, 1.0, 3);
        assert!((c0 - LN_SQRT_2PI).abs() < 1e-12);
        let c1 = pairwise_cost(5, 6, 1.0, 1.0, 3);
        assert!((c1 - (0.5 + LN_SQRT_2PI)).abs() < 1e-12);
        assert_eq!(pairwise_cost(5, 8, 1.0, 1.0, 3), f64::INFINITY); // |d| == alpha
    }

    #[test]
    fn pairwise_symmetric_and_minimized_at_equal_labels() {
        for a in 0..6 {
            for b in 0..6 {
                let x = pairwise_cost(a, b, 1.7, 2.0, 4);
                let y = pairwise_cost(b, a, 1.7, 2.0, 4);
                assert_eq!(x, y);
                assert!(x >= pairwise_cost(a, a, 1.7, 2.0, 4));
            }
        }
    }

    fn seq_1x2() -> TopoSequence {
        // 1 slice, 2 columns, 8 rows; air at row 0 so labels >= 1 are feasible.
        TopoSequence::new(1, 2, 8, vec![0.0; 16], vec![0, 0], vec![None]).unwrap()
    }

    fn flat_params(phi: usize) -> EnergyParams {
        let tmpl = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
        EnergyParams::uniform(tmpl, 2, 4, 1.0, phi).unwrap()
    }

    #[test]
    fn build_unary_matches_feasible_range() {
        let seq = TopoSequence::new(
            1,
            2,
            8,
            vec![0.0; 16],
            vec![2, 3],
            vec![Some((1, 5))],
        )
        .unwrap();
        let params = flat_params(2);
        let table = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        for j in 0..2 {
            let (lo, hi) = crate::types::feasible_label_range(&seq, 0, j).unwrap();
            for s in 0..8 {
                let finite = table.get(0, j, s).is_finite();
                assert_eq!(finite, (lo..=hi).contains(&s), "column {j} label {s}");
            }
            assert_eq!(table.finite_window(0, j), Some((lo, hi)));
        }
    }

    #[test]
    fn build_unary_pin_semantics() {
        let seq = seq_1x2();
        let params = flat_params(2);
        let extra = ExtraEvidence {
            pins: vec![Pin { slice: 0, column: 0, label: 3 }],
            ranges: vec![],
        };
        let table = build_unary(&seq, &params, &extra).unwrap();
        for s in 0..8 {
            let v = table.get(0, 0, s);
            if s == 3 {
                assert!(v.is_finite());
            } else {
                assert_eq!(v, f64::INFINITY);
            }
        }
        // Unpinned column unaffected.
        assert!(table.get(0, 1, 3).is_finite());
    }

    #[test]
    fn build_unary_empty_column_errors() {
        let seq = TopoSequence::new(1, 1, 4, vec![0.0; 4], vec![3], vec![None]).unwrap();
        let params = flat_params(1);
        assert_eq!(
            build_unary(&seq, &params, &ExtraEvidence::default()).unwrap_err(),
            ModelError::EmptyFeasibleSet { slice: 0, column: 0 }
        );
    }

    #[test]
    fn total_energy_single_pixel_has_no_pairwise_terms() {
        let seq = TopoSequence::new(1, 1, 8, vec![0.0; 8], vec![0], vec![None]).unwrap();
        let params = flat_params(1);
        let surface = Surface::filled(1, 1, 4);
        let e = total_energy(&surface, &seq, &params, &ExtraEvidence::default());
        let table = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        assert_eq!(e, table.get(0, 0, 4));
    }

    #[test]
    fn total_energy_one_edge_hand_sum() {
        let seq = seq_1x2();
        let params = flat_params(2);
        let surface = Surface::filled(1, 2, 4);
        let e = total_energy(&surface, &seq, &params, &ExtraEvidence::default());
        let table = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        let expected =
            table.get(0, 0, 4) + table.get(0, 1, 4) + pairwise_cost(4, 4, 1.0, 1.0, 4);
        assert!((e - expected).abs() < 1e-12);
    }

    #[test]
    fn total_energy_below_air_is_infinite() {
        let seq = TopoSequence::new(1, 2, 8, vec![0.0; 16], vec![3, 3], vec![None]).unwrap();
        let params = flat_params(2);
        let surface = Surface::new(1, 2, vec![2, 5]).unwrap();
        assert_eq!(
            total_energy(&surface, &seq, &params, &ExtraEvidence::default()),
            f64::INFINITY
        );
    }

    #[test]
    fn total_energy_infinite_beyond_window() {
        let seq = seq_1x2();
        let params = flat_params(2); // alpha = 4
        let surface = Surface::new(1, 2, vec![1, 6]).unwrap(); // |diff| = 5 >= alpha
        assert_eq!(
            total_energy(&surface, &seq, &params, &ExtraEvidence::default()),
            f64::INFINITY
        );
    }

    #[test]
    fn table_energy_agrees_with_direct_energy() {
        let seq = TopoSequence::new(
            2,
            3,
            6,
            (0..36).map(|v| (v % 7) as f32 * 0.25).collect(),
            vec![0; 6],
            vec![Some((1, 2)), None],
        )
        .unwrap();
        let tmpl = TemplateModel::new(vec![0.5, 1.0, 0.5], vec![1.0, 0.5, 1.0]).unwrap();
        let params = EnergyParams::new(tmpl, 1, 3, 0.8, vec![1.0, 2.0, 0.5]).unwrap();
        let extra = ExtraEvidence::default();
        let table = build_unary(&seq, &params, &extra).unwrap();
        let surface = Surface::new(2, 3, vec![2, 3, 3, 2, 2, 4]).unwrap();
        let direct = total_energy(&surface, &seq, &params, &extra);
        let via_table = total_energy_with_unary(&surface, &table, &params);
        assert_eq!(direct, via_table);
    }
}
