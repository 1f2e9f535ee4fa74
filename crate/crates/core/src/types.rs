//! Domain types and index conventions shared by every other module.
//!
//! A topographic sequence is an `l x phi x rho` volume: `l` slices along the
//! flight path, `phi` direction-of-arrival columns per slice, `rho` range-bin
//! rows per column. A surface assigns one row label per (slice, column).
//! All indices are zero-based; a label `s` for column (i, j) means the
//! ice-bottom boundary sits at row `s` of that column, `0 <= s <= rho - 1`.
//!
//! Intensities are stored as `f32` (sensor precision); all cost arithmetic
//! happens in `f64`.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Floor applied to every variance-like parameter (template variances and the
/// pairwise Gaussian std) so degenerate zero-variance training data cannot
/// produce infinite costs.
pub const VARIANCE_FLOOR: f64 = 1e-3;

/// A sequence of topographic slices plus the per-column air-surface labels and
/// optional per-slice bottom-bin constraints.
///
/// Immutable after construction; safe to share across threads for reads.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoSequence {
    l: usize,
    phi: usize,
    rho: usize,
    /// Column-contiguous intensities: index `((i * phi) + j) * rho + r`.
    intensity: Vec<f32>,
    /// Air-surface row label per (i, j): index `i * phi + j`.
    air: Vec<usize>,
    /// Per-slice optional bottom bin `(j_i, b_i)`: the surface at column `j_i`
    /// of slice `i` must lie at row `>= b_i`.
    bins: Vec<Option<(usize, usize)>>,
}

impl TopoSequence {
    /// Builds a sequence, checking structural consistency (dimensions at
    /// least 1, buffer lengths). Value-level invariants are reported by
    /// [`validate_sequence`], not here.
    pub fn new(
        l: usize,
        phi: usize,
        rho: usize,
        intensity: Vec<f32>,
        air: Vec<usize>,
        bins: Vec<Option<(usize, usize)>>,
    ) -> Result<Self, ModelError> {
        if l == 0 || phi == 0 || rho == 0 {
            return Err(ModelError::DimMismatch(format!(
                "dimensions must be >= 1, got {l}x{phi}x{rho}"
            )));
        }
        if intensity.len() != l * phi * rho {
            return Err(ModelError::DimMismatch(format!(
                "intensity has {} values, expected {}",
                intensity.len(),
                l * phi * rho
            )));
        }
        if air.len() != l * phi {
            return Err(ModelError::DimMismatch(format!(
                "air surface has {} labels, expected {}",
                air.len(),
                l * phi
            )));
        }
        if bins.len() != l {
            return Err(ModelError::DimMismatch(format!(
                "bins has {} entries, expected one per slice ({l})",
                bins.len()
            )));
        }
        Ok(Self {
            l,
            phi,
            rho,
            intensity,
            air,
            bins,
        })
    }

    /// `(l, phi, rho)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l, self.phi, self.rho)
    }

    pub fn slices(&self) -> usize {
        self.l
    }

    pub fn columns(&self) -> usize {
        self.phi
    }

    pub fn rows(&self) -> usize {
        self.rho
    }

    /// Intensity at slice `i`, column `j`, row `r`.
    pub fn intensity_at(&self, i: usize, j: usize, r: usize) -> f32 {
        self.intensity[(i * self.phi + j) * self.rho + r]
    }

    /// The full row profile of one column, as a contiguous slice of `rho` values.
    pub fn column(&self, i: usize, j: usize) -> &[f32] {
        let base = (i * self.phi + j) * self.rho;
        &self.intensity[base..base + self.rho]
    }

    /// Air-surface row label at (i, j).
    pub fn air_at(&self, i: usize, j: usize) -> usize {
        self.air[i * self.phi + j]
    }

    /// Bottom-bin constraint `(j_i, b_i)` for slice `i`, if present.
    pub fn bin(&self, i: usize) -> Option<(usize, usize)> {
        self.bins[i]
    }

    pub fn raw_intensity(&self) -> &[f32] {
        &self.intensity
    }

    pub fn raw_air(&self) -> &[usize] {
        &self.air
    }

    pub fn raw_bins(&self) -> &[Option<(usize, usize)>] {
        &self.bins
    }
}

/// A reconstructed ice-bottom surface: one row label per (slice, column).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surface {
    l: usize,
    phi: usize,
    labels: Vec<usize>,
}

impl Surface {
    pub fn new(l: usize, phi: usize, labels: Vec<usize>) -> Result<Self, ModelError> {
        if labels.len() != l * phi {
            return Err(ModelError::DimMismatch(format!(
                "surface has {} labels, expected {}",
                labels.len(),
                l * phi
            )));
        }
        Ok(Self { l, phi, labels })
    }

    /// A constant surface, useful as a starting point in tests.
    pub fn filled(l: usize, phi: usize, label: usize) -> Self {
        Self {
            l,
            phi,
            labels: vec![label; l * phi],
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.l, self.phi)
    }

    pub fn label(&self, i: usize, j: usize) -> usize {
        self.labels[i * self.phi + j]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// True if every label is a valid row index for `rho` rows.
    pub fn in_bounds(&self, rho: usize) -> bool {
        self.labels.iter().all(|&s| s < rho)
    }
}

/// Vertical appearance profile of the ice-bottom boundary: per-pixel mean and
/// variance of intensity for a window of `t` rows centered on the boundary.
///
/// Deserialization goes through the validating constructor, so files cannot
/// smuggle in even lengths or sub-floor variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemplateModelData", into = "TemplateModelData")]
pub struct TemplateModel {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

#[derive(Clone, Serialize, Deserialize)]
struct TemplateModelData {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl TryFrom<TemplateModelData> for TemplateModel {
    type Error = ModelError;
    fn try_from(d: TemplateModelData) -> Result<Self, ModelError> {
        TemplateModel::new(d.mu, d.sigma)
    }
}

impl From<TemplateModel> for TemplateModelData {
    fn from(t: TemplateModel) -> Self {
        TemplateModelData {
            mu: t.mu,
            sigma: t.sigma,
        }
    }
}

impl TemplateModel {
    /// `mu[k]` and `sigma[k]` describe template offset `p = k - (t-1)/2`.
    /// `t` must be odd; variances are floored at [`VARIANCE_FLOOR`].
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self, ModelError> {
        if mu.is_empty() || mu.len() % 2 == 0 {
            return Err(ModelError::InvalidParameter(format!(
                "template length must be odd and >= 1, got {}",
                mu.len()
            )));
        }
        if mu.len() != sigma.len() {
            return Err(ModelError::InvalidParameter(format!(
                "template mean/variance lengths differ: {} vs {}",
                mu.len(),
                sigma.len()
            )));
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParameter(
                "template parameters must be finite".into(),
            ));
        }
        let sigma = sigma.into_iter().map(|v| v.max(VARIANCE_FLOOR)).collect();
        Ok(Self { mu, sigma })
    }

    /// Template length in pixels (odd).
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-width: offsets run over `[-half, half]`.
    pub fn half(&self) -> usize {
        (self.mu.len() - 1) / 2
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// Everything the total energy needs: the template, the air-margin threshold
/// `tau`, the pairwise truncation window `alpha`, the pairwise Gaussian std
/// `sigma_hat`, and the per-column smoothness weights `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub template: TemplateModel,
    /// Air-margin threshold in rows: labels within `tau` rows below the air
    /// surface pay a linear penalty.
    pub tau: usize,
    /// Truncation window in rows: neighboring labels must differ by < alpha.
    pub alpha: usize,
    /// Std of the pairwise Gaussian, in rows.
    pub sigma_hat: f64,
    /// Per-column smoothness weights `beta_j` (a constant vector when no
    /// per-column information is available).
    pub beta: Vec<f64>,
}

impl EnergyParams {
    pub fn new(
        template: TemplateModel,
        tau: usize,
        alpha: usize,
        sigma_hat: f64,
        beta: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if alpha < 1 {
            return Err(ModelError::InvalidParameter("alpha must be >= 1".into()));
        }
        if !sigma_hat.is_finite() || sigma_hat <= 0.0 {
            return Err(ModelError::InvalidParameter(format!(
                "sigma_hat must be positive and finite, got {sigma_hat}"
            )));
        }
        if beta.is_empty() || beta.iter().any(|&b| !b.is_finite() || b <= 0.0) {
            return Err(ModelError::InvalidParameter(
                "beta weights must be positive and finite".into(),
            ));
        }
        Ok(Self {
            template,
            tau,
            alpha,
            sigma_hat: sigma_hat.max(VARIANCE_FLOOR),
            beta,
        })
    }

    /// Uniform-smoothness parameters with `beta_j = 1` for `phi` columns.
    pub fn uniform(
        template: TemplateModel,
        tau: usize,
        alpha: usize,
        sigma_hat: f64,
        phi: usize,
    ) -> Result<Self, ModelError> {
        Self::new(template, tau, alpha, sigma_hat, vec![1.0; phi])
    }

    /// `beta_j` for column `j`; the last weight repeats if `beta` is shorter
    /// than the grid (a constant vector behaves as expected either way).
    pub fn beta_at(&self, j: usize) -> f64 {
        *self
            .beta
            .get(j)
            .unwrap_or_else(|| self.beta.last().expect("beta is non-empty"))
    }

    /// Arithmetic mean of the configured weights (the fixed-beta baseline's
    /// single constant).
    pub fn beta_mean(&self) -> f64 {
        self.beta.iter().sum::<f64>() / self.beta.len() as f64
    }

    /// Checks that the weight vector matches a grid `phi` columns wide.
    pub fn check_phi(&self, phi: usize) -> Result<(), ModelError> {
        if self.beta.len() != phi {
            return Err(ModelError::DimMismatch(format!(
                "beta has {} weights but the sequence has {} columns",
                self.beta.len(),
                phi
            )));
        }
        Ok(())
    }
}

/// A hard pin: the surface at (i, j) is known to be exactly row `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pin {
    pub slice: usize,
    pub column: usize,
    pub label: usize,
}

/// A hard range: the surface at (i, j) is known to lie in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeConstraint {
    pub slice: usize,
    pub column: usize,
    pub lo: usize,
    pub hi: usize,
}

/// Extra evidence injected into the unary term: human feedback or external
/// ground truth marking true surface boundaries.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtraEvidence {
    pub pins: Vec<Pin>,
    pub ranges: Vec<RangeConstraint>,
}

impl ExtraEvidence {
    pub fn is_empty(&self) -> bool {
        self.pins.is_empty() && self.ranges.is_empty()
    }

    /// Checks indices against sequence dimensions and `lo <= hi`.
    pub fn validate(&self, seq: &TopoSequence) -> Result<(), ModelError> {
        let (l, phi, rho) = seq.dims();
        for p in &self.pins {
            if p.slice >= l || p.column >= phi || p.label >= rho {
                return Err(ModelError::InvalidParameter(format!(
                    "pin ({}, {}, {}) out of bounds for {l}x{phi}x{rho}",
                    p.slice, p.column, p.label
                )));
            }
        }
        for r in &self.ranges {
            if r.slice >= l || r.column >= phi || r.hi >= rho || r.lo > r.hi {
                return Err(ModelError::InvalidParameter(format!(
                    "range ({}, {}, {}..={}) invalid for {l}x{phi}x{rho}",
                    r.slice, r.column, r.lo, r.hi
                )));
            }
        }
        Ok(())
    }
}

/// One invariant violation found by [`validate_sequence`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Intensity at (i, j, r) is NaN or infinite.
    NonFiniteIntensity { slice: usize, column: usize, row: usize },
    /// Air label at (i, j) is outside `[0, rho-1]`.
    AirOutOfRange { slice: usize, column: usize, value: usize },
    /// Bin column index `j_i` is outside `[0, phi-1]`.
    BinColumnOutOfRange { slice: usize, value: usize },
    /// Bin row bound `b_i` is outside `[0, rho-1]`.
    BinRowOutOfRange { slice: usize, value: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonFiniteIntensity { slice, column, row } => {
                write!(f, "non-finite intensity at ({slice}, {column}, {row})")
            }
            Violation::AirOutOfRange { slice, column, value } => {
                write!(f, "out-of-range air label {value} at ({slice}, {column})")
            }
            Violation::BinColumnOutOfRange { slice, value } => {
                write!(f, "out-of-range bin column {value} at slice {slice}")
            }
            Violation::BinRowOutOfRange { slice, value } => {
                write!(f, "out-of-range bin row bound {value} at slice {slice}")
            }
        }
    }
}

/// Reports every value-level invariant violation in `seq`. An empty list
/// means the sequence is well formed.
pub fn validate_sequence(seq: &TopoSequence) -> Vec<Violation> {
    let (l, phi, rho) = seq.dims();
    let mut out = Vec::new();
    for i in 0..l {
        for j in 0..phi {
            for (r, v) in seq.column(i, j).iter().enumerate() {
                if !v.is_finite() {
                    out.push(Violation::NonFiniteIntensity {
                        slice: i,
                        column: j,
                        row: r,
                    });
                }
            }
            let a = seq.air_at(i, j);
            if a >= rho {
                out.push(Violation::AirOutOfRange {
                    slice: i,
                    column: j,
                    value: a,
                });
            }
        }
        if let Some((ji, bi)) = seq.bin(i) {
            if ji >= phi {
                out.push(Violation::BinColumnOutOfRange { slice: i, value: ji });
            }
            if bi >= rho {
                out.push(Violation::BinRowOutOfRange { slice: i, value: bi });
            }
        }
    }
    out
}

/// The interval `[lo, hi]` of labels at (i, j) with finite hard-constraint
/// cost: strictly below the air surface and, at a slice's designated bin
/// column, at or below the bin bound `b_i` in depth (row `>= b_i`).
pub fn feasible_label_range(
    seq: &TopoSequence,
    i: usize,
    j: usize,
) -> Result<(usize, usize), ModelError> {
    let (_, _, rho) = seq.dims();
    let mut lo = seq.air_at(i, j) + 1;
    if let Some((ji, bi)) = seq.bin(i) {
        if ji == j {
            lo = lo.max(bi);
        }
    }
    let hi = rho - 1;
    if lo > hi {
        return Err(ModelError::EmptyFeasibleSet { slice: i, column: j });
    }
    Ok((lo, hi))
}
