//! Per-slice exact Viterbi baselines.
//!
//! Both baselines solve each slice independently as a chain of `phi` columns
//! with the shared unary table, ignoring inter-slice edges (so the assembled
//! surface may be discontinuous across slices). The fixed-weight variant
//! smooths every edge with the mean of the configured weights; the dynamic
//! variant uses the per-column weights.

use crate::energy::{pairwise_cost, UnaryTable};
use crate::error::ModelError;
use crate::msgpass::MessageKernel;
use crate::types::{EnergyParams, ExtraEvidence, Surface, TopoSequence};

/// How the pairwise weight is chosen per intra-slice edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMode {
    /// One constant weight for every edge: the arithmetic mean of `beta`.
    Fixed,
    /// The per-column weight `beta_j` for the edge between columns j, j+1.
    Dynamic,
}

impl BetaMode {
    /// Weight of the edge between columns `j` and `j + 1`.
    pub fn edge_beta(self, params: &EnergyParams, j: usize) -> f64 {
        match self {
            BetaMode::Fixed => params.beta_mean(),
            BetaMode::Dynamic => params.beta_at(j),
        }
    }
}

/// Exact minimum-energy path for one slice by dynamic programming over its
/// columns, using the message kernel for the per-edge minimization. Ties
/// break toward smaller labels. Fails with `Infeasible` naming the first
/// column at which no label remains reachable.
pub fn viterbi_slice(
    unary: &UnaryTable,
    slice: usize,
    params: &EnergyParams,
    mode: BetaMode,
    kernel: MessageKernel,
) -> Result<Vec<usize>, ModelError> {
    let (_, phi, rho) = unary.dims();
    let mut cost = unary.column(slice, 0).to_vec();
    if cost.iter().all(|c| c.is_infinite()) {
        return Err(ModelError::Infeasible { slice, column: 0 });
    }
    let mut backptr: Vec<Vec<usize>> = Vec::with_capacity(phi);
    for j in 1..phi {
        let beta = mode.edge_beta(params, j - 1);
        let msg = kernel.run(&cost, beta, params.sigma_hat, params.alpha);
        let mut any_finite = false;
        let mut next = vec![f64::INFINITY; rho];
        for (s, slot) in next.iter_mut().enumerate() {
            let c = msg.costs[s] + unary.get(slice, j, s);
            if c.is_finite() {
                any_finite = true;
            }
            *slot = c;
        }
        if !any_finite {
            return Err(ModelError::Infeasible { slice, column: j });
        }
        backptr.push(msg.argmin);
        cost = next;
    }

    let mut best = f64::INFINITY;
    let mut label = usize::MAX;
    for (s, &c) in cost.iter().enumerate() {
        if c < best {
            best = c;
            label = s;
        }
    }
    debug_assert!(best.is_finite());

    let mut labels = vec![0usize; phi];
    labels[phi - 1] = label;
    for j in (1..phi).rev() {
        label = backptr[j - 1][label];
        labels[j - 1] = label;
    }
    Ok(labels)
}

/// Energy of a single-slice path under the given beta mode, summed in the
/// same column order the DP accumulates it.
pub fn slice_path_energy(
    unary: &UnaryTable,
    slice: usize,
    labels: &[usize],
    params: &EnergyParams,
    mode: BetaMode,
) -> f64 {
    let mut e = unary.get(slice, 0, labels[0]);
    for j in 1..labels.len() {
        e += pairwise_cost(
            labels[j - 1],
            labels[j],
            mode.edge_beta(params, j - 1),
            params.sigma_hat,
            params.alpha,
        );
        e += unary.get(slice, j, labels[j]);
    }
    e
}

/// Runs [`viterbi_slice`] on every slice independently and assembles the
/// results into a surface.
pub fn solve_independent(
    seq: &TopoSequence,
    params: &EnergyParams,
    extra: &ExtraEvidence,
    mode: BetaMode,
    kernel: MessageKernel,
) -> Result<Surface, ModelError> {
    params.check_phi(seq.columns())?;
    let unary = crate::energy::build_unary(seq, params, extra)?;
    solve_independent_with_unary(&unary, params, mode, kernel)
}

/// Same as [`solve_independent`] but against a prebuilt unary table.
pub fn solve_independent_with_unary(
    unary: &UnaryTable,
    params: &EnergyParams,
    mode: BetaMode,
    kernel: MessageKernel,
) -> Result<Surface, ModelError> {
    let (l, phi, _) = unary.dims();
    let mut labels = Vec::with_capacity(l * phi);
    for i in 0..l {
        labels.extend(viterbi_slice(unary, i, params, mode, kernel)?);
    }
    Surface::new(l, phi, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::build_unary;
    use crate::types::TemplateModel;

    fn params_for(phi: usize, alpha: usize) -> EnergyParams {
        let tmpl = TemplateModel::new(vec![0.0], vec![1.0]).unwrap();
        EnergyParams::uniform(tmpl, 0, alpha, 1.0, phi).unwrap()
    }

    #[test]
    fn single_column_slice_is_unary_argmin() {
        // rho = 5, intensities make label 3 cheapest (intensity^2 cost).
        let intensity = vec![3.0f32, 2.0, 1.5, 0.1, 2.5];
        let seq = TopoSequence::new(1, 1, 5, intensity, vec![0], vec![None]).unwrap();
        let params = params_for(1, 3);
        let unary = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        let labels =
            viterbi_slice(&unary, 0, &params, BetaMode::Dynamic, MessageKernel::Fast).unwrap();
        assert_eq!(labels, vec![3]);
    }

    #[test]
    fn planted_cheap_path_is_recovered() {
        // 4 columns, 6 rows; plant zeros along 2,3,3,2 and big costs elsewhere.
        let path = [2usize, 3, 3, 2];
        let mut intensity = vec![4.0f32; 24];
        for (j, &s) in path.iter().enumerate() {
            intensity[j * 6 + s] = 0.0;
        }
        let seq = TopoSequence::new(1, 4, 6, intensity, vec![0; 4], vec![None]).unwrap();
        let params = params_for(4, 3);
        let unary = build_unary(&seq, &params, &ExtraEvidence::default()).unwrap();
        for mode in [BetaMode::Fixed, BetaMode::Dynamic] {
            for kernel in [MessageKernel::Fast, MessageKernel::Naive] {
                let labels = viterbi_slice(&unary, 0, &params, mode, kernel).unwrap();
                assert_eq!(labels, path);
            }
        }
    }

    #[test]
    fn window_conflict_is_infeasible() {
        // Column 0 pinned to rows 1..=2, column 1 feasible only at rows >= 8,
        // alpha = 2: no path can bridge the gap.
        let seq = TopoSequence::new(1, 2, 10, vec![0.0; 20], vec![0, 7], vec![None]).unwrap();
        let mut params = params_for(2, 2);
        params.tau = 0;
        let extra = ExtraEvidence {
            ranges: vec![crate::types::RangeConstraint { slice: 0, column: 0, lo: 1, hi: 2 }],
            pins: vec![],
        };
        let unary = build_unary(&seq, &params, &extra).unwrap();
        let err = viterbi_slice(&unary, 0, &params, BetaMode::Dynamic, MessageKernel::Fast)
            .unwrap_err();
        assert_eq!(err, ModelError::Infeasible { slice: 0, column: 1 });
    }
}
