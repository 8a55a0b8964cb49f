use ndarray::{Array1, Array2};
use serde::Serialize;

use super::{spin, tol, HilbertLayout};
use crate::linalg::{self, kron};
use crate::{Error, Result, C64};

/// Worst-case deviations of a density operator from the physical set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Hygiene {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
}

impl Hygiene {
    pub fn of(m: &Array2<C64>) -> Result<Self> {
        let eig = linalg::hermitian_eigenvalues(m)?;
        Ok(Hygiene {
            trace_deviation: (linalg::trace(m) - C64::new(1.0, 0.0)).norm(),
            hermiticity_deviation: linalg::hermiticity_deviation(m),
            min_eigenvalue: eig.iter().cloned().fold(f64::INFINITY, f64::min),
        })
    }

    pub fn is_physical(&self) -> bool {
        self.trace_deviation <= tol::TRACE
            && self.hermiticity_deviation <= tol::HERMITIAN
            && self.min_eigenvalue >= tol::MIN_EIGENVALUE
    }

    /// Elementwise worst of two reports.
    pub fn worst(self, other: Hygiene) -> Hygiene {
        Hygiene {
            trace_deviation: self.trace_deviation.max(other.trace_deviation),
            hermiticity_deviation: self.hermiticity_deviation.max(other.hermiticity_deviation),
            min_eigenvalue: self.min_eigenvalue.min(other.min_eigenvalue),
        }
    }

    /// Neutral element for [`Hygiene::worst`].
    pub fn perfect() -> Hygiene {
        Hygiene {
            trace_deviation: 0.0,
            hermiticity_deviation: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }
}

/// Trace-one, Hermitian, positive semidefinite matrix on a layout.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: Array2<C64>,
    layout: HilbertLayout,
}

impl DensityOperator {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(matrix: Array2<C64>, layout: HilbertLayout) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.dim() != (d, d) {
            return Err(Error::Dimension(format!(
                "density matrix is {}x{} but layout dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let h = Hygiene::of(&matrix)?;
        if !h.is_physical() {
            return Err(Error::Numerical(format!(
                "not a density operator: trace deviation {:.3e}, hermiticity deviation {:.3e}, min eigenvalue {:.3e}",
                h.trace_deviation, h.hermiticity_deviation, h.min_eigenvalue
            )));
        }
        Ok(DensityOperator { matrix, layout })
    }

    pub fn from_pure(psi: &Array1<C64>, layout: HilbertLayout) -> Result<Self> {
        let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if (norm - 1.0).abs() > tol::NORMALIZATION {
            return Err(Error::InvalidArgument(format!(
                "state vector norm² is {norm}, expected 1"
            )));
        }
        Self::new(spin::projector(psi), layout)
    }

    pub fn maximally_mixed(layout: HilbertLayout) -> Self {
        let d = layout.total_dim();
        let m = Array2::<C64>::eye(d).mapv(|x| x / d as f64);
        DensityOperator { matrix: m, layout }
    }

    /// Product state from per-subsystem density matrices, in layout order.
    pub fn product(factors: &[Array2<C64>], layout: HilbertLayout) -> Result<Self> {
        if factors.len() != layout.len() {
            return Err(Error::Dimension(format!(
                "{} factors for a layout of {} subsystems",
                factors.len(),
                layout.len()
            )));
        }
        let mut m = Array2::<C64>::eye(1);
        for f in factors {
            m = kron(&m, f);
        }
        Self::new(m, layout)
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hygiene(&self) -> Result<Hygiene> {
        Hygiene::of(&self.matrix)
    }

    /// `self ⊗ other` with concatenated layouts.
    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        let mut subs = self.layout.subsystems().to_vec();
        subs.extend_from_slice(other.layout.subsystems());
        Ok(DensityOperator {
            matrix: kron(&self.matrix, &other.matrix),
            layout: HilbertLayout::new(subs)?,
        })
    }

    /// Reduced state on the `keep` subsystems (layout order is preserved).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let keep = self.layout.normalize_slots(keep)?;
        let kept_layout = self.layout.restrict(&keep)?;
        let out = partial_trace_matrix(&self.matrix, &self.layout, &keep, &kept_layout);
        Ok(DensityOperator {
            matrix: out,
            layout: kept_layout,
        })
    }

    pub fn purity(&self) -> f64 {
        self.matrix
            .iter()
            .zip(self.matrix.t().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    /// `Re tr(A ρ)`.
    pub fn expectation(&self, op: &Array2<C64>) -> f64 {
        let d = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += op[[i, j]] * self.matrix[[j, i]];
            }
        }
        acc.re
    }
}

/// Partial trace over everything outside `keep` (which must be sorted and
/// valid for `layout`).
pub(crate) fn partial_trace_matrix(
    m: &Array2<C64>,
    layout: &HilbertLayout,
    keep: &[usize],
    kept_layout: &HilbertLayout,
) -> Array2<C64> {
    let d = layout.total_dim();
    let dk = kept_layout.total_dim();
    let traced: Vec<usize> = (0..layout.len()).filter(|i| !keep.contains(i)).collect();
    let mut kept_idx = vec![0usize; d];
    let mut traced_idx = vec![0usize; d];
    for (a, (k, t)) in kept_idx.iter_mut().zip(traced_idx.iter_mut()).enumerate() {
        let digits = layout.digits(a);
        *k = keep
            .iter()
            .fold(0, |acc, &s| acc * layout.subsystems()[s].dim + digits[s]);
        *t = traced
            .iter()
            .fold(0, |acc, &s| acc * layout.subsystems()[s].dim + digits[s]);
    }
    let mut out = Array2::<C64>::zeros((dk, dk));
    for a in 0..d {
        for b in 0..d {
            if traced_idx[a] == traced_idx[b] {
                out[[kept_idx[a], kept_idx[b]]] += m[[a, b]];
            }
        }
    }
    out
}
