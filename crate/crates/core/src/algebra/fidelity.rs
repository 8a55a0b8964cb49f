use ndarray::{Array1, Array2};

use super::{tol, DensityOperator, Superoperator};
use crate::linalg::unitarity_deviation;
use crate::{Error, Result, C64};

/// `⟨ψ|ρ|ψ⟩` for a normalised `ψ`.
pub fn state_fidelity(rho: &DensityOperator, psi: &Array1<C64>) -> Result<f64> {
    let d = rho.dim();
    if psi.len() != d {
        return Err(Error::Dimension(format!(
            "state of length {} against dimension {d}",
            psi.len()
        )));
    }
    let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
    if (norm - 1.0).abs() > tol::NORMALIZATION {
        return Err(Error::InvalidArgument(format!(
            "state vector norm² is {norm}, expected 1"
        )));
    }
    let m = rho.matrix();
    let mut f = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            f += psi[i].conj() * m[[i, j]] * psi[j];
        }
    }
    Ok(f.re.clamp(0.0, 1.0))
}

/// Overlap of the Choi state of `channel` with that of `target`:
/// `F = (1/d²) Σ_ij ⟨i|U† Φ(|i⟩⟨j|) U|j⟩`.
pub fn choi_process_fidelity(channel: &Superoperator, target: &Array2<C64>) -> Result<f64> {
    let d = channel.dim();
    if target.dim() != (d, d) {
        return Err(Error::Dimension(format!(
            "target unitary is {}x{} but channel dimension is {d}",
            target.nrows(),
            target.ncols()
        )));
    }
    let tp = channel.trace_preservation_deviation();
    if tp > tol::TRACE_PRESERVING {
        return Err(Error::Numerical(format!(
            "channel is not trace preserving (deviation {tp:.3e})"
        )));
    }
    let ud = unitarity_deviation(target);
    if ud > tol::UNITARY {
        return Err(Error::InvalidArgument(format!(
            "target is not unitary (deviation {ud:.3e})"
        )));
    }
    let s = channel.matrix();
    let mut f = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            let col = i + j * d;
            for a in 0..d {
                for b in 0..d {
                    f += target[[a, i]].conj() * s[[a + b * d, col]] * target[[b, j]];
                }
            }
        }
    }
    Ok((f.re / (d * d) as f64).clamp(0.0, 1.0))
}
