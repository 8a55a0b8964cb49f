use ndarray_linalg::{Cholesky, UPLO};
use serde::Serialize;

use crate::algebra::Superoperator;
use crate::linalg::hermitian_part;
use crate::Result;

/// Choi eigenvalue floor accepted as completely positive.
pub const CP_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelReport {
    pub trace_preservation_deviation: f64,
    pub hermiticity_preservation_deviation: f64,
    pub choi_min_eigenvalue: f64,
}

impl ChannelReport {
    pub fn is_cptp(&self, tp_tol: f64) -> bool {
        self.trace_preservation_deviation <= tp_tol && self.choi_min_eigenvalue >= -CP_TOLERANCE
    }
}

/// Trace preservation, Hermiticity preservation and the exact Choi minimum
/// eigenvalue.
pub fn validate_channel(s: &Superoperator) -> Result<ChannelReport> {
    Ok(ChannelReport {
        trace_preservation_deviation: s.trace_preservation_deviation(),
        hermiticity_preservation_deviation: s.hermiticity_preservation_deviation(),
        choi_min_eigenvalue: s.choi_min_eigenvalue()?,
    })
}

/// Cheap complete-positivity certificate: succeeds iff the Choi matrix
/// plus `tol·I` admits a Cholesky factorisation, i.e. every Choi eigenvalue
/// exceeds `−tol`.
pub fn cp_certificate(s: &Superoperator, tol: f64) -> bool {
    let mut c = hermitian_part(&s.choi());
    for i in 0..c.nrows() {
        c[[i, i]] += tol;
    }
    c.cholesky(UPLO::Lower).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spin;
    use crate::C64;
    use ndarray::Array2;

    #[test]
    fn unitary_channel_is_clean() {
        let s = Superoperator::from_unitary(&spin::y_rotation(0.3));
        let r = validate_channel(&s).unwrap();
        assert!(r.trace_preservation_deviation < 1e-10);
        assert!(r.hermiticity_preservation_deviation < 1e-10);
        assert!(r.choi_min_eigenvalue > -1e-10);
        assert!(cp_certificate(&s, CP_TOLERANCE));
    }

    #[test]
    fn amplitude_damping_is_cp() {
        let g: f64 = 0.3;
        let k0 = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new((1.0 - g).sqrt(), 0.0)]
        ];
        let k1 = ndarray::array![
            [C64::new(0.0, 0.0), C64::new(g.sqrt(), 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let m = crate::linalg::kron(&k0.mapv(|x| x.conj()), &k0) + crate::linalg::kron(&k1.mapv(|x| x.conj()), &k1);
        let s = Superoperator::new(m, 2).unwrap();
        let r = validate_channel(&s).unwrap();
        assert!(r.choi_min_eigenvalue >= -1e-12);
        assert!(r.trace_preservation_deviation < 1e-15);
        assert!(cp_certificate(&s, CP_TOLERANCE));
    }

    #[test]
    fn sign_flip_detected() {
        let mut m: Array2<C64> = Superoperator::from_unitary(&spin::y_rotation(0.3)).into_matrix();
        m[[3, 3]] = -m[[3, 3]];
        let s = Superoperator::new(m, 2).unwrap();
        assert!(validate_channel(&s).unwrap().choi_min_eigenvalue < -1e-3);
        assert!(!cp_certificate(&s, CP_TOLERANCE));
    }
}
