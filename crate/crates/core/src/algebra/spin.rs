//! Spin-1/2 and spin-1 building blocks.
//!
//! Spin-1/2 operators carry eigenvalues ±1/2. For the dressed electron qubit
//! basis index 0 is |+⟩_e and index 1 is |−⟩_e, so `sz()` doubles as the
//! dressed σ_z = ½(|+⟩⟨+| − |−⟩⟨−|).

use ndarray::{array, Array1, Array2};

use crate::C64;

const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> Array2<C64> {
    Array2::eye(d)
}

pub fn sx() -> Array2<C64> {
    array![[c(0.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)]]
}

pub fn sy() -> Array2<C64> {
    array![[c(0.0, 0.0), c(0.0, -0.5)], [c(0.0, 0.5), c(0.0, 0.0)]]
}

pub fn sz() -> Array2<C64> {
    array![[c(0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-0.5, 0.0)]]
}

/// `|i⟩⟨j|` on a `d`-level system.
pub fn transition(d: usize, i: usize, j: usize) -> Array2<C64> {
    let mut m = Array2::zeros((d, d));
    m[[i, j]] = c(1.0, 0.0);
    m
}

pub fn basis_ket(d: usize, i: usize) -> Array1<C64> {
    let mut v = Array1::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

/// `|ψ⟩⟨ψ|`.
pub fn projector(psi: &Array1<C64>) -> Array2<C64> {
    let d = psi.len();
    Array2::from_shape_fn((d, d), |(i, j)| psi[i] * psi[j].conj())
}

pub fn up() -> Array1<C64> {
    basis_ket(2, 0)
}

pub fn down() -> Array1<C64> {
    basis_ket(2, 1)
}

/// `(|↑⟩ + |↓⟩)/√2`; for the electron this is the dressed |+⟩ only in the
/// bare basis, so electron code uses [`dressed_plus`] instead.
pub fn plus() -> Array1<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    array![c(s, 0.0), c(s, 0.0)]
}

pub fn minus() -> Array1<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    array![c(s, 0.0), c(-s, 0.0)]
}

pub fn dressed_plus() -> Array1<C64> {
    basis_ket(2, 0)
}

pub fn dressed_minus() -> Array1<C64> {
    basis_ket(2, 1)
}

/// `exp(−iθ I^y)` on a spin-1/2.
pub fn y_rotation(theta: f64) -> Array2<C64> {
    let (s, co) = (0.5 * theta).sin_cos();
    array![[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

/// Spin-1 `S_z` in the basis (|+1⟩, |0⟩, |−1⟩).
pub fn spin1_sz() -> Array2<C64> {
    Array2::from_diag(&array![c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

/// Spin-1 `S_x` in the basis (|+1⟩, |0⟩, |−1⟩).
pub fn spin1_sx() -> Array2<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    let v = c(s, 0.0);
    array![[z, v, z], [v, z, v], [z, v, z]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs_diff};

    #[test]
    fn squares_are_quarter_identity() {
        let q = identity(2).mapv(|x| x * 0.25);
        for op in [sx(), sy(), sz()] {
            assert!(max_abs_diff(&op.dot(&op), &q) < 1e-15);
        }
    }

    #[test]
    fn cyclic_commutators() {
        let i = C64::new(0.0, 1.0);
        assert!(max_abs_diff(&commutator(&sx(), &sy()), &sz().mapv(|x| x * i)) < 1e-14);
        assert!(max_abs_diff(&commutator(&sy(), &sz()), &sx().mapv(|x| x * i)) < 1e-14);
        assert!(max_abs_diff(&commutator(&sz(), &sx()), &sy().mapv(|x| x * i)) < 1e-14);
    }

    #[test]
    fn y_rotation_maps_up_to_plus() {
        let v = y_rotation(std::f64::consts::FRAC_PI_2).dot(&up());
        assert!((v[0] - plus()[0]).norm() < 1e-15 && (v[1] - plus()[1]).norm() < 1e-15);
    }

    #[test]
    fn spin1_squares() {
        let sz2 = spin1_sz().dot(&spin1_sz());
        assert_eq!(sz2[[0, 0]].re, 1.0);
        assert_eq!(sz2[[1, 1]].re, 0.0);
        assert_eq!(sz2[[2, 2]].re, 1.0);
        let sx2 = spin1_sx().dot(&spin1_sx());
        assert!((sx2.diag().sum().re - 2.0).abs() < 1e-14);
    }
}
