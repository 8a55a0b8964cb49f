use ndarray::{Array1, Array2, ArrayView1};

use crate::linalg::{self, kron};
use crate::{Error, Result, C64};

/// Column-stacking vectorisation: `vec(ρ)[i + j·d] = ρ[i, j]`.
pub fn vectorize(m: &Array2<C64>) -> Array1<C64> {
    let d = m.nrows();
    Array1::from_shape_fn(d * d, |k| m[[k % d, k / d]])
}

pub fn unvectorize(v: ArrayView1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |(i, j)| v[i + j * d])
}

/// Linear map on `d×d` matrices in the column-stacked representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    matrix: Array2<C64>,
    dim: usize,
}

impl Superoperator {
    pub fn new(matrix: Array2<C64>, dim: usize) -> Result<Self> {
        let n = dim * dim;
        if matrix.dim() != (n, n) {
            return Err(Error::Dimension(format!(
                "superoperator is {}x{}, expected {n}x{n} for dimension {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Superoperator { matrix, dim })
    }

    pub fn identity(dim: usize) -> Self {
        Superoperator {
            matrix: Array2::eye(dim * dim),
            dim,
        }
    }

    /// `ρ ↦ U ρ U†`.
    pub fn from_unitary(u: &Array2<C64>) -> Self {
        let d = u.nrows();
        Superoperator {
            matrix: kron(&u.mapv(|x| x.conj()), u),
            dim: d,
        }
    }

    /// Completely depolarising channel `ρ ↦ tr(ρ) I/d`.
    pub fn depolarizing(dim: usize) -> Self {
        let n = dim * dim;
        let mut m = Array2::<C64>::zeros((n, n));
        for a in 0..dim {
            for i in 0..dim {
                m[[a + a * dim, i + i * dim]] = C64::new(1.0 / dim as f64, 0.0);
            }
        }
        Superoperator { matrix: m, dim }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, rho: &Array2<C64>) -> Result<Array2<C64>> {
        if rho.dim() != (self.dim, self.dim) {
            return Err(Error::Dimension(format!(
                "cannot apply a dimension-{} map to a {}x{} matrix",
                self.dim,
                rho.nrows(),
                rho.ncols()
            )));
        }
        let v = self.matrix.dot(&vectorize(rho));
        Ok(unvectorize(v.view(), self.dim))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Superoperator) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::Dimension(format!(
                "composing maps of dimension {} and {}",
                self.dim, first.dim
            )));
        }
        Ok(Superoperator {
            matrix: self.matrix.dot(&first.matrix),
            dim: self.dim,
        })
    }

    /// `n`-fold composition by binary exponentiation.
    pub fn power(&self, n: u64) -> Self {
        let mut result = Superoperator::identity(self.dim);
        let mut base = self.matrix.clone();
        let mut k = n;
        let mut first = true;
        while k > 0 {
            if k & 1 == 1 {
                result.matrix = if first { base.clone() } else { result.matrix.dot(&base) };
                first = false;
            }
            k >>= 1;
            if k > 0 {
                base = base.dot(&base);
            }
        }
        result
    }

    /// Choi matrix `J = Σ_ij E_ij ⊗ Φ(E_ij)`.
    pub fn choi(&self) -> Array2<C64> {
        let d = self.dim;
        let mut j = Array2::<C64>::zeros((d * d, d * d));
        for i in 0..d {
            for jj in 0..d {
                for a in 0..d {
                    for b in 0..d {
                        j[[i * d + a, jj * d + b]] = self.matrix[[a + b * d, i + jj * d]];
                    }
                }
            }
        }
        j
    }

    /// `max_b |Σ_a S[aa, b] − δ_b|`, zero for trace-preserving maps.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev = 0.0f64;
        for col in 0..d * d {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..d {
                s += self.matrix[[a + a * d, col]];
            }
            if col % d == col / d {
                s -= C64::new(1.0, 0.0);
            }
            dev = dev.max(s.norm());
        }
        dev
    }

    /// Max deviation from `Φ(X)† = Φ(X†)`.
    pub fn hermiticity_preservation_deviation(&self) -> f64 {
        let d = self.dim;
        let swap = |k: usize| (k / d) + (k % d) * d;
        let mut dev = 0.0f64;
        for ((r, c), &x) in self.matrix.indexed_iter() {
            dev = dev.max((x - self.matrix[[swap(r), swap(c)]].conj()).norm());
        }
        dev
    }

    /// Minimum eigenvalue of the Choi matrix.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let eig = linalg::hermitian_eigenvalues(&self.choi())?;
        Ok(eig.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

/// Orthonormal basis of Hermitian `d×d` matrices in which a
/// Hermiticity-preserving superoperator is real.
///
/// Basis index `k` shares the column-stacking index: `k = i + i·d` holds
/// `E_ii`; for `i < j`, `k = i + j·d` holds `(E_ij + E_ji)/√2` and
/// `k = j + i·d` holds `(−iE_ij + iE_ji)/√2`.
#[derive(Clone, Copy, Debug)]
pub struct HermitianBasis {
    dim: usize,
}

impl HermitianBasis {
    pub fn new(dim: usize) -> Self {
        HermitianBasis { dim }
    }

    /// Nonzero entries `(row, value)` of column `k` of the change of basis.
    fn column(&self, k: usize) -> [(usize, C64); 2] {
        let d = self.dim;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (i, j) = (k % d, k / d);
        let zero = (k, C64::new(0.0, 0.0));
        if i == j {
            [(k, C64::new(1.0, 0.0)), zero]
        } else if i < j {
            [(i + j * d, C64::new(s, 0.0)), (j + i * d, C64::new(s, 0.0))]
        } else {
            // antisymmetric element for the pair (j, i), j < i
            let (p, q) = (j, i);
            [(p + q * d, C64::new(0.0, -s)), (q + p * d, C64::new(0.0, s))]
        }
    }

    /// Nonzero entries `(col, value)` of row `r` of the change of basis.
    fn row(&self, r: usize) -> [(usize, C64); 2] {
        let d = self.dim;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (i, j) = (r % d, r / d);
        if i == j {
            [(r, C64::new(1.0, 0.0)), (r, C64::new(0.0, 0.0))]
        } else if i < j {
            [(i + j * d, C64::new(s, 0.0)), (j + i * d, C64::new(0.0, -s))]
        } else {
            [(j + i * d, C64::new(s, 0.0)), (i + j * d, C64::new(0.0, s))]
        }
    }

    /// Real matrix `T† L T` of a Hermiticity-preserving superoperator.
    pub fn realify(&self, l: &Array2<C64>) -> Result<Array2<f64>> {
        let n = self.dim * self.dim;
        if l.dim() != (n, n) {
            return Err(Error::Dimension(format!("expected {n}x{n} superoperator")));
        }
        // A = L T, column by column
        let mut a = Array2::<C64>::zeros((n, n));
        for c in 0..n {
            for (s, t) in self.column(c) {
                if t.norm() == 0.0 {
                    continue;
                }
                let src = l.column(s);
                a.column_mut(c).zip_mut_with(&src, |o, &x| *o += x * t);
            }
        }
        // M = T† A, row by row
        let mut m = Array2::<f64>::zeros((n, n));
        for k in 0..n {
            let mut row = Array1::<C64>::zeros(n);
            for (r, t) in self.column(k) {
                if t.norm() == 0.0 {
                    continue;
                }
                row.scaled_add(t.conj(), &a.row(r));
            }
            m.row_mut(k).assign(&row.mapv(|x| x.re));
        }
        Ok(m)
    }

    /// Inverse of [`HermitianBasis::realify`]: `T M T†`.
    pub fn complexify(&self, m: &Array2<f64>) -> Result<Array2<C64>> {
        let n = self.dim * self.dim;
        if m.dim() != (n, n) {
            return Err(Error::Dimension(format!("expected {n}x{n} real superoperator")));
        }
        // A = T M, row by row
        let mut a = Array2::<C64>::zeros((n, n));
        for r in 0..n {
            let mut row = Array1::<C64>::zeros(n);
            for (k, t) in self.row(r) {
                if t.norm() == 0.0 {
                    continue;
                }
                row.zip_mut_with(&m.row(k), |o, &x| *o += t * x);
            }
            a.row_mut(r).assign(&row);
        }
        // S = A T†, column by column: S[:, s] = Σ_l A[:, l] conj(T[s, l])
        let mut s_out = Array2::<C64>::zeros((n, n));
        for s in 0..n {
            for (l, t) in self.row(s) {
                if t.norm() == 0.0 {
                    continue;
                }
                let tc = t.conj();
                let src = a.column(l);
                s_out.column_mut(s).zip_mut_with(&src, |o, &x| *o += x * tc);
            }
        }
        Ok(s_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spin;
    use crate::linalg::{expm, max_abs_diff};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(d: usize, rng: &mut ChaCha8Rng) -> Array2<C64> {
        Array2::from_shape_fn((d, d), |_| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn vectorize_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_matrix(3, &mut rng);
        let v = vectorize(&m);
        assert_eq!(v[1], m[[1, 0]]);
        assert_eq!(v[3], m[[0, 1]]);
        assert_eq!(unvectorize(v.view(), 3), m);
    }

    #[test]
    fn unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_matrix(3, &mut rng);
        let h = &h + &linalg::dagger(&h);
        let u = linalg::unitary_from_hermitian(&h, 0.7).unwrap();
        let rho = random_matrix(3, &mut rng);
        let s = Superoperator::from_unitary(&u);
        let direct = u.dot(&rho).dot(&linalg::dagger(&u));
        assert!(max_abs_diff(&s.apply(&rho).unwrap(), &direct) < 1e-14);
        assert!(s.trace_preservation_deviation() < 1e-14);
        assert!(s.hermiticity_preservation_deviation() < 1e-14);
    }

    #[test]
    fn depolarizing_channel() {
        let s = Superoperator::depolarizing(2);
        let out = s.apply(&spin::projector(&spin::up())).unwrap();
        assert!(max_abs_diff(&out, &Array2::eye(2).mapv(|x: C64| x * 0.5)) < 1e-15);
        assert!(s.trace_preservation_deviation() < 1e-15);
        assert!(s.choi_min_eigenvalue().unwrap() > -1e-12);
    }

    #[test]
    fn power_matches_repeated_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_matrix(4, &mut rng).mapv(|x| x * 0.3);
        let s = Superoperator::new(m.clone(), 2).unwrap();
        let mut direct = Array2::<C64>::eye(4);
        for _ in 0..13 {
            direct = m.dot(&direct);
        }
        assert!(max_abs_diff(s.power(13).matrix(), &direct) < 1e-12);
        assert_eq!(s.power(0), Superoperator::identity(2));
    }

    #[test]
    fn realify_roundtrip_and_reality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        // Hermiticity-preserving map: X ↦ A X A† + B X B†
        let a = random_matrix(d, &mut rng);
        let b = random_matrix(d, &mut rng);
        let l = kron(&a.mapv(|x| x.conj()), &a) + kron(&b.mapv(|x| x.conj()), &b);
        let basis = HermitianBasis::new(d);
        let real = basis.realify(&l).unwrap();
        let back = basis.complexify(&real).unwrap();
        assert!(max_abs_diff(&back, &l) < 1e-13);
        // exponentiating in the real basis agrees with the complex route
        let e_complex = expm(&l.mapv(|x| x * 0.1)).unwrap();
        let e_real = basis.complexify(&expm(&real.mapv(|x| x * 0.1)).unwrap()).unwrap();
        assert!(max_abs_diff(&e_complex, &e_real) < 1e-12);
    }

    #[test]
    fn corrupted_map_fails_cp() {
        let u = spin::y_rotation(0.4);
        let mut m = Superoperator::from_unitary(&u).into_matrix();
        m[[0, 0]] = -m[[0, 0]];
        let s = Superoperator::new(m, 2).unwrap();
        assert!(s.choi_min_eigenvalue().unwrap() < -1e-3);
    }
}
