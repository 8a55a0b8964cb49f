//! Dense linear-algebra helpers shared by the simulator.

use ndarray::{Array1, Array2, ArrayView2, Axis, ShapeBuilder};
use ndarray_linalg::{EigValsh, Eigh, Inverse, Lapack, Scalar, UPLO};
use num_traits::ToPrimitive;

use crate::{Error, Result, C64};

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|x| x.conj())
}

/// Kronecker product `a ⊗ b`.
pub fn kron<A: Scalar>(a: &Array2<A>, b: &Array2<A>) -> Array2<A> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::<A>::zeros((ar * br, ac * bc));
    for ((i, j), &x) in a.indexed_iter() {
        if x == A::zero() {
            continue;
        }
        let mut block = out.slice_mut(ndarray::s![i * br..(i + 1) * br, j * bc..(j + 1) * bc]);
        block.zip_mut_with(b, |o, &y| *o = x * y);
    }
    out
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    a.dot(b) - b.dot(a)
}

pub fn max_abs(m: ArrayView2<C64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Max elementwise `|M - M†|`.
pub fn hermiticity_deviation(m: &Array2<C64>) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Eigenvalues (ascending) of the Hermitian part `(M + M†)/2`.
pub fn hermitian_eigenvalues(m: &Array2<C64>) -> Result<Array1<f64>> {
    let h = hermitian_part(m);
    Ok(h.eigvalsh(UPLO::Lower)?)
}

pub fn hermitian_part(m: &Array2<C64>) -> Array2<C64> {
    (m + &dagger(m)).mapv(|x| x * 0.5)
}

// LAPACK wrappers interpret row-major input as the transpose, which for a
// Hermitian matrix conjugates the returned eigenvectors.
fn fortran(m: &Array2<C64>) -> Array2<C64> {
    let mut f = Array2::zeros(m.raw_dim().f());
    f.assign(m);
    f
}

/// `exp(-i H t)` for Hermitian `H`, via the spectral decomposition.
pub fn unitary_from_hermitian(h: &Array2<C64>, t: f64) -> Result<Array2<C64>> {
    let (e, v) = fortran(&hermitian_part(h)).eigh(UPLO::Lower)?;
    let phases = e.mapv(|x| C64::from_polar(1.0, -x * t));
    let mut vp = v.clone();
    for (mut col, &ph) in vp.axis_iter_mut(Axis(1)).zip(phases.iter()) {
        col.mapv_inplace(|x| x * ph);
    }
    Ok(vp.dot(&dagger(&v)))
}

/// Max elementwise `|U U† - I|`.
pub fn unitarity_deviation(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    let uu = u.dot(&dagger(u));
    max_abs_diff(&uu, &Array2::eye(n))
}

pub fn one_norm<A: Scalar>(a: &Array2<A>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|col| {
            col.iter()
                .map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bounds for each Padé degree in double precision.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant (Higham 2005 degree selection).
pub fn expm<A: Scalar + Lapack>(a: &Array2<A>) -> Result<Array2<A>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("expm of non-square {}x{}", n, a.ncols())));
    }
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Numerical("expm input contains non-finite entries".into()));
    }
    let ident = Array2::<A>::eye(n);
    let c = |x: f64| A::from_real(A::real(x));

    for &(m, theta) in THETA.iter() {
        if norm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let a2 = a.dot(a);
            let mut u = ident.mapv(|x| x * c(coeffs[1]));
            let mut v = ident.mapv(|x| x * c(coeffs[0]));
            let mut power = ident.clone();
            for k in 1..=m / 2 {
                power = power.dot(&a2);
                u.scaled_add(c(coeffs[2 * k + 1]), &power);
                v.scaled_add(c(coeffs[2 * k]), &power);
            }
            let u = a.dot(&u);
            return pade_solve(&u, &v);
        }
    }

    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = c(0.5f64.powi(s as i32));
    let a = a.mapv(|x| x * scale);
    let b = &PADE13;
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);

    let mut inner = a6.mapv(|x| x * c(b[13]));
    inner.scaled_add(c(b[11]), &a4);
    inner.scaled_add(c(b[9]), &a2);
    let mut u = a6.dot(&inner);
    u.scaled_add(c(b[7]), &a6);
    u.scaled_add(c(b[5]), &a4);
    u.scaled_add(c(b[3]), &a2);
    u.scaled_add(c(b[1]), &ident);
    let u = a.dot(&u);

    let mut inner = a6.mapv(|x| x * c(b[12]));
    inner.scaled_add(c(b[10]), &a4);
    inner.scaled_add(c(b[8]), &a2);
    let mut v = a6.dot(&inner);
    v.scaled_add(c(b[6]), &a6);
    v.scaled_add(c(b[4]), &a4);
    v.scaled_add(c(b[2]), &a2);
    v.scaled_add(c(b[0]), &ident);

    let mut r = pade_solve(&u, &v)?;
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

fn pade_solve<A: Scalar + Lapack>(u: &Array2<A>, v: &Array2<A>) -> Result<Array2<A>> {
    let q = v - u;
    let p = v + u;
    let qinv = q.inv()?;
    Ok(qinv.dot(&p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_expm(a: &Array2<C64>) -> Array2<C64> {
        // brute-force: exp(A) = (exp(A/2^k))^(2^k) with a long Taylor series
        let k = 10;
        let scaled = a.mapv(|x| x / (1u64 << k) as f64);
        let n = a.nrows();
        let mut term = Array2::<C64>::eye(n);
        let mut sum = term.clone();
        for j in 1..40 {
            term = term.dot(&scaled).mapv(|x| x / j as f64);
            sum += &term;
        }
        for _ in 0..k {
            sum = sum.dot(&sum);
        }
        sum
    }

    #[test]
    fn expm_matches_taylor_across_degrees() {
        for &scale in &[1e-3, 0.1, 0.5, 1.5, 4.0, 30.0] {
            let a = Array2::from_shape_fn((5, 5), |(i, j)| {
                C64::new(((i * 3 + j) % 7) as f64 - 3.0, ((i + 2 * j) % 5) as f64 - 2.0) * (scale / 10.0)
            });
            let e = expm(&a).unwrap();
            let t = taylor_expm(&a);
            let rel = max_abs_diff(&e, &t) / max_abs(t.view()).max(1.0);
            assert!(rel < 1e-11, "scale {scale}: rel err {rel}");
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let theta = 2.3;
        let a = ndarray::array![[0.0, -theta], [theta, 0.0]];
        let e = expm(&a).unwrap();
        assert!((e[[0, 0]] - theta.cos()).abs() < 1e-14);
        assert!((e[[1, 0]] - theta.sin()).abs() < 1e-14);
    }

    #[test]
    fn unitary_from_hermitian_matches_expm() {
        let h = ndarray::array![
            [C64::new(1.0, 0.0), C64::new(0.3, -0.2)],
            [C64::new(0.3, 0.2), C64::new(-0.5, 0.0)]
        ];
        let t = 1.7;
        let u = unitary_from_hermitian(&h, t).unwrap();
        let e = expm(&h.mapv(|x| x * C64::new(0.0, -t))).unwrap();
        let diff = max_abs_diff(&u, &e);
        assert!(diff < 1e-13, "{diff}");
        assert!(unitarity_deviation(&u) < 1e-13);
    }

    #[test]
    fn kron_shapes_and_values() {
        let a = ndarray::array![[1.0, 2.0], [3.0, 4.0]];
        let b = ndarray::array![[0.0, 1.0], [1.0, 0.0]];
        let k = kron(&a, &b);
        assert_eq!(k.dim(), (4, 4));
        assert_eq!(k[[0, 1]], 1.0);
        assert_eq!(k[[2, 1]], 3.0);
        assert_eq!(k[[3, 0]], 3.0);
        assert_eq!(k[[0, 3]], 2.0);
    }
}
