use ndarray::Array2;

use super::TimeSeries;
use crate::algebra::{unvectorize, vectorize, DensityOperator, HermitianBasis, HilbertLayout, Operator, Superoperator};
use crate::linalg::{self, dagger, expm, kron};
use crate::model::Jump;
use crate::{Error, Result, C64};

/// Largest Hilbert-space dimension accepted for superoperator methods.
pub const MAX_DIM: usize = 64;

/// Trace-preservation tolerance for exponentiated propagators.
const PROPAGATOR_TP_TOL: f64 = 1e-9;

/// `dρ/dt = −i[H, ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})`.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: Operator,
    jumps: Vec<Jump>,
    jump_daggers: Vec<Array2<C64>>,
    jump_products: Vec<Array2<C64>>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: Operator, jumps: Vec<Jump>) -> Result<Self> {
        let d = hamiltonian.dim();
        let scale = linalg::max_abs(hamiltonian.matrix().view()).max(1.0);
        let herm = hamiltonian.hermiticity_deviation();
        if herm > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "Hamiltonian is not Hermitian (deviation {herm:.3e})"
            )));
        }
        for j in &jumps {
            if j.operator.dim() != (d, d) {
                return Err(Error::Dimension(format!(
                    "jump `{}` is {}x{}, Hamiltonian dimension is {d}",
                    j.label,
                    j.operator.nrows(),
                    j.operator.ncols()
                )));
            }
        }
        let jump_daggers: Vec<_> = jumps.iter().map(|j| dagger(&j.operator)).collect();
        let jump_products = jumps
            .iter()
            .zip(&jump_daggers)
            .map(|(j, jd)| jd.dot(&j.operator))
            .collect();
        Ok(LindbladGenerator {
            hamiltonian,
            jumps,
            jump_daggers,
            jump_products,
        })
    }

    pub fn closed(hamiltonian: Operator) -> Result<Self> {
        Self::new(hamiltonian, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn layout(&self) -> &HilbertLayout {
        self.hamiltonian.layout()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Master-equation right-hand side evaluated directly.
    pub fn rhs(&self, rho: &Array2<C64>) -> Array2<C64> {
        dissipative_rhs(self.hamiltonian.matrix(), self, rho)
    }

    /// Column-stacked Liouvillian:
    /// `−i(I⊗H − Hᵀ⊗I) + Σ (L̄⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I)`.
    pub fn liouvillian(&self) -> Result<Array2<C64>> {
        let d = self.dim();
        if d > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "Hilbert dimension {d} exceeds the superoperator cap {MAX_DIM}; reduce the register"
            )));
        }
        let id = Array2::<C64>::eye(d);
        let h = self.hamiltonian.matrix();
        let mi = C64::new(0.0, -1.0);
        let mut l = (kron(&id, h) - kron(&h.t().to_owned(), &id)).mapv(|x| x * mi);
        for (j, p) in self.jumps.iter().zip(&self.jump_products) {
            l += &kron(&j.operator.mapv(|x| x.conj()), &j.operator);
            l.scaled_add(C64::new(-0.5, 0.0), &kron(&id, p));
            l.scaled_add(C64::new(-0.5, 0.0), &kron(&p.t().to_owned(), &id));
        }
        Ok(l)
    }

    /// Max elementwise `|L†(I)|`, zero for a trace-preserving generator.
    pub fn adjoint_identity_deviation(&self) -> Result<f64> {
        let d = self.dim();
        let l = self.liouvillian()?;
        let mut dev = 0.0f64;
        for col in 0..d * d {
            let s: C64 = (0..d).map(|a| l[[a + a * d, col]]).sum();
            dev = dev.max(s.norm());
        }
        Ok(dev)
    }

    /// `exp(𝓛 t)`, exponentiated in the real Hermitian-operator basis.
    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "propagation time must be non-negative, got {t}"
            )));
        }
        let d = self.dim();
        let basis = HermitianBasis::new(d);
        let real = basis.realify(&self.liouvillian()?)?;
        let e = expm(&real.mapv(|x| x * t))?;
        let superop = Superoperator::new(basis.complexify(&e)?, d)?;
        let tp = superop.trace_preservation_deviation();
        if tp > PROPAGATOR_TP_TOL {
            return Err(Error::Numerical(format!(
                "propagator over {t:e} s is not trace preserving (deviation {tp:.3e})"
            )));
        }
        Ok(Propagator { superop, duration: t })
    }
}

pub(crate) fn dissipative_rhs(h: &Array2<C64>, gen: &LindbladGenerator, rho: &Array2<C64>) -> Array2<C64> {
    let mi = C64::new(0.0, -1.0);
    let mut out = (h.dot(rho) - rho.dot(h)).mapv(|x| x * mi);
    for ((j, jd), p) in gen.jumps.iter().zip(&gen.jump_daggers).zip(&gen.jump_products) {
        out += &j.operator.dot(rho).dot(jd);
        out.scaled_add(C64::new(-0.5, 0.0), &p.dot(rho));
        out.scaled_add(C64::new(-0.5, 0.0), &rho.dot(p));
    }
    out
}

/// Superoperator `exp(𝓛 t)` together with its duration.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub superop: Superoperator,
    pub duration: f64,
}

impl Propagator {
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.superop.apply(rho.matrix())?, rho.layout().clone())
    }
}

/// Samples `ρ(t)` under a time-independent generator at uniform intervals
/// no longer than `sample_every`, ending exactly at `t`.
pub fn propagate_static(
    gen: &LindbladGenerator,
    rho0: &DensityOperator,
    t: f64,
    sample_every: f64,
) -> Result<TimeSeries> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "propagation time must be non-negative, got {t}"
        )));
    }
    if !(sample_every > 0.0) {
        return Err(Error::InvalidArgument("sample interval must be positive".into()));
    }
    if rho0.dim() != gen.dim() {
        return Err(Error::Dimension(format!(
            "initial state dimension {} vs generator dimension {}",
            rho0.dim(),
            gen.dim()
        )));
    }
    let mut series = TimeSeries::new();
    series.push_checked(0.0, rho0.matrix().clone(), rho0)?;
    if t == 0.0 {
        return Ok(series);
    }
    let steps = ((t / sample_every) - 1e-9).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let step = gen.propagator(dt)?;
    let m = step.superop.matrix();
    let d = gen.dim();
    let mut v = vectorize(rho0.matrix());
    for k in 1..=steps {
        v = m.dot(&v);
        series.push_checked(k as f64 * dt, unvectorize(v.view(), d), rho0)?;
    }
    Ok(series)
}
