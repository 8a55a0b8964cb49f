use ndarray::Array2;

use super::lindblad::dissipative_rhs;
use super::{LindbladGenerator, TimeSeries};
use crate::algebra::{DensityOperator, Operator};
use crate::linalg;
use crate::model::{Jump, TimeDependentHamiltonian};
use crate::{Error, Result, C64, TWO_PI};

/// Minimum number of integration steps per period of the fastest frequency.
pub const STEPS_PER_PERIOD: f64 = 50.0;

/// Largest admissible step for a Hamiltonian whose fastest angular
/// frequency is `max_frequency`.
pub fn required_time_step(max_frequency: f64) -> f64 {
    if max_frequency > 0.0 {
        TWO_PI / max_frequency / STEPS_PER_PERIOD
    } else {
        f64::INFINITY
    }
}

/// Classical fourth-order Runge–Kutta integration of the master equation
/// with `H(t)` sampled at the step nodes and midpoints. Without jump
/// operators the propagator `U(t)` is integrated instead of `ρ`. Samples fall on the
/// same uniform grid as [`propagate_static`](super::propagate_static); the
/// step is shrunk so each sample interval holds a whole number of steps.
pub fn propagate_timedep(
    src: &dyn TimeDependentHamiltonian,
    jumps: &[Jump],
    rho0: &DensityOperator,
    t: f64,
    dt: f64,
    sample_every: f64,
) -> Result<TimeSeries> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "propagation time must be non-negative, got {t}"
        )));
    }
    if !(dt > 0.0 && sample_every > 0.0) {
        return Err(Error::InvalidArgument(
            "time step and sample interval must be positive".into(),
        ));
    }
    let required = required_time_step(src.max_frequency());
    if dt > required * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "time step {dt:.3e} s is too coarse; need dt <= {required:.3e} s ({STEPS_PER_PERIOD} steps per fastest period)"
        )));
    }
    if rho0.layout() != src.layout() {
        return Err(Error::Dimension(
            "initial state layout does not match the Hamiltonian".into(),
        ));
    }
    let h0 = src.at(0.0);
    let gen = LindbladGenerator::new(Operator::new(h0.clone(), src.layout().clone())?, jumps.to_vec())?;

    let mut series = TimeSeries::new();
    series.push_checked(0.0, rho0.matrix().clone(), rho0)?;
    if t == 0.0 {
        return Ok(series);
    }
    let samples = ((t / sample_every - 1e-9).ceil() as usize).max(1);
    let interval = t / samples as f64;
    let stride = ((interval / dt - 1e-9).ceil() as usize).max(1);
    let steps = samples * stride;
    let h = interval / stride as f64;
    // closed runs integrate the propagator, so every sample U ρ0 U† stays
    // positive semidefinite; open runs integrate ρ directly
    let closed = jumps.is_empty();
    let d = rho0.dim();
    let mi = C64::new(0.0, -1.0);
    let f = |ham: &Array2<C64>, x: &Array2<C64>| -> Array2<C64> {
        if closed {
            ham.dot(x).mapv(|v| v * mi)
        } else {
            dissipative_rhs(ham, &gen, x)
        }
    };
    let state = |x: &Array2<C64>| -> Array2<C64> {
        if closed {
            x.dot(rho0.matrix()).dot(&linalg::dagger(x))
        } else {
            x.clone()
        }
    };
    let mut x = if closed {
        Array2::<C64>::eye(d)
    } else {
        rho0.matrix().clone()
    };
    let mut h_start = h0;
    for k in 0..steps {
        let t0 = k as f64 * h;
        let h_mid = src.at(t0 + 0.5 * h);
        let h_end = src.at(t0 + h);
        let k1 = f(&h_start, &x);
        let k2 = f(&h_mid, &(&x + &k1.mapv(|v| v * (0.5 * h))));
        let k3 = f(&h_mid, &(&x + &k2.mapv(|v| v * (0.5 * h))));
        let k4 = f(&h_end, &(&x + &k3.mapv(|v| v * h)));
        let c = C64::new(h / 6.0, 0.0);
        x.scaled_add(c, &k1);
        x.scaled_add(c * 2.0, &k2);
        x.scaled_add(c * 2.0, &k3);
        x.scaled_add(c, &k4);
        h_start = h_end;
        if (k + 1) % stride == 0 {
            series.push_checked(((k + 1) / stride) as f64 * interval, state(&x), rho0)?;
        }
    }
    let drift = (linalg::trace(&state(&x)) - C64::new(1.0, 0.0)).norm();
    if drift > 1e-8 {
        return Err(Error::Numerical(format!("trace drift {drift:.3e} exceeds 1e-8")));
    }
    Ok(series)
}
