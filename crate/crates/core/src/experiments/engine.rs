//! Shared machinery: generator selection, segment checks, reset channels
//! and the ordered parallel map used by every sweep.

use rayon::prelude::*;

use super::spec::{Diagnostics, ExperimentSpec, ResetModel};
use crate::algebra::{DensityOperator, Superoperator};
use crate::model::{build_dissipators, build_rwa_hamiltonian, DissipationSpec, ElectronRate, SpinRegister};
use crate::propagation::{cp_certificate, cycle_map, LindbladGenerator, Propagator, TimeSeries, CP_TOLERANCE};
use crate::{Error, Result};

/// Choi spectra are computed exactly up to this Hilbert dimension; larger
/// propagators get the Cholesky certificate only.
const EXACT_CHOI_DIM: usize = 16;

/// Electron-resolved dynamics at RWA level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Dynamics {
    Closed,
    Relaxing,
    ResetAugmented,
}

pub(crate) fn generator(reg: &SpinRegister, dspec: &DissipationSpec, dynamics: Dynamics) -> Result<LindbladGenerator> {
    let h = build_rwa_hamiltonian(reg)?;
    let jumps = match dynamics {
        Dynamics::Closed => Vec::new(),
        Dynamics::Relaxing => build_dissipators(reg, dspec, ElectronRate::Relaxation)?,
        Dynamics::ResetAugmented => build_dissipators(reg, dspec, ElectronRate::ResetAugmented)?,
    };
    LindbladGenerator::new(h, jumps)
}

/// Generator used by a reset run and whether the reset map is applied.
pub(crate) fn reset_dynamics(model: ResetModel) -> (Dynamics, bool) {
    match model {
        ResetModel::Physical => (Dynamics::Relaxing, true),
        ResetModel::Continuous => (Dynamics::ResetAugmented, false),
        ResetModel::Augmented => (Dynamics::ResetAugmented, true),
    }
}

/// CP and trace-preservation check of a propagator; a failure is a
/// numerical-validation error.
pub(crate) fn check_segment(p: &Propagator) -> Result<Diagnostics> {
    let s = &p.superop;
    let tp = s.trace_preservation_deviation();
    if tp > 1e-9 {
        return Err(Error::Numerical(format!(
            "segment propagator trace-preservation deviation {tp:.3e}"
        )));
    }
    let mut d = Diagnostics {
        cp_checked: 1,
        ..Diagnostics::default()
    };
    if s.dim() <= EXACT_CHOI_DIM {
        let m = s.choi_min_eigenvalue()?;
        if m < -CP_TOLERANCE {
            return Err(Error::Numerical(format!(
                "segment propagator Choi eigenvalue {m:.3e} below -{CP_TOLERANCE:e}"
            )));
        }
        d.choi_min_eigenvalue = Some(m);
    } else if !cp_certificate(s, CP_TOLERANCE) {
        return Err(Error::Numerical("segment propagator failed the CP certificate".into()));
    }
    Ok(d)
}

pub(crate) fn checked_propagator(gen: &LindbladGenerator, t: f64) -> Result<(Propagator, Diagnostics)> {
    let p = gen.propagator(t)?;
    let d = check_segment(&p)?;
    Ok((p, d))
}

/// Uniform sampling of a time-independent generator through one checked
/// step propagator; samples at `k t/steps`.
pub(crate) fn static_series(
    gen: &LindbladGenerator,
    rho0: &DensityOperator,
    t: f64,
    sample_every: f64,
) -> Result<(TimeSeries, Diagnostics)> {
    let mut series = TimeSeries::new();
    series.push_checked(0.0, rho0.matrix().clone(), rho0)?;
    if t == 0.0 {
        return Ok((series, Diagnostics::default()));
    }
    let steps = ((t / sample_every - 1e-9).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let (p, diag) = checked_propagator(gen, dt)?;
    let mut rho = rho0.matrix().clone();
    for k in 1..=steps {
        rho = p.superop.apply(&rho)?;
        series.push_checked(k as f64 * dt, rho.clone(), rho0)?;
    }
    Ok((series, diag))
}

/// Nuclear channel of `n_cycles` reset periods (or one continuous stretch
/// of the same length when the model has no explicit reset map).
pub(crate) fn reset_channel(
    spec: &ExperimentSpec,
    reg: &SpinRegister,
    n_cycles: usize,
) -> Result<(Superoperator, Diagnostics)> {
    let t_reset = spec
        .dissipation
        .t_reset
        .ok_or_else(|| Error::InvalidArgument("reset runs need a reset period t_reset".into()))?;
    let (dynamics, mapped) = reset_dynamics(spec.reset_model);
    let gen = generator(reg, &spec.dissipation, dynamics)?;
    let reset = spec.initial_state.electron.ket();
    if mapped {
        let (seg, diag) = checked_propagator(&gen, t_reset)?;
        let m = cycle_map(&seg, gen.layout(), &reset)?;
        Ok((m.power(n_cycles as u64), diag))
    } else {
        let (seg, diag) = checked_propagator(&gen, t_reset * n_cycles as f64)?;
        Ok((cycle_map(&seg, gen.layout(), &reset)?, diag))
    }
}

/// Closed RWA evolution of the nuclei with the electron prepared as in
/// `spec` and traced out at the end.
pub(crate) fn closed_channel(
    spec: &ExperimentSpec,
    reg: &SpinRegister,
    t: f64,
) -> Result<(Superoperator, Diagnostics)> {
    let gen = generator(reg, &spec.dissipation, Dynamics::Closed)?;
    let (p, diag) = checked_propagator(&gen, t)?;
    Ok((cycle_map(&p, gen.layout(), &spec.initial_state.electron.ket())?, diag))
}

/// Applies a channel and validates the output.
pub(crate) fn apply_checked(channel: &Superoperator, rho: &DensityOperator) -> Result<(DensityOperator, Diagnostics)> {
    let out = DensityOperator::new(channel.apply(rho.matrix())?, rho.layout().clone())?;
    let d = Diagnostics::default().with_hygiene(out.hygiene()?);
    Ok((out, d))
}

/// Order-preserving parallel map; the first error wins.
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::spec::{InitialState, Observable};
    use crate::model::{DriveSpec, NuclearSpinSpec};
    use crate::TWO_PI;

    fn khz(x: f64) -> f64 {
        TWO_PI * x * 1e3
    }

    fn spec() -> ExperimentSpec {
        ExperimentSpec {
            register: SpinRegister::new(
                vec![
                    NuclearSpinSpec::resonant("a", khz(4000.0), khz(9.0), khz(1.0)),
                    NuclearSpinSpec::resonant("b", khz(5060.0), khz(11.0), khz(1.0)),
                ],
                DriveSpec::new(khz(400.0)),
            ),
            dissipation: DissipationSpec::new(200e-6, Some(20e-6)),
            initial_state: InitialState::new("+-"),
            observables: vec![Observable::new("P_-+", "-+")],
            duration: 1e-3,
            sample_every: 1e-4,
            reset_model: ResetModel::Physical,
            convention: Default::default(),
        }
    }

    #[test]
    fn continuous_and_mapped_reset_channels_are_cptp() {
        for model in [ResetModel::Physical, ResetModel::Continuous, ResetModel::Augmented] {
            let mut s = spec();
            s.reset_model = model;
            let (ch, d) = reset_channel(&s, &s.register, 5).unwrap();
            assert!(ch.trace_preservation_deviation() < 1e-10);
            assert!(d.choi_min_eigenvalue.unwrap() > -1e-10);
        }
    }

    #[test]
    fn ordered_parallel_map() {
        let xs: Vec<usize> = (0..100).collect();
        let ys = par_map(&xs, |&x| Ok(x * x)).unwrap();
        assert_eq!(ys, xs.iter().map(|x| x * x).collect::<Vec<_>>());
        let err = par_map(&xs, |&x| {
            if x == 37 {
                Err(Error::Numerical("bad".into()))
            } else {
                Ok(x)
            }
        });
        assert!(err.is_err());
    }
}
