use serde::{Deserialize, Serialize};

use super::engine::{checked_propagator, generator, reset_dynamics, static_series, Dynamics};
use super::spec::{Diagnostics, ExperimentSpec, Observable, SweepResult};
use crate::effective::{effective_nuclear_model, electron_conditioned_hamiltonian};
use crate::propagation::{reset_evolve_with, LindbladGenerator, ResetSampling, TimeSeries};
use crate::{Error, Result};

/// Generator level of a state-transfer run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransferMode {
    /// Closed RWA dynamics with the electron resolved.
    Ideal,
    /// Closed second-order model conditioned on the electron state.
    IdealEffective,
    /// RWA dynamics with electron relaxation and no resets.
    DecayNoReset,
    /// Electron-resolved dynamics with periodic resets.
    ResetExact,
    /// Effective nuclear master equation.
    ResetEffective,
}

impl TransferMode {
    pub fn name(self) -> &'static str {
        match self {
            TransferMode::Ideal => "ideal",
            TransferMode::IdealEffective => "ideal-effective",
            TransferMode::DecayNoReset => "decay-no-reset",
            TransferMode::ResetExact => "reset-exact",
            TransferMode::ResetEffective => "reset-effective",
        }
    }

    pub fn needs_reset(self) -> bool {
        matches!(self, TransferMode::ResetExact | TransferMode::ResetEffective)
    }
}

/// Nuclear states of one transfer run.
#[derive(Clone, Debug)]
pub struct TransferRun {
    pub mode: TransferMode,
    pub series: TimeSeries,
    pub diagnostics: Diagnostics,
}

/// Evolves `spec.initial_state` for `spec.duration` at the chosen level and
/// returns the reduced nuclear states.
pub fn run_state_transfer(spec: &ExperimentSpec, mode: TransferMode) -> Result<TransferRun> {
    spec.validate()?;
    spec.register.targets()?;
    if mode.needs_reset() && spec.dissipation.t_reset.is_none() {
        return Err(Error::InvalidArgument(format!(
            "mode {} needs a reset schedule (set t_reset)",
            mode.name()
        )));
    }
    let n = spec.n_nuclei();
    let nuclear_slots: Vec<usize> = (1..=n).collect();
    let full0 = spec.initial_state.full(n)?;
    let electron_resolved = |gen: LindbladGenerator| -> Result<(TimeSeries, Diagnostics)> {
        let (s, d) = static_series(&gen, &full0, spec.duration, spec.sample_every)?;
        Ok((s.reduced(&nuclear_slots)?, d))
    };
    let (series, diag) = match mode {
        TransferMode::Ideal => electron_resolved(generator(&spec.register, &spec.dissipation, Dynamics::Closed)?)?,
        TransferMode::IdealEffective => electron_resolved(LindbladGenerator::closed(
            electron_conditioned_hamiltonian(&spec.register)?,
        )?)?,
        TransferMode::DecayNoReset => {
            electron_resolved(generator(&spec.register, &spec.dissipation, Dynamics::Relaxing)?)?
        }
        TransferMode::ResetExact => {
            let (dynamics, mapped) = reset_dynamics(spec.reset_model);
            let gen = generator(&spec.register, &spec.dissipation, dynamics)?;
            if mapped {
                let schedule = spec.schedule_for(spec.duration)?;
                let (seg, d) = checked_propagator(&gen, schedule.t_reset)?;
                let every = ((spec.sample_every / schedule.t_reset).round() as usize).max(1);
                let sampling = ResetSampling {
                    every_cycles: every,
                    within_segment: 0,
                };
                let rho_n = spec.initial_state.nuclear(n)?;
                (reset_evolve_with(&seg, gen.layout(), &rho_n, &schedule, sampling)?, d)
            } else {
                electron_resolved(gen)?
            }
        }
        TransferMode::ResetEffective => {
            let model = effective_nuclear_model(&spec.register, &spec.dissipation, spec.convention)?;
            let jumps = model.jumps(&spec.dissipation)?;
            let gen = LindbladGenerator::new(model.h_n.clone(), jumps)?;
            static_series(&gen, &spec.initial_state.nuclear(n)?, spec.duration, spec.sample_every)?
        }
    };
    let diagnostics = diag.with_hygiene(series.hygiene()?);
    Ok(TransferRun {
        mode,
        series,
        diagnostics,
    })
}

/// Observables recorded when the spec lists none: the initial pattern and
/// its swapped image on the two targets.
pub fn default_observables(spec: &ExperimentSpec) -> Result<Vec<Observable>> {
    let [a, b] = spec.register.targets()?;
    let chars: Vec<char> = spec.initial_state.nuclei.chars().collect();
    let pattern = |swap: bool| -> String {
        chars
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let c = if swap && i == a {
                    chars[b]
                } else if swap && i == b {
                    chars[a]
                } else {
                    c
                };
                if i == a || i == b {
                    c
                } else {
                    '.'
                }
            })
            .collect()
    };
    let start = pattern(false);
    let end = pattern(true);
    let strip = |p: &str| p.replace('.', "");
    Ok(vec![
        Observable::new(&format!("P_{}", strip(&start)), &start),
        Observable::new(&format!("P_{}", strip(&end)), &end),
    ])
}

/// Runs several modes on a common time grid; columns are named
/// `<mode>_<observable>`.
pub fn transfer_sweep(spec: &ExperimentSpec, modes: &[TransferMode]) -> Result<SweepResult> {
    if modes.is_empty() {
        return Err(Error::InvalidArgument("no transfer modes requested".into()));
    }
    let observables = if spec.observables.is_empty() {
        default_observables(spec)?
    } else {
        spec.observables.clone()
    };
    let n = spec.n_nuclei();
    let runs = super::engine::par_map(modes, |&m| run_state_transfer(spec, m))?;
    let times = runs[0].series.times.clone();
    for r in &runs[1..] {
        let aligned = r.series.times.len() == times.len()
            && r.series
                .times
                .iter()
                .zip(&times)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1e-12));
        if !aligned {
            return Err(Error::InvalidArgument(format!(
                "modes {} and {} sample different time grids; choose duration and sample_every as multiples of t_reset",
                runs[0].mode.name(),
                r.mode.name()
            )));
        }
    }
    let mut result = SweepResult::new("time_ms", times.iter().map(|t| t * 1e3).collect());
    for r in &runs {
        for o in &observables {
            let p = o.projector(n)?;
            result.push(&format!("{}_{}", r.mode.name(), o.name), r.series.expectation(&p))?;
        }
        result.diagnostics = result.diagnostics.merge(r.diagnostics);
    }
    result.metadata = serde_json::json!({
        "experiment": "transfer",
        "modes": modes.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "observables": observables,
    });
    Ok(result)
}

/// Root-mean-square difference of two equally long curves.
pub fn rms_difference(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Dimension(format!(
            "cannot compare curves of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((s / a.len() as f64).sqrt())
}
