use ndarray::Array1;
use serde::Serialize;

use super::spec::ExperimentSpec;
use crate::algebra::{spin, state_fidelity, DensityOperator, HilbertLayout};
use crate::linalg::{dagger, kron, unitary_from_hermitian};
use crate::model::{
    build_rwa_hamiltonian, rwa_frame_rotation, LabHamiltonian, RfFrameHamiltonian, TimeDependentHamiltonian,
};
use crate::propagation::propagate_timedep;
use crate::{Error, Result, C64, TWO_PI};

/// Steps per fastest period used here, well inside the integrator's
/// stability bound: the runs span ~10³ fast periods and the phase error of
/// a fourth-order step accumulates over all of them.
const STEPS_PER_FAST_PERIOD: f64 = 400.0;

/// Outcome of the rotating-wave checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RwaReport {
    /// Duration of the RF-frame vs RWA comparison, s.
    pub duration: f64,
    /// Fidelity of the RF-frame state (mapped into the RWA frame) with the
    /// RWA state at `duration`.
    pub state_fidelity: f64,
    /// Electron Rabi frequency measured in the scaled lab frame, rad/s.
    pub lab_rabi: f64,
    /// Dressed-model splitting `√((Ω(1+ε))² + δ_mw²)`, rad/s.
    pub dressed_rabi: f64,
    pub rabi_relative_error: f64,
    pub lab_scale: f64,
}

impl RwaReport {
    pub fn passes(&self, min_fidelity: f64, max_rabi_error: f64) -> bool {
        self.state_fidelity >= min_fidelity && self.rabi_relative_error <= max_rabi_error
    }
}

fn pure_initial_ket(spec: &ExperimentSpec) -> Result<Array1<C64>> {
    let mut psi = spec.initial_state.electron.ket();
    for c in spec.initial_state.nuclei.chars() {
        let k = match c {
            '+' => spin::plus(),
            '-' => spin::minus(),
            'u' => spin::up(),
            'd' => spin::down(),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "RWA validation needs a pure preparation, got {:?}",
                    spec.initial_state.nuclei
                )))
            }
        };
        psi = kron(&psi.insert_axis(ndarray::Axis(1)), &k.insert_axis(ndarray::Axis(1)))
            .column(0)
            .to_owned();
    }
    Ok(psi)
}

/// Compares the explicitly RF-driven dressed-frame dynamics (integrated
/// step by step) with the static RWA Hamiltonian over `duration`, and
/// measures the electron Rabi frequency of the lab-frame model with D and
/// γ_eB scaled by `lab_scale`.
pub fn validate_rwa(spec: &ExperimentSpec, duration: f64, lab_scale: f64) -> Result<RwaReport> {
    spec.register.validate()?;
    let reg = &spec.register;
    let n = reg.n_nuclei();
    let psi0 = pure_initial_ket(spec)?;
    if psi0.len() != 1 << (n + 1) {
        return Err(Error::Dimension("initial state does not match the register".into()));
    }
    let layout = HilbertLayout::electron_with_nuclei(n);
    let rho0 = DensityOperator::from_pure(&psi0, layout)?;

    let h_rwa = build_rwa_hamiltonian(reg)?;
    let psi_rwa = unitary_from_hermitian(h_rwa.matrix(), duration)?.dot(&psi0);

    let rf = RfFrameHamiltonian::new(reg)?;
    let dt = TWO_PI / rf.max_frequency() / STEPS_PER_FAST_PERIOD;
    let series = propagate_timedep(&rf, &[], &rho0, duration, dt, duration)?;
    let r = rwa_frame_rotation(reg, duration);
    let rho_rf = series.last().expect("final sample").matrix();
    let mapped = DensityOperator::new(r.dot(rho_rf).dot(&dagger(&r)), rho0.layout().clone())?;
    let state_fidelity = state_fidelity(&mapped, &psi_rwa)?;

    let lab_rabi = lab_rabi_frequency(spec, lab_scale)?;
    let omega = reg.drive.effective_rabi();
    let dressed_rabi = omega.hypot(reg.drive.mw_detuning);
    Ok(RwaReport {
        duration,
        state_fidelity,
        lab_rabi,
        dressed_rabi,
        rabi_relative_error: (lab_rabi - dressed_rabi).abs() / dressed_rabi,
        lab_scale,
    })
}

/// Rabi frequency from the spacing of the |0⟩-population minima of the
/// lab-frame electron started in |0⟩ (nuclei up), over three periods,
/// after averaging the population over each MW carrier period.
fn lab_rabi_frequency(spec: &ExperimentSpec, scale: f64) -> Result<f64> {
    let reg = &spec.register;
    let lab = LabHamiltonian::new(reg, scale)?;
    let n = reg.n_nuclei();
    let electron0 = spin::projector(&spin::basis_ket(3, 1));
    let mut rho = electron0.clone();
    for _ in 0..n {
        rho = kron(&rho, &spin::projector(&spin::up()));
    }
    let rho0 = DensityOperator::new(rho, lab.layout().clone())?;
    let expected = reg.drive.effective_rabi().hypot(reg.drive.mw_detuning);
    let period = TWO_PI / expected;
    // sample a whole number of times per MW carrier period so a moving
    // average over one carrier period removes the fast micromotion
    let per_carrier = 16usize;
    let carrier = TWO_PI / lab.mw_frequency().abs();
    let dt = TWO_PI / lab.max_frequency() / STEPS_PER_FAST_PERIOD;
    let series = propagate_timedep(&lab, &[], &rho0, 3.2 * period, dt, carrier / per_carrier as f64)?;
    let proj = crate::algebra::embed(&electron0, 0, lab.layout())?.into_matrix();
    let raw = series.expectation(&proj);
    let p0: Vec<f64> = raw
        .windows(per_carrier)
        .map(|w| w.iter().sum::<f64>() / per_carrier as f64)
        .collect();
    let t: Vec<f64> = series
        .times
        .windows(per_carrier)
        .map(|w| 0.5 * (w[0] + w[per_carrier - 1]))
        .collect();
    let mut minima = Vec::new();
    for k in 1..p0.len() - 1 {
        if p0[k] < p0[k - 1] && p0[k] <= p0[k + 1] && p0[k] < 0.5 {
            // parabolic refinement on a uniform grid
            let (a, b, c) = (p0[k - 1], p0[k], p0[k + 1]);
            let h = t[k + 1] - t[k];
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            minima.push(t[k] + shift * h);
        }
    }
    if minima.len() < 2 {
        return Err(Error::Numerical(format!(
            "lab-frame run showed {} Rabi minima; need at least two",
            minima.len()
        )));
    }
    let spacing = (minima[minima.len() - 1] - minima[0]) / (minima.len() - 1) as f64;
    Ok(TWO_PI / spacing)
}
