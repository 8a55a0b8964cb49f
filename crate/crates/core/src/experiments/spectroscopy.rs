use serde::{Deserialize, Serialize};

use super::engine::{apply_checked, par_map, reset_channel};
use super::spec::{cycles, Diagnostics, ExperimentSpec, Observable, SweepResult};
use crate::algebra::DensityOperator;
use crate::effective::effective_nuclear_model;
use crate::linalg::unitary_from_hermitian;
use crate::model::{build_detuned_effective, tilted_drive, SpinRegister};
use crate::{Error, Result, TWO_PI};

/// Form of the closed-form sensor population.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalyticVariant {
    /// `1 − (g cosθ)² sin²(t√((g cosθ)² + Δ²)/2) / ((g cosθ)² + Δ²)`.
    FullCoupling,
    /// Two-level flip-flop reduction with element `κ = g cosθ/4`:
    /// `1 − κ² sin²(t√(κ² + (Δ/2)²)) / (κ² + (Δ/2)²)`.
    Secular,
}

/// Sensor population P₊ for dressed-frequency mismatch `Δ`, tilt `θ`,
/// coupling `g` (rad/s) after time `t`.
pub fn analytic_population(delta: f64, theta: f64, g: f64, t: f64, variant: AnalyticVariant) -> f64 {
    let gc = g * theta.cos();
    let (k, w2, arg) = match variant {
        AnalyticVariant::FullCoupling => {
            let w2 = gc * gc + delta * delta;
            (gc, w2, 0.5 * t * w2.sqrt())
        }
        AnalyticVariant::Secular => {
            let k = 0.25 * gc;
            let w2 = k * k + 0.25 * delta * delta;
            (k, w2, t * w2.sqrt())
        }
    };
    if w2 == 0.0 {
        return 1.0;
    }
    1.0 - k * k * arg.sin().powi(2) / w2
}

/// Analytic P₊ of a resonantly driven sensor (RF amplitude `sensor_rf`,
/// detuning `sensor_detuning`) coupled to a spin driven with `rf` at
/// detuning `detuning`.
pub fn detuned_population(
    sensor_rf: f64,
    sensor_detuning: f64,
    rf: f64,
    detuning: f64,
    g: f64,
    t: f64,
    variant: AnalyticVariant,
) -> f64 {
    let (bar1, _) = tilted_drive(sensor_detuning, sensor_rf);
    let (bar2, cos) = tilted_drive(detuning, rf);
    analytic_population(bar2 - bar1, cos.clamp(-1.0, 1.0).acos(), g, t, variant)
}

fn sensor_projector(spec: &ExperimentSpec, sensor: usize) -> Result<ndarray::Array2<crate::C64>> {
    let n = spec.n_nuclei();
    let pattern: String = (0..n).map(|k| if k == sensor { '+' } else { '.' }).collect();
    Observable::new("P_plus", &pattern).projector(n)
}

fn sensor_population(
    spec: &ExperimentSpec,
    reg: &SpinRegister,
    n_cycles: usize,
    rho0: &DensityOperator,
    sensor: usize,
) -> Result<(f64, Diagnostics)> {
    let (channel, d1) = reset_channel(spec, reg, n_cycles)?;
    let (rho, d2) = apply_checked(&channel, rho0)?;
    Ok((rho.expectation(&sensor_projector(spec, sensor)?), d1.merge(d2)))
}

/// Reset-protocol spectroscopy: the second target's RF frequency runs over
/// `omega_rf2` (rad/s) and the first target's P₊ is recorded after time
/// `t`. Columns: exact, secular and full-coupling analytic predictions.
pub fn run_rf_sweep(spec: &ExperimentSpec, omega_rf2: &[f64], t: f64) -> Result<SweepResult> {
    spec.validate()?;
    if omega_rf2.is_empty() {
        return Err(Error::InvalidArgument("RF grid must be non-empty".into()));
    }
    let [sensor, swept] = spec.register.targets()?;
    let t_reset = spec
        .dissipation
        .t_reset
        .ok_or_else(|| Error::InvalidArgument("RF sweeps need a reset period t_reset".into()))?;
    let n_cycles = cycles(t, t_reset)?;
    let t_eff = n_cycles as f64 * t_reset;
    let model = effective_nuclear_model(&spec.register, &spec.dissipation, spec.convention)?;
    let g = model.p * model.g_e_prime;
    let rho0 = spec.initial_state.nuclear(spec.n_nuclei())?;
    let exact = par_map(omega_rf2, |&w| {
        let mut reg = spec.register.clone();
        reg.nuclei[swept].rf_freq = w;
        sensor_population(spec, &reg, n_cycles, &rho0, sensor)
    })?;
    let s = &spec.register.nuclei[sensor];
    let analytic = |variant| -> Vec<f64> {
        omega_rf2
            .iter()
            .map(|&w| {
                let target = &spec.register.nuclei[swept];
                let det = target.resonance() - w;
                detuned_population(s.drive(), s.rf_detuning(), target.drive(), det, g, t_eff, variant)
            })
            .collect()
    };
    let mut r = SweepResult::new("omega_rf2_kHz", omega_rf2.iter().map(|w| w / TWO_PI * 1e-3).collect());
    r.push("P_plus_exact", exact.iter().map(|e| e.0).collect())?;
    r.push("P_plus_analytic_secular", analytic(AnalyticVariant::Secular))?;
    r.push("P_plus_analytic_full", analytic(AnalyticVariant::FullCoupling))?;
    r.diagnostics = exact.iter().fold(Diagnostics::default(), |acc, e| acc.merge(e.1));
    r.metadata = serde_json::json!({
        "experiment": "sweep-rf",
        "evolution_time_s": t_eff,
        "coupling_rad_s": g,
        "resonance_kHz": spec.register.nuclei[swept].resonance() / TWO_PI * 1e-3,
    });
    Ok(r)
}

/// Sensor P₊ from closed propagation of the detuned effective Hamiltonian
/// `Σ(Ω_rf I^x + δ I^z) + p g'_e I^z I^z` over the same RF grid: the
/// oracle for the analytic forms.
pub fn closed_sweep_oracle(spec: &ExperimentSpec, omega_rf2: &[f64], t: f64) -> Result<Vec<f64>> {
    let [sensor, swept] = spec.register.targets()?;
    let model = effective_nuclear_model(&spec.register, &spec.dissipation, spec.convention)?;
    let rho0 = spec.initial_state.nuclear(spec.n_nuclei())?;
    let proj = sensor_projector(spec, sensor)?;
    par_map(omega_rf2, |&w| {
        let mut reg = spec.register.clone();
        reg.nuclei[swept].rf_freq = w;
        let det: Vec<f64> = reg.nuclei.iter().map(|n| n.rf_detuning()).collect();
        let h = build_detuned_effective(&reg, &det, Some(&model))?;
        let u = unitary_from_hermitian(h.matrix(), t)?;
        let rho = u.dot(rho0.matrix()).dot(&crate::linalg::dagger(&u));
        Ok(DensityOperator::new(rho, rho0.layout().clone())?.expectation(&proj))
    })
}

/// Position, depth and full width at half depth of the deepest dip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DipMetrics {
    pub center: f64,
    pub minimum: f64,
    pub fwhm: f64,
}

/// Locates the global minimum and measures its width at the level halfway
/// between the minimum and the curve maximum, interpolating linearly.
pub fn dip_metrics(axis: &[f64], values: &[f64]) -> Result<DipMetrics> {
    if axis.len() != values.len() || axis.len() < 3 {
        return Err(Error::InvalidArgument(
            "dip analysis needs at least three aligned points".into(),
        ));
    }
    let (imin, &minimum) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * (top + minimum);
    let cross = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imin;
        for k in range {
            if values[k] >= half {
                let f = (half - values[prev]) / (values[k] - values[prev]);
                return Some(axis[prev] + f * (axis[k] - axis[prev]));
            }
            prev = k;
        }
        None
    };
    let left = cross(&mut (0..imin).rev()).unwrap_or(axis[0]);
    let right = cross(&mut (imin + 1..axis.len())).unwrap_or(axis[axis.len() - 1]);
    Ok(DipMetrics {
        center: axis[imin],
        minimum,
        fwhm: (right - left).abs(),
    })
}

/// A local minimum with its topographic prominence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Dip {
    pub position: f64,
    pub value: f64,
    pub prominence: f64,
}

/// Local minima whose prominence (height of the lower of the two
/// surrounding maxima above the dip, scanning until a deeper point) is at
/// least `min_prominence`.
pub fn find_dips(axis: &[f64], values: &[f64], min_prominence: f64) -> Vec<Dip> {
    let n = values.len().min(axis.len());
    let mut out = Vec::new();
    for i in 0..n {
        let v = values[i];
        let left_ok = i == 0 || values[i - 1] > v;
        let right_ok = i + 1 == n || values[i + 1] >= v;
        if !(left_ok && right_ok) {
            continue;
        }
        let mut left_max = v;
        for k in (0..i).rev() {
            if values[k] < v {
                break;
            }
            left_max = left_max.max(values[k]);
        }
        let mut right_max = v;
        for &x in &values[i + 1..n] {
            if x < v {
                break;
            }
            right_max = right_max.max(x);
        }
        let prominence = left_max.min(right_max) - v;
        if prominence >= min_prominence {
            out.push(Dip {
                position: axis[i],
                value: v,
                prominence,
            });
        }
    }
    out
}

/// Sensing sweep: the first target (sensor) stays on resonance while every
/// other driven nucleus has its RF frequency set to each point of
/// `omega_rf` (rad/s); P₊ of the sensor after time `t`.
pub fn run_sensing(spec: &ExperimentSpec, omega_rf: &[f64], t: f64) -> Result<SweepResult> {
    spec.validate()?;
    if omega_rf.is_empty() {
        return Err(Error::InvalidArgument("RF grid must be non-empty".into()));
    }
    let [sensor, _] = spec.register.targets()?;
    let t_reset = spec
        .dissipation
        .t_reset
        .ok_or_else(|| Error::InvalidArgument("sensing needs a reset period t_reset".into()))?;
    let n_cycles = cycles(t, t_reset)?;
    let rho0 = spec.initial_state.nuclear(spec.n_nuclei())?;
    let exact = par_map(omega_rf, |&w| {
        let mut reg = spec.register.clone();
        for (k, n) in reg.nuclei.iter_mut().enumerate() {
            if k != sensor && n.rf_enabled {
                n.rf_freq = w;
            }
        }
        sensor_population(spec, &reg, n_cycles, &rho0, sensor)
    })?;
    let mut r = SweepResult::new("omega_rf_kHz", omega_rf.iter().map(|w| w / TWO_PI * 1e-3).collect());
    r.push("P_plus", exact.iter().map(|e| e.0).collect())?;
    r.diagnostics = exact.iter().fold(Diagnostics::default(), |acc, e| acc.merge(e.1));
    let resonances: Vec<f64> = spec
        .register
        .nuclei
        .iter()
        .enumerate()
        .filter(|(k, n)| *k != sensor && n.rf_enabled)
        .map(|(_, n)| n.resonance() / TWO_PI * 1e-3)
        .collect();
    r.metadata = serde_json::json!({
        "experiment": "sense",
        "evolution_time_s": n_cycles as f64 * t_reset,
        "target_resonances_kHz": resonances,
    });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_detuned_has_no_dip() {
        for v in [AnalyticVariant::Secular, AnalyticVariant::FullCoupling] {
            assert!(analytic_population(1e6, 0.0, 700.0, 8.8e-3, v) > 0.9999);
        }
    }

    #[test]
    fn secular_full_dip_at_calibrated_time() {
        let p = analytic_population(0.0, 0.0, 703.5, 8.8e-3, AnalyticVariant::Secular);
        assert!(p < 0.001, "{p}");
    }

    #[test]
    fn full_coupling_is_twice_as_fast() {
        let g = 703.5;
        let t = std::f64::consts::PI / g;
        let full = analytic_population(0.0, 0.0, g, t, AnalyticVariant::FullCoupling);
        let secular = analytic_population(0.0, 0.0, g, 2.0 * std::f64::consts::PI / g, AnalyticVariant::Secular);
        assert!(full < 1e-12 && secular < 1e-12);
    }

    #[test]
    fn dip_metrics_of_lorentzian() {
        let axis: Vec<f64> = (0..2001).map(|k| -10.0 + 0.01 * k as f64).collect();
        let vals: Vec<f64> = axis.iter().map(|x| 1.0 - 0.8 / (1.0 + (x - 1.0).powi(2))).collect();
        let m = dip_metrics(&axis, &vals).unwrap();
        assert!((m.center - 1.0).abs() < 1e-9);
        assert!((m.minimum - 0.2).abs() < 1e-12);
        // the half level sits slightly below 1 − 0.4 because the curve top is under 1
        assert!((m.fwhm - 2.0).abs() < 0.05, "{}", m.fwhm);
    }

    #[test]
    fn prominence_separates_adjacent_dips() {
        let axis: Vec<f64> = (0..8).map(|k| k as f64).collect();
        let vals = [0.99, 0.8, 0.99, 0.5, 0.93, 0.52, 0.99, 0.98];
        let dips = find_dips(&axis, &vals, 0.1);
        let pos: Vec<f64> = dips.iter().map(|d| d.position).collect();
        assert_eq!(pos, vec![1.0, 3.0, 5.0]);
        assert!(find_dips(&axis, &vals, 0.5).is_empty());
    }
}
