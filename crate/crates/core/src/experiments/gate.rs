use ndarray::Array2;

use super::engine::{par_map, reset_channel};
use super::spec::{cycles, Diagnostics, ElectronState, ExperimentSpec, InitialState, SweepResult};
use crate::algebra::{choi_process_fidelity, spin, HilbertLayout, Superoperator};
use crate::effective::{effective_couplings, effective_nuclear_model, ideal_gate_unitary};
use crate::linalg::kron;
use crate::model::SpinRegister;
use crate::{Error, Result, C64, TWO_PI};

/// Default gate time: the secular full-transfer time `2π/(p g'_e)`.
pub fn default_gate_time(spec: &ExperimentSpec) -> Result<f64> {
    Ok(effective_nuclear_model(&spec.register, &spec.dissipation, spec.convention)?.transfer_time())
}

/// Dissipation-free target `exp(−iHt)` on the two gate targets (in
/// ascending slot order), with the coupling at `p = 1`.
pub fn gate_target(spec: &ExperimentSpec, t: f64) -> Result<Array2<C64>> {
    let [a, b] = sorted_targets(&spec.register)?;
    let (_, g) = effective_couplings(&spec.register, &spec.dissipation)?;
    // the |+⟩_e channel carries the opposite ZZ sign
    let g = match spec.initial_state.electron {
        ElectronState::Minus => g,
        ElectronState::Plus => -g,
    };
    let rf = [spec.register.nuclei[a].drive(), spec.register.nuclei[b].drive()];
    ideal_gate_unitary(rf, g, t)
}

fn sorted_targets(reg: &SpinRegister) -> Result<[usize; 2]> {
    let [a, b] = reg.targets()?;
    Ok(if a < b { [a, b] } else { [b, a] })
}

/// Restricts a nuclear channel to the two targets: spectators are prepared
/// as in `prep` and traced out afterwards.
pub fn target_channel(
    channel: &Superoperator,
    n: usize,
    targets: [usize; 2],
    prep: &InitialState,
) -> Result<Superoperator> {
    let layout = HilbertLayout::nuclei(n)?;
    if channel.dim() != layout.total_dim() {
        return Err(Error::Dimension("channel does not act on the nuclear register".into()));
    }
    let spectator = prep.nuclear(n)?;
    let others: Vec<usize> = (0..n).filter(|k| !targets.contains(k)).collect();
    let spect_state = if others.is_empty() {
        None
    } else {
        Some(spectator.partial_trace(&others)?.into_matrix())
    };
    let mut m = Array2::<C64>::zeros((16, 16));
    for j in 0..4 {
        for i in 0..4 {
            let (i1, i2, j1, j2) = (i / 2, i % 2, j / 2, j % 2);
            let e1 = spin::transition(2, i1, j1);
            let e2 = spin::transition(2, i2, j2);
            let factors: Vec<Array2<C64>> = (0..n)
                .map(|k| match k {
                    _ if k == targets[0] => e1.clone(),
                    _ if k == targets[1] => e2.clone(),
                    _ => spin::identity(2),
                })
                .collect();
            let input = match &spect_state {
                None => factors.iter().fold(Array2::eye(1), |acc: Array2<C64>, f| kron(&acc, f)),
                Some(s) => embed_spectators(&factors, &others, s, n),
            };
            let out = channel.apply(&input)?;
            let reduced = crate::algebra::partial_trace_matrix(&out, &layout, &targets, &layout.restrict(&targets)?);
            m.column_mut(i + 4 * j).assign(&crate::algebra::vectorize(&reduced));
        }
    }
    Superoperator::new(m, 4)
}

/// Tensor of target operators with a (possibly correlated) spectator state,
/// respecting slot order.
fn embed_spectators(factors: &[Array2<C64>], others: &[usize], spect: &Array2<C64>, n: usize) -> Array2<C64> {
    // build T ⊗ S in (targets..., spectators...) order, then permute slots
    let targets: Vec<usize> = (0..n).filter(|k| !others.contains(k)).collect();
    let t = targets
        .iter()
        .fold(Array2::eye(1), |acc: Array2<C64>, &k| kron(&acc, &factors[k]));
    let joint = kron(&t, spect);
    let order: Vec<usize> = targets.iter().chain(others).copied().collect();
    permute_slots(&joint, &order, n)
}

/// `joint` has qubit slots in `order`; returns it in natural slot order.
fn permute_slots(joint: &Array2<C64>, order: &[usize], n: usize) -> Array2<C64> {
    let d = 1usize << n;
    let map = |idx: usize| -> usize {
        // bit for position p in `joint` (MSB first) belongs to slot order[p]
        let mut out = 0usize;
        for (p, &slot) in order.iter().enumerate() {
            let bit = (idx >> (n - 1 - p)) & 1;
            out |= bit << (n - 1 - slot);
        }
        out
    };
    let mut r = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            r[[map(a), map(b)]] = joint[[a, b]];
        }
    }
    r
}

/// Result of one exact gate simulation.
#[derive(Clone, Copy, Debug)]
pub struct GateOutcome {
    pub fidelity: f64,
    pub duration: f64,
    pub diagnostics: Diagnostics,
}

/// Choi fidelity of the reset-protocol channel on the targets against
/// [`gate_target`], evolving `register` (which may differ from
/// `spec.register` in a swept parameter) for `round(gate_time/t_re)`
/// periods.
pub fn gate_fidelity(spec: &ExperimentSpec, register: &SpinRegister, gate_time: f64) -> Result<GateOutcome> {
    let t_reset = spec
        .dissipation
        .t_reset
        .ok_or_else(|| Error::InvalidArgument("gate runs need a reset period t_reset".into()))?;
    let n_cycles = cycles(gate_time, t_reset)?;
    let duration = n_cycles as f64 * t_reset;
    let (channel, diag) = reset_channel(spec, register, n_cycles)?;
    let targets = sorted_targets(register)?;
    let reduced = target_channel(&channel, register.n_nuclei(), targets, &spec.initial_state)?;
    let fidelity = choi_process_fidelity(&reduced, &gate_target(spec, duration)?)?;
    Ok(GateOutcome {
        fidelity,
        duration,
        diagnostics: diag,
    })
}

/// Process infidelity over a grid of MW detunings and fractional Rabi
/// errors, in long format: axis `mw_detuning_kHz`, columns `rabi_error`
/// and `infidelity`.
pub fn run_fidelity_map(
    spec: &ExperimentSpec,
    mw_detunings: &[f64],
    rabi_errors: &[f64],
    gate_time: Option<f64>,
) -> Result<SweepResult> {
    spec.validate()?;
    if mw_detunings.is_empty() || rabi_errors.is_empty() {
        return Err(Error::InvalidArgument("fidelity map grids must be non-empty".into()));
    }
    let t = match gate_time {
        Some(t) => t,
        None => default_gate_time(spec)?,
    };
    let points: Vec<(f64, f64)> = mw_detunings
        .iter()
        .flat_map(|&d| rabi_errors.iter().map(move |&e| (d, e)))
        .collect();
    let outcomes = par_map(&points, |&(d, e)| {
        let mut reg = spec.register.clone();
        reg.drive.mw_detuning = d;
        reg.drive.mw_rabi_error = e;
        gate_fidelity(spec, &reg, t)
    })?;
    let mut r = SweepResult::new("mw_detuning_kHz", points.iter().map(|p| p.0 / TWO_PI * 1e-3).collect());
    r.push("rabi_error", points.iter().map(|p| p.1).collect())?;
    r.push("infidelity", outcomes.iter().map(|o| 1.0 - o.fidelity).collect())?;
    r.diagnostics = outcomes
        .iter()
        .fold(Diagnostics::default(), |acc, o| acc.merge(o.diagnostics));
    r.metadata = serde_json::json!({
        "experiment": "fidelity-map",
        "gate_time_s": outcomes[0].duration,
    });
    Ok(r)
}

/// Register with the spectator (the non-target spin) placed so that its
/// coupling is `a_∥2 − 2δ₃` and it shares target 2's RF drive.
pub fn spectator_register(spec: &ExperimentSpec, delta3: f64) -> Result<SpinRegister> {
    let reg = &spec.register;
    if reg.n_nuclei() != 3 {
        return Err(Error::InvalidArgument(format!(
            "selectivity needs exactly three nuclei, register has {}",
            reg.n_nuclei()
        )));
    }
    let [_, t2] = reg.targets()?;
    let s = (0..3)
        .find(|k| !reg.targets().unwrap().contains(k))
        .expect("three nuclei, two targets");
    let mut out = reg.clone();
    let driver = &reg.nuclei[t2];
    let spect = &mut out.nuclei[s];
    spect.larmor = driver.larmor;
    spect.a_par = driver.a_par - 2.0 * delta3;
    spect.rf_rabi = driver.rf_rabi;
    spect.rf_freq = driver.rf_freq;
    spect.rf_enabled = driver.rf_enabled;
    Ok(out)
}

/// Gate fidelity on the targets as the spectator's detuning δ₃ is swept.
pub fn run_selectivity(spec: &ExperimentSpec, delta3: &[f64], gate_time: Option<f64>) -> Result<SweepResult> {
    spec.validate()?;
    if delta3.is_empty() {
        return Err(Error::InvalidArgument("delta3 grid must be non-empty".into()));
    }
    let t = match gate_time {
        Some(t) => t,
        None => default_gate_time(spec)?,
    };
    let outcomes = par_map(delta3, |&d| gate_fidelity(spec, &spectator_register(spec, d)?, t))?;
    let mut r = SweepResult::new("delta3_kHz", delta3.iter().map(|d| d / TWO_PI * 1e-3).collect());
    r.push("fidelity", outcomes.iter().map(|o| o.fidelity).collect())?;
    r.diagnostics = outcomes
        .iter()
        .fold(Diagnostics::default(), |acc, o| acc.merge(o.diagnostics));
    r.metadata = serde_json::json!({
        "experiment": "selectivity",
        "gate_time_s": outcomes[0].duration,
    });
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn permutation_restores_slot_order() {
        let a = spin::projector(&spin::up());
        let b = spin::projector(&spin::plus());
        let c = spin::projector(&spin::down());
        // joint in order (slot 2, slot 0, slot 1)
        let joint = kron(&kron(&c, &a), &b);
        let natural = kron(&kron(&a, &b), &c);
        assert!(max_abs_diff(&permute_slots(&joint, &[2, 0, 1], 3), &natural) < 1e-15);
    }

    #[test]
    fn identity_channel_restricts_to_identity() {
        let id = Superoperator::identity(8);
        let prep = InitialState::new("+--");
        let r = target_channel(&id, 3, [0, 2], &prep).unwrap();
        assert!(max_abs_diff(r.matrix(), Superoperator::identity(4).matrix()) < 1e-14);
    }
}
