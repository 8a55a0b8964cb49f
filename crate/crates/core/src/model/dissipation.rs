use ndarray::Array2;
use serde::Serialize;

use super::{DissipationSpec, RelaxationModel, SpinRegister};
use crate::algebra::{embed, spin, HilbertLayout};
use crate::{Error, Result, C64};

/// Lindblad jump operator `L = √rate · A`; `operator` already carries the
/// square-root rate.
#[derive(Clone, Debug, Serialize)]
pub struct Jump {
    pub label: String,
    pub rate: f64,
    #[serde(skip)]
    pub operator: Array2<C64>,
}

impl Jump {
    pub fn new(label: impl Into<String>, rate: f64, unit_op: &Array2<C64>) -> Self {
        Jump {
            label: label.into(),
            rate,
            operator: unit_op.mapv(|x| x * rate.sqrt()),
        }
    }
}

/// Which electron rate the dissipators use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElectronRate {
    /// Dressed-frame relaxation at γ_e = 1/T1ρ, per the relaxation model.
    Relaxation,
    /// Reset-augmented decay `√γ_r |−⟩⟨+|` with γ_r = 1/T1ρ + 1/t_re.
    ResetAugmented,
}

/// Electron jump operators on `layout` (electron in slot 0).
pub fn electron_jumps(dspec: &DissipationSpec, rate: ElectronRate, layout: &HilbertLayout) -> Result<Vec<Jump>> {
    let lower = embed(&spin::transition(2, 1, 0), 0, layout)?.into_matrix();
    let raise = embed(&spin::transition(2, 0, 1), 0, layout)?.into_matrix();
    Ok(match rate {
        ElectronRate::Relaxation => {
            let g = dspec.gamma_e();
            match dspec.relaxation {
                RelaxationModel::Depolarizing => vec![
                    Jump::new("electron-relax-down", 0.5 * g, &lower),
                    Jump::new("electron-relax-up", 0.5 * g, &raise),
                ],
                RelaxationModel::Decay => vec![Jump::new("electron-decay", g, &lower)],
            }
        }
        ElectronRate::ResetAugmented => {
            let g = dspec
                .gamma_r()
                .ok_or_else(|| Error::InvalidArgument("reset-augmented rate needs a reset period".into()))?;
            vec![Jump::new("electron-reset-decay", g, &lower)]
        }
    })
}

/// Pure dephasing `√(2/T2) I^z` for every nucleus with a T2, where nucleus
/// `i` sits in slot `i + slot_offset` of `layout`.
pub fn dephasing_jumps(
    dspec: &DissipationSpec,
    n_nuclei: usize,
    layout: &HilbertLayout,
    slot_offset: usize,
) -> Result<Vec<Jump>> {
    let mut out = Vec::new();
    for i in 0..n_nuclei {
        if let Some(t2) = dspec.t2_of(i) {
            let z = embed(&spin::sz(), i + slot_offset, layout)?.into_matrix();
            out.push(Jump::new(format!("dephasing-n{}", i + 1), 2.0 / t2, &z));
        }
    }
    Ok(out)
}

/// All jump operators on the electron-plus-nuclei layout of `reg`.
pub fn build_dissipators(reg: &SpinRegister, dspec: &DissipationSpec, rate: ElectronRate) -> Result<Vec<Jump>> {
    dspec.validate(reg.n_nuclei())?;
    let layout = HilbertLayout::electron_with_nuclei(reg.n_nuclei());
    let mut jumps = electron_jumps(dspec, rate, &layout)?;
    jumps.extend(dephasing_jumps(dspec, reg.n_nuclei(), &layout, 1)?);
    Ok(jumps)
}
