use ndarray::Array2;

use super::SpinRegister;
use crate::algebra::{embed, embed_product, spin, HilbertLayout, Operator, Subsystem};
use crate::effective::EffectiveModel;
use crate::linalg;
use crate::{Error, Result, C64};

/// Hamiltonian sampled as a function of time.
pub trait TimeDependentHamiltonian: Sync {
    fn layout(&self) -> &HilbertLayout;
    fn at(&self, t: f64) -> Array2<C64>;
    /// Largest angular frequency present (drive carriers or the spread of
    /// the static spectrum), used to bound the time step.
    fn max_frequency(&self) -> f64;
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn op(local: &Array2<C64>, slot: usize, layout: &HilbertLayout) -> Array2<C64> {
    embed(local, slot, layout).expect("slot within layout").into_matrix()
}

fn op2(a: &Array2<C64>, sa: usize, b: &Array2<C64>, sb: usize, layout: &HilbertLayout) -> Array2<C64> {
    embed_product(&[(sa, a), (sb, b)], layout)
        .expect("distinct slots within layout")
        .into_matrix()
}

/// Electron-side terms shared by the dressed-frame levels:
/// `Ω(1+ε) σ_z − δ_mw σ_x`.
fn dressed_electron_terms(reg: &SpinRegister, layout: &HilbertLayout) -> Array2<C64> {
    let mut h = op(&spin::sz(), 0, layout).mapv(|x| x * reg.drive.effective_rabi());
    h.scaled_add(real(-reg.drive.mw_detuning), &op(&spin::sx(), 0, layout));
    h
}

/// Dressed-frame Hamiltonian after the nuclear rotating frame and the
/// rotating-wave approximation (time independent):
///
/// `H = Ω(1+ε)σ_z − δ_mw σ_x + Σ_i [Ω_rf,i I^x_i + δ_i I^z_i + a_∥i σ_x I^z_i]`
///
/// with `δ_i = γ_iB + a_∥i/2 − ω_rf,i`.
pub fn build_rwa_hamiltonian(reg: &SpinRegister) -> Result<Operator> {
    if reg.nuclei.is_empty() {
        return Err(Error::InvalidArgument("register has no nuclear spins".into()));
    }
    let layout = HilbertLayout::electron_with_nuclei(reg.n_nuclei());
    let mut h = dressed_electron_terms(reg, &layout);
    let sx_e = spin::sx();
    for (i, n) in reg.nuclei.iter().enumerate() {
        let slot = i + 1;
        h.scaled_add(real(n.drive()), &op(&spin::sx(), slot, &layout));
        h.scaled_add(real(n.rf_detuning()), &op(&spin::sz(), slot, &layout));
        h.scaled_add(real(n.a_par), &op2(&sx_e, 0, &spin::sz(), slot, &layout));
    }
    Operator::new(h, layout)
}

/// Dressed-frame Hamiltonian before the nuclear rotating frame, with the
/// explicit RF fields (each acting on every nucleus) and the perpendicular
/// hyperfine terms.
#[derive(Clone, Debug)]
pub struct RfFrameHamiltonian {
    layout: HilbertLayout,
    static_part: Array2<C64>,
    x_sum: Array2<C64>,
    fields: Vec<(f64, f64)>,
    max_frequency: f64,
}

impl RfFrameHamiltonian {
    pub fn new(reg: &SpinRegister) -> Result<Self> {
        if reg.nuclei.is_empty() {
            return Err(Error::InvalidArgument("register has no nuclear spins".into()));
        }
        let layout = HilbertLayout::electron_with_nuclei(reg.n_nuclei());
        let mut h = dressed_electron_terms(reg, &layout);
        let d = layout.total_dim();
        let mut x_sum = Array2::<C64>::zeros((d, d));
        let sx_e = spin::sx();
        let mut max_frequency = reg.drive.effective_rabi().abs();
        let mut fields = Vec::new();
        for (i, n) in reg.nuclei.iter().enumerate() {
            let slot = i + 1;
            h.scaled_add(real(n.resonance()), &op(&spin::sz(), slot, &layout));
            h.scaled_add(real(n.a_par), &op2(&sx_e, 0, &spin::sz(), slot, &layout));
            h.scaled_add(real(n.a_perp), &op2(&sx_e, 0, &spin::sx(), slot, &layout));
            x_sum += &op(&spin::sx(), slot, &layout);
            max_frequency = max_frequency.max(n.resonance().abs());
            if n.rf_enabled {
                fields.push((n.rf_rabi, n.rf_freq));
                max_frequency = max_frequency.max(n.rf_freq.abs());
            }
        }
        max_frequency = max_frequency.max(spectral_spread(&h)?);
        Ok(RfFrameHamiltonian {
            layout,
            static_part: h,
            x_sum,
            fields,
            max_frequency,
        })
    }
}

impl TimeDependentHamiltonian for RfFrameHamiltonian {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    fn at(&self, t: f64) -> Array2<C64> {
        let amp: f64 = self.fields.iter().map(|&(rabi, w)| 2.0 * rabi * (w * t).cos()).sum();
        let mut h = self.static_part.clone();
        h.scaled_add(real(amp), &self.x_sum);
        h
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

pub fn build_rf_frame_hamiltonian(reg: &SpinRegister, t: f64) -> Result<Operator> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("time must be non-negative, got {t}")));
    }
    let h = RfFrameHamiltonian::new(reg)?;
    Operator::new(h.at(t), h.layout.clone())
}

/// `exp(+i Σ_i ω_i I^z_i t)` with `ω_i` each spin's RWA frame frequency.
/// Maps an RF-frame state `ψ` to the RWA frame as `R ψ`.
pub fn rwa_frame_rotation(reg: &SpinRegister, t: f64) -> Array2<C64> {
    let layout = HilbertLayout::electron_with_nuclei(reg.n_nuclei());
    let d = layout.total_dim();
    let mut r = Array2::<C64>::zeros((d, d));
    for a in 0..d {
        let digits = layout.digits(a);
        let phase: f64 = reg
            .nuclei
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let m = if digits[i + 1] == 0 { 0.5 } else { -0.5 };
                n.frame_frequency() * m * t
            })
            .sum();
        r[[a, a]] = C64::from_polar(1.0, phase);
    }
    r
}

/// Lab-frame Hamiltonian with a spin-1 electron in the basis
/// (|+1⟩, |0⟩, |−1⟩):
///
/// `H = sD S_z² + sγ_eB S_z + Σ γ_iB I^z_i + S_z Σ (a_∥i I^z_i + a_⊥i I^x_i)
///      + √2 Ω(1+ε) cos(ωt) S_x + Σ_i 2Ω_rf,i cos(ω_rf,i t) Σ_j I^x_j`
///
/// with MW carrier `ω = s(D − γ_eB) − δ_mw` and `s` the frequency scale.
#[derive(Clone, Debug)]
pub struct LabHamiltonian {
    layout: HilbertLayout,
    static_part: Array2<C64>,
    mw_op: Array2<C64>,
    mw_freq: f64,
    x_sum: Array2<C64>,
    fields: Vec<(f64, f64)>,
    max_frequency: f64,
}

impl LabHamiltonian {
    pub fn new(reg: &SpinRegister, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lab scale must be in (0, 1], got {scale}"
            )));
        }
        let mut subs = vec![Subsystem {
            label: "e".into(),
            dim: 3,
        }];
        subs.extend(reg.nuclei.iter().enumerate().map(|(i, _)| Subsystem {
            label: format!("n{}", i + 1),
            dim: 2,
        }));
        let layout = HilbertLayout::new(subs)?;
        let d_zf = scale * reg.drive.zero_field_d;
        let zeeman = scale * reg.drive.electron_zeeman;
        let sz1 = spin::spin1_sz();
        let mut h = op(&sz1.dot(&sz1), 0, &layout).mapv(|x| x * d_zf);
        h.scaled_add(real(zeeman), &op(&sz1, 0, &layout));
        let dim = layout.total_dim();
        let mut x_sum = Array2::<C64>::zeros((dim, dim));
        let mut fields = Vec::new();
        let mw_freq = d_zf - zeeman - reg.drive.mw_detuning;
        let mut max_frequency = (d_zf + zeeman).abs().max(mw_freq.abs());
        for (i, n) in reg.nuclei.iter().enumerate() {
            let slot = i + 1;
            h.scaled_add(real(n.larmor), &op(&spin::sz(), slot, &layout));
            h.scaled_add(real(n.a_par), &op2(&sz1, 0, &spin::sz(), slot, &layout));
            h.scaled_add(real(n.a_perp), &op2(&sz1, 0, &spin::sx(), slot, &layout));
            x_sum += &op(&spin::sx(), slot, &layout);
            max_frequency = max_frequency.max(n.larmor.abs());
            if n.rf_enabled {
                fields.push((n.rf_rabi, n.rf_freq));
                max_frequency = max_frequency.max(n.rf_freq.abs());
            }
        }
        let mw_op =
            op(&spin::spin1_sx(), 0, &layout).mapv(|x| x * (std::f64::consts::SQRT_2 * reg.drive.effective_rabi()));
        max_frequency = max_frequency.max(spectral_spread(&h)?);
        Ok(LabHamiltonian {
            layout,
            static_part: h,
            mw_op,
            mw_freq,
            x_sum,
            fields,
            max_frequency,
        })
    }

    /// MW carrier frequency ω.
    pub fn mw_frequency(&self) -> f64 {
        self.mw_freq
    }
}

impl TimeDependentHamiltonian for LabHamiltonian {
    fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    fn at(&self, t: f64) -> Array2<C64> {
        let mut h = self.static_part.clone();
        h.scaled_add(real((self.mw_freq * t).cos()), &self.mw_op);
        let amp: f64 = self.fields.iter().map(|&(rabi, w)| 2.0 * rabi * (w * t).cos()).sum();
        if amp != 0.0 {
            h.scaled_add(real(amp), &self.x_sum);
        }
        h
    }

    fn max_frequency(&self) -> f64 {
        self.max_frequency
    }
}

pub fn build_lab_hamiltonian(reg: &SpinRegister, t: f64, scale: f64) -> Result<Operator> {
    let h = LabHamiltonian::new(reg, scale)?;
    Operator::new(h.at(t), h.layout.clone())
}

/// Time-independent Hamiltonian viewed as a time-dependent source.
#[derive(Clone, Debug)]
pub struct StaticHamiltonian {
    hamiltonian: Operator,
    spread: f64,
}

fn spectral_spread(h: &Array2<C64>) -> Result<f64> {
    let eig = linalg::hermitian_eigenvalues(h)?;
    Ok(eig[eig.len() - 1] - eig[0])
}

impl StaticHamiltonian {
    pub fn new(hamiltonian: Operator) -> Result<Self> {
        let spread = spectral_spread(hamiltonian.matrix())?;
        Ok(StaticHamiltonian { hamiltonian, spread })
    }
}

impl TimeDependentHamiltonian for StaticHamiltonian {
    fn layout(&self) -> &HilbertLayout {
        self.hamiltonian.layout()
    }

    fn at(&self, _t: f64) -> Array2<C64> {
        self.hamiltonian.matrix().clone()
    }

    fn max_frequency(&self) -> f64 {
        self.spread
    }
}

/// Dressed RF amplitude and tilt for a drive `Ω_rf` detuned by `δ`:
/// returns `(Ω̄, cos θ)` with `Ω̄ = √(δ² + Ω_rf²)` and `cos θ = Ω_rf/Ω̄`.
pub fn tilted_drive(detuning: f64, rf_rabi: f64) -> (f64, f64) {
    let bar = detuning.hypot(rf_rabi);
    let cos = if bar > 0.0 { rf_rabi / bar } else { 1.0 };
    (bar, cos)
}

/// Nuclear-only Hamiltonian with detuned RF drives:
/// `Σ_i (Ω_rf,i I^x_i + δ_i I^z_i) + p g'_e I^z_1 I^z_2`, i.e. each detuned
/// spin is driven with amplitude `Ω̄_i` about its tilted axis.
pub fn build_detuned_effective(
    reg: &SpinRegister,
    detunings: &[f64],
    model: Option<&EffectiveModel>,
) -> Result<Operator> {
    let model = model.ok_or_else(|| Error::InvalidArgument("effective model has not been derived".into()))?;
    if detunings.len() != reg.n_nuclei() {
        return Err(Error::Dimension(format!(
            "{} detunings for {} nuclei",
            detunings.len(),
            reg.n_nuclei()
        )));
    }
    let layout = HilbertLayout::nuclei(reg.n_nuclei())?;
    let [t1, t2] = model.targets;
    let mut h = op2(&spin::sz(), t1, &spin::sz(), t2, &layout).mapv(|x| x * (model.p * model.g_e_prime));
    for (i, (n, &det)) in reg.nuclei.iter().zip(detunings).enumerate() {
        h.scaled_add(real(n.drive()), &op(&spin::sx(), i, &layout));
        h.scaled_add(real(det), &op(&spin::sz(), i, &layout));
    }
    Operator::new(h, layout)
}
