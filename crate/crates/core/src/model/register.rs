use serde::{Deserialize, Serialize};

use crate::{Error, Result, TWO_PI};

/// One nuclear spin-1/2 with its hyperfine couplings and RF drive.
/// All frequencies are angular (rad/s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuclearSpinSpec {
    pub label: String,
    /// Bare Larmor frequency γ_n·B.
    pub larmor: f64,
    pub a_par: f64,
    pub a_perp: f64,
    pub rf_rabi: f64,
    pub rf_freq: f64,
    pub rf_enabled: bool,
}

impl NuclearSpinSpec {
    /// Spin driven exactly on its dressed-frame resonance `larmor + a_par/2`.
    pub fn resonant(label: &str, larmor: f64, a_par: f64, rf_rabi: f64) -> Self {
        NuclearSpinSpec {
            label: label.to_string(),
            larmor,
            a_par,
            a_perp: 0.0,
            rf_rabi,
            rf_freq: larmor + 0.5 * a_par,
            rf_enabled: true,
        }
    }

    /// Spin with no RF drive.
    pub fn undriven(label: &str, larmor: f64, a_par: f64) -> Self {
        NuclearSpinSpec {
            rf_rabi: 0.0,
            rf_enabled: false,
            ..Self::resonant(label, larmor, a_par, 0.0)
        }
    }

    /// `γ_n B + a_∥/2`, the transition frequency in the dressed frame.
    pub fn resonance(&self) -> f64 {
        self.larmor + 0.5 * self.a_par
    }

    /// Frequency of the rotating frame used for this spin at the RWA level.
    pub fn frame_frequency(&self) -> f64 {
        if self.rf_enabled {
            self.rf_freq
        } else {
            self.resonance()
        }
    }

    /// `resonance − ω_rf`; zero for undriven spins.
    pub fn rf_detuning(&self) -> f64 {
        self.resonance() - self.frame_frequency()
    }

    /// Effective RF Rabi frequency (zero when the drive is off).
    pub fn drive(&self) -> f64 {
        if self.rf_enabled {
            self.rf_rabi
        } else {
            0.0
        }
    }

    /// Sets the RF frequency so that `rf_detuning() == detuning`.
    pub fn with_rf_detuning(mut self, detuning: f64) -> Self {
        self.rf_freq = self.resonance() - detuning;
        self
    }

    fn validate(&self, index: usize) -> Result<()> {
        let key = |f: &str| format!("nuclei[{index}].{f}");
        for (name, v) in [
            ("larmor", self.larmor),
            ("a_par", self.a_par),
            ("a_perp", self.a_perp),
            ("rf_rabi", self.rf_rabi),
            ("rf_freq", self.rf_freq),
        ] {
            if !v.is_finite() {
                return Err(Error::config(key(name), "must be finite"));
            }
        }
        if self.a_perp < 0.0 {
            return Err(Error::config(key("a_perp"), "must be non-negative"));
        }
        if self.rf_rabi < 0.0 {
            return Err(Error::config(key("rf_rabi"), "must be non-negative"));
        }
        Ok(())
    }
}

/// Microwave drive of the NV electron and the static electron parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Ω, rad/s.
    pub mw_rabi: f64,
    /// Offset of the MW carrier from `D − γ_eB`, rad/s.
    pub mw_detuning: f64,
    /// Fractional amplitude error ε (Ω → Ω(1+ε)).
    pub mw_rabi_error: f64,
    pub zero_field_d: f64,
    pub electron_zeeman: f64,
}

impl DriveSpec {
    pub fn new(mw_rabi: f64) -> Self {
        DriveSpec {
            mw_rabi,
            mw_detuning: 0.0,
            mw_rabi_error: 0.0,
            zero_field_d: TWO_PI * 2.87e9,
            electron_zeeman: TWO_PI * 1.0e9,
        }
    }

    /// Ω(1+ε).
    pub fn effective_rabi(&self) -> f64 {
        self.mw_rabi * (1.0 + self.mw_rabi_error)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mw_rabi > 0.0 && self.mw_rabi.is_finite()) {
            return Err(Error::config("drive.mw_rabi", "must be positive"));
        }
        for (k, v) in [
            ("drive.mw_detuning", self.mw_detuning),
            ("drive.mw_rabi_error", self.mw_rabi_error),
            ("drive.zero_field_d", self.zero_field_d),
            ("drive.electron_zeeman", self.electron_zeeman),
        ] {
            if !v.is_finite() {
                return Err(Error::config(k, "must be finite"));
            }
        }
        if self.mw_rabi_error <= -1.0 {
            return Err(Error::config("drive.mw_rabi_error", "must exceed -1"));
        }
        Ok(())
    }
}

/// How the dressed electron relaxes at rate γ_e = 1/T1ρ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxationModel {
    /// Symmetric dressed-frame relaxation: `√(γ/2)|−⟩⟨+|` and `√(γ/2)|+⟩⟨−|`,
    /// so that ⟨2σ_z⟩ decays as `e^{−t/T1ρ}`.
    #[default]
    Depolarizing,
    /// Single decay channel `√γ |−⟩⟨+|`.
    Decay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationSpec {
    /// T1ρ, s.
    pub t1rho: f64,
    /// Reset period t_re, s.
    pub t_reset: Option<f64>,
    /// Per-nucleus coherence time T2, s (missing entries mean none).
    pub target_t2: Vec<Option<f64>>,
    pub relaxation: RelaxationModel,
}

impl DissipationSpec {
    pub fn new(t1rho: f64, t_reset: Option<f64>) -> Self {
        DissipationSpec {
            t1rho,
            t_reset,
            target_t2: Vec::new(),
            relaxation: RelaxationModel::Depolarizing,
        }
    }

    /// γ_e = 1/T1ρ.
    pub fn gamma_e(&self) -> f64 {
        1.0 / self.t1rho
    }

    /// γ_r = 1/T1ρ + 1/t_re when a reset period is set.
    pub fn gamma_r(&self) -> Option<f64> {
        self.t_reset.map(|t| 1.0 / self.t1rho + 1.0 / t)
    }

    pub fn t2_of(&self, nucleus: usize) -> Option<f64> {
        self.target_t2.get(nucleus).copied().flatten()
    }

    pub fn validate(&self, n_nuclei: usize) -> Result<()> {
        if !(self.t1rho > 0.0 && self.t1rho.is_finite()) {
            return Err(Error::config("dissipation.t1rho", "must be positive"));
        }
        if let Some(t) = self.t_reset {
            if !(t > 0.0 && t < 10.0 * self.t1rho) {
                return Err(Error::config(
                    "dissipation.t_reset",
                    format!(
                        "must satisfy 0 < t_reset < 10*t1rho (t_reset = {t:e} s, t1rho = {:e} s)",
                        self.t1rho
                    ),
                ));
            }
        }
        if self.target_t2.len() > n_nuclei {
            return Err(Error::config(
                "dissipation.target_t2",
                format!("{} entries for {n_nuclei} nuclei", self.target_t2.len()),
            ));
        }
        for (i, t2) in self.target_t2.iter().enumerate() {
            if let Some(t) = t2 {
                if !(*t > 0.0) {
                    return Err(Error::config(format!("nuclei[{i}].t2"), "must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Dimensionless ratios describing how well the perturbative hierarchy
/// `a_∥ ≪ Ω ≪ ω_rf` holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidityReport {
    /// `max_i |a_∥i| / Ω`.
    pub coupling_ratio: f64,
    /// `Ω / min_i ω_rf,i` over driven spins (0 when none are driven).
    pub drive_ratio: f64,
    pub warnings: Vec<String>,
}

/// NV dressed qubit plus nuclear spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinRegister {
    pub nuclei: Vec<NuclearSpinSpec>,
    pub drive: DriveSpec,
    /// Indices (into `nuclei`) of the two gate-target spins.
    pub gate_targets: Option<[usize; 2]>,
}

pub const VALIDITY_WARN: f64 = 0.1;

impl SpinRegister {
    pub fn new(nuclei: Vec<NuclearSpinSpec>, drive: DriveSpec) -> Self {
        let gate_targets = if nuclei.len() >= 2 { Some([0, 1]) } else { None };
        SpinRegister {
            nuclei,
            drive,
            gate_targets,
        }
    }

    pub fn n_nuclei(&self) -> usize {
        self.nuclei.len()
    }

    pub fn targets(&self) -> Result<[usize; 2]> {
        self.gate_targets
            .ok_or_else(|| Error::InvalidArgument("two gate-target spins must be designated".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        for (i, n) in self.nuclei.iter().enumerate() {
            n.validate(i)?;
        }
        if let Some([a, b]) = self.gate_targets {
            if a == b || a >= self.nuclei.len() || b >= self.nuclei.len() {
                return Err(Error::config(
                    "gate.targets",
                    format!("need two distinct nuclei in 0..{}, got [{a}, {b}]", self.nuclei.len()),
                ));
            }
        }
        Ok(())
    }

    pub fn validity(&self) -> ValidityReport {
        let omega = self.drive.mw_rabi;
        let coupling_ratio = self.nuclei.iter().map(|n| n.a_par.abs()).fold(0.0, f64::max) / omega;
        let min_rf = self
            .nuclei
            .iter()
            .filter(|n| n.rf_enabled)
            .map(|n| n.rf_freq.abs())
            .fold(f64::INFINITY, f64::min);
        let drive_ratio = if min_rf.is_finite() { omega / min_rf } else { 0.0 };
        let mut warnings = Vec::new();
        if coupling_ratio > VALIDITY_WARN {
            warnings.push(format!(
                "max a_par / Omega = {coupling_ratio:.3} exceeds {VALIDITY_WARN}"
            ));
        }
        if drive_ratio > VALIDITY_WARN {
            warnings.push(format!(
                "Omega / min omega_rf = {drive_ratio:.3} exceeds {VALIDITY_WARN}"
            ));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        ValidityReport {
            coupling_ratio,
            drive_ratio,
            warnings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn khz(x: f64) -> f64 {
        TWO_PI * x * 1e3
    }

    #[test]
    fn resonant_spin_has_zero_detuning() {
        let n = NuclearSpinSpec::resonant("13C", khz(4000.0), khz(9.0), khz(1.0));
        assert_eq!(n.rf_detuning(), 0.0);
        assert!((n.rf_freq - khz(4004.5)).abs() < 1e-9 * n.rf_freq);
        let d = n.clone().with_rf_detuning(khz(0.3));
        assert!((d.rf_detuning() - khz(0.3)).abs() < 1e-6);
    }

    #[test]
    fn gamma_rates() {
        let d = DissipationSpec::new(200e-6, Some(20e-6));
        assert!((d.gamma_e() - 5000.0).abs() < 1e-9);
        assert!((d.gamma_r().unwrap() - 55000.0).abs() < 1e-9);
        assert!(DissipationSpec::new(200e-6, None).gamma_r().is_none());
    }

    #[test]
    fn reset_longer_than_ten_t1rho_rejected() {
        let d = DissipationSpec::new(200e-6, Some(2.5e-3));
        assert!(d.validate(2).is_err());
        assert!(DissipationSpec::new(200e-6, Some(20e-6)).validate(2).is_ok());
        assert!(DissipationSpec::new(-1.0, None).validate(2).is_err());
    }

    #[test]
    fn validity_ratios_on_reference_values() {
        let reg = SpinRegister::new(
            vec![
                NuclearSpinSpec::resonant("a", khz(4000.0), khz(9.0), khz(1.0)),
                NuclearSpinSpec::resonant("b", khz(5060.0), khz(11.0), khz(1.0)),
            ],
            DriveSpec::new(khz(400.0)),
        );
        let v = reg.validity();
        assert!((v.coupling_ratio - 11.0 / 400.0).abs() < 1e-12);
        assert!((v.drive_ratio - 400.0 / 4004.5).abs() < 1e-12);
        assert!(v.warnings.is_empty());
        let strong = SpinRegister::new(reg.nuclei.clone(), DriveSpec::new(khz(50.0)));
        assert_eq!(strong.validity().warnings.len(), 1);
    }

    #[test]
    fn invalid_targets_rejected() {
        let mut reg = SpinRegister::new(
            vec![NuclearSpinSpec::resonant("a", khz(4000.0), khz(9.0), khz(1.0))],
            DriveSpec::new(khz(400.0)),
        );
        assert!(reg.targets().is_err());
        reg.gate_targets = Some([0, 0]);
        assert!(reg.validate().is_err());
    }

    #[test]
    fn negative_couplings_rejected() {
        let mut n = NuclearSpinSpec::resonant("a", khz(4000.0), khz(9.0), khz(1.0));
        n.a_perp = -1.0;
        let reg = SpinRegister::new(vec![n], DriveSpec::new(khz(400.0)));
        assert!(reg.validate().is_err());
    }
}
