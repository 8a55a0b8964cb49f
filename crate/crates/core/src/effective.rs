//! Second-order Schrieffer–Wolff reduction and the effective nuclear model
//! of the reset-stabilised gate.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::algebra::{embed, embed_product, spin, HilbertLayout, Operator};
use crate::linalg::{self, kron};
use crate::model::{dephasing_jumps, DissipationSpec, Jump, SpinRegister};
use crate::{Error, Result, C64, TWO_PI};

/// Perturbation strength above which the second-order reduction is flagged.
pub const SW_WARN_RATIO: f64 = 0.1;

/// Diagonal blocks of a second-order Schrieffer–Wolff reduction.
#[derive(Clone, Debug)]
pub struct SwBlocks {
    /// `blocks[α]` acts on the slow (nuclear) factor within electron level α.
    pub blocks: Vec<Array2<C64>>,
    /// `‖V‖ / min |E_α − E_β|`.
    pub perturbation_ratio: f64,
}

/// Second-order effective Hamiltonian for `H0 = diag(E) ⊗ I + V`.
///
/// `V` acts on `levels ⊗ slow` with `levels = energies.len()`. Block α is
/// `V_αα + Σ_{i≠α} V_αi V_iα / (E_α − E_i)`. Energies may be complex (for
/// non-Hermitian jump-formalism Hamiltonians).
pub fn sw_second_order(energies: &[C64], v: &Array2<C64>, slow_dim: usize) -> Result<SwBlocks> {
    let levels = energies.len();
    let n = levels * slow_dim;
    if v.dim() != (n, n) {
        return Err(Error::Dimension(format!(
            "perturbation is {}x{}, expected {n}x{n}",
            v.nrows(),
            v.ncols()
        )));
    }
    let scale = energies.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let mut min_gap = f64::INFINITY;
    for a in 0..levels {
        for b in a + 1..levels {
            let gap = (energies[a] - energies[b]).norm();
            if gap <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidArgument(format!(
                    "electron levels {a} and {b} are degenerate; second-order reduction undefined"
                )));
            }
            min_gap = min_gap.min(gap);
        }
    }
    let block = |a: usize, b: usize| {
        v.slice(ndarray::s![
            a * slow_dim..(a + 1) * slow_dim,
            b * slow_dim..(b + 1) * slow_dim
        ])
        .to_owned()
    };
    let mut blocks = Vec::with_capacity(levels);
    for a in 0..levels {
        let mut h = block(a, a);
        for i in (0..levels).filter(|&i| i != a) {
            let denom = energies[a] - energies[i];
            let term = block(a, i).dot(&block(i, a));
            h.scaled_add(C64::new(1.0, 0.0) / denom, &term);
        }
        blocks.push(h);
    }
    let v_norm = linalg::hermitian_eigenvalues(v)?
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    let perturbation_ratio = if min_gap.is_finite() { v_norm / min_gap } else { 0.0 };
    if perturbation_ratio > SW_WARN_RATIO {
        log::warn!("perturbation ratio {perturbation_ratio:.3} exceeds {SW_WARN_RATIO}");
    }
    Ok(SwBlocks {
        blocks,
        perturbation_ratio,
    })
}

/// Dressed-basis split of the RWA Hamiltonian: electron energies `±Ω/2`
/// (with `−iγ/2` on |+⟩ when `gamma > 0`) and the perturbation
/// `V = Σ_i [Ω_rf,i I^x_i + δ_i I^z_i + a_∥i σ_x I^z_i]` in electron-major order.
pub fn dressed_perturbation(reg: &SpinRegister, gamma: f64) -> Result<(Vec<C64>, Array2<C64>)> {
    if reg.nuclei.is_empty() {
        return Err(Error::InvalidArgument("register has no nuclear spins".into()));
    }
    let omega = reg.drive.effective_rabi();
    let layout = HilbertLayout::electron_with_nuclei(reg.n_nuclei());
    let d = layout.total_dim();
    let mut v = Array2::<C64>::zeros((d, d));
    for (i, n) in reg.nuclei.iter().enumerate() {
        v.scaled_add(C64::new(n.drive(), 0.0), embed(&spin::sx(), i + 1, &layout)?.matrix());
        v.scaled_add(
            C64::new(n.rf_detuning(), 0.0),
            embed(&spin::sz(), i + 1, &layout)?.matrix(),
        );
        v.scaled_add(
            C64::new(n.a_par, 0.0),
            embed_product(&[(0, &spin::sx()), (i + 1, &spin::sz())], &layout)?.matrix(),
        );
    }
    let energies = vec![C64::new(0.5 * omega, -0.5 * gamma), C64::new(-0.5 * omega, 0.0)];
    Ok((energies, v))
}

/// `g_e = a_1 a_2 / (2Ω)`.
pub fn coupling_closed(a1: f64, a2: f64, omega: f64) -> f64 {
    a1 * a2 / (2.0 * omega)
}

/// `g'_e = Ω a_1 a_2 / (2(Ω² + γ²/4))`.
pub fn coupling_dissipative(a1: f64, a2: f64, omega: f64, gamma: f64) -> f64 {
    omega * a1 * a2 / (2.0 * (omega * omega + 0.25 * gamma * gamma))
}

/// Electron decay rate entering the complex level splitting: γ_r with a
/// reset schedule, otherwise γ_e.
pub fn splitting_rate(dspec: &DissipationSpec) -> f64 {
    dspec.gamma_r().unwrap_or_else(|| dspec.gamma_e())
}

/// `(g_e, g'_e)` for the two gate targets.
pub fn effective_couplings(reg: &SpinRegister, dspec: &DissipationSpec) -> Result<(f64, f64)> {
    let [t1, t2] = reg.targets()?;
    let (a1, a2) = (reg.nuclei[t1].a_par, reg.nuclei[t2].a_par);
    let omega = reg.drive.mw_rabi;
    Ok((
        coupling_closed(a1, a2, omega),
        coupling_dissipative(a1, a2, omega, splitting_rate(dspec)),
    ))
}

/// `p = exp(−t_re / T1ρ)`, the cycle-start electron polarisation ⟨2σ_z⟩
/// magnitude under periodic resets.
pub fn quasi_steady_polarization(t_reset: f64, t1rho: f64) -> Result<f64> {
    if !(t_reset >= 0.0 && t1rho > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need t_reset >= 0 and t1rho > 0 (got {t_reset:e}, {t1rho:e})"
        )));
    }
    Ok((-t_reset / t1rho).exp())
}

/// Normalisation of the collective effective jump operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpConvention {
    /// Coefficient `√(pγ_r) a_k / (2(Ω − iγ_r/2))`, consistent with the
    /// spin-1/2 σ_x used for `g_e`.
    #[default]
    SpinHalf,
    /// Coefficient `√(pγ_r) a_k / (Ω − iγ_r/2)`, as for a Pauli σ_x.
    PauliX,
}

/// Scalars of the effective model (all rates in rad/s or 1/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EffectiveScalars {
    pub g_e: f64,
    pub g_e_prime: f64,
    pub p: f64,
    pub gamma_r: f64,
    pub gamma_n: f64,
    pub validity_ratio: f64,
}

/// Effective nuclear-only model of the reset-stabilised dynamics.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    pub g_e: f64,
    pub g_e_prime: f64,
    pub p: f64,
    pub gamma_r: f64,
    pub gamma_n: f64,
    /// `γ_N / (p g'_e)`.
    pub validity_ratio: f64,
    pub targets: [usize; 2],
    pub convention: JumpConvention,
    /// `Σ_i (Ω_rf,i I^x_i + δ_i I^z_i) + p g'_e I^z_1 I^z_2`.
    pub h_n: Operator,
    /// `Σ_k c a_∥k I^z_k` (one collective jump).
    pub l_n: Operator,
}

impl EffectiveModel {
    pub fn scalars(&self) -> EffectiveScalars {
        EffectiveScalars {
            g_e: self.g_e,
            g_e_prime: self.g_e_prime,
            p: self.p,
            gamma_r: self.gamma_r,
            gamma_n: self.gamma_n,
            validity_ratio: self.validity_ratio,
        }
    }

    /// `p g'_e ≫ γ_N`, read as a ratio below one.
    pub fn gate_capable(&self) -> bool {
        self.validity_ratio < 1.0
    }

    /// Secular full-transfer time `2π / (p g'_e)`.
    pub fn transfer_time(&self) -> f64 {
        TWO_PI / (self.p * self.g_e_prime)
    }

    /// The collective jump plus nuclear dephasing, on the nuclear layout.
    pub fn jumps(&self, dspec: &DissipationSpec) -> Result<Vec<Jump>> {
        let layout = self.h_n.layout().clone();
        let mut out = vec![Jump {
            label: "effective-collective".into(),
            rate: self.gamma_n,
            operator: self.l_n.matrix().clone(),
        }];
        out.extend(dephasing_jumps(dspec, layout.len(), &layout, 0)?);
        Ok(out)
    }
}

/// Effective nuclear model for the reset protocol.
pub fn effective_nuclear_model(
    reg: &SpinRegister,
    dspec: &DissipationSpec,
    convention: JumpConvention,
) -> Result<EffectiveModel> {
    let t_reset = dspec
        .t_reset
        .ok_or_else(|| Error::InvalidArgument("effective model needs a reset period t_reset".into()))?;
    let targets = reg.targets()?;
    let (g_e, g_e_prime) = effective_couplings(reg, dspec)?;
    let p = quasi_steady_polarization(t_reset, dspec.t1rho)?;
    let gamma_r = dspec.gamma_r().expect("reset period present");
    let omega = reg.drive.mw_rabi;
    let denom = omega * omega + 0.25 * gamma_r * gamma_r;
    let a_sum: f64 = reg.nuclei.iter().map(|n| n.a_par).sum();
    let gamma_n = p * gamma_r * a_sum * a_sum / denom;

    let layout = HilbertLayout::nuclei(reg.n_nuclei())?;
    let d = layout.total_dim();
    let mut h = embed_product(&[(targets[0], &spin::sz()), (targets[1], &spin::sz())], &layout)?
        .into_matrix()
        .mapv(|x| x * (p * g_e_prime));
    let mut l = Array2::<C64>::zeros((d, d));
    let half = match convention {
        JumpConvention::SpinHalf => 0.5,
        JumpConvention::PauliX => 1.0,
    };
    let coeff = C64::new(half * (p * gamma_r).sqrt(), 0.0) / C64::new(omega, -0.5 * gamma_r);
    for (i, n) in reg.nuclei.iter().enumerate() {
        let z = embed(&spin::sz(), i, &layout)?.into_matrix();
        h.scaled_add(C64::new(n.drive(), 0.0), embed(&spin::sx(), i, &layout)?.matrix());
        h.scaled_add(C64::new(n.rf_detuning(), 0.0), &z);
        l.scaled_add(coeff * n.a_par, &z);
    }
    let pg = p * g_e_prime;
    Ok(EffectiveModel {
        g_e,
        g_e_prime,
        p,
        gamma_r,
        gamma_n,
        validity_ratio: if pg != 0.0 { gamma_n / pg.abs() } else { f64::INFINITY },
        targets,
        convention,
        h_n: Operator::new(h, layout.clone())?,
        l_n: Operator::new(l, layout)?,
    })
}

/// Sensing figures of merit: `p g'_e √γ_N` and the proxy `(a_∥/4)/√T1ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sensitivity {
    pub effective: f64,
    pub proxy: f64,
    /// `effective / proxy`.
    pub ratio: f64,
}

pub fn sensitivity_estimate(model: &EffectiveModel, a_par_target: f64, t1rho: f64) -> Result<Sensitivity> {
    if !(t1rho > 0.0) {
        return Err(Error::InvalidArgument("t1rho must be positive".into()));
    }
    let effective = model.p * model.g_e_prime * model.gamma_n.sqrt();
    let proxy = 0.25 * a_par_target / t1rho.sqrt();
    let s = Sensitivity {
        effective,
        proxy,
        ratio: effective / proxy,
    };
    log::info!(
        "sensitivity: effective {effective:.4e}, proxy {proxy:.4e}, ratio {:.4}",
        s.ratio
    );
    Ok(s)
}

/// Electron-conditioned nuclear Hamiltonian at second order:
/// `Ω σ_z + Σ_i (Ω_rf,i I^x_i + δ_i I^z_i) + Σ_{i<j} g_ij · 2σ_z ⊗ I^z_i I^z_j`
/// with `g_ij = a_∥i a_∥j / (2Ω)`, i.e. `+g` in |+⟩_e and `−g` in |−⟩_e.
pub fn electron_conditioned_hamiltonian(reg: &SpinRegister) -> Result<Operator> {
    if reg.nuclei.is_empty() {
        return Err(Error::InvalidArgument("register has no nuclear spins".into()));
    }
    let omega = reg.drive.effective_rabi();
    let layout = HilbertLayout::electron_with_nuclei(reg.n_nuclei());
    let sz = spin::sz();
    let mut h = embed(&sz, 0, &layout)?.into_matrix().mapv(|x| x * omega);
    let two_sz = sz.mapv(|x| x * 2.0);
    for (i, n) in reg.nuclei.iter().enumerate() {
        h.scaled_add(C64::new(n.drive(), 0.0), embed(&spin::sx(), i + 1, &layout)?.matrix());
        h.scaled_add(C64::new(n.rf_detuning(), 0.0), embed(&sz, i + 1, &layout)?.matrix());
        for (j, m) in reg.nuclei.iter().enumerate().skip(i + 1) {
            let g = coupling_closed(n.a_par, m.a_par, omega);
            let term = embed_product(&[(0, &two_sz), (i + 1, &sz), (j + 1, &sz)], &layout)?;
            h.scaled_add(C64::new(g, 0.0), term.matrix());
        }
    }
    Operator::new(h, layout)
}

/// Ideal gate on the two targets: `exp(−iHt)` with
/// `H = Ω_rf,1 I^x_1 + Ω_rf,2 I^x_2 − g I^z_1 I^z_2`; the minus sign is the
/// |−⟩_e channel selected by the reset state.
pub fn ideal_gate_unitary(rf_rabi: [f64; 2], coupling: f64, t: f64) -> Result<Array2<C64>> {
    let id = spin::identity(2);
    let h = kron(&spin::sx(), &id).mapv(|x| x * rf_rabi[0]) + kron(&id, &spin::sx()).mapv(|x| x * rf_rabi[1])
        - kron(&spin::sz(), &spin::sz()).mapv(|x| x * coupling);
    linalg::unitary_from_hermitian(&h, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, max_abs_diff};
    use crate::model::{DriveSpec, NuclearSpinSpec};

    fn khz(x: f64) -> f64 {
        TWO_PI * x * 1e3
    }

    fn reference() -> (SpinRegister, DissipationSpec) {
        let reg = SpinRegister::new(
            vec![
                NuclearSpinSpec::resonant("13C", khz(4000.0), khz(9.0), khz(1.0)),
                NuclearSpinSpec::resonant("29Si", khz(5060.0), khz(11.0), khz(1.0)),
            ],
            DriveSpec::new(khz(400.0)),
        );
        (reg, DissipationSpec::new(200e-6, Some(20e-6)))
    }

    #[test]
    fn closed_coupling_value() {
        let (reg, d) = reference();
        let (g, _) = effective_couplings(&reg, &d).unwrap();
        assert!((g / TWO_PI - 123.75).abs() < 1e-9);
    }

    #[test]
    fn dissipative_coupling_limits() {
        let (a1, a2, om) = (khz(9.0), khz(11.0), khz(400.0));
        let g0 = coupling_closed(a1, a2, om);
        assert!((coupling_dissipative(a1, a2, om, 0.0) - g0).abs() < 1e-14 * g0);
        let ratio = coupling_dissipative(a1, a2, om, 55000.0) / coupling_closed(a1, a2, om);
        let expect = om * om / (om * om + 55000.0f64.powi(2) / 4.0);
        assert!((ratio - expect).abs() < 1e-12);
        assert!((ratio - 0.99988).abs() < 1e-5);
        assert!((coupling_closed(a1, a2, 2.0 * om) - 0.5 * coupling_closed(a1, a2, om)).abs() < 1e-12);
    }

    #[test]
    fn polarization_values() {
        assert!((quasi_steady_polarization(20e-6, 200e-6).unwrap() - (-0.1f64).exp()).abs() < 1e-15);
        assert_eq!(quasi_steady_polarization(0.0, 200e-6).unwrap(), 1.0);
        assert!((quasi_steady_polarization(1e-3, 1e-3).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(quasi_steady_polarization(1e-3, 0.0).is_err());
    }

    #[test]
    fn effective_model_reference_scalars() {
        let (reg, d) = reference();
        let m = effective_nuclear_model(&reg, &d, JumpConvention::SpinHalf).unwrap();
        assert!((m.gamma_n - 124.4).abs() < 0.1, "{}", m.gamma_n);
        assert!((m.p * m.g_e_prime - 703.5).abs() < 0.1);
        assert!((m.validity_ratio - 0.177).abs() < 0.002);
        assert!(m.gate_capable());
        assert!((m.transfer_time() - 8.93e-3).abs() < 0.01e-3);
        // spin-half collective jump on |↑↑⟩: |c (a1 + a2)/2|² = γ_N / 16
        let top = m.l_n.matrix()[[0, 0]].norm_sqr();
        assert!((top - m.gamma_n / 16.0).abs() / top < 1e-9);
    }

    #[test]
    fn effective_model_needs_reset() {
        let (reg, mut d) = reference();
        d.t_reset = None;
        assert!(effective_nuclear_model(&reg, &d, JumpConvention::SpinHalf).is_err());
    }

    #[test]
    fn decoupled_second_spin() {
        let (mut reg, d) = reference();
        reg.nuclei[1].a_par = 0.0;
        let m = effective_nuclear_model(&reg, &d, JumpConvention::SpinHalf).unwrap();
        assert_eq!(m.g_e_prime, 0.0);
        let a1 = reg.nuclei[0].a_par;
        let single = m.p * m.gamma_r * a1 * a1 / (khz(400.0).powi(2) + 0.25 * m.gamma_r.powi(2));
        assert!((m.gamma_n - single).abs() < 1e-9 * single);
    }

    #[test]
    fn stronger_drive_scaling() {
        let (reg, d) = reference();
        let m1 = effective_nuclear_model(&reg, &d, JumpConvention::SpinHalf).unwrap();
        let mut reg10 = reg.clone();
        reg10.drive.mw_rabi *= 10.0;
        let m10 = effective_nuclear_model(&reg10, &d, JumpConvention::SpinHalf).unwrap();
        assert!((m1.gamma_n / m10.gamma_n - 100.0).abs() < 0.5);
        assert!((m1.g_e_prime / m10.g_e_prime - 10.0).abs() < 0.01);
        assert!(m10.validity_ratio < m1.validity_ratio);
    }

    #[test]
    fn sw_blocks_have_opposite_zz() {
        let (mut reg, _) = reference();
        for n in &mut reg.nuclei {
            n.rf_rabi = 0.0;
        }
        let (e, v) = dressed_perturbation(&reg, 0.0).unwrap();
        let sw = sw_second_order(&e, &v, 4).unwrap();
        let zz = kron(&spin::sz(), &spin::sz());
        let g = coupling_closed(khz(9.0), khz(11.0), khz(400.0));
        // constant shift Σ a_i² / (16 Ω) is the single-spin self term
        let shift = (khz(9.0).powi(2) + khz(11.0).powi(2)) / (16.0 * khz(400.0));
        let id = Array2::<C64>::eye(4);
        let plus = &zz.mapv(|x| x * g) + &id.mapv(|x| x * shift);
        let minus = &zz.mapv(|x| x * -g) - &id.mapv(|x| x * shift);
        assert!(max_abs_diff(&sw.blocks[0], &plus) < 1e-9 * g);
        assert!(max_abs_diff(&sw.blocks[1], &minus) < 1e-9 * g);
        assert!((sw.perturbation_ratio - 0.5 * (khz(9.0) + khz(11.0)) / 2.0 / khz(400.0)).abs() < 1e-9);
    }

    #[test]
    fn complex_splitting_gives_dissipative_coupling() {
        let (mut reg, d) = reference();
        for n in &mut reg.nuclei {
            n.rf_rabi = 0.0;
        }
        let gamma = d.gamma_r().unwrap();
        let (e, v) = dressed_perturbation(&reg, gamma).unwrap();
        let sw = sw_second_order(&e, &v, 4).unwrap();
        // ZZ coefficient of the |−⟩ block: 4·(b[0,0] − b[1,1]) / 2 for |↑↑⟩ vs |↑↓⟩
        let b = &sw.blocks[1];
        let zz = 2.0 * (b[[0, 0]] - b[[1, 1]]).re;
        let gp = coupling_dissipative(khz(9.0), khz(11.0), khz(400.0), gamma);
        assert!((zz + gp).abs() < 1e-9 * gp, "{zz} vs {gp}");
    }

    #[test]
    fn zero_perturbation_gives_zero_correction() {
        let e = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let v = Array2::<C64>::zeros((4, 4));
        let sw = sw_second_order(&e, &v, 2).unwrap();
        assert!(sw.blocks.iter().all(|b| linalg::max_abs(b.view()) == 0.0));
    }

    #[test]
    fn degenerate_levels_rejected() {
        let e = [C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        let v = Array2::<C64>::zeros((4, 4));
        assert!(sw_second_order(&e, &v, 2).is_err());
    }

    #[test]
    fn conditioned_hamiltonian_blocks() {
        let (reg, _) = reference();
        let h = electron_conditioned_hamiltonian(&reg).unwrap();
        assert!(h.hermiticity_deviation() < 1e-12);
        let eig = hermitian_eigenvalues(h.matrix()).unwrap();
        assert_eq!(eig.len(), 8);
    }

    #[test]
    fn ideal_gate_is_unitary() {
        let u = ideal_gate_unitary([khz(1.0), khz(1.0)], 777.0, 8e-3).unwrap();
        assert!(linalg::unitarity_deviation(&u) < 1e-12);
    }
}
