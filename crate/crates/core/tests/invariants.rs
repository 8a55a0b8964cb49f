use ndarray::Array2;
use proptest::prelude::*;

use nvgate::algebra::{choi_process_fidelity, embed, spin, DensityOperator, HilbertLayout, Operator, Superoperator};
use nvgate::cli::{parse_quantity, Dimension};
use nvgate::effective::{coupling_dissipative, effective_nuclear_model, sw_second_order, JumpConvention};
use nvgate::linalg::{commutator, dagger, hermitian_eigenvalues, max_abs_diff, unitary_from_hermitian};
use nvgate::model::{
    build_rwa_hamiltonian, electron_jumps, DissipationSpec, DriveSpec, LabHamiltonian, NuclearSpinSpec,
    RfFrameHamiltonian, SpinRegister, TimeDependentHamiltonian,
};
use nvgate::propagation::{propagate_static, LindbladGenerator};
use nvgate::{C64, TWO_PI};

fn khz(x: f64) -> f64 {
    TWO_PI * x * 1e3
}

fn hermitian(d: usize, entries: &[f64]) -> Array2<C64> {
    let a = Array2::from_shape_fn((d, d), |(i, j)| {
        C64::new(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1])
    });
    (&a + &dagger(&a)).mapv(|x| x * 0.5)
}

fn density(d: usize, entries: &[f64]) -> Array2<C64> {
    let a = Array2::from_shape_fn((d, d), |(i, j)| {
        C64::new(entries[2 * (i * d + j)], entries[2 * (i * d + j) + 1])
    });
    let m = a.dot(&dagger(&a));
    let tr: f64 = (0..d).map(|i| m[[i, i]].re).sum();
    m.mapv(|x| x / tr)
}

fn entries(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * d * d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn embedded_spin_algebra(n in 1usize..5, slot_seed in 0usize..8) {
        let slot = slot_seed % n;
        let labels: Vec<String> = (0..n).map(|k| format!("q{k}")).collect();
        let layout = HilbertLayout::qubits(&labels).unwrap();
        let d = layout.total_dim();
        let x = embed(&spin::sx(), slot, &layout).unwrap().into_matrix();
        let y = embed(&spin::sy(), slot, &layout).unwrap().into_matrix();
        let z = embed(&spin::sz(), slot, &layout).unwrap().into_matrix();
        let quarter = Array2::<C64>::eye(d).mapv(|v| v * 0.25);
        for a in [&x, &y, &z] {
            prop_assert!(max_abs_diff(&a.dot(a), &quarter) < 1e-14);
        }
        let i = C64::new(0.0, 1.0);
        prop_assert!(max_abs_diff(&commutator(&x, &y), &z.mapv(|v| v * i)) < 1e-14);
        prop_assert!(max_abs_diff(&commutator(&y, &z), &x.mapv(|v| v * i)) < 1e-14);
        prop_assert!(max_abs_diff(&commutator(&z, &x), &y.mapv(|v| v * i)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_embedded_operator(e in entries(8), a in entries(2), slot in 0usize..3) {
        // tr_slot[(A_slot) ρ] restricted to the kept slots equals the reduction weighted by A
        let layout = HilbertLayout::qubits(&["a", "b", "c"]).unwrap();
        let rho = DensityOperator::new(density(8, &e), layout.clone()).unwrap();
        let local = hermitian(2, &a);
        let keep: Vec<usize> = (0..3).filter(|&k| k != slot).collect();
        let full = embed(&local, slot, &layout).unwrap().into_matrix();
        // expectation is linear: tr(A_slot ρ) = tr(A ρ_slot)
        let lhs = rho.expectation(&full);
        let rho_slot = rho.partial_trace(&[slot]).unwrap();
        prop_assert!((lhs - rho_slot.expectation(&local)).abs() < 1e-12);
        // the reduced state keeps unit trace and physicality
        let reduced = rho.partial_trace(&keep).unwrap();
        prop_assert!(reduced.hygiene().unwrap().is_physical());
        // linearity: reduction of a mixture is the mixture of reductions
        let mixed = DensityOperator::maximally_mixed(layout.clone());
        let half = DensityOperator::new((rho.matrix() + mixed.matrix()).mapv(|v| v * 0.5), layout).unwrap();
        let lin = (reduced.matrix() + mixed.partial_trace(&keep).unwrap().matrix()).mapv(|v| v * 0.5);
        prop_assert!(max_abs_diff(half.partial_trace(&keep).unwrap().matrix(), &lin) < 1e-14);
    }

    #[test]
    fn choi_fidelity_ignores_global_phase(h in entries(4), g in entries(4), phase in 0.0f64..TWO_PI) {
        let u = unitary_from_hermitian(&hermitian(4, &h), 1.0).unwrap();
        let v = unitary_from_hermitian(&hermitian(4, &g), 0.3).unwrap();
        let channel = Superoperator::from_unitary(&u);
        let shifted = v.mapv(|x| x * C64::from_polar(1.0, phase));
        let f1 = choi_process_fidelity(&channel, &v).unwrap();
        let f2 = choi_process_fidelity(&channel, &shifted).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-12);
        prop_assert!((choi_process_fidelity(&channel, &u.mapv(|x| x * C64::from_polar(1.0, phase))).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn built_hamiltonians_are_hermitian(
        a1 in -20.0f64..20.0, a2 in -20.0f64..20.0, perp in 0.0f64..5.0,
        rf in 0.0f64..3.0, det in -2.0f64..2.0, t in 0.0f64..1e-4,
    ) {
        let mut n1 = NuclearSpinSpec::resonant("a", khz(4000.0), khz(a1), khz(rf));
        n1.a_perp = khz(perp);
        let n2 = NuclearSpinSpec::resonant("b", khz(5060.0), khz(a2), khz(rf)).with_rf_detuning(khz(det));
        let mut drive = DriveSpec::new(khz(400.0));
        drive.mw_detuning = khz(det);
        let reg = SpinRegister::new(vec![n1, n2], drive);
        prop_assert!(build_rwa_hamiltonian(&reg).unwrap().hermiticity_deviation() < 1e-12);
        let rf_frame = RfFrameHamiltonian::new(&reg).unwrap();
        let lab = LabHamiltonian::new(&reg, 1e-2).unwrap();
        for h in [rf_frame.at(t), lab.at(t)] {
            let scale = h.iter().map(|x| x.norm()).fold(1.0, f64::max);
            prop_assert!(nvgate::linalg::hermiticity_deviation(&h) <= 1e-12 * scale);
        }
    }

    #[test]
    fn undriven_rwa_conserves_nuclear_z(a in prop::collection::vec(-20.0f64..20.0, 1..4), det in -5.0f64..5.0) {
        let nuclei: Vec<NuclearSpinSpec> = a.iter().enumerate()
            .map(|(k, &x)| NuclearSpinSpec::undriven(&format!("n{k}"), khz(4000.0 + 100.0 * k as f64), khz(x)))
            .collect();
        let mut drive = DriveSpec::new(khz(400.0));
        drive.mw_detuning = khz(det);
        let reg = SpinRegister::new(nuclei, drive);
        let h = build_rwa_hamiltonian(&reg).unwrap();
        let scale = h.matrix().iter().map(|x| x.norm()).fold(0.0, f64::max);
        for k in 0..a.len() {
            let z = embed(&spin::sz(), k + 1, h.layout()).unwrap().into_matrix();
            prop_assert!(nvgate::linalg::max_abs(commutator(h.matrix(), &z).view()) <= 1e-14 * scale);
        }
    }

    #[test]
    fn sw_zz_blocks_are_antisymmetric(a1 in 1.0f64..20.0, a2 in 1.0f64..20.0, omega in 200.0f64..800.0) {
        let reg = SpinRegister::new(
            vec![NuclearSpinSpec::undriven("a", khz(4000.0), khz(a1)), NuclearSpinSpec::undriven("b", khz(5060.0), khz(a2))],
            DriveSpec::new(khz(omega)),
        );
        let (energies, v) = nvgate::effective::dressed_perturbation(&reg, 0.0).unwrap();
        let sw = sw_second_order(&energies, &v, 4).unwrap();
        let sum = &sw.blocks[0] + &sw.blocks[1];
        prop_assert!(nvgate::linalg::max_abs(sum.view()) <= 1e-15 * khz(a1 * a2 / omega));
        let g = khz(a1) * khz(a2) / (2.0 * khz(omega));
        let zz = nvgate::linalg::kron(&spin::sz(), &spin::sz()).mapv(|x| x * g);
        // the block also carries the constant (a1² + a2²)/(16Ω)
        let shift = nvgate::linalg::trace(&sw.blocks[0]) / 4.0;
        let traceless = &sw.blocks[0] - &Array2::<C64>::eye(4).mapv(|x| x * shift);
        prop_assert!(max_abs_diff(&traceless, &zz) <= 1e-12 * g);
    }

    #[test]
    fn effective_rates_fall_with_drive(a1 in 1.0f64..20.0, a2 in 1.0f64..20.0) {
        let dspec = DissipationSpec::new(200e-6, Some(20e-6));
        let mut last: Option<(f64, f64)> = None;
        for omega in [100.0, 200.0, 300.0, 400.0, 600.0, 800.0, 1200.0] {
            let reg = SpinRegister::new(
                vec![NuclearSpinSpec::resonant("a", khz(4000.0), khz(a1), khz(1.0)), NuclearSpinSpec::resonant("b", khz(5060.0), khz(a2), khz(1.0))],
                DriveSpec::new(khz(omega)),
            );
            let m = effective_nuclear_model(&reg, &dspec, JumpConvention::SpinHalf).unwrap();
            prop_assert!((m.g_e_prime - coupling_dissipative(khz(a1), khz(a2), khz(omega), dspec.gamma_r().unwrap())).abs() <= 1e-12 * m.g_e_prime);
            if let Some((g, gn)) = last {
                prop_assert!(m.g_e_prime < g);
                prop_assert!(m.gamma_n < gn);
            }
            last = Some((m.g_e_prime, m.gamma_n));
        }
    }

    #[test]
    fn purity_never_grows_under_electron_relaxation(e in entries(4), t1 in 50e-6f64..500e-6) {
        // the default two-sided relaxation is unital, so purity can only fall
        let layout = HilbertLayout::electron_with_nuclei(1);
        let dspec = DissipationSpec::new(t1, None);
        let jumps = electron_jumps(&dspec, nvgate::model::ElectronRate::Relaxation, &layout).unwrap();
        let gen = LindbladGenerator::new(Operator::zeros(&layout), jumps).unwrap();
        let rho0 = DensityOperator::new(density(4, &e), layout).unwrap();
        let s = propagate_static(&gen, &rho0, 3.0 * t1, t1 / 10.0).unwrap();
        let purities: Vec<f64> = s.states.iter().map(|r| r.purity()).collect();
        for w in purities.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", purities);
        }
    }

    #[test]
    fn random_lindbladians_give_cptp_propagators(h in entries(4), l in entries(4), rate in 0.0f64..5.0, t in 0.0f64..2.0) {
        let layout = HilbertLayout::qubits(&["a", "b"]).unwrap();
        let jump_op = Array2::from_shape_fn((4, 4), |(i, j)| C64::new(l[2 * (i * 4 + j)], l[2 * (i * 4 + j) + 1]));
        let gen = LindbladGenerator::new(
            Operator::new(hermitian(4, &h), layout).unwrap(),
            vec![nvgate::model::Jump::new("j", rate, &jump_op)],
        ).unwrap();
        let p = gen.propagator(t).unwrap();
        prop_assert!(p.superop.trace_preservation_deviation() < 1e-10);
        prop_assert!(p.superop.choi_min_eigenvalue().unwrap() > -1e-10);
    }

    #[test]
    fn quantities_convert_once(v in -1e4f64..1e4, unit in 0usize..4) {
        let (u, scale) = [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)][unit];
        let text = format!("{v} {u}");
        let got = parse_quantity(&text, Dimension::Frequency).unwrap();
        prop_assert_eq!(got, TWO_PI * (v * scale));
        let bare = v.to_string();
        prop_assert!(parse_quantity(&bare, Dimension::Frequency).is_err());
    }

    #[test]
    fn sw_spectrum_matches_exact_diagonalization(e in entries(8), omega in 1.0f64..10.0) {
        // H0 = diag(Ω/2, −Ω/2) ⊗ I4 with ‖V‖/Ω = 1e-3
        let v0 = hermitian(8, &e);
        let norm = hermitian_eigenvalues(&v0).unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let v = v0.mapv(|x| x * (1e-3 * omega / norm));
        let energies = [C64::new(0.5 * omega, 0.0), C64::new(-0.5 * omega, 0.0)];
        let sw = sw_second_order(&energies, &v, 4).unwrap();
        let mut h = v.clone();
        for k in 0..8 {
            h[[k, k]] += energies[k / 4];
        }
        let mut exact: Vec<f64> = hermitian_eigenvalues(&h).unwrap().to_vec();
        let mut approx: Vec<f64> = Vec::new();
        for (b, e0) in sw.blocks.iter().zip(energies) {
            approx.extend(hermitian_eigenvalues(b).unwrap().iter().map(|x| x + e0.re));
        }
        exact.sort_by(f64::total_cmp);
        approx.sort_by(f64::total_cmp);
        for (x, y) in exact.iter().zip(&approx) {
            prop_assert!((x - y).abs() / x.abs() < 1e-6, "{x} {y}");
        }
    }
}
