use j1j2::frustration::{frustration_from_correlator, frustration_lower_bound, frustration_measure};
use j1j2::measures::{gmqd_general, quantum_discord, DiscordOptions};
use j1j2::rdm::{bloch_form, correlators};
use j1j2::sweep::{run_sweep, SweepConfig};
use j1j2::{assemble_low_spectrum, two_site_rdm, ChainSpec, Execution, SolverConfig, TwoSiteRdm};
use nalgebra::Matrix4;
use num_complex::Complex64;
use proptest::prelude::*;

fn random_rdm(re: &[f64], im: &[f64]) -> TwoSiteRdm {
    // rho = A A^dagger / Tr
    let a = Matrix4::from_fn(|i, j| Complex64::new(re[4 * i + j], im[4 * i + j]));
    let m = a * a.adjoint();
    let tr = m.trace().re;
    TwoSiteRdm::new(m / Complex64::new(tr, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn eigen_mixture_rdms_are_su2_symmetric(n in prop::sample::select(vec![4usize, 6, 8]), j2 in 0.0f64..1.0) {
        let spec = ChainSpec::new(n, j2).unwrap();
        let s = assemble_low_spectrum(&spec, 2, &SolverConfig::default()).unwrap();
        for level in &s.levels {
            let first = correlators(&two_site_rdm(level, (0, 1)).unwrap());
            for i in 0..n {
                let rdm = two_site_rdm(level, (i, (i + 1) % n)).unwrap();
                let c = correlators(&rdm);
                prop_assert!(c.max_anisotropy() < 1e-9);
                prop_assert!((c.component - first.component).abs() < 1e-9);
                let dg = gmqd_general(&bloch_form(&rdm));
                prop_assert!((-1e-12..=0.5 + 1e-12).contains(&dg));
                let f = frustration_measure(&rdm).unwrap();
                prop_assert!((f - frustration_from_correlator(c.component)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bound_and_discord_on_random_states(re in prop::collection::vec(-1.0f64..1.0, 16), im in prop::collection::vec(-1.0f64..1.0, 16)) {
        let rdm = random_rdm(&re, &im);
        let f = frustration_measure(&rdm).unwrap();
        prop_assert!(frustration_lower_bound(&rdm, 1).unwrap() <= f + 1e-12);
        let opts = DiscordOptions { theta_points: 16, phi_points: 32, ..DiscordOptions::default() };
        let d = j1j2::measures::quantum_discord_with(&rdm, &opts).unwrap();
        prop_assert!(d.discord >= -1e-9);
        prop_assert!(d.classical_correlation <= d.mutual_information + 1e-12);
    }
}

#[test]
fn bell_state_discord() {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let bell = TwoSiteRdm::from_pure([z, s, -s, z]).unwrap();
    assert!((quantum_discord(&bell).unwrap().discord - 1.0).abs() < 1e-9);
}

#[test]
fn sweep_is_schedule_independent() {
    let spec = ChainSpec::new(8, 0.0).unwrap();
    let base = SweepConfig {
        steps: 15,
        discord: false,
        ..SweepConfig::default()
    };
    let seq = SweepConfig {
        solver: SolverConfig {
            execution: Execution::Sequential,
            ..SolverConfig::default()
        },
        ..base
    };
    let a = run_sweep(&spec, &base).unwrap();
    let b = run_sweep(&spec, &seq).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        for (la, lb) in ra.levels.iter().zip(&rb.levels) {
            assert_eq!(la.energy.to_bits(), lb.energy.to_bits());
            assert_eq!(la.dg_nn.to_bits(), lb.dg_nn.to_bits());
            assert_eq!(la.f_nnn.to_bits(), lb.f_nnn.to_bits());
        }
    }
}

#[test]
fn sweep_rejects_single_step() {
    let spec = ChainSpec::new(4, 0.0).unwrap();
    let cfg = SweepConfig {
        steps: 1,
        ..SweepConfig::default()
    };
    assert!(run_sweep(&spec, &cfg).unwrap_err().is_argument());
}
