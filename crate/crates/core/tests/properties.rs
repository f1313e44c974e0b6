use num_complex::Complex64;
use proptest::prelude::*;

use wpdj::oracle::{encode_phases, enumerate_all};
use wpdj::readout::{calibrate_phi0, classify, compute_threshold};
use wpdj::dynamics::perturbative_excite;
use wpdj::signal::ionization_signal;
use wpdj::{CouplingSet, Execution, ProbeModel};

fn energies(n: usize, spacing: f64) -> Vec<f64> {
    (0..n).map(|k| 12000.0 + spacing * k as f64 + 0.37 * (k * k) as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // any strictly positive amplitudes separate constant from balanced
    #[test]
    fn positive_amplitudes_always_classify(
        half in 1usize..4,
        amps in prop::collection::vec(0.05f64..2.0, 8),
        probe in prop::collection::vec(0.1f64..1.5, 8),
        spacing in 5.0f64..40.0,
        tau in 1.0f64..9.0,
    ) {
        let n = 2 * half;
        let e = energies(n, spacing);
        let couplings = CouplingSet::new(vec![1.0; n], amps[..n].iter().map(|&a| Complex64::new(a, 0.0)).collect()).unwrap();
        let probe = ProbeModel::new(probe[..n].to_vec(), 0.3, 5000.0).unwrap();
        let phi0 = calibrate_phi0(&e, tau, n - 1).unwrap();
        let cal = compute_threshold(phi0.clone(), tau, &e, &couplings, &probe, Execution::Sequential).unwrap();
        prop_assert!(cal.margin() > 0.0);
        for f in enumerate_all(n).unwrap() {
            let wp = perturbative_excite(&couplings, &encode_phases(&f, &phi0).unwrap()).unwrap();
            let s = ionization_signal(&wp, &probe, &e, tau);
            prop_assert_eq!(classify(s, &cal), f.character().unwrap());
        }
    }

    // f and its complement differ by a global phase only
    #[test]
    fn complement_gives_same_signal(
        bits in 0u32..256,
        amps in prop::collection::vec(0.0f64..2.0, 8),
        phases in prop::collection::vec(0.0f64..360.0, 8),
        tau in 0.0f64..10.0,
    ) {
        prop_assume!(amps.iter().any(|&a| a > 0.0));
        let f = wpdj::BooleanFunction::from_values(&(0..8).map(|k| bits >> (7 - k) & 1 == 1).collect::<Vec<_>>()).unwrap();
        let e = energies(8, 30.0);
        let couplings = CouplingSet::new(vec![1.0; 8], amps.iter().map(|&a| Complex64::new(a, 0.0)).collect()).unwrap();
        let probe = ProbeModel::uniform(8, 1.0, 50.0).unwrap();
        let base = wpdj::PhaseSet::new(phases).unwrap();
        let s = |g: &wpdj::BooleanFunction| {
            let wp = perturbative_excite(&couplings, &encode_phases(g, &base).unwrap()).unwrap();
            ionization_signal(&wp, &probe, &e, tau)
        };
        let (a, b) = (s(&f), s(&f.complement()));
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
    }

    // the threshold search does not depend on how it is scheduled
    #[test]
    fn threshold_is_execution_independent(amps in prop::collection::vec(0.1f64..2.0, 8)) {
        let e = energies(8, 30.0);
        let couplings = CouplingSet::new(vec![1.0; 8], amps.iter().map(|&a| Complex64::new(a, 0.0)).collect()).unwrap();
        let probe = ProbeModel::uniform(8, 1.0, 5000.0).unwrap();
        let phi0 = calibrate_phi0(&e, 5.0, 7).unwrap();
        let a = compute_threshold(phi0.clone(), 5.0, &e, &couplings, &probe, Execution::Sequential).unwrap();
        let b = compute_threshold(phi0, 5.0, &e, &couplings, &probe, Execution::default()).unwrap();
        prop_assert_eq!(a.threshold, b.threshold);
        prop_assert_eq!(a.worst_case_functions, b.worst_case_functions);
    }
}
