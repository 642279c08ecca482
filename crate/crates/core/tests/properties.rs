use std::f64::consts::PI;

use proptest::prelude::*;
use qpe_core::linalg::{diagonalize, unitarity_defect, CMatrix};
use qpe_core::planner::{
    accuracy_window, min_phase_qubits, reconstruct_energy, shot_budget, TrotterBudget, CHEMICAL_ACCURACY,
};
use qpe_core::spectral::{
    f_kernel_sq, phase_distribution, phase_of_energy, post_measurement, window_lower_bound, window_probability,
    PhaseTable,
};
use qpe_core::state::{InitialState, StateSource};
use qpe_core::trotter::{trotter_step, TrotterSpec};
use qpe_core::{LcuHamiltonian, PauliOp, PauliString, C64};

fn normalized(raw: Vec<(f64, f64)>) -> Vec<C64> {
    let v: Vec<C64> = raw.into_iter().map(|(re, im)| C64::new(re, im)).collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / norm).collect()
}

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(normalized)
}

fn table_strategy() -> impl Strategy<Value = PhaseTable> {
    (1usize..6).prop_flat_map(|k| {
        (prop::collection::vec(0.0..1.0f64, k), amplitudes(k), 1u32..11).prop_map(|(thetas, c, n)| {
            PhaseTable::from_phases(thetas, c, 1.0, n).unwrap()
        })
    })
}

fn pauli(s: &str) -> PauliString {
    PauliString::new(s.chars().map(|c| PauliOp::from_char(c).unwrap()).collect()).unwrap()
}

fn hamiltonian_strategy(n_qubits: usize) -> impl Strategy<Value = LcuHamiltonian> {
    let letters = prop::sample::select(vec!['I', 'X', 'Y', 'Z']);
    let string = prop::collection::vec(letters, n_qubits).prop_map(|v| v.into_iter().collect::<String>());
    prop::collection::vec((-1.0..1.0f64, string), 1..6).prop_map(|terms| {
        LcuHamiltonian::from_terms(terms.into_iter().map(|(c, s)| (c, pauli(&s)))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kernel_sums_to_one(delta in 0.0..1.0f64, n in 1u32..12) {
        let m = 1u64 << n;
        let total: f64 = (0..m).map(|l| f_kernel_sq(delta - l as f64 / m as f64, n)).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn nearest_bin_carries_at_least_four_over_pi_squared(theta in 0.0..1.0f64, n in 1u32..16) {
        let table = PhaseTable::from_phases(vec![theta], vec![C64::new(1.0, 0.0)], 1.0, n).unwrap();
        let (l, kappa, _) = table.nearest_bin(0);
        prop_assert!(table.probability(l) >= 4.0 / (PI * PI) - 1e-12);
        prop_assert!((0.0..=1.0).contains(&kappa));
        // the nearest bin is within half a bin of θ on the circle
        let m = table.bins() as f64;
        let d = theta * m - l as f64;
        let wrapped = d - (d / m).round() * m;
        prop_assert!(wrapped.abs() <= 0.5 + 1e-9);
    }

    #[test]
    fn distribution_is_normalized(table in table_strategy()) {
        let dist = phase_distribution(&table).unwrap();
        prop_assert!((dist.total() - 1.0).abs() < 1e-10);
        prop_assert!(dist.probs.iter().all(|&p| p >= 0.0));
        prop_assert!(dist.delta_gap >= 0.0);
    }

    #[test]
    fn single_state_window_beats_bound(theta in 0.0..1.0f64, n in 3u32..12, a in 1u32..4) {
        let table = PhaseTable::from_phases(vec![theta], vec![C64::new(1.0, 0.0)], 1.0, n).unwrap();
        let dist = phase_distribution(&table).unwrap();
        let (l0, _, _) = table.nearest_bin(0);
        let e = accuracy_window(a);
        let w = window_probability(&dist, l0, e);
        prop_assert!(w.probability >= window_lower_bound(e) - 1e-9);
    }

    #[test]
    fn post_measurement_state_is_normalized(table in table_strategy()) {
        let dist = phase_distribution(&table).unwrap();
        let post = post_measurement(&table, dist.l_star).unwrap();
        let norm: f64 = post.coefficients.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        prop_assert!((post.probability - dist.probs[dist.l_star as usize]).abs() < 1e-12);
    }

    #[test]
    fn min_phase_qubits_is_tight(t in 1e-3..50.0f64, eps in 1e-5..1e-1f64) {
        let n = min_phase_qubits(t, eps).unwrap();
        prop_assert!(n >= 1);
        prop_assert!(1.0 / (2f64.powi(n as i32 + 1) * t) <= eps * (1.0 + 1e-12));
        if n > 1 {
            prop_assert!(1.0 / (2f64.powi(n as i32) * t) > eps);
        }
    }

    #[test]
    fn shot_budget_grows_as_gap_shrinks(eps in 1e-4..0.5f64, d1 in 0.01..1.0f64, d2 in 0.01..1.0f64) {
        let (small, large) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let m_small = shot_budget(eps, small).unwrap();
        let m_large = shot_budget(eps, large).unwrap();
        prop_assert!(m_small >= m_large);
        prop_assert!((-(m_large as f64) * large * large / 2.0).exp() <= eps * (1.0 + 1e-9));
    }

    #[test]
    fn reconstruction_within_half_bin(e0 in -5.0..-0.01f64, t in 0.01..5.0f64, extra in 0u32..4) {
        let n = min_phase_qubits(t, CHEMICAL_ACCURACY).unwrap() + extra;
        let theta = phase_of_energy(e0, t);
        let table = PhaseTable::from_phases(vec![theta], vec![C64::new(1.0, 0.0)], t, n).unwrap();
        let (l0, _, _) = table.nearest_bin(0);
        // a phase within half a bin of 1 reads as l = 0, one period up
        let wrapped = l0 == 0 && theta > 0.5;
        let ceil = (e0 * t).ceil() as i64 - wrapped as i64;
        let err = (reconstruct_energy(l0, n, t, ceil) - e0).abs();
        prop_assert!(err <= 1.0 / (2f64.powi(n as i32 + 1) * t) + 1e-12);
    }

    #[test]
    fn budget_sum_tracks_approximation(script in 1e3..1e6f64, n_min in 6u32..16, a in 0u32..4) {
        let b = TrotterBudget::from_scaled_constant(1, script, n_min, a).unwrap();
        let rel = (b.n_min_tot as f64 - b.n_min_tot_approx as f64).abs() / b.n_min_tot_approx as f64;
        prop_assert!(rel < 0.02, "relative gap {rel}");
        prop_assert_eq!(b.n_min_per_q.len() as u32, n_min + a);
    }

    #[test]
    fn trotter_products_are_unitary(h in hamiltonian_strategy(2), order in 1u32..3, steps in 1u64..20, q in 0u32..3) {
        let spec = TrotterSpec::new(&h, order, steps, q, 0.3).unwrap();
        let s = trotter_step(&h, &spec).unwrap();
        prop_assert!(unitarity_defect(&s) < 1e-10);
    }

    #[test]
    fn commuting_terms_trotterize_exactly(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, order in 1u32..3) {
        let h = LcuHamiltonian::from_terms([(a, pauli("ZI")), (b, pauli("IZ")), (c, pauli("ZZ"))]).unwrap();
        let spectrum = diagonalize(&h.dense_matrix().unwrap()).unwrap();
        let spec = TrotterSpec::new(&h, order, 1, 1, 0.7).unwrap();
        let s = trotter_step(&h, &spec).unwrap();
        let u = qpe_core::trotter::exact_unitary(&spectrum, 0.7, 1);
        let diff: CMatrix = u - s;
        prop_assert!(diff.iter().all(|z| z.norm() < 1e-10));
    }
}

#[test]
fn initial_state_round_trips_through_eigenbasis() {
    let h = LcuHamiltonian::parse("0.3 XZ\n-0.7 ZI\n0.2 YY").unwrap();
    let spectrum = diagonalize(&h.dense_matrix().unwrap()).unwrap();
    let init = InitialState {
        overlaps: normalized(vec![(0.5, 0.1), (0.2, -0.3), (0.0, 0.4), (0.6, 0.0)]),
        source: StateSource::EigenbasisAmplitudes,
    };
    let psi = init.computational_vector(&spectrum);
    let back = spectrum.eigenvectors.adjoint() * psi;
    for (a, b) in back.iter().zip(&init.overlaps) {
        assert!((a - b).norm() < 1e-12);
    }
}
