mod common;

use common::max_abs_diff;
use hbts::channels::{choi_check, Channel, TreeChannels};
use hbts::correlators::ThermoCorrelator;
use hbts::io;
use hbts::linalg;
use hbts::parent_ham::{self, InteractionLength, KernelWeights, TAU_GS};
use hbts::tensor_core::{numerical_rank_matrix, partial_trace, random, random_isometry, TAU_RANK};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

fn keep_sets(nu: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << nu) {
        let set: Vec<usize> = (0..nu).filter(|s| mask & (1 << s) != 0).collect();
        out.push(set.clone());
        let mut rev = set;
        rev.reverse();
        out.push(rev);
    }
    out
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn partial_trace_keeps_trace_and_positivity(seed in any::<u64>(), d in 2usize..4, nu in 1usize..4) {
        let rho = random::density(d, nu, seed);
        for keep in keep_sets(nu) {
            let r = partial_trace(&rho, &keep).unwrap();
            prop_assert!((r.matrix().trace() - linalg::ONE).norm() < 1e-12);
            prop_assert!(linalg::eigvalsh(r.matrix())[0] > -1e-12);
            let oracle = common::partial_trace(rho.matrix(), d, nu, &keep);
            prop_assert!(max_abs_diff(r.matrix(), &oracle) < 1e-13);
        }
    }

    #[test]
    fn rank_is_unitarily_invariant(seed in any::<u64>(), rank in 1usize..9) {
        let rho = random::density_of_rank(2, 3, rank, seed).into_matrix();
        let u = random::unitary(8, seed ^ 0x5555);
        let rotated = &u * &rho * u.adjoint();
        prop_assert_eq!(numerical_rank_matrix(&rho, TAU_RANK).unwrap(), rank);
        prop_assert_eq!(numerical_rank_matrix(&rotated, TAU_RANK).unwrap(), rank);
    }

    #[test]
    fn growth_preserves_rank(seed in any::<u64>(), d in 2usize..4) {
        let lam = random_isometry(d, seed).unwrap();
        let s = TreeChannels::new(&lam).unwrap().growth;
        for rank in 1..=d {
            let rho = random::density_of_rank(d, 1, rank, seed.wrapping_add(rank as u64)).into_matrix();
            let grown = s.apply(&rho).unwrap();
            prop_assert_eq!(numerical_rank_matrix(&grown, TAU_RANK).unwrap(), rank);
        }
    }

    #[test]
    fn adjoint_is_the_hilbert_schmidt_dual(seed in any::<u64>(), d in 2usize..4) {
        let lam = random_isometry(d, seed).unwrap();
        let ch = TreeChannels::new(&lam).unwrap();
        let maps: Vec<Channel> = vec![
            ch.growth.clone(),
            ch.descend.mean.clone(),
            ch.slashed.clone(),
            ch.extension3().unwrap(),
        ];
        for (k, m) in maps.iter().enumerate() {
            let a = random::gaussian(m.dim_out(), m.dim_out(), seed ^ k as u64);
            let b = random::gaussian(m.dim_in(), m.dim_in(), seed.rotate_left(7) ^ k as u64);
            let lhs = linalg::hs_inner(&a, &m.apply(&b).unwrap());
            let rhs = linalg::hs_inner(&m.adjoint().apply(&a).unwrap(), &b);
            prop_assert!((lhs - rhs).norm() < 1e-11 * (1.0 + lhs.norm()));
            prop_assert!(m.adjoint().unitality_residual() < 1e-12);
        }
    }

    #[test]
    fn composition_and_tensor_products_are_consistent(seed in any::<u64>()) {
        let lam = random_isometry(2, seed).unwrap();
        let ch = TreeChannels::new(&lam).unwrap();
        let (s, dl, dr) = (&ch.growth, &ch.descend.left, &ch.descend.right);
        let left = dl.compose(dr).unwrap().compose(dl).unwrap();
        let right = dl.compose(&dr.compose(dl).unwrap()).unwrap();
        prop_assert!(max_abs_diff(left.matrix(), right.matrix()) < 1e-13);
        let x = random::gaussian(2, 2, seed ^ 1);
        let y = random::gaussian(2, 2, seed ^ 2);
        let st = s.tensor(dl).unwrap();
        let direct = st.apply(&linalg::kron(&x, &y)).unwrap();
        let split = linalg::kron(&s.apply(&x).unwrap(), &dl.apply(&y).unwrap());
        prop_assert!(max_abs_diff(&direct, &split) < 1e-13);
        let mixed = s.add(&s.scaled(2.0)).unwrap();
        prop_assert!(max_abs_diff(mixed.matrix(), &s.matrix().scale(3.0)) < 1e-14);
        let ab = ch.cross.compose(&ch.slashed).unwrap();
        let mut z = random::gaussian(4, 4, seed ^ 3);
        let lhs = ab.apply(&z).unwrap();
        z = ch.cross.apply(&ch.slashed.apply(&z).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&lhs, &z) < 1e-13);
    }

    #[test]
    fn tree_channels_are_cptp(seed in any::<u64>()) {
        let lam = random_isometry(2, seed).unwrap();
        let ch = TreeChannels::new(&lam).unwrap();
        for m in [&ch.growth, &ch.descend.left, &ch.descend.mean, &ch.slashed, &ch.cross] {
            let r = choi_check(m, 1e-10);
            prop_assert!(r.completely_positive && r.trace_preserving, "{r:?}");
        }
        let e4 = ch.extension(4).unwrap();
        let r = choi_check(&e4, 1e-10);
        prop_assert!(r.completely_positive && r.trace_preserving);
    }

    #[test]
    fn heisenberg_and_schrodinger_correlators_agree(seed in any::<u64>(), m in 0u32..12) {
        let lam = random_isometry(2, seed).unwrap();
        let tc = ThermoCorrelator::new(&lam).unwrap();
        let x = random::hermitian(4, seed ^ 77);
        let s = tc.operator_value(&x, m).unwrap();
        let h = tc.operator_value_heisenberg(&x, m).unwrap();
        prop_assert!((s - h).norm() < 1e-12);
        prop_assert!(tc.connected_state().trace().norm() < 1e-12);
    }

    #[test]
    fn isometry_files_round_trip(seed in any::<u64>(), d in 2usize..5) {
        let lam = random_isometry(d, seed).unwrap();
        let text = io::to_json_string(&io::isometry_json(&lam)).unwrap();
        let back = io::parse_isometry(&text).unwrap();
        prop_assert_eq!(back.matrix(), lam.matrix());
        prop_assert_eq!(io::to_json_string(&io::isometry_json(&back)).unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn common_weight_scaling_keeps_the_ground_space(scale in 0.01f64..100.0, seed in 0u64..1000) {
        let lam = random_isometry(2, seed).unwrap();
        let base = parent_ham::build_interaction(&lam, &KernelWeights::Uniform, InteractionLength::Auto).unwrap();
        let k = base.kernel_dim();
        let scaled = parent_ham::build_interaction(&lam, &KernelWeights::Explicit(vec![scale; k]), InteractionLength::Auto).unwrap();
        let a = parent_ham::diagonalize_parent(&base, 6, TAU_GS).unwrap();
        let b = parent_ham::diagonalize_parent(&scaled, 6, TAU_GS).unwrap();
        prop_assert_eq!(a.degeneracy, b.degeneracy);
        prop_assert!(a.ground_energy.abs() < 1e-10 && b.ground_energy.abs() < 1e-10 * scale.max(1.0));
        prop_assert!(a.degeneracy >= 8);
    }

    #[test]
    fn parent_terms_are_psd_and_annihilate(seed in any::<u64>(), d in 2usize..4) {
        let lam = random_isometry(d, seed).unwrap();
        let hs = parent_ham::build_interaction(&lam, &KernelWeights::Uniform, InteractionLength::Auto).unwrap();
        prop_assert!(linalg::eigvalsh(&hs.h_term)[0] > -1e-12);
        prop_assert!(hs.annihilation_residual <= 1e-10);
        let expected_nu = if d == 2 { 4 } else { 3 };
        prop_assert_eq!(hs.nu, expected_nu);
        let p = &hs.h_term * &hs.h_term;
        prop_assert!(max_abs_diff(&p, &hs.h_term) < 1e-10);
    }
}
