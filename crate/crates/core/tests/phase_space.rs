use cohlab::hyperbolic::{random_group_element, DiscPoint, GroupElement};
use cohlab::linalg::{self, c, CMat, RMat};
use cohlab::phase_space::{
    block_symplectic_residual, covariance, direct_sum, is_ill_conditioned, left_transport_residual,
    pure_state_residuals, s_map, symplectic_of, symplectic_residual, t_map, transport_residual,
};
use cohlab::stream::stream;
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

#[test]
fn block_maps_have_the_stated_layout() {
    let x = CMat::from_row_slice(1, 1, &[c(2.0, 3.0)]);
    assert_eq!(s_map(&x), RMat::from_row_slice(2, 2, &[2.0, -3.0, 3.0, 2.0]));
    assert_eq!(t_map(&x), RMat::from_row_slice(2, 2, &[2.0, 3.0, 3.0, -2.0]));
    assert_eq!(s_map(&linalg::identity(3)), RMat::identity(6, 6));
}

#[test]
fn hermitian_and_unitary_images() {
    let mut rng = stream(1, "phase-test", 0);
    for k in 1..=4 {
        let u = linalg::haar_unitary(&mut rng, k);
        assert!(block_symplectic_residual(&s_map(&u)) < 1e-12);
        // S(X) Ω S(X)ᵀ = S(XX†) Ω: a Hermitian X gives a symmetric S(X),
        // symplectic only when X² = 1
        let h = linalg::ginibre(&mut rng, k, k);
        let h = &h + h.adjoint();
        let sh = s_map(&h);
        assert!(linalg::max_abs_diff_real(&sh, &sh.transpose()) < 1e-15);
        assert!(block_symplectic_residual(&sh) > 1e-3);
        let reflection =
            &u * CMat::from_diagonal(&nalgebra::DVector::from_fn(k, |i, _| {
                c(if i == 0 { -1.0 } else { 1.0 }, 0.0)
            })) * u.adjoint();
        assert!(block_symplectic_residual(&s_map(&reflection)) < 1e-12);
    }
}

#[test]
fn vacuum_covariance_is_identity() {
    let g = covariance(&DiscPoint::zero(2, 3)).unwrap();
    assert_eq!(g, RMat::identity(10, 10));
}

#[test]
fn single_mode_pair_covariance() {
    // λ = 0.6: ν = 1.36/0.64 = 2.125, β = 1.2/0.64 = 1.875
    let g = covariance(&DiscPoint::diagonal(1, 1, &[0.6]).unwrap()).unwrap();
    let want = RMat::from_row_slice(
        4,
        4,
        &[
            2.125, 0.0, 1.875, 0.0, //
            0.0, 2.125, 0.0, -1.875, //
            1.875, 0.0, 2.125, 0.0, //
            0.0, -1.875, 0.0, 2.125,
        ],
    );
    assert!(linalg::max_abs_diff_real(&g, &want) < 1e-14);
    // mean photon number σ²/(1−σ²) gives the diagonal 1 + 2<n>
    let mean = 0.36 / 0.64;
    assert!((g[(0, 0)] - (1.0 + 2.0 * mean)).abs() < 1e-14);
}

#[test]
fn diagonal_points_give_padded_squeezed_blocks() {
    let sigma = [0.3, 0.8];
    let g = covariance(&DiscPoint::diagonal(2, 3, &sigma).unwrap()).unwrap();
    // order x1 x2 y1 y2 | x'1 x'2 x'3 y'1 y'2 y'3
    let (p, q) = (2, 3);
    for (i, s) in sigma.iter().enumerate() {
        let nu = (1.0 + s * s) / (1.0 - s * s);
        let beta = 2.0 * s / (1.0 - s * s);
        assert!((g[(i, i)] - nu).abs() < 1e-13);
        assert!((g[(p + i, p + i)] - nu).abs() < 1e-13);
        assert!((g[(2 * p + i, 2 * p + i)] - nu).abs() < 1e-13);
        assert!((g[(2 * p + q + i, 2 * p + q + i)] - nu).abs() < 1e-13);
        assert!((g[(i, 2 * p + i)] - beta).abs() < 1e-13);
        assert!((g[(p + i, 2 * p + q + i)] + beta).abs() < 1e-13);
    }
    assert!((g[(2 * p + 2, 2 * p + 2)] - 1.0).abs() < 1e-15);
    assert!((g[(2 * p + q + 2, 2 * p + q + 2)] - 1.0).abs() < 1e-15);
}

#[test]
fn identity_maps_to_identity() {
    assert_eq!(
        symplectic_of(&GroupElement::identity(2, 2)).unwrap(),
        RMat::identity(8, 8)
    );
}

#[test]
fn invalid_element_is_rejected() {
    let mut m = GroupElement::identity(1, 1).to_matrix();
    m[(0, 1)] = c(1.0, 0.0);
    let g = GroupElement::from_matrix(&m, 1, 1).unwrap();
    assert!(symplectic_of(&g).is_err());
}

#[test]
fn unitary_subgroup_maps_to_direct_sum() {
    let mut rng = stream(2, "phase-test", 1);
    let u = linalg::haar_special_unitary(&mut rng, 2);
    let v = linalg::haar_special_unitary(&mut rng, 3);
    let g = GroupElement::g_uv(&u, &v).unwrap();
    let want = direct_sum(&s_map(&linalg::conj(&u)), &s_map(&v));
    assert!(linalg::max_abs_diff_real(&symplectic_of(&g).unwrap(), &want) < 1e-14);
}

#[test]
fn transport_on_many_pairs() {
    let mut rng = stream(3, "phase-test", 2);
    for i in 0..100 {
        let (p, q) = (1 + i % 3, 1 + (i / 3) % 3);
        let g = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let l = DiscPoint::random(&mut rng, p, q, 0.8);
        assert!(transport_residual(&g, &l).unwrap() < 1e-9);
        assert!(left_transport_residual(&g, &l).unwrap() < 1e-9);
    }
}

#[test]
fn boundary_points_are_flagged() {
    assert!(is_ill_conditioned(&DiscPoint::diagonal(1, 1, &[1.0 - 1e-7]).unwrap()));
    assert!(!is_ill_conditioned(&DiscPoint::diagonal(1, 1, &[0.9]).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homomorphism((p, q) in shapes(), seed in any::<u64>()) {
        let mut rng = stream(seed, "phase-prop", 0);
        let g1 = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let g2 = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let (s1, s2) = (symplectic_of(&g1).unwrap(), symplectic_of(&g2).unwrap());
        let s12 = symplectic_of(&g1.mul(&g2).unwrap()).unwrap();
        let scale = linalg::spectral_norm_real(&s1) * linalg::spectral_norm_real(&s2);
        prop_assert!(linalg::spectral_norm_real(&(s12 - &s1 * &s2)) <= 1e-10 * scale);
    }

    #[test]
    fn images_are_symplectic((p, q) in shapes(), seed in any::<u64>(), squeeze in 0.0f64..2.0) {
        let g = random_group_element(&mut stream(seed, "phase-prop", 1), p, q, squeeze).unwrap();
        let s = symplectic_of(&g).unwrap();
        prop_assert!(symplectic_residual(&s, p, q) <= 1e-10 * linalg::spectral_norm_real(&s).powi(2));
    }

    #[test]
    fn covariances_are_pure((p, q) in shapes(), seed in any::<u64>()) {
        let l = DiscPoint::random(&mut stream(seed, "phase-prop", 2), p, q, 0.9);
        let g = covariance(&l).unwrap();
        let (omega_res, det_res) = pure_state_residuals(&g, p, q);
        let scale = linalg::spectral_norm_real(&g).powi(2);
        prop_assert!(omega_res <= 1e-10 * scale);
        prop_assert!(det_res <= 1e-9 * scale);
        prop_assert!(linalg::max_abs_diff_real(&g, &g.transpose()) < 1e-12 * scale);
        prop_assert!(g.clone().symmetric_eigenvalues().iter().all(|&e| e > 0.0));
    }

    #[test]
    fn transport_holds((p, q) in shapes(), seed in any::<u64>()) {
        let mut rng = stream(seed, "phase-prop", 3);
        let g = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let l = DiscPoint::random(&mut rng, p, q, 0.8);
        prop_assert!(transport_residual(&g, &l).unwrap() < 1e-9);
        prop_assert!(left_transport_residual(&g, &l).unwrap() < 1e-9);
    }
}
