use cohlab::hyperbolic::{
    left_act, mobius_act, normalization_constant, random_group_element, sample_invariant, validate_group_element,
    DiscPoint, GroupElement, InvariantMeasureSpec,
};
use cohlab::linalg::{self, c, CMat};
use cohlab::stream::stream;
use proptest::prelude::*;

fn shapes() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3)
}

fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    linalg::max_abs_diff(a, b) / (1.0 + linalg::spectral_norm(b))
}

#[test]
fn identity_validates() {
    let g = GroupElement::identity(2, 3);
    assert!(validate_group_element(&g, 1e-12).unwrap());
}

#[test]
fn scaled_identity_fails_validation() {
    let mut m = GroupElement::identity(2, 2).to_matrix();
    for i in 0..2 {
        m[(i, i)] *= c(2.0, 0.0);
    }
    let g = GroupElement::from_matrix(&m, 2, 2).unwrap();
    assert!(!validate_group_element(&g, 1e-12).unwrap());
}

#[test]
fn unitary_pair_acts_by_conjugation() {
    let mut rng = stream(3, "hyperbolic-test", 0);
    let u = linalg::haar_special_unitary(&mut rng, 2);
    let v = linalg::haar_special_unitary(&mut rng, 3);
    let g = GroupElement::g_uv(&u, &v).unwrap();
    assert!(validate_group_element(&g, 1e-10).unwrap());
    let l = DiscPoint::random(&mut rng, 2, 3, 0.7);
    let got = mobius_act(&g, &l).unwrap();
    let want = u.adjoint() * l.matrix() * &v;
    assert!(linalg::max_abs_diff(got.matrix(), &want) < 1e-12);
}

#[test]
fn zero_squeeze_gives_block_diagonal_element() {
    let mut rng = stream(5, "hyperbolic-test", 0);
    let g = random_group_element(&mut rng, 2, 2, 0.0).unwrap();
    let m = g.to_matrix();
    let off = m
        .view((0, 2), (2, 2))
        .iter()
        .chain(m.view((2, 0), (2, 2)).iter())
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(off < 1e-12);
}

#[test]
fn fixed_seed_reproduces_element() {
    let a = random_group_element(&mut stream(11, "hyperbolic-test", 4), 2, 3, 1.5).unwrap();
    let b = random_group_element(&mut stream(11, "hyperbolic-test", 4), 2, 3, 1.5).unwrap();
    assert_eq!(a.to_matrix(), b.to_matrix());
}

#[test]
fn negative_squeeze_is_rejected() {
    assert!(random_group_element(&mut stream(0, "hyperbolic-test", 0), 1, 1, -1.0).is_err());
}

#[test]
fn density_at_origin_is_c3() {
    let spec = InvariantMeasureSpec::new(1, 1, 3).unwrap();
    let at0 = spec.density(&DiscPoint::zero(1, 1));
    assert!((at0 - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
}

#[test]
fn measure_rejects_small_n() {
    assert!(InvariantMeasureSpec::new(2, 2, 3).is_err());
    assert!(normalization_constant(1, 2, 2).is_err());
}

#[test]
fn sampler_reproduces_vacuum_norm() {
    // E[w · |<0|Λ,n>|²] = ∫ det(1 − ΛΛ†)^n dμ = <0|0> = 1
    for (p, q, n) in [(1, 1, 3), (1, 2, 3), (2, 2, 5)] {
        let spec = InvariantMeasureSpec::new(p, q, n).unwrap();
        let mut rng = stream(1, "hyperbolic-vacuum", (p * 10 + q) as u64);
        let samples = 200_000;
        let vals: Vec<f64> = (0..samples)
            .map(|_| {
                let s = sample_invariant(&mut rng, &spec);
                s.lambda.map_or(0.0, |l| s.weight * l.defect().powi(n as i32))
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / samples as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        assert!(
            (mean - 1.0).abs() <= 3.0 * se + 1e-12,
            "p={p} q={q} n={n}: {mean} ± {se}"
        );
    }
}

fn bump(l: &DiscPoint) -> f64 {
    let r2 = l.matrix().iter().map(|z| z.norm_sqr()).sum::<f64>() / 0.25;
    if r2 < 1.0 {
        (1.0 - r2).powi(2)
    } else {
        0.0
    }
}

fn mc_mean(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn measure_is_invariant_in_weak_form() {
    for (p, q) in [(1, 1), (1, 2), (2, 2)] {
        let spec = InvariantMeasureSpec::new(p, q, p + q).unwrap();
        let g = random_group_element(&mut stream(2, "hyperbolic-invariance", 0), p, q, 0.4).unwrap();
        let samples = 400_000;
        let mut r1 = stream(2, "hyperbolic-invariance", 1);
        let mut r2 = stream(2, "hyperbolic-invariance", 2);
        let plain: Vec<f64> = (0..samples)
            .map(|_| {
                let s = sample_invariant(&mut r1, &spec);
                s.lambda.map_or(0.0, |l| s.weight * bump(&l))
            })
            .collect();
        let moved: Vec<f64> = (0..samples)
            .map(|_| {
                let s = sample_invariant(&mut r2, &spec);
                s.lambda.map_or(0.0, |l| s.weight * bump(&mobius_act(&g, &l).unwrap()))
            })
            .collect();
        let (a, sa) = mc_mean(&plain);
        let (b, sb) = mc_mean(&moved);
        assert!(
            (a - b).abs() <= 3.0 * (sa * sa + sb * sb).sqrt(),
            "p={p} q={q}: {a} ± {sa} vs {b} ± {sb}"
        );
    }
}

#[test]
fn action_stays_in_domain_on_many_pairs() {
    let mut rng = stream(9, "hyperbolic-membership", 0);
    for i in 0..1000 {
        let (p, q) = (1 + i % 3, 1 + (i / 3) % 3);
        let g = random_group_element(&mut rng, p, q, 2.0).unwrap();
        let l = DiscPoint::random(&mut rng, p, q, 0.95);
        let out = mobius_act(&g, &l).unwrap();
        assert!(out.spectral_norm() < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_elements_validate((p, q) in shapes(), seed in any::<u64>(), squeeze in 0.0f64..3.0) {
        let g = random_group_element(&mut stream(seed, "prop", 0), p, q, squeeze).unwrap();
        prop_assert!(validate_group_element(&g, 1e-10).unwrap());
    }

    #[test]
    fn action_composes((p, q) in shapes(), seed in any::<u64>()) {
        let mut rng = stream(seed, "prop", 1);
        let g1 = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let g2 = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let l = DiscPoint::random(&mut rng, p, q, 0.8);
        let g12 = g1.mul(&g2).unwrap();
        // right action: Λ_{g1 g2} = (Λ_{g1})_{g2}
        let right = mobius_act(&g12, &l).unwrap();
        let right2 = mobius_act(&g2, &mobius_act(&g1, &l).unwrap()).unwrap();
        prop_assert!(rel_diff(right.matrix(), right2.matrix()) < 1e-10);
        let left = left_act(&g12, &l).unwrap();
        let left2 = left_act(&g1, &left_act(&g2, &l).unwrap()).unwrap();
        prop_assert!(rel_diff(left.matrix(), left2.matrix()) < 1e-10);
    }

    #[test]
    fn identity_acts_trivially((p, q) in shapes(), seed in any::<u64>()) {
        let l = DiscPoint::random(&mut stream(seed, "prop", 2), p, q, 0.9);
        let out = mobius_act(&GroupElement::identity(p, q), &l).unwrap();
        prop_assert!(linalg::max_abs_diff(out.matrix(), l.matrix()) < 1e-14);
    }

    #[test]
    fn inverse_undoes_action((p, q) in shapes(), seed in any::<u64>()) {
        let mut rng = stream(seed, "prop", 3);
        let g = random_group_element(&mut rng, p, q, 1.5).unwrap();
        let l = DiscPoint::random(&mut rng, p, q, 0.8);
        let back = mobius_act(&g.inverse(), &mobius_act(&g, &l).unwrap()).unwrap();
        prop_assert!(rel_diff(back.matrix(), l.matrix()) < 1e-9);
    }

    #[test]
    fn sylvester_identity((p, q) in shapes(), seed in any::<u64>()) {
        let l = DiscPoint::random(&mut stream(seed, "prop", 4), p, q, 0.95);
        prop_assert!((l.defect() - l.defect_right()).abs() < 1e-12);
    }

    #[test]
    fn unsqueeze_sends_sigma_to_origin((p, q) in shapes(), raw in prop::collection::vec(0.0f64..0.99, 3)) {
        let sigma = DiscPoint::diagonal(p, q, &raw[..p.min(q)]).unwrap();
        let g = GroupElement::unsqueeze(&sigma).unwrap();
        prop_assert!(g.validate(1e-8));
        let out = mobius_act(&g, &sigma).unwrap();
        prop_assert!(out.spectral_norm() < 1e-12);
    }

    #[test]
    fn weights_are_nonnegative((p, q) in shapes(), seed in any::<u64>()) {
        let spec = InvariantMeasureSpec::new(p, q, p + q).unwrap();
        let mut rng = stream(seed, "prop", 5);
        for _ in 0..50 {
            let s = sample_invariant(&mut rng, &spec);
            prop_assert!(s.weight >= 0.0);
            prop_assert!(s.lambda.is_some() || s.weight == 0.0);
        }
    }
}
