use cohlab::coherent::{
    exp_series, expand, fidelity, husimi, husimi_su11, overlap, su11_coefficients, truncated_overlap, CoherentState,
};
use cohlab::fock::{FockOperator, FockPoly, Layout};
use cohlab::hyperbolic::{mobius_act, random_group_element, DiscPoint};
use cohlab::linalg::{self, c, CMat};
use cohlab::quadrature::gauss_legendre;
use cohlab::scalar::{GaussRational, Scalar};
use cohlab::stream::stream;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

type Q = GaussRational;

fn point(p: usize, q: usize, entries: &[(f64, f64)]) -> DiscPoint {
    let e: Vec<Complex64> = entries.iter().map(|&(a, b)| c(a, b)).collect();
    DiscPoint::from_entries(p, q, &e).unwrap()
}

#[test]
fn vacuum_expands_to_one() {
    let s = CoherentState::new(DiscPoint::zero(2, 2), 3).unwrap();
    let f = expand(&s, 5).unwrap();
    assert_eq!(f.len(), 1);
    assert!((f.coeff(&cohlab::fock::Monomial::one(s.layout().nvars())) - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn su11_expansion_coefficients() {
    // <ψ_k, Λ> = (1 − |λ|²)^{n/2} sqrt(binom(n+k−1, k)) λ^k
    let lambda = c(0.3, -0.4);
    for n in 1..=3 {
        let s = CoherentState::new(point(1, 1, &[(lambda.re, lambda.im)]), n).unwrap();
        let f = expand(&s, 8).unwrap();
        let z = FockPoly::<Complex64>::z_invariant(s.layout(), 0, 0);
        let want = su11_coefficients(lambda, n, 8);
        for (k, w) in want.iter().enumerate() {
            let zk = z.pow(k as u32);
            let got = zk.inner(&f) / zk.norm_sqr().re.sqrt();
            let binom: f64 = (1..=k).map(|j| (n + j - 1) as f64 / j as f64).product();
            let hand = lambda.powu(k as u32) * (1.0 - lambda.norm_sqr()).powf(n as f64 / 2.0) * binom.sqrt();
            assert!((got - w).norm() < 1e-12, "n={n} k={k}");
            assert!((hand - w).norm() < 1e-12, "n={n} k={k}");
        }
    }
}

#[test]
fn truncated_norm_defect_is_geometric() {
    // n = 1, σ = 0.5: 1 − ||ψ^{≤d}||² = σ^{2(d+1)}
    let s = CoherentState::new(DiscPoint::diagonal(1, 1, &[0.5]).unwrap(), 1).unwrap();
    let mut prev = 0.0;
    for d in 0..=20 {
        let norm = expand(&s, d).unwrap().norm_sqr().re;
        assert!(norm > prev);
        prev = norm;
    }
    assert!(((1.0 - prev) - 0.25f64.powi(21)).abs() < 1e-15);
}

#[test]
fn fidelity_examples() {
    let a = point(1, 1, &[(0.5, 0.0)]);
    let b = point(1, 1, &[(-0.5, 0.0)]);
    assert!((fidelity(&a, &b, 1).unwrap() - 0.36).abs() < 1e-15);
    assert!((fidelity(&a, &a, 4).unwrap() - 1.0).abs() < 1e-15);
    let mut rng = stream(1, "coherent-test", 0);
    let l = DiscPoint::random(&mut rng, 2, 3, 0.8);
    for n in 1..=4 {
        let f = fidelity(&l, &DiscPoint::zero(2, 3), n).unwrap();
        assert!((f - l.defect().powi(n as i32)).abs() < 1e-13);
    }
    assert!(fidelity(&l, &DiscPoint::zero(3, 2), 1).is_err());
}

#[test]
fn overlap_of_diagonal_points() {
    let (s1, s2) = ([0.2, 0.7], [-0.5, 0.1]);
    let a = DiscPoint::diagonal(2, 3, &s1).unwrap();
    let b = DiscPoint::diagonal(2, 3, &s2).unwrap();
    for n in 1..=3 {
        let want: f64 = s1
            .iter()
            .zip(&s2)
            .map(|(x, y)| ((1.0 - x * x).sqrt() * (1.0 - y * y).sqrt() / (1.0 - x * y)).powi(n))
            .product();
        let got = overlap(&a, &b, n as usize).unwrap();
        assert!((got - c(want, 0.0)).norm() < 1e-14);
    }
}

#[test]
fn overlap_matches_direct_bargmann_series() {
    // independent oracle: inner product of the two expanded polynomials
    let mut rng = stream(2, "coherent-test", 1);
    for (p, q, n, d) in [(1, 1, 3, 40), (1, 2, 2, 14), (2, 1, 1, 24)] {
        let a = DiscPoint::random(&mut rng, p, q, 0.3);
        let b = DiscPoint::random(&mut rng, p, q, 0.3);
        let fa = expand(&CoherentState::new(a.clone(), n).unwrap(), d).unwrap();
        let fb = expand(&CoherentState::new(b.clone(), n).unwrap(), d).unwrap();
        let series = fa.inner(&fb);
        let closed = overlap(&a, &b, n).unwrap();
        assert!((series - closed).norm() < 1e-10 * closed.norm(), "p={p} q={q} n={n}");
    }
}

#[test]
fn overlap_matches_truncated_series_at_degree_40() {
    let mut rng = stream(3, "coherent-test", 2);
    for i in 0..50 {
        let (p, q) = (1 + i % 2, 1 + (i / 2) % 2);
        let n = 1 + i % 3;
        let a = DiscPoint::random(&mut rng, p, q, 0.6);
        let b = DiscPoint::random(&mut rng, p, q, 0.6);
        let closed = overlap(&a, &b, n).unwrap();
        let series = truncated_overlap(&a, &b, n, 40).unwrap();
        assert!((series - closed).norm() <= 1e-8 * closed.norm());
        assert!((closed.norm_sqr() - fidelity(&a, &b, n).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn tensor_power_law_is_exact() {
    // (Λ, n) expanded = degree-d part of the product of n one-replica copies
    let lambda = [Q::ratio(1, 3), Q::ratio(1, 5) + Q::imag_unit() * Q::ratio(-1, 7)];
    let d = 4;
    for n in 1..=3 {
        let big = Layout::new(1, 2, n).unwrap();
        let single = Layout::new(1, 2, 1).unwrap();
        let one = exp_series(single, &lambda, d).unwrap();
        let mut product = FockPoly::constant(big, Q::one());
        for t in 0..n {
            product = product.mul_truncated(&one.embed_replica(big, t), 2 * d);
        }
        let product = product.truncate_z_degree(d);
        assert_eq!(exp_series(big, &lambda, d).unwrap(), product, "n={n}");
    }
}

#[test]
fn husimi_of_vacuum() {
    // ρ = |0><0|, n = 3: Q(λ) = (2/π)(1 − |λ|²), unit mass on the disk
    let l = Layout::new(1, 1, 3).unwrap();
    let rho = FockOperator::projector(&FockPoly::constant(l, c(1.0, 0.0)));
    for r in [0.0, 0.3, 0.9] {
        let lam = point(1, 1, &[(r * 0.6, r * 0.8)]);
        let got = husimi(&rho, &lam, 3).unwrap();
        assert!((got - 2.0 / PI * (1.0 - r * r)).abs() < 1e-14);
    }
    let mass: f64 = gauss_legendre(40, 0.0, 1.0)
        .iter()
        .map(|&(r, w)| w * 2.0 * PI * r * husimi(&rho, &point(1, 1, &[(r, 0.0)]), 3).unwrap())
        .sum();
    assert!((mass - 1.0).abs() < 1e-12);
    assert!(husimi(
        &FockOperator::projector(&FockPoly::constant(Layout::new(1, 1, 1).unwrap(), c(1.0, 0.0))),
        &DiscPoint::zero(1, 1),
        1
    )
    .is_err());
}

fn random_density<R: rand::Rng>(rng: &mut R, dim: usize) -> CMat {
    let g = linalg::ginibre(rng, dim, dim);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[test]
fn husimi_integrates_to_one() {
    let mut rng = stream(4, "coherent-test", 3);
    for n in [2usize, 3, 5] {
        let rho = random_density(&mut rng, 6);
        let radial = gauss_legendre(120, 0.0, 1.0);
        let angles = 64;
        let mut mass = 0.0;
        for &(r, w) in &radial {
            for a in 0..angles {
                let th = 2.0 * PI * a as f64 / angles as f64;
                let q = husimi_su11(&rho, Complex64::from_polar(r, th), n).unwrap();
                assert!(q >= -1e-15);
                mass += w * r * (2.0 * PI / angles as f64) * q;
            }
        }
        assert!((mass - 1.0).abs() < 1e-9, "n={n}: {mass}");
        let at0 = husimi_su11(&rho, c(0.0, 0.0), n).unwrap();
        let cn = (n - 1) as f64 / PI;
        assert!((at0 - cn * rho[(0, 0)].re).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fidelity_is_group_invariant(seed in any::<u64>(), p in 1usize..=3, q in 1usize..=3, n in 1usize..=4) {
        let mut rng = stream(seed, "coherent-prop", 0);
        let a = DiscPoint::random(&mut rng, p, q, 0.8);
        let b = DiscPoint::random(&mut rng, p, q, 0.8);
        let g = random_group_element(&mut rng, p, q, 1.0).unwrap();
        let before = fidelity(&a, &b, n).unwrap();
        let after = fidelity(&mobius_act(&g, &a).unwrap(), &mobius_act(&g, &b).unwrap(), n).unwrap();
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn fidelity_is_below_one_off_diagonal(seed in any::<u64>(), p in 1usize..=3, q in 1usize..=3, eps in 1e-3f64..0.1) {
        let mut rng = stream(seed, "coherent-prop", 1);
        let a = DiscPoint::random(&mut rng, p, q, 0.7);
        let dir = linalg::ginibre(&mut rng, p, q);
        let dir = &dir / c(linalg::spectral_norm(&dir), 0.0);
        let b = DiscPoint::new(a.matrix() + dir * c(eps, 0.0)).unwrap();
        let f = fidelity(&a, &b, 1).unwrap();
        prop_assert!(f < 1.0 && f > 0.0);
        prop_assert!((fidelity(&a, &a, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overlap_modulus_matches_fidelity(seed in any::<u64>(), p in 1usize..=3, q in 1usize..=3, n in 1usize..=5) {
        let mut rng = stream(seed, "coherent-prop", 2);
        let a = DiscPoint::random(&mut rng, p, q, 0.9);
        let b = DiscPoint::random(&mut rng, p, q, 0.9);
        let o = overlap(&a, &b, n).unwrap();
        prop_assert!((o.norm_sqr() - fidelity(&a, &b, n).unwrap()).abs() < 1e-12);
        prop_assert!((overlap(&a, &a, n).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        // conjugate symmetry
        prop_assert!((overlap(&b, &a, n).unwrap() - o.conj()).norm() < 1e-12);
    }

    #[test]
    fn normalization_is_sylvester_symmetric(seed in any::<u64>(), p in 1usize..=3, q in 1usize..=3) {
        let l = DiscPoint::random(&mut stream(seed, "coherent-prop", 3), p, q, 0.95);
        let s = CoherentState::new(l.clone(), 2).unwrap();
        prop_assert!((s.normalization() - l.defect_right()).abs() < 1e-12);
    }
}
