use cohlab::haar::{
    count_fidelity, eigen_angle_chi2, ks_validate_n1, n1_cdf, n1_density, negbin_by_convolution, negbin_moments,
    pushforward_tv, sample_gaussian, sample_haar_truncated, sample_negbin, tv_bound, tv_lower_bound, tv_lower_bounds,
    tv_n1_exact, CountDistribution, Statistic, TruncationParams,
};
use cohlab::linalg;
use cohlab::quadrature::gauss_legendre;
use cohlab::stream::stream;
use num_complex::Complex64;
use proptest::prelude::*;

fn params(m: usize, n: usize, budget: usize, seed: u64) -> TruncationParams {
    TruncationParams { m, n, budget, seed }
}

#[test]
fn entries_have_zero_mean_and_unit_second_moment() {
    let mut rng = stream(1, "haar-test", 0);
    let (m, n, draws) = (12, 3, 20_000);
    let mut sum = vec![Complex64::new(0.0, 0.0); n * n];
    let mut sq = vec![0.0; n * n];
    let mut sq2 = vec![0.0; n * n];
    for _ in 0..draws {
        let x = sample_haar_truncated(&mut rng, m, n);
        for (i, z) in x.iter().enumerate() {
            sum[i] += z;
            sq[i] += z.norm_sqr();
            sq2[i] += z.norm_sqr().powi(2);
        }
    }
    let nf = draws as f64;
    for i in 0..n * n {
        // each real part has variance 1/2
        let sigma_re = (0.5 / nf).sqrt();
        assert!(sum[i].re.abs() / nf < 3.0 * sigma_re, "entry {i}: {}", sum[i] / nf);
        assert!(sum[i].im.abs() / nf < 3.0 * sigma_re, "entry {i}: {}", sum[i] / nf);
        let mean = sq[i] / nf;
        let sd = ((sq2[i] / nf - mean * mean) / nf).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * sd, "entry {i}: {mean} ± {sd}");
    }
}

#[test]
fn square_block_is_a_scaled_unitary() {
    let mut rng = stream(2, "haar-test", 1);
    for n in 1..=5 {
        let x = sample_haar_truncated(&mut rng, n, n) / Complex64::new((n as f64).sqrt(), 0.0);
        assert!(linalg::is_unitary(&x, 1e-12), "n={n}");
        let (sv, _) = linalg::hermitian_eigen(&(x.adjoint() * &x));
        assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}

#[test]
fn gaussian_entries_are_standard() {
    let mut rng = stream(3, "haar-test", 2);
    let draws = 20_000;
    let mean: f64 = (0..draws)
        .map(|_| sample_gaussian(&mut rng, 1)[(0, 0)].norm_sqr())
        .sum::<f64>()
        / draws as f64;
    // |g|² is Exp(1): standard deviation 1
    assert!((mean - 1.0).abs() < 3.0 / (draws as f64).sqrt());
}

#[test]
fn n1_density_integrates_to_its_cdf() {
    for m in [2usize, 3, 5, 17, 100] {
        let mf = m as f64;
        for x in [0.3f64, 1.0, 2.5] {
            let x = x.min(mf);
            let area: f64 = gauss_legendre(60, 0.0, x)
                .iter()
                .map(|&(s, w)| w * n1_density(m, s))
                .sum();
            assert!((area - n1_cdf(m, x)).abs() < 1e-12, "m={m} x={x}");
        }
        assert_eq!(n1_cdf(m, mf), 1.0);
        assert_eq!(n1_density(m, mf + 1.0), 0.0);
    }
}

#[test]
fn n1_density_matches_one_million_samples() {
    let r = ks_validate_n1(8, 1_000_000, 17).unwrap();
    assert!(r.statistic <= 0.002, "{r:?}");
    assert!(ks_validate_n1(1, 10, 0).is_err());
}

#[test]
fn tv_n1_is_below_the_bound_and_decreasing() {
    let ms: Vec<usize> = (2..=10).map(|j| 1usize << j).collect();
    let tvs: Vec<f64> = ms.iter().map(|&m| tv_n1_exact(m).unwrap()).collect();
    for (&m, &t) in ms.iter().zip(&tvs) {
        assert!(t > 0.0 && t <= tv_bound(m, 1), "m={m}: {t}");
        assert_eq!(tv_bound(m, 1), 2.0 / (m - 1) as f64);
    }
    assert!(tvs.windows(2).all(|w| w[1] < w[0]), "{tvs:?}");
    for m in 2..=40 {
        assert!(tv_n1_exact(m).unwrap() <= tv_bound(m, 1));
    }
    assert!(tv_n1_exact(1).is_err());
}

#[test]
fn tv_n1_matches_brute_force_integration() {
    // fine composite Gauss rule on [0, m] plus the Gaussian tail beyond m
    for m in [3usize, 10, 50] {
        let mf = m as f64;
        let pieces = 4000;
        let h = mf / pieces as f64;
        let inside: f64 = (0..pieces)
            .flat_map(|j| gauss_legendre(16, j as f64 * h, (j + 1) as f64 * h))
            .map(|(s, w)| w * (n1_density(m, s) - (-s).exp()).abs())
            .sum();
        let brute = 0.5 * (inside + (-mf).exp());
        assert!((brute - tv_n1_exact(m).unwrap()).abs() < 1e-9, "m={m}");
    }
}

#[test]
fn bound_substitutions() {
    assert!((tv_bound(100, 2) - 16.0 / 98.0).abs() < 1e-15);
    assert!((params(100, 2, 10_000, 0).stated_bound() - 0.163_265_306).abs() < 1e-9);
    assert!(tv_bound(3, 3).is_infinite());
    assert!(params(2, 3, 10_000, 0).validate().is_err());
    assert!(params(100, 2, 10, 0).validate().is_err());
    assert!(tv_lower_bound(&params(100, 2, 10, 0), Statistic::FrobeniusSquared, 16).is_err());
    assert!(tv_lower_bound(&params(100, 2, 10_000, 0), Statistic::FrobeniusSquared, 1).is_err());
}

#[test]
fn identical_laws_give_zero_within_ci() {
    let mut rng = stream(4, "haar-test", 3);
    let a: Vec<f64> = (0..40_000)
        .map(|_| sample_gaussian(&mut rng, 2).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let b: Vec<f64> = (0..40_000)
        .map(|_| sample_gaussian(&mut rng, 2).iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let edges = cohlab::haar::empirical_edges(&b, 32);
    let est = pushforward_tv(&a, &b, &edges, 9, "same-law");
    assert!(est.ci_lo <= 0.0 && 0.0 <= est.ci_hi + 1e-12, "{est:?}");
    assert!(est.estimate.abs() < 0.02);
}

#[test]
fn n2_m100_is_certified() {
    let p = params(100, 2, 100_000, 7);
    for est in tv_lower_bounds(&p, &Statistic::standard_set(2), 64).unwrap() {
        assert!(est.estimate <= p.stated_bound() + est.ci_width(), "{est:?}");
        assert!(est.ci_lo <= est.estimate && est.estimate <= est.ci_hi);
    }
}

#[test]
fn coarser_bins_do_not_raise_the_estimate() {
    // Gaussian quantile edges nest, so 16 bins coarsen 64 bins
    let p = params(10, 2, 100_000, 3);
    for st in [
        Statistic::EntrySquaredModulus { row: 0, col: 0 },
        Statistic::FrobeniusSquared,
    ] {
        let coarse = tv_lower_bound(&p, st, 16).unwrap();
        let fine = tv_lower_bound(&p, st, 64).unwrap();
        assert!(coarse.plug_in <= fine.plug_in + 1e-12, "{}", st.name());
        assert!(
            coarse.estimate <= fine.estimate + coarse.ci_width() + fine.ci_width(),
            "{}",
            st.name()
        );
    }
}

#[test]
fn estimates_decrease_with_m() {
    let st = Statistic::EntrySquaredModulus { row: 0, col: 0 };
    let ests: Vec<_> = [50usize, 100, 200, 400]
        .iter()
        .map(|&m| tv_lower_bound(&params(m, 2, 100_000, 21), st, 64).unwrap())
        .collect();
    for w in ests.windows(2) {
        assert!(
            w[1].estimate <= w[0].estimate + w[0].ci_width().max(w[1].ci_width()),
            "{ests:?}"
        );
    }
}

#[test]
fn theorem_grid_is_certified() {
    for n in 1..=3usize {
        for m in [4 * n, 8 * n, 16 * n, 64 * n] {
            let p = params(m, n, 20_000, 31);
            for est in tv_lower_bounds(&p, &Statistic::standard_set(n), 32).unwrap() {
                assert!(
                    est.estimate <= p.stated_bound() + 3.0 * est.ci_width(),
                    "n={n} m={m}: {est:?}"
                );
            }
            if n == 1 {
                assert!(tv_n1_exact(m).unwrap() <= p.stated_bound());
            }
        }
    }
}

#[test]
fn standard_set_names() {
    let names: Vec<String> = Statistic::standard_set(2).iter().map(Statistic::name).collect();
    assert_eq!(names, ["entry11_abs2", "frobenius2", "entry21_abs2", "log_abs_det"]);
    assert_eq!(Statistic::standard_set(1).len(), 1);
}

#[test]
fn eigenvalue_phases_are_uniform() {
    let r = eigen_angle_chi2(8, 10_000, 32, 5).unwrap();
    assert_eq!(r.dof, 31);
    assert!(r.p_value > 0.001, "{r:?}");
}

#[test]
fn negbin_moment_examples() {
    let (mean, var) = negbin_moments(10, &[0.5]).unwrap();
    assert!((mean[0] - 10.0 / 3.0).abs() < 1e-14);
    assert!((var[0] - 40.0 / 9.0).abs() < 1e-14);
    let (mean, var) = negbin_moments(7, &[0.0, 0.0]).unwrap();
    assert_eq!((mean, var), (vec![0.0, 0.0], vec![0.0, 0.0]));
    assert!(negbin_moments(3, &[1.0]).is_err());
}

#[test]
fn negbin_sample_mean_within_three_sigma() {
    let mut rng = stream(7, "haar-test", 6);
    let (m, sigma) = (10, [0.5, 0.3]);
    let (mean, var) = negbin_moments(m, &sigma).unwrap();
    let draws = 100_000;
    let mut sums = [0.0; 2];
    for _ in 0..draws {
        for (s, k) in sums.iter_mut().zip(sample_negbin(&mut rng, m, &sigma).unwrap()) {
            *s += k as f64;
        }
    }
    for i in 0..2 {
        let got = sums[i] / draws as f64;
        assert!(
            (got - mean[i]).abs() < 3.0 * (var[i] / draws as f64).sqrt(),
            "mode {i}: {got}"
        );
    }
}

#[test]
fn negbin_is_an_m_fold_geometric_convolution() {
    for m in 1..=8 {
        for sigma in [0.2, 0.5, 0.8] {
            let d = CountDistribution::NegativeBinomial { m, sigma: vec![sigma] };
            let conv = negbin_by_convolution(m, sigma, 60);
            let sup = conv
                .iter()
                .enumerate()
                .map(|(k, &p)| (p - d.mode_pmf(0, k as u64)).abs())
                .fold(0.0, f64::max);
            assert!(sup <= 1e-12, "m={m} σ={sigma}: {sup}");
        }
    }
}

#[test]
fn pmfs_sum_to_one() {
    let laws = [
        CountDistribution::Poisson {
            means: vec![0.0, 2.5, 40.0],
        },
        CountDistribution::NegativeBinomial {
            m: 20,
            sigma: vec![0.0, 0.4, 0.9],
        },
    ];
    for d in &laws {
        d.validate().unwrap();
        for i in 0..d.modes() {
            let (t, rest) = d.mode_table(i, 1e-14, 1 << 16);
            assert!((t.iter().sum::<f64>() + rest - 1.0).abs() < 1e-12);
            assert!(rest < 1e-14);
        }
    }
    assert!(CountDistribution::Poisson { means: vec![-1.0] }.validate().is_err());
    assert!(CountDistribution::NegativeBinomial { m: 0, sigma: vec![0.1] }
        .validate()
        .is_err());
}

#[test]
fn count_fidelity_examples() {
    let p = CountDistribution::NegativeBinomial {
        m: 5,
        sigma: vec![0.6, 0.2],
    };
    let f = count_fidelity(&p, &p, 1e-12).unwrap();
    assert!(f.value <= 1.0 && f.value >= 1.0 - 1e-10, "{f:?}");
    assert!(f.upper >= f.value);

    let poisson = CountDistribution::Poisson { means: vec![1.0] };
    let negbin = CountDistribution::NegativeBinomial {
        m: 10,
        sigma: vec![0.5f64.sqrt()],
    };
    assert!((negbin.means()[0] - 10.0).abs() < 1e-12);
    assert!(count_fidelity(&poisson, &negbin, 1e-12).unwrap().upper < 0.1);

    let wrong = CountDistribution::Poisson { means: vec![1.0, 1.0] };
    assert!(count_fidelity(&poisson, &wrong, 1e-12).is_err());
    assert!(count_fidelity(&poisson, &poisson, 0.0).is_err());
}

#[test]
fn matched_means_concentrate_as_m_grows() {
    // Poisson(α²) vs NegBin(m, σ²) with σ² = α²/(m + α²), so both means are α²
    let alpha2 = 3.0;
    let fids: Vec<f64> = [1usize, 4, 16, 64, 256, 1024]
        .iter()
        .map(|&m| {
            let s2 = alpha2 / (m as f64 + alpha2);
            let nb = CountDistribution::NegativeBinomial {
                m,
                sigma: vec![s2.sqrt()],
            };
            assert!((nb.means()[0] - alpha2).abs() < 1e-12);
            let po = CountDistribution::Poisson { means: vec![alpha2] };
            count_fidelity(&po, &nb, 1e-13).unwrap().value
        })
        .collect();
    assert!(fids.windows(2).all(|w| w[1] > w[0]), "{fids:?}");
    assert!(fids[5] > 0.9999, "{fids:?}");
}

#[test]
fn fidelity_against_direct_summation() {
    let p = CountDistribution::Poisson { means: vec![2.0] };
    let q = CountDistribution::NegativeBinomial { m: 3, sigma: vec![0.6] };
    let direct: f64 = (0..2000u64)
        .map(|k| (p.mode_pmf(0, k) * q.mode_pmf(0, k)).sqrt())
        .sum::<f64>()
        .powi(2);
    let f = count_fidelity(&p, &q, 1e-14).unwrap();
    assert!(f.value <= direct + 1e-14 && direct <= f.upper + 1e-14);
    assert!((f.value - direct).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn columns_of_the_block_have_bounded_norm(seed in any::<u64>(), n in 1usize..=4, extra in 0usize..=12) {
        // the block is a contraction times sqrt(m)
        let m = n + extra;
        let x = sample_haar_truncated(&mut stream(seed, "haar-prop", 0), m, n);
        let scaled = &x / Complex64::new((m as f64).sqrt(), 0.0);
        prop_assert!(linalg::spectral_norm(&scaled) <= 1.0 + 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in 0.0f64..20.0, m in 1usize..40, s in 0.0f64..0.95) {
        let p = CountDistribution::Poisson { means: vec![a] };
        let q = CountDistribution::NegativeBinomial { m, sigma: vec![s] };
        let pq = count_fidelity(&p, &q, 1e-12).unwrap();
        let qp = count_fidelity(&q, &p, 1e-12).unwrap();
        prop_assert!((pq.value - qp.value).abs() < 1e-12);
        prop_assert!(pq.value >= 0.0 && pq.upper <= 1.0 + 1e-12 && pq.value <= pq.upper);
    }

    #[test]
    fn tv_n1_below_bound(m in 2usize..2000) {
        prop_assert!(tv_n1_exact(m).unwrap() <= tv_bound(m, 1));
    }
}
