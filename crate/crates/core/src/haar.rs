//! Truncated Haar unitaries against Gaussian matrices, and the photon-count
//! distributions that appear in the truncation argument.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Gamma};

use crate::combinatorics::ln_binomial;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::quadrature::adaptive_simpson_split;
use crate::stream::{self, SHARDS};

/// Smallest per-distribution budget accepted by the TV estimators.
pub const MIN_BUDGET: usize = 10_000;
/// Bootstrap resamples behind every confidence interval.
pub const BOOTSTRAP: usize = 200;
/// Default number of equiprobable bins.
pub const DEFAULT_BINS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TruncationParams {
    pub m: usize,
    pub n: usize,
    pub budget: usize,
    pub seed: u64,
}

impl TruncationParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::Parameter(format!(
                "need 1 <= n <= m, got n={}, m={}",
                self.n, self.m
            )));
        }
        if self.budget < MIN_BUDGET {
            return Err(Error::Budget(format!(
                "{} samples per law, need at least {MIN_BUDGET}",
                self.budget
            )));
        }
        Ok(())
    }

    /// `2n³/(m−n)`; infinite when `m = n`.
    pub fn stated_bound(&self) -> f64 {
        tv_bound(self.m, self.n)
    }
}

pub fn tv_bound(m: usize, n: usize) -> f64 {
    if m <= n {
        f64::INFINITY
    } else {
        2.0 * (n as f64).powi(3) / (m - n) as f64
    }
}

/// `sqrt(m)` times the upper-left `n×n` block of a Haar unitary on `U(m)`.
///
/// Only the first `n` columns are drawn, as a Haar frame on the Stiefel
/// manifold, which has the same law as those columns of a full draw.
pub fn sample_haar_truncated<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> CMat {
    let frame = linalg::haar_stiefel(rng, m, n);
    frame.view((0, 0), (n, n)).into_owned() * Complex64::new((m as f64).sqrt(), 0.0)
}

/// `n×n` matrix of independent standard complex Gaussians.
pub fn sample_gaussian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    linalg::ginibre(rng, n, n)
}

/// Density of `s = m|U₁₁|²`: `((m−1)/m)(1 − s/m)^{m−2}` on `[0, m]`.
pub fn n1_density(m: usize, s: f64) -> f64 {
    if !(0.0..=m as f64).contains(&s) {
        return 0.0;
    }
    let mf = m as f64;
    (mf - 1.0) / mf * (1.0 - s / mf).powi(m as i32 - 2)
}

/// Distribution function of `m|U₁₁|²`: `1 − (1 − s/m)^{m−1}`.
pub fn n1_cdf(m: usize, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= m as f64 {
        1.0
    } else {
        1.0 - (1.0 - s / m as f64).powi(m as i32 - 1)
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Points in `(0, m)` where the `m|U₁₁|²` density crosses `e^{−s}`.
///
/// The log ratio `ln((m−1)/m) + (m−2) ln(1 − s/m) + s` is concave with its
/// peak at `s = 2`, so there are at most two crossings.
pub fn n1_crossings(m: usize) -> Vec<f64> {
    let mf = m as f64;
    let h = |s: f64| ((mf - 1.0) / mf).ln() + (mf - 2.0) * ln_or_neg_inf(1.0 - s / mf) + s;
    let peak = 2.0f64.min(mf);
    if h(peak) <= 0.0 {
        return Vec::new();
    }
    let mut out = vec![bisect(h, 0.0, peak)];
    if m > 2 {
        out.push(bisect(h, peak, mf * (1.0 - 1e-15)));
    }
    out
}

/// `ln x`, with `−∞` for `x ≤ 0` so rounding at `s = m` cannot give NaN.
fn ln_or_neg_inf(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// TV between the law of `sqrt(m) U₁₁` and a standard complex Gaussian.
///
/// Both laws are rotation invariant, so this is the TV between the laws of
/// `|·|²`, computed as `½∫|f − e^{−s}|` by adaptive quadrature split at the
/// density crossings, plus the Gaussian mass beyond `m`.
pub fn tv_n1_exact(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Parameter(format!("need m >= 2, got {m}")));
    }
    let mf = m as f64;
    // dyadic cuts keep the adaptive rule from sampling only the flat tail
    let mut cuts = vec![0.0, mf];
    cuts.extend(n1_crossings(m));
    cuts.extend((0..).map(|j| 2f64.powi(j)).take_while(|&x| x < mf));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |s: f64| (n1_density(m, s) - (-s).exp()).abs();
    let inside = adaptive_simpson_split(&f, &cuts, 1e-13);
    Ok(0.5 * (inside + (-mf).exp()))
}

/// Kolmogorov–Smirnov distance between samples of `m|U₁₁|²` and [`n1_cdf`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub m: usize,
    pub samples: usize,
    pub statistic: f64,
}

pub fn ks_validate_n1(m: usize, samples: usize, seed: u64) -> Result<KsReport> {
    if m < 2 || samples == 0 {
        return Err(Error::Parameter("need m >= 2 and a positive sample count".into()));
    }
    let budgets = stream::split_budget(samples, SHARDS);
    let id = format!("ks-n1/m{m}");
    let shards = stream::map_shards(SHARDS, |s| {
        let mut rng = stream::stream(seed, &id, s as u64);
        (0..budgets[s])
            .map(|_| sample_haar_truncated(&mut rng, m, 1)[(0, 0)].norm_sqr())
            .collect::<Vec<f64>>()
    });
    let mut xs: Vec<f64> = shards.into_iter().flatten().collect();
    xs.sort_by(f64::total_cmp);
    let total = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = n1_cdf(m, x);
            (cdf - i as f64 / total).abs().max(((i + 1) as f64 / total - cdf).abs())
        })
        .fold(0.0, f64::max);
    Ok(KsReport { m, samples, statistic })
}

/// Scalar summaries of an `n×n` matrix used to push both laws to the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Statistic {
    /// `|X_ij|²`.
    EntrySquaredModulus { row: usize, col: usize },
    /// `‖X‖_F²`.
    FrobeniusSquared,
    /// `ln|det X|`.
    LogAbsDet,
}

impl Statistic {
    pub fn name(&self) -> String {
        match self {
            Statistic::EntrySquaredModulus { row, col } => format!("entry{}{}_abs2", row + 1, col + 1),
            Statistic::FrobeniusSquared => "frobenius2".into(),
            Statistic::LogAbsDet => "log_abs_det".into(),
        }
    }

    pub fn eval(&self, x: &CMat) -> f64 {
        match *self {
            Statistic::EntrySquaredModulus { row, col } => x[(row, col)].norm_sqr(),
            Statistic::FrobeniusSquared => x.iter().map(|z| z.norm_sqr()).sum(),
            Statistic::LogAbsDet => x.clone().determinant().norm().ln(),
        }
    }

    /// The statistics used in sweeps for an `n×n` block.
    pub fn standard_set(n: usize) -> Vec<Statistic> {
        // for n = 1 the Frobenius norm is the single entry again
        let mut v = vec![Statistic::EntrySquaredModulus { row: 0, col: 0 }];
        if n > 1 {
            v.push(Statistic::FrobeniusSquared);
            v.push(Statistic::EntrySquaredModulus { row: n - 1, col: 0 });
            v.push(Statistic::LogAbsDet);
        }
        v
    }

    /// Quantiles of the statistic under the Gaussian law where they are
    /// known in closed form: `|g|²` is `Exp(1)`, `‖G‖_F²` is `Gamma(n², 1)`.
    fn gaussian_quantiles(&self, n: usize, bins: usize) -> Option<Vec<f64>> {
        let probs = (1..bins).map(|b| b as f64 / bins as f64);
        match self {
            Statistic::EntrySquaredModulus { .. } => Some(probs.map(|u| -(-u).ln_1p()).collect()),
            Statistic::FrobeniusSquared => {
                let g = Gamma::new((n * n) as f64, 1.0).ok()?;
                Some(probs.map(|u| g.inverse_cdf(u)).collect())
            }
            Statistic::LogAbsDet => None,
        }
    }
}

/// Pushforward TV estimate with a bootstrap interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TvEstimate {
    pub statistic: String,
    pub bins: usize,
    /// Split-sample estimate of `P(A) − Q(A)` for a set `A` of bins chosen
    /// on held-out data; unbiased for a quantity below the true TV.
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Plain histogram TV on all samples; biased upward by sampling noise.
    pub plug_in: f64,
}

impl TvEstimate {
    pub fn ci_width(&self) -> f64 {
        self.ci_hi - self.ci_lo
    }
}

fn bin_of(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|&e| e <= x)
}

fn histogram(labels: &[usize], bins: usize) -> Vec<usize> {
    let mut h = vec![0usize; bins];
    for &l in labels {
        h[l] += 1;
    }
    h
}

/// Interior edges at the empirical quantiles of `reference`.
pub fn empirical_edges(reference: &[f64], bins: usize) -> Vec<f64> {
    let mut xs = reference.to_vec();
    xs.sort_by(f64::total_cmp);
    (1..bins).map(|b| xs[(b * xs.len() / bins).min(xs.len() - 1)]).collect()
}

/// TV lower bound between the laws behind `a` and `b` after binning with
/// `edges`. Each sample is split in half: the first halves choose the set
/// where `a` is more likely, the second halves measure it.
pub fn pushforward_tv(a: &[f64], b: &[f64], edges: &[f64], seed: u64, id: &str) -> TvEstimate {
    let bins = edges.len() + 1;
    let la: Vec<usize> = a.iter().map(|&x| bin_of(edges, x)).collect();
    let lb: Vec<usize> = b.iter().map(|&x| bin_of(edges, x)).collect();
    let (sa, ea) = la.split_at(la.len() / 2);
    let (sb, eb) = lb.split_at(lb.len() / 2);
    let (hsa, hsb) = (histogram(sa, bins), histogram(sb, bins));
    let chosen: Vec<bool> = (0..bins)
        .map(|i| hsa[i] as f64 / sa.len() as f64 > hsb[i] as f64 / sb.len() as f64)
        .collect();
    let hit_a = ea.iter().filter(|&&l| chosen[l]).count();
    let hit_b = eb.iter().filter(|&&l| chosen[l]).count();
    let (na, nb) = (ea.len() as f64, eb.len() as f64);
    let (pa, pb) = (hit_a as f64 / na, hit_b as f64 / nb);
    let estimate = pa - pb;

    let mut rng = stream::stream(seed, &format!("{id}/bootstrap"), 0);
    let mut boot: Vec<f64> = (0..BOOTSTRAP)
        .map(|_| {
            let ra = Binomial::new(ea.len() as u64, pa)
                .map(|d| d.sample(&mut rng))
                .unwrap_or(0);
            let rb = Binomial::new(eb.len() as u64, pb)
                .map(|d| d.sample(&mut rng))
                .unwrap_or(0);
            ra as f64 / na - rb as f64 / nb
        })
        .collect();
    boot.sort_by(f64::total_cmp);
    let q = |u: f64| boot[((u * BOOTSTRAP as f64) as usize).min(BOOTSTRAP - 1)];

    let (ha, hb) = (histogram(&la, bins), histogram(&lb, bins));
    let plug_in = 0.5
        * (0..bins)
            .map(|i| (ha[i] as f64 / la.len() as f64 - hb[i] as f64 / lb.len() as f64).abs())
            .sum::<f64>();
    TvEstimate {
        statistic: String::new(),
        bins,
        estimate,
        ci_lo: q(0.025),
        ci_hi: q(0.975),
        plug_in,
    }
}

/// Statistic values of `budget` draws from the truncated Haar block
/// (`truncated = true`) or from the Gaussian matrix law.
pub fn sample_statistics(params: &TruncationParams, stats: &[Statistic], truncated: bool, tag: &str) -> Vec<Vec<f64>> {
    let (m, n) = (params.m, params.n);
    let id = format!("haar-tv/{tag}/m{m}/n{n}");
    let budgets = stream::split_budget(params.budget, SHARDS);
    let shards = stream::map_shards(SHARDS, |s| {
        let mut rng = stream::stream(params.seed, &id, s as u64);
        let mut cols = vec![Vec::with_capacity(budgets[s]); stats.len()];
        for _ in 0..budgets[s] {
            let x = if truncated {
                sample_haar_truncated(&mut rng, m, n)
            } else {
                sample_gaussian(&mut rng, n)
            };
            for (col, st) in cols.iter_mut().zip(stats) {
                col.push(st.eval(&x));
            }
        }
        cols
    });
    let mut out = vec![Vec::with_capacity(params.budget); stats.len()];
    for shard in shards {
        for (o, col) in out.iter_mut().zip(shard) {
            o.extend(col);
        }
    }
    out
}

fn edges_for(st: &Statistic, n: usize, bins: usize, params: &TruncationParams) -> Vec<f64> {
    st.gaussian_quantiles(n, bins).unwrap_or_else(|| {
        let pilot = sample_statistics(params, &[*st], false, "pilot");
        empirical_edges(&pilot[0], bins)
    })
}

/// Pushforward lower bounds on `TV(H_{m,n}, G^{n×n})`, one per statistic,
/// with equiprobable bins under the Gaussian law.
pub fn tv_lower_bounds(params: &TruncationParams, stats: &[Statistic], bins: usize) -> Result<Vec<TvEstimate>> {
    params.validate()?;
    if bins < 2 {
        return Err(Error::Parameter("need at least 2 bins".into()));
    }
    let h = sample_statistics(params, stats, true, "haar");
    let g = sample_statistics(params, stats, false, "gauss");
    Ok(stats
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let edges = edges_for(st, params.n, bins, params);
            let id = format!("haar-tv/m{}/n{}/{}/{bins}", params.m, params.n, st.name());
            let mut est = pushforward_tv(&h[i], &g[i], &edges, params.seed, &id);
            est.statistic = st.name();
            est
        })
        .collect())
}

pub fn tv_lower_bound(params: &TruncationParams, stat: Statistic, bins: usize) -> Result<TvEstimate> {
    Ok(tv_lower_bounds(params, &[stat], bins)?.remove(0))
}

/// Pearson χ² test of eigenvalue phases of Haar unitaries against the
/// uniform law on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chi2Report {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn eigen_angle_chi2(m: usize, samples: usize, bins: usize, seed: u64) -> Result<Chi2Report> {
    if m == 0 || samples == 0 || bins < 2 {
        return Err(Error::Parameter("need m, samples >= 1 and bins >= 2".into()));
    }
    let budgets = stream::split_budget(samples, SHARDS);
    let id = format!("eigen-angle/m{m}");
    let shards = stream::map_shards(SHARDS, |s| {
        let mut rng = stream::stream(seed, &id, s as u64);
        let mut h = vec![0usize; bins];
        for _ in 0..budgets[s] {
            for z in linalg::eigenvalues(&linalg::haar_unitary(&mut rng, m)) {
                let t = (z.arg() + std::f64::consts::PI) / std::f64::consts::TAU;
                h[((t * bins as f64) as usize).min(bins - 1)] += 1;
            }
        }
        h
    });
    let mut counts = vec![0usize; bins];
    for h in shards {
        for (c, x) in counts.iter_mut().zip(h) {
            *c += x;
        }
    }
    let expected = (samples * m) as f64 / bins as f64;
    let statistic: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let dof = bins - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(Chi2Report {
        statistic,
        dof,
        p_value: 1.0 - chi.cdf(statistic),
    })
}

/// Product photon-count laws: Poisson with the given means, or negative
/// binomial `(1−Σ_i²)^m binom(m+k−1, k) Σ_i^{2k}` per mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CountDistribution {
    Poisson { means: Vec<f64> },
    NegativeBinomial { m: usize, sigma: Vec<f64> },
}

impl CountDistribution {
    pub fn modes(&self) -> usize {
        match self {
            CountDistribution::Poisson { means } => means.len(),
            CountDistribution::NegativeBinomial { sigma, .. } => sigma.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CountDistribution::Poisson { means } if means.iter().any(|&a| !(a >= 0.0 && a.is_finite())) => {
                Err(Error::Parameter("Poisson means must be finite and nonnegative".into()))
            }
            CountDistribution::NegativeBinomial { sigma, .. } if sigma.iter().any(|&s| !(0.0..1.0).contains(&s)) => {
                Err(Error::Parameter("need 0 <= Σ_i < 1".into()))
            }
            CountDistribution::NegativeBinomial { m: 0, .. } => Err(Error::Parameter("need m >= 1".into())),
            _ => Ok(()),
        }
    }

    /// `P(k)` in mode `i`.
    pub fn mode_pmf(&self, i: usize, k: u64) -> f64 {
        let kf = k as f64;
        match self {
            CountDistribution::Poisson { means } => {
                let mu = means[i];
                if mu == 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                (kf * mu.ln() - mu - statrs::function::gamma::ln_gamma(kf + 1.0)).exp()
            }
            CountDistribution::NegativeBinomial { m, sigma } => {
                let s2 = sigma[i] * sigma[i];
                if s2 == 0.0 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                let mf = *m as f64;
                (mf * (-s2).ln_1p() + ln_binomial(mf + kf - 1.0, kf) + kf * s2.ln()).exp()
            }
        }
    }

    /// Mean per mode.
    pub fn means(&self) -> Vec<f64> {
        match self {
            CountDistribution::Poisson { means } => means.clone(),
            CountDistribution::NegativeBinomial { m, sigma } => {
                negbin_moments(*m, sigma).map(|x| x.0).unwrap_or_default()
            }
        }
    }

    /// Probabilities `P(0..=K)` in mode `i`, with `K` the first cutoff whose
    /// remaining mass is below `tail_cap`, and that remaining mass.
    pub fn mode_table(&self, i: usize, tail_cap: f64, max_len: usize) -> (Vec<f64>, f64) {
        let mut v = Vec::new();
        let mut acc = 0.0;
        for k in 0..max_len as u64 {
            let p = self.mode_pmf(i, k);
            v.push(p);
            acc += p;
            if 1.0 - acc < tail_cap && k as f64 > self.means()[i] {
                break;
            }
        }
        (v, (1.0 - acc).max(0.0))
    }
}

/// `(mean, variance)` per mode of the negative binomial law:
/// `mΣ²/(1−Σ²)` and `mΣ²/(1−Σ²)²`.
pub fn negbin_moments(m: usize, sigma: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if sigma.iter().any(|&s| !(0.0..1.0).contains(&s)) {
        return Err(Error::Parameter("need 0 <= Σ_i < 1".into()));
    }
    let mf = m as f64;
    Ok(sigma
        .iter()
        .map(|&s| {
            let s2 = s * s;
            (mf * s2 / (1.0 - s2), mf * s2 / (1.0 - s2).powi(2))
        })
        .unzip())
}

/// One draw of the negative binomial count vector, as a sum of `m`
/// geometric draws per mode.
pub fn sample_negbin<R: Rng + ?Sized>(rng: &mut R, m: usize, sigma: &[f64]) -> Result<Vec<u64>> {
    sigma
        .iter()
        .map(|&s| {
            let g = Geometric::new(1.0 - s * s).map_err(|e| Error::Parameter(e.to_string()))?;
            Ok((0..m).map(|_| g.sample(rng)).sum())
        })
        .collect()
}

/// Single-mode negative binomial table on `0..=kmax` built by convolving
/// the geometric law `(1−Σ²)Σ^{2k}` with itself `m` times.
pub fn negbin_by_convolution(m: usize, sigma: f64, kmax: usize) -> Vec<f64> {
    let s2 = sigma * sigma;
    let geo: Vec<f64> = (0..=kmax).map(|k| (1.0 - s2) * s2.powi(k as i32)).collect();
    let mut acc = vec![0.0; kmax + 1];
    acc[0] = 1.0;
    for _ in 0..m {
        let mut next = vec![0.0; kmax + 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &g) in geo.iter().take(kmax + 1 - i).enumerate() {
                next[i + j] += a * g;
            }
        }
        acc = next;
    }
    acc
}

/// Fidelity `(Σ sqrt(p q))²` with a two-sided truncation interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountFidelity {
    /// Value from the truncated lattice; a lower bound.
    pub value: f64,
    /// Upper bound after adding the Cauchy–Schwarz tail term per mode.
    pub upper: f64,
    pub tail_bound: f64,
    pub cutoffs: Vec<usize>,
}

/// Fidelity between two product count laws. Both are products over modes,
/// so the Bhattacharyya sum factorizes; each mode is summed until both
/// remaining masses drop below `tail_cap`.
pub fn count_fidelity(p: &CountDistribution, q: &CountDistribution, tail_cap: f64) -> Result<CountFidelity> {
    p.validate()?;
    q.validate()?;
    if p.modes() != q.modes() {
        return Err(Error::Dimension(format!("{} modes vs {}", p.modes(), q.modes())));
    }
    if !(tail_cap > 0.0 && tail_cap < 1.0) {
        return Err(Error::Parameter("tail cap must lie in (0, 1)".into()));
    }
    const MAX_LEN: usize = 1 << 22;
    let (mut lo, mut hi) = (1.0f64, 1.0f64);
    let mut cutoffs = Vec::with_capacity(p.modes());
    for i in 0..p.modes() {
        let (tp, rp) = p.mode_table(i, tail_cap, MAX_LEN);
        let (tq, rq) = q.mode_table(i, tail_cap, MAX_LEN);
        let len = tp.len().max(tq.len());
        let (tp, rp) = extend(p, i, tp, rp, len);
        let (tq, rq) = extend(q, i, tq, rq, len);
        let bc: f64 = tp.iter().zip(&tq).map(|(a, b)| (a * b).sqrt()).sum();
        lo *= bc;
        hi *= (bc + (rp * rq).sqrt()).min(1.0);
        cutoffs.push(len - 1);
    }
    let (value, upper) = (lo * lo, hi * hi);
    Ok(CountFidelity {
        value,
        upper,
        tail_bound: upper - value,
        cutoffs,
    })
}

fn extend(d: &CountDistribution, i: usize, mut t: Vec<f64>, mut rest: f64, len: usize) -> (Vec<f64>, f64) {
    while t.len() < len {
        let p = d.mode_pmf(i, t.len() as u64);
        rest = (rest - p).max(0.0);
        t.push(p);
    }
    (t, rest)
}
