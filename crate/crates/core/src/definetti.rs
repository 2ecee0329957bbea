//! Normalization-constant arithmetic, the resolution of the identity, and a
//! fully computable instance of the Gaussian de Finetti theorem for `p = q = 1`.
//!
//! Trace distances follow the halved convention `‖A‖ = ½ tr|A|`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::bases::su11_basis_norm;
use crate::coherent::{overlap, su11_coefficients};
use crate::combinatorics::factorial;
use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockPoly, Layout};
use crate::hyperbolic::{normalization_constant, sample_invariant, DiscPoint, InvariantMeasureSpec};
use crate::linalg::{self, c, CMat};
use crate::quadrature::gauss_legendre;
use crate::stream::{self, SHARDS};

/// Parameters of one de Finetti experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DeFinettiParams {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub k: usize,
    /// Degree cap of the input state.
    pub d: usize,
    /// Extra degrees kept when projecting the mixture.
    pub extra_degree: usize,
}

impl DeFinettiParams {
    pub fn su11(n: usize, k: usize, d: usize) -> Self {
        Self {
            p: 1,
            q: 1,
            n,
            k,
            d,
            extra_degree: 4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.q == 0 {
            return Err(Error::Parameter("p, q must be positive".into()));
        }
        if self.k < self.p + self.q {
            return Err(Error::Parameter(format!("k must be at least p+q, got k={}", self.k)));
        }
        if self.n == 0 {
            return Err(Error::Parameter("n must be positive".into()));
        }
        Ok(())
    }
}

/// `C_k / C_{n+k}` in both of its product forms, with the bounds derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioBound {
    pub ratio: BigRational,
    pub ratio_double_product: BigRational,
    pub lower_bound: BigRational,
    pub definetti_bound: BigRational,
    /// `3/2 (1 − C_k/C_{n+k})`, the bound before simplification.
    pub chain_bound: BigRational,
}

impl RatioBound {
    pub fn forms_agree(&self) -> bool {
        self.ratio == self.ratio_double_product
    }

    /// `ratio ≥ lower_bound` and `chain_bound ≤ definetti_bound`.
    pub fn chain_holds(&self) -> bool {
        self.ratio >= self.lower_bound && self.chain_bound <= self.definetti_bound
    }
}

/// Exact `C_k/C_{n+k}`, computed as a factorial product and as a double
/// product, plus `1 − npq/(n+k−p−q+1)` and `3npq/(2(n+k−p−q))`.
pub fn ratio_and_bound(p: usize, q: usize, n: usize, k: usize) -> Result<RatioBound> {
    if p == 0 || q == 0 {
        return Err(Error::Parameter("p, q must be positive".into()));
    }
    if k < p + q {
        return Err(Error::Parameter(format!(
            "k must be at least p+q, got k={k}, p+q={}",
            p + q
        )));
    }
    let (pi, qi, ni, ki) = (p as i64, q as i64, n as i64, k as i64);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..qi {
        num *= factorial((ki - qi + i) as u64) * factorial((ni + ki - pi - qi + i) as u64);
        den *= factorial((ki - pi - qi + i) as u64) * factorial((ni + ki - qi + i) as u64);
    }
    let ratio = BigRational::new(num, den);
    let mut dp = BigRational::one();
    for i in 0..qi {
        for j in 1..=pi {
            dp *= BigRational::new(
                BigInt::from(ki - pi - qi + i + j),
                BigInt::from(ni + ki - pi - qi + i + j),
            );
        }
    }
    let npq = ni * pi * qi;
    let lower_bound = BigRational::one() - BigRational::new(npq.into(), (ni + ki - pi - qi + 1).into());
    // n = 0 makes the bound vanish, including the 0/0 case k = p+q
    let definetti_bound = if npq == 0 {
        BigRational::from_integer(0.into())
    } else {
        BigRational::new((3 * npq).into(), (2 * (ni + ki - pi - qi)).into())
    };
    let chain_bound = BigRational::new(3.into(), 2.into()) * (BigRational::one() - &ratio);
    Ok(RatioBound {
        ratio,
        ratio_double_product: dp,
        lower_bound,
        definetti_bound,
        chain_bound,
    })
}

/// `C_k / C_{n+k}` from the normalization constants themselves.
pub fn ratio_from_constants(p: usize, q: usize, n: usize, k: usize) -> Result<BigRational> {
    let ck = normalization_constant(p, q, k)?;
    let cnk = normalization_constant(p, q, n + k)?;
    debug_assert_eq!(ck.pi_power, cnk.pi_power);
    Ok(ck.rational / cnk.rational)
}

/// How the integral over the disk is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KernelMethod {
    /// Polar product rule for `p = q = 1`: Gauss–Legendre in the radius,
    /// uniform in the angle.
    Quadrature { radial: usize, angular: usize },
    /// Importance sampling through [`sample_invariant`].
    MonteCarlo { budget: usize, seed: u64 },
}

impl KernelMethod {
    pub const DEFAULT_QUADRATURE: Self = KernelMethod::Quadrature {
        radial: 200,
        angular: 256,
    };
}

/// Estimate of `∫ ⟨Λ1|Λ,n⟩⟨Λ,n|Λ2⟩ dμ_{p,q,n}` against the closed-form overlap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub estimate: Complex64,
    pub closed_form: Complex64,
    pub error: f64,
    /// Standard error of the estimate; absent for quadrature.
    pub std_error: Option<f64>,
    pub method: KernelMethod,
}

impl KernelCheck {
    /// Quadrature must hit `tol`; Monte Carlo must land within three
    /// standard errors.
    pub fn passes(&self, tol: f64) -> bool {
        match self.std_error {
            None => self.error <= tol,
            Some(se) => self.error <= 3.0 * se,
        }
    }
}

/// Polar nodes `(λ, weight)` on the unit disk for `∫ f d²λ`.
pub fn disk_rule(radial: usize, angular: usize) -> Vec<(Complex64, f64)> {
    let angular = angular.max(1);
    let dtheta = std::f64::consts::TAU / angular as f64;
    let mut nodes = Vec::with_capacity(radial * angular);
    for (r, w) in gauss_legendre(radial, 0.0, 1.0) {
        for a in 0..angular {
            nodes.push((Complex64::from_polar(r, a as f64 * dtheta), w * r * dtheta));
        }
    }
    nodes
}

fn su11_overlap(a: Complex64, b: Complex64, n: usize) -> Complex64 {
    let num = ((1.0 - a.norm_sqr()) * (1.0 - b.norm_sqr())).sqrt();
    (c(num, 0.0) / (c(1.0, 0.0) - a.conj() * b)).powu(n as u32)
}

/// `∫ ⟨Λ1|Λ,n⟩⟨Λ,n|Λ2⟩ dμ_{p,q,n}(Λ)` compared with `⟨Λ1,n|Λ2,n⟩`.
pub fn reproducing_kernel_check(l1: &DiscPoint, l2: &DiscPoint, n: usize, method: KernelMethod) -> Result<KernelCheck> {
    let (p, q) = (l1.p(), l1.q());
    if (l2.p(), l2.q()) != (p, q) {
        return Err(Error::Dimension("points live in different domains".into()));
    }
    let spec = InvariantMeasureSpec::new(p, q, n)?;
    let closed_form = overlap(l1, l2, n)?;
    match method {
        KernelMethod::Quadrature { radial, angular } => {
            if (p, q) != (1, 1) {
                return Err(Error::Parameter("quadrature path needs p = q = 1".into()));
            }
            let (a, b) = (l1.matrix()[(0, 0)], l2.matrix()[(0, 0)]);
            let cn = spec.c_n.to_f64();
            let nodes = disk_rule(radial, angular);
            let parts = stream::map_slice(&nodes, |&(lam, w)| {
                let dens = cn / (1.0 - lam.norm_sqr()).powi(2);
                su11_overlap(a, lam, n) * su11_overlap(lam, b, n) * (w * dens)
            });
            let estimate = pairwise_complex(&parts);
            Ok(KernelCheck {
                estimate,
                closed_form,
                error: (estimate - closed_form).norm(),
                std_error: None,
                method,
            })
        }
        KernelMethod::MonteCarlo { budget, seed } => {
            if budget < 2 * SHARDS {
                return Err(Error::Budget(format!("need at least {} samples", 2 * SHARDS)));
            }
            let budgets = stream::split_budget(budget, SHARDS);
            let shards = stream::map_shards(SHARDS, |s| {
                let mut rng = stream::stream(seed, "reproducing-kernel", s as u64);
                let mut acc = [0.0f64; 4];
                for _ in 0..budgets[s] {
                    let wp = sample_invariant(&mut rng, &spec);
                    let v = match wp.lambda {
                        Some(l) => {
                            let a = overlap(l1, &l, n).unwrap_or_default();
                            let b = overlap(&l, l2, n).unwrap_or_default();
                            a * b * wp.weight
                        }
                        None => c(0.0, 0.0),
                    };
                    acc[0] += v.re;
                    acc[1] += v.im;
                    acc[2] += v.re * v.re;
                    acc[3] += v.im * v.im;
                }
                acc
            });
            let mut tot = [0.0f64; 4];
            for s in &shards {
                for i in 0..4 {
                    tot[i] += s[i];
                }
            }
            let m = budget as f64;
            let estimate = c(tot[0] / m, tot[1] / m);
            let var_re = (tot[2] / m - estimate.re * estimate.re).max(0.0) / (m - 1.0);
            let var_im = (tot[3] / m - estimate.im * estimate.im).max(0.0) / (m - 1.0);
            Ok(KernelCheck {
                estimate,
                closed_form,
                error: (estimate - closed_form).norm(),
                std_error: Some((var_re + var_im).sqrt()),
                method,
            })
        }
    }
}

fn pairwise_complex(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => c(0.0, 0.0),
        1 => xs[0],
        len => {
            let (l, r) = xs.split_at(len / 2);
            pairwise_complex(l) + pairwise_complex(r)
        }
    }
}

fn pairwise_matrix(xs: &[CMat]) -> CMat {
    match xs.len() {
        1 => xs[0].clone(),
        len => {
            let (l, r) = xs.split_at(len / 2);
            pairwise_matrix(l) + pairwise_matrix(r)
        }
    }
}

/// `G[j,l] = ∫ ⟨ψ_j|λ,n⟩⟨λ,n|ψ_l⟩ dμ_{1,1,n}` for `j, l ≤ jmax` by polar
/// quadrature; the identity if the coherent states resolve the identity.
pub fn resolution_gram_su11(n: usize, jmax: usize, radial: usize, angular: usize) -> Result<CMat> {
    let cn = InvariantMeasureSpec::new(1, 1, n)?.c_n.to_f64();
    let nodes = disk_rule(radial, angular);
    let parts = stream::map_slice(&nodes, |&(lam, w)| {
        let v = su11_coefficients(lam, n, jmax);
        let s = w * cn / (1.0 - lam.norm_sqr()).powi(2);
        CMat::from_fn(jmax + 1, jmax + 1, |j, l| v[j] * v[l].conj() * s)
    });
    Ok(pairwise_matrix(&parts))
}

/// `Σ_j c_j ψ_{j,N}` as a polynomial in layout `(1, 1, N)`, where
/// `ψ_{j,N} = Z^j / ‖Z^j‖`.
pub fn su11_invariant_state(coeffs: &[Complex64], big_n: usize) -> Result<FockPoly<Complex64>> {
    let layout = Layout::new(1, 1, big_n)?;
    let z = FockPoly::<Complex64>::z_invariant(layout, 0, 0);
    let mut out = FockPoly::zero(layout);
    let mut power = FockPoly::constant(layout, c(1.0, 0.0));
    for (j, cj) in coeffs.iter().enumerate() {
        if j > 0 {
            power = power.mul(&z);
        }
        let norm = su11_basis_norm(big_n, j)?.to_f64().unwrap_or(f64::INFINITY).sqrt();
        out = out.add(&power.scale(&(cj / norm)));
    }
    Ok(out)
}

/// Normalized random coefficients with independent complex Gaussian entries.
pub fn random_invariant_coeffs<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..=d).map(|_| linalg::complex_gaussian(rng)).collect();
    normalized(v)
}

/// Coefficients of `|λ,N⟩` truncated to degree `d`, renormalized.
pub fn truncated_coherent_coeffs(lambda: Complex64, big_n: usize, d: usize) -> Vec<Complex64> {
    normalized(su11_coefficients(lambda, big_n, d))
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Coordinates of an invariant `(1,1,N)` state on `ψ_{j,N}`, `j ≤ d`, and
/// the norm of whatever lies outside that span.
pub fn su11_coordinates(state: &FockPoly<Complex64>, d: usize) -> Result<(Vec<Complex64>, f64)> {
    let layout = state.layout();
    if (layout.p, layout.q) != (1, 1) {
        return Err(Error::Parameter("state must live in layout (1, 1, N)".into()));
    }
    let unit = su11_invariant_state(&[c(1.0, 0.0)], layout.n)?;
    let mut rest = state.clone();
    let mut coords = Vec::with_capacity(d + 1);
    let z = FockPoly::<Complex64>::z_invariant(layout, 0, 0);
    let mut basis = unit;
    for j in 0..=d {
        if j > 0 {
            let norm_ratio = (su11_basis_norm(layout.n, j)?.to_f64().unwrap_or(f64::INFINITY)
                / su11_basis_norm(layout.n, j - 1)?.to_f64().unwrap_or(f64::INFINITY))
            .sqrt();
            basis = basis.mul(&z).scale(&c(1.0 / norm_ratio, 0.0));
        }
        let cj = basis.inner(state);
        rest = rest.sub(&basis.scale(&cj));
        coords.push(cj);
    }
    Ok((coords, rest.norm_sqr().re.max(0.0).sqrt()))
}

/// `tr_k |ψ⟩⟨ψ|` for `ψ = Σ c_j ψ_{j,n+k}`, on the `ψ_{a,n}` basis, `a ≤ dim−1`.
///
/// Expanding `Z_N^j = Σ binom(j,a) Z_A^a Z_B^{j−a}` and using that distinct
/// powers of `Z_B` are orthogonal gives the reduced state directly.
pub fn reduced_state_su11(coeffs: &[Complex64], n: usize, k: usize, dim: usize) -> Result<CMat> {
    let big_n = n + k;
    let norm = |m: usize, j: usize| -> Result<f64> { Ok(su11_basis_norm(m, j)?.to_f64().unwrap_or(f64::INFINITY)) };
    let d = coeffs.len().saturating_sub(1);
    if dim <= d {
        return Err(Error::Dimension(format!("reduced state needs dimension > {d}")));
    }
    let mut rho = CMat::zeros(dim, dim);
    for b in 0..=d {
        let wb = norm(k, b)?;
        let v: Vec<Complex64> = (0..dim)
            .map(|a| {
                if a + b > d {
                    return Ok(c(0.0, 0.0));
                }
                let binom = crate::combinatorics::binomial((a + b) as i64, a as i64)
                    .to_f64()
                    .unwrap_or(f64::NAN);
                Ok(coeffs[a + b] * (binom * (norm(n, a)? / norm(big_n, a + b)?).sqrt()))
            })
            .collect::<Result<_>>()?;
        for i in 0..dim {
            for j in 0..dim {
                rho[(i, j)] += v[i] * v[j].conj() * wb;
            }
        }
    }
    Ok(rho)
}

/// `tr_k |ψ⟩⟨ψ|` through the Fock engine, expressed on `ψ_{a,n}`, `a < dim`.
pub fn reduced_state_fock(state: &FockPoly<Complex64>, n: usize, dim: usize) -> Result<CMat> {
    let rho = FockOperator::projector(state).trace_replicas(n)?;
    let basis = {
        let mut v = Vec::with_capacity(dim);
        for a in 0..dim {
            let mut e = vec![c(0.0, 0.0); a + 1];
            e[a] = c(1.0, 0.0);
            v.push(su11_invariant_state(&e, n)?);
        }
        v
    };
    let images: Vec<FockPoly<Complex64>> = basis.iter().map(|u| rho.apply(u)).collect();
    Ok(CMat::from_fn(dim, dim, |i, j| basis[i].inner(&images[j])))
}

/// The de Finetti mixture `C_k ∫ ν(λ) |λ,n⟩⟨λ,n| dμ_{1,1}` with
/// `ν(λ) = |⟨λ,n+k|ψ⟩|²`, on `ψ_{a,n}`, `a < dim`, by polar quadrature.
///
/// After the angular average every entry is a polynomial in the radius,
/// so the default node counts make the rule exact up to rounding.
pub fn definetti_mixture(coeffs: &[Complex64], n: usize, k: usize, dim: usize) -> Result<CMat> {
    let ck = normalization_constant(1, 1, k)?.to_f64();
    let big_n = n + k;
    let d = coeffs.len().saturating_sub(1);
    let poly_degree = 2 * (big_n + n) + 2 * (d + dim);
    let radial = (poly_degree / 2 + 2).max(64);
    let angular = (2 * (d + dim) + 2).max(64);
    let nodes = disk_rule(radial, angular);
    let parts = stream::map_slice(&nodes, |&(lam, w)| {
        let big = su11_coefficients(lam, big_n, d);
        let amp: Complex64 = big.iter().zip(coeffs).map(|(b, cj)| b.conj() * cj).sum();
        let nu = amp.norm_sqr();
        let v = su11_coefficients(lam, n, dim - 1);
        let s = w * ck * nu / (1.0 - lam.norm_sqr()).powi(2);
        CMat::from_fn(dim, dim, |i, j| v[i] * v[j].conj() * s)
    });
    Ok(pairwise_matrix(&parts))
}

/// Outcome of one truncated de Finetti comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeFinettiGap {
    pub params: DeFinettiParams,
    /// `½ tr|tr_k ρ − P M P|` on degrees `≤ d + extra_degree`.
    pub distance: f64,
    pub stated_bound: f64,
    /// `3/2 (1 − C_k/C_{n+k})`.
    pub chain_bound: f64,
    /// Trace norm cost of dropping the mixture above the projection degree.
    pub truncation_bound: f64,
    /// Mixture weight above the projection degree.
    pub tail: f64,
    pub mixture_trace: f64,
    /// `C_k / C_{n+k}`, the trace of the full mixture.
    pub mixture_full_trace: f64,
    pub mixture_min_eigenvalue: f64,
    pub reduced_trace: f64,
    pub passes: bool,
}

/// Compare `tr_k |ψ⟩⟨ψ|` with the coherent-state mixture for an invariant
/// `p = q = 1` state on `n + k` replicas.
pub fn definetti_gap(state: &FockPoly<Complex64>, params: &DeFinettiParams) -> Result<DeFinettiGap> {
    params.validate()?;
    if (params.p, params.q) != (1, 1) {
        return Err(Error::Parameter(
            "the computable de Finetti experiment needs p = q = 1".into(),
        ));
    }
    let layout = state.layout();
    if (layout.p, layout.q, layout.n) != (1, 1, params.n + params.k) {
        return Err(Error::Dimension("state layout must be (1, 1, n+k)".into()));
    }
    let residual = state.max_invariance_residual();
    if residual > 1e-10 {
        return Err(Error::NotInvariant(residual));
    }
    let (coeffs, outside) = su11_coordinates(state, params.d)?;
    if outside > 1e-10 {
        return Err(Error::Parameter(format!(
            "state has weight {outside:e} above degree {}",
            params.d
        )));
    }
    let dim = params.d + params.extra_degree + 1;
    let reduced = reduced_state_fock(state, params.n, dim)?;
    gap_from_reduced(&coeffs, reduced, params)
}

/// Same as [`definetti_gap`] but for a state given by its `ψ_{j,n+k}`
/// coordinates, with the reduced state from the closed form.
pub fn definetti_gap_coeffs(coeffs: &[Complex64], params: &DeFinettiParams) -> Result<DeFinettiGap> {
    params.validate()?;
    if (params.p, params.q) != (1, 1) {
        return Err(Error::Parameter(
            "the computable de Finetti experiment needs p = q = 1".into(),
        ));
    }
    if coeffs.len() != params.d + 1 {
        return Err(Error::Dimension(format!("expected {} coefficients", params.d + 1)));
    }
    let dim = params.d + params.extra_degree + 1;
    let reduced = reduced_state_su11(coeffs, params.n, params.k, dim)?;
    gap_from_reduced(coeffs, reduced, params)
}

fn gap_from_reduced(coeffs: &[Complex64], reduced: CMat, params: &DeFinettiParams) -> Result<DeFinettiGap> {
    let dim = reduced.nrows();
    let mixture = definetti_mixture(coeffs, params.n, params.k, dim)?;
    let rb = ratio_and_bound(1, 1, params.n, params.k)?;
    let full = rb.ratio.to_f64().unwrap_or(f64::NAN);
    let mixture_trace = mixture.trace().re;
    let tail = (full - mixture_trace).max(0.0);
    // ‖M − PMP‖₁ ≤ tr(QMQ) + 2‖PMQ‖₁ ≤ t + 2 sqrt(tr(PMP) t) for PSD M
    let truncation_bound = 0.5 * (tail + 2.0 * (mixture_trace.max(0.0) * tail).sqrt());
    let distance = linalg::half_trace_norm(&(&reduced - &mixture));
    let stated_bound = rb.definetti_bound.to_f64().unwrap_or(f64::NAN);
    let (eigs, _) = linalg::hermitian_eigen(&mixture);
    Ok(DeFinettiGap {
        params: *params,
        distance,
        stated_bound,
        chain_bound: rb.chain_bound.to_f64().unwrap_or(f64::NAN),
        truncation_bound,
        tail,
        mixture_trace,
        mixture_full_trace: full,
        mixture_min_eigenvalue: eigs.first().copied().unwrap_or(0.0),
        reduced_trace: reduced.trace().re,
        passes: distance <= stated_bound + truncation_bound,
    })
}
