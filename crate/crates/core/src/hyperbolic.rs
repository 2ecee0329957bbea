//! The bounded domain `D_{p,q}` of `p×q` matrices with spectral norm below
//! one, the group `SU(p,q)` acting on it by matrix Möbius maps, and
//! importance sampling from the invariant measure.
//!
//! The Möbius map `Λ ↦ (AᵀΛ + Cᵀ)(BᵀΛ + Dᵀ)⁻¹` is a *right* action:
//! `act(g1·g2, Λ) = act(g2, act(g1, Λ))`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;

use crate::combinatorics::{factorial, ln_factorial};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};

/// Points with largest singular value at or above `1 - MEMBERSHIP_MARGIN`
/// are rejected.
pub const MEMBERSHIP_MARGIN: f64 = 1e-12;

/// Default tolerance for the group relations, in operator norm.
pub const GROUP_TOL: f64 = 1e-10;

/// Squeezing parameters are capped to keep `cosh` finite and well scaled.
pub const MAX_SQUEEZE: f64 = 5.0;

/// A point `Λ` of `D_{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscPoint {
    lambda: CMat,
}

impl DiscPoint {
    pub fn new(lambda: CMat) -> Result<Self> {
        if lambda.nrows() == 0 || lambda.ncols() == 0 {
            return Err(Error::Dimension("disc point needs p, q >= 1".into()));
        }
        let s = linalg::spectral_norm(&lambda);
        if s.is_nan() || s >= 1.0 - MEMBERSHIP_MARGIN {
            return Err(Error::Parameter(format!("spectral norm {s} is not below 1")));
        }
        Ok(Self { lambda })
    }

    pub fn zero(p: usize, q: usize) -> Self {
        Self {
            lambda: CMat::zeros(p, q),
        }
    }

    /// Row-major entries.
    pub fn from_entries(p: usize, q: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != p * q {
            return Err(Error::Dimension(format!(
                "expected {} entries, got {}",
                p * q,
                entries.len()
            )));
        }
        Self::new(CMat::from_row_slice(p, q, entries))
    }

    /// `σ · diag(1, …)` padded with zeros.
    pub fn diagonal(p: usize, q: usize, sigma: &[f64]) -> Result<Self> {
        let mut l = CMat::zeros(p, q);
        for (i, &s) in sigma.iter().enumerate().take(p.min(q)) {
            l[(i, i)] = c(s, 0.0);
        }
        Self::new(l)
    }

    /// Gaussian direction, spectral norm drawn uniformly in `[0, max_norm]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, p: usize, q: usize, max_norm: f64) -> Self {
        let g = linalg::ginibre(rng, p, q);
        let s = linalg::spectral_norm(&g).max(f64::MIN_POSITIVE);
        let target = rng.random::<f64>() * max_norm.min(1.0 - 1e-6);
        Self {
            lambda: g * c(target / s, 0.0),
        }
    }

    pub fn p(&self) -> usize {
        self.lambda.nrows()
    }

    pub fn q(&self) -> usize {
        self.lambda.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.lambda
    }

    pub fn spectral_norm(&self) -> f64 {
        linalg::spectral_norm(&self.lambda)
    }

    /// `det(1_p − ΛΛ†)`, real and positive.
    pub fn defect(&self) -> f64 {
        let m = linalg::identity(self.p()) - &self.lambda * self.lambda.adjoint();
        linalg::det(&m).re
    }

    /// `det(1_q − Λ†Λ)`; equal to [`Self::defect`] by Sylvester's identity.
    pub fn defect_right(&self) -> f64 {
        let m = linalg::identity(self.q()) - self.lambda.adjoint() * &self.lambda;
        linalg::det(&m).re
    }

    pub fn ln_defect(&self) -> f64 {
        let m = linalg::identity(self.p()) - &self.lambda * self.lambda.adjoint();
        linalg::hermitian_eigen(&m).0.iter().map(|e| e.ln()).sum()
    }
}

/// An element of `SU(p,q)` in block form `[[A, B], [C, D]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
}

impl GroupElement {
    pub fn from_blocks(a: CMat, b: CMat, c: CMat, d: CMat) -> Result<Self> {
        let (p, q) = (a.nrows(), d.nrows());
        let ok = a.shape() == (p, p) && b.shape() == (p, q) && c.shape() == (q, p) && d.shape() == (q, q);
        if !ok || p == 0 || q == 0 {
            return Err(Error::Dimension("blocks must be p×p, p×q, q×p, q×q".into()));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn from_matrix(g: &CMat, p: usize, q: usize) -> Result<Self> {
        if g.shape() != (p + q, p + q) {
            return Err(Error::Dimension("group element must be (p+q)×(p+q)".into()));
        }
        Self::from_blocks(
            g.view((0, 0), (p, p)).into_owned(),
            g.view((0, p), (p, q)).into_owned(),
            g.view((p, 0), (q, p)).into_owned(),
            g.view((p, p), (q, q)).into_owned(),
        )
    }

    pub fn identity(p: usize, q: usize) -> Self {
        Self {
            a: linalg::identity(p),
            b: CMat::zeros(p, q),
            c: CMat::zeros(q, p),
            d: linalg::identity(q),
        }
    }

    pub fn p(&self) -> usize {
        self.a.nrows()
    }

    pub fn q(&self) -> usize {
        self.d.nrows()
    }

    pub fn to_matrix(&self) -> CMat {
        let (p, q) = (self.p(), self.q());
        let mut g = CMat::zeros(p + q, p + q);
        g.view_mut((0, 0), (p, p)).copy_from(&self.a);
        g.view_mut((0, p), (p, q)).copy_from(&self.b);
        g.view_mut((p, 0), (q, p)).copy_from(&self.c);
        g.view_mut((p, p), (q, q)).copy_from(&self.d);
        g
    }

    /// `g_{U,V} = diag(Ū, V̄)`; in `SU(p,q)` when `det(UV) = 1`.
    pub fn g_uv(u: &CMat, v: &CMat) -> Result<Self> {
        let (p, q) = (u.nrows(), v.nrows());
        Self::from_blocks(linalg::conj(u), CMat::zeros(p, q), CMat::zeros(q, p), linalg::conj(v))
    }

    /// The squeezing element `h_R` for a diagonal `R` of length `min(p, q)`:
    /// `cosh R` on the diagonal blocks, `sinh R` off the diagonal.
    pub fn h_r(p: usize, q: usize, r: &[f64]) -> Result<Self> {
        if r.len() > p.min(q) {
            return Err(Error::Dimension("R has more than min(p, q) entries".into()));
        }
        let mut g = Self::identity(p, q);
        for (i, &x) in r.iter().enumerate() {
            let x = x.clamp(-MAX_SQUEEZE, MAX_SQUEEZE);
            g.a[(i, i)] = c(x.cosh(), 0.0);
            g.d[(i, i)] = c(x.cosh(), 0.0);
            g.b[(i, i)] = c(x.sinh(), 0.0);
            g.c[(i, i)] = c(x.sinh(), 0.0);
        }
        Ok(g)
    }

    /// The element sending the diagonal point `Σ = tanh R` to the origin.
    pub fn unsqueeze(sigma: &DiscPoint) -> Result<Self> {
        let (p, q) = (sigma.p(), sigma.q());
        let r: Vec<f64> = (0..p.min(q)).map(|i| -sigma.matrix()[(i, i)].re.atanh()).collect();
        Self::h_r(p, q, &r)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if (self.p(), self.q()) != (other.p(), other.q()) {
            return Err(Error::Dimension("signatures differ".into()));
        }
        Self::from_matrix(&(self.to_matrix() * other.to_matrix()), self.p(), self.q())
    }

    /// `g⁻¹ = η g† η` with `η = diag(1_p, −1_q)`.
    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.adjoint(),
            b: -self.c.adjoint(),
            c: -self.b.adjoint(),
            d: self.d.adjoint(),
        }
    }

    /// `gᵀ`, again an element of `SU(p,q)`.
    pub fn transpose(&self) -> Self {
        Self {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
        }
    }

    /// Worst violation among the three block relations and `|det g − 1|`.
    pub fn relation_residual(&self) -> f64 {
        let (p, q) = (self.p(), self.q());
        let r1 = &self.a * self.a.adjoint() - &self.b * self.b.adjoint() - linalg::identity(p);
        let r2 = &self.a * self.c.adjoint() - &self.b * self.d.adjoint();
        let r3 = &self.d * self.d.adjoint() - &self.c * self.c.adjoint() - linalg::identity(q);
        let det = (linalg::det(&self.to_matrix()) - c(1.0, 0.0)).norm();
        [
            linalg::spectral_norm(&r1),
            linalg::spectral_norm(&r2),
            linalg::spectral_norm(&r3),
            det,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn validate(&self, tol: f64) -> bool {
        self.relation_residual() <= tol
    }
}

/// Checks the block shapes, then the `SU(p,q)` relations.
pub fn validate_group_element(g: &GroupElement, tol: f64) -> Result<bool> {
    let (p, q) = (g.p(), g.q());
    let ok = g.a.shape() == (p, p) && g.b.shape() == (p, q) && g.c.shape() == (q, p) && g.d.shape() == (q, q);
    if !ok {
        return Err(Error::Dimension("blocks must be p×p, p×q, q×p, q×q".into()));
    }
    Ok(g.validate(tol))
}

/// `Λ_g = (AᵀΛ + Cᵀ)(BᵀΛ + Dᵀ)⁻¹`.
pub fn mobius_act(g: &GroupElement, lambda: &DiscPoint) -> Result<DiscPoint> {
    if (g.p(), g.q()) != (lambda.p(), lambda.q()) {
        return Err(Error::Dimension("group element and point disagree on (p, q)".into()));
    }
    let l = lambda.matrix();
    let num = g.a.transpose() * l + g.c.transpose();
    let den = g.b.transpose() * l + g.d.transpose();
    let inv = linalg::inverse(&den, "BᵀΛ + Dᵀ")?;
    DiscPoint::new(num * inv)
}

/// `g·Λ = (AΛ + B)(CΛ + D)⁻¹`, the left action; equals `Λ_{gᵀ}`.
pub fn left_act(g: &GroupElement, lambda: &DiscPoint) -> Result<DiscPoint> {
    mobius_act(&g.transpose(), lambda)
}

fn haar_pair<R: Rng + ?Sized>(rng: &mut R, p: usize, q: usize) -> (CMat, CMat) {
    let u = linalg::haar_unitary(rng, p);
    let mut v = linalg::haar_unitary(rng, q);
    // fix det(UV) = 1 by rotating one column of V
    let phase = linalg::det(&u) * linalg::det(&v);
    let fix = phase.conj() / phase.norm();
    for r in 0..q {
        v[(r, 0)] *= fix;
    }
    (u, v)
}

/// `g_{U2,V2} · h_R · g_{U1,V1}` with Haar unitaries and `R_i` uniform in
/// `[0, squeeze_scale]`.
pub fn random_group_element<R: Rng + ?Sized>(
    rng: &mut R,
    p: usize,
    q: usize,
    squeeze_scale: f64,
) -> Result<GroupElement> {
    if squeeze_scale.is_nan() || squeeze_scale < 0.0 || p == 0 || q == 0 {
        return Err(Error::Parameter("need p, q >= 1 and squeeze_scale >= 0".into()));
    }
    let (u1, v1) = haar_pair(rng, p, q);
    let (u2, v2) = haar_pair(rng, p, q);
    let r: Vec<f64> = (0..p.min(q)).map(|_| rng.random::<f64>() * squeeze_scale).collect();
    GroupElement::g_uv(&u2, &v2)?
        .mul(&GroupElement::h_r(p, q, &r)?)?
        .mul(&GroupElement::g_uv(&u1, &v1)?)
}

/// An exact rational multiple of a power of π.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiMultiple {
    pub rational: BigRational,
    pub pi_power: i32,
}

impl PiMultiple {
    pub fn to_f64(&self) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(self.pi_power)
    }
}

/// `C_n = π^{−pq} ∏_{i<q} (n−q+i)! / (n−p−q+i)!`.
pub fn normalization_constant(p: usize, q: usize, n: usize) -> Result<PiMultiple> {
    if n < p + q {
        return Err(Error::Parameter(format!(
            "C_n needs n >= p+q, got n={n}, p+q={}",
            p + q
        )));
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..q {
        num *= factorial((n - q + i) as u64);
        den *= factorial((n - p - q + i) as u64);
    }
    Ok(PiMultiple {
        rational: BigRational::new(num, den),
        pi_power: -((p * q) as i32),
    })
}

/// `ln C_n`, usable where the exact value would overflow a float.
pub fn ln_normalization_constant(p: usize, q: usize, n: usize) -> Result<f64> {
    if n < p + q {
        return Err(Error::Parameter(format!(
            "C_n needs n >= p+q, got n={n}, p+q={}",
            p + q
        )));
    }
    let s: f64 = (0..q)
        .map(|i| ln_factorial((n - q + i) as u64) - ln_factorial((n - p - q + i) as u64))
        .sum();
    Ok(s - (p * q) as f64 * std::f64::consts::PI.ln())
}

/// The measure `dμ_{p,q,n} = C_n det(1 − ΛΛ†)^{−(p+q)} dΛ` on `D_{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMeasureSpec {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub c_n: PiMultiple,
}

impl InvariantMeasureSpec {
    pub fn new(p: usize, q: usize, n: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Parameter("p, q must be positive".into()));
        }
        Ok(Self {
            p,
            q,
            n,
            c_n: normalization_constant(p, q, n)?,
        })
    }

    /// Density of `μ_{p,q,n}` with respect to Lebesgue measure on `ℂ^{pq}`.
    pub fn density(&self, lambda: &DiscPoint) -> f64 {
        self.c_n.to_f64() * lambda.defect().powi(-((self.p + self.q) as i32))
    }

    /// Radius of the Frobenius ball enclosing `D_{p,q}`.
    pub fn proposal_radius(&self) -> f64 {
        (self.p.min(self.q) as f64).sqrt()
    }

    /// Lebesgue volume of the enclosing ball in `ℝ^{2pq}`.
    pub fn proposal_volume(&self) -> f64 {
        let k = self.p * self.q;
        let r = self.proposal_radius();
        (k as f64 * std::f64::consts::PI.ln() + 2.0 * k as f64 * r.ln() - ln_factorial(k as u64)).exp()
    }
}

/// A draw from the importance sampler: `E[w · f(Λ)] = ∫ f dμ_{p,q,n}`.
/// Draws outside `D_{p,q}` carry `lambda = None` and weight zero.
#[derive(Debug, Clone)]
pub struct WeightedPoint {
    pub lambda: Option<DiscPoint>,
    pub weight: f64,
}

/// Uniform proposal on the Frobenius ball of radius `sqrt(min(p, q))`,
/// which contains `D_{p,q}`. The weight is the exact density ratio.
pub fn sample_invariant<R: Rng + ?Sized>(rng: &mut R, spec: &InvariantMeasureSpec) -> WeightedPoint {
    let (p, q) = (spec.p, spec.q);
    let dim = 2 * p * q;
    let g = linalg::ginibre(rng, p, q);
    let norm = g
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let radius = spec.proposal_radius() * rng.random::<f64>().powf(1.0 / dim as f64);
    let m: CMat = g * c(radius / norm, 0.0);
    match DiscPoint::new(m) {
        Ok(l) => {
            let weight = spec.density(&l) * spec.proposal_volume();
            WeightedPoint {
                lambda: Some(l),
                weight,
            }
        }
        Err(_) => WeightedPoint {
            lambda: None,
            weight: 0.0,
        },
    }
}

/// `η = diag(1_p, −1_q)`.
pub fn signature_form(p: usize, q: usize) -> CMat {
    DMatrix::from_fn(p + q, p + q, |i, j| match (i == j, i < p) {
        (true, true) => c(1.0, 0.0),
        (true, false) => c(-1.0, 0.0),
        _ => c(0.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::stream;

    #[test]
    fn identity_is_valid_and_scaled_identity_is_not() {
        let g = GroupElement::identity(2, 1);
        assert!(validate_group_element(&g, 1e-12).unwrap());
        let mut bad = g.clone();
        bad.a *= c(2.0, 0.0);
        assert!(!validate_group_element(&bad, 1e-12).unwrap());
    }

    #[test]
    fn shape_mismatch_is_dimension_error() {
        let g = GroupElement {
            a: linalg::identity(2),
            b: CMat::zeros(2, 2),
            c: CMat::zeros(1, 2),
            d: linalg::identity(1),
        };
        assert!(matches!(validate_group_element(&g, 1e-10), Err(Error::Dimension(_))));
    }

    #[test]
    fn unitary_pair_acts_by_u_dagger_lambda_v() {
        let mut rng = stream(1, "hyperbolic-unit", 0);
        let (u, v) = haar_pair(&mut rng, 2, 3);
        let g = GroupElement::g_uv(&u, &v).unwrap();
        assert!(g.validate(1e-12));
        let l = DiscPoint::random(&mut rng, 2, 3, 0.9);
        let got = mobius_act(&g, &l).unwrap();
        let want = u.adjoint() * l.matrix() * &v;
        assert!(linalg::max_abs_diff(got.matrix(), &want) < 1e-12);
    }

    #[test]
    fn squeeze_scale_zero_is_block_diagonal() {
        let mut rng = stream(2, "hyperbolic-unit", 0);
        let g = random_group_element(&mut rng, 2, 2, 0.0).unwrap();
        assert!(g.b.iter().chain(g.c.iter()).all(|z| z.norm() < 1e-12));
        assert!(g.validate(GROUP_TOL));
    }

    #[test]
    fn unsqueeze_sends_sigma_to_origin() {
        let s = DiscPoint::diagonal(2, 3, &[0.7, 0.2]).unwrap();
        let g = GroupElement::unsqueeze(&s).unwrap();
        assert!(mobius_act(&g, &s).unwrap().spectral_norm() < 1e-12);
    }

    #[test]
    fn normalization_examples() {
        let c3 = normalization_constant(1, 1, 3).unwrap();
        assert_eq!(c3.rational, BigRational::from_integer(2.into()));
        assert_eq!(c3.pi_power, -1);
        assert!((c3.to_f64() - std::f64::consts::FRAC_2_PI).abs() < 1e-15);
        assert_eq!(
            normalization_constant(2, 2, 4).unwrap().rational,
            BigRational::from_integer(12.into())
        );
        assert!(normalization_constant(1, 2, 2).is_err());
        let ln = ln_normalization_constant(2, 2, 4).unwrap();
        assert!((ln.exp() - 12.0 / std::f64::consts::PI.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn density_at_origin_is_c_n() {
        let spec = InvariantMeasureSpec::new(1, 1, 3).unwrap();
        assert!((spec.density(&DiscPoint::zero(1, 1)) - 2.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn sylvester_identity() {
        let mut rng = stream(3, "hyperbolic-unit", 0);
        for _ in 0..20 {
            let l = DiscPoint::random(&mut rng, 2, 3, 0.95);
            assert!((l.defect() - l.defect_right()).abs() < 1e-12);
            assert!((l.ln_defect() - l.defect().ln()).abs() < 1e-10);
        }
    }
}
