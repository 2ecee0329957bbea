//! `SU(p,q)` coherent states `|Λ,n⟩ = det(1 − ΛΛ†)^{n/2} exp(tr ΛᵀZ)`.
//!
//! Overlap phase convention:
//! `⟨Λ1,n|Λ2,n⟩ = [det(1−Λ1Λ1†)^{1/2} det(1−Λ2Λ2†)^{1/2} / det(1 − Λ1†Λ2)]^n`,
//! antilinear in the first slot like [`FockPoly::inner`].

use num_complex::Complex64;

use crate::combinatorics::ln_binomial;
use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockPoly, Layout, DEFAULT_TERM_CAP};
use crate::hyperbolic::{ln_normalization_constant, DiscPoint};
use crate::linalg::{self, c};
use crate::scalar::Scalar;

/// `|Λ,n⟩` for a point of `D_{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub lambda: DiscPoint,
    pub n: usize,
}

impl CoherentState {
    pub fn new(lambda: DiscPoint, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("n must be positive".into()));
        }
        Ok(Self { lambda, n })
    }

    pub fn layout(&self) -> Layout {
        Layout {
            p: self.lambda.p(),
            q: self.lambda.q(),
            n: self.n,
        }
    }

    /// `det(1 − ΛΛ†)^{n/2}`.
    pub fn normalization(&self) -> f64 {
        (0.5 * self.n as f64 * self.lambda.ln_defect()).exp()
    }

    /// Row-major entries of `Λ`.
    pub fn entries(&self) -> Vec<Complex64> {
        let l = self.lambda.matrix();
        (0..l.nrows())
            .flat_map(|i| (0..l.ncols()).map(move |j| l[(i, j)]))
            .collect()
    }
}

/// `Σ_{m≤d} (tr ΛᵀZ)^m / m!` with `lambda` row-major `p×q`, unnormalized.
pub fn exp_series<S: Scalar>(layout: Layout, lambda: &[S], d: u32) -> Result<FockPoly<S>> {
    if lambda.len() != layout.p * layout.q {
        return Err(Error::Dimension("Λ must have p·q entries".into()));
    }
    let mut x = FockPoly::zero(layout);
    for i in 0..layout.p {
        for j in 0..layout.q {
            let l = &lambda[i * layout.q + j];
            if !l.is_zero() {
                x = x.add(&FockPoly::z_invariant(layout, i, j).scale(l));
            }
        }
    }
    let mut term = FockPoly::constant(layout, S::one());
    let mut sum = term.clone();
    for m in 1..=d {
        term = term.mul(&x).scale(&S::recip_u64(m as u64));
        sum = sum.add(&term);
        sum.check_capacity(DEFAULT_TERM_CAP)?;
    }
    Ok(sum)
}

/// Degree-`d` truncation of `|Λ,n⟩` as a polynomial in the `z`, `z'` variables.
pub fn expand(state: &CoherentState, d: u32) -> Result<FockPoly<Complex64>> {
    Ok(exp_series(state.layout(), &state.entries(), d)?.scale(&c(state.normalization(), 0.0)))
}

fn check_pair(l1: &DiscPoint, l2: &DiscPoint) -> Result<()> {
    if (l1.p(), l1.q()) != (l2.p(), l2.q()) {
        return Err(Error::Dimension("points live in different domains".into()));
    }
    Ok(())
}

/// `|⟨Λ1,n|Λ2,n⟩|²`, computed in logs.
pub fn fidelity(l1: &DiscPoint, l2: &DiscPoint, n: usize) -> Result<f64> {
    check_pair(l1, l2)?;
    let cross = linalg::identity(l1.p()) - l1.matrix() * l2.matrix().adjoint();
    let ln_cross = linalg::det(&cross).norm().ln();
    Ok((n as f64 * (l1.ln_defect() + l2.ln_defect() - 2.0 * ln_cross))
        .exp()
        .min(1.0))
}

/// `⟨Λ1,n|Λ2,n⟩` with the phase convention of this module.
pub fn overlap(l1: &DiscPoint, l2: &DiscPoint, n: usize) -> Result<Complex64> {
    check_pair(l1, l2)?;
    let cross = linalg::identity(l1.q()) - l1.matrix().adjoint() * l2.matrix();
    let one = (0.5 * (l1.ln_defect() + l2.ln_defect())).exp() / linalg::det(&cross);
    Ok(one.powi(n as i32))
}

/// Series oracle for [`overlap`]: the Bargmann inner product of the two
/// degree-`d` truncations.
///
/// The `n`-replica exponential factorizes, so the degree-`k` inner products
/// are the coefficients of `G(s)^n`, where `G(s) = Σ_k s^k ⟨x_k, y_k⟩` is
/// built from exact single-replica expansions.
pub fn truncated_overlap(l1: &DiscPoint, l2: &DiscPoint, n: usize, d: u32) -> Result<Complex64> {
    check_pair(l1, l2)?;
    let single = Layout::new(l1.p(), l1.q(), 1)?;
    let a = CoherentState::new(l1.clone(), 1)?;
    let b = CoherentState::new(l2.clone(), 1)?;
    let xa = z_invariant_sum(single, &a.entries());
    let xb = z_invariant_sum(single, &b.entries());
    let mut g = Vec::with_capacity(d as usize + 1);
    let mut ta = FockPoly::constant(single, c(1.0, 0.0));
    let mut tb = ta.clone();
    for k in 0..=d {
        if k > 0 {
            ta = ta.mul(&xa).scale(&c(1.0 / k as f64, 0.0));
            tb = tb.mul(&xb).scale(&c(1.0 / k as f64, 0.0));
        }
        g.push(ta.inner(&tb));
    }
    let mut power = vec![c(0.0, 0.0); d as usize + 1];
    power[0] = c(1.0, 0.0);
    for _ in 0..n {
        let mut next = vec![c(0.0, 0.0); d as usize + 1];
        for (i, pi) in power.iter().enumerate() {
            for (j, gj) in g.iter().enumerate().take(d as usize + 1 - i) {
                next[i + j] += pi * gj;
            }
        }
        power = next;
    }
    let total: Complex64 = power.iter().sum();
    Ok(total * (0.5 * n as f64 * (l1.ln_defect() + l2.ln_defect())).exp())
}

fn z_invariant_sum(layout: Layout, lambda: &[Complex64]) -> FockPoly<Complex64> {
    let mut x = FockPoly::zero(layout);
    for i in 0..layout.p {
        for j in 0..layout.q {
            x = x.add(&FockPoly::z_invariant(layout, i, j).scale(&lambda[i * layout.q + j]));
        }
    }
    x
}

/// Coefficients of `|λ,n⟩` on the orthonormal `SU(1,1)` basis `ψ_{k,n}`,
/// `k ≤ d`: `(1−|λ|²)^{n/2} sqrt(binom(n+k−1,k)) λ^k`.
pub fn su11_coefficients(lambda: Complex64, n: usize, d: usize) -> Vec<Complex64> {
    let r2 = lambda.norm_sqr();
    let base = 0.5 * n as f64 * (1.0 - r2).ln();
    let mut pow = c(1.0, 0.0);
    (0..=d)
        .map(|k| {
            if k > 0 {
                pow *= lambda;
            }
            let mag = (base + 0.5 * ln_binomial((n + k - 1) as f64, k as f64)).exp();
            pow * mag
        })
        .collect()
}

/// `Q_ρ(Λ) = C_n ⟨Λ,n|ρ|Λ,n⟩ / det(1 − ΛΛ†)^{p+q}` for an operator on the
/// truncated Fock space of layout `(p, q, n)`.
pub fn husimi(rho: &FockOperator<Complex64>, lambda: &DiscPoint, n: usize) -> Result<f64> {
    let l = rho.layout();
    if (l.p, l.q, l.n) != (lambda.p(), lambda.q(), n) {
        return Err(Error::Dimension("operator layout does not match (p, q, n)".into()));
    }
    let ln_cn = ln_normalization_constant(l.p, l.q, n)?;
    let d = rho.support().iter().map(|m| m.z_degree(&l)).max().unwrap_or(0);
    let psi = expand(&CoherentState::new(lambda.clone(), n)?, d)?;
    let value = rho.expectation(&psi).re;
    Ok(value * (ln_cn - (l.p + l.q) as f64 * lambda.ln_defect()).exp())
}

/// Husimi function of a `p = q = 1` density matrix given on the `ψ_{k,n}`
/// basis.
pub fn husimi_su11(rho: &linalg::CMat, lambda: Complex64, n: usize) -> Result<f64> {
    if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
        return Err(Error::Dimension("density matrix must be square".into()));
    }
    if lambda.norm() >= 1.0 {
        return Err(Error::Parameter("|λ| must be below 1".into()));
    }
    let ln_cn = ln_normalization_constant(1, 1, n)?;
    let v = su11_coefficients(lambda, n, rho.nrows() - 1);
    let mut e = c(0.0, 0.0);
    for a in 0..v.len() {
        for b in 0..v.len() {
            e += v[a].conj() * rho[(a, b)] * v[b];
        }
    }
    Ok(e.re * (ln_cn - 2.0 * (1.0 - lambda.norm_sqr()).ln()).exp())
}
