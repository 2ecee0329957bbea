//! Phase-space picture: covariance matrices of coherent states and the
//! map from `SU(p,q)` to the real symplectic group.
//!
//! Quadratures are ordered `x_1..x_p, y_1..y_p, x'_1..x'_q, y'_1..y'_q`
//! with `ħ = 2`, so the vacuum has identity covariance.

use crate::error::{Error, Result};
use crate::hyperbolic::{DiscPoint, GroupElement, GROUP_TOL};
use crate::linalg::{self, CMat, RMat};

/// `S(X) = [[Re X, −Im X], [Im X, Re X]]`.
pub fn s_map(x: &CMat) -> RMat {
    let (r, c) = x.shape();
    RMat::from_fn(2 * r, 2 * c, |i, j| {
        let z = x[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// `T(Y) = [[Re Y, Im Y], [Im Y, −Re Y]]`.
pub fn t_map(y: &CMat) -> RMat {
    let (r, c) = y.shape();
    RMat::from_fn(2 * r, 2 * c, |i, j| {
        let z = y[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    })
}

/// `Ω_k = [[0, 1_k], [−1_k, 0]]`.
pub fn omega_block(k: usize) -> RMat {
    RMat::from_fn(2 * k, 2 * k, |i, j| {
        if j == i + k {
            1.0
        } else if i == j + k {
            -1.0
        } else {
            0.0
        }
    })
}

/// `Ω = Ω_p ⊕ Ω_q`.
pub fn omega(p: usize, q: usize) -> RMat {
    direct_sum(&omega_block(p), &omega_block(q))
}

pub fn direct_sum(a: &RMat, b: &RMat) -> RMat {
    let mut m = RMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut(a.shape(), b.shape()).copy_from(b);
    m
}

fn blocks(tl: &RMat, tr: &RMat, bl: &RMat, br: &RMat) -> RMat {
    let (r1, c1) = tl.shape();
    let (r2, c2) = br.shape();
    let mut m = RMat::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(tl);
    m.view_mut((0, c1), (r1, c2)).copy_from(tr);
    m.view_mut((r1, 0), (r2, c1)).copy_from(bl);
    m.view_mut((r1, c1), (r2, c2)).copy_from(br);
    m
}

/// Largest singular value beyond which [`covariance`] warns.
pub const CONDITIONING_LIMIT: f64 = 1.0 - 1e-6;

/// Covariance matrix `Γ_Λ` of `|Λ,1⟩`:
/// `[[S(ν), T(β)], [T(β)ᵀ, S(ν̃̄)]]` with `ν = (1+ΛΛ†)(1−ΛΛ†)⁻¹`,
/// `β = 2Λ(1−Λ†Λ)⁻¹`, `ν̃ = (1+Λ†Λ)(1−Λ†Λ)⁻¹`.
///
/// The lower block carries `ν̃` conjugated. That is what the singular-value
/// construction `Λ = UΣV†` produces, and without it `det Γ ≠ 1` for
/// complex `Λ` with `q ≥ 2`.
pub fn covariance(lambda: &DiscPoint) -> Result<RMat> {
    covariance_with(lambda, true)
}

/// The covariance with `S(ν̃)` unconjugated in the lower block. Agrees with
/// [`covariance`] for real `Λ`; kept to report how far it is from a pure state.
pub fn covariance_unconjugated(lambda: &DiscPoint) -> Result<RMat> {
    covariance_with(lambda, false)
}

fn covariance_with(lambda: &DiscPoint, conjugate: bool) -> Result<RMat> {
    let (p, q) = (lambda.p(), lambda.q());
    let l = lambda.matrix();
    let llh = l * l.adjoint();
    let lhl = l.adjoint() * l;
    let left = cholesky_inverse(&(linalg::identity(p) - &llh))?;
    let right = cholesky_inverse(&(linalg::identity(q) - &lhl))?;
    let top = (linalg::identity(p) + &llh) * &left;
    let bottom = (linalg::identity(q) + &lhl) * &right;
    let off = t_map(&(l * &right * linalg::c(2.0, 0.0)));
    let bottom = if conjugate { linalg::conj(&bottom) } else { bottom };
    Ok(blocks(&s_map(&top), &off, &off.transpose(), &s_map(&bottom)))
}

/// Whether the point sits close enough to the boundary to lose accuracy.
pub fn is_ill_conditioned(lambda: &DiscPoint) -> bool {
    lambda.spectral_norm() > CONDITIONING_LIMIT
}

fn cholesky_inverse(m: &CMat) -> Result<CMat> {
    let ch =
        nalgebra::Cholesky::new(m.clone()).ok_or_else(|| Error::Singular("1 − ΛΛ† is not positive definite".into()))?;
    Ok(ch.inverse())
}

/// `s(g) = [[S(A), T(B)], [T(C̄), S(D̄)]]`.
pub fn symplectic_of(g: &GroupElement) -> Result<RMat> {
    if !g.validate(GROUP_TOL) {
        return Err(Error::Parameter(format!(
            "not an element of SU(p,q) (residual {:e})",
            g.relation_residual()
        )));
    }
    Ok(symplectic_of_unchecked(g))
}

pub fn symplectic_of_unchecked(g: &GroupElement) -> RMat {
    blocks(
        &s_map(&g.a),
        &t_map(&g.b),
        &t_map(&linalg::conj(&g.c)),
        &s_map(&linalg::conj(&g.d)),
    )
}

/// `ḡ`, entrywise conjugate; again an element of `SU(p,q)`.
pub fn conjugate_element(g: &GroupElement) -> GroupElement {
    GroupElement {
        a: linalg::conj(&g.a),
        b: linalg::conj(&g.b),
        c: linalg::conj(&g.c),
        d: linalg::conj(&g.d),
    }
}

/// `Γ ↦ s(ḡ)ᵀ Γ s(ḡ)`, which sends `Γ(Λ)` to `Γ(Λ_g)`.
///
/// The Möbius map is a right action, so the transport is an
/// anti-homomorphism in `g`; the plain form `s(g) Γ s(g)ᵀ` does not hold.
pub fn transport(g: &GroupElement, gamma: &RMat) -> Result<RMat> {
    let s = symplectic_of(&conjugate_element(g))?;
    Ok(s.transpose() * gamma * s)
}

/// `max |Γ(Λ_g) − s(ḡ)ᵀ Γ(Λ) s(ḡ)|`.
pub fn transport_residual(g: &GroupElement, lambda: &DiscPoint) -> Result<f64> {
    let moved = covariance(&crate::hyperbolic::mobius_act(g, lambda)?)?;
    Ok(linalg::max_abs_diff_real(&moved, &transport(g, &covariance(lambda)?)?))
}

/// `max |Γ(g·Λ) − s(g) Γ(Λ) s(g)ᵀ|` with the left action `g·Λ = (AΛ+B)(CΛ+D)⁻¹`.
///
/// Same identity as [`transport_residual`], since `s(ḡ)ᵀ = s(gᵀ)` and
/// `Λ_g = gᵀ·Λ`.
pub fn left_transport_residual(g: &GroupElement, lambda: &DiscPoint) -> Result<f64> {
    let moved = covariance(&crate::hyperbolic::left_act(g, lambda)?)?;
    let s = symplectic_of(g)?;
    Ok(linalg::max_abs_diff_real(
        &moved,
        &(&s * covariance(lambda)? * s.transpose()),
    ))
}

/// `max |Γ(Λ_g) − s(g) Γ(Λ) s(g)ᵀ|`, mixing the right action with the
/// untransposed form; kept for reports.
pub fn plain_transport_residual(g: &GroupElement, lambda: &DiscPoint) -> Result<f64> {
    let moved = covariance(&crate::hyperbolic::mobius_act(g, lambda)?)?;
    let s = symplectic_of(g)?;
    Ok(linalg::max_abs_diff_real(
        &moved,
        &(&s * covariance(lambda)? * s.transpose()),
    ))
}

/// `max |Γ Ω Γᵀ − Ω|` and `|det Γ − 1|`.
pub fn pure_state_residuals(gamma: &RMat, p: usize, q: usize) -> (f64, f64) {
    let w = omega(p, q);
    (
        linalg::max_abs_diff_real(&(gamma * &w * gamma.transpose()), &w),
        (gamma.clone().determinant() - 1.0).abs(),
    )
}

/// `‖M Ω Mᵀ − Ω‖` in operator norm.
pub fn symplectic_residual(m: &RMat, p: usize, q: usize) -> f64 {
    let w = omega(p, q);
    linalg::spectral_norm_real(&(m * &w * m.transpose() - w))
}

/// `‖M Ω_k Mᵀ − Ω_k‖` for a single block form.
pub fn block_symplectic_residual(m: &RMat) -> f64 {
    let w = omega_block(m.nrows() / 2);
    linalg::spectral_norm_real(&(m * &w * m.transpose() - w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn vacuum_and_identity() {
        let g = covariance(&DiscPoint::zero(2, 1)).unwrap();
        assert!(linalg::max_abs_diff_real(&g, &RMat::identity(6, 6)) < 1e-15);
        let s = symplectic_of(&GroupElement::identity(1, 2)).unwrap();
        assert!(linalg::max_abs_diff_real(&s, &RMat::identity(6, 6)) < 1e-15);
        assert!(linalg::max_abs_diff_real(&s_map(&linalg::identity(3)), &RMat::identity(6, 6)) == 0.0);
    }

    #[test]
    fn two_mode_squeezed_example() {
        let g = covariance(&DiscPoint::diagonal(1, 1, &[0.6]).unwrap()).unwrap();
        let (nu, beta) = (2.125, 1.875);
        let want = RMat::from_row_slice(
            4,
            4,
            &[
                nu, 0.0, beta, 0.0, 0.0, nu, 0.0, -beta, beta, 0.0, nu, 0.0, 0.0, -beta, 0.0, nu,
            ],
        );
        assert!(linalg::max_abs_diff_real(&g, &want) < 1e-12);
    }

    #[test]
    fn hermitian_s_is_symmetric_and_unitary_s_is_symplectic() {
        let x = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.2, -0.7), c(0.2, 0.7), c(-0.4, 0.0)]);
        let sx = s_map(&x);
        assert!(linalg::max_abs_diff_real(&sx, &sx.transpose()) == 0.0);
        // S(X) Ω Sᵀ = S(X X†) Ω, so a Hermitian X is symplectic only if X² = 1
        assert!(block_symplectic_residual(&sx) > 0.1);
        let h = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert!(block_symplectic_residual(&s_map(&h)) < 1e-15);
        let u = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        assert!(block_symplectic_residual(&s_map(&u)) < 1e-15);
    }

    #[test]
    fn non_member_is_rejected() {
        let mut g = GroupElement::identity(1, 1);
        g.b[(0, 0)] = c(0.5, 0.0);
        assert!(symplectic_of(&g).is_err());
    }
}
