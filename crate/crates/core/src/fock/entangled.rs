use num_complex::Complex64;

use super::{FockOperator, FockPoly, Layout, Monomial, DEFAULT_TERM_CAP};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Scalar;

/// Layout of the doubled system carrying `Φ`: `p+q` columns on each side.
pub fn maximally_entangled_layout(p: usize, q: usize, n: usize) -> Result<Layout> {
    Layout::new(p + q, p + q, n)
}

/// `Φ^{<=d} = sum_{m<=d} X^m / m!` with
/// `X = sum_{i<p} Z_{i,q+i} + sum_{j<q} Z_{p+j,j}`.
///
/// The first copy is `z[·][0..p]`, `z'[·][0..q]`; its partner variables are
/// `z'[·][q..q+p]` and `z[·][p..p+q]`.
pub fn maximally_entangled<S: Scalar>(p: usize, q: usize, n: usize, d: u32) -> Result<FockPoly<S>> {
    let layout = maximally_entangled_layout(p, q, n)?;
    let mut x = FockPoly::zero(layout);
    for i in 0..p {
        x = x.add(&FockPoly::z_invariant(layout, i, q + i));
    }
    for j in 0..q {
        x = x.add(&FockPoly::z_invariant(layout, p + j, j));
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

/// Mask of the second-copy variables in the doubled layout.
pub(crate) fn second_copy_mask(p: usize, q: usize, doubled: &Layout) -> Vec<bool> {
    (0..doubled.nvars())
        .map(|v| {
            let col = doubled.col(v);
            if doubled.is_z(v) {
                col >= p
            } else {
                col >= q
            }
        })
        .collect()
}

/// First-copy exponent vector (layout `(p, q, n)`) of a doubled monomial.
fn first_copy(m: &Monomial, p: usize, q: usize, doubled: &Layout) -> Monomial {
    let n = doubled.n;
    let single = Layout { p, q, n };
    let mut e = vec![0u16; single.nvars()];
    for t in 0..n {
        for i in 0..p {
            e[single.z(t, i)] = m.exps()[doubled.z(t, i)];
        }
        for j in 0..q {
            e[single.zp(t, j)] = m.exps()[doubled.zp(t, j)];
        }
    }
    Monomial::from_exps(e)
}

/// Replace the first-copy part of a doubled monomial.
fn with_first_copy(m: &Monomial, first: &Monomial, p: usize, q: usize, doubled: &Layout) -> Monomial {
    let single = Layout { p, q, n: doubled.n };
    let mut e = m.exps().to_vec();
    for t in 0..doubled.n {
        for i in 0..p {
            e[doubled.z(t, i)] = first.exps()[single.z(t, i)];
        }
        for j in 0..q {
            e[doubled.zp(t, j)] = first.exps()[single.zp(t, j)];
        }
    }
    Monomial::from_exps(e)
}

/// `(X ⊗ 1) ψ` for an operator `X` on the first copy.
pub fn apply_on_first_copy<S: Scalar>(op: &FockOperator<S>, psi: &FockPoly<S>) -> Result<FockPoly<S>> {
    let single = op.layout();
    let doubled = psi.layout();
    if doubled != maximally_entangled_layout(single.p, single.q, single.n)? {
        return Err(Error::Dimension("state is not on the doubled layout".into()));
    }
    let (p, q) = (single.p, single.q);
    let mut out = FockPoly::zero(doubled);
    for (m, c) in psi.terms() {
        let a = first_copy(m, p, q, &doubled);
        let weight = a.factorial::<S>();
        for ((k, b), x) in op.entries() {
            if *b == a {
                let nm = with_first_copy(m, k, p, q, &doubled);
                out.add_term(nm, x.clone() * c.clone() * weight.clone());
            }
        }
    }
    Ok(out)
}

/// `(sqrt(ρ) ⊗ 1) Φ^{<=d}` for a positive operator `ρ` supported on
/// first-copy monomials of degree `<= d`.
pub fn purify(rho: &FockOperator<Complex64>, d: u32) -> Result<FockPoly<Complex64>> {
    let l = rho.layout();
    let basis = rho.support();
    if basis.iter().any(|m| m.degree() > d) {
        return Err(Error::Parameter(
            "operator support exceeds the truncation degree".into(),
        ));
    }
    let root = linalg::psd_sqrt(&rho.to_dense(&basis));
    let sqrt_rho = FockOperator::from_dense(l, &basis, &root);
    let phi = maximally_entangled::<Complex64>(l.p, l.q, l.n, d)?;
    apply_on_first_copy(&sqrt_rho, &phi)
}

/// Trace out the second copy of a doubled-layout operator.
pub fn trace_second_copy<S: Scalar>(op: &FockOperator<S>, p: usize, q: usize) -> Result<FockOperator<S>> {
    let doubled = op.layout();
    let mask = second_copy_mask(p, q, &doubled);
    op.partial_trace(&mask, Layout::new(p, q, doubled.n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussRational;

    #[test]
    fn zero_degree_is_one() {
        let phi = maximally_entangled::<GaussRational>(1, 1, 2, 0).unwrap();
        assert_eq!(phi.len(), 1);
        assert_eq!(phi.norm_sqr(), GaussRational::one());
    }

    #[test]
    fn norm_counts_tables() {
        // ||Φ^{<=d}||^2 = number of exponent tables with |M| <= d
        for &(p, q, n, d) in &[(1, 1, 1, 3), (1, 1, 2, 2), (1, 2, 1, 2)] {
            let phi = maximally_entangled::<GaussRational>(p, q, n, d).unwrap();
            let tables = crate::combinatorics::binomial((n * (p + q)) as i64 + d as i64, d as i64);
            assert_eq!(phi.norm_sqr(), GaussRational::from_bigint(&tables));
        }
    }
}
