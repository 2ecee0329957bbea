use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{FockPoly, Layout, Monomial, DEFAULT_TERM_CAP};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::scalar::Scalar;

/// All exponent vectors of length `nvars` with the given total, in
/// graded-lex order.
pub(crate) fn compositions(nvars: usize, total: u32) -> Vec<Vec<u16>> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left as u16);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u16);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if total == 0 {
            out.push(vec![]);
        }
        return out;
    }
    rec(nvars, total, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// Polynomial in the invariants `Z_{i,j}`, variable `i*q + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZPoly<S> {
    pub p: usize,
    pub q: usize,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> ZPoly<S> {
    pub fn zero(p: usize, q: usize) -> Self {
        Self {
            p,
            q,
            terms: BTreeMap::new(),
        }
    }

    /// `c · prod Z_{i,j}^{e[i*q+j]}`.
    pub fn monomial(p: usize, q: usize, exps: Vec<u16>, c: S) -> Self {
        assert_eq!(exps.len(), p * q, "exponent table must be p x q");
        let mut z = Self::zero(p, q);
        z.add_term(Monomial::from_exps(exps), c);
        z
    }

    pub fn var(p: usize, q: usize, i: usize, j: usize) -> Self {
        let mut e = vec![0; p * q];
        e[i * q + j] = 1;
        Self::monomial(p, q, e, S::one())
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, S> {
        &self.terms
    }

    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&m) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(m, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.p, self.q);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn coeff(&self, exps: &[u16]) -> S {
        self.terms
            .get(&Monomial::from_exps(exps.to_vec()))
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// Product keeping only monomials of degree `<= max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        assert_eq!((self.p, self.q), (other.p, other.q), "Z-polynomials of different shape");
        let mut out = Self::zero(self.p, self.q);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if ma.degree() + mb.degree() <= max_degree {
                    out.add_term(ma.mul(mb), ca.clone() * cb.clone());
                }
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, u32::MAX)
    }

    /// Expand through `Z_{i,j} = sum_t z[t][i] z'[t][j]`.
    pub fn to_fock(&self, layout: Layout) -> Result<FockPoly<S>> {
        self.to_fock_capped(layout, DEFAULT_TERM_CAP)
    }

    pub fn to_fock_capped(&self, layout: Layout, cap: usize) -> Result<FockPoly<S>> {
        if layout.p != self.p || layout.q != self.q {
            return Err(Error::Dimension("Z-polynomial and layout disagree on (p, q)".into()));
        }
        let mut cache: BTreeMap<(usize, u16), FockPoly<S>> = BTreeMap::new();
        let mut out = FockPoly::zero(layout);
        for (m, c) in &self.terms {
            let mut term = FockPoly::constant(layout, c.clone());
            for (v, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let power = cache
                    .entry((v, e))
                    .or_insert_with(|| FockPoly::z_invariant(layout, v / self.q, v % self.q).pow(e as u32))
                    .clone();
                term = term.mul(&power);
                term.check_capacity(cap)?;
            }
            for (tm, tc) in term.terms() {
                out.add_term(tm.clone(), tc.clone());
            }
            out.check_capacity(cap)?;
        }
        Ok(out)
    }
}

/// The Z-monomials of degree at most `d`, expanded, with their Gram matrix.
///
/// For `n >= min(p, q)` these span the invariant subspace of degree `<= d`
/// and are linearly independent.
#[derive(Debug, Clone)]
pub struct InvariantBasis<S: Scalar> {
    pub layout: Layout,
    pub d: u32,
    pub z_monomials: Vec<Vec<u16>>,
    pub elements: Vec<FockPoly<S>>,
    pub gram: Vec<Vec<S>>,
}

impl<S: Scalar> InvariantBasis<S> {
    pub fn new(layout: Layout, d: u32) -> Result<Self> {
        let pq = layout.p * layout.q;
        let z_monomials: Vec<Vec<u16>> = (0..=d).flat_map(|k| compositions(pq, k)).collect();
        let elements = z_monomials
            .iter()
            .map(|e| ZPoly::monomial(layout.p, layout.q, e.clone(), S::one()).to_fock(layout))
            .collect::<Result<Vec<_>>>()?;
        let gram = elements
            .iter()
            .map(|a| elements.iter().map(|b| a.inner(b)).collect())
            .collect();
        Ok(Self {
            layout,
            d,
            z_monomials,
            elements,
            gram,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

impl InvariantBasis<Complex64> {
    /// Orthogonal projection onto the span, via the Gram matrix.
    pub fn project(&self, f: &FockPoly<Complex64>) -> Result<FockPoly<Complex64>> {
        let k = self.len();
        let g = CMat::from_fn(k, k, |a, b| self.gram[a][b]);
        let rhs = CMat::from_fn(k, 1, |a, _| self.elements[a].inner(f));
        let sol = g
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("invariant Gram matrix".into()))?;
        let mut out = FockPoly::zero(self.layout);
        for (a, e) in self.elements.iter().enumerate() {
            out = out.add(&e.scale(&sol[(a, 0)]));
        }
        Ok(out)
    }
}
