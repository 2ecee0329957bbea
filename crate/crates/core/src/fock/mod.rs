//! Exact truncated Segal–Bargmann engine.
//!
//! A state of `n(p+q)` bosonic modes is a holomorphic polynomial in the
//! variables `z[t][i]` (`t < n`, `i < p`) and `z'[t][j]` (`j < q`). Monomials
//! are orthogonal for the Bargmann inner product with `<z^M, z^M> = M!`, so
//! every computation below is finite sparse algebra.
//!
//! Variables are flattened as `z[t][i] -> t*p + i` followed by
//! `z'[t][j] -> n*p + t*q + j`.

mod entangled;
mod json;
mod kernel;
mod operator;
mod zpoly;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::Scalar;

pub use entangled::{apply_on_first_copy, maximally_entangled, maximally_entangled_layout, purify, trace_second_copy};
pub use json::{CanonicalOperator, CanonicalPoly, CanonicalTerm};
pub use kernel::{
    invariant_subspace_dim, invariant_subspace_dim_unreduced, laplacian_kernel_dim_in_invariants, KernelReport,
};
pub use operator::{twirl, FockOperator};
pub use zpoly::{InvariantBasis, ZPoly};

/// Refuse expansions with more terms than this unless told otherwise.
pub const DEFAULT_TERM_CAP: usize = 2_000_000;

/// Shape of the mode table: `p` columns of `z`, `q` columns of `z'`, `n` replicas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Layout {
    pub p: usize,
    pub q: usize,
    pub n: usize,
}

impl Layout {
    pub fn new(p: usize, q: usize, n: usize) -> Result<Self> {
        if p == 0 || q == 0 || n == 0 {
            return Err(Error::Parameter(format!(
                "layout needs p, q, n >= 1 (got p={p}, q={q}, n={n})"
            )));
        }
        Ok(Self { p, q, n })
    }

    pub fn nvars(&self) -> usize {
        self.n * (self.p + self.q)
    }

    pub fn z(&self, t: usize, i: usize) -> usize {
        debug_assert!(t < self.n && i < self.p);
        t * self.p + i
    }

    pub fn zp(&self, t: usize, j: usize) -> usize {
        debug_assert!(t < self.n && j < self.q);
        self.n * self.p + t * self.q + j
    }

    pub fn is_z(&self, v: usize) -> bool {
        v < self.n * self.p
    }

    /// Replica row of a variable.
    pub fn row(&self, v: usize) -> usize {
        if self.is_z(v) {
            v / self.p
        } else {
            (v - self.n * self.p) / self.q
        }
    }

    /// Column of a variable within its block.
    pub fn col(&self, v: usize) -> usize {
        if self.is_z(v) {
            v % self.p
        } else {
            (v - self.n * self.p) % self.q
        }
    }

    /// Same columns, different number of replicas.
    pub fn with_replicas(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    fn var_name(&self, v: usize) -> String {
        if self.is_z(v) {
            format!("z{}_{}", self.row(v) + 1, self.col(v) + 1)
        } else {
            format!("w{}_{}", self.row(v) + 1, self.col(v) + 1)
        }
    }
}

/// Exponent vector over the flattened variables.
///
/// Ordered graded-lexicographically: lower total degree first, ties broken
/// by the first differing exponent, larger exponent first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u16]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars].into_boxed_slice())
    }

    pub fn from_exps(exps: Vec<u16>) -> Self {
        Self(exps.into_boxed_slice())
    }

    pub fn var(nvars: usize, v: usize) -> Self {
        let mut e = vec![0; nvars];
        e[v] = 1;
        Self::from_exps(e)
    }

    pub fn exps(&self) -> &[u16] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// Exponent of `v` shifted by `delta`, or `None` if it would go negative.
    pub fn shifted(&self, v: usize, delta: i32) -> Option<Monomial> {
        let e = self.0[v] as i32 + delta;
        if e < 0 {
            return None;
        }
        let mut out = self.0.clone();
        out[v] = e as u16;
        Some(Monomial(out))
    }

    /// Degree in the `z` block.
    pub fn z_degree(&self, layout: &Layout) -> u32 {
        self.0[..layout.n * layout.p].iter().map(|&e| e as u32).sum()
    }

    /// Degree in the `z'` block.
    pub fn zp_degree(&self, layout: &Layout) -> u32 {
        self.0[layout.n * layout.p..].iter().map(|&e| e as u32).sum()
    }

    /// `M!` in the requested scalar field.
    pub fn factorial<S: Scalar>(&self) -> S {
        S::from_multi_factorial(&self.0)
    }

    /// Canonical text key `a,b,..|c,d,..` (z block, then z' block).
    pub fn key(&self, layout: &Layout) -> String {
        let split = layout.n * layout.p;
        let join = |s: &[u16]| s.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",");
        format!("{}|{}", join(&self.0[..split]), join(&self.0[split..]))
    }

    pub fn parse_key(key: &str, layout: &Layout) -> Option<Monomial> {
        let (a, b) = key.split_once('|')?;
        let parse = |s: &str| -> Option<Vec<u16>> {
            if s.is_empty() {
                return Some(vec![]);
            }
            s.split(',').map(|x| x.parse().ok()).collect()
        };
        let mut exps = parse(a)?;
        exps.extend(parse(b)?);
        (exps.len() == layout.nvars()).then(|| Monomial::from_exps(exps))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial over the variables of a [`Layout`].
#[derive(Clone, PartialEq)]
pub struct FockPoly<S> {
    layout: Layout,
    terms: BTreeMap<Monomial, S>,
}

impl<S: Scalar> fmt::Debug for FockPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c:?})")?;
            for (v, &e) in m.exps().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "·{}", self.layout.var_name(v))?,
                    _ => write!(f, "·{}^{}", self.layout.var_name(v), e)?,
                }
            }
        }
        Ok(())
    }
}

impl<S: Scalar> FockPoly<S> {
    pub fn zero(layout: Layout) -> Self {
        Self {
            layout,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(layout: Layout, c: S) -> Self {
        let mut p = Self::zero(layout);
        p.add_term(Monomial::one(layout.nvars()), c);
        p
    }

    pub fn monomial(layout: Layout, m: Monomial, c: S) -> Self {
        assert_eq!(m.nvars(), layout.nvars(), "monomial arity");
        let mut p = Self::zero(layout);
        p.add_term(m, c);
        p
    }

    /// The variable `z[t][i]`.
    pub fn var_z(layout: Layout, t: usize, i: usize) -> Self {
        Self::monomial(layout, Monomial::var(layout.nvars(), layout.z(t, i)), S::one())
    }

    /// The variable `z'[t][j]`.
    pub fn var_zp(layout: Layout, t: usize, j: usize) -> Self {
        Self::monomial(layout, Monomial::var(layout.nvars(), layout.zp(t, j)), S::one())
    }

    /// `Z_{i,j} = sum_t z[t][i] z'[t][j]`.
    pub fn z_invariant(layout: Layout, i: usize, j: usize) -> Self {
        let mut p = Self::zero(layout);
        for t in 0..layout.n {
            let mut e = vec![0u16; layout.nvars()];
            e[layout.z(t, i)] = 1;
            e[layout.zp(t, j)] = 1;
            p.add_term(Monomial::from_exps(e), S::one());
        }
        p
    }

    pub fn from_terms(layout: Layout, terms: impl IntoIterator<Item = (Monomial, S)>) -> Self {
        let mut p = Self::zero(layout);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, S> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> S {
        self.terms.get(m).cloned().unwrap_or_else(S::zero)
    }

    /// Add `c · m`, keeping the no-stored-zeros invariant.
    pub fn add_term(&mut self, m: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    fn check_layout(&self, other: &Self) {
        assert_eq!(self.layout, other.layout, "layout mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_layout(other);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.layout);
        }
        Self {
            layout: self.layout,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .filter(|(_, v)| !v.is_zero())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_truncated(other, u32::MAX)
    }

    /// Product keeping only monomials of total degree `<= max_degree`.
    pub fn mul_truncated(&self, other: &Self, max_degree: u32) -> Self {
        self.check_layout(other);
        let mut out = Self::zero(self.layout);
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for (mb, cb) in &other.terms {
                if da + mb.degree() > max_degree {
                    continue;
                }
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.layout, S::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Largest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Keep monomials whose `z`-degree is at most `d`.
    pub fn truncate_z_degree(&self, d: u32) -> Self {
        Self {
            layout: self.layout,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.z_degree(&self.layout) <= d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Bargmann inner product `sum conj(f_M) g_M M!` (antilinear in `self`).
    pub fn inner(&self, other: &Self) -> S {
        self.check_layout(other);
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = S::zero();
        for (m, a) in &small.terms {
            if let Some(b) = large.terms.get(m) {
                let (f, g) = if flip { (b, a) } else { (a, b) };
                acc = acc + f.conj() * g.clone() * m.factorial::<S>();
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> S {
        self.inner(self)
    }

    /// Partial derivative with respect to flattened variable `v`.
    pub fn derivative(&self, v: usize) -> Self {
        let mut out = Self::zero(self.layout);
        for (m, c) in &self.terms {
            let e = m.exps()[v];
            if e > 0 {
                let nm = m.shifted(v, -1).expect("positive exponent");
                out.add_term(nm, c.clone() * S::from_u64(e as u64));
            }
        }
        out
    }

    /// `Δ_{i,j} f = sum_t ∂_{z[t][i]} ∂_{z'[t][j]} f`.
    pub fn laplacian(&self, i: usize, j: usize) -> Self {
        let l = self.layout;
        assert!(i < l.p && j < l.q, "laplacian index out of range");
        let mut out = Self::zero(l);
        for t in 0..l.n {
            let d = self.derivative(l.zp(t, j)).derivative(l.z(t, i));
            for (m, c) in d.terms {
                out.add_term(m, c);
            }
        }
        out
    }

    /// `L_{t,u} f` with `L_{t,u} = sum_i z[u][i] ∂_{z[t][i]} - sum_j z'[t][j] ∂_{z'[u][j]}`.
    ///
    /// These are the infinitesimal generators of `f -> f(uz, ū z')`; their
    /// common kernel is the `U(n)`-invariant subspace. The coefficient of
    /// each output monomial is one invariance equation.
    pub fn lie_generator(&self, t: usize, u: usize) -> Self {
        let l = self.layout;
        let mut out = Self::zero(l);
        for (m, c) in &self.terms {
            for i in 0..l.p {
                let e = m.exps()[l.z(t, i)];
                if e == 0 {
                    continue;
                }
                let nm = m.shifted(l.z(t, i), -1).and_then(|x| x.shifted(l.z(u, i), 1));
                if let Some(nm) = nm {
                    out.add_term(nm, c.clone() * S::from_u64(e as u64));
                }
            }
            for j in 0..l.q {
                let e = m.exps()[l.zp(u, j)];
                if e == 0 {
                    continue;
                }
                let nm = m.shifted(l.zp(u, j), -1).and_then(|x| x.shifted(l.zp(t, j), 1));
                if let Some(nm) = nm {
                    out.add_term(nm, -(c.clone() * S::from_u64(e as u64)));
                }
            }
        }
        out
    }

    /// Every nonzero invariance-equation residual, tagged by `(t, u)`.
    /// Empty exactly when `f` is `U(n)`-invariant.
    pub fn invariance_residual(&self) -> Vec<(usize, usize, Monomial, S)> {
        let n = self.layout.n;
        let mut out = Vec::new();
        for t in 0..n {
            for u in 0..n {
                for (m, c) in self.lie_generator(t, u).terms {
                    out.push((t, u, m, c));
                }
            }
        }
        out
    }

    /// Largest residual modulus, zero for invariant polynomials.
    pub fn max_invariance_residual(&self) -> f64 {
        self.invariance_residual()
            .iter()
            .map(|(_, _, _, c)| c.abs())
            .fold(0.0, f64::max)
    }

    /// Whether all residuals vanish (exactly, or below `tol` for floats).
    pub fn is_invariant(&self, tol: f64) -> bool {
        self.invariance_residual()
            .iter()
            .all(|(_, _, _, c)| c.is_negligible(tol))
    }

    /// Substitute `z[·][i] -> u z[·][i]`, `z'[·][j] -> ū z'[·][j]` for an
    /// `n x n` matrix given row-major.
    pub fn substitute(&self, u: &[S]) -> Self {
        let l = self.layout;
        assert_eq!(u.len(), l.n * l.n, "substitution matrix must be n x n");
        // Image of each variable under the linear change.
        let images: Vec<Self> = (0..l.nvars())
            .map(|v| {
                let t = l.row(v);
                let col = l.col(v);
                let mut img = Self::zero(l);
                for s in 0..l.n {
                    let entry = u[t * l.n + s].clone();
                    if l.is_z(v) {
                        img.add_term(Monomial::var(l.nvars(), l.z(s, col)), entry);
                    } else {
                        img.add_term(Monomial::var(l.nvars(), l.zp(s, col)), entry.conj());
                    }
                }
                img
            })
            .collect();
        let mut cache: BTreeMap<(usize, u16), Self> = BTreeMap::new();
        let mut out = Self::zero(l);
        for (m, c) in &self.terms {
            let mut term = Self::constant(l, c.clone());
            for (v, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let power = cache.entry((v, e)).or_insert_with(|| images[v].pow(e as u32)).clone();
                term = term.mul(&power);
            }
            for (tm, tc) in term.terms {
                out.add_term(tm, tc);
            }
        }
        out
    }

    /// Place a one-replica polynomial into replica `row` of `target`.
    pub fn embed_replica(&self, target: Layout, row: usize) -> Self {
        let l = self.layout;
        assert!(l.n == 1 && l.p == target.p && l.q == target.q && row < target.n);
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0u16; target.nvars()];
            for i in 0..l.p {
                e[target.z(row, i)] = m.exps()[l.z(0, i)];
            }
            for j in 0..l.q {
                e[target.zp(row, j)] = m.exps()[l.zp(0, j)];
            }
            out.add_term(Monomial::from_exps(e), c.clone());
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FockPoly<T> {
        FockPoly::from_terms(self.layout, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn to_c64(&self) -> FockPoly<Complex64> {
        self.map_coeffs(|c| c.to_c64())
    }

    /// Error unless the term count is within `cap`.
    pub fn check_capacity(&self, cap: usize) -> Result<()> {
        if self.len() > cap {
            return Err(Error::Capacity {
                needed: self.len(),
                cap,
            });
        }
        Ok(())
    }
}

impl FockPoly<Complex64> {
    /// `W_u f = f(u z, ū z')` for a unitary `u` on the replica index.
    pub fn apply_unitary_change(&self, u: &CMat) -> Result<Self> {
        let n = self.layout.n;
        if u.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "unitary must be {n}x{n}, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        if !linalg::is_unitary(u, 1e-10) {
            return Err(Error::Parameter("matrix is not unitary".into()));
        }
        let flat: Vec<Complex64> = (0..n)
            .flat_map(|r| (0..n).map(move |s| (r, s)))
            .map(|(r, s)| u[(r, s)])
            .collect();
        Ok(self.substitute(&flat))
    }

    /// Largest coefficient difference to another polynomial.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.sub(other).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        Self {
            layout: self.layout,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }
}

/// Free-function form of [`FockPoly::inner`].
pub fn bargmann_inner<S: Scalar>(f: &FockPoly<S>, g: &FockPoly<S>) -> S {
    f.inner(g)
}

/// Free-function form of [`FockPoly::apply_unitary_change`].
pub fn apply_unitary_change(f: &FockPoly<Complex64>, u: &CMat) -> Result<FockPoly<Complex64>> {
    f.apply_unitary_change(u)
}
