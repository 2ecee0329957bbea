//! Explicit bases.
//!
//! `p = q = 1`: the discrete-series realization `K₊ = Z`, `K₋ = Δ`,
//! `K₀ = (n + n̂_A + n̂_B)/2` with `n̂_A = Σ z_t ∂_{z_t}` and
//! `n̂_B = Σ z'_t ∂_{z'_t}`. Operator matrices are read off the exact Fock
//! engine in the orthogonal basis `Z^k`, so every identity is checked in
//! rationals.
//!
//! `p = q = 2`: the conjectured orthonormal basis
//! `ψ^{ℓ,m}_{r,s} = φ^{ℓ,m}_{r,s} / (ℓ! r! s! m! sqrt(a^{ℓ,m}_{r,s}))` with
//! `φ = Σ_i (−1)^i C(r,i) C(s,i) / C(N_i, i) · Z11^{ℓ+i} Z12^{r−i} Z21^{s−i} Z22^{m+i}`.
//! Two readings of `N_i` are supported (see [`BinomialReading`]).
//! Orthonormality is asserted radical-free: off-diagonal inner products of
//! the `φ` vanish and `⟨φ, φ⟩ = (ℓ! r! s! m!)² a^{ℓ,m}_{r,s}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::combinatorics::{binomial, factorial};
use crate::error::{Error, Result};
use crate::fock::{FockPoly, Layout, ZPoly};
use crate::scalar::{GaussRational, Scalar};

type Q = GaussRational;

/// `‖Z^k‖² = (n+k−1)! k! / (n−1)!` for `p = q = 1`.
pub fn su11_basis_norm(n: usize, k: usize) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    Ok(factorial((n + k - 1) as u64) * factorial(k as u64) / factorial((n - 1) as u64))
}

/// Exact matrices of the `su(1,1)` generators on `span{Z^k : k ≤ d}`.
///
/// Entry `[j][k]` is the coefficient of `Z^j` in `X Z^k`; components with
/// `j > d` are dropped, which is the truncation.
#[derive(Debug, Clone)]
pub struct Su11Operators {
    pub n: usize,
    pub d: usize,
    pub k_plus: Vec<Vec<BigRational>>,
    pub k_minus: Vec<Vec<BigRational>>,
    pub k_zero: Vec<Vec<BigRational>>,
    pub n_a: Vec<Vec<BigRational>>,
    pub n_b: Vec<Vec<BigRational>>,
}

type RMatQ = Vec<Vec<BigRational>>;

fn zeros(k: usize) -> RMatQ {
    vec![vec![BigRational::zero(); k]; k]
}

fn mat_mul(a: &RMatQ, b: &RMatQ) -> RMatQ {
    let k = a.len();
    let mut out = zeros(k);
    for i in 0..k {
        for (l, ail) in a[i].iter().enumerate() {
            if ail.is_zero() {
                continue;
            }
            for j in 0..k {
                if !b[l][j].is_zero() {
                    out[i][j] += ail * &b[l][j];
                }
            }
        }
    }
    out
}

fn mat_lin(a: &RMatQ, ca: &BigRational, b: &RMatQ, cb: &BigRational) -> RMatQ {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x * ca + y * cb).collect())
        .collect()
}

fn commutator(a: &RMatQ, b: &RMatQ) -> RMatQ {
    let one = BigRational::one();
    mat_lin(&mat_mul(a, b), &one, &mat_mul(b, a), &-one.clone())
}

/// `n̂_A f` (`unprimed = true`) or `n̂_B f`: each monomial times its degree
/// in the corresponding variables.
fn number_op(layout: Layout, f: &FockPoly<Q>, unprimed: bool) -> FockPoly<Q> {
    FockPoly::from_terms(
        layout,
        f.terms().iter().map(|(m, c)| {
            let deg = if unprimed {
                m.z_degree(&layout)
            } else {
                m.zp_degree(&layout)
            };
            (m.clone(), c.clone() * Q::from_u64(deg as u64))
        }),
    )
}

/// Coordinates of `g` on `{Z^j : j ≤ top}`; errors if `g` leaves their span.
fn z_coordinates(g: &FockPoly<Q>, powers: &[FockPoly<Q>], norms: &[Q]) -> Result<Vec<BigRational>> {
    let mut rest = g.clone();
    let mut out = Vec::with_capacity(powers.len());
    for (zj, nj) in powers.iter().zip(norms) {
        let c = zj.inner(g) * nj.inv().expect("monomial norms are positive");
        rest = rest.sub(&zj.scale(&c));
        if !c.is_real() {
            return Err(Error::Parameter("non-real coordinate in a real realization".into()));
        }
        out.push(c.re);
    }
    if !rest.is_empty() {
        return Err(Error::Parameter("operator image left the invariant span".into()));
    }
    Ok(out)
}

impl Su11Operators {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("n must be at least 1".into()));
        }
        let layout = Layout::new(1, 1, n)?;
        let z = FockPoly::<Q>::z_invariant(layout, 0, 0);
        let mut powers = vec![FockPoly::constant(layout, Q::one())];
        for k in 1..=d + 1 {
            let next = powers[k - 1].mul(&z);
            powers.push(next);
        }
        let norms: Vec<Q> = powers.iter().map(|f| f.norm_sqr()).collect();
        let half = Q::ratio(1, 2);
        let nq = Q::from_u64(n as u64);
        let size = d + 1;
        let mut ops = [zeros(size), zeros(size), zeros(size), zeros(size), zeros(size)];
        for k in 0..size {
            let f = &powers[k];
            let na = number_op(layout, f, true);
            let nb = number_op(layout, f, false);
            let k0 = f.scale(&nq).add(&na).add(&nb).scale(&half);
            let images = [f.mul(&z), f.laplacian(0, 0), k0, na, nb];
            for (op, img) in ops.iter_mut().zip(images.iter()) {
                let coords = z_coordinates(img, &powers, &norms)?;
                for (j, cj) in coords.into_iter().enumerate().take(size) {
                    op[j][k] = cj;
                }
            }
        }
        let [k_plus, k_minus, k_zero, n_a, n_b] = ops;
        Ok(Self {
            n,
            d,
            k_plus,
            k_minus,
            k_zero,
            n_a,
            n_b,
        })
    }

    /// `K₊` on the normalized basis `ψ_{k,n}`: `sqrt((k+1)(n+k))` below the
    /// diagonal. Float, for display.
    pub fn k_plus_normalized(&self) -> Vec<Vec<f64>> {
        let size = self.d + 1;
        let mut m = vec![vec![0.0; size]; size];
        for k in 0..self.d {
            m[k + 1][k] = (((k + 1) * (self.n + k)) as f64).sqrt();
        }
        m
    }
}

/// One operator identity checked on the truncated basis.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Columns `k` whose images never leave the truncation.
    pub interior_columns: usize,
    pub interior_exact: bool,
    /// Largest `|entry|` of the residual on boundary columns.
    pub boundary_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Su11Report {
    pub n: usize,
    pub d: usize,
    pub checks: Vec<IdentityCheck>,
    /// Interior diagonal value of the Casimir, as a string `num/den`.
    pub casimir_value: String,
    pub casimir_expected: String,
}

impl Su11Report {
    pub fn all_interior_exact(&self) -> bool {
        self.checks.iter().all(|c| c.interior_exact) && self.casimir_value == self.casimir_expected
    }
}

fn check(name: &str, residual: &RMatQ, interior: usize) -> IdentityCheck {
    let mut exact = true;
    let mut boundary = 0.0f64;
    for row in residual {
        for (k, x) in row.iter().enumerate() {
            if k < interior {
                exact &= x.is_zero();
            } else {
                boundary = boundary.max(x.abs().to_f64().unwrap_or(f64::INFINITY));
            }
        }
    }
    IdentityCheck {
        name: name.into(),
        interior_columns: interior,
        interior_exact: exact,
        boundary_residual: boundary,
    }
}

fn scaled(a: &RMatQ, c: &BigRational) -> RMatQ {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

fn sub(a: &RMatQ, b: &RMatQ) -> RMatQ {
    let one = BigRational::one();
    mat_lin(a, &one, b, &-one.clone())
}

/// `Ĉ₂ = K₀² − ½(K₊K₋ + K₋K₊)` on the truncated basis.
pub fn casimir_matrix(ops: &Su11Operators) -> Vec<Vec<BigRational>> {
    let half = BigRational::new(1.into(), 2.into());
    let sym = mat_lin(
        &mat_mul(&ops.k_plus, &ops.k_minus),
        &half,
        &mat_mul(&ops.k_minus, &ops.k_plus),
        &half,
    );
    sub(&mat_mul(&ops.k_zero, &ops.k_zero), &sym)
}

/// `n/2 (n/2 − 1)`.
pub fn casimir_expected(n: usize) -> BigRational {
    let h = BigRational::new((n as i64).into(), 2.into());
    &h * (&h - BigRational::one())
}

/// Verifies `[K₀, K±] = ±K±`, `[K₋, K₊] = 2K₀ = n̂_A + n̂_B + n`,
/// `[n̂_A, K±] = ±K±`, the Casimir value and `[Ĉ₂, K] = 0`.
///
/// Interior columns: `k ≤ d−1` for the commutators and the Casimir,
/// `k ≤ d−2` for Casimir commutators (one more raising step).
pub fn su11_commutator_check(n: usize, d: usize) -> Result<Su11Report> {
    if d < 2 {
        return Err(Error::Parameter("need d >= 2".into()));
    }
    let ops = Su11Operators::new(n, d)?;
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let nq = BigRational::from_integer((n as i64).into());
    let id: RMatQ = (0..=d)
        .map(|i| {
            (0..=d)
                .map(|j| if i == j { one.clone() } else { BigRational::zero() })
                .collect()
        })
        .collect();
    let mut checks = vec![
        check(
            "[K0,K+] - K+",
            &sub(&commutator(&ops.k_zero, &ops.k_plus), &ops.k_plus),
            d,
        ),
        check(
            "[K0,K-] + K-",
            &mat_lin(&commutator(&ops.k_zero, &ops.k_minus), &one, &ops.k_minus, &one),
            d,
        ),
        check(
            "[K-,K+] - 2K0",
            &sub(&commutator(&ops.k_minus, &ops.k_plus), &scaled(&ops.k_zero, &two)),
            d,
        ),
    ];
    let number_sum = mat_lin(&mat_lin(&ops.n_a, &one, &ops.n_b, &one), &one, &id, &nq);
    checks.push(check(
        "[K-,K+] - (nA + nB + n)",
        &sub(&commutator(&ops.k_minus, &ops.k_plus), &number_sum),
        d,
    ));
    checks.push(check(
        "[nA,K+] - K+",
        &sub(&commutator(&ops.n_a, &ops.k_plus), &ops.k_plus),
        d,
    ));
    checks.push(check(
        "[nA,K-] + K-",
        &mat_lin(&commutator(&ops.n_a, &ops.k_minus), &one, &ops.k_minus, &one),
        d,
    ));
    let c2 = casimir_matrix(&ops);
    let expected = casimir_expected(n);
    checks.push(check("C2 - n/2(n/2-1)", &sub(&c2, &scaled(&id, &expected)), d));
    checks.push(check("[C2,K0]", &commutator(&c2, &ops.k_zero), d));
    checks.push(check("[C2,K+]", &commutator(&c2, &ops.k_plus), d - 1));
    checks.push(check("[C2,K-]", &commutator(&c2, &ops.k_minus), d - 1));
    let value = &c2[0][0];
    Ok(Su11Report {
        n,
        d,
        checks,
        casimir_value: value.to_string(),
        casimir_expected: expected.to_string(),
    })
}

/// `a^n_k = C(n+k−1, k)` with `a^n_{−1} = 0`.
pub fn a_coeff(n: i64, k: i64) -> BigInt {
    if k < 0 {
        return BigInt::zero();
    }
    binomial(n + k - 1, k)
}

/// `a^{ℓ,m}_{r,s} = (a^n_r a^n_s − a^n_{r−1} a^n_{s−1}) a^{n+r+s}_ℓ a^{n+r+s}_m`.
pub fn a_rs_lm(n: usize, l: usize, m: usize, r: usize, s: usize) -> BigInt {
    let (n, l, m, r, s) = (n as i64, l as i64, m as i64, r as i64, s as i64);
    (a_coeff(n, r) * a_coeff(n, s) - a_coeff(n, r - 1) * a_coeff(n, s - 1))
        * a_coeff(n + r + s, l)
        * a_coeff(n + r + s, m)
}

/// Which binomial sits in the denominator of the `i`-th term of `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinomialReading {
    /// `C(n+r+s−2, i)`, as in the basis definition.
    Basis,
    /// `C(n+r+s−i−1, i)`, as in the coherent-expansion derivation.
    Expansion,
}

impl BinomialReading {
    fn top(self, n: usize, r: usize, s: usize, i: usize) -> i64 {
        match self {
            BinomialReading::Basis => (n + r + s) as i64 - 2,
            BinomialReading::Expansion => (n + r + s) as i64 - i as i64 - 1,
        }
    }
}

/// Index tuple `(ℓ, m, r, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Su22Index {
    pub l: usize,
    pub m: usize,
    pub r: usize,
    pub s: usize,
}

impl Su22Index {
    pub fn weight(&self) -> usize {
        self.l + self.m + self.r + self.s
    }

    /// `ℓ! r! s! m!`.
    pub fn factorials(&self) -> BigInt {
        [self.l, self.m, self.r, self.s]
            .iter()
            .map(|&x| factorial(x as u64))
            .product()
    }

    /// All tuples with `ℓ+m+r+s ≤ w`, ordered by weight then lexicographically.
    pub fn up_to_weight(w: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for total in 0..=w {
            for l in (0..=total).rev() {
                for m in (0..=total - l).rev() {
                    for r in (0..=total - l - m).rev() {
                        out.push(Self {
                            l,
                            m,
                            r,
                            s: total - l - m - r,
                        });
                    }
                }
            }
        }
        out
    }
}

impl std::fmt::Display for Su22Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(l={},m={},r={},s={})", self.l, self.m, self.r, self.s)
    }
}

/// Unnormalized `φ^{ℓ,m}_{r,s}` as a polynomial in `Z11, Z12, Z21, Z22`.
pub fn su22_phi(n: usize, idx: Su22Index, reading: BinomialReading) -> Result<ZPoly<Q>> {
    if n < 2 {
        return Err(Error::Parameter("the SU(2,2) basis needs n >= 2".into()));
    }
    let mut out = ZPoly::zero(2, 2);
    for i in 0..=idx.r.min(idx.s) {
        let num = binomial(idx.r as i64, i as i64) * binomial(idx.s as i64, i as i64);
        let den = binomial(reading.top(n, idx.r, idx.s, i), i as i64);
        let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let c = Q::real(BigRational::new(sign * num, den));
        let e = vec![
            (idx.l + i) as u16,
            (idx.r - i) as u16,
            (idx.s - i) as u16,
            (idx.m + i) as u16,
        ];
        out.add_term(crate::fock::Monomial::from_exps(e), c);
    }
    Ok(out)
}

/// A pair whose inner product breaks orthonormality.
#[derive(Debug, Clone, Serialize)]
pub struct Offender {
    pub a: Su22Index,
    pub b: Su22Index,
    /// `⟨φ_a, φ_b⟩` (for `a = b`, divided by the conjectured norm²).
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Su22Gram {
    pub n: usize,
    pub max_weight: usize,
    pub reading: BinomialReading,
    pub indices: Vec<Su22Index>,
    /// Whether the normalized Gram matrix is the identity on this block.
    pub is_identity: bool,
    pub offenders: Vec<Offender>,
    pub pairs_checked: usize,
}

/// Exact Gram check of the conjectured basis through the Fock expansion.
pub fn su22_gram(n: usize, max_weight: usize, reading: BinomialReading) -> Result<Su22Gram> {
    let layout = Layout::new(2, 2, n)?;
    let indices = Su22Index::up_to_weight(max_weight);
    let expanded = indices
        .iter()
        .map(|&idx| su22_phi(n, idx, reading)?.to_fock(layout))
        .collect::<Result<Vec<_>>>()?;
    let mut offenders = Vec::new();
    let mut pairs = 0;
    for (a, fa) in indices.iter().zip(&expanded) {
        for (b, fb) in indices.iter().zip(&expanded) {
            if b < a || a.weight() != b.weight() {
                continue;
            }
            pairs += 1;
            let g = fa.inner(fb);
            if a == b {
                let f = a.factorials();
                let target = BigRational::from_integer(&f * &f * a_rs_lm(n, a.l, a.m, a.r, a.s));
                if !g.is_real() || g.re != target {
                    offenders.push(Offender {
                        a: *a,
                        b: *b,
                        value: format!("{}", Q::real(g.re.clone() / target)),
                    });
                }
            } else if !g.is_zero() {
                offenders.push(Offender {
                    a: *a,
                    b: *b,
                    value: format!("{g}"),
                });
            }
        }
    }
    Ok(Su22Gram {
        n,
        max_weight,
        reading,
        indices,
        is_identity: offenders.is_empty(),
        offenders,
        pairs_checked: pairs,
    })
}

/// Inner product `⟨φ_a, φ_b⟩` through the Fock expansion.
pub fn su22_inner(n: usize, a: Su22Index, b: Su22Index, reading: BinomialReading) -> Result<Q> {
    let layout = Layout::new(2, 2, n)?;
    let fa = su22_phi(n, a, reading)?.to_fock(layout)?;
    let fb = su22_phi(n, b, reading)?.to_fock(layout)?;
    Ok(fa.inner(&fb))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherentExpansionReport {
    pub n: usize,
    pub d: u32,
    pub reading: BinomialReading,
    /// Largest `|coefficient|` of the difference, as a float.
    pub max_discrepancy: f64,
    /// Exact: whether the difference vanishes identically.
    pub exact_match: bool,
    pub terms_compared: usize,
}

/// Compares `Σ_{k≤d} (tr ΛᵀZ)^k / k!` with the conjectured expansion
/// `Σ coeff · φ^{ℓ,m}_{r,s} / (ℓ! r! s! m!)`, where
/// `coeff = Σ_i λ1^{ℓ−i} λ4^{m−i} λ2^{r+i} λ3^{s+i} C(ℓ,i) C(m,i) / C(n+r+s+i−1, i)`.
///
/// This is the terminating hypergeometric series written without the
/// ratio `λ2λ3/(λ1λ4)`, so it is valid for `λ1 λ4 = 0` too. The common
/// factor `det(1−ΛΛ†)^{n/2}` is dropped from both sides. The comparison
/// is made on `Z`-coefficients, which determine the Fock vector since the
/// `Z`-monomials are independent for `n ≥ 2`.
pub fn su22_coherent_expansion_check(
    lambda: [Q; 4],
    n: usize,
    d: u32,
    reading: BinomialReading,
) -> Result<CoherentExpansionReport> {
    if n < 2 {
        return Err(Error::Parameter("the SU(2,2) basis needs n >= 2".into()));
    }
    let [l1, l2, l3, l4] = lambda.clone();
    let mut x = ZPoly::zero(2, 2);
    for (v, c) in lambda.iter().enumerate() {
        x = x.add(&ZPoly::var(2, 2, v / 2, v % 2).scale(c));
    }
    let mut term = ZPoly::monomial(2, 2, vec![0; 4], Q::one());
    let mut lhs = term.clone();
    for k in 1..=d {
        term = term.mul(&x).scale(&Q::recip_u64(k as u64));
        lhs = lhs.add(&term);
    }
    let pow = |b: &Q, e: usize| (0..e).fold(Q::one(), |acc, _| acc * b.clone());
    let mut rhs = ZPoly::zero(2, 2);
    for idx in Su22Index::up_to_weight(d as usize) {
        let mut coeff = Q::zero();
        for i in 0..=idx.l.min(idx.m) {
            let num = binomial(idx.l as i64, i as i64) * binomial(idx.m as i64, i as i64);
            let den = binomial((n + idx.r + idx.s + i) as i64 - 1, i as i64);
            let w = Q::real(BigRational::new(num, den));
            coeff = coeff + w * pow(&l1, idx.l - i) * pow(&l4, idx.m - i) * pow(&l2, idx.r + i) * pow(&l3, idx.s + i);
        }
        if coeff.is_zero() {
            continue;
        }
        let scale = coeff * Q::from_bigint(&idx.factorials()).inv().expect("nonzero");
        rhs = rhs.add(&su22_phi(n, idx, reading)?.scale(&scale));
    }
    let diff = lhs.add(&rhs.scale(&-Q::one()));
    let max = diff.terms().values().map(|c| c.to_c64().norm()).fold(0.0, f64::max);
    Ok(CoherentExpansionReport {
        n,
        d,
        reading,
        max_discrepancy: max,
        exact_match: diff.terms().is_empty(),
        terms_compared: lhs.terms().len().max(rhs.terms().len()),
    })
}
