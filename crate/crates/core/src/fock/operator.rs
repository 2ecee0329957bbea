use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::Rng;

use super::{FockPoly, Layout, Monomial};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::scalar::Scalar;

/// Finite-rank operator `sum r[M,N] |z^M><z^N|` on unnormalized monomial kets.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator<S> {
    layout: Layout,
    entries: BTreeMap<(Monomial, Monomial), S>,
}

impl<S: Scalar> FockOperator<S> {
    pub fn zero(layout: Layout) -> Self {
        Self {
            layout,
            entries: BTreeMap::new(),
        }
    }

    /// `|f><g|`.
    pub fn ket_bra(f: &FockPoly<S>, g: &FockPoly<S>) -> Self {
        assert_eq!(f.layout(), g.layout(), "layout mismatch");
        let mut op = Self::zero(f.layout());
        for (m, a) in f.terms() {
            for (nn, b) in g.terms() {
                op.add_entry(m.clone(), nn.clone(), a.clone() * b.conj());
            }
        }
        op
    }

    /// `|f><f|`.
    pub fn projector(f: &FockPoly<S>) -> Self {
        Self::ket_bra(f, f)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn entries(&self) -> &BTreeMap<(Monomial, Monomial), S> {
        &self.entries
    }

    pub fn add_entry(&mut self, ket: Monomial, bra: Monomial, c: S) {
        if c.is_zero() {
            return;
        }
        let key = (ket, bra);
        let sum = match self.entries.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !sum.is_zero() {
            self.entries.insert(key, sum);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.layout, other.layout, "layout mismatch");
        let mut out = self.clone();
        for ((k, b), c) in &other.entries {
            out.add_entry(k.clone(), b.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.layout);
        for ((k, b), v) in &self.entries {
            out.add_entry(k.clone(), b.clone(), v.clone() * c.clone());
        }
        out
    }

    /// `tr ρ = sum_M r[M,M] M!`.
    pub fn trace(&self) -> S {
        self.entries
            .iter()
            .filter(|((k, b), _)| k == b)
            .fold(S::zero(), |acc, ((k, _), v)| acc + v.clone() * k.factorial::<S>())
    }

    /// `ρ f`.
    pub fn apply(&self, f: &FockPoly<S>) -> FockPoly<S> {
        let mut out = FockPoly::zero(self.layout);
        for ((k, b), v) in &self.entries {
            let fb = f.coeff(b);
            if !fb.is_zero() {
                out.add_term(k.clone(), v.clone() * fb * b.factorial::<S>());
            }
        }
        out
    }

    /// `<f|ρ|f>`.
    pub fn expectation(&self, f: &FockPoly<S>) -> S {
        f.inner(&self.apply(f))
    }

    /// Trace out the variables flagged in `traced`; the rest, in order, must
    /// form the variables of `out`.
    pub fn partial_trace(&self, traced: &[bool], out: Layout) -> Result<Self> {
        if traced.len() != self.layout.nvars() {
            return Err(Error::Dimension("trace mask length".into()));
        }
        let kept = traced.iter().filter(|t| !**t).count();
        if kept != out.nvars() {
            return Err(Error::Dimension(format!(
                "{kept} surviving variables but output layout has {}",
                out.nvars()
            )));
        }
        let mut res = Self::zero(out);
        for ((k, b), v) in &self.entries {
            let mut weight = Vec::new();
            let mut matched = true;
            let mut ke = Vec::with_capacity(kept);
            let mut be = Vec::with_capacity(kept);
            for (idx, &tr) in traced.iter().enumerate() {
                let (x, y) = (k.exps()[idx], b.exps()[idx]);
                if tr {
                    if x != y {
                        matched = false;
                        break;
                    }
                    weight.push(x);
                } else {
                    ke.push(x);
                    be.push(y);
                }
            }
            if matched {
                let w = S::from_multi_factorial(&weight);
                res.add_entry(Monomial::from_exps(ke), Monomial::from_exps(be), v.clone() * w);
            }
        }
        Ok(res)
    }

    /// Keep replicas `0..keep`, trace out the rest.
    pub fn trace_replicas(&self, keep: usize) -> Result<Self> {
        let l = self.layout;
        if keep == 0 || keep > l.n {
            return Err(Error::Parameter(format!("cannot keep {keep} of {} replicas", l.n)));
        }
        let mask: Vec<bool> = (0..l.nvars()).map(|v| l.row(v) >= keep).collect();
        self.partial_trace(&mask, l.with_replicas(keep))
    }

    /// All monomials appearing as kets or bras.
    pub fn support(&self) -> Vec<Monomial> {
        let set: BTreeSet<Monomial> = self.entries.keys().flat_map(|(k, b)| [k.clone(), b.clone()]).collect();
        set.into_iter().collect()
    }

    /// Matrix in the orthonormal basis `z^M / sqrt(M!)` over `basis`.
    pub fn to_dense(&self, basis: &[Monomial]) -> CMat {
        let index: BTreeMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let scale: Vec<f64> = basis
            .iter()
            .map(|m| crate::combinatorics::multi_factorial_f64(m.exps()).sqrt())
            .collect();
        let mut mat = CMat::zeros(basis.len(), basis.len());
        for ((k, b), v) in &self.entries {
            if let (Some(&i), Some(&j)) = (index.get(k), index.get(b)) {
                mat[(i, j)] += v.to_c64() * scale[i] * scale[j];
            }
        }
        mat
    }

    pub fn to_c64(&self) -> FockOperator<Complex64> {
        let mut out = FockOperator::zero(self.layout);
        for ((k, b), v) in &self.entries {
            out.add_entry(k.clone(), b.clone(), v.to_c64());
        }
        out
    }
}

impl FockOperator<Complex64> {
    /// Inverse of [`FockOperator::to_dense`].
    pub fn from_dense(layout: Layout, basis: &[Monomial], mat: &CMat) -> Self {
        let scale: Vec<f64> = basis
            .iter()
            .map(|m| crate::combinatorics::multi_factorial_f64(m.exps()).sqrt())
            .collect();
        let mut op = Self::zero(layout);
        for (i, k) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let v = mat[(i, j)] / (scale[i] * scale[j]);
                if v.norm() > 0.0 {
                    op.add_entry(k.clone(), b.clone(), v);
                }
            }
        }
        op
    }

    /// `W_u ρ W_u†`.
    pub fn conjugate_by(&self, u: &CMat) -> Result<Self> {
        let support = self.support();
        let mut images = BTreeMap::new();
        for m in &support {
            let img = FockPoly::monomial(self.layout, m.clone(), Complex64::new(1.0, 0.0)).apply_unitary_change(u)?;
            images.insert(m.clone(), img);
        }
        let mut out = Self::zero(self.layout);
        for ((k, b), v) in &self.entries {
            let (fk, fb) = (&images[k], &images[b]);
            for (mk, ck) in fk.terms() {
                for (mb, cb) in fb.terms() {
                    out.add_entry(mk.clone(), mb.clone(), v * ck * cb.conj());
                }
            }
        }
        Ok(out)
    }

    /// Largest entry difference.
    pub fn max_entry_diff(&self, other: &Self) -> f64 {
        let neg = other.scale(&Complex64::new(-1.0, 0.0));
        self.add(&neg).entries.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Monte Carlo twirl `(1/N) sum W_u ρ W_u†` over Haar-random `u`.
pub fn twirl<R: Rng + ?Sized>(
    rho: &FockOperator<Complex64>,
    samples: usize,
    rng: &mut R,
) -> Result<FockOperator<Complex64>> {
    if samples == 0 {
        return Err(Error::Budget("twirl needs at least one sample".into()));
    }
    let n = rho.layout().n;
    let mut acc = FockOperator::zero(rho.layout());
    for _ in 0..samples {
        let u = linalg::haar_unitary(rng, n);
        acc = acc.add(&rho.conjugate_by(&u)?);
    }
    Ok(acc.scale(&Complex64::new(1.0 / samples as f64, 0.0)))
}
