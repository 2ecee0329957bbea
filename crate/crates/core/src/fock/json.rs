//! Canonical JSON for polynomials and operators: keys sorted as strings,
//! coefficients as exact numerator/denominator pairs. Floating-point
//! coefficients are written as the exact dyadic rational they represent.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{FockOperator, FockPoly, Layout, Monomial};
use crate::error::{Error, Result};
use crate::scalar::{GaussRational, RationalRepr};

pub const POLY_SCHEMA: &str = "cohlab.fockpoly/1";
pub const OPERATOR_SCHEMA: &str = "cohlab.fockoperator/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalTerm {
    pub monomial: String,
    pub re: RationalRepr,
    pub im: RationalRepr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalPoly {
    pub schema: String,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub terms: Vec<CanonicalTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalEntry {
    pub ket: String,
    pub bra: String,
    pub re: RationalRepr,
    pub im: RationalRepr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalOperator {
    pub schema: String,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub entries: Vec<CanonicalEntry>,
}

fn exact_of(c: &Complex64) -> Result<GaussRational> {
    let conv =
        |x: f64| BigRational::from_float(x).ok_or_else(|| Error::Parameter(format!("non-finite coefficient {x}")));
    Ok(GaussRational::new(conv(c.re)?, conv(c.im)?))
}

fn parse_coeff(re: &RationalRepr, im: &RationalRepr) -> Result<GaussRational> {
    let bad = || Error::Parameter("malformed rational".into());
    Ok(GaussRational::new(
        re.parse().ok_or_else(bad)?,
        im.parse().ok_or_else(bad)?,
    ))
}

impl CanonicalPoly {
    pub fn from_exact(f: &FockPoly<GaussRational>) -> Self {
        let l = f.layout();
        let mut terms: Vec<CanonicalTerm> = f
            .terms()
            .iter()
            .map(|(m, c)| CanonicalTerm {
                monomial: m.key(&l),
                re: RationalRepr::from(&c.re),
                im: RationalRepr::from(&c.im),
            })
            .collect();
        terms.sort_by(|a, b| a.monomial.cmp(&b.monomial));
        Self {
            schema: POLY_SCHEMA.into(),
            p: l.p,
            q: l.q,
            n: l.n,
            terms,
        }
    }

    pub fn from_c64(f: &FockPoly<Complex64>) -> Result<Self> {
        let exact = FockPoly::from_terms(
            f.layout(),
            f.terms()
                .iter()
                .map(|(m, c)| Ok((m.clone(), exact_of(c)?)))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(Self::from_exact(&exact))
    }

    pub fn to_exact(&self) -> Result<FockPoly<GaussRational>> {
        let l = Layout::new(self.p, self.q, self.n)?;
        let mut f = FockPoly::zero(l);
        for t in &self.terms {
            let m = Monomial::parse_key(&t.monomial, &l)
                .ok_or_else(|| Error::Parameter(format!("bad monomial key {}", t.monomial)))?;
            f.add_term(m, parse_coeff(&t.re, &t.im)?);
        }
        Ok(f)
    }

    pub fn to_c64(&self) -> Result<FockPoly<Complex64>> {
        Ok(self
            .to_exact()?
            .map_coeffs(|c| Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN))))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parameter(format!("invalid polynomial JSON: {e}")))
    }
}

impl CanonicalOperator {
    pub fn from_exact(op: &FockOperator<GaussRational>) -> Self {
        let l = op.layout();
        let mut entries: Vec<CanonicalEntry> = op
            .entries()
            .iter()
            .map(|((k, b), c)| CanonicalEntry {
                ket: k.key(&l),
                bra: b.key(&l),
                re: RationalRepr::from(&c.re),
                im: RationalRepr::from(&c.im),
            })
            .collect();
        entries.sort_by(|a, b| (&a.ket, &a.bra).cmp(&(&b.ket, &b.bra)));
        Self {
            schema: OPERATOR_SCHEMA.into(),
            p: l.p,
            q: l.q,
            n: l.n,
            entries,
        }
    }

    pub fn from_c64(op: &FockOperator<Complex64>) -> Result<Self> {
        let mut exact = FockOperator::zero(op.layout());
        for ((k, b), c) in op.entries() {
            exact.add_entry(k.clone(), b.clone(), exact_of(c)?);
        }
        Ok(Self::from_exact(&exact))
    }

    pub fn to_exact(&self) -> Result<FockOperator<GaussRational>> {
        let l = Layout::new(self.p, self.q, self.n)?;
        let mut op = FockOperator::zero(l);
        for e in &self.entries {
            let parse =
                |s: &str| Monomial::parse_key(s, &l).ok_or_else(|| Error::Parameter(format!("bad monomial key {s}")));
            op.add_entry(parse(&e.ket)?, parse(&e.bra)?, parse_coeff(&e.re, &e.im)?);
        }
        Ok(op)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parameter(format!("invalid operator JSON: {e}")))
    }
}
