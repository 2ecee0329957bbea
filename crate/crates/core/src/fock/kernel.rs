//! Exact dimension counts for the invariant subspace and the Laplacian kernel.
//!
//! The invariance equations are the coefficients of `L_{t,u} f` for all
//! `t, u`. The diagonal ones say that row `t` has the same degree in `z` and
//! in `z'`, so every monomial violating this is forced to have a zero
//! coefficient and can be dropped before elimination. All remaining
//! operators preserve the bidegree, so the system splits into independent
//! blocks, one per degree `k`, each solved by fraction-free elimination over
//! the integers.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::zpoly::compositions;
use super::{Layout, Monomial};
use crate::combinatorics::binomial;
use crate::error::{Error, Result};

type SparseRow = BTreeMap<usize, BigInt>;

/// Outcome of a dimension computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelReport {
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub d: u32,
    pub dim: usize,
    pub expected: usize,
    pub columns: usize,
    pub equations: usize,
}

impl KernelReport {
    pub fn matches(&self) -> bool {
        self.dim == self.expected
    }
}

/// Rank of a set of sparse integer rows, by fraction-free elimination.
fn rank(rows: impl IntoIterator<Item = SparseRow>) -> usize {
    let mut pivots: BTreeMap<usize, SparseRow> = BTreeMap::new();
    for mut row in rows {
        while let Some((&lead, _)) = row.iter().next() {
            let Some(piv) = pivots.get(&lead) else {
                normalize(&mut row);
                pivots.insert(lead, row);
                break;
            };
            let a = piv[&lead].clone();
            let b = row[&lead].clone();
            let g = a.gcd(&b);
            let (fa, fb) = (&a / &g, &b / &g);
            // row <- fa*row - fb*piv, which cancels the lead entry
            let mut next = SparseRow::new();
            for (&c, v) in &row {
                next.insert(c, v * &fa);
            }
            for (&c, v) in piv {
                let e = next.entry(c).or_insert_with(BigInt::zero);
                *e -= v * &fb;
            }
            next.retain(|_, v| !v.is_zero());
            normalize(&mut next);
            row = next;
        }
    }
    pivots.len()
}

/// Divide by the content and make the leading entry positive.
fn normalize(row: &mut SparseRow) {
    let g = row.values().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    let neg = row.values().next().map(|v| v.is_negative()).unwrap_or(false);
    if g.is_zero() {
        return;
    }
    for v in row.values_mut() {
        *v /= &g;
        if neg {
            *v = -v.clone();
        }
    }
}

/// Row weights of a `z`-block (or `z'`-block) exponent vector of width `cols`.
fn row_weights(exps: &[u16], cols: usize) -> Vec<u32> {
    exps.chunks(cols).map(|r| r.iter().map(|&e| e as u32).sum()).collect()
}

/// Monomials of bidegree `(k, k)` with equal row weights in `z` and `z'`.
fn balanced_monomials(layout: &Layout, k: u32) -> Vec<Monomial> {
    let za = compositions(layout.n * layout.p, k);
    let zb = compositions(layout.n * layout.q, k);
    let mut by_weight: BTreeMap<Vec<u32>, Vec<&Vec<u16>>> = BTreeMap::new();
    for b in &zb {
        by_weight.entry(row_weights(b, layout.q)).or_default().push(b);
    }
    let mut out = Vec::new();
    for a in &za {
        if let Some(bs) = by_weight.get(&row_weights(a, layout.p)) {
            for b in bs {
                let mut e = a.clone();
                e.extend_from_slice(b);
                out.push(Monomial::from_exps(e));
            }
        }
    }
    out
}

/// Equations contributed by one column monomial, keyed by equation id.
/// Key layout: `(family, a, b, output monomial)`.
type RowKey = (u8, usize, usize, Monomial);

fn lie_images(layout: &Layout, m: &Monomial, off_diagonal_only: bool) -> Vec<(RowKey, i64)> {
    let l = layout;
    let mut out = Vec::new();
    for t in 0..l.n {
        for u in 0..l.n {
            if off_diagonal_only && t == u {
                continue;
            }
            for i in 0..l.p {
                let e = m.exps()[l.z(t, i)];
                if e == 0 {
                    continue;
                }
                if let Some(nm) = m.shifted(l.z(t, i), -1).and_then(|x| x.shifted(l.z(u, i), 1)) {
                    out.push(((0, t, u, nm), e as i64));
                }
            }
            for j in 0..l.q {
                let e = m.exps()[l.zp(u, j)];
                if e == 0 {
                    continue;
                }
                if let Some(nm) = m.shifted(l.zp(u, j), -1).and_then(|x| x.shifted(l.zp(t, j), 1)) {
                    out.push(((0, t, u, nm), -(e as i64)));
                }
            }
        }
    }
    out
}

fn laplacian_images(layout: &Layout, m: &Monomial) -> Vec<(RowKey, i64)> {
    let l = layout;
    let mut out = Vec::new();
    for i in 0..l.p {
        for j in 0..l.q {
            for t in 0..l.n {
                let (a, b) = (m.exps()[l.z(t, i)], m.exps()[l.zp(t, j)]);
                if a == 0 || b == 0 {
                    continue;
                }
                let nm = m
                    .shifted(l.z(t, i), -1)
                    .and_then(|x| x.shifted(l.zp(t, j), -1))
                    .expect("positive exponents");
                out.push(((1, i, j, nm), a as i64 * b as i64));
            }
        }
    }
    out
}

/// Kernel dimension of the system whose columns are `cols` and whose
/// equations are generated column by column.
fn block_kernel_dim(cols: &[Monomial], images: impl Fn(&Monomial) -> Vec<(RowKey, i64)>) -> (usize, usize) {
    let mut rows: BTreeMap<RowKey, SparseRow> = BTreeMap::new();
    for (c, m) in cols.iter().enumerate() {
        for (key, v) in images(m) {
            let e = rows.entry(key).or_default().entry(c).or_insert_with(BigInt::zero);
            *e += v;
        }
    }
    let eqs: Vec<SparseRow> = rows
        .into_values()
        .map(|mut r| {
            r.retain(|_, v| !v.is_zero());
            r
        })
        .filter(|r| !r.is_empty())
        .collect();
    let n_eqs = eqs.len();
    (cols.len() - rank(eqs), n_eqs)
}

fn check_args(p: usize, q: usize, n: usize) -> Result<Layout> {
    Layout::new(p, q, n)
}

/// `dim F^{U(n), <= d}_{p,q,n}` by exact elimination; expected
/// `binom(pq + d, d)` whenever `n >= min(p, q)`.
pub fn invariant_subspace_dim(p: usize, q: usize, n: usize, d: u32, cap: usize) -> Result<KernelReport> {
    let layout = check_args(p, q, n)?;
    let mut dim = 0;
    let mut columns = 0;
    let mut equations = 0;
    for k in 0..=d {
        let cols = balanced_monomials(&layout, k);
        columns += cols.len();
        if columns > cap {
            return Err(Error::Capacity { needed: columns, cap });
        }
        let (kd, ne) = block_kernel_dim(&cols, |m| lie_images(&layout, m, true));
        dim += kd;
        equations += ne;
    }
    Ok(KernelReport {
        p,
        q,
        n,
        d,
        dim,
        expected: expected_dim(p, q, d),
        columns,
        equations,
    })
}

/// Same count without the balanced-monomial reduction: every monomial with
/// `deg_z <= d` and `deg_z' <= d` is a column and all `n^2` operator
/// families are stacked. Exponentially larger; used to validate the
/// reduction on small cases.
pub fn invariant_subspace_dim_unreduced(p: usize, q: usize, n: usize, d: u32, cap: usize) -> Result<usize> {
    let layout = check_args(p, q, n)?;
    let mut dim = 0;
    let mut columns = 0;
    for a in 0..=d {
        for b in 0..=d {
            let za = compositions(n * p, a);
            let zb = compositions(n * q, b);
            let cols: Vec<Monomial> = za
                .iter()
                .flat_map(|x| {
                    zb.iter().map(move |y| {
                        let mut e = x.clone();
                        e.extend_from_slice(y);
                        Monomial::from_exps(e)
                    })
                })
                .collect();
            columns += cols.len();
            if columns > cap {
                return Err(Error::Capacity { needed: columns, cap });
            }
            // Diagonal operators act by a scalar; add them as equations too.
            let diag = |m: &Monomial| {
                (0..n)
                    .filter_map(|t| {
                        let wz: i64 = (0..p).map(|i| m.exps()[layout.z(t, i)] as i64).sum();
                        let wp: i64 = (0..q).map(|j| m.exps()[layout.zp(t, j)] as i64).sum();
                        (wz != wp).then(|| ((2u8, t, t, m.clone()), wz - wp))
                    })
                    .collect::<Vec<_>>()
            };
            let (kd, _) = block_kernel_dim(&cols, |m| {
                let mut v = lie_images(&layout, m, true);
                v.extend(diag(m));
                v
            });
            dim += kd;
        }
    }
    Ok(dim)
}

/// Dimension of `{f invariant, deg <= d : Δ_{i,j} f = 0 for all i, j}`;
/// the expected value is 1 (constants only).
pub fn laplacian_kernel_dim_in_invariants(p: usize, q: usize, n: usize, d: u32, cap: usize) -> Result<KernelReport> {
    let layout = check_args(p, q, n)?;
    let mut dim = 0;
    let mut columns = 0;
    let mut equations = 0;
    for k in 0..=d {
        let cols = balanced_monomials(&layout, k);
        columns += cols.len();
        if columns > cap {
            return Err(Error::Capacity { needed: columns, cap });
        }
        let (kd, ne) = block_kernel_dim(&cols, |m| {
            let mut v = lie_images(&layout, m, true);
            v.extend(laplacian_images(&layout, m));
            v
        });
        dim += kd;
        equations += ne;
    }
    Ok(KernelReport {
        p,
        q,
        n,
        d,
        dim,
        expected: 1,
        columns,
        equations,
    })
}

fn expected_dim(p: usize, q: usize, d: u32) -> usize {
    let b = binomial((p * q) as i64 + d as i64, d as i64);
    usize::try_from(b).unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::DEFAULT_TERM_CAP;

    fn row(entries: &[(usize, i64)]) -> SparseRow {
        entries.iter().map(|&(c, v)| (c, BigInt::from(v))).collect()
    }

    #[test]
    fn rank_of_small_systems() {
        assert_eq!(rank(vec![row(&[(0, 2), (1, 4)]), row(&[(0, 1), (1, 2)])]), 1);
        assert_eq!(rank(vec![row(&[(0, 2), (1, 3)]), row(&[(0, 1), (1, 2)])]), 2);
        assert_eq!(rank(vec![row(&[(1, 5)]), row(&[(0, 3), (1, 1)]), row(&[(0, 6)])]), 2);
    }

    #[test]
    fn spec_examples() {
        let c = DEFAULT_TERM_CAP;
        assert_eq!(invariant_subspace_dim(1, 1, 2, 3, c).unwrap().dim, 4);
        assert_eq!(invariant_subspace_dim(1, 2, 2, 2, c).unwrap().dim, 6);
        assert_eq!(invariant_subspace_dim(2, 2, 3, 0, c).unwrap().dim, 1);
        assert_eq!(laplacian_kernel_dim_in_invariants(1, 1, 2, 3, c).unwrap().dim, 1);
        assert_eq!(laplacian_kernel_dim_in_invariants(2, 2, 2, 2, c).unwrap().dim, 1);
        assert_eq!(laplacian_kernel_dim_in_invariants(1, 1, 1, 2, c).unwrap().dim, 1);
    }

    #[test]
    fn reduction_agrees_with_full_system() {
        let c = DEFAULT_TERM_CAP;
        for &(p, q, n, d) in &[(1, 1, 2, 3), (1, 2, 2, 2), (2, 1, 1, 2), (2, 2, 2, 1)] {
            let full = invariant_subspace_dim_unreduced(p, q, n, d, c).unwrap();
            let reduced = invariant_subspace_dim(p, q, n, d, c).unwrap().dim;
            assert_eq!(full, reduced, "(p,q,n,d)=({p},{q},{n},{d})");
        }
    }

    #[test]
    fn below_threshold_dimension_drops() {
        // n = 1 < min(p, q) = 2: the Z monomials become dependent.
        let r = invariant_subspace_dim(2, 2, 1, 2, DEFAULT_TERM_CAP).unwrap();
        assert!(r.dim < r.expected);
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(
            invariant_subspace_dim(2, 2, 3, 3, 10),
            Err(Error::Capacity { .. })
        ));
    }
}
