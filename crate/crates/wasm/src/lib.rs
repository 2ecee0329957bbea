//! Browser bindings for three cohlab views on the unit disk `p = q = 1`.
//!
//! Grids are row-major `size × size` samples of the square `[−1, 1]²`,
//! row 0 at the top (`Im λ = 1`). Points outside the open disk are `NaN`.

use cohlab::coherent::{fidelity, husimi_su11};
use cohlab::haar::{tv_bound, tv_n1_exact};
use cohlab::hyperbolic::DiscPoint;
use cohlab::linalg::CMat;
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

fn grid_point(size: usize, row: usize, col: usize) -> Complex64 {
    let step = 2.0 / (size.max(2) - 1) as f64;
    Complex64::new(-1.0 + col as f64 * step, 1.0 - row as f64 * step)
}

fn on_grid(size: usize, f: impl Fn(Complex64) -> Option<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(size * size);
    for row in 0..size {
        for col in 0..size {
            let z = grid_point(size, row, col);
            out.push(if z.norm() < 1.0 {
                f(z).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            });
        }
    }
    out
}

/// Husimi function of the basis state `ψ_{k,n}` on the disk.
pub fn husimi_basis(n: usize, k: usize, size: usize) -> Vec<f64> {
    let mut rho = CMat::zeros(k + 1, k + 1);
    rho[(k, k)] = Complex64::new(1.0, 0.0);
    on_grid(size, |z| husimi_su11(&rho, z, n).ok())
}

/// `|⟨λ0,n|λ,n⟩|²` as `λ` ranges over the disk.
pub fn fidelity_map(n: usize, re: f64, im: f64, size: usize) -> Vec<f64> {
    let Ok(center) = DiscPoint::from_entries(1, 1, &[Complex64::new(re, im)]) else {
        return vec![f64::NAN; size * size];
    };
    on_grid(size, |z| {
        let p = DiscPoint::from_entries(1, 1, &[z]).ok()?;
        fidelity(&center, &p, n).ok()
    })
}

/// Triples `(m, TV, 2/(m−1))` for `m = 2..=m_max`, flattened.
pub fn tv_n1(m_max: usize) -> Vec<f64> {
    (2..=m_max)
        .filter_map(|m| Some([m as f64, tv_n1_exact(m).ok()?, tv_bound(m, 1)]))
        .flatten()
        .collect()
}

#[wasm_bindgen]
pub fn husimi_grid(n: usize, k: usize, size: usize) -> Vec<f64> {
    husimi_basis(n, k, size)
}

#[wasm_bindgen]
pub fn fidelity_grid(n: usize, re: f64, im: f64, size: usize) -> Vec<f64> {
    fidelity_map(n, re, im, size)
}

#[wasm_bindgen]
pub fn tv_curve(m_max: usize) -> Vec<f64> {
    tv_n1(m_max)
}
