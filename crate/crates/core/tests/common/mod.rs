#![allow(dead_code)]

use entasym_core::ensemble::RandomSource;
use entasym_core::spins::{PureState, SiteCount};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn id2() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn sx() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn sy() -> Mat<C64> {
    let mut m = Mat::zeros(2, 2);
    m[(0, 1)] = c(0.0, -1.0);
    m[(1, 0)] = c(0.0, 1.0);
    m
}

pub fn sz() -> Mat<C64> {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (1, 1) => c(-1.0, 0.0),
        _ => c(0.0, 0.0),
    })
}

pub fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Site `j` (0-based) acts on bit `j`, so the highest site is the leftmost factor.
pub fn embed(l: usize, ops: &[(usize, Mat<C64>)]) -> Mat<C64> {
    let mut out = Mat::from_fn(1, 1, |_, _| c(1.0, 0.0));
    for site in (0..l).rev() {
        let f = ops.iter().find(|(s, _)| *s == site).map(|(_, m)| m.clone()).unwrap_or_else(id2);
        out = kron(&out, &f);
    }
    out
}

pub fn add_scaled(acc: &mut Mat<C64>, w: f64, m: &Mat<C64>) {
    for j in 0..acc.ncols() {
        for i in 0..acc.nrows() {
            acc[(i, j)] += m[(i, j)] * w;
        }
    }
}

pub fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

pub fn random_state(l: usize, rng: &mut RandomSource) -> PureState {
    let r = rng.rng();
    let amps: Vec<C64> =
        (0..1usize << l).map(|_| c(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
    PureState::normalized(SiteCount::new(l).unwrap(), amps).unwrap()
}

/// Spectral projectors of a Hermitian matrix, grouping eigenvalues closer than `tol`.
pub fn eigenprojectors(m: &Mat<C64>, tol: f64) -> Vec<(f64, Mat<C64>)> {
    let evd = m.self_adjoint_eigen(Side::Lower).unwrap();
    let vals: Vec<f64> = evd.S().column_vector().iter().map(|v| v.re).collect();
    let u = evd.U();
    let d = m.nrows();
    let mut out: Vec<(f64, Mat<C64>)> = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        let col = u.col(k);
        let outer = Mat::from_fn(d, d, |i, j| col[i] * col[j].conj());
        match out.last_mut() {
            Some((lam, p)) if (v - *lam).abs() < tol => add_scaled(p, 1.0, &outer),
            _ => out.push((v, outer)),
        }
    }
    out
}
