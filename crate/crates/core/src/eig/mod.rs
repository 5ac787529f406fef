//! Dense Hermitian eigendecomposition with an accuracy contract, plus
//! spectrum-window selection.
//!
//! Contract, for `D = dim H`:
//! - `‖H v_k − E_k v_k‖₂ ≤ 1e-8 · ‖H‖₂` for every `k`,
//! - `max |V†V − I| ≤ 1e-10`,
//! - energies ascending.
//!
//! Real-symmetric input goes through a real decomposition; eigenvectors in
//! degenerate subspaces are left in whatever gauge the solver returns.

pub mod cache;

use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spins::{HermitianOperator, PureState, SiteCount};

/// Largest dimension accepted for a full decomposition (L = 14).
pub const MAX_DIM: usize = 1 << 14;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum EigenVectors {
    Real(Mat<f64>),
    Complex(Mat<C64>),
}

/// Eigenpairs of a Hermitian matrix; column `k` of the vectors belongs to `energies[k]`.
#[derive(Clone, Debug)]
pub struct EigenSpectrum {
    energies: Vec<f64>,
    vectors: EigenVectors,
}

impl EigenSpectrum {
    pub fn from_parts(energies: Vec<f64>, vectors: EigenVectors) -> Result<Self> {
        let (r, c) = match &vectors {
            EigenVectors::Real(m) => (m.nrows(), m.ncols()),
            EigenVectors::Complex(m) => (m.nrows(), m.ncols()),
        };
        if r != energies.len() || c != energies.len() {
            return Err(Error::InvalidInput(format!(
                "{} energies with a {r}x{c} eigenvector matrix",
                energies.len()
            )));
        }
        if energies.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("energies must be ascending".into()));
        }
        Ok(Self { energies, vectors })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn vectors(&self) -> &EigenVectors {
        &self.vectors
    }

    pub fn is_real(&self) -> bool {
        matches!(self.vectors, EigenVectors::Real(_))
    }

    /// Eigenvector `k` as complex amplitudes.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        match &self.vectors {
            EigenVectors::Real(m) => m.col(k).iter().map(|&x| C64::new(x, 0.0)).collect(),
            EigenVectors::Complex(m) => m.col(k).iter().copied().collect(),
        }
    }

    /// Eigenvector `k` as a normalized chain state.
    pub fn state(&self, k: usize) -> Result<PureState> {
        let sites = self.dim().trailing_zeros() as usize;
        if 1usize << sites != self.dim() {
            return Err(Error::InvalidInput(format!("dimension {} is not 2^L", self.dim())));
        }
        PureState::normalized(SiteCount::new(sites)?, self.vector(k))
    }

    /// `max_k |E_k|`, the spectral norm of the decomposed operator.
    pub fn spectral_norm(&self) -> f64 {
        self.energies.iter().fold(0.0, |m, e| f64::max(m, e.abs()))
    }

    /// `max_k ‖H v_k − E_k v_k‖₂`.
    pub fn max_residual(&self, h: &HermitianOperator) -> f64 {
        (0..self.dim())
            .map(|k| {
                let v = self.vector(k);
                let hv = h.apply(&v);
                hv.iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * self.energies[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `max |V†V − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        match &self.vectors {
            EigenVectors::Real(v) => {
                let g: Mat<f64> = v.transpose() * v;
                for j in 0..n {
                    for i in 0..n {
                        let want = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((g[(i, j)] - want).abs());
                    }
                }
            }
            EigenVectors::Complex(v) => {
                let g: Mat<C64> = v.adjoint() * v;
                for j in 0..n {
                    for i in 0..n {
                        let want = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((g[(i, j)] - want).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eigh(h: &HermitianOperator) -> Result<EigenSpectrum> {
    let d = h.dim();
    if d > MAX_DIM {
        return Err(Error::ResourceLimit(format!(
            "dense decomposition capped at dimension {MAX_DIM} (L = 14), got {d}"
        )));
    }
    let herm = h.hermiticity_error();
    if herm > HERMITICITY_TOL {
        return Err(Error::InvalidInput(format!("operator is not Hermitian (deviation {herm:e})")));
    }
    if let Some(dense) = h.to_dense_real() {
        let evd = dense
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let energies: Vec<f64> = evd.S().column_vector().iter().copied().collect();
        EigenSpectrum::from_parts(energies, EigenVectors::Real(evd.U().to_owned()))
    } else {
        let evd = h
            .to_dense()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
        let energies: Vec<f64> = evd.S().column_vector().iter().map(|e| e.re).collect();
        EigenSpectrum::from_parts(energies, EigenVectors::Complex(evd.U().to_owned()))
    }
}

/// Indices of the `count` levels closest to `center`, ordered by distance, then index.
pub fn mid_spectrum_window(rescaled: &[f64], center: f64, count: usize) -> Result<Vec<usize>> {
    if rescaled.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    if count == 0 || count > rescaled.len() {
        return Err(Error::InvalidInput(format!(
            "window of {count} states requested from a spectrum of {}",
            rescaled.len()
        )));
    }
    let mut idx: Vec<usize> = (0..rescaled.len()).collect();
    idx.sort_by(|&a, &b| {
        let da = (rescaled[a] - center).abs();
        let db = (rescaled[b] - center).abs();
        da.total_cmp(&db).then(a.cmp(&b))
    });
    idx.truncate(count);
    Ok(idx)
}

/// Indices with `|ε − center| ≤ width / 2`, ascending.
pub fn energy_window(rescaled: &[f64], center: f64, width: f64) -> Vec<usize> {
    let half = width / 2.0;
    (0..rescaled.len()).filter(|&k| (rescaled[k] - center).abs() <= half).collect()
}
