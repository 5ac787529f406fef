//! Spin-1/2 chains with open boundaries: basis conventions, Hamiltonians and
//! local U(1) charges.
//!
//! Basis index bit `j − 1` holds site `j`. A set bit is σ^z = −1 and counts as
//! an occupied charge, so the sector label of a basis state is its popcount.

mod charge;
mod models;
mod pauli;

pub use charge::{apply_one_site, build_charge, single_site_rotation_to_z, ChargeSpec, Unitary2};
pub use models::{build_mfim, build_nnn_ising, build_xxz_fields, ChainModel, Couplings};
pub use pauli::{HermitianOperator, Pauli, PauliString, PauliSum};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 24;

/// Number of spins in the chain, `1 ≤ L ≤ 24`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SiteCount(usize);

impl SiteCount {
    pub fn new(sites: usize) -> Result<Self> {
        if sites == 0 || sites > MAX_SITES {
            return Err(Error::InvalidSize(format!(
                "chain length {sites} outside 1..={MAX_SITES}"
            )));
        }
        Ok(Self(sites))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn dim(self) -> usize {
        1 << self.0
    }
}

impl TryFrom<usize> for SiteCount {
    type Error = Error;

    fn try_from(sites: usize) -> Result<Self> {
        Self::new(sites)
    }
}

/// Normalized amplitude vector over the 2^L computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    sites: SiteCount,
    amps: Vec<C64>,
}

pub const NORM_TOL: f64 = 1e-10;

impl PureState {
    pub fn new(sites: SiteCount, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != sites.dim() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a {}-site chain",
                amps.len(),
                sites.get()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm² is {norm}, expected 1")));
        }
        Ok(Self { sites, amps })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(sites: SiteCount, mut amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidInput("cannot normalize a zero vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(sites, amps)
    }

    /// The basis state `|b⟩`.
    pub fn basis(sites: SiteCount, b: usize) -> Result<Self> {
        if b >= sites.dim() {
            return Err(Error::InvalidInput(format!("basis index {b} out of range")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); sites.dim()];
        amps[b] = C64::new(1.0, 0.0);
        Ok(Self { sites, amps })
    }

    pub fn sites(&self) -> SiteCount {
        self.sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Basis indices on `bits` bits with exactly `weight` set bits, ascending.
pub fn weight_strings(bits: usize, weight: usize) -> Vec<usize> {
    if weight > bits {
        return Vec::new();
    }
    if weight == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    // Gosper's hack walks same-popcount integers in increasing order.
    let mut x: usize = (1 << weight) - 1;
    let limit = 1usize << bits;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}
