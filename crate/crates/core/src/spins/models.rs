use std::fmt;
use std::str::FromStr;

use super::pauli::{HermitianOperator, Pauli, PauliSum};
use super::SiteCount;
use crate::error::{Error, Result};

/// Couplings shared by the three chain models. `delta` only enters the XXZ model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub g: f64,
    pub h: f64,
    pub delta: f64,
    pub h1: f64,
    pub hl: f64,
}

impl Default for Couplings {
    /// The chaotic point `g = 1.1`, `h = 0.35`, with boundary fields `±1/4`.
    fn default() -> Self {
        Self { g: 1.1, h: 0.35, delta: 2.0, h1: 0.25, hl: -0.25 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainModel {
    Mfim,
    NnnIsing,
    XxzFields,
}

impl ChainModel {
    pub fn build(self, sites: SiteCount, c: &Couplings) -> Result<HermitianOperator> {
        match self {
            ChainModel::Mfim => build_mfim(sites, c.g, c.h, c.h1, c.hl),
            ChainModel::NnnIsing => build_nnn_ising(sites, c.g, c.h, c.h1, c.hl),
            ChainModel::XxzFields => build_xxz_fields(sites, c.delta, c.g, c.h, c.h1, c.hl),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChainModel::Mfim => "mfim",
            ChainModel::NnnIsing => "nnn-ising",
            ChainModel::XxzFields => "xxz-fields",
        }
    }

    pub fn min_sites(self) -> usize {
        match self {
            ChainModel::NnnIsing => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for ChainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChainModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mfim" => Ok(ChainModel::Mfim),
            "nnn-ising" => Ok(ChainModel::NnnIsing),
            "xxz-fields" => Ok(ChainModel::XxzFields),
            other => Err(Error::InvalidInput(format!(
                "unknown model '{other}' (expected mfim, nnn-ising or xxz-fields)"
            ))),
        }
    }
}

fn require_sites(sites: SiteCount, min: usize, what: &str) -> Result<usize> {
    let l = sites.get();
    if l < min {
        return Err(Error::InvalidSize(format!("{what} needs at least {min} sites, got {l}")));
    }
    Ok(l)
}

fn push_fields(sum: &mut PauliSum, l: usize, g: f64, h: f64, h1: f64, hl: f64) {
    for j in 0..l {
        sum.push(g, vec![(j, Pauli::X)]);
        sum.push(h, vec![(j, Pauli::Z)]);
    }
    sum.push(h1, vec![(0, Pauli::Z)]);
    sum.push(hl, vec![(l - 1, Pauli::Z)]);
}

/// Mixed-field Ising chain
/// `Σ_j σ^z_j σ^z_{j+1} + Σ_j (g σ^x_j + h σ^z_j) + h1 σ^z_1 + hL σ^z_L`.
pub fn build_mfim(sites: SiteCount, g: f64, h: f64, h1: f64, hl: f64) -> Result<HermitianOperator> {
    let l = require_sites(sites, 2, "mfim")?;
    let mut sum = PauliSum::new(l);
    for j in 0..l - 1 {
        sum.push(1.0, vec![(j, Pauli::Z), (j + 1, Pauli::Z)]);
    }
    push_fields(&mut sum, l, g, h, h1, hl);
    Ok(sum.to_operator())
}

/// Ising chain with equal nearest and next-nearest couplings of 1/2; the
/// next-nearest bonds stop at the chain end.
pub fn build_nnn_ising(
    sites: SiteCount,
    g: f64,
    h: f64,
    h1: f64,
    hl: f64,
) -> Result<HermitianOperator> {
    let l = require_sites(sites, 3, "nnn-ising")?;
    let mut sum = PauliSum::new(l);
    for j in 0..l - 1 {
        sum.push(0.5, vec![(j, Pauli::Z), (j + 1, Pauli::Z)]);
        if j + 2 < l {
            sum.push(0.5, vec![(j, Pauli::Z), (j + 2, Pauli::Z)]);
        }
    }
    push_fields(&mut sum, l, g, h, h1, hl);
    Ok(sum.to_operator())
}

/// XXZ chain `¼ Σ_j (XX + YY + Δ ZZ)` in the same on-site and boundary fields.
pub fn build_xxz_fields(
    sites: SiteCount,
    delta: f64,
    g: f64,
    h: f64,
    h1: f64,
    hl: f64,
) -> Result<HermitianOperator> {
    let l = require_sites(sites, 2, "xxz-fields")?;
    let mut sum = PauliSum::new(l);
    for j in 0..l - 1 {
        sum.push(0.25, vec![(j, Pauli::X), (j + 1, Pauli::X)]);
        sum.push(0.25, vec![(j, Pauli::Y), (j + 1, Pauli::Y)]);
        sum.push(0.25 * delta, vec![(j, Pauli::Z), (j + 1, Pauli::Z)]);
    }
    push_fields(&mut sum, l, g, h, h1, hl);
    Ok(sum.to_operator())
}
