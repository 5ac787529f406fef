//! U(1)-symmetric and plain Haar random states, and Monte Carlo asymmetry
//! statistics over them.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::entanglement::{asymmetry2, Bipartition};
use crate::error::{Error, Result};
use crate::spins::{weight_strings, ChargeSpec, PureState, SiteCount};

pub const DEFAULT_SAMPLES: usize = 200;

/// Exact `C(n, k)`; zero outside `0 ≤ k ≤ n`.
pub fn binomial_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial exceeds u64")
}

/// Sector dimensions of `H(M) = ⊕_q H_A(q) ⊗ H_B(M − q)`, indexed by `q = 0..=ℓ_A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorDims {
    sites: usize,
    ell_a: usize,
    m: usize,
    d_a: Vec<u64>,
    d_b: Vec<u64>,
}

impl SectorDims {
    pub fn new(sites: usize, ell_a: usize, m: usize) -> Result<Self> {
        if ell_a > sites || m > sites {
            return Err(Error::InvalidInput(format!(
                "sector (L={sites}, ℓ_A={ell_a}, M={m}) out of range"
            )));
        }
        let ell_b = sites - ell_a;
        let d_a = (0..=ell_a).map(|q| binomial_u64(ell_a, q)).collect();
        let d_b = (0..=ell_a).map(|q| if q <= m { binomial_u64(ell_b, m - q) } else { 0 }).collect();
        Ok(Self { sites, ell_a, m, d_a, d_b })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn ell_a(&self) -> usize {
        self.ell_a
    }

    pub fn ell_b(&self) -> usize {
        self.sites - self.ell_a
    }

    pub fn charge(&self) -> usize {
        self.m
    }

    pub fn d_a(&self) -> &[u64] {
        &self.d_a
    }

    pub fn d_b(&self) -> &[u64] {
        &self.d_b
    }

    /// `d_q = d_{A,q} d_{B,q}`.
    pub fn d(&self) -> Vec<u64> {
        self.d_a.iter().zip(&self.d_b).map(|(a, b)| a * b).collect()
    }

    /// `d_M = Σ_q d_q`.
    pub fn d_m(&self) -> u64 {
        self.d().iter().sum()
    }

    /// Sectors with `d_q > 0`.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.ell_a).filter(|&q| self.d_a[q] > 0 && self.d_b[q] > 0)
    }
}

/// Deterministic generator keyed by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Fresh independent source for task `index`, independent of how far `self` has advanced.
    pub fn derive(&self, index: u64) -> Self {
        Self::new(self.seed, splitmix64(self.stream ^ splitmix64(index)))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// Dirichlet(`α_q = d_q`) over the nonempty sectors; empty sectors get `p_q = 0`.
pub fn sample_dirichlet(dims: &SectorDims, rng: &mut RandomSource) -> Result<Vec<f64>> {
    let d = dims.d();
    if d.iter().all(|&x| x == 0) {
        return Err(Error::InvalidInput("all sectors are empty".into()));
    }
    let mut p = vec![0.0; d.len()];
    for (pq, &dq) in p.iter_mut().zip(&d) {
        if dq > 0 {
            let gamma = Gamma::new(dq as f64, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
            *pq = gamma.sample(rng.rng());
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(p)
}

/// Haar-random unit vector in `C^dim`.
pub fn sample_sector_haar(dim: usize, rng: &mut RandomSource) -> Result<Vec<C64>> {
    if dim == 0 {
        return Err(Error::InvalidInput("Haar vector of dimension 0".into()));
    }
    let r = rng.rng();
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(StandardNormal.sample(&mut *r), StandardNormal.sample(&mut *r)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(v)
}

/// `|Ψ(M)⟩ = Σ_q √p_q |ψ_q⟩` with Dirichlet weights and independent Haar blocks.
///
/// Block entry `(i, j)` sits at basis index `a_i | (b_j << ℓ_A)` where `a_i`,
/// `b_j` are the weight-`q` and weight-`(M−q)` strings in ascending order.
pub fn sample_u1_state(dims: &SectorDims, rng: &mut RandomSource) -> Result<PureState> {
    let sites = SiteCount::new(dims.sites())?;
    let p = sample_dirichlet(dims, rng)?;
    let ell_a = dims.ell_a();
    let mut amps = vec![C64::new(0.0, 0.0); sites.dim()];
    for q in dims.active() {
        let a_strings = weight_strings(ell_a, q);
        let b_strings = weight_strings(dims.ell_b(), dims.charge() - q);
        let block = sample_sector_haar(a_strings.len() * b_strings.len(), rng)?;
        let w = p[q].sqrt();
        for (j, &b) in b_strings.iter().enumerate() {
            for (i, &a) in a_strings.iter().enumerate() {
                amps[a | (b << ell_a)] = block[i + j * a_strings.len()] * w;
            }
        }
    }
    PureState::normalized(sites, amps)
}

/// Haar-random state on the full `2^L`-dimensional space.
pub fn sample_plain_haar(sites: SiteCount, rng: &mut RandomSource) -> PureState {
    let amps = sample_sector_haar(sites.dim(), rng).expect("dim ≥ 2");
    PureState::new(sites, amps).expect("normalized by construction")
}

/// Sample statistics of a scalar estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McStats {
    pub mean: f64,
    pub variance: f64,
    pub std_err: f64,
    pub samples: usize,
}

impl McStats {
    pub fn from_samples(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Ok(Self { mean, variance, std_err: (variance / n as f64).sqrt(), samples: n })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Rényi-2 asymmetry of `n_samples` U(1)-Haar states, sample `i` drawn from `rng.derive(i)`.
pub fn mc_asymmetry_samples(
    dims: &SectorDims,
    spec: &ChargeSpec,
    n_samples: usize,
    rng: &RandomSource,
) -> Result<Vec<f64>> {
    let part = Bipartition::new(SiteCount::new(dims.sites())?, dims.ell_a())?;
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.derive(i as u64);
            let state = sample_u1_state(dims, &mut r)?;
            asymmetry2(&state, &part, spec)
        })
        .collect()
}

pub fn mc_asymmetry_stats(
    dims: &SectorDims,
    spec: &ChargeSpec,
    n_samples: usize,
    rng: &RandomSource,
) -> Result<McStats> {
    if n_samples < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {n_samples}")));
    }
    McStats::from_samples(&mc_asymmetry_samples(dims, spec, n_samples, rng)?)
}
