//! Reduced density matrices, Rényi entropies and the entanglement asymmetry
//! `ΔS⁽ⁿ⁾ = S_n(ρ_{A,Q}) − S_n(ρ_A)` for the leading block of a chain.
//!
//! Charge-sector projectors for an arbitrary axis `n̂` are handled by rotating
//! every site of `A` with `u` from [`single_site_rotation_to_z`], after which
//! the sectors are fixed-popcount subsets of the basis.

use faer::{Mat, MatRef, Side};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::spins::{apply_one_site, single_site_rotation_to_z, ChargeSpec, PureState, SiteCount, Unitary2};

pub const RHO_HERMITICITY_TOL: f64 = 1e-12;
pub const RHO_TRACE_TOL: f64 = 1e-10;
pub const RHO_EIGEN_FLOOR: f64 = -1e-10;
/// Negative asymmetry below this magnitude is round-off.
pub const ASYMMETRY_FLOOR: f64 = 1e-10;

/// Sites `1..=ℓ_A` form `A`; the rest form `B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition {
    sites: SiteCount,
    ell_a: usize,
}

impl Bipartition {
    pub fn new(sites: SiteCount, ell_a: usize) -> Result<Self> {
        if ell_a > sites.get() {
            return Err(Error::InvalidInput(format!(
                "subsystem of {ell_a} sites in a {}-site chain",
                sites.get()
            )));
        }
        Ok(Self { sites, ell_a })
    }

    pub fn sites(&self) -> SiteCount {
        self.sites
    }

    pub fn ell_a(&self) -> usize {
        self.ell_a
    }

    pub fn ell_b(&self) -> usize {
        self.sites.get() - self.ell_a
    }

    pub fn dim_a(&self) -> usize {
        1 << self.ell_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.ell_b()
    }
}

#[derive(Clone, Debug)]
pub struct ReducedDensityMatrix {
    ell_a: usize,
    mat: Mat<C64>,
}

impl ReducedDensityMatrix {
    /// Wraps a `2^ℓ_A`-dimensional matrix after checking the density-matrix invariants.
    pub fn from_matrix(ell_a: usize, mat: Mat<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(ell_a, mat)?;
        rho.validate()?;
        Ok(rho)
    }

    fn from_matrix_unchecked(ell_a: usize, mat: Mat<C64>) -> Result<Self> {
        let d = 1usize << ell_a;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "{}x{} matrix for a {ell_a}-site subsystem",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { ell_a, mat })
    }

    pub fn ell_a(&self) -> usize {
        self.ell_a
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.mat[(i, i)]).sum()
    }

    /// `Tr ρ²`, as the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        frobenius_sq(self.mat.as_ref())
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("density-matrix spectrum failed: {e:?}")))
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > RHO_HERMITICITY_TOL {
            return Err(Error::InvalidInput(format!("ρ not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > RHO_TRACE_TOL || tr.im.abs() > RHO_TRACE_TOL {
            return Err(Error::InvalidInput(format!("Tr ρ = {tr}, expected 1")));
        }
        let min = self.eigenvalues()?.into_iter().fold(f64::INFINITY, f64::min);
        if min < RHO_EIGEN_FLOOR {
            return Err(Error::InvalidInput(format!("ρ has negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

fn frobenius_sq(m: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s
}

/// `‖X X†‖²_F`, via whichever Gram matrix is smaller.
fn gram_frobenius_sq(x: MatRef<'_, C64>) -> f64 {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0.0;
    }
    let g: Mat<C64> = if x.nrows() <= x.ncols() { x * x.adjoint() } else { x.adjoint() * x };
    frobenius_sq(g.as_ref())
}

fn check_state(state: &PureState, part: &Bipartition) -> Result<()> {
    if state.sites() != part.sites() {
        return Err(Error::InvalidInput(format!(
            "state on {} sites, bipartition of {}",
            state.sites().get(),
            part.sites().get()
        )));
    }
    Ok(())
}

/// The `2^ℓ_A × 2^{L−ℓ_A}` coefficient matrix, A bits as the row index.
fn coefficient_matrix<'a>(amps: &'a [C64], part: &Bipartition) -> MatRef<'a, C64> {
    MatRef::from_column_major_slice(amps, part.dim_a(), part.dim_b())
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ| = M M†`.
pub fn reduce(state: &PureState, part: &Bipartition) -> Result<ReducedDensityMatrix> {
    check_state(state, part)?;
    let m = coefficient_matrix(state.amplitudes(), part);
    let mut rho: Mat<C64> = m * m.adjoint();
    // Exact Hermitian symmetry; the product is Hermitian only up to round-off.
    let d = rho.nrows();
    for j in 0..d {
        rho[(j, j)].im = 0.0;
        for i in 0..j {
            let v = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
            rho[(i, j)] = v;
            rho[(j, i)] = v.conj();
        }
    }
    ReducedDensityMatrix::from_matrix_unchecked(part.ell_a(), rho)
}

/// `S₂ = −log Tr ρ²`.
pub fn renyi2(rho: &ReducedDensityMatrix) -> Result<f64> {
    let p = rho.purity();
    if !(p > 0.0) {
        return Err(Error::Degenerate(format!("Tr ρ² = {p} is not positive")));
    }
    Ok(-p.ln())
}

/// Integer Rényi entropy `S_n = log(Tr ρⁿ) / (1 − n)` for `n ≥ 2`.
pub fn renyi(rho: &ReducedDensityMatrix, n: u32) -> Result<f64> {
    match n {
        0 | 1 => Err(Error::InvalidInput(format!("Rényi index {n} unsupported, need n ≥ 2"))),
        2 => renyi2(rho),
        _ => {
            let tr: f64 = rho.eigenvalues()?.into_iter().map(|l| l.max(0.0).powi(n as i32)).sum();
            if !(tr > 0.0) {
                return Err(Error::Degenerate(format!("Tr ρ^{n} = {tr} is not positive")));
            }
            Ok(tr.ln() / (1.0 - n as f64))
        }
    }
}

/// Applies `u^{⊗ℓ}` to every column of `m`.
fn rotate_columns(m: &mut Mat<C64>, ell: usize, u: &Unitary2) {
    for j in 0..m.ncols() {
        let col = m.col_as_slice_mut(j);
        for site in 0..ell {
            apply_one_site(col, site, u);
        }
    }
}

/// `U ρ U†` with `U = u^{⊗ℓ}`.
fn conjugate_by(rho: &Mat<C64>, ell: usize, u: &Unitary2) -> Mat<C64> {
    let mut y = rho.clone();
    rotate_columns(&mut y, ell, u);
    let mut yt = y.adjoint().to_owned();
    rotate_columns(&mut yt, ell, u);
    yt.adjoint().to_owned()
}

/// `ρ_{A,Q} = Σ_q Π_q ρ_A Π_q` for the sectors of `Q_{n̂,A}`.
pub fn symmetrize(rho: &ReducedDensityMatrix, spec: &ChargeSpec) -> ReducedDensityMatrix {
    let u = single_site_rotation_to_z(spec);
    let ell = rho.ell_a();
    let mut rotated = if u.is_identity() { rho.mat.clone() } else { conjugate_by(&rho.mat, ell, &u) };
    let d = rotated.nrows();
    for j in 0..d {
        let wj = (j as u32).count_ones();
        for i in 0..d {
            if (i as u32).count_ones() != wj {
                rotated[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    let back = if u.is_identity() { rotated } else { conjugate_by(&rotated, ell, &u.adjoint()) };
    ReducedDensityMatrix { ell_a: ell, mat: back }
}

/// `p_q = Tr[Π_q ρ_A Π_q]`, `q = 0..=ℓ_A`, where `q` counts the `−1`
/// eigenvalues of `n̂·σ` in `A`.
pub fn charge_sector_projector_weights(rho: &ReducedDensityMatrix, spec: &ChargeSpec) -> Vec<f64> {
    let u = single_site_rotation_to_z(spec);
    let ell = rho.ell_a();
    let rotated = if u.is_identity() { rho.mat.clone() } else { conjugate_by(&rho.mat, ell, &u) };
    let mut p = vec![0.0; ell + 1];
    for i in 0..rotated.nrows() {
        p[(i as u32).count_ones() as usize] += rotated[(i, i)].re;
    }
    p
}

/// State amplitudes with `u^{⊗ℓ_A}` applied on the `A` sites.
fn rotated_amplitudes(state: &PureState, part: &Bipartition, spec: &ChargeSpec) -> Vec<C64> {
    let u = single_site_rotation_to_z(spec);
    let mut amps = state.amplitudes().to_vec();
    if !u.is_identity() {
        for site in 0..part.ell_a() {
            apply_one_site(&mut amps, site, &u);
        }
    }
    amps
}

/// Sector weights of `ρ_A` computed from the state without forming `ρ_A`.
pub fn sector_weights(state: &PureState, part: &Bipartition, spec: &ChargeSpec) -> Result<Vec<f64>> {
    check_state(state, part)?;
    let amps = rotated_amplitudes(state, part, spec);
    let da = part.dim_a();
    let mut p = vec![0.0; part.ell_a() + 1];
    for (k, a) in amps.iter().enumerate() {
        p[((k % da) as u32).count_ones() as usize] += a.norm_sqr();
    }
    Ok(p)
}

/// `(Tr ρ_A², Tr ρ_{A,Q}²)` from the state, never materializing `ρ_A`.
///
/// Uses `Tr ρ_{A,Q}² = Σ_q ‖M_q M_q†‖²_F` where `M_q` holds the rows of the
/// rotated coefficient matrix with popcount `q`.
pub fn purities(state: &PureState, part: &Bipartition, spec: &ChargeSpec) -> Result<(f64, f64)> {
    check_state(state, part)?;
    let purity = gram_frobenius_sq(coefficient_matrix(state.amplitudes(), part));
    let amps = rotated_amplitudes(state, part, spec);
    let m = coefficient_matrix(&amps, part);
    let (da, db) = (part.dim_a(), part.dim_b());
    let mut rows_by_weight: Vec<Vec<usize>> = vec![Vec::new(); part.ell_a() + 1];
    for a in 0..da {
        rows_by_weight[(a as u32).count_ones() as usize].push(a);
    }
    let mut sym = 0.0;
    for rows in &rows_by_weight {
        let block = Mat::<C64>::from_fn(rows.len(), db, |i, j| m[(rows[i], j)]);
        sym += gram_frobenius_sq(block.as_ref());
    }
    Ok((purity, sym))
}

fn clamp_asymmetry(ds: f64) -> f64 {
    if ds < 0.0 {
        if ds < -ASYMMETRY_FLOOR {
            log::warn!("asymmetry {ds:e} below the round-off floor, clamped to 0");
        } else {
            log::debug!("clamping round-off asymmetry {ds:e} to 0");
        }
        0.0
    } else {
        ds
    }
}

/// Rényi-`n` entanglement asymmetry of the leading block.
pub fn asymmetry(state: &PureState, part: &Bipartition, spec: &ChargeSpec, n: u32) -> Result<f64> {
    match n {
        2 => {
            let (p, ps) = purities(state, part, spec)?;
            if !(p > 0.0 && ps > 0.0) {
                return Err(Error::Degenerate(format!("purities ({p}, {ps}) not positive")));
            }
            Ok(clamp_asymmetry(p.ln() - ps.ln()))
        }
        _ => {
            let rho = reduce(state, part)?;
            let sym = symmetrize(&rho, spec);
            Ok(clamp_asymmetry(renyi(&sym, n)? - renyi(&rho, n)?))
        }
    }
}

/// Rényi-2 asymmetry.
pub fn asymmetry2(state: &PureState, part: &Bipartition, spec: &ChargeSpec) -> Result<f64> {
    asymmetry(state, part, spec, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn sites(l: usize) -> SiteCount {
        SiteCount::new(l).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn plus() -> PureState {
        PureState::new(sites(1), vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]).unwrap()
    }

    fn rho_diag(values: &[f64]) -> ReducedDensityMatrix {
        let d = values.len();
        let ell = d.trailing_zeros() as usize;
        ReducedDensityMatrix::from_matrix(
            ell,
            Mat::from_fn(d, d, |i, j| if i == j { c(values[i]) } else { c(0.0) }),
        )
        .unwrap()
    }

    #[test]
    fn bell_pair_is_maximally_mixed() {
        let bell = PureState::new(sites(2), vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).unwrap();
        let rho = reduce(&bell, &Bipartition::new(sites(2), 1).unwrap()).unwrap();
        rho.validate().unwrap();
        assert!((rho.purity() - 0.5).abs() < 1e-15);
        assert!((renyi2(&rho).unwrap() - LN_2).abs() < 1e-15);
    }

    #[test]
    fn product_state_is_pure_for_all_cuts() {
        let zero = PureState::basis(sites(4), 0).unwrap();
        for ell in 0..=4 {
            let part = Bipartition::new(sites(4), ell).unwrap();
            let rho = reduce(&zero, &part).unwrap();
            assert!((rho.purity() - 1.0).abs() < 1e-15);
            assert_eq!(renyi2(&rho).unwrap(), 0.0);
            assert_eq!(asymmetry2(&zero, &part, &ChargeSpec::z()).unwrap(), 0.0);
        }
    }

    #[test]
    fn renyi2_of_biased_qubit() {
        let rho = rho_diag(&[0.9, 0.1]);
        assert!((renyi2(&rho).unwrap() + 0.82f64.ln()).abs() < 1e-14);
        assert!((renyi2(&rho).unwrap() - 0.198450938723838).abs() < 1e-12);
    }

    #[test]
    fn renyi_n_of_maximally_mixed_is_log_dim() {
        let rho = rho_diag(&[0.25; 4]);
        for n in 2..6 {
            assert!((renyi(&rho, n).unwrap() - 4f64.ln()).abs() < 1e-12);
        }
        assert!(renyi(&rho, 1).is_err());
    }

    #[test]
    fn renyi2_degenerate_input() {
        let rho = ReducedDensityMatrix::from_matrix_unchecked(1, Mat::zeros(2, 2)).unwrap();
        assert!(matches!(renyi2(&rho), Err(Error::Degenerate(_))));
    }

    #[test]
    fn symmetrize_diagonal_is_noop() {
        let rho = rho_diag(&[0.1, 0.2, 0.3, 0.4]);
        let s = symmetrize(&rho, &ChargeSpec::z());
        for i in 0..4 {
            for j in 0..4 {
                assert!((s.matrix()[(i, j)] - rho.matrix()[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn plus_state_symmetrizes_to_half_identity() {
        let part = Bipartition::new(sites(1), 1).unwrap();
        let rho = reduce(&plus(), &part).unwrap();
        let s = symmetrize(&rho, &ChargeSpec::z());
        assert!((s.matrix()[(0, 0)] - c(0.5)).norm() < 1e-15);
        assert!(s.matrix()[(0, 1)].norm() < 1e-15);
        assert!((asymmetry2(&plus(), &part, &ChargeSpec::z()).unwrap() - LN_2).abs() < 1e-14);
        // |+⟩ is an x eigenstate.
        assert!(asymmetry2(&plus(), &part, &ChargeSpec::x()).unwrap() < 1e-14);
    }

    #[test]
    fn weights_of_maximally_mixed() {
        let rho = rho_diag(&[0.125; 8]);
        for spec in [ChargeSpec::z(), ChargeSpec::x(), ChargeSpec::new(0.3, -0.2, 0.5).unwrap()] {
            let p = charge_sector_projector_weights(&rho, &spec);
            let want = [1.0, 3.0, 3.0, 1.0].map(|v| v / 8.0);
            for (a, b) in p.iter().zip(want) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        let zero = PureState::basis(sites(3), 0).unwrap();
        let part = Bipartition::new(sites(3), 3).unwrap();
        assert_eq!(sector_weights(&zero, &part, &ChargeSpec::z()).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn mismatched_bipartition() {
        let zero = PureState::basis(sites(3), 0).unwrap();
        let part = Bipartition::new(sites(4), 2).unwrap();
        assert!(reduce(&zero, &part).is_err());
        assert!(asymmetry2(&zero, &part, &ChargeSpec::z()).is_err());
        assert!(Bipartition::new(sites(3), 4).is_err());
    }

    #[test]
    fn higher_renyi_asymmetry_of_plus() {
        let part = Bipartition::new(sites(1), 1).unwrap();
        for n in 2..5 {
            let ds = asymmetry(&plus(), &part, &ChargeSpec::z(), n).unwrap();
            assert!((ds - LN_2).abs() < 1e-12, "n={n}: {ds}");
        }
    }
}
