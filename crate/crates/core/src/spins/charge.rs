use num_complex::Complex64 as C64;

use super::pauli::{HermitianOperator, Pauli, PauliSum};
use super::SiteCount;
use crate::error::{Error, Result};

pub const AXIS_TOL: f64 = 1e-12;

/// Unit axis `n̂` of the local charge `Q_n̂ = Σ_j n̂·σ_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChargeSpec {
    axis: [f64; 3],
}

impl ChargeSpec {
    /// Normalizes any finite nonzero direction.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidInput(format!("charge axis ({x}, {y}, {z}) has no direction")));
        }
        Ok(Self { axis: [x / norm, y / norm, z / norm] })
    }

    pub fn x() -> Self {
        Self { axis: [1.0, 0.0, 0.0] }
    }

    pub fn y() -> Self {
        Self { axis: [0.0, 1.0, 0.0] }
    }

    pub fn z() -> Self {
        Self { axis: [0.0, 0.0, 1.0] }
    }

    /// `Q_θ = cos θ Q_z + sin θ Q_x`.
    pub fn from_theta(theta: f64) -> Self {
        Self { axis: [theta.sin(), 0.0, theta.cos()] }
    }

    /// Rotates `Q_θ*` by `φ` toward `Q_y`: `cos φ Q_θ* + sin φ Q_y`.
    pub fn from_phi(theta_star: f64, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { axis: [c * theta_star.sin(), s, c * theta_star.cos()] }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn dot(&self, other: &ChargeSpec) -> f64 {
        self.axis.iter().zip(other.axis.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_orthogonal(&self, other: &ChargeSpec) -> bool {
        self.dot(other).abs() < AXIS_TOL
    }

    pub fn is_parallel(&self, other: &ChargeSpec) -> bool {
        (self.dot(other).abs() - 1.0).abs() < AXIS_TOL
    }

    pub fn negated(&self) -> Self {
        Self { axis: self.axis.map(|a| -a) }
    }
}

/// `Q_n̂ = Σ_j (n_x σ^x_j + n_y σ^y_j + n_z σ^z_j)`.
pub fn build_charge(sites: SiteCount, spec: &ChargeSpec) -> HermitianOperator {
    let l = sites.get();
    let [nx, ny, nz] = spec.axis();
    let mut sum = PauliSum::new(l);
    for j in 0..l {
        sum.push(nx, vec![(j, Pauli::X)]);
        sum.push(ny, vec![(j, Pauli::Y)]);
        sum.push(nz, vec![(j, Pauli::Z)]);
    }
    sum.to_operator()
}

/// Row-major 2×2 unitary acting on one site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary2(pub [[C64; 2]; 2]);

impl Unitary2 {
    pub fn identity() -> Self {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        Self([[one, o], [o, one]])
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|row| row.map(|v| v.conj())))
    }

    pub fn matmul(&self, other: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
        let a = &self.0;
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * other[0][j] + a[i][1] * other[1][j];
            }
        }
        out
    }

    /// `u m u†`.
    pub fn conjugate(&self, m: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
        let left = self.matmul(m);
        Unitary2(left).matmul(&self.adjoint().0)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

/// Returns `u` with `u (n̂·σ) u† = σ^z`.
///
/// With `n̂ = (sin θ cos φ, sin θ sin φ, cos θ)`,
/// `u = exp(iθσ^y/2) exp(iφσ^z/2)`. The z axis maps to the identity exactly.
pub fn single_site_rotation_to_z(spec: &ChargeSpec) -> Unitary2 {
    let [nx, ny, nz] = spec.axis();
    if nx == 0.0 && ny == 0.0 && nz > 0.0 {
        return Unitary2::identity();
    }
    let theta = nz.clamp(-1.0, 1.0).acos();
    let phi = ny.atan2(nx);
    let (s, c) = (theta / 2.0).sin_cos();
    let ez = C64::from_polar(1.0, phi / 2.0);
    let ry = [[C64::new(c, 0.0), C64::new(s, 0.0)], [C64::new(-s, 0.0), C64::new(c, 0.0)]];
    let rz = [[ez, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), ez.conj()]];
    Unitary2(Unitary2(ry).matmul(&rz))
}

/// Applies `u` to `site` of a state vector in place.
pub fn apply_one_site(amps: &mut [C64], site: usize, u: &Unitary2) {
    let bit = 1usize << site;
    debug_assert!(amps.len() >= bit << 1 && amps.len().is_power_of_two());
    let [[u00, u01], [u10, u11]] = u.0;
    let n = amps.len();
    let mut base = 0;
    while base < n {
        for i0 in base..base + bit {
            let i1 = i0 | bit;
            let (a0, a1) = (amps[i0], amps[i1]);
            amps[i0] = u00 * a0 + u01 * a1;
            amps[i1] = u10 * a0 + u11 * a1;
        }
        base += bit << 1;
    }
}
