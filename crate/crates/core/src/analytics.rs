//! Closed-form ensemble averages and the energy ↔ charge-density correspondence.
//!
//! Binomial and hypergeometric sums are evaluated in exact rationals and only
//! converted to `f64` at the end.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

const BINOMIAL_TABLE_MAX: usize = 64;

fn pascal() -> &'static Vec<Vec<BigInt>> {
    static TABLE: OnceLock<Vec<Vec<BigInt>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
        for n in 1..=BINOMIAL_TABLE_MAX {
            let prev = &rows[n - 1];
            let mut row = vec![BigInt::one(); n + 1];
            for k in 1..n {
                row[k] = &prev[k - 1] + &prev[k];
            }
            rows.push(row);
        }
        rows
    })
}

/// Exact `C(n, k)`, zero unless `0 ≤ k ≤ n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let (n, k) = (n as usize, k as usize);
    if n <= BINOMIAL_TABLE_MAX {
        return pascal()[n][k].clone();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn rat(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn pow2(e: i64) -> BigRational {
    let p = rat(BigInt::one() << e.unsigned_abs());
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_range(l: usize, ell_a: usize, m: usize) -> Result<()> {
    if ell_a > l || m > l {
        return Err(Error::InvalidInput(format!("(L={l}, ℓ_A={ell_a}, M={m}) out of range")));
    }
    Ok(())
}

/// `₂F₁(−2m, −M; 1−2m+L−M; −1)` as an exact terminating series.
pub fn hyp2f1_terminating_exact(m: u32, big_m: u32, l: i64) -> Result<BigRational> {
    let a = -2 * m as i64;
    let b = -(big_m as i64);
    let c = 1 + a + l - big_m as i64;
    let terms = (2 * m).min(big_m) as i64;
    if c <= 0 && terms >= 1 - c {
        return Err(Error::InvalidInput(format!(
            "₂F₁ pole: c = {c} reaches zero before the series terminates"
        )));
    }
    let mut sum = BigRational::one();
    let mut term = BigRational::one();
    for n in 0..terms {
        // term_{n+1} / term_n = (a+n)(b+n) / ((c+n)(n+1)) · (−1)
        term = term * rat(BigInt::from((a + n) * (b + n)))
            / rat(BigInt::from((c + n) * (n + 1)));
        term = -term;
        sum += &term;
    }
    Ok(sum)
}

pub fn hyp2f1_terminating(m: u32, big_m: u32, l: i64) -> Result<f64> {
    hyp2f1_terminating_exact(m, big_m, l).map(|r| to_f64(&r))
}

/// `Σ_n (−1)^n C(2m, n) C(L−2m, M−n)`, equal to `C(L−2m, M) F(m, L, M)` off the poles.
fn alternating_sum(m: i64, l: i64, big_m: i64) -> BigInt {
    let mut s = BigInt::zero();
    for n in 0..=2 * m {
        let t = binomial(2 * m, n) * binomial(l - 2 * m, big_m - n);
        if n % 2 == 0 {
            s += t;
        } else {
            s -= t;
        }
    }
    s
}

/// `χ(L, ℓ_A, M) = 2^{−ℓ_A} Σ_m C(2m,m) 2^{−2m} C(ℓ_A, 2m) [C(L−2m, M) F(m,L,M)]²`.
///
/// The bracket is evaluated as the alternating binomial sum, which stays
/// finite where the hypergeometric normalization has a removable pole.
pub fn chi_exact(l: usize, ell_a: usize, m: usize) -> Result<BigRational> {
    check_range(l, ell_a, m)?;
    let (l, ell, big_m) = (l as i64, ell_a as i64, m as i64);
    let mut sum = BigRational::zero();
    for k in 0..=ell / 2 {
        let alt = alternating_sum(k, l, big_m);
        let w = binomial(2 * k, k) * binomial(ell, 2 * k) * &alt * &alt;
        sum += rat(w) * pow2(-2 * k);
    }
    Ok(sum * pow2(-ell))
}

pub fn chi(l: usize, ell_a: usize, m: usize) -> Result<f64> {
    chi_exact(l, ell_a, m).map(|r| to_f64(&r))
}

/// `Tr[Π^z_j Π^x_k] = 2^{−ℓ_A} d_{A,j} d_{A,k}`.
pub fn trace_a_exact(ell_a: usize, j: usize, k: usize) -> BigRational {
    let ell = ell_a as i64;
    rat(binomial(ell, j as i64) * binomial(ell, k as i64)) * pow2(-ell)
}

pub fn trace_a(ell_a: usize, j: usize, k: usize) -> f64 {
    to_f64(&trace_a_exact(ell_a, j, k))
}

/// `Tr[Π^z_j Π^x_k Π^z_{j′} Π^x_k]` over the `ℓ_A`-site block.
pub fn trace_aa_exact(ell_a: usize, j: usize, jp: usize, k: usize) -> BigRational {
    let (ell, j, jp, k) = (ell_a as i64, j as i64, jp as i64, k as i64);
    let mut outer = BigInt::zero();
    for m in 0..=k {
        let t = 2 * (k - m);
        let mut inner = BigInt::zero();
        for n in 0..=t.min(j) {
            let left = binomial(t, n) * binomial(ell - t, j - n);
            if left.is_zero() {
                continue;
            }
            for np in 0..=t.min(jp) {
                let v = &left * binomial(t, np) * binomial(ell - t, jp - np);
                if (n + np) % 2 == 0 {
                    inner += v;
                } else {
                    inner -= v;
                }
            }
        }
        outer += binomial(k, m) * binomial(ell - k, k - m) * inner;
    }
    rat(binomial(ell, k) * outer) * pow2(-2 * ell)
}

pub fn trace_aa(ell_a: usize, j: usize, jp: usize, k: usize) -> f64 {
    to_f64(&trace_aa_exact(ell_a, j, jp, k))
}

fn sector_dims_big(l: usize, ell_a: usize, m: usize) -> (Vec<BigInt>, Vec<BigInt>) {
    let (l, ell, big_m) = (l as i64, ell_a as i64, m as i64);
    let d_a = (0..=ell).map(|q| binomial(ell, q)).collect();
    let d_b = (0..=ell).map(|q| binomial(l - ell, big_m - q)).collect();
    (d_a, d_b)
}

/// `R = E[Tr ρ_{A,Q⊥}²] / E[Tr ρ_A²]` over the U(1)-Haar ensemble.
pub fn ratio_r_exact(l: usize, ell_a: usize, m: usize) -> Result<BigRational> {
    let chi = chi_exact(l, ell_a, m)?;
    let (d_a, d_b) = sector_dims_big(l, ell_a, m);
    let ell = ell_a as i64;
    let s_aab: BigInt = d_a.iter().zip(&d_b).map(|(a, b)| a * a * b).sum();
    let s_abb: BigInt = d_a.iter().zip(&d_b).map(|(a, b)| a * b * b).sum();
    let num = rat(binomial(2 * ell, ell) * &s_aab) * pow2(-2 * ell) + chi;
    let den = rat(s_aab + s_abb);
    if den.is_zero() {
        return Err(Error::Degenerate("empty charge sector".into()));
    }
    Ok(num / den)
}

pub fn ratio_r(l: usize, ell_a: usize, m: usize) -> Result<f64> {
    ratio_r_exact(l, ell_a, m).map(|r| to_f64(&r))
}

/// `E[ΔS⁽²⁾] ≃ −log R` for a charge orthogonal to the conserved one.
pub fn predicted_asymmetry_u1(l: usize, ell_a: usize, m: usize) -> Result<f64> {
    let r = ratio_r(l, ell_a, m)?;
    Ok((-r.ln()).max(0.0))
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `−log[(1 + 2^{−L} C(2ℓ_A, ℓ_A)) / (2^{2ℓ_A−L} + 1)]` for plain Haar states.
pub fn predicted_asymmetry_haar(l: usize, ell_a: usize) -> Result<f64> {
    check_range(l, ell_a, 0)?;
    let ln2 = std::f64::consts::LN_2;
    let ln_central: f64 = (1..=ell_a).map(|i| ((ell_a + i) as f64 / i as f64).ln()).sum();
    let ds = softplus((2.0 * ell_a as f64 - l as f64) * ln2) - softplus(ln_central - l as f64 * ln2);
    Ok(ds.max(0.0))
}

/// `E[Tr ρ_A²] = Σ_q d_{A,q} d_{B,q} (d_{A,q} + d_{B,q}) / (d_M (d_M + 1))`.
pub fn avg_purity_u1_exact(l: usize, ell_a: usize, m: usize) -> Result<BigRational> {
    check_range(l, ell_a, m)?;
    let (d_a, d_b) = sector_dims_big(l, ell_a, m);
    let num: BigInt = d_a.iter().zip(&d_b).map(|(a, b)| a * b * (a + b)).sum();
    let d_m = binomial(l as i64, m as i64);
    Ok(BigRational::new(num, &d_m * (&d_m + 1u32)))
}

pub fn avg_purity_u1(l: usize, ell_a: usize, m: usize) -> Result<f64> {
    avg_purity_u1_exact(l, ell_a, m).map(|r| to_f64(&r))
}

/// Nearest charge sector for a rescaled energy density, `M = round(L(ε/ε* + 1)/2)`
/// rounding halves up. Inputs outside `[−1, 1]` are clamped with a warning.
pub fn energy_charge_map(eps_ratio: f64, l: usize) -> usize {
    let mut x = eps_ratio;
    if !(-1.0..=1.0).contains(&x) {
        log::warn!("energy density {eps_ratio} outside [-1, 1], clamped");
        x = x.clamp(-1.0, 1.0);
    }
    let m = (l as f64 * (x + 1.0) / 2.0 + 0.5).floor();
    (m.max(0.0) as usize).min(l)
}

/// `ε/ε* = 2M/L − 1`.
pub fn sector_to_energy(m: usize, l: usize) -> f64 {
    2.0 * m as f64 / l as f64 - 1.0
}

pub const DOS_MIN_LEVELS: usize = 64;

/// Gaussian fit to the level density.
#[derive(Clone, Debug, PartialEq)]
pub struct DosFit {
    /// Fitted peak energy.
    pub e_p: f64,
    /// Fitted width over `√L`.
    pub eps_star: f64,
    /// Spectrum standard deviation over `√L`.
    pub eps_star_moment: f64,
    /// Fitted Gaussian amplitude in states per unit energy.
    pub amplitude: f64,
    /// RMS residual relative to the fitted peak height.
    pub rel_residual: f64,
    pub bin_width: f64,
    /// Left edge of the first bin.
    pub hist_start: f64,
    /// Levels per bin.
    pub counts: Vec<usize>,
    pub sites: usize,
}

impl DosFit {
    /// `(E − E_p) / (L ε*)`, or `E / (L ε*)` without the shift.
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin centers, aligned with `counts`.
    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.counts.len()).map(|b| self.hist_start + (b as f64 + 0.5) * self.bin_width).collect()
    }

    pub fn rescale(&self, energy: f64, shift: bool) -> f64 {
        let e = if shift { energy - self.e_p } else { energy };
        e / (self.sites as f64 * self.eps_star)
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn gaussian(x: f64, p: &[f64; 3]) -> f64 {
    p[0] * (-(x - p[1]).powi(2) / (2.0 * p[2] * p[2])).exp()
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Levenberg–Marquardt for `A exp(−(x−μ)²/2σ²)`.
fn fit_gaussian(xs: &[f64], ys: &[f64], start: [f64; 3]) -> Result<[f64; 3]> {
    let cost = |p: &[f64; 3]| xs.iter().zip(ys).map(|(&x, &y)| (y - gaussian(x, p)).powi(2)).sum::<f64>();
    let mut p = start;
    let mut c = cost(&p);
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let g = gaussian(x, &p);
            let dx = x - p[1];
            let jac = [g / p[0], g * dx / (p[2] * p[2]), g * dx * dx / p[2].powi(3)];
            let r = y - g;
            for i in 0..3 {
                jtr[i] += jac[i] * r;
                for k in 0..3 {
                    jtj[i][k] += jac[i] * jac[k];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj;
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(1e-300);
            }
            let Some(step) = solve3(a, jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1], (p[2] + step[2]).abs()];
            let ct = cost(&trial);
            if ct.is_finite() && ct < c {
                let rel = (c - ct) / c.max(1e-300);
                p = trial;
                c = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    if !(p.iter().all(|v| v.is_finite()) && p[0] > 0.0 && p[2] > 0.0) {
        return Err(Error::FitFailure(format!("Gaussian fit diverged: {p:?}")));
    }
    Ok(p)
}

/// Gaussian least-squares fit to a Freedman–Diaconis histogram of the spectrum.
pub fn dos_fit(energies: &[f64], l: usize) -> Result<DosFit> {
    let n = energies.len();
    if n < DOS_MIN_LEVELS {
        return Err(Error::InvalidInput(format!("{n} levels, need at least {DOS_MIN_LEVELS}")));
    }
    if l == 0 {
        return Err(Error::InvalidInput("zero chain length".into()));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidInput("non-finite energy".into()));
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let var = sorted.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n as f64;
    let (lo, hi) = (sorted[0], sorted[n - 1]);
    if !(var > 0.0) || hi <= lo {
        return Err(Error::FitFailure("spectrum has zero variance".into()));
    }
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let mut width = 2.0 * iqr / (n as f64).cbrt();
    if !(width > 0.0) {
        width = 3.49 * var.sqrt() / (n as f64).cbrt();
    }
    let bins = (((hi - lo) / width).ceil() as usize).clamp(1, n);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &e in &sorted {
        counts[(((e - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let xs: Vec<f64> = (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64 / width).collect();
    if bins < 3 {
        return Err(Error::FitFailure(format!("only {bins} histogram bins")));
    }
    let sd = var.sqrt();
    let start = [n as f64 / (sd * (2.0 * std::f64::consts::PI).sqrt()), mean, sd];
    let p = fit_gaussian(&xs, &ys, start)?;
    let rms = (xs.iter().zip(&ys).map(|(&x, &y)| (y - gaussian(x, &p)).powi(2)).sum::<f64>()
        / bins as f64)
        .sqrt();
    let sqrt_l = (l as f64).sqrt();
    Ok(DosFit {
        e_p: p[1],
        eps_star: p[2] / sqrt_l,
        eps_star_moment: sd / sqrt_l,
        amplitude: p[0],
        rel_residual: rms / p[0],
        bin_width: width,
        hist_start: lo,
        counts,
        sites: l,
    })
}
