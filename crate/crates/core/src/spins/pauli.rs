//! Pauli strings acting on computational basis indices, and the sparse
//! Hermitian operators assembled from them.
//!
//! Site `j` (0-based) lives in bit `j` of the basis index. A set bit is the
//! σ^z = −1 state.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Action on a single basis bit: whether the bit flips and the phase picked up.
    #[inline]
    pub fn act(self, bit: bool) -> (bool, C64) {
        match (self, bit) {
            (Pauli::X, _) => (true, C64::new(1.0, 0.0)),
            (Pauli::Y, false) => (true, C64::new(0.0, 1.0)),
            (Pauli::Y, true) => (true, C64::new(0.0, -1.0)),
            (Pauli::Z, false) => (false, C64::new(1.0, 0.0)),
            (Pauli::Z, true) => (false, C64::new(-1.0, 0.0)),
        }
    }

    /// Dense 2×2 matrix in the (|0⟩, |1⟩) basis, row-major.
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }
}

/// A real-weighted product of Paulis on distinct sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    pub coeff: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(coeff: f64, ops: Vec<(usize, Pauli)>) -> Self {
        Self { coeff, ops }
    }

    /// Maps basis state `b` to `(b', amplitude)` with `P|b⟩ = amplitude |b'⟩`.
    #[inline]
    pub fn apply(&self, b: usize) -> (usize, C64) {
        let mut out = b;
        let mut phase = C64::new(self.coeff, 0.0);
        for &(site, p) in &self.ops {
            let mask = 1usize << site;
            let (flip, ph) = p.act(b & mask != 0);
            if flip {
                out ^= mask;
            }
            phase *= ph;
        }
        (out, phase)
    }
}

/// Sum of Pauli strings on an `sites`-site chain.
#[derive(Clone, Debug, Default)]
pub struct PauliSum {
    sites: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(sites: usize) -> Self {
        Self { sites, terms: Vec::new() }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    /// Adds `coeff · Π ops`; zero coefficients are skipped.
    pub fn push(&mut self, coeff: f64, ops: Vec<(usize, Pauli)>) -> &mut Self {
        debug_assert!(ops.iter().all(|&(s, _)| s < self.sites));
        if coeff != 0.0 {
            self.terms.push(PauliString::new(coeff, ops));
        }
        self
    }

    /// Streams every term over the basis, one column at a time.
    pub fn to_operator(&self) -> HermitianOperator {
        let dim = 1usize << self.sites;
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut rows = Vec::new();
        let mut vals = Vec::new();
        let mut scratch: Vec<(usize, C64)> = Vec::with_capacity(self.terms.len());
        col_ptr.push(0);
        for b in 0..dim {
            scratch.clear();
            scratch.extend(self.terms.iter().map(|t| t.apply(b)));
            scratch.sort_unstable_by_key(|&(r, _)| r);
            let mut k = 0;
            while k < scratch.len() {
                let r = scratch[k].0;
                let mut v = C64::new(0.0, 0.0);
                while k < scratch.len() && scratch[k].0 == r {
                    v += scratch[k].1;
                    k += 1;
                }
                if v != C64::new(0.0, 0.0) {
                    rows.push(r);
                    vals.push(v);
                }
            }
            col_ptr.push(rows.len());
        }
        HermitianOperator { sites: self.sites, dim, col_ptr, rows, vals }
    }
}

/// Sparse (compressed-column) operator on the 2^L basis with a dense view.
///
/// Builders in this crate only produce Hermitian matrices; operators coming
/// from [`HermitianOperator::from_triplets`] are checked by the consumers that
/// need Hermiticity.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    sites: usize,
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<C64>,
}

impl HermitianOperator {
    /// Assembles an operator from `(row, col, value)` triplets; duplicates add up.
    pub fn from_triplets(sites: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let dim = 1usize << sites;
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::InvalidInput(format!(
                "entry ({r}, {c}) outside a {dim}x{dim} operator"
            )));
        }
        let mut sorted: Vec<_> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (c, r));
        let mut col_ptr = vec![0usize; dim + 1];
        let mut rows = Vec::with_capacity(sorted.len());
        let mut vals: Vec<C64> = Vec::with_capacity(sorted.len());
        let mut cols = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            if cols.last() == Some(&c) && rows.last() == Some(&r) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        for &c in &cols {
            col_ptr[c + 1] += 1;
        }
        for c in 0..dim {
            col_ptr[c + 1] += col_ptr[c];
        }
        Ok(Self { sites, dim, col_ptr, rows, vals })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates stored `(row, col, value)` entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1]).map(move |k| (self.rows[k], c, self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let span = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.rows[span.clone()].binary_search(&row) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(r, c, _)| r == c)
    }

    /// Largest elementwise deviation `|H_rc − conj(H_cr)|`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Σ |H_rc|²`, which is `Tr H²` for Hermitian `H`.
    pub fn frobenius_sq(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "vector length must match operator dimension");
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Dense real view, available when every stored entry has zero imaginary part.
    pub fn to_dense_real(&self) -> Option<Mat<f64>> {
        if !self.is_real() {
            return None;
        }
        let mut m = Mat::<f64>::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v.re;
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_acts_with_imaginary_phases() {
        let s = PauliString::new(1.0, vec![(0, Pauli::Y)]);
        assert_eq!(s.apply(0), (1, C64::new(0.0, 1.0)));
        assert_eq!(s.apply(1), (0, C64::new(0.0, -1.0)));
    }

    #[test]
    fn yy_is_real() {
        let mut sum = PauliSum::new(2);
        sum.push(1.0, vec![(0, Pauli::Y), (1, Pauli::Y)]);
        let op = sum.to_operator();
        assert!(op.is_real());
        assert_eq!(op.get(3, 0), C64::new(-1.0, 0.0));
        assert_eq!(op.get(2, 1), C64::new(1.0, 0.0));
    }

    #[test]
    fn cancelling_terms_are_dropped() {
        let mut sum = PauliSum::new(1);
        sum.push(1.0, vec![(0, Pauli::X)]).push(-1.0, vec![(0, Pauli::X)]);
        assert_eq!(sum.to_operator().nnz(), 0);
    }

    #[test]
    fn triplets_merge_duplicates() {
        let one = C64::new(1.0, 0.0);
        let op = HermitianOperator::from_triplets(1, &[(0, 1, one), (1, 0, one), (0, 1, one)]).unwrap();
        assert_eq!(op.get(0, 1), C64::new(2.0, 0.0));
        assert!(op.hermiticity_error() > 0.5);
        assert!(HermitianOperator::from_triplets(1, &[(2, 0, one)]).is_err());
    }
}
