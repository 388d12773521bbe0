//! Truncated Fock-space and qubit operator algebra.
//!
//! Every Hamiltonian and observable in the crate is assembled from the
//! sparse matrices built here. The layout convention is fixed once and for
//! all: the qubit factor comes first, bosonic modes follow in declared
//! order, and composite indices are row-major over the factors. All modules
//! place single-factor operators with [`embed`] rather than hand-built
//! Kronecker products, so ordering mistakes cannot arise.

use crate::error::Error;
use crate::Result;
use num_complex::Complex64;

/// Absolute tolerance for the conjugate-transpose check behind the
/// `hermitian` flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A truncated tensor-product Hilbert space: optional qubit factor followed
/// by one Fock-truncated bosonic mode per entry of `boson_dims`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    has_qubit: bool,
    boson_dims: Vec<usize>,
    total_dim: usize,
}

impl HilbertSpace {
    /// Build a space from its factor content. Every boson cutoff must be at
    /// least 2.
    pub fn new(has_qubit: bool, boson_dims: &[usize]) -> Result<Self> {
        for &d in boson_dims {
            if d < 2 {
                return Err(Error::InvalidDimension(d));
            }
        }
        let mut total: usize = if has_qubit { 2 } else { 1 };
        for &d in boson_dims {
            total = total
                .checked_mul(d)
                .ok_or_else(|| Error::ShapeError("total dimension overflows usize".into()))?;
        }
        Ok(Self { has_qubit, boson_dims: boson_dims.to_vec(), total_dim: total })
    }

    /// Qubit ⊗ single boson, the workhorse space of the Rabi-model builders.
    pub fn qubit_boson(cutoff: usize) -> Result<Self> {
        Self::new(true, &[cutoff])
    }

    /// A single bosonic mode without qubit (effective-phase Hamiltonians).
    pub fn single_boson(cutoff: usize) -> Result<Self> {
        Self::new(false, &[cutoff])
    }

    pub fn has_qubit(&self) -> bool {
        self.has_qubit
    }

    pub fn boson_dims(&self) -> &[usize] {
        &self.boson_dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimensions of all factors in layout order (qubit first when present).
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.boson_dims.len() + 1);
        if self.has_qubit {
            dims.push(2);
        }
        dims.extend_from_slice(&self.boson_dims);
        dims
    }

    pub fn n_factors(&self) -> usize {
        self.boson_dims.len() + usize::from(self.has_qubit)
    }

    /// Factor slot of the `mode`-th boson (modes count from 0).
    pub fn boson_slot(&self, mode: usize) -> usize {
        mode + usize::from(self.has_qubit)
    }
}

/// Coordinate-list sparse complex matrix with a Hermitian flag.
///
/// Entries are kept canonical: sorted by `(row, col)`, duplicates merged,
/// exact zeros dropped. A row-pointer table computed at canonicalization
/// time makes matrix-vector products cheap. Operators are immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
    row_ptr: Vec<usize>,
    hermitian: bool,
}

impl SparseOperator {
    /// Canonicalize raw `(row, col, value)` triplets into an operator.
    /// The Hermitian flag is set from an explicit conjugate-transpose check.
    pub fn from_entries(dim: usize, raw: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        for &(r, c, _) in &raw {
            if r >= dim || c >= dim {
                return Err(Error::ShapeError(format!(
                    "entry ({r}, {c}) outside a {dim}x{dim} operator"
                )));
            }
        }
        let mut entries = raw;
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, Complex64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v.re != 0.0 || v.im != 0.0);
        let row_ptr = build_row_ptr(dim, &merged);
        let hermitian = hermiticity_deviation_sorted(&merged) <= HERMITIAN_TOL;
        Ok(Self { dim, entries: merged, row_ptr, hermitian })
    }

    /// Zero operator.
    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: Vec::new(), row_ptr: vec![0; dim + 1], hermitian: true }
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> Self {
        let entries: Vec<_> = (0..dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect();
        let row_ptr = build_row_ptr(dim, &entries);
        Self { dim, entries, row_ptr, hermitian: true }
    }

    /// Diagonal operator from real values.
    pub fn diagonal(values: &[f64]) -> Self {
        let entries: Vec<_> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i, i, Complex64::new(v, 0.0)))
            .collect();
        let row_ptr = build_row_ptr(values.len(), &entries);
        Self { dim: values.len(), entries, row_ptr, hermitian: true }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Canonical `(row, col, value)` triplets, sorted by coordinates.
    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    /// Value at `(row, col)`; zero when absent.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        match self.entries[lo..hi].binary_search_by_key(&col, |&(_, c, _)| c) {
            Ok(k) => self.entries[lo + k].2,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest absolute mismatch between the operator and its conjugate
    /// transpose. Zero for an exactly Hermitian matrix.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation_sorted(&self.entries)
    }

    /// Matrix-vector product `self * x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "vector length must match operator dimension");
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// Sum of two operators.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ShapeError(format!("add: {} vs {}", self.dim, other.dim)));
        }
        let mut raw = Vec::with_capacity(self.entries.len() + other.entries.len());
        raw.extend_from_slice(&self.entries);
        raw.extend_from_slice(&other.entries);
        Self::from_entries(self.dim, raw)
    }

    /// Difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Scalar multiple. Scaling by zero yields the zero operator.
    pub fn scale(&self, factor: Complex64) -> Self {
        let raw = self
            .entries
            .iter()
            .map(|&(r, c, v)| (r, c, v * factor))
            .collect();
        Self::from_entries(self.dim, raw).expect("indices already validated")
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::ShapeError(format!("matmul: {} vs {}", self.dim, other.dim)));
        }
        let mut raw = Vec::new();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (_, mid, a) = self.entries[k];
                for j in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    let (_, c, b) = other.entries[j];
                    if scratch[c].re == 0.0 && scratch[c].im == 0.0 {
                        touched.push(c);
                    }
                    scratch[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = scratch[c];
                if v.re != 0.0 || v.im != 0.0 {
                    raw.push((r, c, v));
                }
                scratch[c] = Complex64::new(0.0, 0.0);
            }
            touched.clear();
        }
        Self::from_entries(self.dim, raw)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let raw = self
            .entries
            .iter()
            .map(|&(r, c, v)| (c, r, v.conj()))
            .collect();
        Self::from_entries(self.dim, raw).expect("indices already validated")
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v.norm()).fold(0.0, f64::max)
    }

    /// `exp(self)` applied to a vector via scaled Taylor summation.
    ///
    /// Accurate to roughly `tol` in relative terms; used for truncated
    /// squeeze/displacement transformations where the exponent is
    /// anti-Hermitian and well conditioned.
    pub fn expm_apply(&self, x: &[Complex64], tol: f64) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim, "vector length must match operator dimension");
        // 1-norm upper bound picks the scaling depth.
        let mut col_sums = vec![0.0f64; self.dim];
        for &(_, c, v) in &self.entries {
            col_sums[c] += v.norm();
        }
        let norm1 = col_sums.iter().copied().fold(0.0, f64::max);
        let squarings = if norm1 <= 1.0 { 0 } else { norm1.log2().ceil() as u32 };
        let steps = 1u64 << squarings.min(48);
        let inv = 1.0 / steps as f64;
        let mut w: Vec<Complex64> = x.to_vec();
        for _ in 0..steps {
            let mut acc = w.clone();
            let mut term = w.clone();
            for k in 1..200u32 {
                let t = self.apply(&term);
                let f = inv / f64::from(k);
                for (dst, src) in term.iter_mut().zip(t.iter()) {
                    *dst = src * f;
                }
                let mut tnorm = 0.0;
                for (a, t) in acc.iter_mut().zip(term.iter()) {
                    *a += t;
                    tnorm += t.norm_sqr();
                }
                let anorm: f64 = acc.iter().map(|z| z.norm_sqr()).sum();
                if tnorm.sqrt() <= tol * anorm.sqrt().max(1e-300) {
                    break;
                }
            }
            w = acc;
        }
        w
    }
}

fn build_row_ptr(dim: usize, sorted: &[(usize, usize, Complex64)]) -> Vec<usize> {
    let mut ptr = vec![0usize; dim + 1];
    for &(r, _, _) in sorted {
        ptr[r + 1] += 1;
    }
    for i in 0..dim {
        ptr[i + 1] += ptr[i];
    }
    ptr
}

fn hermiticity_deviation_sorted(entries: &[(usize, usize, Complex64)]) -> f64 {
    let mut max_dev = 0.0f64;
    for &(r, c, v) in entries {
        let transposed = match entries.binary_search_by_key(&(c, r), |&(rr, cc, _)| (rr, cc)) {
            Ok(k) => entries[k].2,
            Err(_) => Complex64::new(0.0, 0.0),
        };
        max_dev = max_dev.max((v - transposed.conj()).norm());
    }
    max_dev
}

/// Annihilation operator `b` on a Fock space truncated at `dim` levels:
/// `<n-1|b|n> = sqrt(n)`.
pub fn annihilation(dim: usize) -> Result<SparseOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let entries = (1..dim)
        .map(|n| (n - 1, n, Complex64::new((n as f64).sqrt(), 0.0)))
        .collect();
    SparseOperator::from_entries(dim, entries)
}

/// Creation operator `b†`.
pub fn creation(dim: usize) -> Result<SparseOperator> {
    Ok(annihilation(dim)?.dagger())
}

/// Number operator `b†b` (exact diagonal `0..dim-1`).
pub fn number(dim: usize) -> Result<SparseOperator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    Ok(SparseOperator::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>()))
}

/// Position-like quadrature `b + b†`.
pub fn position_sum(dim: usize) -> Result<SparseOperator> {
    let b = annihilation(dim)?;
    b.add(&b.dagger())
}

/// Pauli axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Standard 2x2 Pauli matrix. Basis ordering: index 0 = up (`sigma_z` +1),
/// index 1 = down.
pub fn pauli(axis: PauliAxis) -> SparseOperator {
    let one = Complex64::new(1.0, 0.0);
    let entries = match axis {
        PauliAxis::X => vec![(0, 1, one), (1, 0, one)],
        PauliAxis::Y => vec![(0, 1, Complex64::new(0.0, -1.0)), (1, 0, Complex64::new(0.0, 1.0))],
        PauliAxis::Z => vec![(0, 0, one), (1, 1, -one)],
    };
    SparseOperator::from_entries(2, entries).expect("2x2 indices are valid")
}

/// Place a single-factor operator into the full space at the given factor
/// slot (Kronecker product with identities on all other factors).
pub fn embed(space: &HilbertSpace, slot: usize, op: &SparseOperator) -> Result<SparseOperator> {
    let dims = space.factor_dims();
    if slot >= dims.len() {
        return Err(Error::ShapeError(format!(
            "slot {slot} out of range for {} factors",
            dims.len()
        )));
    }
    if op.dim() != dims[slot] {
        return Err(Error::ShapeError(format!(
            "operator dimension {} does not match factor {} dimension {}",
            op.dim(),
            slot,
            dims[slot]
        )));
    }
    let inner: usize = dims[slot + 1..].iter().product();
    let outer: usize = dims[..slot].iter().product();
    let mut raw = Vec::with_capacity(op.nnz() * outer * inner);
    for o in 0..outer {
        for &(r, c, v) in op.entries() {
            let row_base = (o * dims[slot] + r) * inner;
            let col_base = (o * dims[slot] + c) * inner;
            for i in 0..inner {
                raw.push((row_base + i, col_base + i, v));
            }
        }
    }
    SparseOperator::from_entries(space.total_dim(), raw)
}

/// Conserved parity of the space: `sigma_z` on the qubit factor (when
/// present) times `exp(i pi n)` on every bosonic mode. Built with exact
/// integer signs, so commutators with parity-even Hamiltonians vanish
/// bit-exactly.
pub fn parity_operator(space: &HilbertSpace) -> Result<SparseOperator> {
    let mut op = if space.has_qubit() {
        embed(space, 0, &pauli(PauliAxis::Z))?
    } else {
        SparseOperator::identity(space.total_dim())
    };
    for (mode, &d) in space.boson_dims().iter().enumerate() {
        let signs: Vec<f64> = (0..d).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mode_parity = embed(space, space.boson_slot(mode), &SparseOperator::diagonal(&signs))?;
        op = op.matmul(&mode_parity)?;
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annihilation_smallest_cutoff() {
        let b = annihilation(2).unwrap();
        assert_eq!(b.nnz(), 1);
        assert_eq!(b.get(0, 1), c(1.0, 0.0));
        assert!(!b.is_hermitian());
    }

    #[test]
    fn annihilation_ladder_entries() {
        let b = annihilation(4).unwrap();
        assert_eq!(b.get(0, 1), c(1.0, 0.0));
        assert_eq!(b.get(1, 2), c(2.0f64.sqrt(), 0.0));
        assert_eq!(b.get(2, 3), c(3.0f64.sqrt(), 0.0));
        assert_eq!(b.nnz(), 3);
    }

    #[test]
    fn annihilation_rejects_tiny_cutoff() {
        assert!(matches!(annihilation(1), Err(Error::InvalidDimension(1))));
        assert!(matches!(annihilation(0), Err(Error::InvalidDimension(0))));
    }

    #[test]
    fn number_operator_is_diagonal_count() {
        let b = annihilation(4).unwrap();
        let n = b.dagger().matmul(&b).unwrap();
        for k in 0..4 {
            assert!((n.get(k, k) - c(k as f64, 0.0)).norm() < 1e-14);
        }
        assert_eq!(n.nnz(), 3); // the zero at (0,0) is dropped
        assert!(n.is_hermitian());
    }

    #[test]
    fn pauli_matrices() {
        let x = pauli(PauliAxis::X);
        assert_eq!(x.get(0, 1), c(1.0, 0.0));
        assert_eq!(x.get(1, 0), c(1.0, 0.0));
        let z = pauli(PauliAxis::Z);
        assert_eq!(z.get(0, 0), c(1.0, 0.0));
        assert_eq!(z.get(1, 1), c(-1.0, 0.0));
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            let p = pauli(axis);
            assert!(p.is_hermitian());
            let sq = p.matmul(&p).unwrap();
            let dev = sq.sub(&SparseOperator::identity(2)).unwrap().frobenius_norm();
            assert_eq!(dev, 0.0);
        }
    }

    #[test]
    fn embed_sigma_z_in_qubit_fock3() {
        let space = HilbertSpace::new(true, &[3]).unwrap();
        let op = embed(&space, 0, &pauli(PauliAxis::Z)).unwrap();
        assert_eq!(op.dim(), 6);
        let expected = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
        for (i, &e) in expected.iter().enumerate() {
            assert_eq!(op.get(i, i), c(e, 0.0));
        }
    }

    #[test]
    fn embed_annihilation_in_qubit_fock3() {
        let space = HilbertSpace::new(true, &[3]).unwrap();
        let op = embed(&space, 1, &annihilation(3).unwrap()).unwrap();
        for (r, col) in [(0usize, 1usize), (1, 2), (3, 4), (4, 5)] {
            assert!(op.get(r, col).norm() > 0.0, "missing entry at ({r},{col})");
        }
        assert_eq!(op.nnz(), 4);
    }

    #[test]
    fn embedded_distinct_slots_commute() {
        let space = HilbertSpace::new(true, &[3]).unwrap();
        let a = embed(&space, 0, &pauli(PauliAxis::Z)).unwrap();
        let b = embed(&space, 1, &annihilation(3).unwrap()).unwrap();
        let comm = a.matmul(&b).unwrap().sub(&b.matmul(&a).unwrap()).unwrap();
        assert_eq!(comm.frobenius_norm(), 0.0);
    }

    #[test]
    fn embed_dimension_mismatch() {
        let space = HilbertSpace::new(true, &[3]).unwrap();
        assert!(matches!(
            embed(&space, 1, &annihilation(4).unwrap()),
            Err(Error::ShapeError(_))
        ));
    }

    #[test]
    fn truncated_commutator_identity_except_top() {
        let dim = 6;
        let b = annihilation(dim).unwrap();
        let comm = b.matmul(&b.dagger()).unwrap().sub(&b.dagger().matmul(&b).unwrap()).unwrap();
        for r in 0..dim - 1 {
            assert!((comm.get(r, r) - c(1.0, 0.0)).norm() < 1e-14);
        }
        assert!((comm.get(dim - 1, dim - 1) - c(-((dim - 1) as f64), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn scale_by_zero_is_zero_operator() {
        let b = annihilation(5).unwrap();
        let z = b.scale(c(0.0, 0.0));
        assert_eq!(z.nnz(), 0);
        assert!(z.is_hermitian());
    }

    #[test]
    fn sum_with_dagger_is_hermitian() {
        let b = annihilation(5).unwrap();
        let x = b.add(&b.dagger()).unwrap();
        assert!(x.is_hermitian());
        assert_eq!(x.hermiticity_deviation(), 0.0);
    }

    #[test]
    fn add_dimension_mismatch() {
        let a = annihilation(4).unwrap();
        let b = annihilation(5).unwrap();
        assert!(matches!(a.add(&b), Err(Error::ShapeError(_))));
    }

    #[test]
    fn space_invariants() {
        let space = HilbertSpace::new(true, &[4, 7]).unwrap();
        assert_eq!(space.total_dim(), 2 * 4 * 7);
        assert_eq!(space.factor_dims(), vec![2, 4, 7]);
        assert!(HilbertSpace::new(false, &[1]).is_err());
    }

    #[test]
    fn parity_squares_to_identity() {
        let space = HilbertSpace::new(true, &[5]).unwrap();
        let p = parity_operator(&space).unwrap();
        let dev = p
            .matmul(&p)
            .unwrap()
            .sub(&SparseOperator::identity(space.total_dim()))
            .unwrap()
            .frobenius_norm();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn expm_apply_matches_scalar_exponential() {
        // exp(diag(d)) acting on a vector is elementwise exp.
        let op = SparseOperator::diagonal(&[0.3, -1.2, 2.5]);
        let x = vec![c(1.0, 0.0), c(0.5, -0.25), c(-2.0, 1.0)];
        let y = op.expm_apply(&x, 1e-14);
        for (i, &d) in [0.3f64, -1.2, 2.5].iter().enumerate() {
            let expected = x[i] * d.exp();
            assert!((y[i] - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn matvec_matches_entries() {
        let b = annihilation(4).unwrap();
        let x = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)];
        let y = b.apply(&x);
        assert_eq!(y[0], c(1.0, 0.0));
        assert_eq!(y[2], c(2.0 * 3.0f64.sqrt(), 0.0));
    }
}
