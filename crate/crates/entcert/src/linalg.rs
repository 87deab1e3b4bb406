//! Dense complex linear algebra: tensor products, partial trace, Hermitian
//! eigendecomposition, Takagi factorization of complex symmetric matrices,
//! matrix logarithm on the support, and PSD feasibility checks.
//!
//! Everything here is a pure function of its inputs. Matrices are stored
//! row-major; eigen/SVD kernels are delegated to nalgebra and re-wrapped.
//!
//! Index convention for multi-party operators: party 0 is the most
//! significant digit, i.e. a computational sequence (s_0, ..., s_{n-1})
//! maps to the flat index sum_i s_i * d_{i+1} * ... * d_{n-1}.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{EntcertError, Result};

pub type C64 = Complex<f64>;

pub const C_ZERO: C64 = Complex::new(0.0, 0.0);
pub const C_ONE: C64 = Complex::new(1.0, 0.0);

/// Relative tolerance for Hermiticity / symmetry preconditions.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default absolute tolerance for PSD checks.
pub const PSD_TOL: f64 = 1e-9;
/// Default support threshold for eigenvalue truncation.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Total Hilbert-space dimension cap; `ENTCERT_MAX_DIM` overrides the default
/// of 2^14. Dense O(D^3) kernels make larger spaces impractical here.
pub fn dimension_cap() -> usize {
    std::env::var("ENTCERT_MAX_DIM")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(1 << 14)
}

pub(crate) fn check_dimension(dim: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim == 0 {
        return Err(EntcertError::invalid("zero total dimension"));
    }
    if dim > cap {
        return Err(EntcertError::invalid(format!(
            "total dimension {dim} exceeds cap {cap} (set ENTCERT_MAX_DIM to override)"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// complex vectors
// ---------------------------------------------------------------------------

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product <a|b>, conjugate-linear in the first argument.
pub fn vec_inner(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_tensor(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn vec_normalize(v: &mut [C64]) -> f64 {
    let n = vec_norm(v);
    if n > 0.0 {
        for c in v.iter_mut() {
            *c /= n;
        }
    }
    n
}

// ---------------------------------------------------------------------------
// multi-index helpers
// ---------------------------------------------------------------------------

/// Digits of `index` in the mixed-radix system given by `dims`
/// (party 0 most significant).
pub fn index_to_digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut digits = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        digits[i] = index % dims[i];
        index /= dims[i];
    }
    digits
}

pub fn digits_to_index(digits: &[usize], dims: &[usize]) -> usize {
    let mut index = 0usize;
    for (s, d) in digits.iter().zip(dims) {
        index = index * d + s;
    }
    index
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C_ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, C_ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self { rows, cols, data: entries.to_vec() }
    }

    /// Real entries convenience constructor.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Projector |v><v| (v need not be normalized).
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == C_ZERO {
                    continue;
                }
                let row_off = k * other.cols;
                let out_off = i * other.cols;
                for j in 0..other.cols {
                    out.data[out_off + j] += a * other.data[row_off + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply dimension mismatch");
        let mut out = vec![C_ZERO; self.rows];
        for i in 0..self.rows {
            let off = i * self.cols;
            let mut acc = C_ZERO;
            for j in 0..self.cols {
                acc += self.data[off + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// U * self * U^dagger.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance ||self - other||_F.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ||A - A^dagger||_F.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        // absolute floor keeps numerically-zero matrices (residuals at a
        // feasibility boundary) from failing the relative test
        let bound = (rel_tol * self.frobenius_norm()).max(1e-13);
        self.hermiticity_deviation() <= bound
    }

    /// ||A - A^T||_F.
    pub fn symmetry_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self.get(i, j) - self.get(j, i)).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Kronecker product self (x) other.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a == C_ZERO {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        out.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            a * other.get(i2, j2),
                        );
                    }
                }
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j))
    }

    fn ensure_finite(self, context: &str) -> Result<Self> {
        if self.all_finite() {
            Ok(self)
        } else {
            Err(EntcertError::InternalError(format!(
                "non-finite entries produced by {context}"
            )))
        }
    }
}

/// Tensor product of a nonempty list of operators, left to right.
pub fn kron_all(ops: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if ops.is_empty() {
        return Err(EntcertError::invalid("kron_all: empty operator list"));
    }
    let total_rows: usize = ops.iter().map(|m| m.rows()).product();
    let total_cols: usize = ops.iter().map(|m| m.cols()).product();
    check_dimension(total_rows.max(total_cols))?;
    let mut acc = ops[0].clone();
    for op in &ops[1..] {
        acc = acc.kron(op);
    }
    Ok(acc)
}

/// Trace out every party not listed in `keep`. Preserves the trace.
pub fn partial_trace(op: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if !op.is_square() {
        return Err(EntcertError::invalid("partial_trace: operator not square"));
    }
    let total: usize = dims.iter().product();
    if total != op.rows() {
        return Err(EntcertError::invalid(format!(
            "partial_trace: dims product {} != operator dimension {}",
            total,
            op.rows()
        )));
    }
    let n = dims.len();
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= n) {
        return Err(EntcertError::invalid("partial_trace: keep index out of range"));
    }
    let traced: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let dk: usize = keep_dims.iter().product::<usize>().max(1);
    let dt: usize = traced_dims.iter().product::<usize>().max(1);

    let mut out = ComplexMatrix::zeros(dk, dk);
    let mut full_row = vec![0usize; n];
    let mut full_col = vec![0usize; n];
    for a in 0..dk {
        let da = index_to_digits(a, &keep_dims);
        for b in 0..dk {
            let db = index_to_digits(b, &keep_dims);
            let mut acc = C_ZERO;
            for t in 0..dt {
                let dtr = index_to_digits(t, &traced_dims);
                for (pos, &party) in keep.iter().enumerate() {
                    full_row[party] = da[pos];
                    full_col[party] = db[pos];
                }
                for (pos, &party) in traced.iter().enumerate() {
                    full_row[party] = dtr[pos];
                    full_col[party] = dtr[pos];
                }
                acc += op.get(digits_to_index(&full_row, dims), digits_to_index(&full_col, dims));
            }
            out.set(a, b, acc);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// spectral kernels
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian operator, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Real eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as matrix columns, matching `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Column `k` as a vector.
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.eigenvectors.rows()).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// Reconstruct V f(Lambda) V^dagger.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let dim = v.rows();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..dim {
                let vi = v.get(i, k);
                if vi == C_ZERO {
                    continue;
                }
                for j in 0..dim {
                    out.add_assign_at(i, j, vi * v.get(j, k).conj() * w);
                }
            }
        }
        out
    }
}

fn require_hermitian(op: &ComplexMatrix, what: &str) -> Result<()> {
    if !op.is_square() {
        return Err(EntcertError::invalid(format!("{what}: operator not square")));
    }
    if !op.is_hermitian(HERMITICITY_TOL) {
        return Err(EntcertError::invalid(format!(
            "{what}: operator not Hermitian (deviation {:.3e} of norm {:.3e})",
            op.hermiticity_deviation(),
            op.frobenius_norm()
        )));
    }
    Ok(())
}

/// Hermitian eigendecomposition. The input is symmetrized (A + A^dagger)/2
/// before the solve to strip rounding noise.
pub fn hermitian_eig(op: &ComplexMatrix) -> Result<Spectrum> {
    require_hermitian(op, "hermitian_eig")?;
    let dim = op.rows();
    let herm = op.add(&op.adjoint()).scale(C64::new(0.5, 0.0));
    let se = nalgebra::linalg::SymmetricEigen::new(herm.to_nalgebra());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(dim, dim, |i, j| se.eigenvectors[(i, order[j])])
            .ensure_finite("hermitian_eig")?;
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(EntcertError::InternalError(
            "hermitian_eig produced non-finite eigenvalues".into(),
        ));
    }
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Eigendecomposition of a real symmetric matrix with guaranteed real
/// eigenvectors (used by the Takagi embedding, where complex phase freedom
/// in degenerate eigenspaces would be fatal).
fn real_symmetric_eig(mat: &ComplexMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = mat.rows();
    let real = DMatrix::<f64>::from_fn(dim, dim, |i, j| {
        0.5 * (mat.get(i, j).re + mat.get(j, i).re)
    });
    let se = nalgebra::linalg::SymmetricEigen::new(real);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..dim).map(|i| se.eigenvectors[(i, k)]).collect())
        .collect();
    Ok((values, vectors))
}

/// Takagi factorization of a complex symmetric matrix: sym = U diag(sigma) U^T
/// with U unitary and sigma the singular values of sym, descending.
///
/// The factor is obtained from the real symmetric embedding
/// B = [[Re S, Im S], [Im S, -Re S]]: eigenvectors (x; y) of B at eigenvalue
/// sigma >= 0 give columns q = x + iy with S conj(q) = sigma q, and the
/// eigenvalues of B are exactly +-sigma. This avoids any grouping of
/// degenerate singular values. Columns for numerically zero singular values
/// are completed to a unitary by Gram-Schmidt.
pub fn takagi(sym: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    if !sym.is_square() {
        return Err(EntcertError::invalid("takagi: matrix not square"));
    }
    let scale = sym.frobenius_norm();
    if sym.symmetry_deviation() > (HERMITICITY_TOL * scale).max(1e-13) {
        return Err(EntcertError::invalid(format!(
            "takagi: matrix not complex-symmetric (deviation {:.3e})",
            sym.symmetry_deviation()
        )));
    }
    let n = sym.rows();
    // strip the antisymmetric rounding part
    let s = sym.add(&sym.transpose()).scale(C64::new(0.5, 0.0));

    let mut embed = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = s.get(i, j);
            embed.set(i, j, C64::new(v.re, 0.0));
            embed.set(i, j + n, C64::new(v.im, 0.0));
            embed.set(i + n, j, C64::new(v.im, 0.0));
            embed.set(i + n, j + n, C64::new(-v.re, 0.0));
        }
    }
    let (values, vectors) = real_symmetric_eig(&embed)?;

    let sigma: Vec<f64> = values[..n].iter().map(|&v| v.max(0.0)).collect();
    let zero_cut = sigma.first().copied().unwrap_or(0.0) * 1e-13;

    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (k, &sig) in sigma.iter().enumerate() {
        if sig <= zero_cut {
            break;
        }
        let v = &vectors[k];
        let q: Vec<C64> = (0..n).map(|i| C64::new(v[i], v[i + n])).collect();
        columns.push(q);
    }
    // complete the zero-singular-value block to a unitary
    let mut basis_idx = 0usize;
    while columns.len() < n {
        if basis_idx >= n {
            return Err(EntcertError::InternalError(
                "takagi: failed to complete unitary factor".into(),
            ));
        }
        let mut cand = vec![C_ZERO; n];
        cand[basis_idx] = C_ONE;
        basis_idx += 1;
        for _ in 0..2 {
            for q in &columns {
                let ov = vec_inner(q, &cand);
                for i in 0..n {
                    cand[i] -= ov * q[i];
                }
            }
        }
        if vec_normalize(&mut cand) > 0.5 {
            columns.push(cand);
        }
    }
    let u = ComplexMatrix::from_fn(n, n, |i, j| columns[j][i]).ensure_finite("takagi")?;
    Ok((u, sigma))
}

/// log2 of a Hermitian PSD operator, taken on the eigenvalues above `eps`;
/// eigenvalues at or below `eps` map to 0 (the 0 log 0 = 0 convention, only
/// ever used inside tr(rho log2 sigma) with supp rho inside supp sigma).
pub fn matrix_log2_on_support(op: &ComplexMatrix, eps: f64) -> Result<ComplexMatrix> {
    let spectrum = hermitian_eig(op)?;
    let min_eig = spectrum.min_eigenvalue();
    if min_eig < -eps.max(PSD_TOL) {
        return Err(EntcertError::NotPsd { min_eig });
    }
    spectrum
        .assemble(|lam| if lam > eps { lam.log2() } else { 0.0 })
        .ensure_finite("matrix_log2_on_support")
}

/// PSD feasibility: ok iff the minimum eigenvalue is >= -tol.
pub fn psd_check(op: &ComplexMatrix, tol: f64) -> Result<(bool, f64)> {
    let spectrum = hermitian_eig(op)?;
    let min_eig = spectrum.min_eigenvalue();
    Ok((min_eig >= -tol, min_eig))
}

/// Von Neumann entropy in bits of a trace-one PSD operator.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let spectrum = hermitian_eig(rho)?;
    let min_eig = spectrum.min_eigenvalue();
    if min_eig < -PSD_TOL {
        return Err(EntcertError::NotPsd { min_eig });
    }
    let tr: f64 = spectrum.eigenvalues.iter().sum();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(EntcertError::invalid(format!(
            "von_neumann_entropy: trace {tr} is not 1"
        )));
    }
    let s: f64 = spectrum
        .eigenvalues
        .iter()
        .filter(|&&lam| lam > SUPPORT_EPS)
        .map(|&lam| -lam * lam.log2())
        .sum();
    Ok(s.max(0.0))
}

// ---------------------------------------------------------------------------
// local (tensor-product) unitaries
// ---------------------------------------------------------------------------

/// A unitary that factors as a tensor product of one operator per party.
/// Keeping the factors explicit is what guarantees "local" structurally.
#[derive(Debug, Clone)]
pub struct LocalUnitary {
    factors: Vec<ComplexMatrix>,
}

impl LocalUnitary {
    pub fn new(factors: Vec<ComplexMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(EntcertError::invalid("LocalUnitary: empty factor list"));
        }
        for f in &factors {
            if !f.is_square() {
                return Err(EntcertError::invalid("LocalUnitary: factor not square"));
            }
            let id = ComplexMatrix::identity(f.rows());
            let dev = f.adjoint().matmul(f).distance(&id);
            if dev > 1e-9 * (f.rows() as f64).sqrt() {
                return Err(EntcertError::invalid(format!(
                    "LocalUnitary: factor not unitary (deviation {dev:.3e})"
                )));
            }
        }
        Ok(Self { factors })
    }

    /// The same single-party operator applied to every one of `n` parties.
    pub fn uniform(op: ComplexMatrix, n: usize) -> Result<Self> {
        Self::new(vec![op; n])
    }

    /// Identity on the given local dimensions.
    pub fn identity(dims: &[usize]) -> Self {
        Self {
            factors: dims.iter().map(|&d| ComplexMatrix::identity(d)).collect(),
        }
    }

    pub fn factors(&self) -> &[ComplexMatrix] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.rows()).collect()
    }

    pub fn full_matrix(&self) -> Result<ComplexMatrix> {
        kron_all(&self.factors)
    }

    /// Factor-wise product self * other (still a local unitary).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(EntcertError::invalid("LocalUnitary: dimension mismatch in compose"));
        }
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.matmul(b))
            .collect();
        Ok(Self { factors })
    }

    pub fn apply_to_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        Ok(self.full_matrix()?.apply(v))
    }
}

// ---------------------------------------------------------------------------
// serde helpers: matrices as {rows, cols, entries: [[re, im], ...]}
// ---------------------------------------------------------------------------

#[derive(serde::Serialize, serde::Deserialize)]
struct ComplexMatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl serde::Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ComplexMatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.data.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ComplexMatrixJson::deserialize(deserializer)?;
        if raw.entries.len() != raw.rows * raw.cols {
            return Err(serde::de::Error::custom("entry count mismatch"));
        }
        Ok(ComplexMatrix {
            rows: raw.rows,
            cols: raw.cols,
            data: raw.entries.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        })
    }
}

// ---------------------------------------------------------------------------

pub mod paulis {
    //! The single-qubit Pauli matrices with the convention
    //! X|j> = |j+1 mod 2>, Z|j> = (-1)^j |j>.
    use super::{C64, ComplexMatrix};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    pub fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[s, s, s, -s])
    }

    pub fn phase_s() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 1.0),
            ],
        )
    }
}
