//! State families: symmetric (Dicke-type) basis states, antisymmetric wedge
//! states, stabilizer states and their eigenbases, symmetric/antisymmetric
//! subspace projectors, product states, and the type-class index used by the
//! exact torus twirl.
//!
//! Computational-basis ordering: party 0 is the most significant digit
//! (see `linalg::digits_to_index`). The global phase of stabilizer states is
//! fixed by making the first nonzero amplitude real positive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{EntcertError, Result};
use crate::linalg::{
    check_dimension, digits_to_index, index_to_digits, kron_all, paulis, vec_inner, vec_norm,
    vec_tensor, ComplexMatrix, C64, C_ONE, C_ZERO, HERMITICITY_TOL, PSD_TOL,
};

const NORM_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// PureState
// ---------------------------------------------------------------------------

/// A normalized pure state on an n-party tensor product with explicit local
/// dimensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PureStateJson", into = "PureStateJson")]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(EntcertError::invalid("PureState: empty or zero local dimension"));
        }
        check_dimension(total)?;
        if amplitudes.len() != total {
            return Err(EntcertError::invalid(format!(
                "PureState: {} amplitudes for total dimension {}",
                amplitudes.len(),
                total
            )));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(EntcertError::invalid(format!(
                "PureState: norm {norm} is not 1"
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_parties(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> C64 {
        vec_inner(&self.amplitudes, &other.amplitudes)
    }

    /// |self><self| as a trace-one density operator.
    pub fn density(&self) -> DensityOp {
        let matrix = ComplexMatrix::outer(&self.amplitudes, &self.amplitudes);
        DensityOp {
            dims: self.dims.clone(),
            matrix,
            trace: 1.0,
        }
    }

    /// Frobenius distance of the amplitude tensor from its permutation
    /// symmetrization. Requires all local dimensions equal.
    pub fn symmetric_deviation(&self) -> Result<f64> {
        let d = self.dims[0];
        if self.dims.iter().any(|&x| x != d) {
            return Err(EntcertError::invalid(
                "symmetric_deviation: local dimensions differ",
            ));
        }
        let n = self.num_parties();
        let mut sym = vec![C_ZERO; self.amplitudes.len()];
        let perms = permutations(n);
        for (perm, _) in &perms {
            for (idx, amp) in self.amplitudes.iter().enumerate() {
                let digits = index_to_digits(idx, &self.dims);
                let permuted: Vec<usize> = (0..n).map(|i| digits[perm[i]]).collect();
                sym[digits_to_index(&permuted, &self.dims)] += amp;
            }
        }
        let k = perms.len() as f64;
        let mut acc = 0.0;
        for (s, a) in sym.iter().zip(&self.amplitudes) {
            acc += (s / k - a).norm_sqr();
        }
        Ok(acc.sqrt())
    }

    /// Apply a (full-dimension) unitary, returning a new state.
    pub fn apply_unitary(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.total_dim() {
            return Err(EntcertError::invalid("apply_unitary: dimension mismatch"));
        }
        let amps = u.apply(&self.amplitudes);
        Self::new(self.dims.clone(), amps)
    }
}

#[derive(Serialize, Deserialize)]
struct PureStateJson {
    dims: Vec<usize>,
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<PureStateJson> for PureState {
    type Error = EntcertError;
    fn try_from(raw: PureStateJson) -> Result<Self> {
        PureState::new(
            raw.dims,
            raw.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect(),
        )
    }
}

impl From<PureState> for PureStateJson {
    fn from(s: PureState) -> Self {
        PureStateJson {
            dims: s.dims,
            amplitudes: s.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// ProductState
// ---------------------------------------------------------------------------

/// One unit-norm local vector per party.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ProductStateJson", into = "ProductStateJson")]
pub struct ProductState {
    locals: Vec<Vec<C64>>,
}

impl ProductState {
    pub fn new(locals: Vec<Vec<C64>>) -> Result<Self> {
        if locals.is_empty() {
            return Err(EntcertError::invalid("ProductState: no parties"));
        }
        for (i, v) in locals.iter().enumerate() {
            let norm = vec_norm(v);
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(EntcertError::invalid(format!(
                    "ProductState: local vector {i} has norm {norm}"
                )));
            }
        }
        Ok(Self { locals })
    }

    /// Computational basis product state |digits[0], digits[1], ...>.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        if dims.len() != digits.len() {
            return Err(EntcertError::invalid("ProductState::basis: length mismatch"));
        }
        let locals = dims
            .iter()
            .zip(digits)
            .map(|(&d, &s)| {
                let mut v = vec![C_ZERO; d];
                v[s] = C_ONE;
                v
            })
            .collect();
        Ok(Self { locals })
    }

    pub fn locals(&self) -> &[Vec<C64>] {
        &self.locals
    }

    pub fn num_parties(&self) -> usize {
        self.locals.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.locals.iter().map(|v| v.len()).collect()
    }

    /// Tensor all locals into a PureState.
    pub fn to_pure(&self) -> Result<PureState> {
        let mut amps = self.locals[0].clone();
        for local in &self.locals[1..] {
            amps = vec_tensor(&amps, local);
        }
        PureState::new(self.dims(), amps)
    }

    pub fn density(&self) -> Result<DensityOp> {
        Ok(self.to_pure()?.density())
    }
}

/// Alias constructor matching `ProductState::new`.
pub fn product_state(locals: Vec<Vec<C64>>) -> Result<ProductState> {
    ProductState::new(locals)
}

/// Alias for `p.to_pure()`.
pub fn to_pure(p: &ProductState) -> Result<PureState> {
    p.to_pure()
}

#[derive(Serialize, Deserialize)]
struct ProductStateJson {
    locals: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<ProductStateJson> for ProductState {
    type Error = EntcertError;
    fn try_from(raw: ProductStateJson) -> Result<Self> {
        ProductState::new(
            raw.locals
                .iter()
                .map(|v| v.iter().map(|&[re, im]| C64::new(re, im)).collect())
                .collect(),
        )
    }
}

impl From<ProductState> for ProductStateJson {
    fn from(p: ProductState) -> Self {
        ProductStateJson {
            locals: p
                .locals
                .iter()
                .map(|v| v.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// DensityOp
// ---------------------------------------------------------------------------

/// Hermitian PSD operator with party structure. The trace is recorded
/// explicitly so projection states can be carried unnormalized with tr P
/// alongside.
#[derive(Debug, Clone)]
pub struct DensityOp {
    dims: Vec<usize>,
    matrix: ComplexMatrix,
    trace: f64,
}

impl DensityOp {
    pub fn new(dims: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !matrix.is_square() || matrix.rows() != total {
            return Err(EntcertError::invalid(format!(
                "DensityOp: matrix is {}x{} but dims product is {}",
                matrix.rows(),
                matrix.cols(),
                total
            )));
        }
        check_dimension(total)?;
        if !matrix.is_hermitian(HERMITICITY_TOL) {
            return Err(EntcertError::invalid(
                "DensityOp: matrix not Hermitian".to_string(),
            ));
        }
        let (ok, min_eig) = crate::linalg::psd_check(&matrix, PSD_TOL)?;
        if !ok {
            return Err(EntcertError::NotPsd { min_eig });
        }
        let trace = matrix.trace();
        if trace.im.abs() > 1e-9 {
            return Err(EntcertError::invalid("DensityOp: trace not real"));
        }
        Ok(Self { dims, matrix, trace: trace.re })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// Divide by the stored trace; errors on (numerically) zero trace.
    pub fn normalized(&self) -> Result<DensityOp> {
        if self.trace.abs() < 1e-12 {
            return Err(EntcertError::invalid("DensityOp: zero trace"));
        }
        Ok(DensityOp {
            dims: self.dims.clone(),
            matrix: self.matrix.scale(C64::new(1.0 / self.trace, 0.0)),
            trace: 1.0,
        })
    }

    /// <phi| rho |phi> for a product state phi.
    pub fn product_overlap(&self, phi: &ProductState) -> Result<f64> {
        let v = phi.to_pure()?;
        if v.total_dim() != self.total_dim() {
            return Err(EntcertError::invalid("product_overlap: dimension mismatch"));
        }
        let rv = self.matrix.apply(v.amplitudes());
        Ok(vec_inner(v.amplitudes(), &rv).re)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }
}

/// Either a pure state or an (unnormalized) projection operator; the two
/// shapes the measure pipeline accepts.
#[derive(Debug, Clone)]
pub enum TargetState {
    Pure(PureState),
    Projection(DensityOp),
}

impl TargetState {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            TargetState::Pure(psi) => psi.dims().to_vec(),
            TargetState::Projection(p) => p.dims().to_vec(),
        }
    }

    /// The (possibly unnormalized) operator P and its trace.
    pub fn projector(&self) -> (ComplexMatrix, f64) {
        match self {
            TargetState::Pure(psi) => (psi.density().matrix().clone(), 1.0),
            TargetState::Projection(p) => (p.matrix().clone(), p.trace()),
        }
    }

    /// P / tr P as a trace-one density operator.
    pub fn normalized_density(&self) -> Result<DensityOp> {
        match self {
            TargetState::Pure(psi) => Ok(psi.density()),
            TargetState::Projection(p) => p.normalized(),
        }
    }
}

// ---------------------------------------------------------------------------
// permutations and projectors
// ---------------------------------------------------------------------------

/// All permutations of 0..n with their signs, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    fn build(pool: &mut Vec<usize>, current: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i32)>) {
        if pool.is_empty() {
            let mut inversions = 0usize;
            for i in 0..current.len() {
                for j in (i + 1)..current.len() {
                    if current[i] > current[j] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            out.push((current.clone(), sign));
            return;
        }
        for i in 0..pool.len() {
            let v = pool.remove(i);
            current.push(v);
            build(pool, current, out);
            current.pop();
            pool.insert(i, v);
        }
    }
    let mut out = Vec::new();
    build(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// The unitary permuting parties: |s_0 ... s_{n-1}> -> |s_{perm(0)} ... >.
pub fn permutation_operator(n: usize, d: usize, perm: &[usize]) -> Result<ComplexMatrix> {
    if perm.len() != n {
        return Err(EntcertError::invalid("permutation_operator: wrong length"));
    }
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    check_dimension(total)?;
    let mut m = ComplexMatrix::zeros(total, total);
    for col in 0..total {
        let digits = index_to_digits(col, &dims);
        let permuted: Vec<usize> = (0..n).map(|i| digits[perm[i]]).collect();
        m.set(digits_to_index(&permuted, &dims), col, C_ONE);
    }
    Ok(m)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Multinomial coefficient n! / prod_j k_j!.
pub fn multinomial(n: usize, kvec: &[usize]) -> f64 {
    let mut acc = factorial(n);
    for &k in kvec {
        acc /= factorial(k);
    }
    acc
}

/// Unnormalized projector onto the symmetric subspace of n parties of local
/// dimension d; tr P = C(n+d-1, n).
pub fn symmetric_projector(n: usize, d: usize) -> Result<DensityOp> {
    if n == 0 || d == 0 {
        return Err(EntcertError::invalid("symmetric_projector: zero size"));
    }
    let perms = permutations(n);
    let total = d.pow(n as u32);
    check_dimension(total)?;
    let mut acc = ComplexMatrix::zeros(total, total);
    for (perm, _) in &perms {
        acc = acc.add(&permutation_operator(n, d, perm)?);
    }
    let matrix = acc.scale(C64::new(1.0 / perms.len() as f64, 0.0));
    let op = DensityOp::new(vec![d; n], matrix)?;
    debug_assert!((op.trace() - binomial(n + d - 1, n)).abs() < 1e-6);
    Ok(op)
}

/// Unnormalized projector onto the antisymmetric subspace; tr P = C(d, n);
/// requires n <= d.
pub fn antisymmetric_projector(n: usize, d: usize) -> Result<DensityOp> {
    if n == 0 || d == 0 {
        return Err(EntcertError::invalid("antisymmetric_projector: zero size"));
    }
    if n > d {
        return Err(EntcertError::invalid(format!(
            "antisymmetric_projector: n = {n} exceeds local dimension d = {d}"
        )));
    }
    let perms = permutations(n);
    let total = d.pow(n as u32);
    check_dimension(total)?;
    let mut acc = ComplexMatrix::zeros(total, total);
    for (perm, sign) in &perms {
        let term = permutation_operator(n, d, perm)?;
        acc = if *sign > 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    let matrix = acc.scale(C64::new(1.0 / perms.len() as f64, 0.0));
    let op = DensityOp::new(vec![d; n], matrix)?;
    debug_assert!((op.trace() - binomial(d, n)).abs() < 1e-6);
    Ok(op)
}

// ---------------------------------------------------------------------------
// type classes
// ---------------------------------------------------------------------------

/// Partition of the d^n computational sequences by occupation type: class
/// k = (k_0, ..., k_{d-1}) holds the indices of sequences in which symbol i
/// appears exactly k_i times.
#[derive(Debug, Clone)]
pub struct TypeIndex {
    pub n: usize,
    pub d: usize,
    pub classes: BTreeMap<Vec<usize>, Vec<usize>>,
}

pub fn type_of(digits: &[usize], d: usize) -> Vec<usize> {
    let mut counts = vec![0usize; d];
    for &s in digits {
        counts[s] += 1;
    }
    counts
}

pub fn type_index(n: usize, d: usize) -> Result<TypeIndex> {
    if n == 0 || d == 0 {
        return Err(EntcertError::invalid("type_index: zero size"));
    }
    let dims = vec![d; n];
    let total = d.pow(n as u32);
    check_dimension(total)?;
    let mut classes: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for idx in 0..total {
        let digits = index_to_digits(idx, &dims);
        classes.entry(type_of(&digits, d)).or_default().push(idx);
    }
    Ok(TypeIndex { n, d, classes })
}

impl TypeIndex {
    /// Class id (position in the BTreeMap order) of each flat index.
    pub fn class_labels(&self) -> Vec<usize> {
        let total = self.d.pow(self.n as u32);
        let mut labels = vec![0usize; total];
        for (class_id, members) in self.classes.values().enumerate() {
            for &m in members {
                labels[m] = class_id;
            }
        }
        labels
    }
}

// ---------------------------------------------------------------------------
// symmetric and antisymmetric basis states
// ---------------------------------------------------------------------------

/// Symmetric basis state of type kvec: equal amplitudes 1/sqrt(C_{n,k}) on
/// every sequence of Type(kvec), zero elsewhere. kvec entries of 0 are
/// allowed (unused levels).
pub fn dicke(n: usize, kvec: &[usize]) -> Result<PureState> {
    let d = kvec.len();
    if n == 0 || d == 0 {
        return Err(EntcertError::invalid("dicke: zero size"));
    }
    let total_k: usize = kvec.iter().sum();
    if total_k != n {
        return Err(EntcertError::invalid(format!(
            "dicke: occupation vector sums to {total_k}, expected {n}"
        )));
    }
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    check_dimension(total)?;
    let coeff = 1.0 / multinomial(n, kvec).sqrt();
    let mut amps = vec![C_ZERO; total];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let digits = index_to_digits(idx, &dims);
        if type_of(&digits, d) == kvec {
            *amp = C64::new(coeff, 0.0);
        }
    }
    PureState::new(dims, amps)
}

/// The permutation-symmetric closest product state of dicke(n, kvec):
/// every local vector is sum_l sqrt(k_l / n) |l>.
pub fn closest_product_dicke(n: usize, kvec: &[usize]) -> Result<ProductState> {
    let d = kvec.len();
    let total_k: usize = kvec.iter().sum();
    if n == 0 || d == 0 || total_k != n {
        return Err(EntcertError::invalid("closest_product_dicke: bad occupation vector"));
    }
    let local: Vec<C64> = kvec
        .iter()
        .map(|&k| C64::new((k as f64 / n as f64).sqrt(), 0.0))
        .collect();
    ProductState::new(vec![local; n])
}

/// Antisymmetric (wedge) basis state on n parties of dimension d >= n,
/// built from levels offset..offset+n. Amplitudes carry Levi-Civita signs
/// 1/sqrt(n!); all offsets are locally unitarily equivalent.
pub fn antisymmetric_basis_with_offset(n: usize, d: usize, offset: usize) -> Result<PureState> {
    if n == 0 {
        return Err(EntcertError::invalid("antisymmetric_basis: n = 0"));
    }
    if n + offset > d {
        return Err(EntcertError::invalid(format!(
            "antisymmetric_basis: n + offset = {} exceeds local dimension d = {d}",
            n + offset
        )));
    }
    let dims = vec![d; n];
    let total: usize = dims.iter().product();
    check_dimension(total)?;
    let coeff = 1.0 / factorial(n).sqrt();
    let mut amps = vec![C_ZERO; total];
    for (perm, sign) in permutations(n) {
        let digits: Vec<usize> = perm.iter().map(|&p| offset + p).collect();
        amps[digits_to_index(&digits, &dims)] = C64::new(coeff * sign as f64, 0.0);
    }
    PureState::new(dims, amps)
}

pub fn antisymmetric_basis(n: usize, d: usize) -> Result<PureState> {
    antisymmetric_basis_with_offset(n, d, 0)
}

// ---------------------------------------------------------------------------
// stabilizer formalism (qubits)
// ---------------------------------------------------------------------------

/// One Pauli generator in binary-symplectic form. The operator denoted is
/// sign * prod_q i^{x_q z_q} X^{x_q} Z^{z_q}, i.e. per qubit one of
/// {I, X, Z, Y}; the i^{xz} phase makes each factor Hermitian.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerGenerator {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
    pub sign: i8,
}

impl StabilizerGenerator {
    /// Dense 2^n x 2^n matrix of the generator.
    pub fn matrix(&self) -> Result<ComplexMatrix> {
        let factors: Vec<ComplexMatrix> = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| match (x, z) {
                (false, false) => paulis::identity(),
                (true, false) => paulis::x(),
                (false, true) => paulis::z(),
                (true, true) => paulis::y(),
            })
            .collect();
        let m = kron_all(&factors)?;
        Ok(if self.sign < 0 { m.scale(C64::new(-1.0, 0.0)) } else { m })
    }
}

/// n independent, pairwise commuting Pauli generators on n qubits.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "StabilizerGroupJson", into = "StabilizerGroupJson")]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<StabilizerGenerator>,
}

impl StabilizerGroup {
    pub fn new(n: usize, generators: Vec<StabilizerGenerator>) -> Result<Self> {
        if n == 0 || generators.len() != n {
            return Err(EntcertError::invalid(format!(
                "StabilizerGroup: expected {n} generators, got {}",
                generators.len()
            )));
        }
        if n > 64 {
            return Err(EntcertError::invalid("StabilizerGroup: more than 64 qubits"));
        }
        for g in &generators {
            if g.x.len() != n || g.z.len() != n {
                return Err(EntcertError::invalid("StabilizerGroup: generator length mismatch"));
            }
            if g.sign != 1 && g.sign != -1 {
                return Err(EntcertError::invalid("StabilizerGroup: sign must be +-1"));
            }
        }
        // pairwise commutation under the symplectic form
        for a in 0..n {
            for b in (a + 1)..n {
                let ga = &generators[a];
                let gb = &generators[b];
                let mut parity = 0usize;
                for q in 0..n {
                    parity += (ga.x[q] && gb.z[q]) as usize + (ga.z[q] && gb.x[q]) as usize;
                }
                if parity % 2 != 0 {
                    return Err(EntcertError::invalid(format!(
                        "StabilizerGroup: generators {a} and {b} anticommute"
                    )));
                }
            }
        }
        // independence: full GF(2) rank of the 2n-bit rows
        let mut rows: Vec<u128> = generators
            .iter()
            .map(|g| {
                let mut bits: u128 = 0;
                for q in 0..n {
                    if g.x[q] {
                        bits |= 1u128 << q;
                    }
                    if g.z[q] {
                        bits |= 1u128 << (n + q);
                    }
                }
                bits
            })
            .collect();
        let mut rank = 0usize;
        for bit in 0..(2 * n) {
            let mask = 1u128 << bit;
            if let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) {
                rows.swap(rank, pivot);
                for r in 0..rows.len() {
                    if r != rank && rows[r] & mask != 0 {
                        rows[r] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        if rank != n {
            return Err(EntcertError::invalid(format!(
                "StabilizerGroup: generators have GF(2) rank {rank}, expected {n}"
            )));
        }
        Ok(Self { n, generators })
    }

    /// Parse generators in Pauli-string form, e.g. ["XXX", "ZZI", "IZZ"] or
    /// with explicit signs like "-XY".
    pub fn from_pauli_strings(strings: &[&str]) -> Result<Self> {
        let n = strings.len();
        let mut generators = Vec::with_capacity(n);
        for s in strings {
            let (sign, body) = match s.strip_prefix('-') {
                Some(rest) => (-1i8, rest),
                None => (1i8, s.strip_prefix('+').unwrap_or(s)),
            };
            if body.len() != n {
                return Err(EntcertError::invalid(format!(
                    "stabilizer string '{s}' has length {} for {n} qubits",
                    body.len()
                )));
            }
            let mut x = vec![false; n];
            let mut z = vec![false; n];
            for (q, ch) in body.chars().enumerate() {
                match ch {
                    'I' | 'i' => {}
                    'X' | 'x' => x[q] = true,
                    'Z' | 'z' => z[q] = true,
                    'Y' | 'y' => {
                        x[q] = true;
                        z[q] = true;
                    }
                    _ => {
                        return Err(EntcertError::invalid(format!(
                            "stabilizer string '{s}': bad character '{ch}'"
                        )))
                    }
                }
            }
            generators.push(StabilizerGenerator { x, z, sign });
        }
        Self::new(n, generators)
    }

    /// GHZ_n group: X...X and Z_i Z_{i+1}.
    pub fn ghz(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(EntcertError::invalid("ghz: n = 0"));
        }
        if n == 1 {
            return Self::from_pauli_strings(&["Z"]);
        }
        let mut strings: Vec<String> = vec!["X".repeat(n)];
        for i in 0..(n - 1) {
            let mut s = vec!['I'; n];
            s[i] = 'Z';
            s[i + 1] = 'Z';
            strings.push(s.into_iter().collect());
        }
        let refs: Vec<&str> = strings.iter().map(String::as_str).collect();
        Self::from_pauli_strings(&refs)
    }

    /// Linear cluster state group: K_i = Z_{i-1} X_i Z_{i+1}.
    pub fn linear_cluster(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(EntcertError::invalid("linear_cluster: n = 0"));
        }
        let mut strings = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = vec!['I'; n];
            s[i] = 'X';
            if i > 0 {
                s[i - 1] = 'Z';
            }
            if i + 1 < n {
                s[i + 1] = 'Z';
            }
            strings.push(s.into_iter().collect::<String>());
        }
        let refs: Vec<&str> = strings.iter().map(String::as_str).collect();
        Self::from_pauli_strings(&refs)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[StabilizerGenerator] {
        &self.generators
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![2; self.n]
    }

    /// All 2^n group elements as dense matrices (subset products of the
    /// generators; signs are carried by the matrices themselves).
    pub fn elements(&self) -> Result<Vec<ComplexMatrix>> {
        let total = 1usize << self.n;
        check_dimension(1 << self.n)?;
        let dim = 1usize << self.n;
        let gen_mats: Vec<ComplexMatrix> = self
            .generators
            .iter()
            .map(|g| g.matrix())
            .collect::<Result<_>>()?;
        let mut elems: Vec<ComplexMatrix> = Vec::with_capacity(total);
        elems.push(ComplexMatrix::identity(dim));
        for mask in 1..total {
            let low = mask.trailing_zeros() as usize;
            let rest = mask ^ (1 << low);
            let m = gen_mats[low].matmul(&elems[rest]);
            elems.push(m);
        }
        Ok(elems)
    }

    fn eigen_projector(&self, signs: usize) -> Result<ComplexMatrix> {
        let dim = 1usize << self.n;
        let mut p = ComplexMatrix::identity(dim);
        for (i, g) in self.generators.iter().enumerate() {
            let gm = g.matrix()?;
            let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            // (I + (-1)^{g_i} G_i) / 2
            let half = ComplexMatrix::identity(dim)
                .add(&gm.scale(C64::new(s, 0.0)))
                .scale(C64::new(0.5, 0.0));
            p = half.matmul(&p);
        }
        Ok(p)
    }

    fn state_from_projector(&self, p: &ComplexMatrix) -> Result<PureState> {
        let dim = p.rows();
        let tr = p.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-10 {
            return Err(EntcertError::InternalError(format!(
                "stabilizer projector has rank {:.6}, expected 1 (invalid group?)",
                tr.re
            )));
        }
        // any nonzero column of a rank-1 projector spans its range
        let mut best = 0usize;
        let mut best_norm = 0.0;
        for j in 0..dim {
            let norm: f64 = (0..dim).map(|i| p.get(i, j).norm_sqr()).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        let mut amps: Vec<C64> = (0..dim).map(|i| p.get(i, best)).collect();
        let norm = vec_norm(&amps);
        if norm < 1e-8 {
            return Err(EntcertError::InternalError("stabilizer projector is zero".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        // fix the global phase: first significant amplitude real positive
        let lead = amps
            .iter()
            .find(|a| a.norm() > 1e-8)
            .copied()
            .unwrap_or(C_ONE);
        let phase = lead / lead.norm();
        for a in amps.iter_mut() {
            *a /= phase;
        }
        PureState::new(self.dims(), amps)
    }

    /// The unique state with G_i |S> = |S> for every generator.
    pub fn stabilizer_state(&self) -> Result<PureState> {
        self.state_from_projector(&self.eigen_projector(0)?)
    }

    /// The 2^n simultaneous eigenstates; entry `g` (bit i of the label is the
    /// sign exponent of generator i) satisfies G_i |S_g> = (-1)^{g_i} |S_g>.
    pub fn eigenbasis(&self) -> Result<Vec<PureState>> {
        (0..(1usize << self.n))
            .map(|signs| self.state_from_projector(&self.eigen_projector(signs)?))
            .collect()
    }
}

/// Alias matching the operation names used elsewhere.
pub fn stabilizer_state(group: &StabilizerGroup) -> Result<PureState> {
    group.stabilizer_state()
}

pub fn stabilizer_eigenbasis(group: &StabilizerGroup) -> Result<Vec<PureState>> {
    group.eigenbasis()
}

#[derive(Serialize, Deserialize)]
struct StabilizerGeneratorJson {
    x: String,
    z: String,
    sign: i8,
}

#[derive(Serialize, Deserialize)]
struct StabilizerGroupJson {
    n: usize,
    generators: Vec<StabilizerGeneratorJson>,
}

fn parse_bits(s: &str, n: usize) -> Result<Vec<bool>> {
    if s.len() != n {
        return Err(EntcertError::invalid(format!(
            "bit string '{s}' has length {}, expected {n}",
            s.len()
        )));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(EntcertError::invalid(format!("bad bit character '{c}'"))),
        })
        .collect()
}

impl TryFrom<StabilizerGroupJson> for StabilizerGroup {
    type Error = EntcertError;
    fn try_from(raw: StabilizerGroupJson) -> Result<Self> {
        let generators = raw
            .generators
            .iter()
            .map(|g| {
                Ok(StabilizerGenerator {
                    x: parse_bits(&g.x, raw.n)?,
                    z: parse_bits(&g.z, raw.n)?,
                    sign: g.sign,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        StabilizerGroup::new(raw.n, generators)
    }
}

impl From<StabilizerGroup> for StabilizerGroupJson {
    fn from(g: StabilizerGroup) -> Self {
        StabilizerGroupJson {
            n: g.n,
            generators: g
                .generators
                .iter()
                .map(|gen| StabilizerGeneratorJson {
                    x: gen.x.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                    z: gen.z.iter().map(|&b| if b { '1' } else { '0' }).collect(),
                    sign: gen.sign,
                })
                .collect(),
        }
    }
}

/// True if the amplitude vector factorizes as a tensor product across every
/// party cut (checked by successive rank-1 peeling).
pub fn is_product_vector(amps: &[C64], dims: &[usize], tol: f64) -> bool {
    if dims.len() <= 1 {
        return true;
    }
    let d0 = dims[0];
    let rest: usize = dims[1..].iter().product();
    // treat amps as a d0 x rest matrix; rank 1 iff all 2x2 minors vanish
    let m = ComplexMatrix::from_row_slice(d0, rest, amps);
    let svd = nalgebra::linalg::SVD::new(m.to_nalgebra(), false, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    if order.len() > 1 && svd.singular_values[order[1]] > tol {
        return false;
    }
    // peel the leading factor and recurse on the rest
    let vt = svd.v_t.unwrap();
    let top = order[0];
    let tail: Vec<C64> = (0..rest).map(|j| vt[(top, j)] * svd.singular_values[top]).collect();
    is_product_vector(&tail, &dims[1..], tol)
}
