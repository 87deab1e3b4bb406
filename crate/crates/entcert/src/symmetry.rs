//! Twirling channels (finite-group averages, stabilizer twirls, exact
//! type-subspace projection) and equality certification of the three
//! distance-like measures via a PSD residual condition.
//!
//! Averaging a product state over a group of local unitaries projects it onto
//! the group-invariant operator subspace while keeping it separable. When the
//! target state (or projector P) is invariant under the channel and the
//! twirled closest product state dominates (<Phi0|P|Phi0>/tr P) * P, the
//! twirl output is a valid robustness candidate and the logarithmic
//! robustness, relative entropy, and geometric measure all collapse to the
//! same value. The certificate below checks exactly that chain numerically.

use serde::Serialize;

use crate::error::{EntcertError, Result};
use crate::geometric::GeoResult;
use crate::linalg::{
    paulis, psd_check, ComplexMatrix, LocalUnitary, C64, PSD_TOL,
};
use crate::states::{
    permutation_operator, permutations, type_index, DensityOp, StabilizerGroup, TargetState,
};

/// Default residual PSD tolerance; configurable per call because twirl
/// outputs of near-degenerate optima can sit exactly at the PSD boundary.
pub const RESIDUAL_PSD_TOL: f64 = PSD_TOL;
/// Relative tolerance for the invariance precondition.
pub const INVARIANCE_TOL: f64 = 1e-9;
/// Largest accepted finite group.
pub const MAX_GROUP_SIZE: usize = 1 << 16;

// ---------------------------------------------------------------------------
// channels
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum ChannelKind {
    /// (1/|G|) sum_g U_g rho U_g^dagger over an explicit finite group of
    /// local-product unitaries, closed under multiplication up to phase.
    FiniteGroup {
        elements: Vec<LocalUnitary>,
        full: Vec<ComplexMatrix>,
    },
    /// Average over all 2^n elements of a stabilizer group.
    StabilizerTwirl {
        group: StabilizerGroup,
        elements: Vec<ComplexMatrix>,
    },
    /// Exact diagonal-torus average: zero every matrix element between
    /// different type classes. Realizes the continuous phase average
    /// bit-exactly, with no numerical integration.
    TypeProjection { class_of: Vec<usize> },
    /// Type projection followed by the permutation-group average; the exact
    /// Haar average over the monomial (generalized-permutation) subgroup
    /// acting identically on every party. This is the channel that certifies
    /// antisymmetric basis states.
    MonomialTwirl {
        class_of: Vec<usize>,
        perm_ops: Vec<ComplexMatrix>,
    },
}

#[derive(Debug, Clone)]
pub struct TwirlChannel {
    dims: Vec<usize>,
    kind: ChannelKind,
}

/// Deterministic pairwise tree reduction, so group averages sum in a
/// reproducible order regardless of how the terms were produced.
fn tree_sum(mut terms: Vec<ComplexMatrix>) -> ComplexMatrix {
    assert!(!terms.is_empty());
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut iter = terms.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(a.add(&b)),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

/// Phase-insensitive matrix match: true iff a = e^{i theta} b for some theta.
fn matches_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    let s = b.adjoint().matmul(a).trace();
    let dim = a.rows() as f64;
    if s.norm() < 1e-14 {
        return a.frobenius_norm() < tol && b.frobenius_norm() < tol;
    }
    let phase = s / s.norm();
    a.sub(&b.scale(phase)).frobenius_norm() <= tol * dim.sqrt()
}

impl TwirlChannel {
    /// Finite group of local-product unitaries. Checks closure under the
    /// group operation (up to global phase) within 1e-10 and rejects groups
    /// larger than 2^16 elements.
    pub fn finite_group(elements: Vec<LocalUnitary>) -> Result<Self> {
        if elements.is_empty() {
            return Err(EntcertError::invalid("finite_group: empty element list"));
        }
        if elements.len() > MAX_GROUP_SIZE {
            return Err(EntcertError::invalid(format!(
                "finite_group: {} elements exceeds cap {MAX_GROUP_SIZE}",
                elements.len()
            )));
        }
        let dims = elements[0].dims();
        for e in &elements {
            if e.dims() != dims {
                return Err(EntcertError::invalid("finite_group: mixed dimensions"));
            }
        }
        let full: Vec<ComplexMatrix> = elements
            .iter()
            .map(|e| e.full_matrix())
            .collect::<Result<_>>()?;
        for a in &full {
            for b in &full {
                let prod = a.matmul(b);
                if !full.iter().any(|m| matches_up_to_phase(&prod, m, 1e-10)) {
                    return Err(EntcertError::invalid(
                        "finite_group: element list is not closed under multiplication",
                    ));
                }
            }
        }
        Ok(Self { dims, kind: ChannelKind::FiniteGroup { elements, full } })
    }

    /// The single-element (identity) group; twirling is a no-op.
    pub fn trivial(dims: &[usize]) -> Result<Self> {
        Self::finite_group(vec![LocalUnitary::identity(dims)])
    }

    pub fn stabilizer(group: StabilizerGroup) -> Result<Self> {
        let dims = group.dims();
        let elements = group.elements()?;
        Ok(Self { dims, kind: ChannelKind::StabilizerTwirl { group, elements } })
    }

    pub fn type_projection(n: usize, d: usize) -> Result<Self> {
        let ti = type_index(n, d)?;
        Ok(Self {
            dims: vec![d; n],
            kind: ChannelKind::TypeProjection { class_of: ti.class_labels() },
        })
    }

    pub fn monomial(n: usize, d: usize) -> Result<Self> {
        let ti = type_index(n, d)?;
        let perm_ops = permutations(n)
            .iter()
            .map(|(perm, _)| permutation_operator(n, d, perm))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dims: vec![d; n],
            kind: ChannelKind::MonomialTwirl { class_of: ti.class_labels(), perm_ops },
        })
    }

    /// {U^(x)n : U in the 24-element single-qubit Clifford group}. For two
    /// parties this reproduces the Haar U(2) twirl exactly (the Clifford
    /// group is a unitary 2-design), which is what certifies the symmetric
    /// and antisymmetric projectors on two qubits.
    pub fn clifford_diagonal(n_parties: usize) -> Result<Self> {
        let elements = local_clifford_group()
            .into_iter()
            .map(|u| LocalUnitary::uniform(u, n_parties))
            .collect::<Result<Vec<_>>>()?;
        Self::finite_group(elements)
    }

    /// The full n-qubit Pauli group {I, X, Y, Z}^(x)n (modulo phases).
    /// Twirling over it sends every state to the maximally mixed state.
    pub fn pauli_group(n_parties: usize) -> Result<Self> {
        if n_parties == 0 || n_parties > 8 {
            return Err(EntcertError::invalid("pauli_group: need 1..=8 parties"));
        }
        let singles = [paulis::identity(), paulis::x(), paulis::y(), paulis::z()];
        let total = 4usize.pow(n_parties as u32);
        let mut elements = Vec::with_capacity(total);
        for code in 0..total {
            let mut factors = Vec::with_capacity(n_parties);
            let mut rem = code;
            for _ in 0..n_parties {
                factors.push(singles[rem % 4].clone());
                rem /= 4;
            }
            elements.push(LocalUnitary::new(factors)?);
        }
        Self::finite_group(elements)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ChannelKind::FiniteGroup { .. } => "finite-group",
            ChannelKind::StabilizerTwirl { .. } => "stabilizer-twirl",
            ChannelKind::TypeProjection { .. } => "type-projection",
            ChannelKind::MonomialTwirl { .. } => "monomial-twirl",
        }
    }

    pub fn group_size(&self) -> Option<usize> {
        match &self.kind {
            ChannelKind::FiniteGroup { elements, .. } => Some(elements.len()),
            ChannelKind::StabilizerTwirl { elements, .. } => Some(elements.len()),
            _ => None,
        }
    }

    pub fn stabilizer_group(&self) -> Option<&StabilizerGroup> {
        match &self.kind {
            ChannelKind::StabilizerTwirl { group, .. } => Some(group),
            _ => None,
        }
    }

    fn project_types(class_of: &[usize], mat: &ComplexMatrix) -> ComplexMatrix {
        let dim = mat.rows();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                if class_of[i] == class_of[j] {
                    out.set(i, j, mat.get(i, j));
                }
            }
        }
        out
    }

    fn average(full: &[ComplexMatrix], mat: &ComplexMatrix) -> ComplexMatrix {
        let terms: Vec<ComplexMatrix> = full.iter().map(|u| mat.conjugate_by(u)).collect();
        let count = terms.len() as f64;
        tree_sum(terms).scale(C64::new(1.0 / count, 0.0))
    }

    pub(crate) fn apply_matrix(&self, mat: &ComplexMatrix) -> ComplexMatrix {
        match &self.kind {
            ChannelKind::FiniteGroup { full, .. } => Self::average(full, mat),
            ChannelKind::StabilizerTwirl { elements, .. } => Self::average(elements, mat),
            ChannelKind::TypeProjection { class_of } => Self::project_types(class_of, mat),
            ChannelKind::MonomialTwirl { class_of, perm_ops } => {
                let projected = Self::project_types(class_of, mat);
                Self::average(perm_ops, &projected)
            }
        }
    }

    /// Twirl a density operator. The output is Hermitian, PSD, has the same
    /// trace, and is separable whenever the input is a product state (each
    /// group element is a tensor product of local unitaries by construction).
    pub fn apply(&self, rho: &DensityOp) -> Result<DensityOp> {
        if rho.dims() != self.dims {
            return Err(EntcertError::invalid(format!(
                "apply_twirl: state dims {:?} vs channel dims {:?}",
                rho.dims(),
                self.dims
            )));
        }
        DensityOp::new(self.dims.clone(), self.apply_matrix(rho.matrix()))
    }
}

/// Free-function alias for `channel.apply(rho)`.
pub fn apply_twirl(channel: &TwirlChannel, rho: &DensityOp) -> Result<DensityOp> {
    channel.apply(rho)
}

/// True iff rho is invariant under the channel within tol (relative
/// Frobenius deviation).
pub fn invariance_check(channel: &TwirlChannel, rho: &DensityOp, tol: f64) -> Result<bool> {
    Ok(invariance_deviation(channel, rho)? <= tol)
}

pub fn invariance_deviation(channel: &TwirlChannel, rho: &DensityOp) -> Result<f64> {
    if rho.dims() != channel.dims() {
        return Err(EntcertError::invalid("invariance_check: dimension mismatch"));
    }
    let twirled = channel.apply_matrix(rho.matrix());
    let scale = rho.matrix().frobenius_norm().max(1e-300);
    Ok(twirled.distance(rho.matrix()) / scale)
}

/// The 24 single-qubit Clifford unitaries (modulo global phase), generated
/// by closing {H, S} under multiplication.
pub fn local_clifford_group() -> Vec<ComplexMatrix> {
    let gens = [paulis::hadamard(), paulis::phase_s()];
    let mut group: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(2)];
    let mut frontier = group.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &gens {
                let prod = g.matmul(f);
                if !group.iter().any(|m| matches_up_to_phase(&prod, m, 1e-9)) {
                    // canonical phase: largest-magnitude entry real positive
                    let mut lead = C64::new(0.0, 0.0);
                    for v in prod.data() {
                        if v.norm() > lead.norm() {
                            lead = *v;
                        }
                    }
                    let canon = prod.scale(lead.conj() / lead.norm());
                    group.push(canon.clone());
                    next.push(canon);
                }
            }
        }
        frontier = next;
    }
    assert_eq!(group.len(), 24, "single-qubit Clifford group has 24 elements");
    group
}

// ---------------------------------------------------------------------------
// equality certification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Outcome of the residual-PSD equality check for one state.
#[derive(Debug, Clone, Serialize)]
pub struct EqualityCertificate {
    pub state_id: String,
    /// G(P/trP) - log2 tr P; for pure states just E_g. The common value of
    /// all three measures when certified.
    pub eg_bits: f64,
    /// Twirl of the optimizer witness; a separable candidate by construction.
    #[serde(skip)]
    pub candidate: DensityOp,
    /// Eigenvalues of the candidate, descending.
    pub candidate_spectrum: Vec<f64>,
    /// Minimum eigenvalue of candidate - (<Phi0|P|Phi0>/trP) P.
    pub residual_min_eig: f64,
    pub psd_ok: bool,
    /// -log2 of the candidate weight on the target; equals eg_bits whenever
    /// the residual is PSD and the optimizer converged.
    pub lr_upper_bits: f64,
    pub verdict: Verdict,
    /// Propagated from the geometric optimizer; a non-converged witness
    /// cannot certify.
    pub geo_converged: bool,
}

impl EqualityCertificate {
    pub fn certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// Build the twirl candidate omega' = T(|Phi0><Phi0|) from the optimizer
/// witness and check the residual condition
/// omega' >= (<Phi0|P|Phi0>/trP) P.
///
/// Preconditions: the normalized target is invariant under the channel
/// (error `NotInvariant` otherwise) and `geo` holds the best product state
/// found for the target. A non-converged optimizer downgrades the verdict to
/// NotCertified rather than erroring.
pub fn certify_equality(
    target: &TargetState,
    channel: &TwirlChannel,
    geo: &GeoResult,
    psd_tol: f64,
    state_id: &str,
) -> Result<EqualityCertificate> {
    let (p_matrix, tr_p) = target.projector();
    if target.dims() != channel.dims() {
        return Err(EntcertError::invalid("certify_equality: dimension mismatch"));
    }
    let normalized = target.normalized_density()?;
    let deviation = invariance_deviation(channel, &normalized)?;
    if deviation > INVARIANCE_TOL {
        return Err(EntcertError::NotInvariant { deviation });
    }

    let phi0 = geo.witness.density()?;
    let candidate = channel.apply(&phi0)?;
    let spectrum = crate::linalg::hermitian_eig(candidate.matrix())?;

    // <Phi0|P|Phi0> = overlap * trP since geo ran on the normalized target
    let weight = geo.overlap * tr_p;
    let residual = candidate.matrix().sub(&p_matrix.scale(C64::new(weight / tr_p, 0.0)));
    let (psd_ok, residual_min_eig) = psd_check(&residual, psd_tol)?;

    let candidate_ok = (candidate.trace() - 1.0).abs() <= 1e-9;
    let verdict = if psd_ok && candidate_ok && geo.converged {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    let eg_bits = geo.value_bits - tr_p.log2();
    Ok(EqualityCertificate {
        state_id: state_id.to_string(),
        eg_bits,
        candidate,
        candidate_spectrum: spectrum.eigenvalues,
        residual_min_eig,
        psd_ok,
        lr_upper_bits: -weight.log2(),
        verdict,
        geo_converged: geo.converged,
    })
}

/// The twirled witness omega'; when the certificate is Certified this is a
/// closest separable state in relative entropy, S(psi||omega') = E_g.
pub fn closest_separable_candidate(
    target: &TargetState,
    channel: &TwirlChannel,
    geo: &GeoResult,
) -> Result<DensityOp> {
    let normalized = target.normalized_density()?;
    let deviation = invariance_deviation(channel, &normalized)?;
    if deviation > INVARIANCE_TOL {
        return Err(EntcertError::NotInvariant { deviation });
    }
    channel.apply(&geo.witness.density()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometric::{geometric_measure_pure, GeoOptions};
    use crate::linalg::{vec_norm, C_ONE, C_ZERO};
    use crate::states::{
        antisymmetric_basis, closest_product_dicke, dicke, ProductState, PureState,
    };

    fn opts() -> GeoOptions {
        GeoOptions { restarts: 16, ..GeoOptions::default() }
    }

    #[test]
    fn stabilizer_twirl_of_00() {
        let group = StabilizerGroup::from_pauli_strings(&["XX", "ZZ"]).unwrap();
        let channel = TwirlChannel::stabilizer(group.clone()).unwrap();
        let zero = ProductState::basis(&[2, 2], &[0, 0]).unwrap();
        let twirled = channel.apply(&zero.density().unwrap()).unwrap();
        // |00> = (|Phi+> + |Phi->)/sqrt2, so the twirl is the even mixture
        let basis = group.eigenbasis().unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        for state in basis.iter() {
            let overlap = state.inner(&zero.to_pure().unwrap()).norm_sqr();
            expected = expected.add(&state.density().matrix().scale(C64::new(overlap, 0.0)));
        }
        assert!(twirled.matrix().distance(&expected) < 1e-12);
        let phi_plus = group.stabilizer_state().unwrap();
        let w = phi_plus.density();
        let weight = twirled.matrix().matmul(w.matrix()).trace().re;
        assert!((weight - 0.5).abs() < 1e-12);
    }

    #[test]
    fn type_projection_weights_on_dicke_basis() {
        let channel = TwirlChannel::type_projection(3, 2).unwrap();
        let phi0 = closest_product_dicke(3, &[2, 1]).unwrap();
        let twirled = channel.apply(&phi0.density().unwrap()).unwrap();
        // output is sum_k |<Phi0|S(3,k)>|^2 |S(3,k)><S(3,k)|
        let mut expected = ComplexMatrix::zeros(8, 8);
        let phi0_pure = phi0.to_pure().unwrap();
        for kvec in [[3usize, 0], [2, 1], [1, 2], [0, 3]] {
            let s = dicke(3, &kvec).unwrap();
            let w = s.inner(&phi0_pure).norm_sqr();
            expected = expected.add(&s.density().matrix().scale(C64::new(w, 0.0)));
        }
        assert!(twirled.matrix().distance(&expected) < 1e-12);
        let s21 = dicke(3, &[2, 1]).unwrap();
        let weight = twirled.matrix().matmul(s21.density().matrix()).trace().re;
        assert!((weight - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn channels_are_unital() {
        let dim_mixed = |dims: &[usize]| {
            let d: usize = dims.iter().product();
            DensityOp::new(
                dims.to_vec(),
                ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
            )
            .unwrap()
        };
        let channels = vec![
            TwirlChannel::stabilizer(StabilizerGroup::ghz(2).unwrap()).unwrap(),
            TwirlChannel::type_projection(2, 2).unwrap(),
            TwirlChannel::monomial(2, 2).unwrap(),
            TwirlChannel::clifford_diagonal(2).unwrap(),
        ];
        for ch in channels {
            let rho = dim_mixed(ch.dims());
            let out = ch.apply(&rho).unwrap();
            assert!(out.matrix().distance(rho.matrix()) < 1e-12, "{}", ch.kind_name());
        }
    }

    #[test]
    fn twirl_idempotent_and_trace_preserving() {
        let channel = TwirlChannel::stabilizer(StabilizerGroup::ghz(3).unwrap()).unwrap();
        let phi = ProductState::basis(&[2, 2, 2], &[1, 0, 1]).unwrap();
        let once = channel.apply(&phi.density().unwrap()).unwrap();
        let twice = channel.apply(&once).unwrap();
        assert!(once.matrix().distance(twice.matrix()) < 1e-9);
        assert!((once.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stabilizer_twirl_diagonal_in_eigenbasis() {
        let group = StabilizerGroup::ghz(2).unwrap();
        let channel = TwirlChannel::stabilizer(group.clone()).unwrap();
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let phi = crate::geometric::haar_product_state(&[2, 2], &mut rng);
        let out = channel.apply(&phi.density().unwrap()).unwrap();
        let basis = group.eigenbasis().unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                if i != j {
                    let amps_a = a.amplitudes();
                    let amps_b = b.amplitudes();
                    let elem: C64 = (0..4)
                        .flat_map(|r| (0..4).map(move |c| (r, c)))
                        .map(|(r, c)| amps_a[r].conj() * out.matrix().get(r, c) * amps_b[c])
                        .sum();
                    assert!(elem.norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn invariance_examples() {
        let group = StabilizerGroup::ghz(3).unwrap();
        let channel = TwirlChannel::stabilizer(group.clone()).unwrap();
        let ghz = group.stabilizer_state().unwrap().density();
        assert!(invariance_check(&channel, &ghz, 1e-9).unwrap());

        let tp = TwirlChannel::type_projection(3, 2).unwrap();
        let s = dicke(3, &[2, 1]).unwrap().density();
        assert!(invariance_check(&tp, &s, 1e-9).unwrap());

        let tp1 = TwirlChannel::type_projection(1, 2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::new(vec![2], vec![C64::new(r, 0.0), C64::new(r, 0.0)]).unwrap();
        assert!(!invariance_check(&tp1, &plus.density(), 1e-9).unwrap());
    }

    #[test]
    fn certify_ghz3_stabilizer() {
        let group = StabilizerGroup::ghz(3).unwrap();
        let psi = group.stabilizer_state().unwrap();
        let geo = geometric_measure_pure(&psi, &opts()).unwrap();
        let channel = TwirlChannel::stabilizer(group).unwrap();
        let target = TargetState::Pure(psi.clone());
        let cert = certify_equality(&target, &channel, &geo, RESIDUAL_PSD_TOL, "ghz3").unwrap();
        assert!(cert.certified());
        assert!((cert.eg_bits - 1.0).abs() < 1e-8);
        assert!((cert.lr_upper_bits - cert.eg_bits).abs() < 1e-9);
        assert!(cert.residual_min_eig > -1e-12);

        // residual is 1/2 |GHZ-><GHZ-|
        let mut minus_amps = vec![C_ZERO; 8];
        minus_amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        minus_amps[7] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let ghz_minus = PureState::new(vec![2, 2, 2], minus_amps).unwrap();
        let residual = cert
            .candidate
            .matrix()
            .sub(&psi.density().matrix().scale(C64::new(0.5, 0.0)));
        let expected = ghz_minus.density().matrix().scale(C64::new(0.5, 0.0));
        assert!(residual.distance(&expected) < 1e-8);
    }

    #[test]
    fn certify_dicke_type_projection() {
        let psi = dicke(3, &[2, 1]).unwrap();
        let geo = crate::geometric::symmetric_restricted_measure(&psi, &opts()).unwrap();
        let channel = TwirlChannel::type_projection(3, 2).unwrap();
        let cert = certify_equality(
            &TargetState::Pure(psi),
            &channel,
            &geo,
            RESIDUAL_PSD_TOL,
            "dicke(3,(2,1))",
        )
        .unwrap();
        assert!(cert.certified());
        assert!((cert.eg_bits - (9.0f64 / 4.0).log2()).abs() < 1e-8);
        assert!((cert.lr_upper_bits - cert.eg_bits).abs() < 1e-9);
    }

    #[test]
    fn certify_fails_when_not_invariant() {
        // a random-ish product state is not invariant under the GHZ twirl
        let psi = ProductState::basis(&[2, 2, 2], &[0, 1, 0])
            .unwrap()
            .to_pure()
            .unwrap();
        let geo = geometric_measure_pure(&psi, &opts()).unwrap();
        let channel = TwirlChannel::stabilizer(StabilizerGroup::ghz(3).unwrap()).unwrap();
        let err = certify_equality(
            &TargetState::Pure(psi),
            &channel,
            &geo,
            RESIDUAL_PSD_TOL,
            "basis010",
        );
        assert!(matches!(err, Err(EntcertError::NotInvariant { .. })));
    }

    #[test]
    fn monomial_certifies_antisymmetric_basis() {
        let psi = antisymmetric_basis(3, 3).unwrap();
        let geo = geometric_measure_pure(&psi, &GeoOptions { restarts: 24, ..opts() }).unwrap();
        let channel = TwirlChannel::monomial(3, 3).unwrap();
        let cert = certify_equality(
            &TargetState::Pure(psi),
            &channel,
            &geo,
            RESIDUAL_PSD_TOL,
            "antisym(3,3)",
        )
        .unwrap();
        assert!(cert.certified(), "residual min eig {}", cert.residual_min_eig);
        assert!((cert.eg_bits - 6.0f64.log2()).abs() < 1e-7);
    }

    #[test]
    fn trivial_channel_on_product_state() {
        let phi = ProductState::basis(&[2, 2], &[0, 1]).unwrap();
        let psi = phi.to_pure().unwrap();
        let geo = geometric_measure_pure(&psi, &opts()).unwrap();
        let channel = TwirlChannel::trivial(&[2, 2]).unwrap();
        let cert = certify_equality(
            &TargetState::Pure(psi.clone()),
            &channel,
            &geo,
            RESIDUAL_PSD_TOL,
            "product",
        )
        .unwrap();
        assert!(cert.certified());
        assert!(cert.eg_bits.abs() < 1e-10);
        let omega = closest_separable_candidate(
            &TargetState::Pure(psi.clone()),
            &channel,
            &geo,
        )
        .unwrap();
        assert!(omega.matrix().distance(psi.density().matrix()) < 1e-10);
    }

    #[test]
    fn clifford_group_has_24_elements_and_is_a_2_design() {
        let group = local_clifford_group();
        assert_eq!(group.len(), 24);
        // 2-design check: the twirl of |00><00| on two parties must be the
        // Werner form tr(rho Psym)/3 Psym + tr(rho Panti) Panti
        let channel = TwirlChannel::clifford_diagonal(2).unwrap();
        let zero = ProductState::basis(&[2, 2], &[0, 0]).unwrap();
        let out = channel.apply(&zero.density().unwrap()).unwrap();
        let psym = crate::states::symmetric_projector(2, 2).unwrap();
        let expected = psym.matrix().scale(C64::new(1.0 / 3.0, 0.0));
        assert!(out.matrix().distance(&expected) < 1e-12);
    }

    #[test]
    fn finite_group_rejects_non_closed() {
        // {I, H} is not closed (H*H gives I but H alone misses S-like words...
        // actually {I,H} IS closed: H^2 = I). Use {I, S} instead: S^2 = Z missing.
        let s_gate = LocalUnitary::new(vec![paulis::phase_s()]).unwrap();
        let id = LocalUnitary::identity(&[2]);
        assert!(TwirlChannel::finite_group(vec![id, s_gate]).is_err());
    }

    #[test]
    fn tree_sum_matches_sequential() {
        let mats: Vec<ComplexMatrix> = (0..7)
            .map(|k| ComplexMatrix::identity(2).scale(C64::new(k as f64, 0.5)))
            .collect();
        let seq = mats.iter().skip(1).fold(mats[0].clone(), |acc, m| acc.add(m));
        assert!(tree_sum(mats).distance(&seq) < 1e-12);
    }

    #[test]
    fn monomial_twirl_output_norm_sane() {
        let channel = TwirlChannel::monomial(2, 2).unwrap();
        let phi = ProductState::basis(&[2, 2], &[0, 1]).unwrap();
        let out = channel.apply(&phi.density().unwrap()).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-12);
        let v: Vec<C64> = vec![C_ONE, C_ZERO];
        assert!(vec_norm(&v) > 0.0);
    }
}
