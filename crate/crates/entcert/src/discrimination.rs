//! Discrimination of state ensembles by separable measurements: local-unitary
//! orbit ensembles, the separable square-root measurement built from closest
//! product states, and the geometric-measure / robustness bounds on the
//! optimal success probability.
//!
//! The square-root construction is only separable when the mean closest
//! product state is maximally mixed; that condition is checked and its
//! failure is a typed error carrying the deviation, so callers can fall back
//! to the (unconditional) upper bound.

use serde::Serialize;

use crate::error::{EntcertError, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, LocalUnitary, C64};
use crate::states::{is_product_vector, DensityOp, ProductState, PureState};

/// Largest accepted orbit group.
pub const MAX_ORBIT_SIZE: usize = 4096;
const MEAN_MIXED_TOL: f64 = 1e-8;

// ---------------------------------------------------------------------------
// ensembles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum MemberState {
    Pure(PureState),
    Mixed(DensityOp),
}

impl MemberState {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            MemberState::Pure(p) => p.dims().to_vec(),
            MemberState::Mixed(m) => m.dims().to_vec(),
        }
    }

    /// tr(rho * M) for an arbitrary operator M.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        match self {
            MemberState::Pure(p) => {
                let mv = op.apply(p.amplitudes());
                crate::linalg::vec_inner(p.amplitudes(), &mv).re
            }
            MemberState::Mixed(m) => m.matrix().matmul(op).trace().re,
        }
    }

    pub fn product_overlap(&self, phi: &ProductState) -> Result<f64> {
        match self {
            MemberState::Pure(p) => Ok(phi.to_pure()?.inner(p).norm_sqr()),
            MemberState::Mixed(m) => m.product_overlap(phi),
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            MemberState::Pure(_) => 1.0,
            MemberState::Mixed(m) => m.purity(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleMember {
    pub prior: f64,
    pub state: MemberState,
    pub label: String,
}

/// A labeled ensemble {p_i, rho_i}. Duplicate states under distinct labels
/// are allowed; the bounds quantify over labels.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<EnsembleMember>,
    dims: Vec<usize>,
    total_dim: usize,
}

impl Ensemble {
    pub fn new(members: Vec<EnsembleMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(EntcertError::invalid("Ensemble: no members"));
        }
        let dims = members[0].state.dims();
        let total_dim: usize = dims.iter().product();
        let mut total_p = 0.0;
        for m in &members {
            if m.state.dims() != dims {
                return Err(EntcertError::invalid("Ensemble: mixed dimensions"));
            }
            if m.prior < 0.0 {
                return Err(EntcertError::invalid("Ensemble: negative prior"));
            }
            total_p += m.prior;
        }
        if (total_p - 1.0).abs() > 1e-12 {
            return Err(EntcertError::invalid(format!(
                "Ensemble: priors sum to {total_p}"
            )));
        }
        Ok(Self { members, dims, total_dim })
    }

    pub fn members(&self) -> &[EnsembleMember] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }
}

/// Close the generator set into a group (products up to global phase) and
/// apply every element to the fiducial state, with uniform priors. Duplicate
/// orbit points are retained as distinct labels, one per group element.
pub fn orbit_ensemble(fiducial: &PureState, generators: &[LocalUnitary]) -> Result<Ensemble> {
    let dims = fiducial.dims().to_vec();
    for g in generators {
        if g.dims() != dims {
            return Err(EntcertError::invalid("orbit_ensemble: generator dimension mismatch"));
        }
    }
    let group = close_group(generators, &dims)?;
    let n = group.len();
    let members = group
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let state = fiducial.apply_unitary(&u.full_matrix()?)?;
            Ok(EnsembleMember {
                prior: 1.0 / n as f64,
                state: MemberState::Pure(state),
                label: format!("orbit[{i}]"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(members)
}

/// The group generated by `generators` (always contains the identity).
pub fn close_group(generators: &[LocalUnitary], dims: &[usize]) -> Result<Vec<LocalUnitary>> {
    let mut group: Vec<LocalUnitary> = vec![LocalUnitary::identity(dims)];
    let mut fulls: Vec<ComplexMatrix> = vec![group[0].full_matrix()?];
    let mut frontier: Vec<usize> = vec![0];
    while let Some(idx) = frontier.pop() {
        for g in generators {
            let cand = g.compose(&group[idx])?;
            let full = cand.full_matrix()?;
            let known = fulls.iter().any(|m| {
                let s = m.adjoint().matmul(&full).trace();
                s.norm() >= (full.rows() as f64) - 1e-8
            });
            if !known {
                if group.len() >= MAX_ORBIT_SIZE {
                    return Err(EntcertError::invalid(format!(
                        "orbit group exceeds cap {MAX_ORBIT_SIZE}"
                    )));
                }
                group.push(cand);
                fulls.push(full);
                frontier.push(group.len() - 1);
            }
        }
    }
    Ok(group)
}

/// X on the given party, identity elsewhere, for every party (qubits only).
pub fn bit_flip_generators(dims: &[usize]) -> Result<Vec<LocalUnitary>> {
    if dims.iter().any(|&d| d != 2) {
        return Err(EntcertError::invalid("bit_flip_generators: qubit parties only"));
    }
    (0..dims.len())
        .map(|party| {
            let factors: Vec<ComplexMatrix> = (0..dims.len())
                .map(|j| {
                    if j == party {
                        crate::linalg::paulis::x()
                    } else {
                        ComplexMatrix::identity(2)
                    }
                })
                .collect();
            LocalUnitary::new(factors)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// POVMs
// ---------------------------------------------------------------------------

/// A POVM as explicit PSD elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(EntcertError::invalid("Povm: no elements"));
        }
        let dim = elements[0].rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for m in &elements {
            if !m.is_square() || m.rows() != dim {
                return Err(EntcertError::invalid("Povm: element dimension mismatch"));
            }
            let (ok, min_eig) = crate::linalg::psd_check(m, 1e-9)?;
            if !ok {
                return Err(EntcertError::NotPsd { min_eig });
            }
            sum = sum.add(m);
        }
        let dev = sum.distance(&ComplexMatrix::identity(dim));
        if dev > 1e-9 * (dim as f64).sqrt() {
            return Err(EntcertError::invalid(format!(
                "Povm: elements sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True when every element is (numerically) a scaled rank-1 projector
    /// onto a product vector. Such a POVM is implementable by LOCC when the
    /// vectors form a product basis; this flag is recorded for reporting and
    /// never claimed for general separable POVMs.
    pub fn is_projective_product(&self, dims: &[usize]) -> bool {
        self.elements.iter().all(|m| {
            let spec = match hermitian_eig(m) {
                Ok(s) => s,
                Err(_) => return false,
            };
            if spec.eigenvalues.len() > 1 && spec.eigenvalues[1].abs() > 1e-9 {
                return false;
            }
            if spec.eigenvalues[0] <= 1e-9 {
                return false;
            }
            is_product_vector(&spec.eigenvector(0), dims, 1e-8)
        })
    }
}

/// The square-root measurement for the closest product states {psi_i} of an
/// ensemble whose mean closest state is maximally mixed: M_i = p_i D psi_i.
pub fn srm_from_closest_products(ens: &Ensemble, products: &[ProductState]) -> Result<Povm> {
    if products.len() != ens.len() {
        return Err(EntcertError::invalid(format!(
            "srm: {} products for {} members",
            products.len(),
            ens.len()
        )));
    }
    let d = ens.total_dim();
    let mut mean = ComplexMatrix::zeros(d, d);
    let mut pures = Vec::with_capacity(products.len());
    for (member, phi) in ens.members().iter().zip(products) {
        let pure = phi.to_pure()?;
        if pure.dims() != ens.dims() {
            return Err(EntcertError::invalid("srm: product dimension mismatch"));
        }
        mean = mean.add(
            &ComplexMatrix::outer(pure.amplitudes(), pure.amplitudes())
                .scale(C64::new(member.prior, 0.0)),
        );
        pures.push(pure);
    }
    let target = ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0));
    let gap = mean.sub(&target);
    let deviation = hermitian_eig(&gap)?
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if deviation > MEAN_MIXED_TOL {
        return Err(EntcertError::MeanNotMaximallyMixed { deviation });
    }
    let elements = ens
        .members()
        .iter()
        .zip(&pures)
        .map(|(member, pure)| {
            ComplexMatrix::outer(pure.amplitudes(), pure.amplitudes())
                .scale(C64::new(member.prior * d as f64, 0.0))
        })
        .collect();
    Povm::new(elements)
}

/// P_s = sum_i p_i tr(M_i rho_i).
pub fn success_probability(ens: &Ensemble, povm: &Povm) -> Result<f64> {
    if povm.len() != ens.len() {
        return Err(EntcertError::invalid(format!(
            "success_probability: {} POVM elements for {} members",
            povm.len(),
            ens.len()
        )));
    }
    let mut acc = 0.0;
    for (member, element) in ens.members().iter().zip(povm.elements()) {
        acc += member.prior * member.state.expectation(element);
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

/// Compute 2^-G (the best product overlap) per member with the geometric
/// optimizer.
pub fn member_overlaps(ens: &Ensemble, opts: &crate::geometric::GeoOptions) -> Result<Vec<f64>> {
    ens.members()
        .iter()
        .map(|m| {
            let geo = match &m.state {
                MemberState::Pure(p) => crate::geometric::geometric_measure_pure(p, opts)?,
                MemberState::Mixed(rho) => crate::geometric::geometric_g_mixed(rho, opts)?,
            };
            Ok(geo.overlap)
        })
        .collect()
}

/// Upper bound D max_i p_i 2^-G(rho_i); valid for every separable POVM.
pub fn upper_bound_g(ens: &Ensemble, overlaps: &[f64]) -> f64 {
    let d = ens.total_dim() as f64;
    d * ens
        .members()
        .iter()
        .zip(overlaps)
        .map(|(m, &ov)| m.prior * ov)
        .fold(0.0f64, f64::max)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GLowerBounds {
    /// D sum_i p_i^2 tr(rho_i psi_i): the success probability the square-root
    /// measurement achieves.
    pub srm_form: f64,
    /// The weakened D min_i p_i tr(rho_i psi_i).
    pub min_form: f64,
}

/// Lower bounds achieved by the separable square-root measurement; requires
/// (and checks, through `srm_from_closest_products`) the mean-maximally-mixed
/// condition.
pub fn lower_bound_g(ens: &Ensemble, products: &[ProductState]) -> Result<GLowerBounds> {
    // constructing the POVM enforces the validity condition
    let _ = srm_from_closest_products(ens, products)?;
    let d = ens.total_dim() as f64;
    let mut srm_form = 0.0;
    let mut min_form = f64::INFINITY;
    for (member, phi) in ens.members().iter().zip(products) {
        let ov = member.state.product_overlap(phi)?;
        srm_form += member.prior * member.prior * ov;
        min_form = min_form.min(member.prior * ov);
    }
    Ok(GLowerBounds { srm_form: d * srm_form, min_form: d * min_form })
}

/// Per-member data for the robustness-based lower bound.
#[derive(Debug, Clone, Copy)]
pub struct RobustnessDatum {
    /// Robustness upper bound t_i from a certified candidate.
    pub t: f64,
    /// tr(rho_i^2).
    pub purity: f64,
    /// Dimension of the support projector of rho_i.
    pub support_dim: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RobustnessLowerBounds {
    /// D min_i tr(rho_i^2) p_i / (1 + t_i).
    pub purity_form: f64,
    /// The weakened D min_i p_i / (|P_i| (1 + t_i)).
    pub support_form: f64,
}

/// Lower bounds from the robustness closest-state construction.
pub fn lower_bound_robustness(ens: &Ensemble, data: &[RobustnessDatum]) -> Result<RobustnessLowerBounds> {
    if data.len() != ens.len() {
        return Err(EntcertError::invalid("lower_bound_robustness: length mismatch"));
    }
    let d = ens.total_dim() as f64;
    let mut purity_form = f64::INFINITY;
    let mut support_form = f64::INFINITY;
    for (member, datum) in ens.members().iter().zip(data) {
        purity_form = purity_form.min(datum.purity * member.prior / (1.0 + datum.t));
        support_form = support_form.min(member.prior / (datum.support_dim as f64 * (1.0 + datum.t)));
    }
    Ok(RobustnessLowerBounds {
        purity_form: d * purity_form,
        support_form: d * support_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometric::GeoOptions;
    use crate::linalg::C_ZERO;
    use crate::states::{closest_product_dicke, dicke, StabilizerGroup};

    fn opts() -> GeoOptions {
        GeoOptions { restarts: 12, ..GeoOptions::default() }
    }

    fn ghz3_orbit() -> (Ensemble, Vec<ProductState>) {
        let ghz = StabilizerGroup::ghz(3).unwrap().stabilizer_state().unwrap();
        let gens = bit_flip_generators(&[2, 2, 2]).unwrap();
        let ens = orbit_ensemble(&ghz, &gens).unwrap();
        // products: the same flips applied to |000>
        let group = close_group(&gens, &[2, 2, 2]).unwrap();
        let zero = ProductState::basis(&[2, 2, 2], &[0, 0, 0]).unwrap();
        let products = group
            .iter()
            .map(|u| {
                let locals = zero
                    .locals()
                    .iter()
                    .zip(u.factors())
                    .map(|(v, f)| f.apply(v))
                    .collect();
                ProductState::new(locals).unwrap()
            })
            .collect();
        (ens, products)
    }

    #[test]
    fn x_orbit_of_000_is_computational_basis() {
        let zero = ProductState::basis(&[2, 2, 2], &[0, 0, 0])
            .unwrap()
            .to_pure()
            .unwrap();
        let gens = bit_flip_generators(&[2, 2, 2]).unwrap();
        let ens = orbit_ensemble(&zero, &gens).unwrap();
        assert_eq!(ens.len(), 8);
        // every computational basis state appears exactly once
        let mut seen = vec![false; 8];
        for m in ens.members() {
            if let MemberState::Pure(p) = &m.state {
                let idx = p
                    .amplitudes()
                    .iter()
                    .position(|a| (a.norm() - 1.0).abs() < 1e-12)
                    .unwrap();
                assert!(!seen[idx]);
                seen[idx] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn ghz_orbit_has_duplicate_pairs() {
        let (ens, _) = ghz3_orbit();
        assert_eq!(ens.len(), 8);
        // X(x)X(x)X fixes GHZ: states come in 4 pairs
        let mut distinct = 0;
        for (i, a) in ens.members().iter().enumerate() {
            let pa = match &a.state {
                MemberState::Pure(p) => p,
                _ => unreachable!(),
            };
            let dup = ens.members()[..i].iter().any(|b| {
                let pb = match &b.state {
                    MemberState::Pure(p) => p,
                    _ => unreachable!(),
                };
                (pa.inner(pb).norm() - 1.0).abs() < 1e-10
            });
            if !dup {
                distinct += 1;
            }
        }
        assert_eq!(distinct, 4);
    }

    #[test]
    fn singleton_orbit() {
        let zero = ProductState::basis(&[2, 2], &[0, 0]).unwrap().to_pure().unwrap();
        let ens = orbit_ensemble(&zero, &[]).unwrap();
        assert_eq!(ens.len(), 1);
        assert!((ens.members()[0].prior - 1.0).abs() < 1e-15);
    }

    #[test]
    fn srm_ghz_orbit_gives_computational_projectors() {
        let (ens, products) = ghz3_orbit();
        let povm = srm_from_closest_products(&ens, &products).unwrap();
        assert_eq!(povm.len(), 8);
        for (k, m) in povm.elements().iter().enumerate() {
            // p_i D |psi_i><psi_i| = |basis><basis| here
            let pure = products[k].to_pure().unwrap();
            let expected = ComplexMatrix::outer(pure.amplitudes(), pure.amplitudes());
            assert!(m.distance(&expected) < 1e-10);
        }
        assert!(povm.is_projective_product(&[2, 2, 2]));
    }

    #[test]
    fn srm_rejects_non_mixed_mean() {
        let zero = ProductState::basis(&[2], &[0]).unwrap();
        let ens = Ensemble::new(vec![EnsembleMember {
            prior: 1.0,
            state: MemberState::Pure(zero.to_pure().unwrap()),
            label: "z".into(),
        }])
        .unwrap();
        let err = srm_from_closest_products(&ens, &[zero]);
        assert!(matches!(err, Err(EntcertError::MeanNotMaximallyMixed { .. })));
    }

    #[test]
    fn srm_rejects_dicke_orbit_mean() {
        // the closest product of dicke(3,(2,1)) is not basis-aligned, so its
        // X-orbit mean is not maximally mixed
        let psi = dicke(3, &[2, 1]).unwrap();
        let gens = bit_flip_generators(&[2, 2, 2]).unwrap();
        let ens = orbit_ensemble(&psi, &gens).unwrap();
        let phi = closest_product_dicke(3, &[2, 1]).unwrap();
        let group = close_group(&gens, &[2, 2, 2]).unwrap();
        let products: Vec<ProductState> = group
            .iter()
            .map(|u| {
                let locals = phi
                    .locals()
                    .iter()
                    .zip(u.factors())
                    .map(|(v, f)| f.apply(v))
                    .collect();
                ProductState::new(locals).unwrap()
            })
            .collect();
        assert!(matches!(
            srm_from_closest_products(&ens, &products),
            Err(EntcertError::MeanNotMaximallyMixed { .. })
        ));
        // ... but the upper bound still applies: 8 * (1/8) * 4/9
        let overlaps = member_overlaps(&ens, &opts()).unwrap();
        let upper = upper_bound_g(&ens, &overlaps);
        assert!((upper - 4.0 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn perfect_discrimination_of_product_basis() {
        let zero = ProductState::basis(&[2, 2], &[0, 0]).unwrap().to_pure().unwrap();
        let gens = bit_flip_generators(&[2, 2]).unwrap();
        let ens = orbit_ensemble(&zero, &gens).unwrap();
        let group = close_group(&gens, &[2, 2]).unwrap();
        let products: Vec<ProductState> = group
            .iter()
            .map(|u| {
                let locals = vec![
                    u.factors()[0].apply(&[crate::linalg::C_ONE, C_ZERO]),
                    u.factors()[1].apply(&[crate::linalg::C_ONE, C_ZERO]),
                ];
                ProductState::new(locals).unwrap()
            })
            .collect();
        let povm = srm_from_closest_products(&ens, &products).unwrap();
        let ps = success_probability(&ens, &povm).unwrap();
        assert!((ps - 1.0).abs() < 1e-10);
        let overlaps = member_overlaps(&ens, &opts()).unwrap();
        assert!((upper_bound_g(&ens, &overlaps) - 1.0).abs() < 1e-9);
        let lower = lower_bound_g(&ens, &products).unwrap();
        assert!((lower.srm_form - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_orbit_matching_bounds() {
        let (ens, products) = ghz3_orbit();
        let povm = srm_from_closest_products(&ens, &products).unwrap();
        let achieved = success_probability(&ens, &povm).unwrap();
        let overlaps = member_overlaps(&ens, &opts()).unwrap();
        let upper = upper_bound_g(&ens, &overlaps);
        let lower = lower_bound_g(&ens, &products).unwrap();
        assert!((achieved - 0.5).abs() < 1e-9, "achieved {achieved}");
        assert!((upper - 0.5).abs() < 1e-7, "upper {upper}");
        assert!((lower.srm_form - 0.5).abs() < 1e-9, "lower {:?}", lower);
        assert!((lower.srm_form - achieved).abs() < 1e-9);
        assert!(lower.srm_form <= upper + 1e-9);
    }

    #[test]
    fn random_guessing_povm() {
        let (ens, _) = ghz3_orbit();
        let eighth = ComplexMatrix::identity(8).scale(C64::new(1.0 / 8.0, 0.0));
        let povm = Povm::new(vec![eighth; 8]).unwrap();
        let ps = success_probability(&ens, &povm).unwrap();
        assert!((ps - 1.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn robustness_lower_bounds_ghz() {
        let (ens, _) = ghz3_orbit();
        let data = vec![RobustnessDatum { t: 1.0, purity: 1.0, support_dim: 1 }; 8];
        let bounds = lower_bound_robustness(&ens, &data).unwrap();
        // D min p/(|P|(1+t)) = 8 * (1/8) / 2 = 1/2
        assert!((bounds.support_form - 0.5).abs() < 1e-12);
        assert!((bounds.purity_form - 0.5).abs() < 1e-12);
        // consistent with the geometric lower bound on the same ensemble
        let (_, products) = ghz3_orbit();
        let lower = lower_bound_g(&ens, &products).unwrap();
        assert!(bounds.purity_form <= lower.srm_form + 1e-9);
    }

    #[test]
    fn robustness_lower_bound_trivial_ensemble() {
        let zero = ProductState::basis(&[2, 2], &[0, 0]).unwrap().to_pure().unwrap();
        let gens = bit_flip_generators(&[2, 2]).unwrap();
        let ens = orbit_ensemble(&zero, &gens).unwrap();
        let data = vec![RobustnessDatum { t: 0.0, purity: 1.0, support_dim: 1 }; 4];
        let bounds = lower_bound_robustness(&ens, &data).unwrap();
        // pure separable members with t = 0: D min p_i = 1
        assert!((bounds.purity_form - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_orbit_robustness_bound() {
        let singlet = crate::states::antisymmetric_basis(2, 2).unwrap();
        let gens = bit_flip_generators(&[2, 2]).unwrap();
        let ens = orbit_ensemble(&singlet, &gens).unwrap();
        assert_eq!(ens.len(), 4);
        let data = vec![RobustnessDatum { t: 1.0, purity: 1.0, support_dim: 1 }; 4];
        let bounds = lower_bound_robustness(&ens, &data).unwrap();
        assert!((bounds.support_form - 0.5).abs() < 1e-12);
    }
}
