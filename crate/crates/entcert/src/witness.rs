//! Entanglement witnesses from the geometric measure.
//!
//! W = (alpha I - rho)/alpha with alpha = 2^-G(rho) satisfies tr(W sigma) >= 0
//! for every separable sigma exactly when alpha is the true separable
//! maximum, i.e. when the geometric optimizer found the global optimum.
//! Validity is therefore checked by sampling plus local refinement rather
//! than proven, and the report ties the two confidences together. For
//! certified projection states -tr(W rho) = 2^G/trP - 1 reproduces the
//! robustness, making W optimal in its normalization class.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::error::{EntcertError, Result};
use crate::geometric::{haar_product_state, refine_overlap_mixed, GeoOptions, GeoResult};
use crate::linalg::{hermitian_eig, ComplexMatrix, C64};
use crate::states::{DensityOp, ProductState, TargetState};

/// A normalized geometric-measure witness (alpha I - rho)/alpha.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub operator: ComplexMatrix,
    /// alpha = 2^-G(rho), the best product overlap found for rho.
    pub alpha: f64,
    pub source_state_id: String,
    /// Set when lambda_max(rho) <= alpha: the witness is PSD and cannot
    /// detect any entangled state (e.g. rho maximally mixed, or its top
    /// eigenvector is a product state).
    pub trivial: bool,
}

/// Build W_G from a normalized state and its geometric optimization result.
pub fn build_wg(rho: &DensityOp, geo: &GeoResult, source_state_id: &str) -> Result<Witness> {
    if (rho.trace() - 1.0).abs() > 1e-8 {
        return Err(EntcertError::invalid("build_wg: rho must be trace-one"));
    }
    let alpha = geo.overlap;
    if !(alpha > 0.0 && alpha <= 1.0 + 1e-12) {
        return Err(EntcertError::invalid(format!(
            "build_wg: alpha = {alpha} outside (0, 1]"
        )));
    }
    let dim = rho.total_dim();
    let operator = ComplexMatrix::identity(dim)
        .scale(C64::new(alpha, 0.0))
        .sub(rho.matrix())
        .scale(C64::new(1.0 / alpha, 0.0));
    let spectrum = hermitian_eig(rho.matrix())?;
    let lambda_max = spectrum.eigenvalues[0];
    // W <= I always holds for PSD rho; check it anyway
    let w_spec = hermitian_eig(&operator)?;
    if w_spec.eigenvalues[0] > 1.0 + 1e-9 {
        return Err(EntcertError::InternalError(
            "witness operator exceeds the identity".into(),
        ));
    }
    Ok(Witness {
        operator,
        alpha,
        source_state_id: source_state_id.to_string(),
        trivial: lambda_max <= alpha + 1e-9,
    })
}

/// tr(W rho).
pub fn witness_expectation(witness: &Witness, rho: &DensityOp) -> Result<f64> {
    if rho.total_dim() != witness.operator.rows() {
        return Err(EntcertError::invalid("witness_expectation: dimension mismatch"));
    }
    Ok(witness.operator.matmul(rho.matrix()).trace().re)
}

/// tr(W |Phi><Phi|) for a product state, using the cheap quadratic form.
pub fn witness_product_value(witness: &Witness, phi: &ProductState) -> Result<f64> {
    let v = phi.to_pure()?;
    if v.total_dim() != witness.operator.rows() {
        return Err(EntcertError::invalid("witness_product_value: dimension mismatch"));
    }
    let wv = witness.operator.apply(v.amplitudes());
    Ok(crate::linalg::vec_inner(v.amplitudes(), &wv).re)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValiditySample {
    /// Smallest tr(W sigma) seen over the samples and the refined worst case.
    pub min_value: f64,
    /// Present only when the refined minimum dips below -1e-7.
    pub violating_state: Option<ProductState>,
    pub samples: usize,
}

/// Sample Haar-random product states, then refine the worst one by
/// alternating maximization of <Phi|rho|Phi> (min_sigma tr(W sigma) =
/// (alpha - max_Phi <Phi|rho|Phi>)/alpha). A violation is reported only if
/// the refined minimum is below -1e-7.
pub fn witness_validity_sample(
    witness: &Witness,
    target: &TargetState,
    samples: usize,
    seed: u64,
) -> Result<ValiditySample> {
    if samples == 0 {
        return Err(EntcertError::invalid("witness_validity_sample: samples >= 1"));
    }
    let rho = target.normalized_density()?;
    // the witness must actually belong to this state
    let rebuilt = ComplexMatrix::identity(rho.total_dim())
        .scale(C64::new(witness.alpha, 0.0))
        .sub(&witness.operator.scale(C64::new(witness.alpha, 0.0)));
    if rebuilt.distance(rho.matrix()) > 1e-8 * rho.matrix().frobenius_norm().max(1.0) {
        return Err(EntcertError::invalid(
            "witness_validity_sample: witness does not match the supplied state",
        ));
    }
    let dims = target.dims();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut min_value = f64::INFINITY;
    let mut worst: Option<ProductState> = None;
    for _ in 0..samples {
        let phi = haar_product_state(&dims, &mut rng);
        let overlap = overlap_with(target, &phi)?;
        let value = (witness.alpha - overlap) / witness.alpha;
        if value < min_value {
            min_value = value;
            worst = Some(phi);
        }
    }
    // polish the worst sample: a sampled near-violation either vanishes or
    // sharpens into a genuine one
    let mut violating_state = None;
    if let Some(init) = worst {
        let refine_opts = GeoOptions { restarts: 1, max_iters: 300, tol: 1e-14, seed };
        let refined = refine_overlap_mixed(&rho, &init, &refine_opts)?;
        let refined_value = (witness.alpha - refined.overlap) / witness.alpha;
        min_value = min_value.min(refined_value);
        if refined_value < -1e-7 {
            violating_state = Some(refined.witness);
        }
    }
    Ok(ValiditySample { min_value, violating_state, samples })
}

fn overlap_with(target: &TargetState, phi: &ProductState) -> Result<f64> {
    match target {
        TargetState::Pure(psi) => Ok(phi.to_pure()?.inner(psi).norm_sqr()),
        TargetState::Projection(p) => {
            let normalized = p.normalized()?;
            normalized.product_overlap(phi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometric::{geometric_g_mixed, geometric_measure_pure};
    use crate::states::{antisymmetric_basis, dicke, StabilizerGroup};

    fn opts() -> GeoOptions {
        GeoOptions { restarts: 12, ..GeoOptions::default() }
    }

    #[test]
    fn ghz_witness_expectation() {
        let ghz = StabilizerGroup::ghz(3).unwrap().stabilizer_state().unwrap();
        let rho = ghz.density();
        let geo = geometric_measure_pure(&ghz, &opts()).unwrap();
        let w = build_wg(&rho, &geo, "ghz3").unwrap();
        assert!(!w.trivial);
        assert!((w.alpha - 0.5).abs() < 1e-9);
        // -tr(W rho) = 2^G/|P| - 1 = 1
        let value = witness_expectation(&w, &rho).unwrap();
        assert!((value + 1.0).abs() < 1e-7);
    }

    #[test]
    fn witness_zero_crossing_at_closest_product() {
        let ghz = StabilizerGroup::ghz(3).unwrap().stabilizer_state().unwrap();
        let geo = geometric_measure_pure(&ghz, &opts()).unwrap();
        let w = build_wg(&ghz.density(), &geo, "ghz3").unwrap();
        let value = witness_product_value(&w, &geo.witness).unwrap();
        assert!(value.abs() < 1e-9);
    }

    #[test]
    fn witness_singlet_expectation() {
        let singlet = antisymmetric_basis(2, 2).unwrap();
        let geo = geometric_measure_pure(&singlet, &opts()).unwrap();
        let w = build_wg(&singlet.density(), &geo, "singlet").unwrap();
        let value = witness_expectation(&w, &singlet.density()).unwrap();
        assert!((value + 1.0).abs() < 1e-7);
    }

    #[test]
    fn maximally_mixed_witness_is_trivial() {
        let dim = 4usize;
        let rho = DensityOp::new(
            vec![2, 2],
            ComplexMatrix::identity(dim).scale(C64::new(0.25, 0.0)),
        )
        .unwrap();
        let geo = geometric_g_mixed(&rho, &opts()).unwrap();
        let w = build_wg(&rho, &geo, "mixed").unwrap();
        assert!(w.trivial);
        // degenerate witness: W = 0 here
        assert!(w.operator.frobenius_norm() < 1e-8);
    }

    #[test]
    fn product_projector_witness_min_zero() {
        let phi = crate::states::ProductState::basis(&[2, 2], &[0, 1]).unwrap();
        let psi = phi.to_pure().unwrap();
        let geo = geometric_measure_pure(&psi, &opts()).unwrap();
        let w = build_wg(&psi.density(), &geo, "product").unwrap();
        assert!(w.trivial);
        let sample =
            witness_validity_sample(&w, &TargetState::Pure(psi), 500, 11).unwrap();
        assert!(sample.min_value >= -1e-9);
        // the state itself attains 0
        assert!(witness_product_value(&w, &phi).unwrap().abs() < 1e-10);
    }

    #[test]
    fn validity_sampling_finds_no_violation_for_ghz() {
        let ghz = StabilizerGroup::ghz(3).unwrap().stabilizer_state().unwrap();
        let geo = geometric_measure_pure(&ghz, &opts()).unwrap();
        let w = build_wg(&ghz.density(), &geo, "ghz3").unwrap();
        let sample =
            witness_validity_sample(&w, &TargetState::Pure(ghz), 2000, 3).unwrap();
        assert!(sample.violating_state.is_none(), "min {}", sample.min_value);
        assert!(sample.min_value >= -1e-7);
    }

    #[test]
    fn halved_alpha_witness_is_violated() {
        let ghz = StabilizerGroup::ghz(3).unwrap().stabilizer_state().unwrap();
        let geo = geometric_measure_pure(&ghz, &opts()).unwrap();
        let mut w = build_wg(&ghz.density(), &geo, "ghz3").unwrap();
        // rebuild with alpha artificially halved
        let alpha = w.alpha / 2.0;
        w.operator = ComplexMatrix::identity(8)
            .scale(C64::new(alpha, 0.0))
            .sub(ghz.density().matrix())
            .scale(C64::new(1.0 / alpha, 0.0));
        w.alpha = alpha;
        let sample =
            witness_validity_sample(&w, &TargetState::Pure(ghz), 500, 5).unwrap();
        assert!(sample.violating_state.is_some());
        assert!(sample.min_value < -1e-7);
        // the violating state certifies itself
        let phi = sample.violating_state.unwrap();
        assert!(witness_product_value(&w, &phi).unwrap() < -1e-7);
    }

    #[test]
    fn dicke_witness_alpha() {
        let psi = dicke(3, &[2, 1]).unwrap();
        let geo = crate::geometric::symmetric_restricted_measure(&psi, &opts()).unwrap();
        let w = build_wg(&psi.density(), &geo, "dicke(3,(2,1))").unwrap();
        assert!((w.alpha - 4.0 / 9.0).abs() < 1e-8);
    }
}
