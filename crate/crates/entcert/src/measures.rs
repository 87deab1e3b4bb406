//! Relative entropy, robustness bounds from twirl candidates, and the
//! combined report tying the geometric measure, relative-entropy upper
//! bound, and logarithmic-robustness upper bound together.
//!
//! Upper bounds are never presented as exact values: the report separates
//! "upper bound" from "certified value", and only a PSD residual certificate
//! promotes the bounds to equalities.

use serde::Serialize;

use crate::error::{EntcertError, Result};
use crate::geometric::{
    antisym_closed_form, dicke_closed_form, geometric_g_mixed, geometric_measure_pure,
    symmetric_restricted_measure, GeoOptions, GeoResult,
};
use crate::linalg::{matrix_log2_on_support, psd_check, von_neumann_entropy, ComplexMatrix, C64};
use crate::states::{antisymmetric_basis, dicke, DensityOp, TargetState};
use crate::symmetry::{certify_equality, EqualityCertificate, TwirlChannel, RESIDUAL_PSD_TOL};

/// Support threshold used for kernel detection in relative entropy and
/// robustness support checks.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;
/// Agreement tolerance for the certified equalities.
pub const CHAIN_TOL: f64 = 1e-7;

// ---------------------------------------------------------------------------
// relative entropy
// ---------------------------------------------------------------------------

/// S(rho||sigma) = -S(rho) - tr(rho log2 sigma) in bits. Signals
/// `InfiniteRelativeEntropy` when supp(rho) leaks outside supp(sigma).
pub fn relative_entropy(rho: &DensityOp, sigma: &DensityOp) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(EntcertError::invalid("relative_entropy: dimension mismatch"));
    }
    for (name, op) in [("rho", rho), ("sigma", sigma)] {
        if (op.trace() - 1.0).abs() > 1e-8 {
            return Err(EntcertError::invalid(format!(
                "relative_entropy: {name} has trace {}",
                op.trace()
            )));
        }
    }
    let sigma_spec = crate::linalg::hermitian_eig(sigma.matrix())?;
    // weight of rho on the kernel of sigma
    let mut leak = 0.0;
    for (k, &lam) in sigma_spec.eigenvalues.iter().enumerate() {
        if lam <= SUPPORT_THRESHOLD {
            let v = sigma_spec.eigenvector(k);
            let rv = rho.matrix().apply(&v);
            leak += crate::linalg::vec_inner(&v, &rv).re;
        }
    }
    if leak > SUPPORT_THRESHOLD {
        return Err(EntcertError::InfiniteRelativeEntropy { leak });
    }
    let s_rho = von_neumann_entropy(rho.matrix())?;
    let log_sigma = matrix_log2_on_support(sigma.matrix(), SUPPORT_THRESHOLD)?;
    let cross = rho.matrix().matmul(&log_sigma).trace().re;
    Ok(-s_rho - cross)
}

// ---------------------------------------------------------------------------
// robustness from a candidate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RobustnessBound {
    /// Largest lambda in [0,1] with omega - lambda rho >= -tol.
    pub lambda: f64,
    /// t = 1/lambda - 1; an upper bound on the global robustness whenever
    /// omega is separable.
    pub t: f64,
}

impl RobustnessBound {
    pub fn log_robustness_bits(&self) -> f64 {
        (1.0 + self.t).log2()
    }
}

/// Bisection on PSD feasibility of omega - lambda rho (robust even when
/// omega is singular, which twirled candidates typically are). `rho` must be
/// trace-one; returns `NoFiniteBound` when rho has support outside omega.
pub fn robustness_upper_from_candidate(
    rho: &DensityOp,
    omega: &DensityOp,
    tol: f64,
) -> Result<RobustnessBound> {
    if rho.dims() != omega.dims() {
        return Err(EntcertError::invalid("robustness_upper: dimension mismatch"));
    }
    if (rho.trace() - 1.0).abs() > 1e-8 || (omega.trace() - 1.0).abs() > 1e-8 {
        return Err(EntcertError::invalid("robustness_upper: operators must be trace-one"));
    }
    // support check: bisection alone cannot distinguish lambda -> 0+
    let omega_spec = crate::linalg::hermitian_eig(omega.matrix())?;
    let mut leak = 0.0;
    for (k, &lam) in omega_spec.eigenvalues.iter().enumerate() {
        if lam <= SUPPORT_THRESHOLD {
            let v = omega_spec.eigenvector(k);
            let rv = rho.matrix().apply(&v);
            leak += crate::linalg::vec_inner(&v, &rv).re;
        }
    }
    if leak > SUPPORT_THRESHOLD {
        return Err(EntcertError::NoFiniteBound);
    }

    let feasible = |lambda: f64| -> Result<bool> {
        let m = omega
            .matrix()
            .sub(&rho.matrix().scale(C64::new(lambda, 0.0)));
        Ok(psd_check(&m, tol)?.0)
    };
    if feasible(1.0)? {
        return Ok(RobustnessBound { lambda: 1.0, t: 0.0 });
    }
    let mut lo = 0.0f64; // omega itself is PSD
    let mut hi = 1.0f64;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 1e-9 {
        return Err(EntcertError::NoFiniteBound);
    }
    Ok(RobustnessBound { lambda: lo, t: 1.0 / lo - 1.0 })
}

// ---------------------------------------------------------------------------
// the chain report
// ---------------------------------------------------------------------------

/// Bundled measure values for one state. For projection states every
/// `_bits` field refers to the entanglement part G - log2 tr P, which is the
/// quantity the equalities pin down.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureReport {
    pub state_id: String,
    /// Numerically optimized geometric measure (upper bound; exact when the
    /// optimizer found the global optimum).
    pub eg_bits: f64,
    /// S(rho || omega') for the twirled candidate; None when the relative
    /// entropy diverges. Always an upper bound on E_R.
    pub er_upper_bits: Option<f64>,
    /// log2(1 + t) from the robustness bisection against the candidate;
    /// None when no finite bound exists.
    pub lr_upper_bits: Option<f64>,
    /// Von Neumann entropy of the (normalized) state; 0 for pure states.
    pub entropy_bits: f64,
    /// er_upper >= eg - tol, the ordering every valid upper bound obeys.
    pub chain_ok: bool,
    /// True when the residual certificate holds and all three values agree
    /// within 1e-7.
    pub equality_certified: bool,
    pub candidate_id: String,
}

/// Report plus the artifacts it was computed from.
#[derive(Debug)]
pub struct ChainOutcome {
    pub report: MeasureReport,
    pub geo: GeoResult,
    /// Present unless the invariance precondition failed.
    pub certificate: Option<EqualityCertificate>,
    pub candidate: Option<DensityOp>,
}

/// Run the full pipeline: geometric optimization, twirl candidate,
/// residual certificate, relative-entropy and robustness upper bounds.
///
/// Permutation-symmetric pure inputs are optimized under the symmetric
/// restriction so the witness (and hence the candidate) is symmetric; this
/// is what makes the type-projection certificate effective.
pub fn measure_chain_report(
    target: &TargetState,
    channel: &TwirlChannel,
    opts: &GeoOptions,
    state_id: &str,
) -> Result<ChainOutcome> {
    let geo = match target {
        TargetState::Pure(psi) => {
            let d0 = psi.dims()[0];
            let uniform = psi.dims().iter().all(|&d| d == d0);
            let symmetric = uniform
                && psi.num_parties() > 1
                && psi.symmetric_deviation()? <= 1e-8;
            if symmetric {
                symmetric_restricted_measure(psi, opts)?
            } else {
                geometric_measure_pure(psi, opts)?
            }
        }
        TargetState::Projection(p) => geometric_g_mixed(&p.normalized()?, opts)?,
    };

    let normalized = target.normalized_density()?;
    let (_, tr_p) = target.projector();
    let eg_bits = geo.value_bits - tr_p.log2();
    let entropy_bits = match target {
        TargetState::Pure(_) => 0.0,
        TargetState::Projection(_) => von_neumann_entropy(normalized.matrix())?,
    };

    let certificate = match certify_equality(target, channel, &geo, RESIDUAL_PSD_TOL, state_id) {
        Ok(cert) => Some(cert),
        Err(EntcertError::NotInvariant { .. }) => None,
        Err(e) => return Err(e),
    };
    // the candidate is a valid separable operator for the bounds whether or
    // not the invariance certificate applies
    let candidate = match &certificate {
        Some(cert) => Some(cert.candidate.clone()),
        None => Some(channel.apply(&geo.witness.density()?)?),
    };
    let omega = candidate.as_ref().unwrap();

    // S(P/trP || omega') bounds E_R from above and is directly comparable
    // to eg_bits = G - log2 trP (the flat projector has S(rho) = log2 trP)
    let er_upper_bits = match relative_entropy(&normalized, omega) {
        Ok(v) => Some(v),
        Err(EntcertError::InfiniteRelativeEntropy { .. }) => None,
        Err(e) => return Err(e),
    };
    let lr_upper_bits = match robustness_upper_from_candidate(&normalized, omega, RESIDUAL_PSD_TOL)
    {
        Ok(bound) => Some(bound.log_robustness_bits()),
        Err(EntcertError::NoFiniteBound) => None,
        Err(e) => return Err(e),
    };

    let chain_ok = er_upper_bits.map_or(true, |er| er >= eg_bits - CHAIN_TOL);
    let certified_verdict = certificate.as_ref().map_or(false, |c| c.certified());
    let equality_certified = certified_verdict
        && er_upper_bits.map_or(false, |er| (er - eg_bits).abs() <= CHAIN_TOL)
        && lr_upper_bits.map_or(false, |lr| (lr - eg_bits).abs() <= CHAIN_TOL);

    let report = MeasureReport {
        state_id: state_id.to_string(),
        eg_bits,
        er_upper_bits,
        lr_upper_bits,
        entropy_bits,
        chain_ok,
        equality_certified,
        candidate_id: format!("twirl[{}]({state_id})", channel.kind_name()),
    };
    Ok(ChainOutcome { report, geo, certificate, candidate })
}

// ---------------------------------------------------------------------------
// closed-form table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub enum StateDescriptor {
    Dicke { n: usize, kvec: Vec<usize> },
    Antisym { n: usize, d: usize },
}

impl StateDescriptor {
    pub fn id(&self) -> String {
        match self {
            StateDescriptor::Dicke { n, kvec } => {
                let ks: Vec<String> = kvec.iter().map(|k| k.to_string()).collect();
                format!("dicke:{n},{}", ks.join("-"))
            }
            StateDescriptor::Antisym { n, d } => format!("antisym:{n},{d}"),
        }
    }

    pub fn closed_form_bits(&self) -> Result<f64> {
        match self {
            StateDescriptor::Dicke { n, kvec } => dicke_closed_form(*n, kvec),
            StateDescriptor::Antisym { n, .. } => Ok(antisym_closed_form(*n)),
        }
    }

    pub fn build(&self) -> Result<(TargetState, TwirlChannel)> {
        match self {
            StateDescriptor::Dicke { n, kvec } => {
                let psi = dicke(*n, kvec)?;
                let channel = TwirlChannel::type_projection(*n, kvec.len())?;
                Ok((TargetState::Pure(psi), channel))
            }
            StateDescriptor::Antisym { n, d } => {
                let psi = antisymmetric_basis(*n, *d)?;
                let channel = TwirlChannel::monomial(*n, *d)?;
                Ok((TargetState::Pure(psi), channel))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub id: String,
    pub closed_form_bits: f64,
    pub certified_bits: f64,
    pub certified: bool,
    /// True when |closed form - numeric| > 1e-6.
    pub mismatch: bool,
}

/// Closed-form values next to numerically certified values for symmetric and
/// antisymmetric basis states, flagging any disagreement beyond 1e-6.
pub fn table1_values(descriptors: &[StateDescriptor], opts: &GeoOptions) -> Result<Vec<Table1Row>> {
    descriptors
        .iter()
        .map(|desc| {
            let closed = desc.closed_form_bits()?;
            let (target, channel) = desc.build()?;
            let outcome = measure_chain_report(&target, &channel, opts, &desc.id())?;
            let numeric = outcome.report.eg_bits;
            Ok(Table1Row {
                id: desc.id(),
                closed_form_bits: closed,
                certified_bits: numeric,
                certified: outcome.report.equality_certified,
                mismatch: (closed - numeric).abs() > 1e-6,
            })
        })
        .collect()
}

/// E_g(antisymmetric basis) / E_g(dicke(n, (1,...,1))) from the closed
/// forms; grows monotonically in n.
pub fn antisym_to_symmetric_ratio(n: usize) -> Result<f64> {
    let antisym = antisym_closed_form(n);
    let sym = dicke_closed_form(n, &vec![1; n])?;
    if sym <= 0.0 {
        return Err(EntcertError::invalid("ratio undefined for n < 2"));
    }
    Ok(antisym / sym)
}

// ---------------------------------------------------------------------------
// serialization helpers
// ---------------------------------------------------------------------------

/// Format with 9 significant digits, fixed notation (diff-stable CSV cells).
pub fn fmt_sig9(value: f64) -> String {
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".to_string()
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    if value == 0.0 {
        return "0.00000000".to_string();
    }
    let mag = value.abs().log10().floor() as i32;
    let decimals = (8 - mag).clamp(0, 17) as usize;
    format!("{value:.decimals$}")
}

/// One CSV row per state: id, eg, er_upper, lr_upper, certified.
pub fn reports_to_csv(reports: &[MeasureReport]) -> String {
    let mut out = String::from("id,eg_bits,er_upper_bits,lr_upper_bits,certified\n");
    for r in reports {
        let er = r.er_upper_bits.map_or("inf".to_string(), fmt_sig9);
        let lr = r.lr_upper_bits.map_or("inf".to_string(), fmt_sig9);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.state_id,
            fmt_sig9(r.eg_bits),
            er,
            lr,
            r.equality_certified
        ));
    }
    out
}

pub fn table1_to_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("id,closed_form_bits,certified_bits,certified,mismatch\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.id,
            fmt_sig9(r.closed_form_bits),
            fmt_sig9(r.certified_bits),
            r.certified,
            r.mismatch
        ));
    }
    out
}
