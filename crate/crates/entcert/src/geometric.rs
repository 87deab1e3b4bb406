//! Geometric measure of entanglement.
//!
//! For a pure state the measure is -log2 of the maximal squared overlap with
//! a product state; for a mixed state the same with <Phi|rho|Phi>. Both are
//! computed by alternating rank-1 optimization: fixing every local vector but
//! one reduces the problem to a linear (pure case) or small Hermitian
//! eigenvalue (mixed case) update, and each update cannot decrease the
//! overlap. The optimization is restarted from Haar-random product states
//! plus one deterministic start aligned with the largest computational
//! amplitude, which catches basis-aligned optima.
//!
//! The values returned are upper bounds on the measure that are tight
//! whenever some restart reaches the global optimum; `converged` reports
//! whether the sweep stalled below the iteration cap.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EntcertError, Result};
use crate::linalg::{takagi, vec_inner, vec_norm, ComplexMatrix, C64, C_ZERO};
use crate::states::{DensityOp, ProductState, PureState};

/// Knobs for the alternating optimizer.
#[derive(Debug, Clone, Serialize)]
pub struct GeoOptions {
    /// Number of Haar-random restarts (a deterministic basis-aligned start
    /// is always added on top).
    pub restarts: usize,
    /// Sweep cap per restart.
    pub max_iters: usize,
    /// Convergence threshold on the overlap change per sweep.
    pub tol: f64,
    /// RNG seed; the whole computation is a pure function of (input, opts).
    pub seed: u64,
}

impl Default for GeoOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 500, tol: 1e-12, seed: 7 }
    }
}

impl GeoOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// Outcome of a geometric-measure optimization.
#[derive(Debug, Clone, Serialize)]
pub struct GeoResult {
    /// -log2(overlap); an upper bound on the measure.
    pub value_bits: f64,
    /// The product state achieving `overlap`.
    pub witness: ProductState,
    /// Squared overlap |<Phi|psi>|^2 (pure) or <Phi|rho|Phi> (mixed).
    pub overlap: f64,
    /// Sweeps used by the winning restart.
    pub iterations: usize,
    /// Total optimization runs (random restarts + deterministic start).
    pub restarts_used: usize,
    /// False if the winning restart hit the sweep cap before stalling.
    pub converged: bool,
}

struct RunOutcome {
    locals: Vec<Vec<C64>>,
    overlap: f64,
    sweeps: usize,
    converged: bool,
}

const MONOTONE_SLACK: f64 = 1e-12;

// ---------------------------------------------------------------------------
// random product states
// ---------------------------------------------------------------------------

pub(crate) fn haar_local(rng: &mut ChaCha12Rng, d: usize) -> Vec<C64> {
    let normal = StandardNormal;
    loop {
        let mut v: Vec<C64> = (0..d)
            .map(|_| C64::new(normal.sample(rng), normal.sample(rng)))
            .collect();
        if vec_norm(&v) > 1e-6 {
            let n = vec_norm(&v);
            for c in v.iter_mut() {
                *c /= n;
            }
            return v;
        }
    }
}

/// Haar-random product state on the given local dimensions.
pub fn haar_product_state(dims: &[usize], rng: &mut ChaCha12Rng) -> ProductState {
    let locals = dims.iter().map(|&d| haar_local(rng, d)).collect();
    ProductState::new(locals).expect("haar locals are unit norm")
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(restart as u64 + 1)))
}

// ---------------------------------------------------------------------------
// pure-state optimizer
// ---------------------------------------------------------------------------

/// v[a] = sum over indices s with s_party = a of psi_s prod_{j != party}
/// conj(locals[j][s_j]); the unnormalized optimal local vector for `party`.
fn contract_except(psi: &PureState, locals: &[Vec<C64>], party: usize) -> Vec<C64> {
    let dims = psi.dims();
    let n = dims.len();
    let mut v = vec![C_ZERO; dims[party]];
    let mut digits = vec![0usize; n];
    for (idx, amp) in psi.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let mut rem = idx;
        for i in (0..n).rev() {
            digits[i] = rem % dims[i];
            rem /= dims[i];
        }
        let mut w = *amp;
        for j in 0..n {
            if j != party {
                w *= locals[j][digits[j]].conj();
            }
        }
        v[digits[party]] += w;
    }
    v
}

fn product_overlap_pure(psi: &PureState, locals: &[Vec<C64>]) -> C64 {
    let dims = psi.dims();
    let n = dims.len();
    let mut acc = C_ZERO;
    for (idx, amp) in psi.amplitudes().iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let mut rem = idx;
        let mut w = *amp;
        for i in (0..n).rev() {
            let digit = rem % dims[i];
            rem /= dims[i];
            w *= locals[i][digit].conj();
        }
        acc += w;
    }
    acc
}

fn run_pure_from(psi: &PureState, mut locals: Vec<Vec<C64>>, max_iters: usize, tol: f64) -> RunOutcome {
    let n = psi.num_parties();
    let mut overlap = product_overlap_pure(psi, &locals).norm_sqr();
    let mut converged = false;
    let mut sweeps = 0;
    for _ in 0..max_iters {
        sweeps += 1;
        let sweep_start = overlap;
        for party in 0..n {
            let mut v = contract_except(psi, &locals, party);
            let nv2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            // each single-party update is exact, so the overlap cannot drop
            assert!(
                nv2 >= overlap - MONOTONE_SLACK,
                "monotone ascent violated: {nv2} < {overlap}"
            );
            if nv2 > 0.0 {
                let nv = nv2.sqrt();
                for c in v.iter_mut() {
                    *c /= nv;
                }
                locals[party] = v;
                overlap = nv2;
            }
        }
        if overlap - sweep_start < tol {
            converged = true;
            break;
        }
    }
    RunOutcome { locals, overlap, sweeps, converged }
}

fn basis_start_pure(psi: &PureState) -> Vec<Vec<C64>> {
    let dims = psi.dims();
    let best = psi
        .amplitudes()
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let digits = crate::linalg::index_to_digits(best, dims);
    dims.iter()
        .zip(&digits)
        .map(|(&d, &s)| {
            let mut v = vec![C_ZERO; d];
            v[s] = C64::new(1.0, 0.0);
            v
        })
        .collect()
}

fn finish(psi_check: impl Fn(&ProductState) -> f64, runs: Vec<RunOutcome>) -> Result<GeoResult> {
    let restarts_used = runs.len();
    let best = runs
        .into_iter()
        .reduce(|acc, r| if r.overlap > acc.overlap { r } else { acc })
        .ok_or_else(|| EntcertError::InternalError("no optimization runs".into()))?;
    let witness = ProductState::new(best.locals)?;
    let recomputed = psi_check(&witness);
    if (recomputed - best.overlap).abs() > 1e-10 {
        return Err(EntcertError::InternalError(format!(
            "witness overlap check failed: {} vs {}",
            recomputed, best.overlap
        )));
    }
    Ok(GeoResult {
        value_bits: -best.overlap.log2(),
        witness,
        overlap: best.overlap,
        iterations: best.sweeps,
        restarts_used,
        converged: best.converged,
    })
}

/// E_g of a pure state by alternating optimization with restarts.
pub fn geometric_measure_pure(psi: &PureState, opts: &GeoOptions) -> Result<GeoResult> {
    if opts.restarts == 0 || opts.tol <= 0.0 {
        return Err(EntcertError::invalid("GeoOptions: restarts >= 1 and tol > 0 required"));
    }
    let dims = psi.dims().to_vec();
    let runs: Vec<RunOutcome> = (0..=opts.restarts)
        .into_par_iter()
        .map(|ridx| {
            let init = if ridx == 0 {
                basis_start_pure(psi)
            } else {
                let mut rng = restart_rng(opts.seed, ridx);
                dims.iter().map(|&d| haar_local(&mut rng, d)).collect()
            };
            run_pure_from(psi, init, opts.max_iters, opts.tol)
        })
        .collect();
    finish(
        |w| product_overlap_pure(psi, &w.locals().to_vec()).norm_sqr(),
        runs,
    )
}

/// Single warm-started run of the pure-state optimizer (no restarts).
pub fn refine_overlap_pure(psi: &PureState, init: &ProductState, opts: &GeoOptions) -> Result<GeoResult> {
    if init.dims() != psi.dims() {
        return Err(EntcertError::invalid("refine_overlap_pure: dimension mismatch"));
    }
    let run = run_pure_from(psi, init.locals().to_vec(), opts.max_iters, opts.tol);
    finish(
        |w| product_overlap_pure(psi, &w.locals().to_vec()).norm_sqr(),
        vec![run],
    )
}

// ---------------------------------------------------------------------------
// mixed-state optimizer
// ---------------------------------------------------------------------------

/// The conditioned operator M[a][b] = <Phi with slot `party` = a| rho
/// |Phi with slot `party` = b>, Hermitian PSD on party `party`.
fn conditioned_operator(rho: &DensityOp, locals: &[Vec<C64>], party: usize) -> ComplexMatrix {
    let dims = rho.dims();
    let n = dims.len();
    let dim = rho.total_dim();
    let d = dims[party];
    // w_s = prod_{j != party} locals[j][s_j], and the digit of s at `party`
    let mut w = vec![C_ZERO; dim];
    let mut digit = vec![0usize; dim];
    for s in 0..dim {
        let mut rem = s;
        let mut acc = C64::new(1.0, 0.0);
        for j in (0..n).rev() {
            let dj = rem % dims[j];
            rem /= dims[j];
            if j == party {
                digit[s] = dj;
            } else {
                acc *= locals[j][dj];
            }
        }
        w[s] = acc;
    }
    let mat = rho.matrix();
    let mut m = ComplexMatrix::zeros(d, d);
    for t in 0..dim {
        let wt = w[t].conj();
        if wt.norm_sqr() == 0.0 {
            continue;
        }
        for s in 0..dim {
            let val = mat.get(t, s) * w[s];
            if val.norm_sqr() == 0.0 {
                continue;
            }
            m.add_assign_at(digit[t], digit[s], wt * val);
        }
    }
    // Hermitize away rounding noise
    m.add(&m.adjoint()).scale(C64::new(0.5, 0.0))
}

fn run_mixed_from(rho: &DensityOp, mut locals: Vec<Vec<C64>>, max_iters: usize, tol: f64) -> Result<RunOutcome> {
    let n = rho.dims().len();
    let mut overlap = {
        let p = ProductState::new(locals.clone())?;
        rho.product_overlap(&p)?
    };
    let mut converged = false;
    let mut sweeps = 0;
    for _ in 0..max_iters {
        sweeps += 1;
        let sweep_start = overlap;
        for party in 0..n {
            let m = conditioned_operator(rho, &locals, party);
            let spectrum = crate::linalg::hermitian_eig(&m)?;
            let top = spectrum.eigenvalues[0];
            assert!(
                top >= overlap - MONOTONE_SLACK,
                "monotone ascent violated: {top} < {overlap}"
            );
            locals[party] = spectrum.eigenvector(0);
            overlap = top;
        }
        if overlap - sweep_start < tol {
            converged = true;
            break;
        }
    }
    Ok(RunOutcome { locals, overlap, sweeps, converged })
}

fn basis_start_mixed(rho: &DensityOp) -> Vec<Vec<C64>> {
    let dims = rho.dims();
    let dim = rho.total_dim();
    let best = (0..dim)
        .max_by(|&a, &b| {
            rho.matrix()
                .get(a, a)
                .re
                .partial_cmp(&rho.matrix().get(b, b).re)
                .unwrap()
        })
        .unwrap_or(0);
    let digits = crate::linalg::index_to_digits(best, dims);
    dims.iter()
        .zip(&digits)
        .map(|(&d, &s)| {
            let mut v = vec![C_ZERO; d];
            v[s] = C64::new(1.0, 0.0);
            v
        })
        .collect()
}

/// G(rho) = -log2 max_Phi <Phi|rho|Phi> for a trace-one PSD operator.
pub fn geometric_g_mixed(rho: &DensityOp, opts: &GeoOptions) -> Result<GeoResult> {
    if opts.restarts == 0 || opts.tol <= 0.0 {
        return Err(EntcertError::invalid("GeoOptions: restarts >= 1 and tol > 0 required"));
    }
    if (rho.trace() - 1.0).abs() > 1e-8 {
        return Err(EntcertError::invalid(format!(
            "geometric_g_mixed: trace {} is not 1 (normalize first)",
            rho.trace()
        )));
    }
    let dims = rho.dims().to_vec();
    let runs: Vec<RunOutcome> = (0..=opts.restarts)
        .into_par_iter()
        .map(|ridx| {
            let init = if ridx == 0 {
                basis_start_mixed(rho)
            } else {
                let mut rng = restart_rng(opts.seed, ridx);
                dims.iter().map(|&d| haar_local(&mut rng, d)).collect()
            };
            run_mixed_from(rho, init, opts.max_iters, opts.tol)
        })
        .collect::<Result<_>>()?;
    finish(
        |w| rho.product_overlap(w).expect("dims checked"),
        runs,
    )
}

/// Single warm-started run of the mixed-state optimizer (no restarts).
pub fn refine_overlap_mixed(rho: &DensityOp, init: &ProductState, opts: &GeoOptions) -> Result<GeoResult> {
    if init.dims() != rho.dims() {
        return Err(EntcertError::invalid("refine_overlap_mixed: dimension mismatch"));
    }
    let run = run_mixed_from(rho, init.locals().to_vec(), opts.max_iters, opts.tol)?;
    finish(
        |w| rho.product_overlap(w).expect("dims checked"),
        vec![run],
    )
}

// ---------------------------------------------------------------------------
// symmetric restriction
// ---------------------------------------------------------------------------

fn contract_sym(psi: &PureState, phi: &[C64]) -> Vec<C64> {
    let locals: Vec<Vec<C64>> = (0..psi.num_parties()).map(|_| phi.to_vec()).collect();
    contract_except(psi, &locals, 0)
}

fn sym_overlap(psi: &PureState, phi: &[C64]) -> C64 {
    let v = contract_sym(psi, phi);
    vec_inner(phi, &v)
}

/// E_g of a permutation-symmetric pure state, optimizing over a single local
/// vector phi with Phi = phi tensor n. The witness always has all locals
/// equal. For two parties the optimum is read off a Takagi factorization of
/// the amplitude matrix; for more parties a shift-safeguarded fixed-point
/// iteration keeps the overlap nondecreasing.
pub fn symmetric_restricted_measure(psi: &PureState, opts: &GeoOptions) -> Result<GeoResult> {
    let dims = psi.dims();
    let d = dims[0];
    if dims.iter().any(|&x| x != d) {
        return Err(EntcertError::invalid(
            "symmetric_restricted_measure: local dimensions differ",
        ));
    }
    let deviation = psi.symmetric_deviation()?;
    if deviation > 1e-8 {
        return Err(EntcertError::invalid(format!(
            "symmetric_restricted_measure: state is not symmetric (deviation {deviation:.3e})"
        )));
    }
    let n = psi.num_parties();

    if n == 1 {
        let witness = ProductState::new(vec![psi.amplitudes().to_vec()])?;
        return Ok(GeoResult {
            value_bits: 0.0,
            witness,
            overlap: 1.0,
            iterations: 0,
            restarts_used: 1,
            converged: true,
        });
    }

    if n == 2 {
        // the amplitude matrix of a symmetric bipartite state is complex
        // symmetric; its top Takagi vector gives the closest product state
        let m = ComplexMatrix::from_row_slice(d, d, psi.amplitudes());
        let (u, sigma) = takagi(&m)?;
        let phi: Vec<C64> = (0..d).map(|i| u.get(i, 0)).collect();
        let overlap = sym_overlap(psi, &phi);
        let witness = ProductState::new(vec![phi.clone(), phi])?;
        debug_assert!((overlap.re - sigma[0]).abs() < 1e-9);
        return Ok(GeoResult {
            value_bits: -(sigma[0] * sigma[0]).log2(),
            witness,
            overlap: sigma[0] * sigma[0],
            iterations: 1,
            restarts_used: 1,
            converged: true,
        });
    }

    let runs: Vec<RunOutcome> = (0..=opts.restarts)
        .into_par_iter()
        .map(|ridx| {
            let phi0 = if ridx == 0 {
                basis_start_pure(psi)[0].clone()
            } else {
                let mut rng = restart_rng(opts.seed, ridx);
                haar_local(&mut rng, d)
            };
            run_symmetric_from(psi, phi0, opts.max_iters, opts.tol)
        })
        .collect();
    let mut result = finish(
        |w| product_overlap_pure(psi, &w.locals().to_vec()).norm_sqr(),
        runs,
    )?;
    result.restarts_used = opts.restarts + 1;
    Ok(result)
}

fn run_symmetric_from(psi: &PureState, mut phi: Vec<C64>, max_iters: usize, tol: f64) -> RunOutcome {
    let n = psi.num_parties();
    let mut merit = sym_overlap(psi, &phi).norm();
    let mut converged = false;
    let mut sweeps = 0;
    for _ in 0..max_iters {
        sweeps += 1;
        let start = merit;
        let v = contract_sym(psi, &phi);
        let nv = vec_norm(&v);
        if nv < 1e-300 {
            break;
        }
        // The tied update phi <- v/|v| can cycle with constant merit (unlike
        // the untied alternating case), e.g. by swapping two levels of an
        // even-order symmetric state. Mixing the update with the current
        // iterate breaks such cycles, so evaluate a ladder of mixes
        // (v + alpha*phi) and take the best.
        let c = vec_inner(&phi, &v);
        let aligned: Vec<C64> = if c.norm() > 0.0 {
            let ph = c / c.norm();
            phi.iter().map(|x| x * ph).collect()
        } else {
            phi.clone()
        };
        let mut best_cand: Option<(f64, Vec<C64>)> = None;
        let mut alpha = 0.0;
        for step in 0..16 {
            let mut cand: Vec<C64> = v
                .iter()
                .zip(&aligned)
                .map(|(a, b)| a + b * C64::new(alpha, 0.0))
                .collect();
            let cn = vec_norm(&cand);
            if cn > 0.0 {
                for x in cand.iter_mut() {
                    *x /= cn;
                }
                let cand_merit = sym_overlap(psi, &cand).norm();
                if best_cand.as_ref().map_or(true, |(m, _)| cand_merit > *m) {
                    best_cand = Some((cand_merit, cand));
                }
            }
            alpha = if step == 0 { nv / 16.0 } else { alpha * 4.0 };
        }
        match best_cand {
            Some((cand_merit, cand)) if cand_merit > merit + 1e-16 => {
                phi = cand;
                merit = cand_merit;
            }
            _ => {
                converged = true;
                break;
            }
        }
        if merit - start < tol {
            converged = true;
            break;
        }
    }
    // rotate the global phase so <Phi|psi> is real nonnegative
    let g = sym_overlap(psi, &phi);
    if g.norm() > 0.0 {
        let theta = g.arg() / n as f64;
        let rot = C64::from_polar(1.0, -theta);
        for x in phi.iter_mut() {
            *x *= rot;
        }
    }
    let overlap = sym_overlap(psi, &phi).norm_sqr();
    RunOutcome {
        locals: vec![phi; n],
        overlap,
        sweeps,
        converged,
    }
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

fn log2_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).log2()).sum()
}

/// Closed-form E_g of dicke(n, kvec):
/// n log2 n - log2 n! - sum_j (k_j log2 k_j - log2 k_j!), with 0 log 0 = 0.
pub fn dicke_closed_form(n: usize, kvec: &[usize]) -> Result<f64> {
    if n == 0 || kvec.is_empty() {
        return Err(EntcertError::invalid("dicke_closed_form: zero size"));
    }
    let total: usize = kvec.iter().sum();
    if total != n {
        return Err(EntcertError::invalid(format!(
            "dicke_closed_form: occupations sum to {total}, expected {n}"
        )));
    }
    let mut value = n as f64 * (n as f64).log2() - log2_factorial(n);
    for &k in kvec {
        if k > 0 {
            value -= k as f64 * (k as f64).log2() - log2_factorial(k);
        }
    }
    Ok(value.max(0.0))
}

/// Closed-form E_g of the antisymmetric basis state: log2(n!).
pub fn antisym_closed_form(n: usize) -> f64 {
    log2_factorial(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        antisymmetric_basis, antisymmetric_projector, dicke, symmetric_projector, StabilizerGroup,
    };

    fn opts() -> GeoOptions {
        GeoOptions { restarts: 16, ..GeoOptions::default() }
    }

    #[test]
    fn pure_product_state_measures_zero() {
        let p = ProductState::basis(&[2, 2, 2], &[0, 0, 0]).unwrap();
        let psi = p.to_pure().unwrap();
        let r = geometric_measure_pure(&psi, &opts()).unwrap();
        assert!(r.value_bits.abs() < 1e-10);
        assert!((r.overlap - 1.0).abs() < 1e-10);
        let witness_overlap = psi.inner(&r.witness.to_pure().unwrap()).norm_sqr();
        assert!((witness_overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_dicke_3_21() {
        let psi = dicke(3, &[2, 1]).unwrap();
        let r = geometric_measure_pure(&psi, &opts()).unwrap();
        let want = (9.0f64 / 4.0).log2();
        assert!((r.value_bits - want).abs() < 1e-8, "{} vs {want}", r.value_bits);
        assert!((want - 1.1699250014423124).abs() < 1e-12);
    }

    #[test]
    fn pure_antisymmetric_singlet() {
        let psi = antisymmetric_basis(2, 2).unwrap();
        let r = geometric_measure_pure(&psi, &opts()).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-8);
    }

    #[test]
    fn pure_ghz3_against_grid_oracle() {
        let psi = StabilizerGroup::ghz(3).unwrap().stabilizer_state().unwrap();
        // GHZ is permutation symmetric, so a Bloch grid over a single local
        // vector bounds the true optimum from below
        let mut grid_best: f64 = 0.0;
        let steps = 157;
        for it in 0..=steps {
            let theta = std::f64::consts::PI * it as f64 / steps as f64;
            for ip in 0..steps {
                let phase = 2.0 * std::f64::consts::PI * ip as f64 / steps as f64;
                let a = (theta / 2.0).cos();
                let b = (theta / 2.0).sin();
                // overlap with (a|0> + b e^{i phase}|1>)^(x3)
                let c0 = a.powi(3);
                let c1 = b.powi(3);
                let ov = (c0 * c0 + c1 * c1 + 2.0 * c0 * c1 * (3.0 * phase).cos()) / 2.0;
                grid_best = grid_best.max(ov);
            }
        }
        let r = geometric_measure_pure(&psi, &opts()).unwrap();
        assert!(r.overlap >= grid_best - 1e-3);
        assert!((r.overlap - 0.5).abs() < 1e-9);
        assert!((r.value_bits - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mixed_maximally_mixed() {
        let dim = 4;
        let rho = DensityOp::new(
            vec![2, 2],
            ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        )
        .unwrap();
        let r = geometric_g_mixed(&rho, &opts()).unwrap();
        assert!((r.value_bits - 2.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_symmetric_projector() {
        let p = symmetric_projector(2, 2).unwrap().normalized().unwrap();
        let r = geometric_g_mixed(&p, &opts()).unwrap();
        assert!((r.value_bits - 3.0f64.log2()).abs() < 1e-8);
    }

    #[test]
    fn mixed_antisymmetric_projector() {
        let p = antisymmetric_projector(2, 2).unwrap().normalized().unwrap();
        let r = geometric_g_mixed(&p, &opts()).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-8);
    }

    #[test]
    fn mixed_rejects_unnormalized() {
        let p = symmetric_projector(2, 2).unwrap();
        assert!(geometric_g_mixed(&p, &opts()).is_err());
    }

    #[test]
    fn symmetric_restricted_dicke_4_22() {
        let psi = dicke(4, &[2, 2]).unwrap();
        let r = symmetric_restricted_measure(&psi, &opts()).unwrap();
        let want = (8.0f64 / 3.0).log2();
        assert!((r.value_bits - want).abs() < 1e-8, "{} vs {}", r.value_bits, want);
        assert!((want - 1.4150374992788437).abs() < 1e-12);
        // witness locals all equal
        let w = r.witness.locals();
        for local in w.iter().skip(1) {
            let ov = vec_inner(&w[0], local).norm();
            assert!((ov - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_restricted_trivial_and_111() {
        let psi = dicke(4, &[4, 0]).unwrap();
        let r = symmetric_restricted_measure(&psi, &opts()).unwrap();
        assert!(r.value_bits.abs() < 1e-9);

        let psi = dicke(3, &[1, 1, 1]).unwrap();
        let r = symmetric_restricted_measure(&psi, &opts()).unwrap();
        assert!((r.value_bits - (27.0f64 / 6.0).log2()).abs() < 1e-8);
        assert!(((27.0f64 / 6.0).log2() - 2.1699250014423124).abs() < 1e-12);
    }

    #[test]
    fn symmetric_restricted_takagi_path_matches_full() {
        let psi = dicke(2, &[1, 1]).unwrap();
        let sym = symmetric_restricted_measure(&psi, &opts()).unwrap();
        let full = geometric_measure_pure(&psi, &opts()).unwrap();
        assert!((sym.value_bits - 1.0).abs() < 1e-10);
        assert!((sym.value_bits - full.value_bits).abs() < 1e-8);
    }

    #[test]
    fn symmetric_restricted_rejects_nonsymmetric() {
        let psi = antisymmetric_basis(2, 2).unwrap();
        assert!(symmetric_restricted_measure(&psi, &opts()).is_err());
    }

    #[test]
    fn closed_forms() {
        assert!((dicke_closed_form(3, &[2, 1]).unwrap() - 1.1699250014423124).abs() < 1e-12);
        assert!((dicke_closed_form(3, &[2, 1]).unwrap() + (4.0f64 / 9.0).log2()).abs() < 1e-12);
        assert!(dicke_closed_form(5, &[5, 0]).unwrap().abs() < 1e-12);
        assert!((dicke_closed_form(2, &[1, 1]).unwrap() - 1.0).abs() < 1e-12);
        assert!(dicke_closed_form(3, &[1, 1]).is_err());

        assert!(antisym_closed_form(1).abs() < 1e-12);
        assert!((antisym_closed_form(2) - 1.0).abs() < 1e-12);
        assert!((antisym_closed_form(3) - 6.0f64.log2()).abs() < 1e-12);
        assert!((6.0f64.log2() - 2.584962500721156).abs() < 1e-12);
    }

    #[test]
    fn bipartite_schmidt_oracle_spot_check() {
        // oracle: largest Schmidt coefficient from an SVD of the amplitude
        // matrix, independent of the alternating optimizer
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        for _ in 0..10 {
            let amps: Vec<C64> = {
                let mut v: Vec<C64> = (0..6)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        C64::new(re, im)
                    })
                    .collect();
                let n = vec_norm(&v);
                v.iter_mut().for_each(|c| *c /= n);
                v
            };
            let psi = PureState::new(vec![2, 3], amps.clone()).unwrap();
            let m = ComplexMatrix::from_row_slice(2, 3, &amps);
            let svd = nalgebra::linalg::SVD::new(m.to_nalgebra(), false, false);
            let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            let r = geometric_measure_pure(&psi, &opts()).unwrap();
            assert!((r.value_bits + (smax * smax).log2()).abs() < 1e-8);
        }
    }
}
