//! Chaos and Trotter-error diagnostics: simulation accuracy, eigenphase
//! spacing ratio, and participation ratio of the Floquet operator.

use ndarray_linalg::{Eig, Norm};

use crate::error::Error;
use crate::kicked_top::TrotterStep;
use crate::spin::{eigh_hermitian, expectation, hermiticity_defect, normalize, CMat, CVec, c64};
use crate::Result;

/// Gaps closer than this are treated as exact degeneracies.
const DEGENERACY_TOL: f64 = 1e-12;

/// Eigenphases and eigenvectors of a Floquet unitary,
/// `U |phi_n> = e^{i theta_n} |phi_n>` with phases sorted in `(-pi, pi]`.
#[derive(Debug, Clone)]
pub struct EigenphaseSpectrum {
    pub phases: Vec<f64>,
    /// Eigenvectors as columns, ordered like `phases`.
    pub vectors: CMat,
}

/// Diagonalize the Floquet unitary.
///
/// Eigenvector phases are fixed by making the largest-magnitude component
/// real positive; all diagnostics are invariant under this choice, it only
/// pins serialized output.
pub fn eigenphases(step: &TrotterStep) -> Result<EigenphaseSpectrum> {
    let (vals, vecs) = step.u.eig()?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    let phases_raw: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
    order.sort_by(|&a, &b| phases_raw[a].total_cmp(&phases_raw[b]));

    let d = vals.len();
    let mut phases = Vec::with_capacity(d);
    let mut vectors = CMat::zeros((d, d));
    for (slot, &idx) in order.iter().enumerate() {
        phases.push(phases_raw[idx]);
        let mut col = vecs.column(idx).to_owned();
        let peak = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let ph = col[peak] / c64::new(col[peak].norm().max(f64::MIN_POSITIVE), 0.0);
        col.map_inplace(|z| *z /= ph);
        normalize(&mut col);
        vectors.column_mut(slot).assign(&col);
    }
    Ok(EigenphaseSpectrum { phases, vectors })
}

/// Mean adjacent phase spacing ratio `r` on the circle.
///
/// Gaps are taken between sorted phases including the wrap-around gap, so a
/// spectrum of `D` distinct phases yields `D` gaps and `D` ratios
/// `min(d_n, d_{n+1}) / max(d_n, d_{n+1})`. Exact degeneracies (gaps below
/// 1e-12) are merged first.
pub fn spacing_ratio(spectrum: &EigenphaseSpectrum) -> Result<f64> {
    spacing_ratio_of_phases(&spectrum.phases)
}

/// [`spacing_ratio`] on a raw sorted-or-not phase list; used to calibrate the
/// diagnostic against sampled ensembles.
pub fn spacing_ratio_of_phases(phases: &[f64]) -> Result<f64> {
    if phases.len() < 3 {
        return Err(Error::TooFewPhases(phases.len()));
    }
    let mut sorted = phases.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut gaps: Vec<f64> = Vec::with_capacity(n);
    for w in sorted.windows(2) {
        gaps.push(w[1] - w[0]);
    }
    gaps.push(sorted[0] + 2.0 * std::f64::consts::PI - sorted[n - 1]);
    gaps.retain(|&g| g > DEGENERACY_TOL);
    if gaps.len() < 3 {
        return Err(Error::TooFewPhases(gaps.len()));
    }
    let k = gaps.len();
    let mut sum = 0.0;
    for i in 0..k {
        let (a, b) = (gaps[i], gaps[(i + 1) % k]);
        sum += a.min(b) / a.max(b);
    }
    Ok(sum / k as f64)
}

/// Participation ratio of the Floquet eigenvectors in the eigenbasis of the
/// target Hamiltonian, `PR = (sum_{n,m} |<psi_n|phi_m>|^4)^{-1}`.
pub fn participation_ratio(spectrum: &EigenphaseSpectrum, h_target: &CMat) -> Result<f64> {
    let defect = hermiticity_defect(h_target);
    if defect > crate::spin::HERMITICITY_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let (_, psi) = eigh_hermitian(h_target)?;
    participation_ratio_in_basis(spectrum, &psi)
}

/// [`participation_ratio`] against a precomputed orthonormal basis (columns).
pub fn participation_ratio_in_basis(spectrum: &EigenphaseSpectrum, basis: &CMat) -> Result<f64> {
    if basis.nrows() != spectrum.vectors.nrows() {
        return Err(Error::DimensionMismatch {
            expected: spectrum.vectors.nrows(),
            got: basis.nrows(),
        });
    }
    let overlap = basis.t().mapv(|z| z.conj()).dot(&spectrum.vectors);
    // summing in sorted order makes the result bit-identical under any
    // permutation of either basis
    let mut terms: Vec<f64> = overlap.iter().map(|z| z.norm_sqr().powi(2)).collect();
    terms.sort_by(f64::total_cmp);
    Ok(1.0 / terms.iter().sum::<f64>())
}

/// Simulation-accuracy trace `Q_E(n tau)` for `n = 1..n_t` and its running
/// temporal average.
#[derive(Debug, Clone)]
pub struct AccuracyTrace {
    pub tau: f64,
    pub q_values: Vec<f64>,
    pub running_mean: Vec<f64>,
}

impl AccuracyTrace {
    /// Temporal average over the whole trace, `Qbar_E(n_t tau)`.
    pub fn long_time_mean(&self) -> f64 {
        self.running_mean.last().copied().unwrap_or(0.0)
    }
}

/// Stroboscopic energy drift normalized between initial and
/// infinite-temperature energy:
/// `Q_E(n tau) = (E_tau(n tau) - E_0) / (E_inf - E_0)` with
/// `E_inf = tr(H)/D`.
pub fn simulation_accuracy(
    step: &TrotterStep,
    h_target: &CMat,
    psi0: &CVec,
    n_t: usize,
) -> Result<AccuracyTrace> {
    let d = step.dim();
    if h_target.nrows() != d || psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: psi0.len() });
    }
    let e_inf = h_target.diag().iter().map(|z| z.re).sum::<f64>() / d as f64;
    let e_0 = expectation(h_target, psi0).re;
    let h_scale = h_target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let denom = e_inf - e_0;
    if denom.abs() < 1e-9 * h_scale {
        return Err(Error::DegenerateNormalization(denom.abs()));
    }

    let mut psi = psi0.clone();
    let mut q_values = Vec::with_capacity(n_t);
    let mut running_mean = Vec::with_capacity(n_t);
    let mut acc = 0.0;
    for n in 1..=n_t {
        psi = step.u.dot(&psi);
        if n % 100 == 0 {
            normalize(&mut psi);
        }
        let e = expectation(h_target, &psi).re / psi.norm_l2().powi(2);
        let q = (e - e_0) / denom;
        acc += q;
        q_values.push(q);
        running_mean.push(acc / n as f64);
    }
    Ok(AccuracyTrace { tau: step.tau, q_values, running_mean })
}
