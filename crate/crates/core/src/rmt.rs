//! Random-matrix reference values for the learning residual.
//!
//! When the Trotter cycle scrambles like a Haar-random unitary, the expected
//! squared constraint entries have a closed Weingarten form. Averaging that
//! form over the coherent-state ensemble of initial states gives a matrix
//! `Q` whose lowest eigenvalue predicts the plateau of `lambda_1/sqrt(N_con)`.
//! The module provides that prediction three ways: hard-coded closed forms
//! for the zeroth-order ansatz, spherical quadrature for any ansatz, and
//! Monte-Carlo sampling of Haar unitaries as an independent check.

use gauss_quad::GaussLegendre;
use ndarray::Array2;
use ndarray_linalg::{EighInto, QRSquare, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::Error;
use crate::learning::{constraint_matrix_with_unitary, derive_seed, reconstruct};
use crate::magnus::AnsatzSet;
use crate::spin::{
    adjoint, build_spin_operators, expectation, hs_inner, CMat, CoherentFactory, OpLabel,
    SpinSize, c64,
};
use crate::Result;

/// How a `Q` matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QSource {
    /// Hard-coded closed forms for the zeroth-order ansatz.
    AnalyticA0,
    /// Coherent-state ensemble average by spherical quadrature.
    QuadratureIse,
    /// Empirical average over sampled Haar unitaries and states.
    MonteCarlo,
}

/// Ensemble-averaged `Q = E[(1/N_con) M^dag M]` for one ansatz set.
#[derive(Debug, Clone)]
pub struct QMatrix {
    pub entries: Array2<c64>,
    pub labels: Vec<OpLabel>,
    pub spin: SpinSize,
    pub source: QSource,
}

impl QMatrix {
    /// Smallest eigenvalue (hermitian input, clamped at zero from below).
    pub fn lowest_eigenvalue(&self) -> Result<f64> {
        let w = self.entries.clone().eigh_into(UPLO::Lower)?.0;
        Ok(w[0])
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::spin::hermiticity_defect(&self.entries)
    }
}

/// RMT estimate of the learning residual, `lambda_RMT = sqrt(eps_1(Q))`.
pub fn lambda_rmt(q: &QMatrix) -> Result<f64> {
    Ok(q.lowest_eigenvalue()?.max(0.0).sqrt())
}

/// Expectation values of one initial state entering the CUE average.
#[derive(Debug, Clone, Copy)]
pub struct StateMoments {
    /// `tr(rho h_j)`
    pub exp_j: c64,
    /// `tr(rho h_k)`
    pub exp_k: c64,
    /// `tr(rho^2)`; 1 for pure states.
    pub purity: f64,
}

/// CUE average `E[conj(M_{i,j}) M_{i,k}]` for one initial state.
///
/// Seven-term Weingarten expression in the traces `tr(rho h)`, `tr(h)`,
/// `tr(h_j^dag h_k)` and the state purity; the traces of the supplied
/// operators are computed numerically. The `j` index enters conjugated,
/// which makes the assembled matrix hermitian positive semidefinite.
pub fn q_cue_element(moments: &StateMoments, h_j: &CMat, h_k: &CMat) -> Result<c64> {
    let d = h_j.nrows() as f64;
    let tr_j: c64 = h_j.diag().iter().sum();
    let tr_k: c64 = h_k.diag().iter().sum();
    let tr_jk = hs_inner(h_j, h_k)?; // tr(h_j^dag h_k)
    let p = c64::new(moments.purity, 0.0);
    let dd = d * d - 1.0;

    Ok(moments.exp_j.conj() * moments.exp_k
        - tr_j.conj() / d * moments.exp_k
        - tr_k / d * moments.exp_j.conj()
        + tr_j.conj() * tr_k / dd
        + p * tr_jk / dd
        - tr_jk / (d * dd)
        - p * tr_j.conj() * tr_k / (d * dd))
}

/// Closed-form `Q` for the zeroth-order ansatz `{Sx^2, Sx, Sy, Sz^2, Sz}`.
///
/// Nonzero entries: the three linear operators carry `S(2S+1)/6` on the
/// diagonal, the quadratic ones `S(8S^3 - 4S^2 + 6S - 3)/90`, and the
/// quadratic cross term is minus half the diagonal value.
pub fn analytic_q_a0(size: SpinSize) -> QMatrix {
    let s = size.s();
    let quad = s * (8.0 * s.powi(3) - 4.0 * s.powi(2) + 6.0 * s - 3.0) / 90.0;
    let lin = s * (2.0 * s + 1.0) / 6.0;
    let mut entries = Array2::<c64>::zeros((5, 5));
    // ordering: Sx^2, Sx, Sy, Sz^2, Sz
    entries[[0, 0]] = c64::new(quad, 0.0);
    entries[[3, 3]] = c64::new(quad, 0.0);
    entries[[0, 3]] = c64::new(-quad / 2.0, 0.0);
    entries[[3, 0]] = c64::new(-quad / 2.0, 0.0);
    entries[[1, 1]] = c64::new(lin, 0.0);
    entries[[2, 2]] = c64::new(lin, 0.0);
    entries[[4, 4]] = c64::new(lin, 0.0);
    let labels = ["x^2", "x", "y", "z^2", "z"]
        .into_iter()
        .map(|l| OpLabel::parse(l).expect("static labels"))
        .collect();
    QMatrix { entries, labels, spin: size, source: QSource::AnalyticA0 }
}

/// Coherent-state ensemble average of the CUE expression by spherical
/// quadrature: Gauss-Legendre in `cos theta` times a uniform rule in `phi`.
///
/// Base orders are chosen to integrate the polynomial integrands exactly;
/// the result is recomputed at doubled orders and
/// [`Error::QuadratureOrderTooLow`] is raised if any entry moves by more
/// than 1e-8 relative.
pub fn ise_average_q(ansatz: &AnsatzSet, size: SpinSize) -> Result<QMatrix> {
    let deg = ansatz.max_degree() as usize;
    // after the phi average the integrand is a polynomial of degree <= 2*deg
    // in cos theta; Gauss-Legendre with n nodes is exact through 2n - 1
    let n_theta = deg + 1;
    let n_phi = 2 * deg + 2;
    let base = ise_average_q_fixed(ansatz, size, n_theta, n_phi)?;
    let fine = ise_average_q_fixed(ansatz, size, 2 * n_theta, 2 * n_phi)?;

    let scale = fine
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let max_shift = base
        .iter()
        .zip(fine.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max)
        / scale;
    if max_shift > 1e-8 {
        return Err(Error::QuadratureOrderTooLow(max_shift));
    }

    Ok(QMatrix {
        entries: fine,
        labels: ansatz.labels().to_vec(),
        spin: size,
        source: QSource::QuadratureIse,
    })
}

fn ise_average_q_fixed(
    ansatz: &AnsatzSet,
    size: SpinSize,
    n_theta: usize,
    n_phi: usize,
) -> Result<Array2<c64>> {
    let ops = build_spin_operators(size);
    let factory = CoherentFactory::new(&ops)?;
    let n = ansatz.len();
    let d = size.dim() as f64;
    let dd = d * d - 1.0;

    let n_theta = std::num::NonZeroUsize::new(n_theta.max(1)).expect("nonzero order");
    let rule = GaussLegendre::new(n_theta);

    // ensemble averages of e_j = <h_j> and of conj(e_j) e_k over the sphere
    let mut lin = vec![c64::new(0.0, 0.0); n];
    let mut pair = Array2::<c64>::zeros((n, n));
    let mut e = vec![c64::new(0.0, 0.0); n];
    for (u, w_u) in rule.as_node_weight_pairs() {
        let theta = u.acos();
        for b in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * b as f64 / n_phi as f64;
            // weight of d(cos theta)/2 x d(phi)/(2 pi)
            let w = w_u / 2.0 / n_phi as f64;
            let psi = factory.state(theta, phi);
            for (j, h_j) in ansatz.elements().iter().enumerate() {
                e[j] = expectation(h_j, &psi);
            }
            for j in 0..n {
                lin[j] += e[j] * c64::new(w, 0.0);
                for k in 0..n {
                    pair[[j, k]] += e[j].conj() * e[k] * c64::new(w, 0.0);
                }
            }
        }
    }

    let traces: Vec<c64> = ansatz
        .elements()
        .iter()
        .map(|h| h.diag().iter().sum())
        .collect();
    let mut q = Array2::<c64>::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            let tr_jk = hs_inner(&ansatz.elements()[j], &ansatz.elements()[k])?;
            q[[j, k]] = pair[[j, k]]
                - traces[j].conj() / d * lin[k]
                - traces[k] / d * lin[j].conj()
                + traces[j].conj() * traces[k] / dd
                + tr_jk / dd
                - tr_jk / (d * dd)
                - traces[j].conj() * traces[k] / (d * dd);
        }
    }
    // hermitian by construction up to roundoff
    let qh = adjoint(&q);
    Ok((q + qh).mapv(|z| z * c64::new(0.5, 0.0)))
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phase
/// correction `U = Q diag(r_jj / |r_jj|)`.
pub fn sample_haar_unitary(dim: usize, seed: u64) -> Result<CMat> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    sample_haar_unitary_with(dim, &mut rng)
}

/// [`sample_haar_unitary`] drawing from a caller-supplied generator.
pub fn sample_haar_unitary_with(dim: usize, rng: &mut impl Rng) -> Result<CMat> {
    let ginibre = CMat::from_shape_fn((dim, dim), |_| {
        c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let (q, r) = ginibre.qr_square()?;
    let mut u = q;
    for j in 0..dim {
        let rjj = r[[j, j]];
        let phase = rjj / c64::new(rjj.norm().max(f64::MIN_POSITIVE), 0.0);
        u.column_mut(j).map_inplace(|z| *z *= phase);
    }
    Ok(u)
}

/// Monte-Carlo estimate of `E sqrt(eps_1(Q))`: for each sample draw a Haar
/// unitary and fresh coherent states, build the constraint matrix with the
/// unitary in place of the Trotter cycle, and record the smallest singular
/// value over `sqrt(N_con)`. Returns the sample mean and standard error.
pub fn monte_carlo_lambda(
    ansatz: &AnsatzSet,
    size: SpinSize,
    n_con: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut values = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let sample_seed = derive_seed(seed, i as u64);
        let u = sample_haar_unitary(size.dim(), derive_seed(sample_seed, 0))?;
        let states =
            crate::learning::sample_initial_states(size, n_con, derive_seed(sample_seed, 1))?;
        let m = constraint_matrix_with_unitary(&u, &states, ansatz)?;
        values.push(reconstruct(&m)?.lambda1);
    }
    Ok(mean_and_stderr(&values))
}

/// Empirical `Q` averaged over Haar samples (source [`QSource::MonteCarlo`]).
pub fn monte_carlo_q(
    ansatz: &AnsatzSet,
    size: SpinSize,
    n_con: usize,
    n_samples: usize,
    seed: u64,
) -> Result<QMatrix> {
    let n = ansatz.len();
    let mut acc = Array2::<c64>::zeros((n, n));
    for i in 0..n_samples {
        let sample_seed = derive_seed(seed, i as u64);
        let u = sample_haar_unitary(size.dim(), derive_seed(sample_seed, 0))?;
        let states =
            crate::learning::sample_initial_states(size, n_con, derive_seed(sample_seed, 1))?;
        let m = constraint_matrix_with_unitary(&u, &states, ansatz)?;
        let mh = adjoint(&m.entries);
        acc = acc + mh.dot(&m.entries).mapv(|z| z / c64::new(n_con as f64, 0.0));
    }
    Ok(QMatrix {
        entries: acc.mapv(|z| z / c64::new(n_samples as f64, 0.0)),
        labels: ansatz.labels().to_vec(),
        spin: size,
        source: QSource::MonteCarlo,
    })
}

pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::spacing_ratio_of_phases;
    use crate::kicked_top::FloquetVariant;
    use crate::magnus::ansatz_set;
    use crate::spin::{identity, max_abs_diff};
    use approx::assert_abs_diff_eq;
    use ndarray_linalg::Eig;

    fn size(two_s: u32) -> SpinSize {
        SpinSize::new(two_s).unwrap()
    }

    #[test]
    fn identity_observable_is_conserved() {
        let s = size(8);
        let id = identity(s.dim());
        let m = StateMoments {
            exp_j: c64::new(1.0, 0.0),
            exp_k: c64::new(1.0, 0.0),
            purity: 1.0,
        };
        let q = q_cue_element(&m, &id, &id).unwrap();
        assert!(q.norm() < 1e-12, "q = {q}");
    }

    #[test]
    fn sz_on_polar_state_term_by_term() {
        let s = size(16);
        let ops = build_spin_operators(s);
        let spin = s.s();
        let d = s.dim() as f64;
        let m = StateMoments {
            exp_j: c64::new(spin, 0.0), // <S,S| S_z |S,S> = S
            exp_k: c64::new(spin, 0.0),
            purity: 1.0,
        };
        let q = q_cue_element(&m, &ops.sz, &ops.sz).unwrap();
        let tr_sz2: f64 = (0..s.dim()).map(|a| s.m(a).powi(2)).sum();
        let expect = spin * spin + tr_sz2 / (d * d - 1.0) - tr_sz2 / (d * (d * d - 1.0));
        assert_abs_diff_eq!(q.re, expect, epsilon = 1e-9);
        assert_abs_diff_eq!(q.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cue_average_matches_haar_sampling() {
        // S = 8, rho = |S,S><S,S|, h = S_z: empirical mean of |M|^2 over
        // Haar unitaries within 3 standard errors of the formula
        let s = size(16);
        let ops = build_spin_operators(s);
        let spin = s.s();
        let mut psi0 = crate::spin::CVec::zeros(s.dim());
        psi0[0] = c64::new(1.0, 0.0);
        let n_samples = 10_000;
        let mut values = Vec::with_capacity(n_samples);
        for i in 0..n_samples {
            let u = sample_haar_unitary(s.dim(), derive_seed(17, i as u64)).unwrap();
            let evolved = u.dot(&psi0);
            let m_entry = expectation(&ops.sz, &evolved) - expectation(&ops.sz, &psi0);
            values.push(m_entry.norm_sqr());
        }
        let (mean, stderr) = mean_and_stderr(&values);
        let moments = StateMoments {
            exp_j: c64::new(spin, 0.0),
            exp_k: c64::new(spin, 0.0),
            purity: 1.0,
        };
        let expect = q_cue_element(&moments, &ops.sz, &ops.sz).unwrap().re;
        assert!(
            (mean - expect).abs() < 3.0 * stderr,
            "mean {mean:.4} vs {expect:.4} (stderr {stderr:.4})"
        );
    }

    #[test]
    fn quadrature_reproduces_closed_forms() {
        for two_s in [8u32, 32] {
            let s = size(two_s);
            let ansatz = ansatz_set(s, 0, FloquetVariant::ThreeStep).unwrap();
            let q = ise_average_q(&ansatz, s).unwrap();
            let reference = analytic_q_a0(s);
            let scale = reference.entries[[0, 0]].norm();
            let dev = max_abs_diff(&q.entries, &reference.entries) / scale;
            assert!(dev < 1e-8, "2S = {two_s}: relative deviation {dev:.3e}");
        }
    }

    #[test]
    fn quadrature_q_is_psd_for_higher_orders() {
        let s = size(16);
        for k in 0..=2u8 {
            let ansatz = ansatz_set(s, k, FloquetVariant::ThreeStep).unwrap();
            let q = ise_average_q(&ansatz, s).unwrap();
            assert!(q.hermiticity_defect() < 1e-10);
            assert!(q.lowest_eigenvalue().unwrap() > -1e-10, "order {k}");
        }
    }

    #[test]
    fn lambda_rmt_basics() {
        let s = size(4);
        let labels = vec![OpLabel::parse("x").unwrap()];
        let q = QMatrix {
            entries: Array2::eye(3).mapv(|x: f64| c64::new(x, 0.0)),
            labels: labels.clone(),
            spin: s,
            source: QSource::AnalyticA0,
        };
        assert_abs_diff_eq!(lambda_rmt(&q).unwrap(), 1.0, epsilon = 1e-12);
        // planted kernel: Q = v v^dag has lowest eigenvalue 0
        let v = [c64::new(0.6, 0.0), c64::new(0.0, 0.8)];
        let mut singular = Array2::<c64>::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                singular[[i, j]] = v[i] * v[j].conj();
            }
        }
        let q0 = QMatrix { entries: singular, labels, spin: s, source: QSource::AnalyticA0 };
        assert_abs_diff_eq!(lambda_rmt(&q0).unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn haar_unitaries_are_reproducible_and_unitary() {
        let u1 = sample_haar_unitary(24, 5).unwrap();
        let u2 = sample_haar_unitary(24, 5).unwrap();
        assert_eq!(u1, u2);
        let defect = max_abs_diff(&adjoint(&u1).dot(&u1), &identity(24));
        assert!(defect < 1e-10);
        for j in 0..24 {
            let norm: f64 = u1.column(j).iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm.sqrt(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn haar_first_entry_moment() {
        // |U_11|^2 is Beta(1, D-1) with mean 1/D
        let d = 16;
        let n = 4000;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                sample_haar_unitary(d, derive_seed(100, i as u64)).unwrap()[[0, 0]].norm_sqr()
            })
            .collect();
        let (mean, stderr) = mean_and_stderr(&values);
        assert!(
            (mean - 1.0 / d as f64).abs() < 3.0 * stderr,
            "mean {mean:.5}, stderr {stderr:.5}"
        );
    }

    #[test]
    fn haar_spectra_have_cue_spacing() {
        let d = 64;
        let mut rs = Vec::new();
        for i in 0..40 {
            let u = sample_haar_unitary(d, derive_seed(7, i)).unwrap();
            let (vals, _) = u.eig().unwrap();
            let phases: Vec<f64> = vals.iter().map(|z| z.arg()).collect();
            rs.push(spacing_ratio_of_phases(&phases).unwrap());
        }
        let (mean, _) = mean_and_stderr(&rs);
        assert!((mean - 0.5996).abs() < 0.02, "mean r = {mean:.4}");
    }

    #[test]
    fn monte_carlo_sits_below_analytic_by_the_edge_bias() {
        // per-sample smallest singular values are repelled below the
        // ensemble-mean prediction; the bias shrinks like sqrt(N_A / n_con)
        let s = size(32); // S = 16 keeps this quick
        let ansatz = ansatz_set(s, 0, FloquetVariant::ThreeStep).unwrap();
        let reference = lambda_rmt(&analytic_q_a0(s)).unwrap();
        let (mean_small, _) = monte_carlo_lambda(&ansatz, s, s.dim(), 30, 23).unwrap();
        let (mean_large, _) = monte_carlo_lambda(&ansatz, s, 4 * s.dim(), 30, 23).unwrap();
        let gap_small = reference - mean_small;
        let gap_large = reference - mean_large;
        assert!(gap_small > 0.0 && gap_small < 0.3 * reference);
        assert!(gap_large > 0.0 && gap_large < gap_small);
        let shrink = gap_small / gap_large;
        assert!(
            (1.4..3.0).contains(&shrink),
            "gap {gap_small:.3} -> {gap_large:.3}, ratio {shrink:.2} (expected near 2)"
        );
    }

    #[test]
    fn relative_gap_to_analytic_shrinks_with_dimension() {
        let gap_at = |two_s: u32| {
            let s = size(two_s);
            let ansatz = ansatz_set(s, 0, FloquetVariant::ThreeStep).unwrap();
            let reference = lambda_rmt(&analytic_q_a0(s)).unwrap();
            let (mean, _) = monte_carlo_lambda(&ansatz, s, s.dim(), 40, 51).unwrap();
            (reference - mean).abs() / reference
        };
        let (small, large) = (gap_at(8), gap_at(64));
        assert!(
            large < small,
            "relative gap should shrink with D: {small:.3} -> {large:.3}"
        );
    }

    #[test]
    fn stderr_shrinks_with_more_samples() {
        let s = size(8);
        let ansatz = ansatz_set(s, 0, FloquetVariant::ThreeStep).unwrap();
        let (_, se_small) = monte_carlo_lambda(&ansatz, s, s.dim() + 3, 20, 31).unwrap();
        let (_, se_large) = monte_carlo_lambda(&ansatz, s, s.dim() + 3, 80, 31).unwrap();
        let ratio = se_small / se_large;
        assert!(
            ratio > 1.2 && ratio < 4.0,
            "stderr ratio {ratio:.2} (expected near 2)"
        );
    }

    #[test]
    fn monte_carlo_q_converges_to_analytic() {
        let s = size(16);
        let ansatz = ansatz_set(s, 0, FloquetVariant::ThreeStep).unwrap();
        let reference = analytic_q_a0(s);
        let scale = reference.entries[[0, 0]].norm();
        let dev_for = |n_samples: usize| {
            let q = monte_carlo_q(&ansatz, s, s.dim(), n_samples, 77).unwrap();
            assert!(q.lowest_eigenvalue().unwrap() > -1e-10);
            max_abs_diff(&q.entries, &reference.entries) / scale
        };
        let (d_small, d_large) = (dev_for(8), dev_for(128));
        // 16x more samples should shrink the deviation roughly 4x
        assert!(
            d_large < d_small,
            "deviation did not shrink: {d_small:.3e} -> {d_large:.3e}"
        );
    }
}
