//! Reconstruction of the Floquet generator from energy conservation.
//!
//! For `N_con` initial states evolved over the same stroboscopic interval,
//! the constraint matrix collects expectation-value differences of the
//! ansatz operators. A generator that is conserved in the ansatz span makes
//! each row annihilate its coefficient vector, so the best reconstruction is
//! the right singular vector of the smallest singular value, and that
//! singular value measures how well any ansatz combination is conserved.

use ndarray::Array1;
use ndarray_linalg::SVD;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::Error;
use crate::kicked_top::{evolve_block, TrotterStep};
use crate::magnus::{AnsatzSet, FmCoefficients};
use crate::spin::{
    build_spin_operators, expectation_columns, CMat, CVec, CoherentFactory, SpinSize, c64,
};
use crate::Result;

/// Singular values below this count as an exactly degenerate kernel.
const KERNEL_TOL: f64 = 1e-12;

/// Draw `n_con` spin coherent states with directions uniform on the sphere
/// (`cos theta` uniform in [-1, 1], `phi` uniform in [0, 2 pi)).
///
/// Bit-reproducible for a fixed seed.
pub fn sample_initial_states(size: SpinSize, n_con: usize, seed: u64) -> Result<Vec<CVec>> {
    let ops = build_spin_operators(size);
    let factory = CoherentFactory::new(&ops)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(n_con);
    for _ in 0..n_con {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        states.push(factory.state(u.acos(), phi));
    }
    Ok(states)
}

/// Stack states as the columns of a `D x N` matrix.
pub fn states_as_block(states: &[CVec]) -> CMat {
    let d = states.first().map_or(0, CVec::len);
    let mut block = CMat::zeros((d, states.len()));
    for (i, psi) in states.iter().enumerate() {
        block.column_mut(i).assign(psi);
    }
    block
}

/// The learning constraint matrix: one row per initial state, one column per
/// ansatz operator, entries `<h_j>_final - <h_j>_initial`.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    pub entries: CMat,
    pub tau: f64,
    /// Number of Trotter steps between the two expectation values.
    pub n_steps: usize,
}

impl ConstraintMatrix {
    pub fn n_con(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_ansatz(&self) -> usize {
        self.entries.ncols()
    }

    /// Restriction to the first `n` ansatz columns. Because lower-order
    /// ansatz sets are prefixes of higher-order ones, this is the constraint
    /// matrix of the lower-order learning problem.
    pub fn column_prefix(&self, n: usize) -> ConstraintMatrix {
        ConstraintMatrix {
            entries: self.entries.slice(ndarray::s![.., ..n]).to_owned(),
            tau: self.tau,
            n_steps: self.n_steps,
        }
    }
}

/// Build the constraint matrix by evolving every state for
/// `n = max(1, round(total_time / tau))` Trotter steps.
pub fn constraint_matrix(
    step: &TrotterStep,
    states: &[CVec],
    ansatz: &AnsatzSet,
    total_time: f64,
) -> Result<ConstraintMatrix> {
    if total_time <= 0.0 || total_time.is_nan() {
        return Err(Error::NonPositiveTime(total_time));
    }
    if states.is_empty() || states.iter().any(|s| s.len() != step.dim()) {
        return Err(Error::DimensionMismatch {
            expected: step.dim(),
            got: states.first().map_or(0, CVec::len),
        });
    }
    if states.len() <= ansatz.len() {
        return Err(Error::TooFewConstraints {
            n_con: states.len(),
            n_ansatz: ansatz.len(),
        });
    }
    let n_steps = ((total_time / step.tau).round() as usize).max(1);
    let initial = states_as_block(states);
    let evolved = evolve_block(step, &initial, n_steps)?;
    let entries = expectation_differences(&initial, &evolved, ansatz);
    Ok(ConstraintMatrix { entries, tau: step.tau, n_steps })
}

/// Constraint matrix with an arbitrary unitary in place of the Trotter cycle
/// (used for random-matrix reference sampling).
pub fn constraint_matrix_with_unitary(
    u: &CMat,
    states: &[CVec],
    ansatz: &AnsatzSet,
) -> Result<ConstraintMatrix> {
    if states.is_empty() || states.iter().any(|s| s.len() != u.nrows()) {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            got: states.first().map_or(0, CVec::len),
        });
    }
    if states.len() <= ansatz.len() {
        return Err(Error::TooFewConstraints {
            n_con: states.len(),
            n_ansatz: ansatz.len(),
        });
    }
    let initial = states_as_block(states);
    let evolved = u.dot(&initial);
    let entries = expectation_differences(&initial, &evolved, ansatz);
    Ok(ConstraintMatrix { entries, tau: 0.0, n_steps: 1 })
}

fn expectation_differences(initial: &CMat, evolved: &CMat, ansatz: &AnsatzSet) -> CMat {
    let mut entries = CMat::zeros((initial.ncols(), ansatz.len()));
    for (j, h_j) in ansatz.elements().iter().enumerate() {
        let before = expectation_columns(h_j, initial);
        let after = expectation_columns(h_j, evolved);
        for i in 0..initial.ncols() {
            entries[[i, j]] = after[i] - before[i];
        }
    }
    entries
}

/// Outcome of the singular-value reconstruction.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    /// Smallest singular value scaled as `lambda_1 / sqrt(N_con)`.
    pub lambda1: f64,
    /// Unit-norm coefficient vector, global phase fixed so the
    /// largest-magnitude entry is real positive.
    pub c_rec: Vec<c64>,
    /// All singular values, ascending.
    pub singular_values: Vec<f64>,
    /// Set when the two smallest singular values both vanish to 1e-12, i.e.
    /// the kernel direction is not unique.
    pub degenerate_kernel: bool,
    pub n_con: usize,
}

impl ReconstructionResult {
    /// The unnormalized smallest singular value `||M c_rec||`.
    pub fn lambda1_raw(&self) -> f64 {
        self.lambda1 * (self.n_con as f64).sqrt()
    }
}

/// Solve `argmin_c ||M c|| / ||c||` by full SVD of the complex constraint
/// matrix.
pub fn reconstruct(m: &ConstraintMatrix) -> Result<ReconstructionResult> {
    let n_con = m.n_con();
    let n_ansatz = m.n_ansatz();
    let (_, sv, vt) = m.entries.svd(false, true)?;
    let vt = vt.expect("right singular vectors requested");

    // LAPACK returns singular values descending
    let mut singular_values: Vec<f64> = sv.to_vec();
    singular_values.reverse();

    let degenerate_kernel =
        singular_values[0] < KERNEL_TOL && singular_values.get(1).is_some_and(|&s| s < KERNEL_TOL);

    let mut c_rec: Vec<c64> = if singular_values.iter().all(|&s| s < KERNEL_TOL) {
        // fully degenerate constraint set: any unit vector solves it
        let mut e0 = vec![c64::new(0.0, 0.0); n_ansatz];
        e0[0] = c64::new(1.0, 0.0);
        e0
    } else {
        vt.row(n_ansatz - 1).iter().map(|z| z.conj()).collect()
    };

    // fix the global phase: largest-magnitude entry real positive
    let peak = c_rec
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let ph = c_rec[peak] / c64::new(c_rec[peak].norm().max(f64::MIN_POSITIVE), 0.0);
    for z in &mut c_rec {
        *z /= ph;
    }
    let norm: f64 = c_rec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut c_rec {
        *z /= c64::new(norm, 0.0);
    }

    Ok(ReconstructionResult {
        lambda1: singular_values[0] / (n_con as f64).sqrt(),
        c_rec,
        singular_values,
        degenerate_kernel,
        n_con,
    })
}

/// `||M c|| / ||c||` for an arbitrary direction; bounded below by the
/// smallest singular value.
pub fn residual_of(m: &ConstraintMatrix, c: &[c64]) -> f64 {
    let cv = Array1::from_vec(c.to_vec());
    let mc = m.entries.dot(&cv);
    let num: f64 = mc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = cv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Euclidean distance between two coefficient vectors after normalizing both
/// and removing the global phase (chosen to maximize `Re<a, b>`).
pub fn aligned_distance(a: &[c64], b: &[c64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let inner: c64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x.conj() * y / c64::new(na * nb, 0.0))
        .sum();
    let phase = if inner.norm() > 0.0 {
        inner / c64::new(inner.norm(), 0.0)
    } else {
        c64::new(1.0, 0.0)
    };
    let dist2: f64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x / c64::new(na, 0.0) - y / (phase * c64::new(nb, 0.0))).norm_sqr())
        .sum();
    Ok(dist2.sqrt())
}

/// Parameter distance between the analytic Floquet-Magnus coefficients and a
/// reconstructed vector, both normalized and phase-aligned.
pub fn parameter_distance(c_fm: &FmCoefficients, c_rec: &[c64]) -> Result<f64> {
    aligned_distance(&c_fm.values, c_rec)
}

/// Phase-align `b` against `a` (both assumed unit norm); returns the rotated
/// copy of `b`. Useful for coefficient-by-coefficient comparisons.
pub fn phase_align(a: &[c64], b: &[c64]) -> Vec<c64> {
    let inner: c64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 {
        inner / c64::new(inner.norm(), 0.0)
    } else {
        c64::new(1.0, 0.0)
    };
    b.iter().map(|z| z / phase).collect()
}

/// Scheduling-independent stream of per-task seeds derived from a master
/// seed (splitmix64 over the task index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
