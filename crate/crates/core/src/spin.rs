//! Dense collective-spin building blocks: the angular-momentum matrices
//! `S_x, S_y, S_z`, spin coherent states, ordered operator products, the
//! Hilbert-Schmidt inner product, and unitaries `exp(-iHt)` of hermitian
//! generators.
//!
//! Everything is dense and double precision. The Hilbert space dimension is
//! `D = 2S + 1`, small enough (D <= ~1000) that spectral decompositions are
//! exact for all practical purposes.

use ndarray::{Array1, Array2, Axis as NdAxis};
use ndarray_linalg::{Eigh, Norm, UPLO};

use crate::error::Error;
use crate::Result;

pub use ndarray_linalg::c64;

/// Dense complex matrix acting on the spin-S Hilbert space.
pub type CMat = Array2<c64>;
/// Complex state vector on the spin-S Hilbert space.
pub type CVec = Array1<c64>;

/// Max-norm tolerance below which a matrix counts as hermitian.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Collective spin size, stored as `2S` so half-integer spins are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinSize {
    two_s: u32,
}

impl SpinSize {
    /// A spin with `2S = two_s`. Requires `two_s >= 1` so that `D >= 2`.
    pub fn new(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidSpin(two_s));
        }
        Ok(Self { two_s })
    }

    /// Integer spin `S` (use [`SpinSize::new`] for half-integer spins).
    pub fn from_spin(s: u32) -> Self {
        Self { two_s: 2 * s }
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    /// S as a float (may be half-integer).
    pub fn s(&self) -> f64 {
        f64::from(self.two_s) / 2.0
    }

    /// Hilbert space dimension `D = 2S + 1`.
    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// Magnetic quantum number of basis index `a`, ordered `m = S, S-1, ..., -S`.
    pub fn m(&self, a: usize) -> f64 {
        self.s() - a as f64
    }
}

/// The three collective spin operators for one spin size.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
    pub size: SpinSize,
}

/// Build `S_x, S_y, S_z` in the `S_z` eigenbasis (ordered `m = S ... -S`).
///
/// `S_x` and `S_y` come from the ladder operators with matrix elements
/// `<m±1|S_±|m> = sqrt(S(S+1) - m(m±1))`; all three are hermitian.
pub fn build_spin_operators(size: SpinSize) -> SpinOperators {
    let d = size.dim();
    let s = size.s();
    let mut sx = CMat::zeros((d, d));
    let mut sy = CMat::zeros((d, d));
    let mut sz = CMat::zeros((d, d));
    for a in 0..d {
        let m = size.m(a);
        sz[[a, a]] = c64::new(m, 0.0);
        if a > 0 {
            // raising: |m> -> |m+1>, row index a-1
            let c = 0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt();
            sx[[a - 1, a]] = c64::new(c, 0.0);
            sx[[a, a - 1]] = c64::new(c, 0.0);
            sy[[a - 1, a]] = c64::new(0.0, -c);
            sy[[a, a - 1]] = c64::new(0.0, c);
        }
    }
    SpinOperators { sx, sy, sz, size }
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.size.dim()
    }

    pub fn axis(&self, axis: Axis) -> &CMat {
        match axis {
            Axis::X => &self.sx,
            Axis::Y => &self.sy,
            Axis::Z => &self.sz,
        }
    }
}

/// Conjugate transpose.
pub fn adjoint(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// Commutator `[a, b] = ab - ba`.
pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a.dot(b) - b.dot(a)
}

/// Largest entry-wise deviation from hermiticity, `max |A - A^dag|`.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            let dev = (a[[i, j]] - a[[j, i]].conj()).norm();
            worst = worst.max(dev);
        }
    }
    worst
}

/// Largest entry-wise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Identity matrix of dimension `d`.
pub fn identity(d: usize) -> CMat {
    CMat::eye(d)
}

/// Hilbert-Schmidt inner product `tr(A^dag B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Result<c64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: b.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Hilbert-Schmidt norm `sqrt(tr(A^dag A))`.
pub fn hs_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral decomposition `H = V diag(w) V^dag` of a hermitian matrix, with
/// eigenvalues ascending and eigenvectors as columns of `V`.
///
/// The backend's `eigh` hands row-major input to LAPACK column-major, which
/// for a hermitian matrix means it diagonalizes the conjugate; the returned
/// vectors are conjugated back here so the decomposition identity holds for
/// `H` itself.
pub fn eigh_hermitian(h: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (w, v) = h.eigh(UPLO::Lower)?;
    Ok((w, v.mapv(|z| z.conj())))
}

/// Unitary `exp(-iHt)` of a hermitian generator, by spectral decomposition.
///
/// Fails with [`Error::NotHermitian`] if `max |H - H^dag|` exceeds
/// [`HERMITICITY_TOL`]. The spectral route keeps the result unitary up to
/// eigensolver accuracy for any `t`.
pub fn expm_hermitian(h: &CMat, t: f64) -> Result<CMat> {
    let defect = hermiticity_defect(h);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let (w, v) = eigh_hermitian(h)?;
    Ok(apply_phases(&v, &w, t))
}

/// Assemble `V e^{-i w t} V^dag` from a precomputed eigensystem.
fn apply_phases(v: &CMat, w: &Array1<f64>, t: f64) -> CMat {
    let phases: CVec = w.mapv(|x| c64::from_polar(1.0, -x * t));
    let mut scaled = v.clone();
    for (mut col, ph) in scaled.columns_mut().into_iter().zip(phases.iter()) {
        col.map_inplace(|z| *z *= ph);
    }
    scaled.dot(&adjoint(v))
}

/// Spin coherent state `|theta, phi> = exp(i theta (S_x sin phi - S_y cos phi)) |S, S_z = S>`.
pub fn coherent_state(ops: &SpinOperators, theta: f64, phi: f64) -> Result<CVec> {
    let gen: CMat = &ops.sx * c64::new(phi.sin(), 0.0) - &ops.sy * c64::new(phi.cos(), 0.0);
    // exp(+i theta G) = expm_hermitian(G, -theta)
    let u = expm_hermitian(&gen, -theta)?;
    let mut psi = u.column(0).to_owned();
    normalize(&mut psi);
    Ok(psi)
}

/// Rescale a vector to unit norm (no-op on the zero vector).
pub fn normalize(psi: &mut CVec) {
    let n = psi.norm_l2();
    if n > 0.0 {
        psi.map_inplace(|z| *z /= n);
    }
}

/// Batch generator of coherent states.
///
/// Uses the operator identity
/// `exp(i theta (S_x sin phi - S_y cos phi)) = e^{-i phi S_z} e^{-i theta S_y} e^{i phi S_z}`
/// with the `S_y` eigensystem cached, so each state costs two matrix-vector
/// products instead of a fresh eigendecomposition. Agrees with
/// [`coherent_state`] including global phase.
pub struct CoherentFactory {
    sy_vecs: CMat,
    sy_vals: Array1<f64>,
    size: SpinSize,
}

impl CoherentFactory {
    pub fn new(ops: &SpinOperators) -> Result<Self> {
        let (w, v) = eigh_hermitian(&ops.sy)?;
        Ok(Self {
            sy_vecs: v,
            sy_vals: w,
            size: ops.size,
        })
    }

    pub fn state(&self, theta: f64, phi: f64) -> CVec {
        let d = self.size.dim();
        // e^{i phi S_z} |S,S> = e^{i phi S} |S,S>
        let top_phase = c64::from_polar(1.0, phi * self.size.s());
        // e^{-i theta S_y} acting on the m = S basis column
        let row0 = self.sy_vecs.row(0).mapv(|z| z.conj());
        let rotated: CVec = (0..self.sy_vals.len())
            .map(|k| row0[k] * c64::from_polar(1.0, -theta * self.sy_vals[k]))
            .collect();
        let mut psi = self.sy_vecs.dot(&rotated);
        // e^{-i phi S_z} diagonal phases
        for a in 0..d {
            psi[a] *= c64::from_polar(1.0, -phi * self.size.m(a)) * top_phase;
        }
        normalize(&mut psi);
        psi
    }
}

/// Expectation value `<psi|A|psi>`.
pub fn expectation(a: &CMat, psi: &CVec) -> c64 {
    let apsi = a.dot(psi);
    psi.iter().zip(apsi.iter()).map(|(p, q)| p.conj() * q).sum()
}

/// Column-wise expectation values `<psi_i|A|psi_i>` for states stacked as columns.
pub fn expectation_columns(a: &CMat, states: &CMat) -> CVec {
    let ap = a.dot(states);
    let mut out = CVec::zeros(states.ncols());
    for (i, (col, acol)) in states
        .axis_iter(NdAxis(1))
        .zip(ap.axis_iter(NdAxis(1)))
        .enumerate()
    {
        out[i] = col.iter().zip(acol.iter()).map(|(p, q)| p.conj() * q).sum();
    }
    out
}

/// One spin axis in an operator product label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn from_char(c: char) -> Result<Self> {
        match c.to_ascii_lowercase() {
            'x' => Ok(Axis::X),
            'y' => Ok(Axis::Y),
            'z' => Ok(Axis::Z),
            other => Err(Error::UnknownAxis(other)),
        }
    }

    pub fn as_char(&self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// Ordered product of spin-operator powers, e.g. `Sx^2 Sz` for `[(X,2),(Z,1)]`.
///
/// Products are matrix products in the listed order (left to right), which
/// matters because factors on different axes do not commute.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpLabel(Vec<(Axis, u32)>);

impl OpLabel {
    pub fn new(factors: Vec<(Axis, u32)>) -> Result<Self> {
        let factors: Vec<(Axis, u32)> = factors.into_iter().filter(|&(_, p)| p > 0).collect();
        if factors.is_empty() {
            return Err(Error::EmptyLabel);
        }
        Ok(Self(factors))
    }

    /// Parse a compact label such as `"x^2 z"` or `"xyz"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut factors: Vec<(Axis, u32)> = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            if c.is_whitespace() || c == '*' {
                continue;
            }
            let axis = Axis::from_char(c)?;
            let mut power = 1u32;
            if chars.peek() == Some(&'^') {
                chars.next();
                let mut digits = String::new();
                while let Some(d) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(*d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                power = digits.parse().map_err(|_| Error::EmptyLabel)?;
            }
            factors.push((axis, power));
        }
        Self::new(factors)
    }

    pub fn factors(&self) -> &[(Axis, u32)] {
        &self.0
    }

    /// Total polynomial degree of the product.
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, p)| p).sum()
    }
}

impl std::fmt::Display for OpLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, (axis, power)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "S{}", axis.as_char())?;
            if *power > 1 {
                write!(f, "^{power}")?;
            }
        }
        Ok(())
    }
}

/// Left-to-right matrix product of spin-operator powers.
pub fn operator_product(ops: &SpinOperators, label: &OpLabel) -> CMat {
    let d = ops.dim();
    let mut out = identity(d);
    for &(axis, power) in label.factors() {
        let m = ops.axis(axis);
        for _ in 0..power {
            out = out.dot(m);
        }
    }
    out
}
