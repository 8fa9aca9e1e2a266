//! Kicked-top component Hamiltonians and Floquet operators.
//!
//! The model is a single collective spin with component Hamiltonians
//! `H_mu = J_mu S_mu^2 / (2S+1) + h_mu S_mu` for `mu = x, y, z`. One drive
//! period of duration `tau` is either the two-step cycle
//! `U = e^{-i H_z tau} e^{-i H_x tau}` or the three-step cycle
//! `U = e^{-i H_z tau} e^{-i H_y tau} e^{-i H_x tau}`; the product is read
//! right to left, so the `x` factor acts first.

use ndarray::Axis as NdAxis;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::spin::{
    build_spin_operators, expm_hermitian, identity, max_abs_diff, normalize, CMat, CVec, SpinSize,
    c64,
};
use crate::Result;

/// Couplings and fields of the kicked top, in units of `J_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub j_x: f64,
    pub j_y: f64,
    pub j_z: f64,
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: f64,
}

impl ModelParams {
    /// The parameter set used throughout: `J_x = 0.4, J_y = 0, J_z = 1,
    /// h_x = 0.11, h_y = h_z = 0.1`.
    pub fn paper_default() -> Self {
        Self {
            j_x: 0.4,
            j_y: 0.0,
            j_z: 1.0,
            h_x: 0.11,
            h_y: 0.1,
            h_z: 0.1,
        }
    }

    pub fn couplings(&self) -> [(f64, f64); 3] {
        [
            (self.j_x, self.h_x),
            (self.j_y, self.h_y),
            (self.j_z, self.h_z),
        ]
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::paper_default()
    }
}

/// Gate split of one drive period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FloquetVariant {
    /// `U = e^{-i H_z tau} e^{-i H_x tau}`
    TwoStep,
    /// `U = e^{-i H_z tau} e^{-i H_y tau} e^{-i H_x tau}`
    ThreeStep,
}

impl std::str::FromStr for FloquetVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "two_step" | "two" | "2" => Ok(FloquetVariant::TwoStep),
            "three_step" | "three" | "3" => Ok(FloquetVariant::ThreeStep),
            other => Err(format!("unknown Floquet variant `{other}`")),
        }
    }
}

/// The component Hamiltonians and their sum (the simulation target).
#[derive(Debug, Clone)]
pub struct Hamiltonians {
    pub h_x: CMat,
    pub h_y: CMat,
    pub h_z: CMat,
    pub target: CMat,
}

/// Build `H_x, H_y, H_z` and the target `H = H_x + H_y + H_z`.
pub fn build_hamiltonians(params: &ModelParams, size: SpinSize) -> Hamiltonians {
    let ops = build_spin_operators(size);
    let denom = size.dim() as f64; // 2S + 1
    let component = |s_mu: &CMat, j: f64, h: f64| -> CMat {
        s_mu.dot(s_mu).mapv(|z| z * c64::new(j / denom, 0.0)) + s_mu.mapv(|z| z * c64::new(h, 0.0))
    };
    let h_x = component(&ops.sx, params.j_x, params.h_x);
    let h_y = component(&ops.sy, params.j_y, params.h_y);
    let h_z = component(&ops.sz, params.j_z, params.h_z);
    let target = &h_x + &h_y + &h_z;
    Hamiltonians { h_x, h_y, h_z, target }
}

/// One cached Trotter step: the Floquet unitary for a fixed `tau`.
#[derive(Debug, Clone)]
pub struct TrotterStep {
    pub tau: f64,
    pub u: CMat,
    pub variant: FloquetVariant,
    pub params: ModelParams,
    pub spin: SpinSize,
}

impl TrotterStep {
    /// Wrap an externally built unitary (e.g. exact target evolution),
    /// checking unitarity to 1e-9.
    pub fn from_unitary(
        u: CMat,
        tau: f64,
        variant: FloquetVariant,
        params: ModelParams,
        spin: SpinSize,
    ) -> Result<Self> {
        let step = Self { tau, u, variant, params, spin };
        let defect = step.unitarity_defect();
        if defect > 1e-9 {
            return Err(Error::NotHermitian(defect));
        }
        Ok(step)
    }

    /// `max |U^dag U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let udu = crate::spin::adjoint(&self.u).dot(&self.u);
        max_abs_diff(&udu, &identity(self.u.nrows()))
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }
}

/// Build the Floquet operator for one drive period.
pub fn floquet_operator(
    params: &ModelParams,
    size: SpinSize,
    tau: f64,
    variant: FloquetVariant,
) -> Result<TrotterStep> {
    let h = build_hamiltonians(params, size);
    let u_x = expm_hermitian(&h.h_x, tau)?;
    let u_z = expm_hermitian(&h.h_z, tau)?;
    let u = match variant {
        FloquetVariant::TwoStep => u_z.dot(&u_x),
        FloquetVariant::ThreeStep => {
            let u_y = expm_hermitian(&h.h_y, tau)?;
            u_z.dot(&u_y).dot(&u_x)
        }
    };
    Ok(TrotterStep {
        tau,
        u,
        variant,
        params: *params,
        spin: size,
    })
}

/// Exact one-period evolution under the target Hamiltonian, `U = e^{-iH tau}`.
///
/// Used as the zero-Trotter-error baseline; tagged with the variant whose
/// Trotterization it replaces.
pub fn exact_step(
    params: &ModelParams,
    size: SpinSize,
    tau: f64,
    variant: FloquetVariant,
) -> Result<TrotterStep> {
    let h = build_hamiltonians(params, size);
    let u = expm_hermitian(&h.target, tau)?;
    Ok(TrotterStep {
        tau,
        u,
        variant,
        params: *params,
        spin: size,
    })
}

/// Steps between renormalizations during long evolutions.
const RENORM_INTERVAL: usize = 100;

/// Apply `n` Trotter steps to a state, renormalizing every 100 steps.
pub fn evolve(step: &TrotterStep, psi0: &CVec, n: usize) -> Result<CVec> {
    if psi0.len() != step.dim() {
        return Err(Error::DimensionMismatch {
            expected: step.dim(),
            got: psi0.len(),
        });
    }
    let mut psi = psi0.clone();
    for k in 0..n {
        psi = step.u.dot(&psi);
        if (k + 1) % RENORM_INTERVAL == 0 {
            normalize(&mut psi);
        }
    }
    normalize(&mut psi);
    Ok(psi)
}

/// Apply `n` Trotter steps to a block of states stored as columns.
///
/// Same arithmetic as [`evolve`] per column, batched through matrix products
/// so many initial states share one cached `U`.
pub fn evolve_block(step: &TrotterStep, states: &CMat, n: usize) -> Result<CMat> {
    if states.nrows() != step.dim() {
        return Err(Error::DimensionMismatch {
            expected: step.dim(),
            got: states.nrows(),
        });
    }
    let mut block = states.clone();
    for k in 0..n {
        block = step.u.dot(&block);
        if (k + 1) % RENORM_INTERVAL == 0 {
            renormalize_columns(&mut block);
        }
    }
    renormalize_columns(&mut block);
    Ok(block)
}

fn renormalize_columns(block: &mut CMat) {
    for mut col in block.axis_iter_mut(NdAxis(1)) {
        let n: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 0.0 {
            col.map_inplace(|z| *z /= n);
        }
    }
}
