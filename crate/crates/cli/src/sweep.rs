//! The parallel tau-sweep driver.
//!
//! Every tau point derives its own RNG seed from the master seed and the
//! grid index, so results are identical whatever the worker count or
//! scheduling order. Failures at a single tau are recorded in-band and do
//! not abort the rest of the grid.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use floquet_core::diagnostics::{
    eigenphases, participation_ratio_in_basis, simulation_accuracy, spacing_ratio,
};
use floquet_core::kicked_top::{build_hamiltonians, floquet_operator, Hamiltonians};
use floquet_core::learning::{
    aligned_distance, constraint_matrix, derive_seed, phase_align, reconstruct,
    sample_initial_states,
};
use floquet_core::magnus::{ansatz_set, magnus_term_variant, project_onto_ansatz, AnsatzSet};
use floquet_core::rmt::{ise_average_q, lambda_rmt};
use floquet_core::spin::{build_spin_operators, coherent_state, eigh_hermitian, CMat, SpinSize, c64};

use crate::config::{ConfigError, SweepConfig};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure during sweep setup: {0}")]
    Numerical(#[from] floquet_core::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Learning output for one ansatz order at one tau.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub order: u8,
    /// Smallest singular value over sqrt(N_con).
    pub lambda1: f64,
    /// RMT plateau reference for this ansatz (tau-independent).
    pub lambda_rmt: Option<f64>,
    /// Distance between normalized, phase-aligned coefficient vectors.
    pub parameter_distance: f64,
    /// Reconstructed coefficients, unit norm, phase-aligned to `c_fm`,
    /// serialized as [re, im] pairs in ansatz-label order.
    pub c_rec: Vec<[f64; 2]>,
    /// Floquet-Magnus coefficients at this tau, normalized to unit norm.
    pub c_fm: Vec<[f64; 2]>,
}

/// All diagnostics evaluated at one tau point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tau: f64,
    pub qbar_e: Option<f64>,
    pub spacing_ratio: Option<f64>,
    pub participation_ratio: Option<f64>,
    pub orders: Vec<OrderRecord>,
    /// Set when this tau point failed; other fields are then empty.
    pub error: Option<String>,
}

/// Ansatz labels for one truncation order, echoed once per sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderLabels {
    pub order: u8,
    pub labels: Vec<String>,
}

/// Non-deterministic run information, kept apart from the reproducible
/// payload so two runs with the same config and seed differ only here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub unix_time_seconds: u64,
    pub wall_seconds: f64,
    pub version: String,
}

/// Complete result of one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub schema_version: u32,
    pub config: SweepConfig,
    pub ansatz_labels: Vec<OrderLabels>,
    pub records: Vec<SweepRecord>,
    pub metadata: Metadata,
}

impl SweepResult {
    /// Records that completed without error.
    pub fn ok_records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.records.iter().filter(|r| r.error.is_none())
    }

    /// `(tau, lambda1)` curve for one ansatz order.
    pub fn lambda_curve(&self, order: u8) -> Vec<(f64, f64)> {
        self.ok_records()
            .filter_map(|r| {
                r.orders
                    .iter()
                    .find(|o| o.order == order)
                    .map(|o| (r.tau, o.lambda1))
            })
            .collect()
    }
}

struct LearningContext {
    sets: Vec<AnsatzSet>,
    fm_terms: Vec<CMat>,
    lambda_rmt: Vec<Option<f64>>,
    n_con: usize,
}

/// Run all enabled diagnostics over the tau grid.
///
/// `workers = 0` uses one worker per logical CPU.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepResult, SweepError> {
    config.validate()?;
    let started = Instant::now();
    let size = SpinSize::new(config.two_s)?;
    let grid = config.tau.points();
    let flags = config.diagnostics;

    let hams = build_hamiltonians(&config.params, size);
    let target_basis = if flags.pr {
        Some(eigh_hermitian(&hams.target)?.1)
    } else {
        None
    };
    let accuracy_state = if flags.accuracy {
        let ops = build_spin_operators(size);
        Some(coherent_state(
            &ops,
            config.accuracy_state.theta,
            config.accuracy_state.phi,
        )?)
    } else {
        None
    };

    let learning = if flags.learning {
        let mut orders: Vec<u8> = config.ansatz_orders.clone();
        orders.sort_unstable();
        orders.dedup();
        let sets: Vec<AnsatzSet> = orders
            .iter()
            .map(|&k| ansatz_set(size, k, config.variant))
            .collect::<Result<_, _>>()?;
        let max_order = *orders.last().expect("validated non-empty");
        let fm_terms: Vec<CMat> = (0..=max_order)
            .map(|k| magnus_term_variant(&config.params, size, k, config.variant))
            .collect::<Result<_, _>>()?;
        let lambda_refs: Vec<Option<f64>> = if flags.rmt {
            sets.iter()
                .map(|set| ise_average_q(set, size).and_then(|q| lambda_rmt(&q)).map(Some))
                .collect::<Result<_, _>>()?
        } else {
            vec![None; sets.len()]
        };
        Some(LearningContext {
            sets,
            fm_terms,
            lambda_rmt: lambda_refs,
            n_con: config.effective_n_con(),
        })
    } else {
        None
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;

    let records: Vec<SweepRecord> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(idx, &tau)| {
                compute_record(
                    config,
                    size,
                    &hams,
                    target_basis.as_ref(),
                    accuracy_state.as_ref(),
                    learning.as_ref(),
                    idx,
                    tau,
                )
                .unwrap_or_else(|e| SweepRecord {
                    tau,
                    qbar_e: None,
                    spacing_ratio: None,
                    participation_ratio: None,
                    orders: vec![],
                    error: Some(e.to_string()),
                })
            })
            .collect()
    });

    let ansatz_labels = learning
        .as_ref()
        .map(|ctx| {
            ctx.sets
                .iter()
                .map(|set| OrderLabels {
                    order: set.order(),
                    labels: set.labels().iter().map(ToString::to_string).collect(),
                })
                .collect()
        })
        .unwrap_or_default();

    Ok(SweepResult {
        schema_version: 1,
        config: config.clone(),
        ansatz_labels,
        records,
        metadata: Metadata {
            unix_time_seconds: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_seconds: started.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

#[allow(clippy::too_many_arguments)]
fn compute_record(
    config: &SweepConfig,
    size: SpinSize,
    hams: &Hamiltonians,
    target_basis: Option<&CMat>,
    accuracy_state: Option<&floquet_core::spin::CVec>,
    learning: Option<&LearningContext>,
    idx: usize,
    tau: f64,
) -> Result<SweepRecord, floquet_core::Error> {
    let flags = config.diagnostics;
    let step = floquet_operator(&config.params, size, tau, config.variant)?;

    let spectrum = if flags.spacing || flags.pr {
        Some(eigenphases(&step)?)
    } else {
        None
    };
    let spacing = match (&spectrum, flags.spacing) {
        (Some(spec), true) => Some(spacing_ratio(spec)?),
        _ => None,
    };
    let pr = match (&spectrum, target_basis) {
        (Some(spec), Some(basis)) => Some(participation_ratio_in_basis(spec, basis)?),
        _ => None,
    };

    let qbar = match accuracy_state {
        Some(psi0) => {
            let n_t = ((config.total_time / tau).floor() as usize).max(1);
            let trace = simulation_accuracy(&step, &hams.target, psi0, n_t)?;
            Some(trace.long_time_mean())
        }
        None => None,
    };

    let mut orders = Vec::new();
    if let Some(ctx) = learning {
        let seed_tau = derive_seed(config.seed, idx as u64);
        let states = sample_initial_states(size, ctx.n_con, seed_tau)?;
        let max_set = ctx.sets.last().expect("non-empty");
        let m_full = constraint_matrix(&step, &states, max_set, config.total_time)?;

        for (set, lambda_ref) in ctx.sets.iter().zip(&ctx.lambda_rmt) {
            let m_k = m_full.column_prefix(set.len());
            let rec = reconstruct(&m_k)?;

            // analytic Floquet-Magnus coefficients at this tau
            let mut generator = CMat::zeros((size.dim(), size.dim()));
            for (k, term) in ctx.fm_terms.iter().take(usize::from(set.order()) + 1).enumerate() {
                generator = generator + term.mapv(|z| z * c64::new(tau.powi(k as i32), 0.0));
            }
            let projection = project_onto_ansatz(&generator, set)?;
            if projection.relative_residual > floquet_core::magnus::SPAN_TOL {
                return Err(floquet_core::Error::SpanFailure(projection.relative_residual));
            }
            let mut c_fm = projection.coefficients;
            let fm_norm: f64 = c_fm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if fm_norm > 0.0 {
                for z in &mut c_fm {
                    *z /= c64::new(fm_norm, 0.0);
                }
            }

            let distance = aligned_distance(&c_fm, &rec.c_rec)?;
            let aligned = phase_align(&c_fm, &rec.c_rec);

            orders.push(OrderRecord {
                order: set.order(),
                lambda1: rec.lambda1,
                lambda_rmt: *lambda_ref,
                parameter_distance: distance,
                c_rec: aligned.iter().map(|z| [z.re, z.im]).collect(),
                c_fm: c_fm.iter().map(|z| [z.re, z.im]).collect(),
            });
        }
    }

    Ok(SweepRecord {
        tau,
        qbar_e: qbar,
        spacing_ratio: spacing,
        participation_ratio: pr,
        orders,
        error: None,
    })
}
