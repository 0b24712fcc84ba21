use super::integrate::{integrate_field, integration_weights, Integrand};
use super::RemapPlan;
use crate::error::{Error, Result};
use crate::fields::{error_norms, l1_error, AnalyticField};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Default)]
pub struct RepeatOptions {
    /// Exact field on mesh A for error measurement; without it only
    /// extrema and integrals are recorded.
    pub exact: Option<AnalyticField>,
    /// Record integrals and conservation errors (needs a sphere mesh).
    pub integrals: bool,
    /// Round trips after which the field on A is kept.
    pub snapshots: Vec<usize>,
}

/// Diagnostics after one A→B→A round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub linf: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub integral: Option<f64>,
    pub conservation_error: Option<f64>,
    pub marked_targets: usize,
    pub limiter_activations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatResult {
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<(usize, Vec<f64>)>,
    pub final_values: Vec<f64>,
}

/// Transfers `f0` from A to B and back `n_steps` times.
pub fn repeated_transfer(ab: &RemapPlan, ba: &RemapPlan, f0: &[f64], n_steps: usize, opts: &RepeatOptions) -> Result<RepeatResult> {
    if n_steps == 0 {
        return Err(Error::Config("at least one round trip is required".into()));
    }
    let mesh_a = ab.source();
    let same = |x: &Arc<crate::mesh::SurfaceMesh>, y: &Arc<crate::mesh::SurfaceMesh>| {
        Arc::ptr_eq(x, y) || x.nodes() == y.nodes()
    };
    if !same(mesh_a, ba.target()) || !same(ab.target(), ba.source()) {
        return Err(Error::Config("plans do not share meshes".into()));
    }
    let exact = opts.exact.as_ref().map(|f| f.sample(mesh_a.nodes()));
    let integration = if opts.integrals {
        let w = integration_weights(mesh_a, ab.config().degree)?;
        let reference = match &opts.exact {
            Some(f) => Some(integrate_field(mesh_a, Integrand::Analytic(f))?),
            None => None,
        };
        Some((w, reference))
    } else {
        None
    };
    let mut f = f0.to_vec();
    let mut steps = Vec::with_capacity(n_steps);
    let mut snapshots = Vec::new();
    for step in 1..=n_steps {
        let there = ab.apply(&f).map_err(|e| e.at_step(step))?;
        let back = ba.apply(&there.values).map_err(|e| e.at_step(step))?;
        f = back.values;
        let (min, max) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let (l1, norms) = match &exact {
            Some(e) => (Some(l1_error(&f, e)?), Some(error_norms(&f, e)?)),
            None => (None, None),
        };
        let integral = integration.as_ref().map(|(w, _)| w.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>());
        let conservation_error = match (&integration, integral) {
            (Some((_, Some(r))), Some(i)) => Some((r - i).abs()),
            _ => None,
        };
        steps.push(StepRecord {
            step,
            l1,
            l2: norms.map(|n| n.l2),
            linf: norms.map(|n| n.linf),
            min,
            max,
            integral,
            conservation_error,
            marked_targets: there.diagnostics.target_marked + back.diagnostics.target_marked,
            limiter_activations: there.diagnostics.limiter_activations + back.diagnostics.limiter_activations,
        });
        if opts.snapshots.contains(&step) {
            snapshots.push((step, f.clone()));
        }
    }
    Ok(RepeatResult { steps, snapshots, final_values: f })
}
