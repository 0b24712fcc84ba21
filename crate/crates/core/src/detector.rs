//! Discontinuity detection on the source mesh.
//!
//! Element indicators `α_e` compare a quadratic fit average against linear
//! interpolation at the element center; node indicators `β_v` measure the
//! sign variation of the incident `α`; nodes pass a dual threshold on both.

use crate::error::{Error, Result};
use crate::mesh::SurfaceMesh;
use crate::numerics::SparseOperator;
use crate::par;
use crate::wls::{conditioned_fit, stencil_from_seeds, LocalFrame, WeightScheme, WlsConfig};
use crate::mesh::RingSize;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub kappa: f64,
    pub c_local: f64,
    pub c_global: f64,
    pub eps_beta: f64,
    /// Ring of the node-centered quadratic fittings.
    pub ring: f64,
    pub degree: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { kappa: 0.3, c_local: 0.5, c_global: 0.05, eps_beta: 1e-3, ring: 1.5, degree: 2 }
    }
}

/// Field-independent detector data for one source mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Detector {
    pub config: DetectorConfig,
    /// Elements × nodes; row `e` applied to nodal values gives `α_e`.
    pub alpha_op: SparseOperator,
    /// Per node: mean uv edge length over incident elements.
    pub h_local: Vec<f64>,
    /// Per node: the fitting stencil, as a CSR list of node ids.
    nbhd_offsets: Vec<usize>,
    nbhd_nodes: Vec<usize>,
    pub h_global: f64,
}

/// Builds the `α` operator and the per-node neighborhoods.
pub fn build_alpha_operator(mesh: &SurfaceMesh, config: DetectorConfig) -> Result<Detector> {
    let ring = RingSize::new(config.ring)?;
    let cfg = WlsConfig::new(config.degree, WeightScheme::inverse_distance());
    let min = crate::wls::min_stencil_size(config.degree);
    // Per node: its fit's value at each incident element's center.
    let per_node = par::try_map_range(mesh.node_count(), |v| -> Result<_> {
        let frame = LocalFrame::new(mesh.node(v), mesh.normal(v))?;
        let (stencil, fit) = conditioned_fit(&cfg, None, |attempt| {
            let mut k = ring;
            for _ in 0..attempt {
                k = k.grow();
            }
            stencil_from_seeds(mesh, frame, &[v], k, min)
        })
        .map_err(|e| e.at_target(v))?;
        let mut evals = Vec::with_capacity(mesh.node_elements(v).len());
        for &e in mesh.node_elements(v) {
            let c = frame.to_uv(mesh.element_center(e));
            evals.push((e, fit.functional_at(c)?));
        }
        Ok((stencil.h_bar, stencil.node_ids, evals))
    })?;

    let mut rows: Vec<Vec<(usize, f64)>> = mesh
        .elements()
        .iter()
        .map(|el| {
            let w = -1.0 / el.arity() as f64;
            el.nodes().iter().map(|&v| (v, w)).collect()
        })
        .collect();
    let mut h_local = Vec::with_capacity(mesh.node_count());
    let mut nbhd_offsets = vec![0];
    let mut nbhd_nodes = Vec::new();
    for (h, nodes, evals) in per_node {
        h_local.push(h);
        nbhd_nodes.extend(nodes);
        nbhd_offsets.push(nbhd_nodes.len());
        for (e, functional) in evals {
            let w = 1.0 / mesh.element(e).arity() as f64;
            rows[e].extend(functional.into_iter().map(|(j, c)| (j, w * c)));
        }
    }
    let alpha_op = SparseOperator::from_rows(mesh.node_count(), rows)?;
    Ok(Detector {
        config,
        alpha_op,
        h_local,
        nbhd_offsets,
        nbhd_nodes,
        h_global: mesh.metrics().h_global,
    })
}

impl Detector {
    /// Source nodes of node `v`'s fitting stencil (including `v`).
    pub fn neighborhood(&self, v: usize) -> &[usize] {
        &self.nbhd_nodes[self.nbhd_offsets[v]..self.nbhd_offsets[v + 1]]
    }

    /// Runs the full detection on nodal `values`.
    pub fn detect(&self, mesh: &SurfaceMesh, values: &[f64]) -> Result<Indicators> {
        if values.len() != mesh.node_count() {
            return Err(Error::DimensionMismatch { expected: mesh.node_count(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (lo, hi) = range(values.iter().copied());
        let delta_f_global = hi - lo;
        // α annihilates constants; centering reduces cancellation for
        // fields with a large offset.
        let mid = 0.5 * (lo + hi);
        let centered: Vec<f64> = values.iter().map(|v| v - mid).collect();
        let alpha = self.alpha_op.spmv(&centered)?;
        let beta = compute_beta(mesh, &alpha, delta_f_global, self.h_global, self.config.eps_beta);
        let delta_f_local: Vec<f64> = (0..mesh.node_count())
            .map(|v| {
                let (a, b) = range(self.neighborhood(v).iter().map(|&j| values[j]));
                b - a
            })
            .collect();
        let tau: Vec<f64> = (0..mesh.node_count())
            .map(|v| {
                dual_tau(&self.config, delta_f_local[v], self.h_local[v], delta_f_global, self.h_global)
            })
            .collect();
        let markers = dual_threshold(mesh, &alpha, &beta, &tau, self.config.kappa);
        Ok(Indicators { alpha, beta, tau, delta_f_global, delta_f_local, markers })
    }
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)))
}

/// Everything computed from one field on the source mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub tau: Vec<f64>,
    pub delta_f_global: f64,
    pub delta_f_local: Vec<f64>,
    /// Source-node markers.
    pub markers: Vec<bool>,
}

impl Indicators {
    /// Largest `|α_e|` over the elements incident to each node.
    pub fn node_alpha_max(&self, mesh: &SurfaceMesh) -> Vec<f64> {
        (0..mesh.node_count())
            .map(|v| mesh.node_elements(v).iter().fold(0.0f64, |a, &e| a.max(self.alpha[e].abs())))
            .collect()
    }

    pub fn marked_count(&self) -> usize {
        self.markers.iter().filter(|&&m| m).count()
    }
}

/// `β_v = Σ|α_e − ᾱ| / (|Σα_e| + ε_β·δf_g·h_g² + realmin)` over elements
/// incident to `v`.
pub fn compute_beta(mesh: &SurfaceMesh, alpha: &[f64], delta_f_global: f64, h_global: f64, eps_beta: f64) -> Vec<f64> {
    let guard = eps_beta * delta_f_global * h_global * h_global + f64::MIN_POSITIVE;
    (0..mesh.node_count())
        .map(|v| beta_of(mesh.node_elements(v).iter().map(|&e| alpha[e]), guard))
        .collect()
}

/// `β` of one node from its incident `α` values and the additive safeguard.
pub fn beta_of(alphas: impl Iterator<Item = f64> + Clone, guard: f64) -> f64 {
    let (sum, k) = alphas.clone().fold((0.0, 0usize), |(s, k), a| (s + a, k + 1));
    if k == 0 {
        return 0.0;
    }
    let mean = sum / k as f64;
    let numer: f64 = alphas.map(|a| (a - mean).abs()).sum();
    numer / (sum.abs() + guard)
}

/// `τ = max(C_ℓ·δf_ℓ·h_ℓ^½, C_g·δf_g·h_g^{3/2})`.
pub fn dual_tau(cfg: &DetectorConfig, df_local: f64, h_local: f64, df_global: f64, h_global: f64) -> f64 {
    (cfg.c_local * df_local * h_local.sqrt()).max(cfg.c_global * df_global * h_global.powf(1.5))
}

/// A node is marked when `β_v > κ` and an incident element has `|α_e| > τ_v`.
pub fn dual_threshold(mesh: &SurfaceMesh, alpha: &[f64], beta: &[f64], tau: &[f64], kappa: f64) -> Vec<bool> {
    (0..mesh.node_count())
        .map(|v| beta[v] > kappa && mesh.node_elements(v).iter().any(|&e| alpha[e].abs() > tau[v]))
        .collect()
}

/// A target node is marked when any source node of its stencil is marked.
pub fn transfer_markers<'a>(source_markers: &[bool], stencils: impl Iterator<Item = &'a [usize]>) -> Vec<bool> {
    stencils.map(|s| s.iter().any(|&j| source_markers[j])).collect()
}

/// Writes per-element `α` as CSV.
pub fn write_element_csv<W: Write>(mut w: W, ind: &Indicators) -> Result<()> {
    writeln!(w, "element,alpha")?;
    for (e, a) in ind.alpha.iter().enumerate() {
        writeln!(w, "{e},{a:e}")?;
    }
    Ok(())
}

/// Writes per-node `β`, thresholds and markers as CSV.
pub fn write_node_csv<W: Write>(mut w: W, det: &Detector, ind: &Indicators) -> Result<()> {
    writeln!(w, "node,beta,tau,delta_f_local,h_local,marked")?;
    for v in 0..ind.beta.len() {
        writeln!(
            w,
            "{v},{:e},{:e},{:e},{:e},{}",
            ind.beta[v], ind.tau[v], ind.delta_f_local[v], det.h_local[v], ind.markers[v] as u8
        )?;
    }
    Ok(())
}
