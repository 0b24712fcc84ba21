//! Node-to-node transfer between surface meshes: the precomputed smooth
//! operator, WLS-ENO rows for detected discontinuities, the element limiter,
//! repeated transfer, and surface integration.

mod integrate;
mod repeat;

pub use integrate::{conservation_error, integrate_field, integration_weights, spherical_triangle_area, Integrand};
pub use repeat::{repeated_transfer, RepeatOptions, RepeatResult, StepRecord};

use crate::detector::{build_alpha_operator, transfer_markers, Detector, DetectorConfig, Indicators};
use crate::error::{Error, Result};
use crate::mesh::{ElementLocation, SurfaceMesh};
use crate::numerics::SparseOperator;
use crate::par;
use crate::wls::{build_stencil, transfer_row_from, EnoContext, Purpose, Stencil, WeightKind, WeightScheme, WlsConfig};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

pub const PLAN_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Degree-p WLS in smooth regions, degree-q WLS-ENO plus limiter at
    /// detected discontinuities.
    WlsEnor,
    /// Degree-p WLS everywhere.
    Wls,
    /// Linear/bilinear interpolation in the containing element.
    Linear,
}

impl Method {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "wls-enor" => Ok(Method::WlsEnor),
            "wls" => Ok(Method::Wls),
            "linear" => Ok(Method::Linear),
            _ => Err(Error::Config(format!("unknown method `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::WlsEnor => "wls-enor",
            Method::Wls => "wls",
            Method::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemapConfig {
    pub method: Method,
    /// Smooth-region degree p.
    pub degree: usize,
    /// WLS-ENO degree q.
    pub eno_degree: usize,
    pub smooth_weights: WeightKind,
    /// Radius ratio; the tuned default for `degree` when absent.
    pub sigma: Option<f64>,
    pub cond_threshold: f64,
    pub max_enlargements: u32,
    pub detector: DetectorConfig,
    /// Clamp marked targets to their containing element's nodal range.
    pub limiter: bool,
}

impl Default for RemapConfig {
    fn default() -> Self {
        RemapConfig {
            method: Method::WlsEnor,
            degree: 4,
            eno_degree: 2,
            smooth_weights: WeightKind::ScaledBuhmann,
            sigma: None,
            cond_threshold: 1e8,
            max_enlargements: 3,
            detector: DetectorConfig::default(),
            limiter: true,
        }
    }
}

impl RemapConfig {
    pub fn with_method(method: Method) -> Self {
        RemapConfig { method, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if ![2, 3, 4, 6].contains(&self.degree) && self.method != Method::Linear {
            return Err(Error::Config(format!("degree {} not in {{2, 3, 4, 6}}", self.degree)));
        }
        if !(1..=3).contains(&self.eno_degree) {
            return Err(Error::Config(format!("ENO degree {} not in {{1, 2, 3}}", self.eno_degree)));
        }
        if self.smooth_weights == WeightKind::WlsEno {
            return Err(Error::Config("WLS-ENO weights are data dependent and cannot be precomputed".into()));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("sigma must be positive, got {s}")));
            }
        }
        if !(self.cond_threshold > 1.0) {
            return Err(Error::Config("condition threshold must exceed 1".into()));
        }
        Ok(())
    }

    pub fn smooth_wls(&self) -> WlsConfig {
        let sigma = self.sigma.unwrap_or_else(|| crate::wls::default_sigma(self.degree));
        WlsConfig {
            degree: self.degree,
            scheme: WeightScheme::new(self.smooth_weights, sigma),
            cond_threshold: self.cond_threshold,
            max_enlargements: self.max_enlargements,
        }
    }

    pub fn eno_wls(&self) -> WlsConfig {
        WlsConfig {
            degree: self.eno_degree,
            scheme: WeightScheme::eno(),
            cond_threshold: self.cond_threshold,
            max_enlargements: self.max_enlargements,
        }
    }
}

/// Serializable content of a plan: operators, per-target records and the
/// detector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanData {
    pub format_version: u32,
    pub config: RemapConfig,
    pub source_nodes: usize,
    pub target_nodes: usize,
    /// Degree-p WLS rows (empty for the linear method).
    pub smooth: SparseOperator,
    /// Interpolation rows in the containing element.
    pub linear: SparseOperator,
    pub locations: Vec<ElementLocation>,
    /// Per target: nodes of its smooth stencil, as CSR.
    pub stencil_offsets: Vec<usize>,
    pub stencil_nodes: Vec<usize>,
    pub detector: Option<Detector>,
    pub dropped_rows: usize,
    pub max_cond: f64,
}

/// A transfer from one mesh to another, built once and applied to many
/// fields.
#[derive(Debug)]
pub struct RemapPlan {
    source: Arc<SurfaceMesh>,
    target: Arc<SurfaceMesh>,
    data: PlanData,
    eno_stencils: Vec<OnceLock<Stencil>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RemapDiagnostics {
    pub source_marked: usize,
    pub target_marked: usize,
    pub eno_rows: usize,
    pub limiter_activations: usize,
    /// Smooth rows whose fit dropped columns.
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemapResult {
    pub values: Vec<f64>,
    pub target_markers: Vec<bool>,
    pub limiter_active: Vec<bool>,
    pub indicators: Option<Indicators>,
    pub diagnostics: RemapDiagnostics,
}

/// Builds the transfer from `source` to `target`.
pub fn build_plan(source: Arc<SurfaceMesh>, target: Arc<SurfaceMesh>, config: RemapConfig) -> Result<RemapPlan> {
    config.validate()?;
    let wls = config.smooth_wls();
    let with_wls = config.method != Method::Linear;
    struct Row {
        loc: ElementLocation,
        linear: Vec<(usize, f64)>,
        smooth: Vec<(usize, f64)>,
        stencil: Vec<usize>,
        dropped: bool,
        cond: f64,
    }
    let rows = par::try_map_range(target.node_count(), |i| -> Result<Row> {
        let x = target.node(i);
        let loc = source.locate_element(x).map_err(|e| e.at_target(i))?;
        let el = source.element(loc.element);
        let (w, n) = loc.coords.shape_functions();
        let linear = (0..n).map(|k| (el.nodes()[k], w[k])).collect();
        if !with_wls {
            return Ok(Row { loc, linear, smooth: Vec::new(), stencil: Vec::new(), dropped: false, cond: 1.0 });
        }
        let stencil = build_stencil(&source, x, &loc, wls.degree, Purpose::Smooth).map_err(|e| e.at_target(i))?;
        let row = transfer_row_from(&source, &stencil, el.nodes(), &wls, None).map_err(|e| e.at_target(i))?;
        Ok(Row {
            loc,
            linear,
            smooth: row.entries,
            stencil: stencil.node_ids,
            dropped: row.dropped_columns > 0,
            cond: row.cond_estimate,
        })
    })?;
    let detector = if config.method == Method::WlsEnor {
        Some(build_alpha_operator(&source, config.detector)?)
    } else {
        None
    };
    let mut locations = Vec::with_capacity(rows.len());
    let mut linear = Vec::with_capacity(rows.len());
    let mut smooth = Vec::with_capacity(rows.len());
    let mut stencil_offsets = vec![0];
    let mut stencil_nodes = Vec::new();
    let (mut dropped_rows, mut max_cond) = (0, 0.0f64);
    for r in rows {
        locations.push(r.loc);
        linear.push(r.linear);
        smooth.push(r.smooth);
        stencil_nodes.extend(r.stencil);
        stencil_offsets.push(stencil_nodes.len());
        dropped_rows += r.dropped as usize;
        max_cond = max_cond.max(r.cond);
    }
    let data = PlanData {
        format_version: PLAN_FORMAT_VERSION,
        config,
        source_nodes: source.node_count(),
        target_nodes: target.node_count(),
        smooth: SparseOperator::from_rows(source.node_count(), smooth)?,
        linear: SparseOperator::from_rows(source.node_count(), linear)?,
        locations,
        stencil_offsets,
        stencil_nodes,
        detector,
        dropped_rows,
        max_cond,
    };
    RemapPlan::from_data(source, target, data)
}

impl RemapPlan {
    /// Reassembles a plan from stored data and the meshes it was built for.
    pub fn from_data(source: Arc<SurfaceMesh>, target: Arc<SurfaceMesh>, data: PlanData) -> Result<Self> {
        if data.format_version != PLAN_FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported plan format version {}", data.format_version)));
        }
        let (ns, nt) = (source.node_count(), target.node_count());
        let consistent = data.source_nodes == ns
            && data.target_nodes == nt
            && data.linear.rows() == nt
            && data.smooth.rows() == nt
            && data.locations.len() == nt
            && data.stencil_offsets.len() == nt + 1
            && data.detector.as_ref().is_none_or(|d| d.alpha_op.cols() == ns && d.alpha_op.rows() == source.element_count());
        if !consistent {
            return Err(Error::DimensionMismatch { expected: nt, got: data.target_nodes });
        }
        data.config.validate()?;
        let eno_stencils = (0..nt).map(|_| OnceLock::new()).collect();
        Ok(RemapPlan { source, target, data, eno_stencils })
    }

    pub fn data(&self) -> &PlanData {
        &self.data
    }

    pub fn config(&self) -> &RemapConfig {
        &self.data.config
    }

    pub fn source(&self) -> &Arc<SurfaceMesh> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SurfaceMesh> {
        &self.target
    }

    pub fn smooth_operator(&self) -> &SparseOperator {
        &self.data.smooth
    }

    pub fn linear_operator(&self) -> &SparseOperator {
        &self.data.linear
    }

    pub fn detector(&self) -> Option<&Detector> {
        self.data.detector.as_ref()
    }

    /// Source nodes of target `i`'s smooth stencil.
    pub fn target_stencil(&self, i: usize) -> &[usize] {
        &self.data.stencil_nodes[self.data.stencil_offsets[i]..self.data.stencil_offsets[i + 1]]
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.data).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_json(source: Arc<SurfaceMesh>, target: Arc<SurfaceMesh>, json: &str) -> Result<Self> {
        let data: PlanData = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_data(source, target, data)
    }

    /// Transfers nodal `values` from the source to the target mesh.
    pub fn apply(&self, values: &[f64]) -> Result<RemapResult> {
        let (ns, nt) = (self.data.source_nodes, self.data.target_nodes);
        if values.len() != ns {
            return Err(Error::DimensionMismatch { expected: ns, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut diagnostics = RemapDiagnostics { dropped_rows: self.data.dropped_rows, ..Default::default() };
        let plain = |op: &SparseOperator, diagnostics| -> Result<RemapResult> {
            Ok(RemapResult {
                values: op.spmv(values)?,
                target_markers: vec![false; nt],
                limiter_active: vec![false; nt],
                indicators: None,
                diagnostics,
            })
        };
        let detector = match self.data.config.method {
            Method::Linear => return plain(&self.data.linear, diagnostics),
            Method::Wls => return plain(&self.data.smooth, diagnostics),
            Method::WlsEnor => self.data.detector.as_ref().ok_or(Error::MissingContext)?,
        };
        let ind = detector.detect(&self.source, values)?;
        diagnostics.source_marked = ind.marked_count();
        if diagnostics.source_marked == 0 {
            let mut r = plain(&self.data.smooth, diagnostics)?;
            r.indicators = Some(ind);
            return Ok(r);
        }
        let markers = transfer_markers(&ind.markers, (0..nt).map(|i| self.target_stencil(i)));
        let alpha_max = ind.node_alpha_max(&self.source);
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let mid = 0.5 * (lo + hi);
        let eno = self.data.config.eno_wls();
        let limiter = self.data.config.limiter;
        let out = par::try_map_range(nt, |i| -> Result<(f64, bool)> {
            if !markers[i] {
                return Ok((self.data.smooth.row_dot(i, values), false));
            }
            let loc = &self.data.locations[i];
            let g0 = self.data.linear.row_dot(i, values);
            let ctx = EnoContext { values, g0, delta_f_global: ind.delta_f_global, alpha_max: &alpha_max };
            let stencil = self.eno_stencil(i)?;
            let seeds = self.source.element(loc.element).nodes();
            let row = transfer_row_from(&self.source, stencil, seeds, &eno, Some(&ctx)).map_err(|e| e.at_target(i))?;
            // Rows reproduce constants, so evaluating on the centered field
            // and shifting back is exact in exact arithmetic and keeps large
            // offsets from swamping the result.
            let v = mid + row.entries.iter().map(|&(j, w)| w * (values[j] - mid)).sum::<f64>();
            if !limiter {
                return Ok((v, false));
            }
            let (a, b) = seeds.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &j| {
                (a.min(values[j]), b.max(values[j]))
            });
            let c = v.clamp(a, b);
            Ok((c, c != v))
        })?;
        let (vals, limited): (Vec<f64>, Vec<bool>) = out.into_iter().unzip();
        diagnostics.target_marked = markers.iter().filter(|&&m| m).count();
        diagnostics.eno_rows = diagnostics.target_marked;
        diagnostics.limiter_activations = limited.iter().filter(|&&l| l).count();
        Ok(RemapResult { values: vals, target_markers: markers, limiter_active: limited, indicators: Some(ind), diagnostics })
    }

    fn eno_stencil(&self, i: usize) -> Result<&Stencil> {
        if let Some(s) = self.eno_stencils[i].get() {
            return Ok(s);
        }
        let x = self.target.node(i);
        let s = build_stencil(&self.source, x, &self.data.locations[i], self.data.config.eno_degree, Purpose::Eno)
            .map_err(|e| e.at_target(i))?;
        Ok(self.eno_stencils[i].get_or_init(|| s))
    }
}

/// Linear (triangles) or bilinear (quads) interpolation of `values` at every
/// target node.
pub fn linear_interp_remap(source: &SurfaceMesh, target: &SurfaceMesh, values: &[f64]) -> Result<Vec<f64>> {
    if values.len() != source.node_count() {
        return Err(Error::DimensionMismatch { expected: source.node_count(), got: values.len() });
    }
    par::try_map_range(target.node_count(), |i| {
        let loc = source.locate_element(target.node(i)).map_err(|e| e.at_target(i))?;
        Ok(source.interpolate(&loc, values))
    })
}
