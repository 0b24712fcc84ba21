//! Drivers for the standard experiments on sphere mesh ladders: convergence,
//! σ sweeps, repeated transfer, detection and great-circle traces.
//!
//! Level `L` pairs an icosphere with `L + 3` subdivisions (10·4^(L+3)+2
//! nodes) with a cubed sphere of `13·2^(L−1)` cells per face edge
//! (6n²+2 nodes), so both meshes of a level have comparable resolution.

use crate::detector::Indicators;
use crate::error::{Error, Result};
use crate::fields::{error_norms, l1_error, to_spherical, AnalyticField, F3_BREAKS, F4_BREAKS, F4_C2_BREAK};
use crate::mesh::{gen_cubed_sphere, gen_icosphere, SurfaceMesh};
use crate::remap::{build_plan, repeated_transfer, Method, RemapConfig, RemapPlan, RepeatOptions, StepRecord};
use crate::wls::WeightKind;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    Icosphere,
    CubedSphere,
}

impl MeshFamily {
    pub fn other(self) -> Self {
        match self {
            MeshFamily::Icosphere => MeshFamily::CubedSphere,
            MeshFamily::CubedSphere => MeshFamily::Icosphere,
        }
    }
}

pub fn icosphere_subdivisions(level: usize) -> usize {
    level + 3
}

pub fn cubed_sphere_cells(level: usize) -> usize {
    13 << (level - 1)
}

pub fn family_mesh(family: MeshFamily, level: usize) -> Result<SurfaceMesh> {
    if !(1..=6).contains(&level) {
        return Err(Error::Config(format!("mesh level {level} not in 1..=6")));
    }
    match family {
        MeshFamily::Icosphere => gen_icosphere(icosphere_subdivisions(level)),
        MeshFamily::CubedSphere => gen_cubed_sphere(cubed_sphere_cells(level)),
    }
}

/// Source and target meshes of a one-way transfer experiment.
pub fn mesh_pair(source: MeshFamily, level: usize) -> Result<(Arc<SurfaceMesh>, Arc<SurfaceMesh>)> {
    Ok((Arc::new(family_mesh(source, level)?), Arc::new(family_mesh(source.other(), level)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelError {
    pub level: usize,
    pub source_nodes: usize,
    pub target_nodes: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub marked_targets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub field: String,
    pub source: MeshFamily,
    pub config: RemapConfig,
    pub levels: Vec<LevelError>,
    /// ℓ² rates between consecutive levels.
    pub rates_l2: Vec<f64>,
    pub rates_linf: Vec<f64>,
}

/// Transfers `field` once and measures the error at the target nodes.
pub fn transfer_error(plan: &RemapPlan, field: &AnalyticField, level: usize) -> Result<LevelError> {
    let f = field.sample(plan.source().nodes());
    let out = plan.apply(&f)?;
    let exact = field.sample(plan.target().nodes());
    let n = error_norms(&out.values, &exact)?;
    Ok(LevelError {
        level,
        source_nodes: plan.source().node_count(),
        target_nodes: plan.target().node_count(),
        l1: l1_error(&out.values, &exact)?,
        l2: n.l2,
        linf: n.linf,
        marked_targets: out.diagnostics.target_marked,
    })
}

pub fn convergence(field: &AnalyticField, config: RemapConfig, source: MeshFamily, levels: &[usize]) -> Result<ConvergenceReport> {
    if levels.len() < 2 || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("convergence needs at least two increasing levels".into()));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &l in levels {
        let (s, t) = mesh_pair(source, l)?;
        let plan = build_plan(s, t, config)?;
        rows.push(transfer_error(&plan, field, l)?);
    }
    let rate = |pick: fn(&LevelError) -> f64| -> Vec<f64> {
        rows.windows(2)
            .map(|w| {
                crate::fields::convergence_rate(pick(&w[0]), w[0].target_nodes, pick(&w[1]), w[1].target_nodes)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    };
    let rates_l2 = rate(|r| r.l2);
    let rates_linf = rate(|r| r.linf);
    Ok(ConvergenceReport { field: field.name().into(), source, config, levels: rows, rates_l2, rates_linf })
}

/// `1.0, 1.1, …, 3.0`.
pub fn default_sigma_grid() -> Vec<f64> {
    (10..=30).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaPoint {
    pub sigma: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSweep {
    pub degree: usize,
    pub level: usize,
    pub points: Vec<SigmaPoint>,
    pub argmin: f64,
    pub min_l2: f64,
    /// Error of the same transfer with inverse-distance weights.
    pub inverse_distance_l2: f64,
    pub v_shaped: bool,
}

/// ℓ² error of smooth degree-`degree` WLS transfer of `field` from the
/// icosphere to the cubed sphere for each σ.
pub fn sweep_sigma(field: &AnalyticField, degree: usize, level: usize, sigmas: &[f64]) -> Result<SigmaSweep> {
    if sigmas.is_empty() {
        return Err(Error::Config("empty σ grid".into()));
    }
    let (s, t) = mesh_pair(MeshFamily::Icosphere, level)?;
    let base = RemapConfig { method: Method::Wls, degree, ..Default::default() };
    let mut points = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let plan = build_plan(s.clone(), t.clone(), RemapConfig { sigma: Some(sigma), ..base })?;
        points.push(SigmaPoint { sigma, l2: transfer_error(&plan, field, level)?.l2 });
    }
    let id = RemapConfig { smooth_weights: WeightKind::InverseDistance, ..base };
    let inverse_distance_l2 = transfer_error(&build_plan(s, t, id)?, field, level)?.l2;
    let best = points.iter().copied().fold(points[0], |a, b| if b.l2 < a.l2 { b } else { a });
    let errs: Vec<f64> = points.iter().map(|p| p.l2).collect();
    Ok(SigmaSweep {
        degree,
        level,
        points,
        argmin: best.sigma,
        min_l2: best.l2,
        inverse_distance_l2,
        v_shaped: is_v_shaped(&errs, 1),
    })
}

/// True if `values` decrease then increase, allowing up to `plateaus`
/// steps that go against the trend.
pub fn is_v_shaped(values: &[f64], plateaus: usize) -> bool {
    let Some(m) = values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i) else {
        return false;
    };
    let against = values[..=m].windows(2).filter(|w| w[1] >= w[0]).count()
        + values[m..].windows(2).filter(|w| w[1] <= w[0]).count();
    against <= plateaus
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatReport {
    pub field: String,
    pub level: usize,
    pub config: RemapConfig,
    pub steps: Vec<StepRecord>,
    /// Round trips and the field on the icosphere after them.
    pub snapshots: Vec<(usize, Vec<f64>)>,
    pub final_values: Vec<f64>,
}

/// Icosphere → cubed sphere → icosphere, `steps` times.
pub fn repeat(field: &AnalyticField, config: RemapConfig, level: usize, steps: usize, snapshots: &[usize]) -> Result<RepeatReport> {
    let (a, b) = mesh_pair(MeshFamily::Icosphere, level)?;
    let ab = build_plan(a.clone(), b.clone(), config)?;
    let ba = build_plan(b, a.clone(), config)?;
    let f0 = field.sample(a.nodes());
    let opts = RepeatOptions { exact: Some(field.clone()), integrals: true, snapshots: snapshots.to_vec() };
    let r = repeated_transfer(&ab, &ba, &f0, steps, &opts)?;
    Ok(RepeatReport {
        field: field.name().into(),
        level,
        config,
        steps: r.steps,
        snapshots: r.snapshots,
        final_values: r.final_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BreakKind {
    Jump,
    Kink,
    Curvature,
}

/// A latitude (or, for f₄, meridian) where the field is not smooth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    /// Colatitude of a latitude break; `None` for the f₄ meridian jump.
    pub theta: Option<f64>,
    pub kind: BreakKind,
}

/// Analytic non-smooth sets of a field.
pub fn breakpoints(field: &AnalyticField) -> Vec<Breakpoint> {
    let lat = |theta, kind| Breakpoint { theta: Some(theta), kind };
    match field {
        AnalyticField::F3 => vec![
            lat(F3_BREAKS[0], BreakKind::Kink),
            lat(F3_BREAKS[1], BreakKind::Jump),
            lat(F3_BREAKS[2], BreakKind::Jump),
            lat(F3_BREAKS[3], BreakKind::Jump),
        ],
        AnalyticField::F4 => vec![
            lat(F4_BREAKS[0], BreakKind::Jump),
            lat(F4_BREAKS[1], BreakKind::Kink),
            lat(F4_BREAKS[2], BreakKind::Kink),
            lat(F4_C2_BREAK, BreakKind::Curvature),
            Breakpoint { theta: None, kind: BreakKind::Jump },
        ],
        _ => Vec::new(),
    }
}

/// Great-circle distance from unit vector `p` to the break set.
pub fn break_distance(b: &Breakpoint, p: [f64; 3]) -> f64 {
    let (theta, _) = to_spherical(crate::vec3::normalize(p)).unwrap_or((0.0, 0.0));
    match b.theta {
        Some(t) => (theta - t).abs(),
        // Meridians φ = 0 and φ = π, where g jumps; f₄ is identically −1000
        // for θ < π/4, so the jump only exists below that cap.
        None => {
            let cap = (F4_BREAKS[0] - theta).max(0.0);
            let to_plane = p[1].abs().clamp(0.0, 1.0).asin();
            to_plane.hypot(cap)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakCoverage {
    pub breakpoint: Breakpoint,
    /// Marked nodes within one local edge length of the break.
    pub marked_within_h: usize,
    /// Smallest distance of a marked node, in units of its local edge
    /// length.
    pub nearest_marked_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub field: String,
    pub family: MeshFamily,
    pub level: usize,
    pub nodes: usize,
    pub marked: usize,
    pub breaks: Vec<BreakCoverage>,
    /// Largest distance, in local edge lengths, from a marked node to the
    /// nearest C⁰/C¹ break (0 without markers).
    pub farthest_marker_h: f64,
    #[serde(skip)]
    pub indicators: Option<Indicators>,
}

pub fn detect(field: &AnalyticField, family: MeshFamily, level: usize) -> Result<DetectionReport> {
    let mesh = family_mesh(family, level)?;
    detect_on(field, &mesh, family, level)
}

pub fn detect_on(field: &AnalyticField, mesh: &SurfaceMesh, family: MeshFamily, level: usize) -> Result<DetectionReport> {
    let det = crate::detector::build_alpha_operator(mesh, Default::default())?;
    let ind = det.detect(mesh, &field.sample(mesh.nodes()))?;
    let marked: Vec<usize> = (0..mesh.node_count()).filter(|&v| ind.markers[v]).collect();
    let breaks = breakpoints(field);
    let coverage = breaks
        .iter()
        .map(|b| {
            let d: Vec<f64> = marked.iter().map(|&v| break_distance(b, mesh.node(v)) / det.h_local[v]).collect();
            BreakCoverage {
                breakpoint: *b,
                marked_within_h: d.iter().filter(|&&x| x <= 1.0).count(),
                nearest_marked_h: d.iter().copied().reduce(f64::min),
            }
        })
        .collect();
    let farthest_marker_h = marked
        .iter()
        .map(|&v| {
            breaks
                .iter()
                .filter(|b| b.kind != BreakKind::Curvature)
                .map(|b| break_distance(b, mesh.node(v)) / det.h_local[v])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(DetectionReport {
        field: field.name().into(),
        family,
        level,
        nodes: mesh.node_count(),
        marked: marked.len(),
        breaks: coverage,
        farthest_marker_h,
        indicators: Some(ind),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub node: usize,
    /// Arc parameter along the circle from the north pole: θ on the `φ`
    /// half, 2π − θ on the opposite half.
    pub s: f64,
    pub theta: f64,
    pub value: f64,
}

/// Nodes within `tol` of the great circle through the poles at azimuth
/// `phi`, ordered along the circle.
pub fn trace(mesh: &SurfaceMesh, values: &[f64], phi: f64, tol: f64) -> Result<Vec<TracePoint>> {
    if values.len() != mesh.node_count() {
        return Err(Error::DimensionMismatch { expected: mesh.node_count(), got: values.len() });
    }
    let normal = [-phi.sin(), phi.cos(), 0.0];
    let dir = [phi.cos(), phi.sin(), 0.0];
    let mut out = Vec::new();
    for (v, &p) in mesh.nodes().iter().enumerate() {
        if crate::vec3::dot(p, normal).abs() > tol {
            continue;
        }
        let theta = p[2].clamp(-1.0, 1.0).acos();
        let s = if crate::vec3::dot(p, dir) >= 0.0 { theta } else { 2.0 * std::f64::consts::PI - theta };
        out.push(TracePoint { node: v, s, theta, value: values[v] });
    }
    out.sort_by(|a, b| a.s.total_cmp(&b.s));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::f3_profile;

    #[test]
    fn level_ladder() {
        assert_eq!(family_mesh(MeshFamily::Icosphere, 1).unwrap().node_count(), 2562);
        assert_eq!(family_mesh(MeshFamily::CubedSphere, 1).unwrap().node_count(), 1016);
        assert_eq!(cubed_sphere_cells(3), 52);
        assert!(matches!(family_mesh(MeshFamily::Icosphere, 0), Err(Error::Config(_))));
    }

    #[test]
    fn v_shape() {
        assert!(is_v_shaped(&[3.0, 2.0, 1.0, 2.0, 3.0], 0));
        assert!(is_v_shaped(&[3.0, 2.0, 2.0, 1.0, 2.0], 1));
        assert!(!is_v_shaped(&[3.0, 1.0, 2.0, 1.5, 3.0], 0));
        assert!(is_v_shaped(&[1.0, 2.0, 3.0], 0));
        assert!(!is_v_shaped(&[], 0));
    }

    #[test]
    fn sigma_grid() {
        let g = default_sigma_grid();
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[6], g[20]), (1.0, 1.6, 3.0));
    }

    #[test]
    fn exact_trace_follows_profile() {
        let m = family_mesh(MeshFamily::Icosphere, 1).unwrap();
        let f = AnalyticField::F3.sample(m.nodes());
        let h = m.metrics().h_global;
        let t = trace(&m, &f, 0.3, 0.5 * h).unwrap();
        assert!(!t.is_empty());
        assert!(t.windows(2).all(|w| w[0].s <= w[1].s));
        for p in &t {
            assert!((p.value - f3_profile(p.theta)).abs() < 1e-12);
        }
        // Monotone non-increasing on the first half.
        let half: Vec<_> = t.iter().filter(|p| p.s <= std::f64::consts::PI).collect();
        assert!(half.windows(2).all(|w| w[1].value <= w[0].value + 1e-12));
    }

    #[test]
    fn break_distances() {
        let b = breakpoints(&AnalyticField::F3)[0];
        let p = [0.87f64.sin(), 0.0, 0.87f64.cos()];
        assert!(break_distance(&b, p) < 1e-12);
        let meridian = Breakpoint { theta: None, kind: BreakKind::Jump };
        assert!(break_distance(&meridian, [1.0, 0.0, 0.0]) < 1e-12);
        assert!((break_distance(&meridian, [0.0, 0.0, 1.0]) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn smooth_fields_unmarked_on_level_one() {
        for f in [AnalyticField::F1, AnalyticField::F2] {
            for fam in [MeshFamily::Icosphere, MeshFamily::CubedSphere] {
                assert_eq!(detect(&f, fam, 1).unwrap().marked, 0);
            }
        }
    }

    #[test]
    fn higher_degree_is_more_accurate() {
        let (s, t) = mesh_pair(MeshFamily::Icosphere, 1).unwrap();
        let e = |p| {
            let cfg = RemapConfig { method: Method::Wls, degree: p, ..Default::default() };
            transfer_error(&build_plan(s.clone(), t.clone(), cfg).unwrap(), &AnalyticField::F1, 1).unwrap().l2
        };
        assert!(e(4) < e(2));
    }
}
