use super::frame::LocalFrame;
use crate::error::{Error, Result};
use crate::mesh::{ElementLocation, RingSize, SurfaceMesh};
use crate::vec3::{self, Vec3};
use std::collections::HashSet;

/// Why a stencil is being built; selects the starting ring size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Smooth,
    Eno,
    Detector,
}

impl Purpose {
    /// Starting ring for a degree-`p` fit: `⌊1.5p⌋/2` for smooth fits,
    /// at least 3 for ENO fits, 1.5 for the detector's node fittings.
    pub fn ring(self, p: usize) -> RingSize {
        match self {
            Purpose::Smooth => RingSize::from_halves(((3 * p / 2) as u32).max(2)).expect("positive ring"),
            Purpose::Eno => RingSize::from_halves((2 * p as u32 + 1).max(6)).expect("positive ring"),
            Purpose::Detector => RingSize::from_halves(3).expect("positive ring"),
        }
    }
}

/// Number of monomials of total degree ≤ `p` in two variables.
pub fn monomial_count(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// `⌈0.75(p+1)(p+2)⌉`, i.e. 1.5× the monomial count.
pub fn min_stencil_size(p: usize) -> usize {
    (3 * (p + 1) * (p + 2)).div_ceil(4)
}

/// Source nodes around one evaluation point, in that point's tangent frame.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub frame: LocalFrame,
    pub node_ids: Vec<usize>,
    pub uv: Vec<[f64; 2]>,
    /// `‖uv_j‖`
    pub r: Vec<f64>,
    /// `max(0, m_j · m₀)`
    pub gamma_plus: Vec<f64>,
    /// Mean uv edge length around the seed nodes.
    pub h_bar: f64,
    /// The `min_size`-th smallest distance (the largest one if fewer nodes).
    pub radius: f64,
    pub ring: RingSize,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Stencil over explicit points (mainly for tests and planar fits).
    pub fn from_points(
        frame: LocalFrame,
        node_ids: Vec<usize>,
        uv: Vec<[f64; 2]>,
        gamma_plus: Vec<f64>,
        h_bar: f64,
        min_size: usize,
    ) -> Result<Self> {
        if uv.len() != node_ids.len() || gamma_plus.len() != node_ids.len() {
            return Err(Error::DimensionMismatch { expected: node_ids.len(), got: uv.len().min(gamma_plus.len()) });
        }
        let r: Vec<f64> = uv.iter().map(|q| q[0].hypot(q[1])).collect();
        let radius = kth_smallest(&r, min_size);
        Ok(Stencil { frame, node_ids, uv, r, gamma_plus, h_bar, radius, ring: RingSize::ONE })
    }
}

fn kth_smallest(r: &[f64], k: usize) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    let mut s = r.to_vec();
    s.sort_by(f64::total_cmp);
    s[k.clamp(1, s.len()) - 1]
}

/// Stencil for a point located in the source mesh: the union of `k`-rings of
/// the containing element's nodes, grown by half rings until it holds at
/// least [`min_stencil_size`]`(p)` nodes.
pub fn build_stencil(
    mesh: &SurfaceMesh,
    point: Vec3,
    loc: &ElementLocation,
    p: usize,
    purpose: Purpose,
) -> Result<Stencil> {
    let frame = LocalFrame::new(point, mesh.surface_normal(point, loc))?;
    let seeds = mesh.element(loc.element).nodes().to_vec();
    stencil_from_seeds(mesh, frame, &seeds, purpose.ring(p), min_stencil_size(p))
}

/// Stencil of the `k`-ring union around `seeds`, in `frame`.
pub fn stencil_from_seeds(
    mesh: &SurfaceMesh,
    frame: LocalFrame,
    seeds: &[usize],
    ring: RingSize,
    min_size: usize,
) -> Result<Stencil> {
    let mut ring = ring;
    let mut nodes = mesh.ring_union(seeds, ring)?;
    let mut stalled = 0;
    while nodes.len() < min_size {
        let grown = mesh.ring_union(seeds, ring.grow())?;
        ring = ring.grow();
        stalled = if grown.len() == nodes.len() { stalled + 1 } else { 0 };
        nodes = grown;
        // Two half steps without growth: the component is exhausted.
        if stalled >= 2 {
            return Err(Error::InsufficientStencil { required: min_size, available: nodes.len() });
        }
    }
    let uv: Vec<[f64; 2]> = nodes.iter().map(|&v| frame.to_uv(mesh.node(v))).collect();
    let gamma_plus = nodes
        .iter()
        .map(|&v| vec3::dot(mesh.normal(v), frame.normal).max(0.0))
        .collect();
    let h_bar = local_edge_length(mesh, &frame, seeds);
    let mut s = Stencil::from_points(frame, nodes, uv, gamma_plus, h_bar, min_size)?;
    s.ring = ring;
    Ok(s)
}

/// Mean uv length of the distinct edges of elements incident to `seeds`.
pub fn local_edge_length(mesh: &SurfaceMesh, frame: &LocalFrame, seeds: &[usize]) -> f64 {
    let mut seen = HashSet::new();
    let (mut sum, mut count) = (0.0, 0usize);
    for &s in seeds {
        for &e in mesh.node_elements(s) {
            let el = mesh.element(e);
            for i in 0..el.arity() {
                let (a, b) = el.edge(i);
                if seen.insert((a.min(b), a.max(b))) {
                    let (pa, pb) = (frame.to_uv(mesh.node(a)), frame.to_uv(mesh.node(b)));
                    sum += (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
                    count += 1;
                }
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}
