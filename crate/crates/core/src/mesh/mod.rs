//! Discrete surfaces made of triangles and quadrilaterals.
//!
//! A [`SurfaceMesh`] owns node coordinates, element connectivity, node normals
//! and an array-based half-edge structure. It is immutable once built, so all
//! queries (rings, point location) can run concurrently.

mod generate;
mod halfedge;
pub mod io;
mod locate;
mod ring;

pub use generate::{gen_cubed_sphere, gen_icosphere, gen_planar_grid, ElementKind};
pub use halfedge::HalfEdges;
pub use locate::{ElementLocation, NaturalCoords, LOCATE_TOL};
pub use ring::RingSize;

use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};
use locate::Locator;
use serde::{Deserialize, Serialize};

/// Geometry the mesh discretizes. Sphere meshes live on the unit sphere and
/// use radial projection; planar meshes use orthogonal projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Sphere,
    Planar,
}

/// A triangle or quadrilateral, nodes in counter-clockwise order seen from
/// the outward normal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Element {
    nodes: [usize; 4],
    arity: u8,
}

impl Element {
    pub fn triangle(a: usize, b: usize, c: usize) -> Self {
        Element { nodes: [a, b, c, usize::MAX], arity: 3 }
    }

    pub fn quad(a: usize, b: usize, c: usize, d: usize) -> Self {
        Element { nodes: [a, b, c, d], arity: 4 }
    }

    pub fn from_slice(nodes: &[usize]) -> Result<Self> {
        match *nodes {
            [a, b, c] => Ok(Self::triangle(a, b, c)),
            [a, b, c, d] => Ok(Self::quad(a, b, c, d)),
            _ => Err(Error::InvalidMesh(format!("element with {} nodes", nodes.len()))),
        }
    }

    #[inline]
    pub fn nodes(&self) -> &[usize] {
        &self.nodes[..self.arity as usize]
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    #[inline]
    pub fn is_quad(&self) -> bool {
        self.arity == 4
    }

    /// Edge `i` as (from, to).
    #[inline]
    pub fn edge(&self, i: usize) -> (usize, usize) {
        let n = self.arity();
        (self.nodes[i], self.nodes[(i + 1) % n])
    }
}

/// Global size measures of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshMetrics {
    /// Mean chord length over unique edges.
    pub h_global: f64,
    pub node_count: usize,
    pub element_count: usize,
    pub edge_count: usize,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    kind: SurfaceKind,
    nodes: Vec<Vec3>,
    elements: Vec<Element>,
    normals: Vec<Vec3>,
    topo: HalfEdges,
    locator: Locator,
    metrics: MeshMetrics,
}

impl SurfaceMesh {
    /// Builds a mesh, validating indices and orientation and computing the
    /// half-edge structure, node normals and the point-location index.
    pub fn new(kind: SurfaceKind, nodes: Vec<Vec3>, elements: Vec<Element>) -> Result<Self> {
        if nodes.is_empty() || elements.is_empty() {
            return Err(Error::InvalidMesh("mesh has no nodes or no elements".into()));
        }
        if nodes.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(Error::NonFinite);
        }
        for (e, el) in elements.iter().enumerate() {
            let ns = el.nodes();
            if let Some(&bad) = ns.iter().find(|&&v| v >= nodes.len()) {
                return Err(Error::InvalidMesh(format!("element {e} references node {bad}")));
            }
            for i in 0..ns.len() {
                for j in i + 1..ns.len() {
                    if ns[i] == ns[j] {
                        return Err(Error::InvalidMesh(format!("element {e} repeats node {}", ns[i])));
                    }
                }
            }
        }
        let topo = HalfEdges::build(nodes.len(), &elements)?;
        let normals = match kind {
            SurfaceKind::Sphere => nodes.iter().map(|&p| vec3::normalize(p)).collect(),
            SurfaceKind::Planar => area_weighted_normals(&nodes, &elements, &topo),
        };
        let (h_sum, edge_count) = topo
            .unique_edges()
            .map(|(a, b)| vec3::distance(nodes[a], nodes[b]))
            .fold((0.0, 0usize), |(s, n), l| (s + l, n + 1));
        let metrics = MeshMetrics {
            h_global: h_sum / edge_count as f64,
            node_count: nodes.len(),
            element_count: elements.len(),
            edge_count,
        };
        let locator = Locator::build(kind, &nodes, &elements);
        Ok(SurfaceMesh { kind, nodes, elements, normals, topo, locator, metrics })
    }

    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> Vec3 {
        self.nodes[v]
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &Element {
        &self.elements[e]
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn normal(&self, v: usize) -> Vec3 {
        self.normals[v]
    }

    pub fn half_edges(&self) -> &HalfEdges {
        &self.topo
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn metrics(&self) -> MeshMetrics {
        self.metrics
    }

    /// True when every edge is shared by exactly two elements.
    pub fn is_closed(&self) -> bool {
        self.topo.is_closed()
    }

    /// Elements incident on node `v`, sorted by index.
    pub fn node_elements(&self, v: usize) -> &[usize] {
        self.topo.node_elements(v)
    }

    /// Nodes sharing an element with `v` (excluding `v`), sorted by index.
    pub fn node_neighbors(&self, v: usize) -> &[usize] {
        self.topo.node_neighbors(v)
    }

    /// Arithmetic mean of the element's nodes, projected to the surface.
    pub fn element_center(&self, e: usize) -> Vec3 {
        let c = vec3::centroid(self.elements[e].nodes().iter().map(|&v| self.nodes[v]));
        self.project_to_surface(c)
    }

    /// Radial projection onto the unit sphere for sphere meshes; identity
    /// otherwise.
    pub fn project_to_surface(&self, p: Vec3) -> Vec3 {
        match self.kind {
            SurfaceKind::Sphere => vec3::normalize(p),
            SurfaceKind::Planar => p,
        }
    }

    /// Normal of the underlying surface at a point located in `loc`.
    ///
    /// Exact (radial) on spheres; interpolated from node normals elsewhere.
    pub fn surface_normal(&self, p: Vec3, loc: &ElementLocation) -> Vec3 {
        match self.kind {
            SurfaceKind::Sphere => vec3::normalize(p),
            SurfaceKind::Planar => {
                let el = &self.elements[loc.element];
                let (w, n) = loc.coords.shape_functions();
                let mut m = [0.0; 3];
                for i in 0..n {
                    m = vec3::add(m, vec3::scale(self.normals[el.nodes()[i]], w[i]));
                }
                vec3::normalize(m)
            }
        }
    }

    /// Euler characteristic V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.nodes.len() as i64 - self.metrics.edge_count as i64 + self.elements.len() as i64
    }

    /// Interpolates nodal `values` at a located point (barycentric or bilinear).
    pub fn interpolate(&self, loc: &ElementLocation, values: &[f64]) -> f64 {
        let el = &self.elements[loc.element];
        let (w, n) = loc.coords.shape_functions();
        (0..n).map(|i| w[i] * values[el.nodes()[i]]).sum()
    }

    /// Position of a located point on the (flat or bilinear) element.
    pub fn interpolate_position(&self, loc: &ElementLocation) -> Vec3 {
        let el = &self.elements[loc.element];
        let (w, n) = loc.coords.shape_functions();
        let mut x = [0.0; 3];
        for i in 0..n {
            x = vec3::add(x, vec3::scale(self.nodes[el.nodes()[i]], w[i]));
        }
        x
    }
}

fn area_weighted_normals(nodes: &[Vec3], elements: &[Element], topo: &HalfEdges) -> Vec<Vec3> {
    // The cross product of the diagonals is twice the (vector) area for
    // quads; for triangles the cross product of two edges is.
    let face: Vec<Vec3> = elements
        .iter()
        .map(|el| {
            let p: Vec<Vec3> = el.nodes().iter().map(|&v| nodes[v]).collect();
            if el.is_quad() {
                vec3::scale(vec3::cross(vec3::sub(p[2], p[0]), vec3::sub(p[3], p[1])), 0.5)
            } else {
                vec3::scale(vec3::cross(vec3::sub(p[1], p[0]), vec3::sub(p[2], p[0])), 0.5)
            }
        })
        .collect();
    (0..nodes.len())
        .map(|v| {
            let s = topo
                .node_elements(v)
                .iter()
                .fold([0.0; 3], |acc, &e| vec3::add(acc, face[e]));
            vec3::normalize(s)
        })
        .collect()
}
