use crate::error::{Error, Result};
use crate::fields::AnalyticField;
use crate::mesh::{SurfaceKind, SurfaceMesh};
use crate::par;
use crate::vec3::{self, Vec3};
use crate::wls::{conditioned_fit, min_stencil_size, stencil_from_seeds, LocalFrame, Purpose, WlsConfig};

/// Symmetric 6-point rule, exact for degree 4 on a triangle:
/// (weight, barycentric coordinates).
const RULE: [(f64, [f64; 3]); 6] = [
    (0.223381589678011, [0.445948490915965, 0.445948490915965, 0.108103018168070]),
    (0.223381589678011, [0.445948490915965, 0.108103018168070, 0.445948490915965]),
    (0.223381589678011, [0.108103018168070, 0.445948490915965, 0.445948490915965]),
    (0.109951743655322, [0.091576213509771, 0.091576213509771, 0.816847572980459]),
    (0.109951743655322, [0.091576213509771, 0.816847572980459, 0.091576213509771]),
    (0.109951743655322, [0.816847572980459, 0.091576213509771, 0.091576213509771]),
];

/// What is integrated: nodal values reconstructed by WLS of a given
/// degree, or an analytic field evaluated at the quadrature points.
#[derive(Debug, Clone, Copy)]
pub enum Integrand<'a> {
    Nodal { values: &'a [f64], degree: usize },
    Analytic(&'a AnalyticField),
}

/// Area of the spherical triangle with unit-vector corners (L'Huilier).
pub fn spherical_triangle_area(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let arc = |x: Vec3, y: Vec3| vec3::norm(vec3::cross(x, y)).atan2(vec3::dot(x, y));
    let (sa, sb, sc) = (arc(b, c), arc(c, a), arc(a, b));
    let s = 0.5 * (sa + sb + sc);
    let t = (0.5 * s).tan() * (0.5 * (s - sa)).tan() * (0.5 * (s - sb)).tan() * (0.5 * (s - sc)).tan();
    4.0 * t.max(0.0).sqrt().atan()
}

/// Quadrature points of element `e` on the sphere with their weights.
fn element_rule(mesh: &SurfaceMesh, e: usize) -> Vec<(Vec3, f64)> {
    let nodes = mesh.element(e).nodes();
    let tris: &[[usize; 3]] = if nodes.len() == 4 { &[[0, 1, 2], [0, 2, 3]] } else { &[[0, 1, 2]] };
    let mut out = Vec::with_capacity(6 * tris.len());
    for t in tris {
        let [a, b, c] = t.map(|k| mesh.node(nodes[k]));
        let sph = spherical_triangle_area(vec3::normalize(a), vec3::normalize(b), vec3::normalize(c));
        // Rule weights are normalized to the flat area; rescaling them to
        // the spherical patch area makes constants exact.
        for (w, l) in RULE {
            let x = vec3::add(vec3::add(vec3::scale(a, l[0]), vec3::scale(b, l[1])), vec3::scale(c, l[2]));
            out.push((vec3::normalize(x), w * sph));
        }
    }
    out
}

fn check_sphere(mesh: &SurfaceMesh) -> Result<()> {
    if mesh.kind() != SurfaceKind::Sphere || !mesh.is_closed() {
        return Err(Error::OpenMesh);
    }
    Ok(())
}

/// Reconstruction degree used for nodal integrands of a degree-`p` method.
fn reconstruction_degree(p: usize) -> usize {
    if p == 4 || p == 6 {
        p
    } else {
        2
    }
}

/// Vector `w` with `∫ f ≈ Σᵢ wᵢ fᵢ` over the sphere for nodal values
/// reconstructed per element by WLS of degree 4 or 6 (when `degree` is one
/// of those) or 2.
pub fn integration_weights(mesh: &SurfaceMesh, degree: usize) -> Result<Vec<f64>> {
    check_sphere(mesh)?;
    let p = reconstruction_degree(degree);
    let cfg = WlsConfig::smooth(p);
    let per_element = par::try_map_range(mesh.element_count(), |e| -> Result<Vec<(usize, f64)>> {
        let center = vec3::normalize(mesh.element_center(e));
        let frame = LocalFrame::new(center, center)?;
        let seeds = mesh.element(e).nodes();
        let (_, fit) = conditioned_fit(&cfg, None, |attempt| {
            let mut ring = Purpose::Smooth.ring(p);
            for _ in 0..attempt {
                ring = ring.grow();
            }
            stencil_from_seeds(mesh, frame, seeds, ring, min_stencil_size(p))
        })?;
        let mut acc: Vec<(usize, f64)> = Vec::new();
        for (y, w) in element_rule(mesh, e) {
            for (j, g) in fit.functional_at(frame.to_uv(y))? {
                acc.push((j, w * g));
            }
        }
        Ok(acc)
    })?;
    let mut weights = vec![0.0; mesh.node_count()];
    for acc in per_element {
        for (j, w) in acc {
            weights[j] += w;
        }
    }
    Ok(weights)
}

/// Integral over the sphere discretized by `mesh`.
pub fn integrate_field(mesh: &SurfaceMesh, f: Integrand) -> Result<f64> {
    match f {
        Integrand::Nodal { values, degree } => {
            if values.len() != mesh.node_count() {
                return Err(Error::DimensionMismatch { expected: mesh.node_count(), got: values.len() });
            }
            let w = integration_weights(mesh, degree)?;
            Ok(w.iter().zip(values).map(|(a, b)| a * b).sum())
        }
        Integrand::Analytic(field) => {
            check_sphere(mesh)?;
            let parts = par::map_range(mesh.element_count(), |e| {
                element_rule(mesh, e).into_iter().map(|(y, w)| w * field.eval(y)).sum::<f64>()
            });
            Ok(parts.iter().sum())
        }
    }
}

/// `|∫ exact − ∫ final|` given precomputed integration weights for the mesh
/// carrying `values`.
pub fn conservation_error(mesh: &SurfaceMesh, weights: &[f64], values: &[f64], exact: &AnalyticField) -> Result<f64> {
    if weights.len() != values.len() || values.len() != mesh.node_count() {
        return Err(Error::DimensionMismatch { expected: mesh.node_count(), got: values.len() });
    }
    let approx: f64 = weights.iter().zip(values).map(|(a, b)| a * b).sum();
    Ok((integrate_field(mesh, Integrand::Analytic(exact))? - approx).abs())
}
