//! Sphere and planar mesh generators.

use super::{Element, SurfaceKind, SurfaceMesh};
use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Triangle,
    Quad,
}

/// Equiangular gnomonic cubed sphere with `n` cells along each cube-face edge.
///
/// Every face grid is uniform in the central angle; nodes on shared cube
/// edges and corners appear once. Produces `6n² + 2` nodes and `6n²` quads.
pub fn gen_cubed_sphere(n: usize) -> Result<SurfaceMesh> {
    if n == 0 {
        return Err(Error::Config("cubed sphere needs at least one cell per edge".into()));
    }
    // Tangent of the equiangular coordinate, exactly antisymmetric and
    // exactly ±1 at the cube edges.
    let tan_at: Vec<f64> = (0..=n)
        .map(|c| {
            let mirror = n - c;
            if 2 * c == n {
                0.0
            } else if c == 0 {
                -1.0
            } else if c == n {
                1.0
            } else if 2 * c < n {
                (-FRAC_PI_4 + c as f64 * std::f64::consts::FRAC_PI_2 / n as f64).tan()
            } else {
                -(-FRAC_PI_4 + mirror as f64 * std::f64::consts::FRAC_PI_2 / n as f64).tan()
            }
        })
        .collect();

    let mut ids: HashMap<[usize; 3], usize> = HashMap::new();
    let mut nodes: Vec<Vec3> = Vec::with_capacity(6 * n * n + 2);
    let mut node_id = |lat: [usize; 3], nodes: &mut Vec<Vec3>| -> usize {
        *ids.entry(lat).or_insert_with(|| {
            nodes.push(vec3::normalize([tan_at[lat[0]], tan_at[lat[1]], tan_at[lat[2]]]));
            nodes.len() - 1
        })
    };

    let mut elements = Vec::with_capacity(6 * n * n);
    for axis in 0..3 {
        for positive in [true, false] {
            let b = (axis + 1) % 3;
            let c = (axis + 2) % 3;
            let fixed = if positive { n } else { 0 };
            let lattice = |i: usize, j: usize| {
                let mut l = [0; 3];
                l[axis] = fixed;
                l[b] = i;
                l[c] = j;
                l
            };
            for j in 0..n {
                for i in 0..n {
                    let v00 = node_id(lattice(i, j), &mut nodes);
                    let v10 = node_id(lattice(i + 1, j), &mut nodes);
                    let v11 = node_id(lattice(i + 1, j + 1), &mut nodes);
                    let v01 = node_id(lattice(i, j + 1), &mut nodes);
                    elements.push(if positive {
                        Element::quad(v00, v10, v11, v01)
                    } else {
                        Element::quad(v00, v01, v11, v10)
                    });
                }
            }
        }
    }
    SurfaceMesh::new(SurfaceKind::Sphere, nodes, elements)
}

/// Icosahedron refined `level` times by edge-midpoint subdivision, with new
/// nodes projected radially onto the unit sphere.
pub fn gen_icosphere(level: usize) -> Result<SurfaceMesh> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut nodes: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|&p| vec3::normalize(p))
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3 / 2);
        let mut mid = |a: usize, b: usize, nodes: &mut Vec<Vec3>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                nodes.push(vec3::normalize(vec3::add(nodes[a], nodes[b])));
                nodes.len() - 1
            })
        };
        let mut refined = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut nodes);
            let bc = mid(b, c, &mut nodes);
            let ca = mid(c, a, &mut nodes);
            refined.push([a, ab, ca]);
            refined.push([b, bc, ab]);
            refined.push([c, ca, bc]);
            refined.push([ab, bc, ca]);
        }
        faces = refined;
    }
    let elements = faces.iter().map(|&[a, b, c]| Element::triangle(a, b, c)).collect();
    SurfaceMesh::new(SurfaceKind::Sphere, nodes, elements)
}

/// Regular grid on `[0,1]²` in the `z = 0` plane. Triangulated grids split
/// each cell along its (i, j)–(i+1, j+1) diagonal.
pub fn gen_planar_grid(nx: usize, ny: usize, kind: ElementKind) -> Result<SurfaceMesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Config("planar grid needs at least one cell per direction".into()));
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let nodes = (0..=ny)
        .flat_map(|j| (0..=nx).map(move |i| [i as f64 / nx as f64, j as f64 / ny as f64, 0.0]))
        .collect();
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match kind {
                ElementKind::Quad => elements.push(Element::quad(a, b, c, d)),
                ElementKind::Triangle => {
                    elements.push(Element::triangle(a, b, c));
                    elements.push(Element::triangle(a, c, d));
                }
            }
        }
    }
    SurfaceMesh::new(SurfaceKind::Planar, nodes, elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outward(m: &SurfaceMesh) -> bool {
        m.elements().iter().all(|el| {
            let p: Vec<Vec3> = el.nodes().iter().map(|&v| m.node(v)).collect();
            let n = vec3::cross(vec3::sub(p[1], p[0]), vec3::sub(p[2], p[0]));
            vec3::dot(n, p[0]) > 0.0
        })
    }

    #[test]
    fn cubed_sphere_counts() {
        for (n, nodes, quads) in [(1, 8, 6), (13, 1016, 1014), (26, 4058, 4056)] {
            let m = gen_cubed_sphere(n).unwrap();
            assert_eq!(m.node_count(), nodes);
            assert_eq!(m.element_count(), quads);
            assert!(m.elements().iter().all(|e| e.is_quad()));
            assert!(m.is_closed());
            assert_eq!(m.euler_characteristic(), 2);
            assert!(outward(&m));
            for p in m.nodes() {
                assert!((vec3::norm(*p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cubed_sphere_is_equiangular() {
        // Along the +x face equator the central angles between neighbours are equal.
        let n = 6;
        let m = gen_cubed_sphere(n).unwrap();
        let mut eq: Vec<Vec3> = m
            .nodes()
            .iter()
            .copied()
            .filter(|p| p[2].abs() < 1e-14 && p[0] > 0.70)
            .collect();
        eq.sort_by(|a, b| a[1].partial_cmp(&b[1]).unwrap());
        assert_eq!(eq.len(), n + 1);
        let step = std::f64::consts::FRAC_PI_2 / n as f64;
        for w in eq.windows(2) {
            let ang = vec3::dot(w[0], w[1]).clamp(-1.0, 1.0).acos();
            assert!((ang - step).abs() < 1e-12);
        }
    }

    #[test]
    fn icosphere_counts() {
        for (level, nodes, tris) in [(0, 12, 20), (1, 42, 80), (5, 10242, 20480)] {
            let m = gen_icosphere(level).unwrap();
            assert_eq!(m.node_count(), nodes);
            assert_eq!(m.element_count(), tris);
            assert!(m.is_closed());
            assert_eq!(m.euler_characteristic(), 2);
            assert!(outward(&m));
            for p in m.nodes() {
                assert!((vec3::norm(*p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planar_counts() {
        let q = gen_planar_grid(1, 1, ElementKind::Quad).unwrap();
        assert_eq!((q.node_count(), q.element_count()), (4, 1));
        let t = gen_planar_grid(2, 2, ElementKind::Triangle).unwrap();
        assert_eq!((t.node_count(), t.element_count()), (9, 8));
        let q3 = gen_planar_grid(3, 1, ElementKind::Quad).unwrap();
        assert_eq!((q3.node_count(), q3.element_count()), (8, 3));
        assert_eq!(t.euler_characteristic(), 1);
    }

    #[test]
    fn zero_sizes_rejected() {
        assert!(gen_cubed_sphere(0).is_err());
        assert!(gen_planar_grid(0, 2, ElementKind::Quad).is_err());
    }
}
