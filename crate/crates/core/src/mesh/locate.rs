//! Point location: coarse bucket of element centroids, then a walk across
//! half-edges towards the query point.

use super::{Element, SurfaceKind, SurfaceMesh};
use crate::error::{Error, Result};
use crate::vec3::{self, Vec3};
use std::f64::consts::PI;

/// Tolerance on natural coordinates for a point to count as inside.
pub const LOCATE_TOL: f64 = 1e-10;

const SIDE_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERS: usize = 20;

/// Natural coordinates of a point inside an element.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum NaturalCoords {
    /// Barycentric weights of the three corners, summing to one.
    Barycentric([f64; 3]),
    /// Bilinear reference coordinates `(s, t) ∈ [0,1]²`; corners 0..3 map to
    /// (0,0), (1,0), (1,1), (0,1).
    Bilinear([f64; 2]),
}

impl NaturalCoords {
    /// Shape-function values at the point, one per element node.
    pub fn shape_functions(&self) -> ([f64; 4], usize) {
        match *self {
            NaturalCoords::Barycentric(b) => ([b[0], b[1], b[2], 0.0], 3),
            NaturalCoords::Bilinear([s, t]) => (
                [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t],
                4,
            ),
        }
    }

    /// True when every coordinate lies within `[-tol, 1 + tol]`.
    pub fn within(&self, tol: f64) -> bool {
        let ok = |x: f64| x >= -tol && x <= 1.0 + tol;
        match self {
            NaturalCoords::Barycentric(b) => b.iter().all(|&x| ok(x)),
            NaturalCoords::Bilinear(st) => st.iter().all(|&x| ok(x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElementLocation {
    pub element: usize,
    pub coords: NaturalCoords,
}

#[derive(Debug, Clone)]
pub(crate) struct Locator {
    grid: Grid,
    cells: Vec<Vec<usize>>,
    centroids: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy)]
enum Grid {
    LonLat { nlat: usize, nlon: usize },
    Plane { min: [f64; 2], size: [f64; 2], nx: usize, ny: usize },
}

impl Grid {
    fn dims(&self) -> (usize, usize) {
        match *self {
            Grid::LonLat { nlat, nlon } => (nlon, nlat),
            Grid::Plane { nx, ny, .. } => (nx, ny),
        }
    }

    fn cell_of(&self, p: Vec3) -> (usize, usize) {
        match *self {
            Grid::LonLat { nlat, nlon } => {
                let q = vec3::normalize(p);
                let theta = q[2].clamp(-1.0, 1.0).acos();
                let mut phi = q[1].atan2(q[0]);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                let i = ((phi / (2.0 * PI)) * nlon as f64) as usize;
                let j = ((theta / PI) * nlat as f64) as usize;
                (i.min(nlon - 1), j.min(nlat - 1))
            }
            Grid::Plane { min, size, nx, ny } => {
                let fx = ((p[0] - min[0]) / size[0]).clamp(0.0, 1.0);
                let fy = ((p[1] - min[1]) / size[1]).clamp(0.0, 1.0);
                (((fx * nx as f64) as usize).min(nx - 1), ((fy * ny as f64) as usize).min(ny - 1))
            }
        }
    }

    fn wraps(&self) -> bool {
        matches!(self, Grid::LonLat { .. })
    }
}

impl Locator {
    pub(crate) fn build(kind: SurfaceKind, nodes: &[Vec3], elements: &[Element]) -> Self {
        let centroids: Vec<Vec3> = elements
            .iter()
            .map(|el| vec3::centroid(el.nodes().iter().map(|&v| nodes[v])))
            .collect();
        let target = (elements.len() as f64 / 2.0).sqrt().ceil().max(1.0) as usize;
        let grid = match kind {
            SurfaceKind::Sphere => Grid::LonLat { nlat: target, nlon: 2 * target },
            SurfaceKind::Planar => {
                let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
                for p in nodes {
                    for d in 0..2 {
                        lo[d] = lo[d].min(p[d]);
                        hi[d] = hi[d].max(p[d]);
                    }
                }
                let size = [(hi[0] - lo[0]).max(1e-300), (hi[1] - lo[1]).max(1e-300)];
                Grid::Plane { min: lo, size, nx: target, ny: target }
            }
        };
        let (ni, nj) = grid.dims();
        let mut cells = vec![Vec::new(); ni * nj];
        for (e, c) in centroids.iter().enumerate() {
            let (i, j) = grid.cell_of(*c);
            cells[j * ni + i].push(e);
        }
        Locator { grid, cells, centroids }
    }

    /// Element whose centroid is closest to `p` among the nearest non-empty
    /// bucket neighbourhood.
    fn start_element(&self, p: Vec3) -> usize {
        let (ni, nj) = self.grid.dims();
        let (ci, cj) = self.grid.cell_of(p);
        let mut best = (f64::INFINITY, 0usize);
        for radius in 0..ni.max(nj) {
            let r = radius as isize;
            for dj in -r..=r {
                let j = cj as isize + dj;
                if j < 0 || j >= nj as isize {
                    continue;
                }
                for di in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    let mut i = ci as isize + di;
                    if self.grid.wraps() {
                        i = i.rem_euclid(ni as isize);
                    } else if i < 0 || i >= ni as isize {
                        continue;
                    }
                    for &e in &self.cells[j as usize * ni + i as usize] {
                        let d = vec3::distance(self.centroids[e], p);
                        if d < best.0 || (d == best.0 && e < best.1) {
                            best = (d, e);
                        }
                    }
                }
            }
            if best.0.is_finite() {
                return best.1;
            }
        }
        0
    }
}

impl SurfaceMesh {
    /// Locates the element containing `point` under radial (sphere) or
    /// orthogonal (plane) projection. Points on shared edges or nodes resolve
    /// to the lowest-index containing element.
    pub fn locate_element(&self, point: Vec3) -> Result<ElementLocation> {
        let p = self.query_point(point)?;
        let found = self.walk(p).or_else(|| self.scan(p));
        let e = found.ok_or(Error::NotFound(point))?;
        let e = self.lowest_containing(e, p);
        Ok(ElementLocation { element: e, coords: self.natural_coords(e, p)? })
    }

    /// Exhaustive scan over all elements; the reference for [`Self::locate_element`].
    pub fn locate_element_exhaustive(&self, point: Vec3) -> Result<ElementLocation> {
        let p = self.query_point(point)?;
        let e = self.scan(p).ok_or(Error::NotFound(point))?;
        Ok(ElementLocation { element: e, coords: self.natural_coords(e, p)? })
    }

    fn query_point(&self, point: Vec3) -> Result<Vec3> {
        if point.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        match self.kind {
            SurfaceKind::Sphere => {
                if vec3::norm(point) == 0.0 {
                    return Err(Error::NotFound(point));
                }
                Ok(vec3::normalize(point))
            }
            SurfaceKind::Planar => Ok(point),
        }
    }

    fn element_normal(&self, el: &Element) -> Vec3 {
        let p = |i: usize| self.nodes[el.nodes()[i]];
        let n = if el.is_quad() {
            vec3::cross(vec3::sub(p(2), p(0)), vec3::sub(p(3), p(1)))
        } else {
            vec3::cross(vec3::sub(p(1), p(0)), vec3::sub(p(2), p(0)))
        };
        vec3::normalize(n)
    }

    /// Signed distances of `p` to the element's edges (positive inside).
    fn edge_sides(&self, e: usize, p: Vec3) -> ([f64; 4], usize) {
        let el = &self.elements[e];
        let n = el.arity();
        let mut s = [0.0; 4];
        match self.kind {
            SurfaceKind::Sphere => {
                for (i, side) in s.iter_mut().enumerate().take(n) {
                    let (a, b) = el.edge(i);
                    let c = vec3::cross(self.nodes[a], self.nodes[b]);
                    *side = vec3::dot(c, p) / vec3::norm(c);
                }
            }
            SurfaceKind::Planar => {
                let nrm = self.element_normal(el);
                for (i, side) in s.iter_mut().enumerate().take(n) {
                    let (a, b) = el.edge(i);
                    let ab = vec3::sub(self.nodes[b], self.nodes[a]);
                    let c = vec3::cross(ab, vec3::sub(p, self.nodes[a]));
                    *side = vec3::dot(c, nrm) / vec3::norm(ab);
                }
            }
        }
        (s, n)
    }

    fn contains(&self, e: usize, p: Vec3) -> bool {
        let (s, n) = self.edge_sides(e, p);
        if s[..n].iter().any(|&x| x < -SIDE_TOL) {
            return false;
        }
        match self.kind {
            SurfaceKind::Sphere => vec3::dot(self.locator.centroids[e], p) > 0.0,
            SurfaceKind::Planar => true,
        }
    }

    fn walk(&self, p: Vec3) -> Option<usize> {
        let mut e = self.locator.start_element(p);
        for _ in 0..self.elements.len() + 8 {
            let (s, n) = self.edge_sides(e, p);
            let (imin, smin) = s[..n]
                .iter()
                .copied()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, x)| if x < acc.1 { (i, x) } else { acc });
            if smin >= -SIDE_TOL && self.contains(e, p) {
                return Some(e);
            }
            let h = self.topo.element_half_edge(e) + imin;
            e = self.topo.element(self.topo.opposite(h)?);
        }
        None
    }

    fn scan(&self, p: Vec3) -> Option<usize> {
        (0..self.elements.len()).find(|&e| self.contains(e, p))
    }

    /// Lowest-index element containing `p` among those touching `e`'s nodes.
    fn lowest_containing(&self, e: usize, p: Vec3) -> usize {
        let mut best = e;
        for &v in self.elements[e].nodes() {
            for &f in self.topo.node_elements(v) {
                if f < best && self.contains(f, p) {
                    best = f;
                }
            }
        }
        best
    }

    /// Natural coordinates of `p` in element `e`. The point is projected
    /// along the radial direction (sphere) or the element normal (plane).
    fn natural_coords(&self, e: usize, p: Vec3) -> Result<NaturalCoords> {
        let el = &self.elements[e];
        let dir = match self.kind {
            SurfaceKind::Sphere => p,
            SurfaceKind::Planar => self.element_normal(el),
        };
        let (e1, e2) = tangent_basis(dir);
        let x = |i: usize| self.nodes[el.nodes()[i]];
        let proj = |v: Vec3| [vec3::dot(e1, v), vec3::dot(e2, v)];
        if !el.is_quad() {
            let a = x(0);
            let (ab, ac, ap) = (proj(vec3::sub(x(1), a)), proj(vec3::sub(x(2), a)), proj(vec3::sub(p, a)));
            let det = ab[0] * ac[1] - ac[0] * ab[1];
            if det == 0.0 {
                return Err(Error::Singular);
            }
            let s = (ap[0] * ac[1] - ac[0] * ap[1]) / det;
            let t = (ab[0] * ap[1] - ap[0] * ab[1]) / det;
            return Ok(NaturalCoords::Barycentric([1.0 - s - t, s, t]));
        }
        let (a, b, c, d) = (proj(x(0)), proj(x(1)), proj(x(2)), proj(x(3)));
        let q = proj(p);
        let (mut s, mut t) = (0.5, 0.5);
        for _ in 0..NEWTON_MAX_ITERS {
            let mut f = [0.0; 2];
            let mut xs = [0.0; 2];
            let mut xt = [0.0; 2];
            for k in 0..2 {
                f[k] = (1.0 - s) * (1.0 - t) * a[k] + s * (1.0 - t) * b[k] + s * t * c[k]
                    + (1.0 - s) * t * d[k]
                    - q[k];
                xs[k] = (1.0 - t) * (b[k] - a[k]) + t * (c[k] - d[k]);
                xt[k] = (1.0 - s) * (d[k] - a[k]) + s * (c[k] - b[k]);
            }
            let det = xs[0] * xt[1] - xt[0] * xs[1];
            if det == 0.0 {
                return Err(Error::Singular);
            }
            let ds = (f[0] * xt[1] - xt[0] * f[1]) / det;
            let dt = (xs[0] * f[1] - f[0] * xs[1]) / det;
            s -= ds;
            t -= dt;
            if ds.abs().max(dt.abs()) <= 1e-15 {
                break;
            }
        }
        Ok(NaturalCoords::Bilinear([s, t]))
    }
}

/// Orthonormal pair spanning the plane orthogonal to `d`.
fn tangent_basis(d: Vec3) -> (Vec3, Vec3) {
    let n = vec3::normalize(d);
    let axis = (0..3)
        .min_by(|&i, &j| n[i].abs().partial_cmp(&n[j].abs()).unwrap())
        .unwrap_or(0);
    let mut seed = [0.0; 3];
    seed[axis] = 1.0;
    let e1 = vec3::normalize(vec3::sub(seed, vec3::scale(n, vec3::dot(seed, n))));
    (e1, vec3::cross(n, e1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{gen_cubed_sphere, gen_icosphere, gen_planar_grid, ElementKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
        loop {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = vec3::norm(p);
            if n > 0.1 && n <= 1.0 {
                return vec3::scale(p, 1.0 / n);
            }
        }
    }

    #[test]
    fn node_query_returns_incident_element() {
        let m = gen_icosphere(2).unwrap();
        for v in [0, 5, 77, 161] {
            let loc = m.locate_element(m.node(v)).unwrap();
            let el = m.element(loc.element);
            let i = el.nodes().iter().position(|&w| w == v).expect("incident");
            let (w, _) = loc.coords.shape_functions();
            assert!((w[i] - 1.0).abs() < 1e-10);
            // lowest-index incident element wins the tie
            assert_eq!(loc.element, m.node_elements(v)[0]);
        }
    }

    #[test]
    fn cube_face_center() {
        let m = gen_cubed_sphere(1).unwrap();
        for axis in 0..3 {
            for sign in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[axis] = sign;
                let loc = m.locate_element(p).unwrap();
                match loc.coords {
                    NaturalCoords::Bilinear([s, t]) => {
                        assert!((s - 0.5).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
                    }
                    _ => panic!("expected quad"),
                }
            }
        }
    }

    #[test]
    fn random_points_match_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = gen_icosphere(2).unwrap();
        for _ in 0..1000 {
            let p = random_unit(&mut rng);
            let fast = m.locate_element(p).unwrap();
            let slow = m.locate_element_exhaustive(p).unwrap();
            assert_eq!(fast.element, slow.element);
            assert!(fast.coords.within(LOCATE_TOL));
            let x = m.interpolate_position(&fast);
            assert!(vec3::distance(vec3::normalize(x), p) < 1e-10);
        }
    }

    #[test]
    fn target_nodes_locate_consistently() {
        let src = gen_cubed_sphere(7).unwrap();
        let tgt = gen_icosphere(3).unwrap();
        for &p in tgt.nodes() {
            let loc = src.locate_element(p).unwrap();
            assert!(loc.coords.within(LOCATE_TOL));
            let x = src.interpolate_position(&loc);
            assert!(vec3::distance(vec3::normalize(x), p) < 1e-10);
        }
    }

    #[test]
    fn planar_location_and_not_found() {
        let m = gen_planar_grid(4, 3, ElementKind::Quad).unwrap();
        let loc = m.locate_element([0.3, 0.5, 0.0]).unwrap();
        let x = m.interpolate_position(&loc);
        assert!(vec3::distance(x, [0.3, 0.5, 0.0]) < 1e-12);
        assert!(matches!(m.locate_element([1.5, 0.5, 0.0]), Err(Error::NotFound(_))));
        let t = gen_planar_grid(3, 3, ElementKind::Triangle).unwrap();
        let loc = t.locate_element([0.9, 0.1, 0.0]).unwrap();
        assert!(loc.coords.within(LOCATE_TOL));
    }
}
