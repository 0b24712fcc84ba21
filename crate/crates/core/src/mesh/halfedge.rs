use super::Element;
use crate::error::{Error, Result};
use std::collections::HashMap;

const NONE: usize = usize::MAX;

/// Array-based half-edge connectivity.
///
/// Half-edges of element `e` occupy the contiguous id range
/// `elem_offsets[e]..elem_offsets[e + 1]`; half-edge `offset + i` runs from
/// the element's node `i` to node `i + 1`. Node adjacency (incident elements
/// and 1-ring neighbours) is kept in CSR form.
#[derive(Debug, Clone)]
pub struct HalfEdges {
    elem_offsets: Vec<usize>,
    origin: Vec<usize>,
    element: Vec<usize>,
    opposite: Vec<usize>,
    node_elem_offsets: Vec<usize>,
    node_elems: Vec<usize>,
    node_nbr_offsets: Vec<usize>,
    node_nbrs: Vec<usize>,
}

impl HalfEdges {
    pub(crate) fn build(node_count: usize, elements: &[Element]) -> Result<Self> {
        let mut elem_offsets = Vec::with_capacity(elements.len() + 1);
        let mut origin = Vec::new();
        let mut element = Vec::new();
        elem_offsets.push(0);
        for (e, el) in elements.iter().enumerate() {
            for &v in el.nodes() {
                origin.push(v);
                element.push(e);
            }
            elem_offsets.push(origin.len());
        }

        let mut by_edge: HashMap<(usize, usize), usize> = HashMap::with_capacity(origin.len());
        for (e, el) in elements.iter().enumerate() {
            for i in 0..el.arity() {
                let h = elem_offsets[e] + i;
                if by_edge.insert(el.edge(i), h).is_some() {
                    let (a, b) = el.edge(i);
                    return Err(Error::InvalidMesh(format!(
                        "directed edge ({a}, {b}) used twice; orientation is inconsistent or edge is non-manifold"
                    )));
                }
            }
        }
        let mut opposite = vec![NONE; origin.len()];
        for (&(a, b), &h) in &by_edge {
            if let Some(&g) = by_edge.get(&(b, a)) {
                opposite[h] = g;
            }
        }

        let mut node_elems_lists: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for (e, el) in elements.iter().enumerate() {
            for &v in el.nodes() {
                node_elems_lists[v].push(e);
            }
        }
        let mut node_nbr_lists: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for (v, es) in node_elems_lists.iter().enumerate() {
            let list = &mut node_nbr_lists[v];
            for &e in es {
                list.extend(elements[e].nodes().iter().copied().filter(|&w| w != v));
            }
            list.sort_unstable();
            list.dedup();
        }
        let (node_elem_offsets, node_elems) = to_csr(node_elems_lists);
        let (node_nbr_offsets, node_nbrs) = to_csr(node_nbr_lists);

        Ok(HalfEdges {
            elem_offsets,
            origin,
            element,
            opposite,
            node_elem_offsets,
            node_elems,
            node_nbr_offsets,
            node_nbrs,
        })
    }

    pub fn half_edge_count(&self) -> usize {
        self.origin.len()
    }

    /// First half-edge of element `e`.
    pub fn element_half_edge(&self, e: usize) -> usize {
        self.elem_offsets[e]
    }

    pub fn origin(&self, h: usize) -> usize {
        self.origin[h]
    }

    pub fn dest(&self, h: usize) -> usize {
        self.origin[self.next(h)]
    }

    pub fn element(&self, h: usize) -> usize {
        self.element[h]
    }

    /// Next half-edge around the same element.
    pub fn next(&self, h: usize) -> usize {
        let e = self.element[h];
        if h + 1 == self.elem_offsets[e + 1] {
            self.elem_offsets[e]
        } else {
            h + 1
        }
    }

    /// Opposite half-edge, `None` on a boundary.
    pub fn opposite(&self, h: usize) -> Option<usize> {
        let g = self.opposite[h];
        (g != NONE).then_some(g)
    }

    pub fn is_closed(&self) -> bool {
        self.opposite.iter().all(|&g| g != NONE)
    }

    pub fn node_elements(&self, v: usize) -> &[usize] {
        &self.node_elems[self.node_elem_offsets[v]..self.node_elem_offsets[v + 1]]
    }

    pub fn node_neighbors(&self, v: usize) -> &[usize] {
        &self.node_nbrs[self.node_nbr_offsets[v]..self.node_nbr_offsets[v + 1]]
    }

    /// Each undirected edge once, as (smaller, larger) node ids in half-edge order.
    pub fn unique_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.origin.len()).filter_map(move |h| {
            let (a, b) = (self.origin(h), self.dest(h));
            match self.opposite(h) {
                Some(g) if g < h => None,
                _ => Some((a.min(b), a.max(b))),
            }
        })
    }
}

fn to_csr(lists: Vec<Vec<usize>>) -> (Vec<usize>, Vec<usize>) {
    let mut offsets = Vec::with_capacity(lists.len() + 1);
    let mut flat = Vec::with_capacity(lists.iter().map(Vec::len).sum());
    offsets.push(0);
    for l in lists {
        flat.extend(l);
        offsets.push(flat.len());
    }
    (offsets, flat)
}

#[cfg(test)]
mod tests {
    use crate::mesh::{gen_cubed_sphere, gen_icosphere, gen_planar_grid, ElementKind, SurfaceMesh};

    fn check_round_trip(m: &SurfaceMesh) {
        let he = m.half_edges();
        for e in 0..m.element_count() {
            let start = he.element_half_edge(e);
            let mut h = start;
            let mut len = 0;
            loop {
                assert_eq!(he.element(h), e);
                h = he.next(h);
                len += 1;
                if h == start {
                    break;
                }
                assert!(len <= 4);
            }
            assert_eq!(len, m.element(e).arity());
        }
        for h in 0..he.half_edge_count() {
            if let Some(g) = he.opposite(h) {
                assert_eq!(he.opposite(g), Some(h));
                assert_eq!(he.origin(g), he.dest(h));
                assert_eq!(he.dest(g), he.origin(h));
            }
        }
    }

    #[test]
    fn round_trip_on_generated_meshes() {
        check_round_trip(&gen_icosphere(2).unwrap());
        check_round_trip(&gen_cubed_sphere(4).unwrap());
        check_round_trip(&gen_planar_grid(3, 2, ElementKind::Triangle).unwrap());
        check_round_trip(&gen_planar_grid(3, 2, ElementKind::Quad).unwrap());
    }

    #[test]
    fn boundary_edges_on_planar_grid() {
        let m = gen_planar_grid(2, 2, ElementKind::Quad).unwrap();
        let he = m.half_edges();
        let boundary = (0..he.half_edge_count()).filter(|&h| he.opposite(h).is_none()).count();
        assert_eq!(boundary, 8);
        assert_eq!(he.unique_edges().count(), 12);
    }
}
