//! k-ring neighbourhoods with half-ring increments.
//!
//! * 1-ring: nodes sharing an element with the seed.
//! * (j+½)-ring: the j-ring plus every node of an element that has a full
//!   edge (both end points) inside the j-ring.
//! * (j+1)-ring: union of the 1-rings of the j-ring nodes.

use super::SurfaceMesh;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Ring size in multiples of ½, at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RingSize(u32);

impl RingSize {
    pub const ONE: RingSize = RingSize(2);

    pub fn new(k: f64) -> Result<Self> {
        let halves = 2.0 * k;
        if !(k >= 1.0) || halves.fract() != 0.0 || halves > 1e6 {
            return Err(Error::InvalidRing(k));
        }
        Ok(RingSize(halves as u32))
    }

    pub fn from_halves(halves: u32) -> Result<Self> {
        if halves < 2 {
            return Err(Error::InvalidRing(halves as f64 / 2.0));
        }
        Ok(RingSize(halves))
    }

    pub fn halves(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// The next half-ring.
    pub fn grow(self) -> Self {
        RingSize(self.0 + 1)
    }
}

impl TryFrom<f64> for RingSize {
    type Error = Error;
    fn try_from(k: f64) -> Result<Self> {
        RingSize::new(k)
    }
}

impl From<RingSize> for f64 {
    fn from(r: RingSize) -> f64 {
        r.value()
    }
}

impl std::fmt::Display for RingSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value())
    }
}

impl SurfaceMesh {
    /// Nodes in the `k`-ring of `node`, excluding `node`, ordered by the
    /// half-ring layer in which they first appear and then by index.
    pub fn k_ring(&self, node: usize, k: RingSize) -> Result<Vec<usize>> {
        let mut r = self.ring_layers(&[node], k)?;
        r.retain(|&(v, _)| v != node);
        Ok(r.into_iter().map(|(v, _)| v).collect())
    }

    /// Union of the `k`-rings (each including its seed) of every node in
    /// `seeds`, ordered by the earliest layer over all seeds, then by index.
    pub fn ring_union(&self, seeds: &[usize], k: RingSize) -> Result<Vec<usize>> {
        let mut best: HashMap<usize, u32> = HashMap::new();
        for &s in seeds {
            for (v, layer) in self.ring_layers(&[s], k)? {
                best.entry(v).and_modify(|l| *l = (*l).min(layer)).or_insert(layer);
            }
        }
        let mut out: Vec<(usize, u32)> = best.into_iter().collect();
        out.sort_unstable_by_key(|&(v, l)| (l, v));
        Ok(out.into_iter().map(|(v, _)| v).collect())
    }

    /// Ring of a seed set (seeds form layer 0), as (node, layer) pairs sorted
    /// by (layer, node). Layers count half-ring steps.
    fn ring_layers(&self, seeds: &[usize], k: RingSize) -> Result<Vec<(usize, u32)>> {
        if let Some(&bad) = seeds.iter().find(|&&s| s >= self.node_count()) {
            return Err(Error::InvalidNode(bad));
        }
        let mut layer: HashMap<usize, u32> = seeds.iter().map(|&s| (s, 0)).collect();
        // Nodes of the current integer ring.
        let mut base: Vec<usize> = seeds.to_vec();
        base.sort_unstable();
        base.dedup();
        for step in 1..=k.halves() {
            if step % 2 == 1 {
                // Half step on top of the integer ring `base`.
                let in_base: std::collections::HashSet<usize> = base.iter().copied().collect();
                for &a in &base {
                    for &e in self.node_elements(a) {
                        let el = self.element(e);
                        let has_full_edge = (0..el.arity()).any(|i| {
                            let (x, y) = el.edge(i);
                            in_base.contains(&x) && in_base.contains(&y)
                        });
                        if has_full_edge {
                            for &v in el.nodes() {
                                layer.entry(v).or_insert(step);
                            }
                        }
                    }
                }
            } else {
                let mut grown = base.clone();
                for &a in &base {
                    for &v in self.node_neighbors(a) {
                        layer.entry(v).or_insert(step);
                        grown.push(v);
                    }
                }
                grown.sort_unstable();
                grown.dedup();
                base = grown;
            }
        }
        let mut out: Vec<(usize, u32)> = layer.into_iter().collect();
        out.sort_unstable_by_key(|&(v, l)| (l, v));
        Ok(out)
    }
}
