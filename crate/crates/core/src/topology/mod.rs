//! Persistent homology of images and point clouds.
//!
//! Images are filtered by the lower-star rule on a cubical complex whose
//! vertices are pixels, so the sublevel set at threshold `t` is the
//! subcomplex of all cells whose pixels are `<= t`. Diagrams are computed by
//! Z/2 column reduction ([`reduce_boundary_matrix`]); the 0-dimensional part
//! also has a union-find fast path ([`persistence_h0_unionfind`]) that must
//! agree with the reduction as a multiset.

mod bottleneck;
mod cubical;
mod features;
mod io;
mod reduction;
mod rips;
mod union_find;

pub use bottleneck::{bottleneck_distance, hopcroft_karp};
pub use cubical::{build_filtration, Cell, CubicalComplex};
pub use features::{feature_header, vectorize, TopoFeatureVector};
pub use io::{diagram_from_json, diagram_to_json};
pub use reduction::{diagram_of_image, reduce_boundary_matrix};
pub use rips::{vr_h0, PointCloud};
pub use union_find::{persistence_h0_unionfind, UnionFind};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// One interval of a persistence diagram. `death` is `f64::INFINITY` for
/// essential classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
    pub dim: u8,
}

impl Bar {
    pub fn new(dim: u8, birth: f64, death: f64) -> Self {
        Self { birth, death, dim }
    }

    pub fn is_infinite(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.birth.total_cmp(&other.birth))
            .then(self.death.total_cmp(&other.death))
    }
}

/// Multiset of bars in dimensions 0 and 1.
///
/// Zero-persistence pairs are never stored. Equality compares the bars in
/// canonical `(dim, birth, death)` order, i.e. as multisets.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    bars: Vec<Bar>,
}

impl PartialEq for PersistenceDiagram {
    fn eq(&self, other: &Self) -> bool {
        self.canonical().bars == other.canonical().bars
    }
}

impl PersistenceDiagram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a diagram, silently dropping bars with `death <= birth`.
    pub fn from_bars(bars: impl IntoIterator<Item = Bar>) -> Self {
        let mut d = Self::new();
        for b in bars {
            d.push(b);
        }
        d
    }

    /// Adds a bar unless it has zero (or negative) persistence.
    pub fn push(&mut self, bar: Bar) {
        if bar.death > bar.birth {
            self.bars.push(bar);
        }
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn in_dim(&self, dim: u8) -> impl Iterator<Item = &Bar> + '_ {
        self.bars.iter().filter(move |b| b.dim == dim)
    }

    /// Only the bars of dimension `dim`.
    pub fn restricted(&self, dim: u8) -> Self {
        Self {
            bars: self.in_dim(dim).copied().collect(),
        }
    }

    /// Bars sorted by `(dim, birth, death)`.
    pub fn canonical(&self) -> Self {
        let mut bars = self.bars.clone();
        bars.sort_by(Bar::canonical_cmp);
        Self { bars }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_persistence_dropped_and_multiset_equality() {
        let a = PersistenceDiagram::from_bars([
            Bar::new(0, 0.2, f64::INFINITY),
            Bar::new(0, 0.3, 0.3),
            Bar::new(1, 0.1, 0.4),
        ]);
        assert_eq!(a.len(), 2);
        let b = PersistenceDiagram::from_bars([Bar::new(1, 0.1, 0.4), Bar::new(0, 0.2, f64::INFINITY)]);
        assert_eq!(a, b);
        assert_eq!(a.restricted(1).len(), 1);
    }
}
