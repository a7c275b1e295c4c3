use serde::{Deserialize, Serialize};

use super::union_find::UnionFind;
use super::{Bar, PersistenceDiagram};
use crate::error::{invalid, Result};

/// Finite set of points in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        if points.is_empty() || d == 0 {
            return invalid("point cloud needs at least one point of dimension >= 1");
        }
        if points.iter().any(|p| p.len() != d) {
            return invalid("points have inconsistent dimensions");
        }
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return invalid("point coordinates must be finite");
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// 0-dimensional Vietoris–Rips persistence: every point is born at 0 and
/// components die at the minimum spanning tree edge lengths (Kruskal).
pub fn vr_h0(cloud: &PointCloud) -> PersistenceDiagram {
    let pts = cloud.points();
    let n = pts.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((euclidean(&pts[i], &pts[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let mut uf = UnionFind::new(n);
    let mut diagram = PersistenceDiagram::new();
    let mut merged = 0;
    for (w, i, j) in edges {
        if merged + 1 == n {
            break;
        }
        if uf.union(i, j).is_some() {
            merged += 1;
            diagram.push(Bar::new(0, 0.0, w));
        }
    }
    diagram.push(Bar::new(0, 0.0, f64::INFINITY));
    diagram
}
