use super::{Bar, PersistenceDiagram};
use crate::imaging::GrayscaleImage;

/// Disjoint sets with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns the new root, or `None` if
    /// they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<usize> {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        Some(ra)
    }
}

/// 0-dimensional persistence of the lower-star filtration by the elder rule.
///
/// Pixels enter in increasing intensity (ties by index); each new pixel is
/// merged with its already-present 4-neighbours. When two components meet,
/// the one born later dies at the current intensity.
pub fn persistence_h0_unionfind(img: &GrayscaleImage) -> PersistenceDiagram {
    let (w, h) = (img.width(), img.height());
    let v = img.intensities();
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));

    let mut uf = UnionFind::new(n);
    // oldest pixel of each component, valid at roots
    let mut oldest: Vec<usize> = (0..n).collect();
    let mut rank = vec![0usize; n];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    let mut present = vec![false; n];
    let mut diagram = PersistenceDiagram::new();

    for &p in &order {
        present[p] = true;
        let (x, y) = (p % w, p / w);
        let neighbours = [
            (x > 0).then(|| p - 1),
            (x + 1 < w).then(|| p + 1),
            (y > 0).then(|| p - w),
            (y + 1 < h).then(|| p + w),
        ];
        for q in neighbours.into_iter().flatten().filter(|&q| present[q]) {
            let (rp, rq) = (uf.find(p), uf.find(q));
            if rp == rq {
                continue;
            }
            let (op, oq) = (oldest[rp], oldest[rq]);
            let (elder, younger) = if rank[op] < rank[oq] { (op, oq) } else { (oq, op) };
            diagram.push(Bar::new(0, v[younger], v[p]));
            let root = uf.union(rp, rq).expect("distinct roots");
            oldest[root] = elder;
        }
    }
    let root = uf.find(order[0]);
    diagram.push(Bar::new(0, v[oldest[root]], f64::INFINITY));
    diagram
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn three_pixel_valley() {
        let img = GrayscaleImage::new(3, 1, vec![0.2, 0.9, 0.3]).unwrap();
        let expected = PersistenceDiagram::from_bars([Bar::new(0, 0.2, INF), Bar::new(0, 0.3, 0.9)]);
        assert_eq!(persistence_h0_unionfind(&img), expected);
    }

    #[test]
    fn constant_image_single_bar() {
        let img = GrayscaleImage::filled(4, 3, 0.6).unwrap();
        let d = persistence_h0_unionfind(&img);
        assert_eq!(d, PersistenceDiagram::from_bars([Bar::new(0, 0.6, INF)]));
    }

    #[test]
    fn two_basins_separated_by_ridge() {
        // 5x3: left basin 0.1, right basin 0.2, middle column ridge 0.9
        #[rustfmt::skip]
        let v = vec![
            0.1, 0.1, 0.9, 0.2, 0.2,
            0.1, 0.1, 0.9, 0.2, 0.2,
            0.1, 0.1, 0.9, 0.2, 0.2,
        ];
        let img = GrayscaleImage::new(5, 3, v).unwrap();
        let expected = PersistenceDiagram::from_bars([Bar::new(0, 0.1, INF), Bar::new(0, 0.2, 0.9)]);
        assert_eq!(persistence_h0_unionfind(&img), expected);
        assert_eq!(super::super::diagram_of_image(&img).restricted(0), expected);
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(4);
        assert!(uf.union(0, 1).is_some());
        assert!(uf.union(1, 0).is_none());
        uf.union(2, 3);
        assert_ne!(uf.find(0), uf.find(3));
        uf.union(1, 3);
        assert_eq!(uf.find(0), uf.find(2));
    }
}
