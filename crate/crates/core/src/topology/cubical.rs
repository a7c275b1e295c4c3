use std::cmp::Ordering;

use crate::imaging::GrayscaleImage;

/// A vertex (pixel), an edge between 4-adjacent pixels, or a unit square
/// spanned by a 2x2 pixel block. Vertices are stored sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub dim: u8,
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Cell {
    fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }

    /// Codimension-one faces as sorted vertex sets.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        match self.dim {
            0 => Vec::new(),
            1 => self.vertices.iter().map(|&v| vec![v]).collect(),
            _ => {
                // vertices of a square are [a, b, c, d] with a-b and c-d
                // horizontal, a-c and b-d vertical
                let [a, b, c, d] = [
                    self.vertices[0],
                    self.vertices[1],
                    self.vertices[2],
                    self.vertices[3],
                ];
                vec![vec![a, b], vec![a, c], vec![b, d], vec![c, d]]
            }
        }
    }
}

/// Cells listed in filtration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicalComplex {
    pub cells: Vec<Cell>,
}

impl CubicalComplex {
    /// Wraps a cell list as-is. The order is validated by the reduction.
    pub fn from_cells(cells: Vec<Cell>) -> Self {
        Self { cells }
    }

    pub fn count_by_dim(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for c in &self.cells {
            out[c.dim as usize] += 1;
        }
        out
    }

    /// Number of vertices, edges and squares with value `<= t`.
    pub fn sublevel_counts(&self, t: f64) -> [usize; 3] {
        let mut out = [0; 3];
        for c in self.cells.iter().filter(|c| c.value <= t) {
            out[c.dim as usize] += 1;
        }
        out
    }
}

/// Lower-star cubical filtration of an image: each cell takes the maximum
/// intensity of its pixels. Cells are sorted by value, then dimension, then
/// vertex indices, which puts every face before its cofaces.
pub fn build_filtration(img: &GrayscaleImage) -> CubicalComplex {
    let (w, h) = (img.width(), img.height());
    let v = img.intensities();
    let value = |ids: &[usize]| ids.iter().map(|&i| v[i]).fold(f64::NEG_INFINITY, f64::max);
    let mut cells = Vec::with_capacity(w * h * 4);
    for (i, &value) in v.iter().enumerate() {
        cells.push(Cell {
            dim: 0,
            vertices: vec![i],
            value,
        });
    }
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if x + 1 < w {
                let ids = vec![i, i + 1];
                cells.push(Cell {
                    dim: 1,
                    value: value(&ids),
                    vertices: ids,
                });
            }
            if y + 1 < h {
                let ids = vec![i, i + w];
                cells.push(Cell {
                    dim: 1,
                    value: value(&ids),
                    vertices: ids,
                });
            }
            if x + 1 < w && y + 1 < h {
                let ids = vec![i, i + 1, i + w, i + w + 1];
                cells.push(Cell {
                    dim: 2,
                    value: value(&ids),
                    vertices: ids,
                });
            }
        }
    }
    cells.sort_by(Cell::filtration_cmp);
    CubicalComplex { cells }
}
