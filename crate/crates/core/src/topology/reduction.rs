use std::collections::HashMap;

use super::cubical::{build_filtration, CubicalComplex};
use super::{Bar, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::imaging::GrayscaleImage;

/// Symmetric difference of two sorted index lists.
fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Boundary columns in filtration order, checking that every face is
/// present and precedes its coface.
fn boundary_columns(complex: &CubicalComplex) -> Result<Vec<Vec<usize>>> {
    let cells = &complex.cells;
    if let Some(i) = (1..cells.len()).find(|&i| cells[i].value < cells[i - 1].value) {
        return Err(Error::UnorderedComplex(format!(
            "cell {i} has value {} below its predecessor's {}",
            cells[i].value,
            cells[i - 1].value
        )));
    }
    let position: HashMap<&[usize], usize> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c.vertices.as_slice(), i))
        .collect();
    cells
        .iter()
        .enumerate()
        .map(|(j, cell)| {
            let mut col = cell
                .faces()
                .iter()
                .map(|f| {
                    let &i = position.get(f.as_slice()).ok_or_else(|| {
                        Error::InvalidInput(format!("cell {j} is missing face {f:?}"))
                    })?;
                    if i >= j {
                        return Err(Error::UnorderedComplex(format!(
                            "cell {j} precedes its face at position {i}"
                        )));
                    }
                    Ok(i)
                })
                .collect::<Result<Vec<_>>>()?;
            col.sort_unstable();
            Ok(col)
        })
        .collect()
}

/// Standard persistence pairing by left-to-right column reduction over Z/2.
///
/// A column whose lowest entry is `i` after reduction pairs cell `i`
/// (birth) with the column's cell (death). Unpaired vertices and edges give
/// essential bars. Pairs with equal filtration values are dropped.
pub fn reduce_boundary_matrix(complex: &CubicalComplex) -> Result<PersistenceDiagram> {
    let cells = &complex.cells;
    let mut columns = boundary_columns(complex)?;
    let n = cells.len();
    // owner[i] = column whose pivot is row i
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut paired = vec![false; n];
    let mut diagram = PersistenceDiagram::new();

    for j in 0..n {
        while let Some(&low) = columns[j].last() {
            match owner[low] {
                Some(k) => columns[j] = xor_sorted(&columns[j], &columns[k]),
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            owner[low] = Some(j);
            paired[low] = true;
            paired[j] = true;
            diagram.push(Bar::new(cells[low].dim, cells[low].value, cells[j].value));
        }
    }
    for (i, cell) in cells.iter().enumerate() {
        if !paired[i] && cell.dim < 2 {
            diagram.push(Bar::new(cell.dim, cell.value, f64::INFINITY));
        }
    }
    Ok(diagram)
}

/// H0 and H1 of the image's lower-star filtration.
pub fn diagram_of_image(img: &GrayscaleImage) -> PersistenceDiagram {
    reduce_boundary_matrix(&build_filtration(img))
        .expect("build_filtration always yields an ordered complex")
}
