//! Filtered cubical complexes on 2D grids.
//!
//! A field with `nx × ny` cells is the top-dimensional layer of the complex
//! `K([0, nx] × [0, ny])`. Cells are addressed in doubled coordinates
//! `(a, b) ∈ [0, 2nx] × [0, 2ny]`: odd coordinates are unit intervals, even
//! ones degenerate intervals, so `dim = (a odd) + (b odd)` and the square of
//! field cell `(ix, iy)` sits at `(2ix + 1, 2iy + 1)`.
//!
//! Lower-dimensional cells take the max (superlevel) or min (sublevel) of the
//! squares they bound, which keeps every level set a subcomplex.

use crate::diagram::{Direction, PersistenceDiagram, PersistencePair};
use crate::error::Result;
use crate::field::ScalarField2D;
use crate::scalar::{cmp, Scalar};
use crate::z2::{reduce_with_clearing, Z2Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicalCell<T> {
    pub dim: usize,
    /// Doubled grid coordinates `(a, b)`.
    pub coords: (usize, usize),
    pub value: T,
}

/// Cells in filtration order together with their faces (as filtration positions).
#[derive(Debug, Clone)]
pub struct CubicalFiltration<T> {
    pub direction: Direction,
    pub cells: Vec<CubicalCell<T>>,
    pub faces: Vec<Vec<usize>>,
    /// `order[k]` is the row-major doubled-grid id of the k-th cell.
    pub order: Vec<usize>,
}

impl<T: Scalar> CubicalFiltration<T> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn boundary_matrix(&self) -> Z2Matrix {
        Z2Matrix::from_columns(self.cells.len(), self.faces.clone())
            .expect("faces are sorted filtration positions")
    }

    /// Cell `k` is a face of some later cell only if it appears earlier: the
    /// closure and ordering invariants.
    pub fn check_invariants(&self) -> bool {
        self.faces.iter().enumerate().all(|(k, fs)| {
            fs.iter().all(|&f| {
                f < k
                    && match self.direction {
                        Direction::Superlevel => self.cells[f].value >= self.cells[k].value,
                        Direction::Sublevel => self.cells[f].value <= self.cells[k].value,
                    }
            })
        })
    }
}

struct Doubled {
    width: usize,
    height: usize,
}

impl Doubled {
    fn id(&self, a: usize, b: usize) -> usize {
        b * self.width + a
    }

    fn faces(&self, a: usize, b: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(4);
        if b % 2 == 1 {
            out.push((a, b - 1));
        }
        if a % 2 == 1 {
            out.push((a - 1, b));
            out.push((a + 1, b));
        }
        if b % 2 == 1 {
            out.push((a, b + 1));
        }
        out
    }
}

/// Field cells `(ix, iy)` whose squares contain the doubled cell `(a, b)`.
fn incident_squares(
    a: usize,
    b: usize,
    nx: usize,
    ny: usize,
) -> impl Iterator<Item = (usize, usize)> {
    let span = |c: usize, n: usize| -> (usize, usize) {
        if c % 2 == 1 {
            let i = (c - 1) / 2;
            (i, i + 1)
        } else {
            let i = c / 2;
            (i.saturating_sub(1), (i + 1).min(n))
        }
    };
    let (x0, x1) = span(a, nx);
    let (y0, y1) = span(b, ny);
    (y0..y1).flat_map(move |iy| (x0..x1).map(move |ix| (ix, iy)))
}

/// Builds the filtered cubical complex of `field`.
///
/// Ties among equal values are broken by dimension (faces first) and then by
/// row-major doubled coordinates.
pub fn build_filtration<T: Scalar>(
    field: &ScalarField2D<T>,
    direction: Direction,
) -> CubicalFiltration<T> {
    let (nx, ny) = (field.nx(), field.ny());
    let grid = Doubled {
        width: 2 * nx + 1,
        height: 2 * ny + 1,
    };
    let total = grid.width * grid.height;

    let mut cells = Vec::with_capacity(total);
    for b in 0..grid.height {
        for a in 0..grid.width {
            let vals = incident_squares(a, b, nx, ny).map(|(ix, iy)| field.get(ix, iy));
            let value = match direction {
                Direction::Superlevel => vals.fold(T::neg_infinity(), T::max),
                Direction::Sublevel => vals.fold(T::infinity(), T::min),
            };
            cells.push(CubicalCell {
                dim: (a % 2) + (b % 2),
                coords: (a, b),
                value,
            });
        }
    }

    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| {
        let (ci, cj) = (&cells[i], &cells[j]);
        let by_value = match direction {
            Direction::Superlevel => cmp(&cj.value, &ci.value),
            Direction::Sublevel => cmp(&ci.value, &cj.value),
        };
        by_value.then(ci.dim.cmp(&cj.dim)).then(i.cmp(&j))
    });
    let mut position = vec![0usize; total];
    for (k, &id) in order.iter().enumerate() {
        position[id] = k;
    }

    let sorted_cells: Vec<CubicalCell<T>> = order.iter().map(|&id| cells[id]).collect();
    let faces = sorted_cells
        .iter()
        .map(|c| {
            let mut fs: Vec<usize> = grid
                .faces(c.coords.0, c.coords.1)
                .into_iter()
                .map(|(a, b)| position[grid.id(a, b)])
                .collect();
            fs.sort_unstable();
            fs
        })
        .collect();

    CubicalFiltration {
        direction,
        cells: sorted_cells,
        faces,
        order,
    }
}

/// Persistence diagram of a cubical filtration. Zero-length pairs are dropped.
pub fn persistence<T: Scalar>(filt: &CubicalFiltration<T>) -> Result<PersistenceDiagram<T>> {
    let dims: Vec<usize> = filt.cells.iter().map(|c| c.dim).collect();
    let reduced = reduce_with_clearing(&filt.boundary_matrix(), &dims)?;
    let mut diagram = PersistenceDiagram::new(filt.direction);
    for &(b, d) in reduced.pairs() {
        let (birth, death) = (filt.cells[b].value, filt.cells[d].value);
        if birth != death {
            diagram.pairs.push(PersistencePair {
                dim: dims[b],
                birth,
                death,
            });
        }
    }
    for j in reduced.essential() {
        diagram.pairs.push(PersistencePair {
            dim: dims[j],
            birth: filt.cells[j].value,
            death: filt.direction.essential_death(),
        });
    }
    Ok(diagram)
}

/// Superlevel diagram of a field: `persistence(build_filtration(field, Superlevel))`.
pub fn superlevel_diagram<T: Scalar>(field: &ScalarField2D<T>) -> Result<PersistenceDiagram<T>> {
    persistence(&build_filtration(field, Direction::Superlevel))
}

/// `(β0, β1)` of the superlevel complex at `level`, without any persistence
/// machinery: components by flood fill over squares (squares sharing a vertex
/// are connected), loops from the Euler characteristic `V − E + F = β0 − β1`.
pub fn brute_force_betti<T: Scalar>(field: &ScalarField2D<T>, level: T) -> (usize, usize) {
    let (nx, ny) = (field.nx(), field.ny());
    let inside = |ix: usize, iy: usize| field.get(ix, iy) >= level;

    let w = 2 * nx + 1;
    let h = 2 * ny + 1;
    let mut present = vec![false; w * h];
    let mut faces = 0usize;
    for iy in 0..ny {
        for ix in 0..nx {
            if !inside(ix, iy) {
                continue;
            }
            faces += 1;
            let (a, b) = (2 * ix + 1, 2 * iy + 1);
            for db in 0..3 {
                for da in 0..3 {
                    present[(b + db - 1) * w + (a + da - 1)] = true;
                }
            }
        }
    }
    let (mut v, mut e) = (0isize, 0isize);
    for b in 0..h {
        for a in 0..w {
            if present[b * w + a] && !(a % 2 == 1 && b % 2 == 1) {
                if a % 2 == 0 && b % 2 == 0 {
                    v += 1;
                } else {
                    e += 1;
                }
            }
        }
    }

    let mut seen = vec![false; nx * ny];
    let mut components = 0usize;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if seen[start] || !inside(start % nx, start / nx) {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(c) = stack.pop() {
            let (cx, cy) = ((c % nx) as isize, (c / nx) as isize);
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (x, y) = (cx + dx, cy + dy);
                    if x < 0 || y < 0 || x >= nx as isize || y >= ny as isize {
                        continue;
                    }
                    let k = y as usize * nx + x as usize;
                    if !seen[k] && inside(x as usize, y as usize) {
                        seen[k] = true;
                        stack.push(k);
                    }
                }
            }
        }
    }
    let euler = v - e + faces as isize;
    let beta1 = components as isize - euler;
    debug_assert!(beta1 >= 0);
    (components, beta1.max(0) as usize)
}
