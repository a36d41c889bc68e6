//! Linear algebra over Z2 on sparse column matrices.
//!
//! Columns are chains: sorted lists of row indices with coefficient 1. Every
//! persistence engine in the crate (cubical, Rips, the consistency estimator)
//! funnels through [`reduce`] / [`reduce_with_clearing`] and [`image_rank`].

use crate::error::{Error, Result};

/// A Z2 chain: strictly increasing row indices.
pub type Column = Vec<usize>;

/// Sum of two chains over Z2 (symmetric difference of sorted index sets).
pub fn add_columns(a: &[usize], b: &[usize]) -> Column {
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

/// Sparse Z2 matrix stored column-wise.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Z2Matrix {
    rows: usize,
    columns: Vec<Column>,
}

impl Z2Matrix {
    pub fn new(rows: usize) -> Self {
        Self {
            rows,
            columns: Vec::new(),
        }
    }

    /// Builds a matrix, validating that every column is strictly increasing and in range.
    pub fn from_columns(rows: usize, columns: Vec<Column>) -> Result<Self> {
        for (j, col) in columns.iter().enumerate() {
            check_column(rows, col).map_err(|e| e.context(format!("column {j}")))?;
        }
        Ok(Self { rows, columns })
    }

    /// Builds a matrix from unsorted columns; repeated indices cancel in pairs.
    pub fn from_unsorted(rows: usize, columns: Vec<Vec<usize>>) -> Result<Self> {
        let columns = columns
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                let mut out: Column = Vec::with_capacity(c.len());
                for x in c {
                    if out.last() == Some(&x) {
                        out.pop();
                    } else {
                        out.push(x);
                    }
                }
                out
            })
            .collect();
        Self::from_columns(rows, columns)
    }

    pub fn push_column(&mut self, col: Column) -> Result<()> {
        check_column(self.rows, &col)?;
        self.columns.push(col);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }
}

fn check_column(rows: usize, col: &[usize]) -> Result<()> {
    if col.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput(
            "column indices must be strictly increasing".into(),
        ));
    }
    if let Some(&last) = col.last() {
        if last >= rows {
            return Err(Error::InvalidInput(format!(
                "row index {last} out of range for {rows} rows"
            )));
        }
    }
    Ok(())
}

/// Output of the column reduction `R = D V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedMatrix {
    reduced: Z2Matrix,
    low: Vec<Option<usize>>,
    pairs: Vec<(usize, usize)>,
}

impl ReducedMatrix {
    pub fn matrix(&self) -> &Z2Matrix {
        &self.reduced
    }

    /// Lowest nonzero row of reduced column `j`, if any.
    pub fn low(&self, j: usize) -> Option<usize> {
        self.low[j]
    }

    /// `(birth, death)` index pairs, `birth = low(death)`, ordered by death column.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of nonzero reduced columns, i.e. the rank of the input.
    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    /// Columns that reduce to zero and never appear as a pivot row. For a square
    /// filtered boundary matrix these are the essential classes.
    pub fn essential(&self) -> Vec<usize> {
        let n = self.reduced.n_cols();
        let mut is_birth = vec![false; n.max(self.reduced.n_rows())];
        for &(b, _) in &self.pairs {
            is_birth[b] = true;
        }
        (0..n)
            .filter(|&j| self.low[j].is_none() && !is_birth[j])
            .collect()
    }
}

/// Standard left-to-right reduction.
pub fn reduce(boundary: &Z2Matrix) -> ReducedMatrix {
    let n = boundary.n_cols();
    let mut cols = boundary.columns.clone();
    let mut pivot: Vec<Option<usize>> = vec![None; boundary.n_rows()];
    let mut low = vec![None; n];
    let mut pairs = Vec::new();
    for j in 0..n {
        if let Some(l) = reduce_one(&mut cols, &mut pivot, j) {
            low[j] = Some(l);
            pairs.push((l, j));
        }
    }
    ReducedMatrix {
        reduced: Z2Matrix {
            rows: boundary.n_rows(),
            columns: cols,
        },
        low,
        pairs,
    }
}

/// Reduction with the clearing (twist) optimization for a square boundary
/// matrix of a filtered cell complex. `dims[j]` is the dimension of cell `j`.
///
/// Dimensions are processed from the top down; once column `j` reduces with
/// pivot `i`, column `i` is known to reduce to zero and is skipped. The output
/// is identical to [`reduce`].
pub fn reduce_with_clearing(boundary: &Z2Matrix, dims: &[usize]) -> Result<ReducedMatrix> {
    let n = boundary.n_cols();
    if dims.len() != n || boundary.n_rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "clearing needs a square matrix with one dimension per column (rows {}, cols {n}, dims {})",
            boundary.n_rows(),
            dims.len()
        )));
    }
    let top = dims.iter().copied().max().unwrap_or(0);
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (j, &d) in dims.iter().enumerate() {
        by_dim[d].push(j);
    }

    let mut cols = boundary.columns.clone();
    let mut pivot: Vec<Option<usize>> = vec![None; n];
    let mut low = vec![None; n];
    let mut cleared = vec![false; n];
    let mut pairs = Vec::new();
    for d in (0..=top).rev() {
        for &j in &by_dim[d] {
            if cleared[j] {
                cols[j].clear();
                continue;
            }
            if let Some(l) = reduce_one(&mut cols, &mut pivot, j) {
                low[j] = Some(l);
                cleared[l] = true;
                pairs.push((l, j));
            }
        }
    }
    pairs.sort_unstable_by_key(|&(_, d)| d);
    Ok(ReducedMatrix {
        reduced: Z2Matrix {
            rows: n,
            columns: cols,
        },
        low,
        pairs,
    })
}

/// Reduces column `j` against the pivots registered so far; registers its own
/// pivot when it stays nonzero.
fn reduce_one(cols: &mut [Column], pivot: &mut [Option<usize>], j: usize) -> Option<usize> {
    while let Some(&l) = cols[j].last() {
        match pivot[l] {
            Some(k) => {
                let sum = add_columns(&cols[j], &cols[k]);
                cols[j] = sum;
            }
            None => {
                pivot[l] = Some(j);
                return Some(l);
            }
        }
    }
    None
}

/// Z2 rank by column elimination.
pub fn rank(m: &Z2Matrix) -> usize {
    reduce(m).rank()
}

/// Rank of the map on homology induced by an inclusion A ⊆ B, computed as
/// `rank([Z_A | B_B]) - rank(B_B)`.
///
/// `cycles` holds cycle representatives of A written in B's cell indexing,
/// `boundaries` the boundary matrix of B one dimension up. Both must share
/// the same row space.
pub fn image_rank(cycles: &Z2Matrix, boundaries: &Z2Matrix) -> Result<usize> {
    if cycles.n_rows() != boundaries.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "cycle rows {} vs boundary rows {}",
            cycles.n_rows(),
            boundaries.n_rows()
        )));
    }
    let mut pivot: Vec<Option<usize>> = vec![None; boundaries.n_rows()];
    let mut cols: Vec<Column> = Vec::with_capacity(boundaries.n_cols() + cycles.n_cols());
    cols.extend(boundaries.columns.iter().cloned());
    cols.extend(cycles.columns.iter().cloned());
    for j in 0..boundaries.n_cols() {
        reduce_one(&mut cols, &mut pivot, j);
    }
    let mut extra = 0;
    for j in boundaries.n_cols()..cols.len() {
        if reduce_one(&mut cols, &mut pivot, j).is_some() {
            extra += 1;
        }
    }
    Ok(extra)
}

/// Cycle representatives for the columns of `boundary` that reduce to zero,
/// skipping those flagged in `skip`. Returned chains live in the column space
/// (they are columns of `V` in `R = D V`).
///
/// With `skip` marking the pivot rows of the next boundary map up, the result
/// is a basis of homology modulo boundaries.
pub fn cycle_representatives(boundary: &Z2Matrix, skip: &[bool]) -> Vec<Column> {
    let n = boundary.n_cols();
    let mut cols = boundary.columns.clone();
    let mut v: Vec<Column> = (0..n).map(|j| vec![j]).collect();
    let mut pivot: Vec<Option<usize>> = vec![None; boundary.n_rows()];
    let mut out = Vec::new();
    for j in 0..n {
        loop {
            match cols[j].last() {
                Some(&l) => match pivot[l] {
                    Some(k) => {
                        cols[j] = add_columns(&cols[j], &cols[k]);
                        v[j] = add_columns(&v[j], &v[k]);
                    }
                    None => {
                        pivot[l] = Some(j);
                        break;
                    }
                },
                None => {
                    if !skip.get(j).copied().unwrap_or(false) {
                        out.push(v[j].clone());
                    }
                    break;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense row-echelon rank, independent of the column reduction.
    fn dense_rank(rows: usize, cols: &[Column]) -> usize {
        let mut m: Vec<Vec<bool>> = vec![vec![false; cols.len()]; rows];
        for (j, c) in cols.iter().enumerate() {
            for &i in c {
                m[i][j] = true;
            }
        }
        let mut rank = 0;
        for c in 0..cols.len() {
            let Some(p) = (rank..rows).find(|&r| m[r][c]) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..rows {
                if r != rank && m[r][c] {
                    let pivot_row = m[rank].clone();
                    for (x, y) in m[r].iter_mut().zip(pivot_row) {
                        *x ^= y;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn triangle_boundary() -> (Z2Matrix, Vec<usize>) {
        // v0 v1 v2 e01 e02 e12 t012
        let cols = vec![
            vec![],
            vec![],
            vec![],
            vec![0, 1],
            vec![0, 2],
            vec![1, 2],
            vec![3, 4, 5],
        ];
        (
            Z2Matrix::from_columns(7, cols).unwrap(),
            vec![0, 0, 0, 1, 1, 1, 2],
        )
    }

    #[test]
    fn add_columns_cancels() {
        assert_eq!(add_columns(&[1, 3], &[3, 5]), vec![1, 5]);
        assert_eq!(add_columns(&[2, 4, 7], &[2, 4, 7]), Vec::<usize>::new());
        assert_eq!(add_columns(&[], &[2]), vec![2]);
    }

    #[test]
    fn rejects_unsorted_or_out_of_range() {
        assert!(Z2Matrix::from_columns(3, vec![vec![2, 1]]).is_err());
        assert!(Z2Matrix::from_columns(3, vec![vec![1, 1]]).is_err());
        assert!(Z2Matrix::from_columns(3, vec![vec![3]]).is_err());
        let m = Z2Matrix::from_unsorted(4, vec![vec![3, 1, 1, 0]]).unwrap();
        assert_eq!(m.column(0), &[0, 3]);
    }

    #[test]
    fn zero_matrix_has_no_pairs() {
        let m = Z2Matrix::from_columns(4, vec![vec![]; 4]).unwrap();
        let r = reduce(&m);
        assert!(r.pairs().is_empty());
        assert_eq!(r.essential(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_edge_pairs_younger_vertex() {
        let m = Z2Matrix::from_columns(3, vec![vec![], vec![], vec![0, 1]]).unwrap();
        let r = reduce(&m);
        assert_eq!(r.pairs(), &[(1, 2)]);
        assert_eq!(r.essential(), vec![0]);
    }

    #[test]
    fn filled_triangle_reduction() {
        let (m, dims) = triangle_boundary();
        let r = reduce(&m);
        // e01 kills v1, e02 kills v2, e12 is a cycle killed by the face.
        assert_eq!(r.pairs(), &[(1, 3), (2, 4), (5, 6)]);
        let ess = r.essential();
        assert_eq!(ess, vec![0]);
        assert_eq!(dims[ess[0]], 0);
        assert_eq!(reduce_with_clearing(&m, &dims).unwrap(), r);
    }

    #[test]
    fn rank_small_cases() {
        let id = Z2Matrix::from_columns(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(rank(&id), 3);
        let twin = Z2Matrix::from_columns(3, vec![vec![0, 2], vec![0, 2]]).unwrap();
        assert_eq!(rank(&twin), 1);
    }

    #[test]
    fn image_rank_edge_cases() {
        let empty = Z2Matrix::new(4);
        let z = Z2Matrix::from_columns(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(image_rank(&empty, &z).unwrap(), 0);
        assert_eq!(image_rank(&z, &empty).unwrap(), 2);
        assert!(matches!(
            image_rank(&z, &Z2Matrix::new(5)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn image_rank_loop_capped_in_target() {
        // Square loop on vertices 0..4: edges 01, 12, 23, 03, diagonal 02.
        // A has only the four outer edges; B adds the diagonal and both triangles.
        // Edge indexing (B): 0:01 1:12 2:23 3:03 4:02
        let loop_a = Z2Matrix::from_columns(5, vec![vec![0, 1, 2, 3]]).unwrap();
        let b2 = Z2Matrix::from_columns(5, vec![vec![0, 1, 4], vec![2, 3, 4]]).unwrap();
        assert_eq!(image_rank(&loop_a, &b2).unwrap(), 0);

        // Quotient check by direct ranks: dim(Z_A + B_B) - dim(B_B).
        let all: Vec<Column> = b2
            .columns()
            .iter()
            .chain(loop_a.columns())
            .cloned()
            .collect();
        assert_eq!(dense_rank(5, &all) - dense_rank(5, b2.columns()), 0);

        // Without the triangles the loop survives.
        let b2_empty = Z2Matrix::new(5);
        assert_eq!(image_rank(&loop_a, &b2_empty).unwrap(), 1);
    }

    #[test]
    fn cycle_representatives_of_hollow_triangle() {
        let d1 = Z2Matrix::from_columns(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
        let reps = cycle_representatives(&d1, &[false; 3]);
        assert_eq!(reps, vec![vec![0, 1, 2]]);
        // Marking edge 2 as killed by the face leaves no homology.
        assert!(cycle_representatives(&d1, &[false, false, true]).is_empty());
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = (usize, Vec<Column>)> {
        (1..=max_rows, 0..=max_cols).prop_flat_map(|(rows, ncols)| {
            let col = proptest::collection::btree_set(0..rows, 0..=rows)
                .prop_map(|s| s.into_iter().collect::<Vec<_>>());
            (Just(rows), proptest::collection::vec(col, ncols))
        })
    }

    proptest! {
        #[test]
        fn rank_matches_dense_oracle((rows, cols) in arb_matrix(8, 8)) {
            let m = Z2Matrix::from_columns(rows, cols.clone()).unwrap();
            prop_assert_eq!(rank(&m), dense_rank(rows, &cols));
        }

        #[test]
        fn reduce_is_idempotent((rows, cols) in arb_matrix(10, 12)) {
            let m = Z2Matrix::from_columns(rows, cols).unwrap();
            let once = reduce(&m);
            let twice = reduce(once.matrix());
            prop_assert_eq!(once.matrix(), twice.matrix());
            prop_assert_eq!(once.pairs(), twice.pairs());
        }

        #[test]
        fn lows_are_distinct((rows, cols) in arb_matrix(10, 12)) {
            let m = Z2Matrix::from_columns(rows, cols).unwrap();
            let r = reduce(&m);
            let mut lows: Vec<usize> = (0..m.n_cols()).filter_map(|j| r.low(j)).collect();
            let n = lows.len();
            lows.sort_unstable();
            lows.dedup();
            prop_assert_eq!(lows.len(), n);
        }

        #[test]
        fn image_rank_matches_dense_ranks(
            (rows, z) in arb_matrix(8, 5),
            seed in proptest::collection::vec(proptest::collection::btree_set(0usize..8, 0..8), 0..6),
        ) {
            let b: Vec<Column> = seed
                .into_iter()
                .map(|s| s.into_iter().filter(|&i| i < rows).collect())
                .collect();
            let zm = Z2Matrix::from_columns(rows, z.clone()).unwrap();
            let bm = Z2Matrix::from_columns(rows, b.clone()).unwrap();
            let all: Vec<Column> = b.iter().chain(z.iter()).cloned().collect();
            let expected = dense_rank(rows, &all) - dense_rank(rows, &b);
            let got = image_rank(&zm, &bm).unwrap();
            prop_assert_eq!(got, expected);
            prop_assert!(got <= rank(&zm));
        }
    }
}
