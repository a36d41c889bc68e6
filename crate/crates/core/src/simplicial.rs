//! Vietoris–Rips filtrations and fixed-scale Rips complexes (up to triangles).

use std::collections::HashMap;

use crate::cloud::PointCloud;
use crate::diagram::{Direction, PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::scalar::{cmp, Scalar};
use crate::z2::{reduce_with_clearing, Z2Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex<T> {
    /// Sorted vertex indices into the source cloud.
    pub vertices: Vec<usize>,
    /// Diameter: the largest pairwise distance among the vertices.
    pub value: T,
}

impl<T> Simplex<T> {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Simplices sorted by (value, dimension, lexicographic vertices).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialFiltration<T> {
    pub simplices: Vec<Simplex<T>>,
    pub max_dim: usize,
}

struct Flag<T> {
    edges: Vec<([usize; 2], T)>,
    triangles: Vec<([usize; 3], T)>,
}

/// All edges (and triangles when `max_dim ≥ 2`) with diameter ≤ `threshold`.
fn flag_simplices<T: Scalar>(cloud: &PointCloud<T>, threshold: T, max_dim: usize) -> Flag<T> {
    let n = cloud.len();
    let mut adj: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let d = cloud.dist(u, v);
            if d <= threshold {
                adj[u].push((v, d));
                edges.push(([u, v], d));
            }
        }
    }
    let mut triangles = Vec::new();
    if max_dim >= 2 {
        for u in 0..n {
            let nu = &adj[u];
            for (k, &(v, duv)) in nu.iter().enumerate() {
                let nv = &adj[v];
                // Both lists are sorted by neighbour index; intersect on w > v.
                let (mut i, mut j) = (k + 1, 0);
                while i < nu.len() && j < nv.len() {
                    let (wu, duw) = nu[i];
                    let (wv, dvw) = nv[j];
                    match wu.cmp(&wv) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            triangles.push(([u, v, wu], duv.max(duw).max(dvw)));
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
        }
    }
    Flag { edges, triangles }
}

/// Rips filtration truncated at diameter `r_max` and dimension `max_dim ∈ {1, 2}`.
pub fn rips_filtration<T: Scalar>(
    cloud: &PointCloud<T>,
    r_max: T,
    max_dim: usize,
) -> Result<SimplicialFiltration<T>> {
    if !(1..=2).contains(&max_dim) {
        return Err(Error::InvalidInput(format!(
            "max_dim must be 1 or 2 (got {max_dim})"
        )));
    }
    if !(r_max > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "r_max must be positive (got {r_max})"
        )));
    }
    let flag = flag_simplices(cloud, r_max, max_dim);
    let mut simplices: Vec<Simplex<T>> = (0..cloud.len())
        .map(|v| Simplex {
            vertices: vec![v],
            value: T::zero(),
        })
        .collect();
    simplices.extend(flag.edges.into_iter().map(|(e, d)| Simplex {
        vertices: e.to_vec(),
        value: d,
    }));
    simplices.extend(flag.triangles.into_iter().map(|(t, d)| Simplex {
        vertices: t.to_vec(),
        value: d,
    }));
    simplices.sort_by(|a, b| {
        cmp(&a.value, &b.value)
            .then(a.vertices.len().cmp(&b.vertices.len()))
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(SimplicialFiltration { simplices, max_dim })
}

/// Sublevel persistence of a Rips filtration. Zero-length pairs are dropped;
/// classes still alive at `r_max` are reported as essential (`death = +∞`).
pub fn rips_persistence<T: Scalar>(
    filt: &SimplicialFiltration<T>,
) -> Result<PersistenceDiagram<T>> {
    let index: HashMap<&[usize], usize> = filt
        .simplices
        .iter()
        .enumerate()
        .map(|(i, s)| (s.vertices.as_slice(), i))
        .collect();
    let mut columns = Vec::with_capacity(filt.simplices.len());
    for s in &filt.simplices {
        let mut col = Vec::with_capacity(s.vertices.len());
        if s.vertices.len() > 1 {
            for skip in 0..s.vertices.len() {
                let face: Vec<usize> = s
                    .vertices
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let idx = index
                    .get(face.as_slice())
                    .ok_or_else(|| Error::InvalidInput(format!("missing face {face:?}")))?;
                col.push(*idx);
            }
        }
        col.sort_unstable();
        columns.push(col);
    }
    let n = filt.simplices.len();
    let boundary = Z2Matrix::from_columns(n, columns)?;
    let dims: Vec<usize> = filt.simplices.iter().map(Simplex::dim).collect();
    let reduced = reduce_with_clearing(&boundary, &dims)?;

    let mut diagram = PersistenceDiagram::new(Direction::Sublevel);
    for &(b, d) in reduced.pairs() {
        let (birth, death) = (filt.simplices[b].value, filt.simplices[d].value);
        if birth != death {
            diagram.pairs.push(PersistencePair {
                dim: dims[b],
                birth,
                death,
            });
        }
    }
    for j in reduced.essential() {
        // Top-dimensional cells are never tracked as classes.
        if dims[j] < filt.max_dim {
            diagram.pairs.push(PersistencePair {
                dim: dims[j],
                birth: filt.simplices[j].value,
                death: T::infinity(),
            });
        }
    }
    Ok(diagram)
}

/// A static flag complex with vertices `0..n_vertices`, edges and triangles in
/// ascending (diameter, lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FixedComplex {
    n_vertices: usize,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl FixedComplex {
    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    fn edge_index(&self) -> HashMap<[usize; 2], usize> {
        self.edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect()
    }

    /// ∂₁: edges → vertices.
    pub fn boundary_1(&self) -> Z2Matrix {
        let cols = self.edges.iter().map(|e| e.to_vec()).collect();
        Z2Matrix::from_columns(self.n_vertices, cols).expect("edges are sorted vertex pairs")
    }

    /// ∂₂: triangles → edges.
    pub fn boundary_2(&self) -> Z2Matrix {
        let index = self.edge_index();
        let cols = self
            .triangles
            .iter()
            .map(|&[a, b, c]| {
                let mut col = vec![index[&[a, b]], index[&[a, c]], index[&[b, c]]];
                col.sort_unstable();
                col
            })
            .collect();
        Z2Matrix::from_columns(self.edges.len(), cols).expect("triangle faces are edges")
    }

    /// Betti numbers from ranks: `β0 = V − rk ∂₁`, `β1 = E − rk ∂₁ − rk ∂₂`.
    pub fn betti(&self) -> (usize, usize) {
        let r1 = crate::z2::rank(&self.boundary_1());
        let r2 = crate::z2::rank(&self.boundary_2());
        (self.n_vertices - r1, self.edges.len() - r1 - r2)
    }

    /// Subcomplex induced on the vertices with `keep[v]`, plus maps from its
    /// vertices and edges to this complex's indices. Flag complexes are closed
    /// under this operation.
    pub fn induced(&self, keep: &[bool]) -> (FixedComplex, Vec<usize>, Vec<usize>) {
        let mut local = vec![usize::MAX; self.n_vertices];
        let mut vertex_map = Vec::new();
        for v in 0..self.n_vertices {
            if keep[v] {
                local[v] = vertex_map.len();
                vertex_map.push(v);
            }
        }
        let mut edges = Vec::new();
        let mut edge_map = Vec::new();
        for (i, &[a, b]) in self.edges.iter().enumerate() {
            if keep[a] && keep[b] {
                edges.push([local[a], local[b]]);
                edge_map.push(i);
            }
        }
        let triangles = self
            .triangles
            .iter()
            .filter(|t| t.iter().all(|&v| keep[v]))
            .map(|&[a, b, c]| [local[a], local[b], local[c]])
            .collect();
        (
            FixedComplex {
                n_vertices: vertex_map.len(),
                edges,
                triangles,
            },
            vertex_map,
            edge_map,
        )
    }
}

/// Rips complex at a fixed edge threshold. Vertex `i` is point `i` of the cloud.
///
/// With `scale = 2r` its 1-skeleton has the same components as the union of
/// radius-`r` balls around the points.
pub fn complex_at<T: Scalar>(
    cloud: &PointCloud<T>,
    scale: T,
    max_dim: usize,
) -> Result<FixedComplex> {
    if !(scale >= T::zero()) {
        return Err(Error::InvalidInput(format!(
            "scale must be nonnegative (got {scale})"
        )));
    }
    if max_dim > 2 {
        return Err(Error::InvalidInput(format!(
            "max_dim must be at most 2 (got {max_dim})"
        )));
    }
    if max_dim == 0 {
        return Ok(FixedComplex {
            n_vertices: cloud.len(),
            ..Default::default()
        });
    }
    let mut flag = flag_simplices(cloud, scale, max_dim);
    flag.edges
        .sort_by(|a, b| cmp(&a.1, &b.1).then(a.0.cmp(&b.0)));
    flag.triangles
        .sort_by(|a, b| cmp(&a.1, &b.1).then(a.0.cmp(&b.0)));
    Ok(FixedComplex {
        n_vertices: cloud.len(),
        edges: flag.edges.into_iter().map(|(e, _)| e).collect(),
        triangles: flag.triangles.into_iter().map(|(t, _)| t).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cloud(pts: &[[f64; 2]]) -> PointCloud<f64> {
        PointCloud::from_points(2, pts).unwrap()
    }

    fn unit_square() -> PointCloud<f64> {
        cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    }

    fn equilateral() -> PointCloud<f64> {
        cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]])
    }

    #[test]
    fn single_point() {
        let f = rips_filtration(&cloud(&[[2.0, 3.0]]), 1.0, 2).unwrap();
        assert_eq!(
            f.simplices,
            vec![Simplex {
                vertices: vec![0],
                value: 0.0
            }]
        );
        let d = rips_persistence(&f).unwrap();
        assert_eq!(d.pairs.len(), 1);
        assert!(d.pairs[0].is_essential());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(rips_filtration(&unit_square(), 1.0, 3).is_err());
        assert!(rips_filtration(&unit_square(), 0.0, 2).is_err());
        assert!(complex_at(&unit_square(), -1.0, 2).is_err());
    }

    #[test]
    fn equilateral_filtration() {
        let f = rips_filtration(&equilateral(), 1.0 + 1e-12, 2).unwrap();
        let count = |d| f.simplices.iter().filter(|s| s.dim() == d).count();
        assert_eq!((count(0), count(1), count(2)), (3, 3, 1));
        for s in f.simplices.iter().filter(|s| s.dim() > 0) {
            assert!((s.value - 1.0).abs() < 1e-12);
        }
        let d = rips_persistence(&f).unwrap();
        let h0: Vec<_> = d.in_dim(0).collect();
        assert_eq!(h0.len(), 3);
        assert_eq!(h0.iter().filter(|p| p.is_essential()).count(), 1);
        assert!(h0
            .iter()
            .filter(|p| !p.is_essential())
            .all(|p| p.birth == 0.0 && (p.death - 1.0).abs() < 1e-12));
        assert_eq!(d.in_dim(1).count(), 0);
    }

    #[test]
    fn unit_square_filtration_and_loop() {
        let f = rips_filtration(&unit_square(), 2.0, 2).unwrap();
        let edges: Vec<_> = f.simplices.iter().filter(|s| s.dim() == 1).collect();
        assert_eq!(edges.len(), 6);
        assert_eq!(edges.iter().filter(|s| s.value == 1.0).count(), 4);
        assert_eq!(edges.iter().filter(|s| s.value == 2f64.sqrt()).count(), 2);
        let tris: Vec<_> = f.simplices.iter().filter(|s| s.dim() == 2).collect();
        assert_eq!(tris.len(), 4);
        assert!(tris.iter().all(|s| s.value == 2f64.sqrt()));

        let d = rips_persistence(&f).unwrap();
        let h1: Vec<_> = d.in_dim(1).collect();
        assert_eq!(h1.len(), 1);
        assert_eq!((h1[0].birth, h1[0].death), (1.0, 2f64.sqrt()));
        assert_eq!(d.in_dim(0).count(), 4);
    }

    #[test]
    fn far_points_stay_separate() {
        let c = cloud(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]]);
        let d = rips_persistence(&rips_filtration(&c, 1.0, 2).unwrap()).unwrap();
        assert_eq!(d.essential_count(0), 4);
    }

    #[test]
    fn fixed_complexes() {
        let two = cloud(&[[0.0, 0.0], [1.0, 0.0]]);
        let c0 = complex_at(&two, 0.0, 2).unwrap();
        assert_eq!((c0.n_vertices(), c0.edges().len()), (2, 0));
        let c1 = complex_at(&two, 1.0, 2).unwrap();
        assert_eq!(c1.edges(), &[[0, 1]]);
        assert_eq!(c1.betti(), (1, 0));
    }

    #[test]
    fn circle_has_one_loop() {
        let n = 20;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let chord = 2.0 * (std::f64::consts::PI / n as f64).sin();
        let c = complex_at(&cloud(&pts), chord * 1.01, 2).unwrap();
        // Oracle: a cycle graph, V = E, one component, cycle rank E − V + 1.
        assert_eq!(c.edges().len(), n);
        assert!(c.triangles().is_empty());
        assert_eq!(c.betti(), (1, 1));
    }

    #[test]
    fn induced_subcomplex_maps() {
        let c = complex_at(&unit_square(), 2.0, 2).unwrap();
        let (sub, vmap, emap) = c.induced(&[true, true, false, true]);
        assert_eq!(sub.n_vertices(), 3);
        assert_eq!(vmap, vec![0, 1, 3]);
        assert_eq!(sub.edges().len(), 3);
        assert_eq!(sub.triangles().len(), 1);
        for (i, &[a, b]) in sub.edges().iter().enumerate() {
            assert_eq!(c.edges()[emap[i]], [vmap[a], vmap[b]]);
        }
    }

    fn components_of_balls(pts: &[[f64; 2]], r: f64) -> usize {
        // Flood fill on "balls intersect" ⟺ centres within 2r.
        let n = pts.len();
        let mut seen = vec![false; n];
        let mut comps = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            comps += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let d =
                        ((pts[u][0] - pts[v][0]).powi(2) + (pts[u][1] - pts[v][1]).powi(2)).sqrt();
                    if !seen[v] && d <= 2.0 * r {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        comps
    }

    proptest! {
        #[test]
        fn beta0_matches_ball_union(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..25),
            r in 0.05f64..0.8,
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let c = complex_at(&cloud(&pts), 2.0 * r, 2).unwrap();
            prop_assert_eq!(c.betti().0, components_of_balls(&pts, r));
        }

        #[test]
        fn h0_class_count_is_point_count(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..20),
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let c = cloud(&pts);
            let d = rips_persistence(&rips_filtration(&c, 10.0, 2).unwrap()).unwrap();
            // Coincident points merge at 0 and are dropped as zero-length pairs.
            let distinct = {
                let mut v = pts.clone();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v.len()
            };
            prop_assert_eq!(d.in_dim(0).count(), distinct);
        }

        #[test]
        fn scaling_scales_diagram(
            pts in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2..12),
            c in 0.5f64..4.0,
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(a, b)| [a, b]).collect();
            let base = cloud(&pts);
            let d1 = rips_persistence(&rips_filtration(&base, 20.0, 2).unwrap()).unwrap();
            let d2 = rips_persistence(&rips_filtration(&base.scaled(c), 20.0 * c, 2).unwrap()).unwrap();
            let a = d1.canonical();
            let b = d2.canonical();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!(p.dim, q.dim);
                prop_assert!((p.birth * c - q.birth).abs() < 1e-9);
                prop_assert!(p.death == q.death || (p.death * c - q.death).abs() < 1e-9);
            }
        }
    }
}
