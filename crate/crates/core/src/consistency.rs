//! Topologically consistent Betti estimation from samples.
//!
//! For a level `L`, the estimate is the rank of the map
//! `H_p(A) → H_p(B)` induced by the inclusion of the Rips complex on
//! `χ^{L+ε}` into the one on `χ^{L−ε}`, both at edge scale `2r`, where
//! `χ^L = {X_i : p̂(X_i) ≥ L}`.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use crate::cloud::PointCloud;
use crate::diagram::{BettiVector, Direction, PersistenceDiagram, PersistencePair};
use crate::error::{Error, Result};
use crate::kde::KdeModel;
use crate::scalar::{cmp, Scalar};
use crate::simplicial::{complex_at, FixedComplex};
use crate::z2::{cycle_representatives, image_rank, reduce, reduce_with_clearing, Z2Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig<T> {
    pub epsilon: T,
    /// Ball radius; complexes are built at edge scale `2r`.
    pub radius: T,
    pub level: T,
    pub dim: usize,
    /// Subsample size used when the estimator is fed from a trajectory.
    pub n: usize,
}

impl<T: Scalar> EstimatorConfig<T> {
    pub const DEFAULT_EPSILON: f64 = 1e-5;
    pub const DEFAULT_N: usize = 500;

    pub fn new(radius: T, level: T, dim: usize) -> Self {
        Self {
            epsilon: T::lit(Self::DEFAULT_EPSILON),
            radius,
            level,
            dim,
            n: Self::DEFAULT_N,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive (got {})",
                self.epsilon
            )));
        }
        if !(self.radius > T::zero() && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "radius must be positive (got {})",
                self.radius
            )));
        }
        if !self.level.is_finite() {
            return Err(Error::InvalidInput(format!(
                "level must be finite (got {})",
                self.level
            )));
        }
        if self.dim > 1 {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if self.n == 0 {
            return Err(Error::InvalidInput(
                "subsample size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Indices with `densities[i] ≥ level`.
pub fn superlevel_points<T: Scalar>(densities: &[T], level: T) -> Vec<usize> {
    (0..densities.len())
        .filter(|&i| densities[i] >= level)
        .collect()
}

/// KDE values at the samples, divided by their maximum.
pub fn normalized_densities<T: Scalar>(
    samples: &PointCloud<T>,
    kde: &KdeModel<T>,
) -> Result<Vec<T>> {
    let mut p = kde.evaluate(samples)?;
    let max = p.iter().copied().fold(T::zero(), T::max);
    if !(max > T::zero()) {
        return Err(Error::ZeroField);
    }
    for v in &mut p {
        *v = *v / max;
    }
    Ok(p)
}

/// Number of components of `b` that contain at least one vertex of `a`.
pub fn h0_image_rank_unionfind(a: &[usize], b: &FixedComplex) -> usize {
    let mut uf = UnionFind::<usize>::new(b.n_vertices());
    for &[u, v] in b.edges() {
        uf.union(u, v);
    }
    let mut roots: Vec<usize> = a.iter().map(|&v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Rank of `H_p(A) → H_p(B)` for `A` a subcomplex of `B`, with `vmap`/`emap`
/// sending A's vertices/edges to B's.
pub fn inclusion_rank(
    a: &FixedComplex,
    b: &FixedComplex,
    vmap: &[usize],
    emap: &[usize],
    dim: usize,
) -> Result<usize> {
    match dim {
        0 => {
            let cycles = vmap.iter().map(|&v| vec![v]).collect();
            let cycles = Z2Matrix::from_columns(b.n_vertices(), cycles)?;
            image_rank(&cycles, &b.boundary_1())
        }
        1 => {
            let d2 = reduce(&a.boundary_2());
            let mut killed = vec![false; a.edges().len()];
            for &(row, _) in d2.pairs() {
                killed[row] = true;
            }
            let cycles = cycle_representatives(&a.boundary_1(), &killed)
                .into_iter()
                .map(|z| {
                    let mut col: Vec<usize> = z.into_iter().map(|e| emap[e]).collect();
                    col.sort_unstable();
                    col
                })
                .collect();
            let cycles = Z2Matrix::from_columns(b.edges().len(), cycles)?;
            image_rank(&cycles, &b.boundary_2())
        }
        p => Err(Error::UnsupportedDimension(p)),
    }
}

/// Superlevel persistence of a fixed complex filtered by vertex densities: a
/// simplex enters at the smallest density among its vertices, so the level-`L`
/// subcomplex is the one induced on `{i : densities[i] ≥ L}`.
pub fn density_filtration_diagram<T: Scalar>(
    complex: &FixedComplex,
    densities: &[T],
) -> Result<PersistenceDiagram<T>> {
    let nv = complex.n_vertices();
    if densities.len() != nv {
        return Err(Error::DimensionMismatch(format!(
            "{} densities for {nv} vertices",
            densities.len()
        )));
    }
    let ne = complex.edges().len();
    let edge_value = |&[u, v]: &[usize; 2]| densities[u].min(densities[v]);
    // Global ids: vertices, then edges, then triangles.
    let mut cells: Vec<(T, usize, usize)> = Vec::with_capacity(nv + ne + complex.triangles().len());
    cells.extend((0..nv).map(|v| (densities[v], 0, v)));
    cells.extend(
        complex
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| (edge_value(e), 1, nv + i)),
    );
    cells.extend(
        complex
            .triangles()
            .iter()
            .enumerate()
            .map(|(i, &[a, b, c])| {
                (
                    densities[a].min(densities[b]).min(densities[c]),
                    2,
                    nv + ne + i,
                )
            }),
    );
    cells.sort_by(|x, y| cmp(&y.0, &x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut position = vec![0usize; cells.len()];
    for (k, c) in cells.iter().enumerate() {
        position[c.2] = k;
    }
    let edge_id: HashMap<[usize; 2], usize> = complex
        .edges()
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, nv + i))
        .collect();
    let columns = cells
        .iter()
        .map(|&(_, dim, id)| {
            let mut col = match dim {
                0 => Vec::new(),
                1 => complex.edges()[id - nv]
                    .iter()
                    .map(|&v| position[v])
                    .collect(),
                _ => {
                    let [a, b, c] = complex.triangles()[id - nv - ne];
                    vec![
                        position[edge_id[&[a, b]]],
                        position[edge_id[&[a, c]]],
                        position[edge_id[&[b, c]]],
                    ]
                }
            };
            col.sort_unstable();
            col
        })
        .collect();
    let boundary = Z2Matrix::from_columns(cells.len(), columns)?;
    let dims: Vec<usize> = cells.iter().map(|c| c.1).collect();
    let reduced = reduce_with_clearing(&boundary, &dims)?;

    let mut diagram = PersistenceDiagram::new(Direction::Superlevel);
    for &(b, d) in reduced.pairs() {
        if cells[b].0 != cells[d].0 {
            diagram.pairs.push(PersistencePair {
                dim: dims[b],
                birth: cells[b].0,
                death: cells[d].0,
            });
        }
    }
    for j in reduced.essential() {
        if dims[j] < 2 {
            diagram.pairs.push(PersistencePair {
                dim: dims[j],
                birth: cells[j].0,
                death: T::neg_infinity(),
            });
        }
    }
    Ok(diagram)
}

/// A Rips complex on all samples at scale `2r`, reused across levels: the
/// complexes on `χ^{L±ε}` are its induced subcomplexes, and the image rank
/// for every level is read off one density-filtered persistence diagram.
#[derive(Debug, Clone)]
pub struct Estimator<T> {
    complex: FixedComplex,
    densities: Vec<T>,
    diagram: PersistenceDiagram<T>,
}

impl<T: Scalar> Estimator<T> {
    /// `densities[i]` is `p̂` at sample `i`, on the scale the levels are given in.
    pub fn new(samples: &PointCloud<T>, densities: Vec<T>, radius: T) -> Result<Self> {
        if densities.len() != samples.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} densities for {} samples",
                densities.len(),
                samples.len()
            )));
        }
        if !(radius > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "radius must be positive (got {radius})"
            )));
        }
        let complex = complex_at(samples, T::lit(2.0) * radius, 2)?;
        let diagram = density_filtration_diagram(&complex, &densities)?;
        Ok(Self {
            complex,
            densities,
            diagram,
        })
    }

    pub fn complex(&self) -> &FixedComplex {
        &self.complex
    }

    pub fn densities(&self) -> &[T] {
        &self.densities
    }

    pub fn diagram(&self) -> &PersistenceDiagram<T> {
        &self.diagram
    }

    /// Complexes on `χ^{L+ε}` (as a subcomplex of B, with maps) and `χ^{L−ε}`.
    pub fn complexes(
        &self,
        level: T,
        epsilon: T,
    ) -> (FixedComplex, FixedComplex, Vec<usize>, Vec<usize>) {
        let keep_b: Vec<bool> = self
            .densities
            .iter()
            .map(|&p| p >= level - epsilon)
            .collect();
        let (b, b_vertices, _) = self.complex.induced(&keep_b);
        let keep_a: Vec<bool> = b_vertices
            .iter()
            .map(|&v| self.densities[v] >= level + epsilon)
            .collect();
        let (a, vmap, emap) = b.induced(&keep_a);
        (a, b, vmap, emap)
    }

    pub fn estimate(&self, level: T, epsilon: T, dim: usize) -> Result<usize> {
        if dim > 1 {
            return Err(Error::UnsupportedDimension(dim));
        }
        Ok(self
            .diagram
            .persistent_betti(level + epsilon, level - epsilon, dim))
    }

    pub fn betti_vector(&self, levels: &[T], epsilon: T, dim: usize) -> Result<BettiVector<T>> {
        let counts = levels
            .iter()
            .map(|&l| self.estimate(l, epsilon, dim))
            .collect::<Result<_>>()?;
        Ok(BettiVector {
            dim,
            levels: levels.to_vec(),
            counts,
        })
    }
}

/// Estimate of `β_p` at `cfg.level`, with levels on the max-normalized `p̂` scale.
pub fn estimate_betti<T: Scalar>(
    samples: &PointCloud<T>,
    kde: &KdeModel<T>,
    cfg: &EstimatorConfig<T>,
) -> Result<usize> {
    cfg.validate()?;
    Estimator::new(samples, normalized_densities(samples, kde)?, cfg.radius)?.estimate(
        cfg.level,
        cfg.epsilon,
        cfg.dim,
    )
}

pub fn estimated_betti_vector<T: Scalar>(
    samples: &PointCloud<T>,
    kde: &KdeModel<T>,
    levels: &[T],
    radius: T,
    epsilon: T,
    dim: usize,
) -> Result<BettiVector<T>> {
    if dim > 1 {
        return Err(Error::UnsupportedDimension(dim));
    }
    Estimator::new(samples, normalized_densities(samples, kde)?, radius)?
        .betti_vector(levels, epsilon, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(pts: &[[f64; 2]]) -> PointCloud<f64> {
        PointCloud::from_points(2, pts).unwrap()
    }

    #[test]
    fn superlevel_selection() {
        let p = [0.2, 0.5, 1.0, 0.5];
        assert_eq!(superlevel_points(&p, 0.0), vec![0, 1, 2, 3]);
        assert_eq!(superlevel_points(&p, 0.5), vec![1, 2, 3]);
        assert!(superlevel_points(&p, 1.5).is_empty());
    }

    #[test]
    fn config_validation() {
        let ok = EstimatorConfig::new(0.3, 0.5, 0);
        assert!(ok.validate().is_ok());
        assert_eq!(ok.epsilon, 1e-5);
        assert!(EstimatorConfig { epsilon: 0.0, ..ok }.validate().is_err());
        assert!(EstimatorConfig { radius: -1.0, ..ok }.validate().is_err());
        assert!(matches!(
            EstimatorConfig { dim: 2, ..ok }.validate(),
            Err(Error::UnsupportedDimension(2))
        ));
    }

    #[test]
    fn cluster_counts() {
        let one = cloud(&[[0.0, 0.0], [0.05, 0.0], [0.0, 0.05]]);
        let est = Estimator::new(&one, vec![1.0; 3], 0.1).unwrap();
        assert_eq!(est.estimate(0.5, 1e-5, 0).unwrap(), 1);
        assert_eq!(est.estimate(1.5, 1e-5, 0).unwrap(), 0);

        let two = cloud(&[[0.0, 0.0], [0.05, 0.0], [5.0, 0.0], [5.05, 0.0]]);
        let est = Estimator::new(&two, vec![1.0; 4], 0.1).unwrap();
        assert_eq!(est.estimate(0.5, 1e-5, 0).unwrap(), 2);
        assert_eq!(est.estimate(0.5, 1e-5, 1).unwrap(), 0);
        assert!(est.estimate(0.5, 1e-5, 2).is_err());
    }

    #[test]
    fn bridge_below_level_joins_components() {
        // Two high points joined by a low point: A has two components, B one.
        let c = cloud(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        let est = Estimator::new(&c, vec![1.0, 0.5, 1.0], 0.5).unwrap();
        assert_eq!(est.estimate(0.5, 1e-5, 0).unwrap(), 1);
        assert_eq!(est.estimate(0.8, 1e-5, 0).unwrap(), 2);
    }

    fn ring(n: usize, radius: f64) -> Vec<[f64; 2]> {
        (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                [radius * t.cos(), radius * t.sin()]
            })
            .collect()
    }

    #[test]
    fn loop_is_detected_and_capped() {
        let mut pts = ring(24, 1.0);
        let c = cloud(&pts);
        // Adjacent points are 0.26 apart: scale 2r = 0.3 links neighbours only.
        let est = Estimator::new(&c, vec![1.0; 24], 0.15).unwrap();
        assert_eq!(est.estimate(0.5, 1e-5, 1).unwrap(), 1);

        // A low-density disk filling the hole kills the loop in B.
        let mut dens = vec![1.0; 24];
        for i in -6..=6 {
            for j in -6..=6 {
                let p = [i as f64 * 0.14, j as f64 * 0.14];
                if p[0] * p[0] + p[1] * p[1] < 0.85 {
                    pts.push(p);
                    dens.push(0.5);
                }
            }
        }
        let est = Estimator::new(&cloud(&pts), dens, 0.15).unwrap();
        assert_eq!(est.estimate(0.9, 1e-5, 1).unwrap(), 1);
        assert_eq!(est.estimate(0.5, 1e-5, 1).unwrap(), 0);
    }

    #[test]
    fn linear_algebra_agrees_with_unionfind() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(1..60);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
                .collect();
            let dens: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let r = rng.gen_range(0.05..0.6);
            let level = rng.gen_range(0.0..1.0);
            let est = Estimator::new(&cloud(&pts), dens, r).unwrap();
            let (a, b, vmap, emap) = est.complexes(level, 1e-5);
            let la = if a.n_vertices() == 0 {
                0
            } else {
                inclusion_rank(&a, &b, &vmap, &emap, 0).unwrap()
            };
            assert_eq!(la, h0_image_rank_unionfind(&vmap, &b));
            assert_eq!(la, est.estimate(level, 1e-5, 0).unwrap());
            let l1 = if a.n_vertices() == 0 {
                0
            } else {
                inclusion_rank(&a, &b, &vmap, &emap, 1).unwrap()
            };
            assert_eq!(l1, est.estimate(level, 1e-5, 1).unwrap());
            assert!(la <= a.betti().0.min(b.betti().0));
            assert!(l1 <= a.betti().1.min(b.betti().1));
        }
    }

    #[test]
    fn kde_driven_estimate() {
        let mut pts = ring(40, 1.0);
        pts.extend(ring(40, 1.0).iter().map(|p| [p[0] + 6.0, p[1]]));
        let c = cloud(&pts);
        let kde = KdeModel::new(c.clone(), vec![0.2, 0.2]).unwrap();
        let cfg = EstimatorConfig::new(0.2, 0.5, 0);
        assert_eq!(estimate_betti(&c, &kde, &cfg).unwrap(), 2);
        assert_eq!(
            estimate_betti(&c, &kde, &EstimatorConfig { dim: 1, ..cfg }).unwrap(),
            2
        );
        let bv = estimated_betti_vector(&c, &kde, &[0.5, 2.0], 0.2, 1e-5, 0).unwrap();
        assert_eq!(bv.counts, vec![2, 0]);
    }
}
