//! Persistence diagrams and the Betti numbers read off them.

use crate::scalar::Scalar;

/// Which way the filtration sweeps the function values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `f⁻¹[a, ∞)` for decreasing `a`; births are above deaths.
    Superlevel,
    /// `f⁻¹(-∞, a]` for increasing `a`; births are below deaths.
    Sublevel,
}

impl Direction {
    /// Death value of a class that never dies.
    pub fn essential_death<T: Scalar>(self) -> T {
        match self {
            Direction::Superlevel => T::neg_infinity(),
            Direction::Sublevel => T::infinity(),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "superlevel" | "super" => Ok(Direction::Superlevel),
            "sublevel" | "sub" => Ok(Direction::Sublevel),
            other => Err(crate::Error::Parse(format!("unknown direction '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair<T> {
    pub dim: usize,
    pub birth: T,
    pub death: T,
}

impl<T: Scalar> PersistencePair<T> {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram<T> {
    pub direction: Direction,
    pub pairs: Vec<PersistencePair<T>>,
}

impl<T: Scalar> PersistenceDiagram<T> {
    pub fn new(direction: Direction) -> Self {
        Self {
            direction,
            pairs: Vec::new(),
        }
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair<T>> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    pub fn essential_count(&self, dim: usize) -> usize {
        self.in_dim(dim).filter(|p| p.is_essential()).count()
    }

    /// β_p of the level set at `level`.
    ///
    /// Superlevel: a class is alive on `(d, b]`; sublevel: on `[b, d)`.
    pub fn betti_at(&self, level: T, dim: usize) -> usize {
        match self.direction {
            Direction::Superlevel => self
                .in_dim(dim)
                .filter(|p| p.death < level && level <= p.birth)
                .count(),
            Direction::Sublevel => self
                .in_dim(dim)
                .filter(|p| p.birth <= level && level < p.death)
                .count(),
        }
    }

    /// Rank of the map `H_p(K_from) → H_p(K_to)` between two level sets,
    /// `K_from ⊆ K_to`: classes already born at `from` and still alive at `to`.
    /// With `from == to` this is [`betti_at`](Self::betti_at).
    pub fn persistent_betti(&self, from: T, to: T, dim: usize) -> usize {
        match self.direction {
            Direction::Superlevel => self
                .in_dim(dim)
                .filter(|p| from <= p.birth && p.death < to)
                .count(),
            Direction::Sublevel => self
                .in_dim(dim)
                .filter(|p| p.birth <= from && to < p.death)
                .count(),
        }
    }

    pub fn betti_vector(&self, levels: &[T], dim: usize) -> BettiVector<T> {
        BettiVector {
            dim,
            levels: levels.to_vec(),
            counts: levels.iter().map(|&l| self.betti_at(l, dim)).collect(),
        }
    }

    /// Pairs sorted by (dim, birth, death) for order-independent comparison.
    pub fn canonical(&self) -> Vec<PersistencePair<T>> {
        let mut v = self.pairs.clone();
        v.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(crate::scalar::cmp(&a.birth, &b.birth))
                .then(crate::scalar::cmp(&a.death, &b.death))
        });
        v
    }
}

/// β_p sampled on an ascending level grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BettiVector<T> {
    pub dim: usize,
    pub levels: Vec<T>,
    pub counts: Vec<usize>,
}

/// `n` uniform levels `k/n`, `k = 1..=n`, covering `(0, 1]`.
pub fn uniform_levels<T: Scalar>(n: usize) -> Vec<T> {
    (1..=n)
        .map(|k| T::from_usize_lossy(k) / T::from_usize_lossy(n))
        .collect()
}
