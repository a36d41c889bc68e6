//! Homological bifurcation plots: Betti numbers over (parameter, level) grids.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::consistency::{normalized_densities, Estimator};
use crate::cubical::superlevel_diagram;
use crate::densities::{evaluate_on_grid, normalize_max, DensityRegistry};
use crate::diagram::BettiVector;
use crate::error::{Error, Result};
use crate::field::Window;
use crate::kde::KdeModel;
use crate::scalar::Scalar;
use crate::stochastic::{
    derive_seed, greedy_permutation, simulate_stationary, system_for, SimulationConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytical,
    Estimated,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Analytical => "analytical",
            Provenance::Estimated => "estimated",
        })
    }
}

/// A one-parameter sweep of a density family.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<T> {
    pub family: String,
    /// Name of the swept parameter.
    pub parameter: String,
    pub values: Vec<T>,
    /// Parameters held fixed across the sweep.
    pub fixed: BTreeMap<String, T>,
}

impl<T: Scalar> Sweep<T> {
    /// Sweeps `h` for `duffing` and `a` for `crater`.
    pub fn new(family: &str, values: Vec<T>) -> Self {
        let parameter = match family {
            "crater" => "a",
            _ => "h",
        };
        Self {
            family: family.to_string(),
            parameter: parameter.to_string(),
            values,
            fixed: BTreeMap::new(),
        }
    }

    pub fn with_fixed(mut self, name: &str, value: T) -> Self {
        self.fixed.insert(name.to_string(), value);
        self
    }

    pub fn params_at(&self, j: usize) -> BTreeMap<String, T> {
        let mut p = self.fixed.clone();
        p.insert(self.parameter.clone(), self.values[j]);
        p
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("parameter sweep is empty".into()));
        }
        Ok(())
    }
}

/// `n` evenly spaced values from `start` to `end` inclusive.
pub fn linspace<T: Scalar>(start: T, end: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            // Weighting the endpoints keeps values like -0.4 exact in decimal.
            let m = T::from_usize_lossy(n - 1);
            (0..n)
                .map(|j| {
                    let t = T::from_usize_lossy(j);
                    (start * (m - t) + end * t) / m
                })
                .collect()
        }
    }
}

/// Betti numbers `betti[d][j][k]` for `dims[d]`, parameter `params[j]`, level `levels[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationPlot<T> {
    pub family: String,
    pub parameter: String,
    pub params: Vec<T>,
    pub levels: Vec<T>,
    pub dims: Vec<usize>,
    pub betti: Vec<Vec<Vec<usize>>>,
    pub provenance: Provenance,
}

impl<T: Scalar> BifurcationPlot<T> {
    pub fn matrix(&self, dim: usize) -> Option<&Vec<Vec<usize>>> {
        self.dims
            .iter()
            .position(|&d| d == dim)
            .map(|i| &self.betti[i])
    }

    fn assemble(
        sweep: &Sweep<T>,
        levels: &[T],
        dims: &[usize],
        columns: Vec<Vec<Vec<usize>>>,
        provenance: Provenance,
    ) -> Self {
        // columns[j][d][k] → betti[d][j][k]
        let betti = (0..dims.len())
            .map(|d| columns.iter().map(|col| col[d].clone()).collect())
            .collect();
        Self {
            family: sweep.family.clone(),
            parameter: sweep.parameter.clone(),
            params: sweep.values.clone(),
            levels: levels.to_vec(),
            dims: dims.to_vec(),
            betti,
            provenance,
        }
    }
}

/// Sampling grid for analytical densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub window: Window<T>,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Scalar> Default for GridSpec<T> {
    /// 201 × 201 cells on `[-3, 3]²`.
    fn default() -> Self {
        Self {
            window: Window::square(T::lit(3.0)),
            nx: 201,
            ny: 201,
        }
    }
}

fn check_dims(dims: &[usize]) -> Result<()> {
    match dims.iter().find(|&&d| d > 1) {
        Some(&d) => Err(Error::UnsupportedDimension(d)),
        None if dims.is_empty() => Err(Error::InvalidInput(
            "no homology dimensions requested".into(),
        )),
        None => Ok(()),
    }
}

/// For each parameter value: sample the density on the grid, max-normalize,
/// take the superlevel diagram and read off Betti vectors.
pub fn analytical_plot<T: Scalar>(
    registry: &DensityRegistry<T>,
    sweep: &Sweep<T>,
    levels: &[T],
    dims: &[usize],
    grid: &GridSpec<T>,
) -> Result<BifurcationPlot<T>> {
    sweep.validate()?;
    check_dims(dims)?;
    let columns = (0..sweep.values.len())
        .into_par_iter()
        .map(|j| {
            let column = || -> Result<Vec<Vec<usize>>> {
                let model = registry.build(&sweep.family, &sweep.params_at(j))?;
                let field =
                    normalize_max(&evaluate_on_grid(&model, &grid.window, grid.nx, grid.ny)?)?;
                let diagram = superlevel_diagram(&field)?;
                Ok(dims
                    .iter()
                    .map(|&d| diagram.betti_vector(levels, d).counts)
                    .collect())
            };
            column().map_err(|e| e.context(format!("{} = {}", sweep.parameter, sweep.values[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationPlot::assemble(
        sweep,
        levels,
        dims,
        columns,
        Provenance::Analytical,
    ))
}

/// Settings for the sample-based pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationConfig<T> {
    pub simulation: SimulationConfig<T>,
    /// Greedy subsample size.
    pub n: usize,
    pub epsilon: T,
    /// Fixed ball radius; `None` uses the KDE bandwidth clamped to `radius_bounds`.
    pub radius: Option<T>,
    pub radius_bounds: (T, T),
}

impl<T: Scalar> Default for EstimationConfig<T> {
    fn default() -> Self {
        Self {
            simulation: SimulationConfig::default(),
            n: 500,
            epsilon: T::lit(1e-5),
            radius: None,
            radius_bounds: (T::lit(0.1), T::lit(0.8)),
        }
    }
}

impl<T: Scalar> EstimationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput(
                "subsample size must be positive".into(),
            ));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive (got {})",
                self.epsilon
            )));
        }
        let (lo, hi) = self.radius_bounds;
        if !(lo > T::zero() && lo <= hi) {
            return Err(Error::InvalidInput(format!(
                "invalid radius bounds [{lo}, {hi}]"
            )));
        }
        if let Some(r) = self.radius {
            if !(r > T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "radius must be positive (got {r})"
                )));
            }
        }
        Ok(())
    }

    pub fn radius_for(&self, kde: &KdeModel<T>) -> T {
        self.radius.unwrap_or_else(|| {
            let (lo, hi) = self.radius_bounds;
            kde.scalar_bandwidth().max(lo).min(hi)
        })
    }
}

/// Estimated Betti vectors from a stationary sample. The KDE uses the whole
/// sample; the estimator works on its greedy subsample of size `cfg.n`.
pub fn estimate_from_samples<T: Scalar>(
    samples: &PointCloud<T>,
    levels: &[T],
    dims: &[usize],
    cfg: &EstimationConfig<T>,
) -> Result<Vec<BettiVector<T>>> {
    cfg.validate()?;
    check_dims(dims)?;
    let kde = KdeModel::scott(samples.clone())?;
    let radius = cfg.radius_for(&kde);
    let chi = greedy_permutation(samples, cfg.n);
    let est = Estimator::new(&chi, normalized_densities(&chi, &kde)?, radius)?;
    dims.iter()
        .map(|&d| est.betti_vector(levels, cfg.epsilon, d))
        .collect()
}

/// Estimated Betti vectors for one parameter value from one simulated run.
pub fn estimated_column<T: Scalar>(
    family: &str,
    params: &BTreeMap<String, T>,
    levels: &[T],
    dims: &[usize],
    cfg: &EstimationConfig<T>,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    let system = system_for(family, params)?;
    let samples = simulate_stationary(&system, &cfg.simulation, seed)?;
    Ok(estimate_from_samples(&samples, levels, dims, cfg)?
        .into_iter()
        .map(|bv| bv.counts)
        .collect())
}

/// Sample-based plot. Column `j` is simulated with `derive_seed(master_seed, j)`.
pub fn estimated_plot<T: Scalar>(
    sweep: &Sweep<T>,
    levels: &[T],
    dims: &[usize],
    cfg: &EstimationConfig<T>,
    master_seed: u64,
) -> Result<BifurcationPlot<T>> {
    sweep.validate()?;
    check_dims(dims)?;
    cfg.validate()?;
    let columns = (0..sweep.values.len())
        .into_par_iter()
        .map(|j| {
            let seed = derive_seed(master_seed, j as u64);
            estimated_column(&sweep.family, &sweep.params_at(j), levels, dims, cfg, seed)
                .map_err(|e| e.context(format!("{} = {}", sweep.parameter, sweep.values[j])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationPlot::assemble(
        sweep,
        levels,
        dims,
        columns,
        Provenance::Estimated,
    ))
}

/// Signed differences `truth − estimate`, `err[d][j][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPlot<T> {
    pub params: Vec<T>,
    pub levels: Vec<T>,
    pub dims: Vec<usize>,
    pub err: Vec<Vec<Vec<i64>>>,
}

impl<T: Scalar> ErrorPlot<T> {
    pub fn matrix(&self, dim: usize) -> Option<&Vec<Vec<i64>>> {
        self.dims
            .iter()
            .position(|&d| d == dim)
            .map(|i| &self.err[i])
    }

    pub fn is_zero(&self) -> bool {
        self.err.iter().flatten().flatten().all(|&e| e == 0)
    }
}

pub fn error_plot<T: Scalar>(
    truth: &BifurcationPlot<T>,
    estimate: &BifurcationPlot<T>,
) -> Result<ErrorPlot<T>> {
    if truth.params != estimate.params
        || truth.levels != estimate.levels
        || truth.dims != estimate.dims
    {
        return Err(Error::DimensionMismatch(
            "plots differ in parameter values, levels or dimensions".into(),
        ));
    }
    let err = truth
        .betti
        .iter()
        .zip(&estimate.betti)
        .map(|(t, e)| {
            t.iter()
                .zip(e)
                .map(|(tc, ec)| {
                    tc.iter()
                        .zip(ec)
                        .map(|(&a, &b)| a as i64 - b as i64)
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(ErrorPlot {
        params: truth.params.clone(),
        levels: truth.levels.clone(),
        dims: truth.dims.clone(),
        err,
    })
}

/// How two neighbouring columns are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionRule {
    /// The set of Betti values taken on at least `min_support` levels changes.
    ValueSet { min_support: usize },
    /// At least `tau` level cells differ.
    CellDifference { tau: usize },
}

impl Default for TransitionRule {
    fn default() -> Self {
        TransitionRule::ValueSet { min_support: 1 }
    }
}

impl FromStr for TransitionRule {
    type Err = Error;

    /// `values[:k]` or `cells[:tau]`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s.split_once(':').map_or((s, None), |(k, a)| (k, Some(a)));
        let num = |default: usize| -> Result<usize> {
            arg.map_or(Ok(default), |a| {
                a.parse()
                    .map_err(|_| Error::Parse(format!("bad transition threshold `{a}`")))
            })
        };
        match kind {
            "values" => Ok(TransitionRule::ValueSet {
                min_support: num(1)?,
            }),
            "cells" => Ok(TransitionRule::CellDifference { tau: num(3)? }),
            _ => Err(Error::Parse(format!("unknown transition rule `{s}`"))),
        }
    }
}

fn value_set(column: &[usize], min_support: usize) -> BTreeSet<usize> {
    let mut counts = BTreeMap::new();
    for &b in column {
        *counts.entry(b).or_insert(0usize) += 1;
    }
    counts
        .into_iter()
        .filter(|&(_, c)| c >= min_support)
        .map(|(b, _)| b)
        .collect()
}

/// Parameter values `params[j]` at which column `j` differs from column `j − 1`.
pub fn detect_transitions<T: Scalar>(
    plot: &BifurcationPlot<T>,
    dim: usize,
    rule: TransitionRule,
) -> Result<Vec<T>> {
    let m = plot
        .matrix(dim)
        .ok_or_else(|| Error::InvalidInput(format!("plot has no dimension {dim}")))?;
    let changed = |a: &[usize], b: &[usize]| match rule {
        TransitionRule::ValueSet { min_support } => {
            value_set(a, min_support) != value_set(b, min_support)
        }
        TransitionRule::CellDifference { tau } => {
            a.iter().zip(b).filter(|(x, y)| x != y).count() >= tau
        }
    };
    Ok((1..m.len())
        .filter(|&j| changed(&m[j - 1], &m[j]))
        .map(|j| plot.params[j])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::uniform_levels;

    fn small_grid() -> GridSpec<f64> {
        GridSpec {
            window: Window::square(3.0),
            nx: 81,
            ny: 81,
        }
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0f64, 1.0, 21);
        assert_eq!(v.len(), 21);
        assert_eq!((v[0], v[20]), (-1.0, 1.0));
        assert!((v[10]).abs() < 1e-15);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }

    #[test]
    fn duffing_plot_at_high_level() {
        let reg = DensityRegistry::builtin();
        let sweep = Sweep::new("duffing", vec![-1.0, 0.0, 1.0]);
        let plot = analytical_plot(&reg, &sweep, &[0.9], &[0, 1], &small_grid()).unwrap();
        let b0 = plot.matrix(0).unwrap();
        assert_eq!(b0.iter().map(|c| c[0]).collect::<Vec<_>>(), vec![2, 1, 1]);
        assert!(plot.matrix(1).unwrap().iter().flatten().all(|&b| b == 0));
        assert_eq!(plot.provenance, Provenance::Analytical);
    }

    #[test]
    fn scaling_the_density_changes_nothing() {
        let mut reg = DensityRegistry::builtin();
        reg.register("scaled", |p: &BTreeMap<String, f64>| {
            crate::densities::DensityModel::duffing(p["h"], 1.0, 1.0).map(|m| m.scaled(37.5))
        });
        let levels = uniform_levels(20);
        let a = analytical_plot(
            &reg,
            &Sweep::new("duffing", vec![-1.0, 0.5]),
            &levels,
            &[0, 1],
            &small_grid(),
        )
        .unwrap();
        let b = analytical_plot(
            &reg,
            &Sweep::new("scaled", vec![-1.0, 0.5]),
            &levels,
            &[0, 1],
            &small_grid(),
        )
        .unwrap();
        assert_eq!(a.betti, b.betti);
    }

    #[test]
    fn errors_carry_parameter_context() {
        let reg = DensityRegistry::builtin();
        let sweep = Sweep::new("duffing", vec![1.0]).with_fixed("q1", -1.0);
        let err = analytical_plot(&reg, &sweep, &[0.5], &[0], &small_grid()).unwrap_err();
        assert!(err.to_string().contains("h = 1"), "{err}");
        assert!(analytical_plot(
            &reg,
            &Sweep::new("nope", vec![1.0]),
            &[0.5],
            &[0],
            &small_grid()
        )
        .is_err());
        assert!(analytical_plot(
            &reg,
            &Sweep::new("duffing", vec![1.0]),
            &[0.5],
            &[2],
            &small_grid()
        )
        .is_err());
    }

    fn plot_from(params: Vec<f64>, cols: Vec<Vec<usize>>) -> BifurcationPlot<f64> {
        let levels = (0..cols[0].len()).map(|k| k as f64).collect();
        BifurcationPlot {
            family: "test".into(),
            parameter: "h".into(),
            params,
            levels,
            dims: vec![0],
            betti: vec![cols],
            provenance: Provenance::Analytical,
        }
    }

    #[test]
    fn transitions() {
        let constant = plot_from(vec![0.0, 1.0, 2.0], vec![vec![1, 1, 1]; 3]);
        assert!(detect_transitions(&constant, 0, TransitionRule::default())
            .unwrap()
            .is_empty());

        let p = plot_from(
            vec![0.0, 1.0, 2.0, 3.0],
            vec![
                vec![1, 2, 2, 2],
                vec![1, 1, 2, 2],
                vec![1, 1, 1, 1],
                vec![1, 1, 1, 1],
            ],
        );
        assert_eq!(
            detect_transitions(&p, 0, TransitionRule::default()).unwrap(),
            vec![2.0]
        );
        assert!(
            detect_transitions(&p, 0, TransitionRule::CellDifference { tau: 3 })
                .unwrap()
                .is_empty()
        );
        assert_eq!(
            detect_transitions(&p, 0, TransitionRule::CellDifference { tau: 1 }).unwrap(),
            vec![1.0, 2.0]
        );
        assert_eq!(
            detect_transitions(&p, 0, TransitionRule::ValueSet { min_support: 3 }).unwrap(),
            vec![1.0, 2.0]
        );
        assert!(detect_transitions(&p, 1, TransitionRule::default()).is_err());

        assert_eq!(
            "cells:5".parse::<TransitionRule>().unwrap(),
            TransitionRule::CellDifference { tau: 5 }
        );
        assert_eq!(
            "values".parse::<TransitionRule>().unwrap(),
            TransitionRule::default()
        );
        assert!("x".parse::<TransitionRule>().is_err());
    }

    #[test]
    fn error_plots() {
        let a = plot_from(vec![0.0, 1.0], vec![vec![1, 2], vec![1, 1]]);
        let b = plot_from(vec![0.0, 1.0], vec![vec![1, 1], vec![2, 1]]);
        assert!(error_plot(&a, &a).unwrap().is_zero());
        let e = error_plot(&a, &b).unwrap();
        assert_eq!(e.matrix(0).unwrap(), &vec![vec![0, 1], vec![-1, 0]]);
        let c = plot_from(vec![0.0, 2.0], vec![vec![1, 2], vec![1, 1]]);
        assert!(error_plot(&a, &c).is_err());
    }
}
