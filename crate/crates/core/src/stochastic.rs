//! Euler–Maruyama simulation of planar SDEs and stationary sampling.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::{euclidean, PointCloud};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub type State<T> = [T; 2];

type VectorField<T> = Arc<dyn Fn(State<T>) -> State<T> + Send + Sync>;

/// `dX = μ(X) dt + diag(σ(X)) dW` on `R²` with two independent Wiener channels.
#[derive(Clone)]
pub struct SdeSystem<T> {
    drift: VectorField<T>,
    diffusion: VectorField<T>,
    pub params: BTreeMap<String, T>,
}

impl<T: Scalar> fmt::Debug for SdeSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SdeSystem")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> SdeSystem<T> {
    pub fn new(
        drift: impl Fn(State<T>) -> State<T> + Send + Sync + 'static,
        diffusion: impl Fn(State<T>) -> State<T> + Send + Sync + 'static,
    ) -> Self {
        Self {
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: T) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn drift(&self, x: State<T>) -> State<T> {
        (self.drift)(x)
    }

    pub fn diffusion(&self, x: State<T>) -> State<T> {
        (self.diffusion)(x)
    }
}

/// Stochastic Duffing oscillator `ẍ + ẋ + h x + x³ = q₁ ξ` in first-order form
/// `dx₁ = x₂ dt`, `dx₂ = (-x₂ - h x₁ - x₁³) dt + q₁ √(2 D₁₁) dW`.
///
/// `ξ` is white noise of intensity `D₁₁` (`E[ξ(t)ξ(s)] = 2 D₁₁ δ(t - s)`), the
/// convention under which `exp[-(x₂² + h x₁² + x₁⁴/2) / (2 q₁² D₁₁)]` is the
/// stationary density. With `D₁₁ = 1/2` the gain is plain `q₁`.
pub fn duffing_system<T: Scalar>(h: T, q1: T, d11: T) -> SdeSystem<T> {
    let gain = q1 * (T::lit(2.0) * d11).sqrt();
    SdeSystem::new(
        move |[x1, x2]: State<T>| [x2, -x2 - h * x1 - x1 * x1 * x1],
        move |_| [T::zero(), gain],
    )
    .with_param("h", h)
    .with_param("q1", q1)
    .with_param("D11", d11)
}

/// Overdamped Langevin dynamics `dX = -∇U dt + √2 dW` with
/// `U = κ (|x|² - a)²`; the stationary density is the crater `exp(-U)`.
pub fn crater_system<T: Scalar>(kappa: T, a: T) -> SdeSystem<T> {
    let gain = T::lit(2.0).sqrt();
    SdeSystem::new(
        move |[x1, x2]: State<T>| {
            let g = T::lit(4.0) * kappa * (x1 * x1 + x2 * x2 - a);
            [-g * x1, -g * x2]
        },
        move |_| [gain, gain],
    )
    .with_param("kappa", kappa)
    .with_param("a", a)
}

/// SDE whose stationary density is the named family's closed form, with the
/// same parameter defaults as [`crate::densities::DensityRegistry::builtin`].
pub fn system_for<T: Scalar>(family: &str, params: &BTreeMap<String, T>) -> Result<SdeSystem<T>> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(T::lit(d));
    match family {
        "duffing" => {
            let h = params
                .get("h")
                .copied()
                .ok_or_else(|| Error::InvalidInput("duffing needs parameter h".into()))?;
            Ok(duffing_system(h, get("q1", 1.0), get("D11", 1.0)))
        }
        "crater" => Ok(crater_system(get("kappa", 1.0), get("a", 1.0))),
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    /// `n_steps + 1` states, starting with the initial condition.
    pub states: Vec<State<T>>,
    pub seed: u64,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn to_cloud(&self) -> PointCloud<T> {
        let coords = self.states.iter().flat_map(|s| s.iter().copied()).collect();
        PointCloud::new(2, coords).expect("states are finite")
    }
}

/// `X_{k+1} = X_k + μ(X_k) dt + σ(X_k) √dt N(0, 1)` per channel, deterministic in `seed`.
pub fn euler_maruyama<T: Scalar>(
    sys: &SdeSystem<T>,
    x0: State<T>,
    dt: T,
    n_steps: usize,
    seed: u64,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "dt must be positive (got {dt})"
        )));
    }
    if n_steps == 0 {
        return Err(Error::InvalidInput("n_steps must be at least 1".into()));
    }
    if !(x0[0].is_finite() && x0[1].is_finite()) {
        return Err(Error::Divergence { step: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sqrt_dt = dt.sqrt();
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x0);
    let mut x = x0;
    for step in 1..=n_steps {
        let mu = sys.drift(x);
        let sigma = sys.diffusion(x);
        let n0: f64 = StandardNormal.sample(&mut rng);
        let n1: f64 = StandardNormal.sample(&mut rng);
        x = [
            x[0] + mu[0] * dt + sigma[0] * sqrt_dt * T::lit(n0),
            x[1] + mu[1] * dt + sigma[1] * sqrt_dt * T::lit(n1),
        ];
        if !(x[0].is_finite() && x[1].is_finite()) {
            return Err(Error::Divergence { step });
        }
        states.push(x);
    }
    Ok(Trajectory { dt, states, seed })
}

/// States at `burn_in, burn_in + stride, …`.
pub fn stationary_sample<T: Scalar>(
    traj: &Trajectory<T>,
    burn_in: usize,
    stride: usize,
) -> Result<PointCloud<T>> {
    if stride == 0 {
        return Err(Error::InvalidInput("stride must be at least 1".into()));
    }
    if burn_in + stride > traj.len() {
        return Err(Error::InvalidInput(format!(
            "burn-in {burn_in} + stride {stride} exceeds trajectory length {}",
            traj.len()
        )));
    }
    let coords: Vec<T> = traj.states[burn_in..]
        .iter()
        .step_by(stride)
        .flat_map(|s| s.iter().copied())
        .collect();
    if coords.is_empty() {
        return Err(Error::Degenerate("empty stationary sample".into()));
    }
    PointCloud::new(2, coords)
}

/// Indices of a farthest-point (greedy) permutation prefix of length
/// `min(n, |cloud|)`, seeded with the first point. Ties go to the lowest index.
pub fn greedy_indices<T: Scalar>(cloud: &PointCloud<T>, n: usize) -> Vec<usize> {
    let total = cloud.len();
    let take = n.min(total);
    if take == 0 {
        return Vec::new();
    }
    let mut chosen = Vec::with_capacity(take);
    let mut min_dist: Vec<T> = vec![T::infinity(); total];
    let mut next = 0usize;
    for _ in 0..take {
        chosen.push(next);
        let p = cloud.point(next);
        let mut best = (T::neg_infinity(), 0usize);
        for (i, q) in cloud.iter().enumerate() {
            let d = euclidean(p, q);
            if d < min_dist[i] {
                min_dist[i] = d;
            }
            if min_dist[i] > best.0 {
                best = (min_dist[i], i);
            }
        }
        next = best.1;
    }
    chosen
}

pub fn greedy_permutation<T: Scalar>(cloud: &PointCloud<T>, n: usize) -> PointCloud<T> {
    cloud.select(&greedy_indices(cloud, n))
}

/// Independent, reproducible seed for sweep member `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Simulation settings for sampling a stationary distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig<T> {
    pub dt: T,
    pub burn_in: usize,
    pub stride: usize,
    /// Number of post-burn-in states kept.
    pub samples: usize,
    pub x0: State<T>,
}

impl<T: Scalar> Default for SimulationConfig<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(0.01),
            burn_in: 10_000,
            stride: 10,
            samples: 5_000,
            x0: [T::zero(), T::zero()],
        }
    }
}

impl<T: Scalar> SimulationConfig<T> {
    pub fn n_steps(&self) -> usize {
        (self.burn_in + self.samples.saturating_sub(1) * self.stride).max(1)
    }
}

/// Runs the SDE and returns exactly `cfg.samples` stationary states.
pub fn simulate_stationary<T: Scalar>(
    sys: &SdeSystem<T>,
    cfg: &SimulationConfig<T>,
    seed: u64,
) -> Result<PointCloud<T>> {
    if cfg.samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let traj = euler_maruyama(sys, cfg.x0, cfg.dt, cfg.n_steps(), seed)?;
    let cloud = stationary_sample(&traj, cfg.burn_in, cfg.stride)?;
    Ok(cloud.select(&(0..cfg.samples.min(cloud.len())).collect::<Vec<_>>()))
}
