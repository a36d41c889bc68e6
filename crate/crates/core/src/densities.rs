//! Closed-form stationary densities and their evaluation on grids.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{ScalarField2D, Window};
use crate::scalar::Scalar;

/// Unnormalized stationary density of the additively forced Duffing oscillator
/// `ẍ + ẋ + h x + x³ = q₁ dW`:
/// `exp[-(x₂² + h x₁² + x₁⁴/2) / (2 q₁² D₁₁)]`.
pub fn duffing_pdf<T: Scalar>(x1: T, x2: T, h: T, q1: T, d11: T) -> T {
    let two = T::lit(2.0);
    let x1sq = x1 * x1;
    let energy = x2 * x2 + h * x1sq + x1sq * x1sq / two;
    (-energy / (two * q1 * q1 * d11)).exp()
}

/// Rotationally symmetric crater `exp[-κ (x₁² + x₂² - a)²]`, rim value 1 at radius √a.
/// Stands in for a stochastic limit cycle.
pub fn crater_pdf<T: Scalar>(x1: T, x2: T, kappa: T, a: T) -> T {
    let d = x1 * x1 + x2 * x2 - a;
    (-kappa * d * d).exp()
}

type Evaluator<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// A density family instance: family id, its parameters, and the evaluator.
#[derive(Clone)]
pub struct DensityModel<T> {
    family: String,
    params: BTreeMap<String, T>,
    eval: Evaluator<T>,
}

impl<T: Scalar> fmt::Debug for DensityModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityModel")
            .field("family", &self.family)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> DensityModel<T> {
    pub fn new(
        family: impl Into<String>,
        params: BTreeMap<String, T>,
        eval: impl Fn(T, T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            family: family.into(),
            params,
            eval: Arc::new(eval),
        }
    }

    pub fn duffing(h: T, q1: T, d11: T) -> Result<Self> {
        if !(q1 > T::zero() && d11 > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "duffing needs q1 > 0 and D11 > 0 (got {q1}, {d11})"
            )));
        }
        let params = BTreeMap::from([
            ("h".to_string(), h),
            ("q1".to_string(), q1),
            ("D11".to_string(), d11),
        ]);
        Ok(Self::new("duffing", params, move |x1, x2| {
            duffing_pdf(x1, x2, h, q1, d11)
        }))
    }

    pub fn crater(kappa: T, a: T) -> Result<Self> {
        if !(kappa > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "crater needs kappa > 0 (got {kappa})"
            )));
        }
        let params = BTreeMap::from([("kappa".to_string(), kappa), ("a".to_string(), a)]);
        Ok(Self::new("crater", params, move |x1, x2| {
            crater_pdf(x1, x2, kappa, a)
        }))
    }

    pub fn constant(c: T) -> Self {
        Self::new(
            "constant",
            BTreeMap::from([("c".to_string(), c)]),
            move |_, _| c,
        )
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn params(&self) -> &BTreeMap<String, T> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<T> {
        self.params.get(name).copied()
    }

    pub fn eval(&self, x1: T, x2: T) -> T {
        (self.eval)(x1, x2)
    }

    /// Same family with the density multiplied by `c`.
    pub fn scaled(&self, c: T) -> Self {
        let inner = self.eval.clone();
        Self {
            family: self.family.clone(),
            params: self.params.clone(),
            eval: Arc::new(move |x1, x2| c * inner(x1, x2)),
        }
    }
}

type Builder<T> = Arc<dyn Fn(&BTreeMap<String, T>) -> Result<DensityModel<T>> + Send + Sync>;

/// Density families keyed by id. New closed forms plug in with [`DensityRegistry::register`].
#[derive(Clone)]
pub struct DensityRegistry<T> {
    builders: BTreeMap<String, Builder<T>>,
}

impl<T: Scalar> Default for DensityRegistry<T> {
    fn default() -> Self {
        Self::builtin()
    }
}

impl<T: Scalar> DensityRegistry<T> {
    pub fn empty() -> Self {
        Self {
            builders: BTreeMap::new(),
        }
    }

    /// `duffing` (h, q1 = 1, D11 = 1) and `crater` (kappa = 1, a = 1).
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("duffing", |p| {
            let get = |k: &str, d: f64| p.get(k).copied().unwrap_or(T::lit(d));
            let h = p
                .get("h")
                .copied()
                .ok_or_else(|| Error::InvalidInput("duffing needs parameter h".into()))?;
            DensityModel::duffing(h, get("q1", 1.0), get("D11", 1.0))
        });
        r.register("crater", |p| {
            let get = |k: &str, d: f64| p.get(k).copied().unwrap_or(T::lit(d));
            DensityModel::crater(get("kappa", 1.0), get("a", 1.0))
        });
        r
    }

    pub fn register(
        &mut self,
        family: impl Into<String>,
        builder: impl Fn(&BTreeMap<String, T>) -> Result<DensityModel<T>> + Send + Sync + 'static,
    ) {
        self.builders.insert(family.into(), Arc::new(builder));
    }

    pub fn families(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, family: &str, params: &BTreeMap<String, T>) -> Result<DensityModel<T>> {
        let builder = self
            .builders
            .get(family)
            .ok_or_else(|| Error::UnknownFamily(family.to_string()))?;
        builder(params)
    }
}

/// Samples `model` at the cell centers of an `nx × ny` grid over `window`.
pub fn evaluate_on_grid<T: Scalar>(
    model: &DensityModel<T>,
    window: &Window<T>,
    nx: usize,
    ny: usize,
) -> Result<ScalarField2D<T>> {
    window.validate()?;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 2×2 (got {nx}×{ny})"
        )));
    }
    let xs = window.x_centers(nx);
    let ys = window.y_centers(ny);
    let rows: Vec<Vec<T>> = ys
        .par_iter()
        .map(|&y| xs.iter().map(|&x| model.eval(x, y)).collect())
        .collect();
    let values: Vec<T> = rows.into_iter().flatten().collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::NonFinite {
            value: values[i].as_f64(),
            location: format!(
                "({}, {}) of {} density",
                xs[i % nx],
                ys[i / nx],
                model.family()
            ),
        });
    }
    ScalarField2D::new(
        window.x_min,
        window.y_min,
        (window.x_max - window.x_min) / T::from_usize_lossy(nx),
        (window.y_max - window.y_min) / T::from_usize_lossy(ny),
        nx,
        ny,
        values,
    )
}

/// Divides by the grid maximum; errors on an all-zero field.
pub fn normalize_max<T: Scalar>(field: &ScalarField2D<T>) -> Result<ScalarField2D<T>> {
    field.normalize_max()
}

/// Critical values of a max-normalized density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLevels<T> {
    pub peak: T,
    /// Level where the two wells merge; `None` when the density is unimodal.
    pub saddle: Option<T>,
}

/// For `h < 0` the peaks sit at `x₁ = ±√(-h)`, `x₂ = 0` with exponent
/// `h² / (4 q₁² D₁₁)` above the origin saddle, so the normalized saddle level is
/// `exp[-h² / (4 q₁² D₁₁)]`. For `h ≥ 0` the origin is the only critical point.
pub fn duffing_critical_levels<T: Scalar>(h: T, q1: T, d11: T) -> CriticalLevels<T> {
    let saddle = (h < T::zero()).then(|| (-(h * h) / (T::lit(4.0) * q1 * q1 * d11)).exp());
    CriticalLevels {
        peak: T::one(),
        saddle,
    }
}

/// Normalized value at the crater center, where the loop of the rim dies:
/// `exp(-κ a²)` for `a > 0`; `None` for a degenerate (unimodal) crater.
pub fn crater_center_level<T: Scalar>(kappa: T, a: T) -> Option<T> {
    (a > T::zero()).then(|| (-kappa * a * a).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn duffing_closed_form_values() {
        assert_eq!(duffing_pdf(0.0, 0.0, 0.3, 1.0, 1.0), 1.0);
        assert_abs_diff_eq!(
            duffing_pdf(1.0, 0.0, 1.0, 1.0, 1.0),
            0.472_366_552_741_014_7,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            duffing_pdf(1.0, 0.0, -1.0, 1.0, 1.0),
            1.284_025_416_687_741_5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            duffing_pdf(-1.0, 0.0, -1.0, 1.0, 1.0),
            1.284_025_416_687_741_5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn duffing_is_even() {
        for &(x1, x2) in &[(0.3, -1.2), (1.7, 0.4), (-2.1, 2.0)] {
            let p = duffing_pdf(x1, x2, -0.6, 1.0, 1.0);
            assert_eq!(p, duffing_pdf(-x1, x2, -0.6, 1.0, 1.0));
            assert_eq!(p, duffing_pdf(x1, -x2, -0.6, 1.0, 1.0));
        }
    }

    #[test]
    fn crater_values() {
        assert_eq!(crater_pdf(1.0, 0.0, 1.0, 1.0), 1.0);
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(crater_pdf(r, r, 3.0, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            crater_pdf(0.0, 0.0, 1.0, 1.0),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        // a = 0: decreasing in radius.
        let radial: Vec<f64> = (0..10)
            .map(|i| crater_pdf(0.2 * i as f64, 0.0, 1.0, 0.0))
            .collect();
        assert!(radial.windows(2).all(|w| w[0] > w[1]));
        // Rotation invariance.
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let (x, y) = (0.8, -0.4);
        assert_abs_diff_eq!(
            crater_pdf(x, y, 1.0, 1.0),
            crater_pdf(c * x - s * y, s * x + c * y, 1.0, 1.0),
            epsilon = 1e-14
        );
    }

    /// Critical levels by brute force: the max along x₂ = 0 over a fine line
    /// search, compared against the value at the origin.
    #[test]
    fn saddle_level_matches_line_search() {
        for &h in &[-1.0f64, -2.0, -0.5] {
            let peak = (0..=200_000)
                .map(|i| duffing_pdf(-3.0 + 6.0 * i as f64 / 200_000.0, 0.0, h, 1.0, 1.0))
                .fold(f64::MIN, f64::max);
            let ratio = duffing_pdf(0.0, 0.0, h, 1.0, 1.0) / peak;
            let lv = duffing_critical_levels(h, 1.0, 1.0);
            assert_abs_diff_eq!(lv.saddle.unwrap(), ratio, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(
            duffing_critical_levels(-1.0, 1.0, 1.0).saddle.unwrap(),
            0.778_800_783_071_404_9,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            duffing_critical_levels(-2.0, 1.0, 1.0).saddle.unwrap(),
            0.367_879_441_171_442_3,
            epsilon = 1e-12
        );
        assert_eq!(duffing_critical_levels(0.5, 1.0, 1.0).saddle, None);
        assert_eq!(duffing_critical_levels(0.0, 1.0, 1.0).saddle, None);
    }

    #[test]
    fn grid_evaluation() {
        let w = Window::square(3.0);
        let c = evaluate_on_grid(&DensityModel::constant(2.5), &w, 4, 3).unwrap();
        assert!(c.values().iter().all(|&v| v == 2.5));

        let d =
            evaluate_on_grid(&DensityModel::duffing(1.0, 1.0, 1.0).unwrap(), &w, 201, 201).unwrap();
        assert_eq!(d.argmax(), vec![(100, 100)]);
        for iy in 0..201 {
            for ix in 0..201 {
                assert_eq!(d.get(ix, iy), d.get(200 - ix, iy));
                assert_eq!(d.get(ix, iy), d.get(ix, 200 - iy));
            }
        }
        assert!(evaluate_on_grid(&DensityModel::constant(1.0), &w, 1, 5).is_err());
        let nan = DensityModel::new("bad", BTreeMap::new(), |_, _| f64::NAN);
        assert!(matches!(
            evaluate_on_grid(&nan, &w, 3, 3),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn normalized_saddle_cell() {
        let w = Window::square(3.0);
        let d = evaluate_on_grid(
            &DensityModel::duffing(-1.0, 1.0, 1.0).unwrap(),
            &w,
            201,
            201,
        )
        .unwrap();
        let n = normalize_max(&d).unwrap();
        assert_eq!(n.max(), 1.0);
        assert_eq!(n.argmax().len(), 2);
        // Origin cell over the (grid) peak; the grid peak sits slightly below the true one.
        assert_abs_diff_eq!(n.get(100, 100), (-0.25f64).exp(), epsilon = 1e-3);
        assert!(n.get(100, 100) >= (-0.25f64).exp());
    }

    #[test]
    fn registry_builds_and_rejects() {
        let reg = DensityRegistry::<f64>::builtin();
        assert_eq!(
            reg.families().collect::<Vec<_>>(),
            vec!["crater", "duffing"]
        );
        let m = reg
            .build("duffing", &BTreeMap::from([("h".to_string(), -1.0)]))
            .unwrap();
        assert_eq!(m.param("q1"), Some(1.0));
        assert!(matches!(
            reg.build("rvp", &BTreeMap::new()),
            Err(Error::UnknownFamily(_))
        ));
        assert!(reg.build("duffing", &BTreeMap::new()).is_err());
        assert!(DensityModel::duffing(0.0, -1.0, 1.0).is_err());
        assert!(DensityModel::crater(0.0, 1.0).is_err());
    }
}
