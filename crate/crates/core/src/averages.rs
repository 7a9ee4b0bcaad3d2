//! Scalar quasi-arithmetic means m_f(x; w) = f⁻¹(Σ wᵢ f(xᵢ)) and their
//! multivariate counterparts M_∇F(θ; w) = ∇F⁻¹(Σ wᵢ ∇F(θᵢ)).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Generator, ScalarGenerator};
use crate::linalg::{self, compensated_sum, Point};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    weights: Vec<f64>,
    open: bool,
}

impl WeightVector {
    /// Weights on the closed simplex.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, false)
    }

    /// Weights on the open simplex (every weight strictly positive).
    pub fn open(weights: Vec<f64>) -> Result<Self> {
        Self::build(weights, true)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        Self::open(vec![1.0 / n as f64; n])
    }

    /// Two-point weights (1 − t, t).
    pub fn pair(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidWeights(format!("t = {t} is outside [0, 1]")));
        }
        Self::new(vec![1.0 - t, t])
    }

    fn build(weights: Vec<f64>, open: bool) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidWeights(format!("negative or non-finite weight {w}")));
        }
        if open && weights.contains(&0.0) {
            return Err(Error::InvalidWeights("open simplex requires positive weights".into()));
        }
        let s = compensated_sum(weights.iter().copied());
        if (s - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {s}")));
        }
        Ok(WeightVector { weights, open })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    fn require_len(&self, n: usize) -> Result<()> {
        if n == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                what: "points vs weights",
                expected: self.len(),
                got: n,
            })
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied strictly monotone generator on an open interval.
#[derive(Clone)]
pub struct CustomMean {
    f: ScalarFn,
    f_inv: ScalarFn,
    interval: (f64, f64),
    increasing: bool,
}

impl fmt::Debug for CustomMean {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("CustomMean")
            .field("interval", &self.interval)
            .field("increasing", &self.increasing)
            .finish_non_exhaustive()
    }
}

impl CustomMean {
    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }
}

/// Interior sample points of an interval, finite even for unbounded ends.
fn sample_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (true, false) => (lo, lo + 20.0),
        (false, true) => (hi - 20.0, hi),
        (false, false) => (-10.0, 10.0),
    };
    (1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect()
}

/// Generator of a scalar quasi-arithmetic mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ScalarMeanSpec {
    /// Power (Hölder) mean; p = 0 is the geometric mean.
    Power { p: f64 },
    /// f(t) = eᵗ, the log-sum-exp mean.
    Lse,
    #[serde(skip)]
    Custom(CustomMean),
}

impl ScalarMeanSpec {
    pub fn arithmetic() -> Self {
        ScalarMeanSpec::Power { p: 1.0 }
    }

    pub fn geometric() -> Self {
        ScalarMeanSpec::Power { p: 0.0 }
    }

    pub fn harmonic() -> Self {
        ScalarMeanSpec::Power { p: -1.0 }
    }

    /// Validates a custom generator: strict monotonicity on a sample grid and
    /// f⁻¹(f(x)) = x to 1e−9 on the same grid.
    pub fn custom<F, G>(f: F, f_inv: G, interval: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let (lo, hi) = interval;
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidSpec(format!("empty interval ({lo}, {hi})")));
        }
        let grid = sample_grid(lo, hi, 64);
        let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("custom generator is not finite on its interval".into()));
        }
        let increasing = vals[1] > vals[0];
        let monotone = vals
            .windows(2)
            .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        if !monotone {
            return Err(Error::InvalidSpec(
                "custom generator is not strictly monotone on its interval".into(),
            ));
        }
        for (&x, &y) in grid.iter().zip(&vals) {
            let back = f_inv(y);
            if !((back - x).abs() <= 1e-9 * x.abs().max(1.0)) {
                return Err(Error::InvalidSpec(format!(
                    "custom inverse fails at {x}: f⁻¹(f(x)) = {back}"
                )));
            }
        }
        Ok(ScalarMeanSpec::Custom(CustomMean {
            f: Arc::new(f),
            f_inv: Arc::new(f_inv),
            interval,
            increasing,
        }))
    }

    /// The same mean expressed with an equivalent generator g = λf + c.
    pub fn affine_equivalent(&self, lambda: f64, c: f64) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() || !c.is_finite() {
            return Err(Error::InvalidSpec("λ must be finite and nonzero".into()));
        }
        let (lo, hi) = self.interval();
        let f = self.clone();
        let g = self.clone();
        Self::custom(
            move |x| lambda * f.f(x) + c,
            move |y| g.f_inv((y - c) / lambda),
            (lo, hi),
        )
    }

    fn as_scalar_generator(&self) -> Option<ScalarGenerator> {
        match *self {
            ScalarMeanSpec::Power { p } => Some(ScalarGenerator::Power { p }),
            ScalarMeanSpec::Lse => Some(ScalarGenerator::Lse),
            ScalarMeanSpec::Custom(_) => None,
        }
    }

    /// The interval I of admissible arguments (endpoints included only when
    /// the generator is finite there).
    pub fn interval(&self) -> (f64, f64) {
        match self {
            ScalarMeanSpec::Power { p } if *p == 1.0 => (f64::NEG_INFINITY, f64::INFINITY),
            ScalarMeanSpec::Power { .. } => (0.0, f64::INFINITY),
            ScalarMeanSpec::Lse => (f64::NEG_INFINITY, f64::INFINITY),
            ScalarMeanSpec::Custom(c) => c.interval,
        }
    }

    /// Whether x is an admissible argument.
    pub fn contains(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            ScalarMeanSpec::Power { p } if *p == 1.0 => true,
            ScalarMeanSpec::Power { p } if *p > 0.0 => x >= 0.0,
            ScalarMeanSpec::Power { .. } => x > 0.0,
            ScalarMeanSpec::Lse => true,
            ScalarMeanSpec::Custom(c) => x > c.interval.0 && x < c.interval.1,
        }
    }

    /// The generator f.
    pub fn f(&self, x: f64) -> f64 {
        match self {
            ScalarMeanSpec::Custom(c) => (c.f)(x),
            other => other.as_scalar_generator().expect("builtin").f(x),
        }
    }

    pub fn f_inv(&self, y: f64) -> f64 {
        match self {
            ScalarMeanSpec::Custom(c) => (c.f_inv)(y),
            other => other.as_scalar_generator().expect("builtin").f_inv(y),
        }
    }

    /// Whether f is increasing (all builtin generators are).
    pub fn is_increasing(&self) -> bool {
        match self {
            ScalarMeanSpec::Custom(c) => c.increasing,
            _ => true,
        }
    }
}

impl From<ScalarGenerator> for ScalarMeanSpec {
    fn from(g: ScalarGenerator) -> Self {
        match g {
            ScalarGenerator::Power { p } => ScalarMeanSpec::Power { p },
            ScalarGenerator::Lse => ScalarMeanSpec::Lse,
        }
    }
}

fn geometric_mean(xs: &[f64], w: &[f64]) -> f64 {
    if xs.iter().zip(w).any(|(&x, &wi)| x == 0.0 && wi > 0.0) {
        return 0.0;
    }
    compensated_sum(xs.iter().zip(w).filter(|(_, &wi)| wi > 0.0).map(|(x, wi)| wi * x.ln())).exp()
}

/// Weighted power mean (Σ wᵢ xᵢᵖ)^{1/p}, evaluated through expm1/ln1p so the
/// family is continuous across p = 0.
fn power_mean_unchecked(p: f64, xs: &[f64], w: &[f64]) -> f64 {
    if p.abs() < 1e-8 {
        return geometric_mean(xs, w);
    }
    if p == 1.0 {
        return compensated_sum(xs.iter().zip(w).map(|(x, wi)| wi * x));
    }
    // Relative to the largest argument to avoid overflow of xᵖ.
    let scale = xs
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(x, _)| *x)
        .fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    if p < 0.0 && xs.iter().zip(w).any(|(&x, &wi)| x == 0.0 && wi > 0.0) {
        return 0.0;
    }
    let s = compensated_sum(
        xs.iter()
            .zip(w)
            .filter(|(_, &wi)| wi > 0.0)
            .map(|(&x, &wi)| {
                if x == 0.0 {
                    -wi
                } else {
                    wi * (p * (x / scale).ln()).exp_m1()
                }
            }),
    );
    scale * (s.ln_1p() / p).exp()
}

fn lse_mean(xs: &[f64], w: &[f64]) -> f64 {
    let shift = xs
        .iter()
        .zip(w)
        .filter(|(_, &wi)| wi > 0.0)
        .map(|(x, _)| *x)
        .fold(f64::NEG_INFINITY, f64::max);
    shift
        + compensated_sum(xs.iter().zip(w).map(|(x, wi)| wi * (x - shift).exp())).ln()
}

/// m_f(x₁, …, xₙ; w) = f⁻¹(Σ wᵢ f(xᵢ)).
pub fn scalar_qam(spec: &ScalarMeanSpec, xs: &[f64], w: &WeightVector) -> Result<f64> {
    w.require_len(xs.len())?;
    if let Some((i, x)) = xs.iter().enumerate().find(|(_, &x)| !spec.contains(x)) {
        return Err(Error::domain(
            format!("argument {i}"),
            format!("{x} is outside the interval of the mean"),
        ));
    }
    let ws = w.as_slice();
    let raw = match spec {
        ScalarMeanSpec::Power { p } => power_mean_unchecked(*p, xs, ws),
        ScalarMeanSpec::Lse => lse_mean(xs, ws),
        ScalarMeanSpec::Custom(c) => {
            (c.f_inv)(compensated_sum(xs.iter().zip(ws).map(|(&x, wi)| wi * (c.f)(x))))
        }
    };
    // In-betweenness can be violated by the last ulp of f⁻¹∘f.
    let (lo, hi) = xs
        .iter()
        .zip(ws)
        .filter(|(_, &wi)| wi > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&x, _)| (lo.min(x), hi.max(x)));
    Ok(raw.clamp(lo, hi))
}

/// Weighted power mean of positive reals.
pub fn power_mean(p: f64, xs: &[f64], w: &WeightVector) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::InvalidSpec("power exponent must be finite".into()));
    }
    if let Some((i, x)) = xs.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!("argument {i}"), format!("{x} is not positive")));
    }
    scalar_qam(&ScalarMeanSpec::Power { p }, xs, w)
}

fn check_points(gen: &Generator, pts: &[Point], w: &WeightVector, dual: bool) -> Result<()> {
    w.require_len(pts.len())?;
    for (i, p) in pts.iter().enumerate() {
        let what = format!("point {i}");
        if dual {
            gen.require_dual(p, &what)?;
        } else {
            gen.require_primal(p, &what)?;
        }
    }
    Ok(())
}

/// M_∇F(θ₁, …, θₙ; w) = ∇F⁻¹(Σ wᵢ ∇F(θᵢ)).
pub fn qaa(gen: &Generator, thetas: &[Point], w: &WeightVector) -> Result<Point> {
    check_points(gen, thetas, w, false)?;
    let grads: Vec<Point> = thetas.iter().map(|t| gen.grad_unchecked(t)).collect();
    let avg = linalg::weighted_sum(&grads, w.as_slice());
    if !gen.dual_domain_contains(&avg) {
        return Err(Error::dual_domain(
            "weighted gradient average",
            format!("leaves the gradient image of `{}`", gen.label()),
        ));
    }
    gen.grad_inv(&avg)
}

/// M_∇F*(η₁, …, ηₙ; w) = ∇F(Σ wᵢ ∇F⁻¹(ηᵢ)).
pub fn dual_qaa(gen: &Generator, etas: &[Point], w: &WeightVector) -> Result<Point> {
    check_points(gen, etas, w, true)?;
    let thetas = etas
        .iter()
        .map(|e| gen.grad_inv(e))
        .collect::<Result<Vec<_>>>()?;
    let avg = linalg::weighted_sum(&thetas, w.as_slice());
    gen.grad(&avg)
}
