//! Quasi-arithmetic mixtures of finite-support densities, entropies and
//! Jensen-Shannon type divergences, plus two continuous closure checks.

pub mod geodesic;
pub mod quadrature;

use serde::{Deserialize, Serialize};

use crate::averages::{scalar_qam, ScalarMeanSpec, WeightVector};
use crate::divergences::jensen;
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::linalg::{compensated_sum, Point};

pub use geodesic::{alpha_geodesic, alpha_geodesic_point, AlphaGeodesicConfig, GeodesicPath, GeodesicSolver};

const MASS_TOL: f64 = 1e-12;

/// Probability vector on {0, …, m−1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteDensity {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for DiscreteDensity {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DiscreteDensity::new(v)
    }
}

impl From<DiscreteDensity> for Vec<f64> {
    fn from(d: DiscreteDensity) -> Self {
        d.probs
    }
}

impl DiscreteDensity {
    /// Nonnegative entries summing to one within 1e−12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDensity("empty support".into()));
        }
        if let Some((i, x)) = probs.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidDensity(format!("entry {i} is {x}")));
        }
        let s = compensated_sum(probs.iter().copied());
        if (s - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDensity(format!("total mass {s}")));
        }
        Ok(DiscreteDensity { probs })
    }

    /// Divides nonnegative masses by their total.
    pub fn normalized(masses: &[f64]) -> Result<Self> {
        if masses.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidDensity("masses must be finite and nonnegative".into()));
        }
        let z = compensated_sum(masses.iter().copied());
        if !(z > 0.0) {
            return Err(Error::InvalidDensity("zero total mass".into()));
        }
        Self::new(masses.iter().map(|x| x / z).collect())
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDensity("empty support".into()));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn is_positive(&self) -> bool {
        self.probs.iter().all(|&x| x > 0.0)
    }
}

fn same_support(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<()> {
    if p.len() == q.len() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what: "support size",
            expected: p.len(),
            got: q.len(),
        })
    }
}

/// H(p) = −Σ p log p with 0 log 0 = 0.
pub fn shannon_entropy(p: &DiscreteDensity) -> f64 {
    -compensated_sum(p.probs.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()))
}

/// H×(p:q) = −Σ p log q.
pub fn cross_entropy(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    same_support(p, q)?;
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&a, &b)) in p.probs.iter().zip(&q.probs).enumerate() {
        if a > 0.0 {
            if b == 0.0 {
                return Err(Error::InfiniteDivergence { index: i, mass: a });
            }
            terms.push(-a * b.ln());
        }
    }
    Ok(compensated_sum(terms))
}

/// D_KL(p:q) = Σ p log(p/q).
pub fn kl(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    same_support(p, q)?;
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&a, &b)) in p.probs.iter().zip(&q.probs).enumerate() {
        if a > 0.0 {
            if b == 0.0 {
                return Err(Error::InfiniteDivergence { index: i, mass: a });
            }
            terms.push(a * (a.ln() - b.ln()));
        }
    }
    Ok(compensated_sum(terms))
}

/// A normalized quasi-arithmetic mixture and its normalizer Z.
#[derive(Debug, Clone, PartialEq)]
pub struct Qamix {
    pub density: DiscreteDensity,
    pub normalizer: f64,
}

/// x ↦ m_f(p₁(x), …, pₙ(x); w) / Z.
pub fn qamix_with_normalizer(spec: &ScalarMeanSpec, densities: &[DiscreteDensity], w: &WeightVector) -> Result<Qamix> {
    let first = densities
        .first()
        .ok_or_else(|| Error::InvalidSpec("mixture of no densities".into()))?;
    if densities.len() != w.len() {
        return Err(Error::LengthMismatch {
            what: "densities vs weights",
            expected: w.len(),
            got: densities.len(),
        });
    }
    for d in densities {
        same_support(first, d)?;
    }
    let masses = (0..first.len())
        .map(|x| {
            let column: Vec<f64> = densities.iter().map(|d| d.probs[x]).collect();
            scalar_qam(spec, &column, w)
        })
        .collect::<Result<Vec<f64>>>()?;
    let normalizer = compensated_sum(masses.iter().copied());
    if !(normalizer > 0.0 && normalizer.is_finite()) {
        return Err(Error::InvalidDensity(format!("mixture normalizer is {normalizer}")));
    }
    let density = DiscreteDensity::new(masses.iter().map(|m| m / normalizer).collect())
        .or_else(|_| DiscreteDensity::normalized(&masses))?;
    Ok(Qamix { density, normalizer })
}

pub fn qamix(spec: &ScalarMeanSpec, densities: &[DiscreteDensity], w: &WeightVector) -> Result<DiscreteDensity> {
    qamix_with_normalizer(spec, densities, w).map(|m| m.density)
}

/// α-mixture: the power-(1 − α)/2 quasi-arithmetic mixture.
pub fn alpha_mixture(alpha: f64, densities: &[DiscreteDensity], w: &WeightVector) -> Result<DiscreteDensity> {
    if !alpha.is_finite() {
        return Err(Error::InvalidSpec(format!("alpha = {alpha}")));
    }
    qamix(&ScalarMeanSpec::Power { p: 0.5 * (1.0 - alpha) }, densities, w)
}

/// D_α(p:q) = 4/(1 − α²) (1 − Σ p^{(1−α)/2} q^{(1+α)/2}); KL(p:q) at α = −1
/// and KL(q:p) at α = 1.
pub fn alpha_divergence(alpha: f64, p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    same_support(p, q)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidSpec(format!("alpha = {alpha}")));
    }
    if alpha == -1.0 {
        return kl(p, q);
    }
    if alpha == 1.0 {
        return kl(q, p);
    }
    let c = 0.5 * (1.0 + alpha);
    // 1 − Σ p^{1−c} q^c = Σ (p − p (q/p)^c), written with expm1 for accuracy
    let bracket = compensated_sum(p.probs.iter().zip(&q.probs).map(|(&a, &b)| match (a > 0.0, b > 0.0) {
        (true, true) => -a * (c * (b.ln() - a.ln())).exp_m1(),
        (true, false) => a,
        (false, _) => 0.0,
    }));
    Ok(4.0 / (1.0 - alpha * alpha) * bracket)
}

fn midpoint(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<DiscreteDensity> {
    same_support(p, q)?;
    Ok(DiscreteDensity {
        probs: p.probs.iter().zip(&q.probs).map(|(a, b)| 0.5 * (a + b)).collect(),
    })
}

/// ½ (KL(p:(p+q)/2) + KL(q:(p+q)/2)).
pub fn jsd(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    let m = midpoint(p, q)?;
    Ok(0.5 * (kl(p, &m)? + kl(q, &m)?))
}

/// H((p+q)/2) − (H(p) + H(q))/2.
pub fn jsd_entropy_form(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    let m = midpoint(p, q)?;
    Ok(shannon_entropy(&m) - 0.5 * (shannon_entropy(p) + shannon_entropy(q)))
}

/// ½ (KL(p:(pq)^{m_f}) + KL(q:(pq)^{m_f})).
pub fn generalized_jsd(spec: &ScalarMeanSpec, p: &DiscreteDensity, q: &DiscreteDensity) -> Result<f64> {
    let mix = qamix(spec, &[p.clone(), q.clone()], &WeightVector::uniform(2)?)?;
    Ok(0.5 * (kl(p, &mix)? + kl(q, &mix)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HjsdReport {
    pub value: f64,
    /// True when the value is provably nonnegative: f arithmetic and g a
    /// power mean of exponent at most one.
    pub nonnegativity_guaranteed: bool,
}

/// H((pq)^{m_f}) − m_g(H(p), H(q)); may be negative.
pub fn hjsd(f: &ScalarMeanSpec, g: &ScalarMeanSpec, p: &DiscreteDensity, q: &DiscreteDensity) -> Result<HjsdReport> {
    let w = WeightVector::uniform(2)?;
    let mix = qamix(f, &[p.clone(), q.clone()], &w)?;
    let (hp, hq) = (shannon_entropy(p), shannon_entropy(q));
    for (what, h) in [("H(p)", hp), ("H(q)", hq)] {
        if !g.contains(h) {
            return Err(Error::domain(what, format!("entropy {h} is outside the interval of g")));
        }
    }
    let guaranteed = matches!(f, ScalarMeanSpec::Power { p } if *p == 1.0)
        && matches!(g, ScalarMeanSpec::Power { p } if *p <= 1.0);
    Ok(HjsdReport {
        value: shannon_entropy(&mix) - scalar_qam(g, &[hp, hq], &w)?,
        nonnegativity_guaranteed: guaranteed,
    })
}

/// Categorical density with natural parameter θ in the log-sum-exp chart:
/// p₀ ∝ 1, pᵢ ∝ exp θᵢ.
pub fn categorical_density(theta: &Point) -> Result<DiscreteDensity> {
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("natural parameter", "non-finite entry"));
    }
    let top = theta.iter().cloned().fold(0.0_f64, f64::max);
    let masses: Vec<f64> = std::iter::once((-top).exp())
        .chain(theta.iter().map(|t| (t - top).exp()))
        .collect();
    DiscreteDensity::normalized(&masses)
}

/// Scale of the harmonic mixture of two centred Cauchy densities, which is
/// again Cauchy: √((s₁s₂² + s₂s₁²)/(s₁ + s₂)) = √(s₁s₂).
pub fn cauchy_harmonic_scale(s1: f64, s2: f64) -> Result<f64> {
    for (what, s) in [("s1", s1), ("s2", s2)] {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::domain(what, format!("scale must be positive, got {s}")));
        }
    }
    Ok((s1.sqrt()) * (s2.sqrt()))
}

pub fn cauchy_density(x: f64, s: f64) -> f64 {
    s / (std::f64::consts::PI * (s * s + x * x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyClosureCheck {
    pub s1: f64,
    pub s2: f64,
    pub scale: f64,
    /// ∫ of the unnormalized harmonic mixture, by quadrature.
    pub normalizer: f64,
    /// Sup-norm gap between the normalized mixture and the Cauchy density.
    pub sup_error: f64,
}

/// Normalizes the equal-weight harmonic mixture of Cauchy(s₁) and Cauchy(s₂)
/// by quadrature and compares it with Cauchy(√(s₁s₂)) on `grid` points of
/// [−50 max(s₁, s₂), 50 max(s₁, s₂)].
pub fn cauchy_closure_check(s1: f64, s2: f64, grid: usize) -> Result<CauchyClosureCheck> {
    let scale = cauchy_harmonic_scale(s1, s2)?;
    if grid < 2 {
        return Err(Error::InvalidSpec("evaluation grid needs at least two points".into()));
    }
    let mix = |x: f64| 2.0 / (1.0 / cauchy_density(x, s1) + 1.0 / cauchy_density(x, s2));
    let normalizer = quadrature::integrate_real_line(mix, scale, 1e-14)?;
    let half = 50.0 * s1.max(s2);
    let sup_error = (0..grid)
        .map(|k| {
            let x = -half + 2.0 * half * k as f64 / (grid - 1) as f64;
            (mix(x) / normalizer - cauchy_density(x, scale)).abs()
        })
        .fold(0.0, f64::max);
    Ok(CauchyClosureCheck { s1, s2, scale, normalizer, sup_error })
}

/// β KL(p:γ) + (1 − β) KL(q:γ) where γ is the α-geodesic point at β.
pub fn nabla_alpha_jsd(p: &DiscreteDensity, q: &DiscreteDensity, alpha: f64, beta: f64) -> Result<f64> {
    nabla_alpha_jsd_with(p, q, beta, &AlphaGeodesicConfig::new(alpha)?)
}

pub fn nabla_alpha_jsd_with(p: &DiscreteDensity, q: &DiscreteDensity, beta: f64, cfg: &AlphaGeodesicConfig) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidSpec(format!("beta = {beta} is outside (0, 1)")));
    }
    let gamma = alpha_geodesic_point(p, q, beta, cfg)?;
    Ok(beta * kl(p, &gamma)? + (1.0 - beta) * kl(q, &gamma)?)
}

/// (D_JS(m_θ₁, m_θ₂), J_F(θ₁, θ₂)) for a mixture-negentropy generator F.
pub fn mixture_family_jsd_identity(gen: &Generator, t1: &Point, t2: &Point) -> Result<(f64, f64)> {
    let m1 = DiscreteDensity::normalized(gen.mixture_density(t1)?.as_slice())?;
    let m2 = DiscreteDensity::normalized(gen.mixture_density(t2)?.as_slice())?;
    Ok((jsd(&m1, &m2)?, jensen(gen, t1, t2)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::jensen_diversity;
    use crate::generators::{conjugate, GeneratorSpec};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn d(xs: &[f64]) -> DiscreteDensity {
        DiscreteDensity::new(xs.to_vec()).unwrap()
    }

    fn half() -> WeightVector {
        WeightVector::uniform(2).unwrap()
    }

    fn density_strategy(m: usize) -> impl Strategy<Value = DiscreteDensity> {
        proptest::collection::vec(0.01..1.0f64, m).prop_map(|v| DiscreteDensity::normalized(&v).unwrap())
    }

    #[test]
    fn density_validation() {
        assert!(DiscreteDensity::new(vec![0.5, 0.4]).is_err());
        assert!(DiscreteDensity::new(vec![1.5, -0.5]).is_err());
        assert!(DiscreteDensity::new(vec![]).is_err());
        let p: DiscreteDensity = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.25,0.75]");
        assert!(serde_json::from_str::<DiscreteDensity>("[0.25,0.5]").is_err());
    }

    #[test]
    fn entropy_and_kl_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(kl(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(shannon_entropy(&DiscreteDensity::uniform(4).unwrap()), 4f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(kl(&d(&[1.0, 0.0]), &d(&[0.5, 0.5])).unwrap(), LN_2, epsilon = 1e-15);
        assert_eq!(
            kl(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])),
            Err(Error::InfiniteDivergence { index: 1, mass: 0.5 })
        );
        assert!(cross_entropy(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).is_err());
        let q = d(&[0.6, 0.1, 0.3]);
        assert_abs_diff_eq!(
            kl(&p, &q).unwrap(),
            cross_entropy(&p, &q).unwrap() - shannon_entropy(&p),
            epsilon = 1e-12
        );
    }

    #[test]
    fn qamix_examples() {
        let (p, q) = (d(&[0.2, 0.3, 0.5]), d(&[0.6, 0.1, 0.3]));
        let w = WeightVector::new(vec![0.25, 0.75]).unwrap();
        let m = qamix_with_normalizer(&ScalarMeanSpec::arithmetic(), &[p.clone(), q.clone()], &w).unwrap();
        assert_abs_diff_eq!(m.normalizer, 1.0, epsilon = 1e-15);
        for x in 0..3 {
            assert_abs_diff_eq!(m.density.probs()[x], 0.25 * p.probs()[x] + 0.75 * q.probs()[x], epsilon = 1e-15);
        }
        for spec in [ScalarMeanSpec::geometric(), ScalarMeanSpec::harmonic(), ScalarMeanSpec::Lse] {
            let same = qamix(&spec, &[p.clone(), p.clone()], &half()).unwrap();
            for x in 0..3 {
                assert_abs_diff_eq!(same.probs()[x], p.probs()[x], epsilon = 1e-14);
            }
        }
        let zero = d(&[0.0, 0.5, 0.5]);
        assert!(qamix(&ScalarMeanSpec::geometric(), &[p.clone(), zero], &half()).is_err());
    }

    #[test]
    fn geometric_mixture_of_categoricals() {
        let lse = GeneratorSpec::Lse0 { dim: 2 }.build().unwrap();
        let t1 = DVector::from_vec(vec![0.4, -1.2]);
        let t2 = DVector::from_vec(vec![-0.3, 2.0]);
        let (p1, p2) = (categorical_density(&t1).unwrap(), categorical_density(&t2).unwrap());
        let m = qamix_with_normalizer(&ScalarMeanSpec::geometric(), &[p1, p2], &half()).unwrap();
        let target = categorical_density(&((&t1 + &t2) * 0.5)).unwrap();
        for x in 0..3 {
            assert_abs_diff_eq!(m.density.probs()[x], target.probs()[x], epsilon = 1e-12);
        }
        let j = jensen_diversity(&lse, &[t1, t2], &half()).unwrap();
        assert_abs_diff_eq!(m.normalizer, (-j).exp(), epsilon = 1e-12);
    }

    #[test]
    fn categorical_density_matches_lse_gradient_and_entropy() {
        let lse = GeneratorSpec::Lse0 { dim: 3 }.build().unwrap();
        let t = DVector::from_vec(vec![0.5, -2.0, 1.5]);
        let p = categorical_density(&t).unwrap();
        let eta = lse.grad(&t).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(p.probs()[i + 1], eta[i], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(shannon_entropy(&p), -conjugate(&lse, &eta).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn alpha_mixture_reparameterization() {
        let (p, q) = (d(&[0.2, 0.3, 0.5]), d(&[0.6, 0.1, 0.3]));
        let w = WeightVector::new(vec![0.3, 0.7]).unwrap();
        let am = alpha_mixture(-1.0, &[p.clone(), q.clone()], &w).unwrap();
        assert_eq!(am, qamix(&ScalarMeanSpec::arithmetic(), &[p.clone(), q.clone()], &w).unwrap());
        let gm = alpha_mixture(1.0, &[p.clone(), q.clone()], &w).unwrap();
        assert_eq!(gm, qamix(&ScalarMeanSpec::geometric(), &[p.clone(), q.clone()], &w).unwrap());
    }

    #[test]
    fn alpha_mixture_is_a_centroid_on_a_grid() {
        // minimize ½ Σ D_0(pᵢ:r) over a simplex grid and compare with the α = 0 mixture
        let (p, q) = (d(&[0.2, 0.3, 0.5]), d(&[0.6, 0.1, 0.3]));
        let target = alpha_mixture(0.0, &[p.clone(), q.clone()], &half()).unwrap();
        let n = 400;
        let mut best = (f64::INFINITY, vec![]);
        for i in 1..n {
            for j in 1..(n - i) {
                let r = d(&[i as f64 / n as f64, j as f64 / n as f64, 1.0 - (i + j) as f64 / n as f64]);
                let o = 0.5 * (alpha_divergence(0.0, &p, &r).unwrap() + alpha_divergence(0.0, &q, &r).unwrap());
                if o < best.0 {
                    best = (o, r.probs().to_vec());
                }
            }
        }
        for x in 0..3 {
            assert!((best.1[x] - target.probs()[x]).abs() <= 1.0 / n as f64);
        }
    }

    #[test]
    fn alpha_divergence_examples() {
        let (p, q) = (d(&[0.2, 0.3, 0.5]), d(&[0.6, 0.1, 0.3]));
        assert_eq!(alpha_divergence(0.3, &p, &p).unwrap(), 0.0);
        let near = alpha_divergence(-1.0 + 1e-6, &p, &q).unwrap();
        assert!((near - kl(&p, &q).unwrap()).abs() < 1e-5);
        let near = alpha_divergence(1.0 - 1e-6, &p, &q).unwrap();
        assert!((near - kl(&q, &p).unwrap()).abs() < 1e-5);
        // α = 0 is four times the squared Hellinger distance
        let hell: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
        assert_abs_diff_eq!(alpha_divergence(0.0, &p, &q).unwrap(), 2.0 * hell, epsilon = 1e-14);
    }

    #[test]
    fn jsd_examples() {
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(jsd(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(jsd(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(jsd_entropy_form(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), LN_2, epsilon = 1e-15);
    }

    #[test]
    fn generalized_jsd_examples() {
        let (p, q) = (d(&[0.2, 0.3, 0.5]), d(&[0.6, 0.1, 0.3]));
        assert_abs_diff_eq!(generalized_jsd(&ScalarMeanSpec::arithmetic(), &p, &q).unwrap(), jsd(&p, &q).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(generalized_jsd(&ScalarMeanSpec::geometric(), &p, &p).unwrap(), 0.0, epsilon = 1e-15);
        let g = qamix(&ScalarMeanSpec::geometric(), &[p.clone(), q.clone()], &half()).unwrap();
        let a = qamix(&ScalarMeanSpec::arithmetic(), &[p.clone(), q.clone()], &half()).unwrap();
        let via_cross = cross_entropy(&a, &g).unwrap() - 0.5 * (shannon_entropy(&p) + shannon_entropy(&q));
        assert_abs_diff_eq!(generalized_jsd(&ScalarMeanSpec::geometric(), &p, &q).unwrap(), via_cross, epsilon = 1e-12);
    }

    #[test]
    fn hjsd_examples() {
        let (p, q) = (d(&[0.2, 0.3, 0.5]), d(&[0.6, 0.1, 0.3]));
        let a = ScalarMeanSpec::arithmetic();
        let geo = ScalarMeanSpec::geometric();
        let r = hjsd(&a, &a, &p, &q).unwrap();
        assert_abs_diff_eq!(r.value, jsd(&p, &q).unwrap(), epsilon = 1e-12);
        assert!(r.nonnegativity_guaranteed);
        assert_abs_diff_eq!(hjsd(&geo, &geo, &p, &p).unwrap().value, 0.0, epsilon = 1e-14);

        // H^{G,A} = D^G_JS + H×(G:G) − H×(A:G); the sign follows the cross-entropy gap
        for (p, q) in [(p.clone(), q.clone()), (d(&[0.98, 0.01, 0.01]), d(&[0.01, 0.01, 0.98]))] {
            let r = hjsd(&geo, &a, &p, &q).unwrap();
            assert!(!r.nonnegativity_guaranteed);
            let gm = qamix(&geo, &[p.clone(), q.clone()], &half()).unwrap();
            let am = qamix(&a, &[p.clone(), q.clone()], &half()).unwrap();
            let gap = cross_entropy(&gm, &gm).unwrap() - cross_entropy(&am, &gm).unwrap();
            let dg = generalized_jsd(&geo, &p, &q).unwrap();
            assert_abs_diff_eq!(r.value, dg + gap, epsilon = 1e-12);
            if gap >= 0.0 {
                assert!(r.value >= 0.0);
            }
        }
    }

    #[test]
    fn hjsd_can_be_negative() {
        // a sharply peaked pair has a geometric mixture far from either
        // component, dragging its entropy below the average
        let (p, q) = (d(&[0.98, 0.01, 0.01]), d(&[0.01, 0.01, 0.98]));
        let r = hjsd(&ScalarMeanSpec::geometric(), &ScalarMeanSpec::arithmetic(), &p, &q).unwrap();
        let mix = qamix(&ScalarMeanSpec::geometric(), &[p.clone(), q.clone()], &half()).unwrap();
        let direct = shannon_entropy(&mix) - 0.5 * (shannon_entropy(&p) + shannon_entropy(&q));
        assert_abs_diff_eq!(r.value, direct, epsilon = 1e-14);
    }

    #[test]
    fn cauchy_examples() {
        assert_abs_diff_eq!(cauchy_harmonic_scale(2.5, 2.5).unwrap(), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cauchy_harmonic_scale(1.0, 2.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cauchy_harmonic_scale(0.5, 4.5).unwrap(), 1.5, epsilon = 1e-15);
        assert!(cauchy_harmonic_scale(0.0, 1.0).is_err());
        let c = cauchy_closure_check(1.0, 2.0, 2001).unwrap();
        assert!(c.sup_error <= 1e-6);
        // normalizer of the harmonic mixture is 2√(s₁s₂)/(s₁+s₂)
        assert_abs_diff_eq!(c.normalizer, 2.0 * 2f64.sqrt() / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn nabla_jsd_reductions() {
        let (p, q) = (d(&[0.7, 0.2, 0.1]), d(&[0.1, 0.3, 0.6]));
        assert_abs_diff_eq!(nabla_alpha_jsd(&p, &q, -1.0, 0.5).unwrap(), jsd(&p, &q).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            nabla_alpha_jsd(&p, &q, 1.0, 0.5).unwrap(),
            generalized_jsd(&ScalarMeanSpec::geometric(), &p, &q).unwrap(),
            epsilon = 1e-12
        );
        for alpha in [-1.0, 0.0, 0.5, 1.0] {
            assert_abs_diff_eq!(nabla_alpha_jsd(&p, &p, alpha, 0.3).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert!(nabla_alpha_jsd(&p, &q, 0.0, 1.0).is_err());
    }

    #[test]
    fn mixture_family_identity_fixed_instance() {
        let gen = GeneratorSpec::MixtureNegentropy {
            densities: vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.6, 0.3]],
        }
        .build()
        .unwrap();
        let (t1, t2) = (DVector::from_vec(vec![0.2]), DVector::from_vec(vec![0.7]));
        let (a, b) = mixture_family_jsd_identity(&gen, &t1, &t2).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        let (a, b) = mixture_family_jsd_identity(&gen, &t1, &t1).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn jsd_forms_agree_and_are_bounded(p in density_strategy(5), q in density_strategy(5)) {
            let a = jsd(&p, &q).unwrap();
            prop_assert!((a - jsd_entropy_form(&p, &q).unwrap()).abs() <= 1e-12);
            prop_assert!((0.0..=LN_2 + 1e-12).contains(&a));
        }

        #[test]
        fn mixtures_are_normalized_and_gjsd_nonnegative(
            p in density_strategy(4),
            q in density_strategy(4),
            e in -1.0..1.0f64,
        ) {
            let spec = ScalarMeanSpec::Power { p: e };
            let m = qamix(&spec, &[p.clone(), q.clone()], &half()).unwrap();
            prop_assert!((m.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(generalized_jsd(&spec, &p, &q).unwrap() >= -1e-12);
        }

        #[test]
        fn alpha_divergence_reference_duality(p in density_strategy(4), q in density_strategy(4), a in -0.99..0.99f64) {
            let x = alpha_divergence(a, &p, &q).unwrap();
            prop_assert!(x >= -1e-14);
            prop_assert!((x - alpha_divergence(-a, &q, &p).unwrap()).abs() <= 1e-12 * (1.0 + x));
        }
    }
}
