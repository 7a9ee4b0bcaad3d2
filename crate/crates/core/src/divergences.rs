//! Bregman-type divergences induced by a generator, and (M, N)-Jensen
//! divergences between scalars with a midpoint-convexity scan.

use serde::Serialize;

use crate::averages::{scalar_qam, ScalarMeanSpec, WeightVector};
use crate::error::{Error, Result};
use crate::generators::{conjugate, Generator};
use crate::linalg::{self, compensated_sum, dot, Point};

/// Breakdown of a divergence value as `left + right − inner`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceParts {
    pub left: f64,
    pub right: f64,
    pub inner: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub value: f64,
    pub parts: Option<DivergenceParts>,
}

impl DivergenceReport {
    fn from_parts(left: f64, right: f64, inner: f64) -> Self {
        DivergenceReport {
            value: (left + right) - inner,
            parts: Some(DivergenceParts { left, right, inner }),
        }
    }

    fn plain(value: f64) -> Self {
        DivergenceReport { value, parts: None }
    }
}

/// B_F(θ₁:θ₂) = F(θ₁) − F(θ₂) − ⟨θ₁ − θ₂, ∇F(θ₂)⟩, with parts
/// (F(θ₁), −F(θ₂), ⟨θ₁ − θ₂, ∇F(θ₂)⟩).
pub fn bregman_report(gen: &Generator, t1: &Point, t2: &Point) -> Result<DivergenceReport> {
    gen.require_primal(t1, "first argument")?;
    gen.require_primal(t2, "second argument")?;
    let g2 = gen.grad_unchecked(t2);
    Ok(DivergenceReport::from_parts(
        gen.f_unchecked(t1),
        -gen.f_unchecked(t2),
        dot(&(t1 - t2), &g2),
    ))
}

pub fn bregman(gen: &Generator, t1: &Point, t2: &Point) -> Result<f64> {
    bregman_report(gen, t1, t2).map(|r| r.value)
}

/// Y_F(θ₁:η₂) = F(θ₁) + F*(η₂) − ⟨θ₁, η₂⟩, with parts (F(θ₁), F*(η₂), ⟨θ₁, η₂⟩).
pub fn fenchel_young_report(gen: &Generator, t1: &Point, eta2: &Point) -> Result<DivergenceReport> {
    gen.require_primal(t1, "primal argument")?;
    gen.require_dual(eta2, "dual argument")?;
    Ok(DivergenceReport::from_parts(
        gen.f_unchecked(t1),
        conjugate(gen, eta2)?,
        dot(t1, eta2),
    ))
}

pub fn fenchel_young(gen: &Generator, t1: &Point, eta2: &Point) -> Result<f64> {
    fenchel_young_report(gen, t1, eta2).map(|r| r.value)
}

/// B_F(θ₁:θ₂) + B_F(θ₂:θ₁) = ⟨θ₂ − θ₁, ∇F(θ₂) − ∇F(θ₁)⟩.
pub fn jeffreys_bregman(gen: &Generator, t1: &Point, t2: &Point) -> Result<f64> {
    gen.require_primal(t1, "first argument")?;
    gen.require_primal(t2, "second argument")?;
    let g1 = gen.grad_unchecked(t1);
    let g2 = gen.grad_unchecked(t2);
    Ok(dot(&(t2 - t1), &(g2 - g1)))
}

/// B_{F*}(η₁:η₂) = F*(η₁) − F*(η₂) − ⟨η₁ − η₂, ∇F*(η₂)⟩.
pub fn dual_bregman(gen: &Generator, eta1: &Point, eta2: &Point) -> Result<f64> {
    let theta2 = gen.grad_inv(eta2)?;
    Ok(conjugate(gen, eta1)? - conjugate(gen, eta2)? - dot(&(eta1 - eta2), &theta2))
}

/// J_F(θ₁, θ₂) = (F(θ₁) + F(θ₂))/2 − F((θ₁ + θ₂)/2).
pub fn jensen(gen: &Generator, t1: &Point, t2: &Point) -> Result<f64> {
    jensen_report(gen, t1, t2).map(|r| r.value)
}

pub fn jensen_report(gen: &Generator, t1: &Point, t2: &Point) -> Result<DivergenceReport> {
    gen.require_primal(t1, "first argument")?;
    gen.require_primal(t2, "second argument")?;
    let mid = (t1 + t2) * 0.5;
    gen.require_primal(&mid, "midpoint")?;
    Ok(DivergenceReport::plain(
        0.5 * (gen.f_unchecked(t1) + gen.f_unchecked(t2)) - gen.f_unchecked(&mid),
    ))
}

/// Jensen diversity Σ wᵢ F(θᵢ) − F(Σ wᵢ θᵢ).
pub fn jensen_diversity(gen: &Generator, thetas: &[Point], w: &WeightVector) -> Result<f64> {
    if thetas.len() != w.len() {
        return Err(Error::LengthMismatch {
            what: "points vs weights",
            expected: w.len(),
            got: thetas.len(),
        });
    }
    for (i, t) in thetas.iter().enumerate() {
        gen.require_primal(t, &format!("point {i}"))?;
    }
    let centre = linalg::weighted_sum(thetas, w.as_slice());
    gen.require_primal(&centre, "weighted centre")?;
    let avg_f = compensated_sum(
        thetas
            .iter()
            .zip(w.as_slice())
            .map(|(t, wi)| wi * gen.f_unchecked(t)),
    );
    Ok(avg_f - gen.f_unchecked(&centre))
}

fn bivariate(spec: &ScalarMeanSpec, a: f64, b: f64) -> Result<f64> {
    scalar_qam(spec, &[a, b], &WeightVector::uniform(2)?)
}

/// J_F^{M,N}(θ₁, θ₂) = M(F(θ₁), F(θ₂)) − F(N(θ₁, θ₂)).
///
/// The sign is only guaranteed when F is (N, M)-convex.
pub fn mn_jensen(
    m: &ScalarMeanSpec,
    n: &ScalarMeanSpec,
    f: impl Fn(f64) -> f64,
    t1: f64,
    t2: f64,
) -> Result<f64> {
    let (f1, f2) = (f(t1), f(t2));
    for (what, v) in [("F(θ₁)", f1), ("F(θ₂)", f2)] {
        if !v.is_finite() {
            return Err(Error::domain(what, "F is not finite there"));
        }
    }
    let inner = bivariate(n, t1, t2)?;
    let f_inner = f(inner);
    if !f_inner.is_finite() {
        return Err(Error::domain("N(θ₁, θ₂)", "F is not finite there"));
    }
    Ok(bivariate(m, f1, f2)? - f_inner)
}

/// Strict (M_{f₁}, M_{f₂})-convexity test for g on [a, b]:
/// g(M_{f₁}(x, y)) < M_{f₂}(g(x), g(y)) for x ≠ y.
///
/// Equivalent to strict midpoint convexity of h = f₂ ∘ g ∘ f₁⁻¹ on f₁([a, b])
/// (concavity when f₂ is decreasing). The scan evaluates every pair of the
/// `grid` uniformly spaced nodes of f₁([a, b]) and requires each midpoint gap
/// to exceed 1e−12.
pub fn mn_convexity_test(
    f1: &ScalarMeanSpec,
    f2: &ScalarMeanSpec,
    g: impl Fn(f64) -> f64,
    interval: (f64, f64),
    grid: usize,
) -> Result<bool> {
    let (a, b) = interval;
    if !(a < b) || grid < 3 {
        return Err(Error::InvalidSpec(format!(
            "need a < b and at least 3 grid nodes (got [{a}, {b}], {grid})"
        )));
    }
    for x in [a, b] {
        if !f1.contains(x) {
            return Err(Error::domain("interval endpoint", format!("{x} outside the domain of f₁")));
        }
    }
    let (u0, u1) = (f1.f(a), f1.f(b));
    let h = |u: f64| -> Result<f64> {
        let x = f1.f_inv(u);
        let gx = g(x);
        if !gx.is_finite() || !f2.contains(gx) {
            return Err(Error::domain("g(x)", format!("g({x}) = {gx} is outside the domain of f₂")));
        }
        Ok(f2.f(gx))
    };
    let nodes: Vec<f64> = (0..grid)
        .map(|k| u0 + (u1 - u0) * k as f64 / (grid - 1) as f64)
        .collect();
    let values = nodes.iter().map(|&u| h(u)).collect::<Result<Vec<_>>>()?;
    let sign = if f2.is_increasing() { 1.0 } else { -1.0 };
    for i in 0..grid {
        for j in (i + 1)..grid {
            let mid = h(0.5 * (nodes[i] + nodes[j]))?;
            let gap = sign * (0.5 * (values[i] + values[j]) - mid);
            if !(gap > 1e-12) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorSpec;
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn v(xs: &[f64]) -> Point {
        DVector::from_column_slice(xs)
    }

    fn quadratic(q: Vec<Vec<f64>>, c: Vec<f64>, kappa: f64) -> Generator {
        GeneratorSpec::Quadratic { q, c, kappa }.build().unwrap()
    }

    fn identity2() -> Generator {
        quadratic(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0], 0.0)
    }

    #[test]
    fn bregman_examples() {
        let g = GeneratorSpec::Lse0 { dim: 2 }.build().unwrap();
        let t = v(&[0.3, -0.2]);
        assert_abs_diff_eq!(bregman(&g, &t, &t).unwrap(), 0.0, epsilon = 1e-15);

        let q = quadratic(vec![vec![2.0, 0.5], vec![0.5, 1.0]], vec![1.0, -2.0], 4.0);
        let (a, b) = (v(&[1.0, 2.0]), v(&[-0.5, 0.25]));
        let d = &b - &a;
        let qm = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let expected = 0.5 * d.dot(&(qm * &d));
        assert_abs_diff_eq!(bregman(&q, &a, &b).unwrap(), expected, epsilon = 1e-13);

        let nld = GeneratorSpec::NegLogDet { dim: 2 }.build().unwrap();
        let two_i = crate::linalg::from_matrix(&(DMatrix::identity(2, 2) * 2.0));
        let i = crate::linalg::from_matrix(&DMatrix::identity(2, 2));
        assert_abs_diff_eq!(
            bregman(&nld, &two_i, &i).unwrap(),
            2.0 - 2.0 * std::f64::consts::LN_2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn bregman_parts_reconstruct_value() {
        let g = GeneratorSpec::Lse0 { dim: 3 }.build().unwrap();
        let r = bregman_report(&g, &v(&[0.1, 0.2, 0.3]), &v(&[-1.0, 0.0, 2.0])).unwrap();
        let p = r.parts.unwrap();
        assert!((p.left + p.right - p.inner - r.value).abs() <= 1e-12);
    }

    #[test]
    fn bregman_first_order_expansion() {
        // B_F(θ + h:θ) ≈ ½ hᵀ∇²F h, compared with a finite-difference Hessian
        let g = GeneratorSpec::NegLogDet { dim: 2 }.build().unwrap();
        let t = crate::linalg::from_matrix(&DMatrix::identity(2, 2));
        let dir = crate::linalg::from_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -1.0]));
        let h = 1e-3;
        let b = bregman(&g, &(&t + &dir * h), &t).unwrap();
        // for −log det at I the Hessian quadratic form is tr(D²)
        let expected = 0.5 * h * h * dir.dot(&dir);
        assert!((b - expected).abs() < 1e-8);
    }

    #[test]
    fn fenchel_young_examples() {
        let g = identity2();
        assert_abs_diff_eq!(fenchel_young(&g, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0, epsilon = 1e-15);
        let l = GeneratorSpec::Lse0 { dim: 1 }.build().unwrap();
        assert_abs_diff_eq!(fenchel_young(&l, &v(&[0.0]), &v(&[0.5])).unwrap(), 0.0, epsilon = 1e-15);
        let t = v(&[0.4]);
        let eta = l.grad(&t).unwrap();
        assert_abs_diff_eq!(fenchel_young(&l, &t, &eta).unwrap(), 0.0, epsilon = 1e-15);
        // Y_F(θ₁:η₂) = B_F(θ₁:∇F⁻¹(η₂))
        let eta2 = v(&[0.8]);
        let y = fenchel_young(&l, &t, &eta2).unwrap();
        let b = bregman(&l, &t, &l.grad_inv(&eta2).unwrap()).unwrap();
        assert_abs_diff_eq!(y, b, epsilon = 1e-12);
    }

    #[test]
    fn jeffreys_examples() {
        let g = identity2();
        assert_abs_diff_eq!(jeffreys_bregman(&g, &v(&[0.0, 0.0]), &v(&[1.0, 1.0])).unwrap(), 2.0, epsilon = 1e-15);
        let nld = GeneratorSpec::NegLogDet { dim: 2 }.build().unwrap();
        let p = crate::linalg::from_matrix(&DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]));
        let q = crate::linalg::from_matrix(&DMatrix::from_row_slice(2, 2, &[0.7, -0.1, -0.1, 1.4]));
        let j = jeffreys_bregman(&nld, &p, &q).unwrap();
        let s = bregman(&nld, &p, &q).unwrap() + bregman(&nld, &q, &p).unwrap();
        assert_abs_diff_eq!(j, s, epsilon = 1e-12);
        assert_abs_diff_eq!(jeffreys_bregman(&nld, &p, &p).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dual_bregman_swaps_arguments() {
        // B_F(θ₁:θ₂) = B_F*(η₂:η₁)
        let g = GeneratorSpec::Lse0 { dim: 2 }.build().unwrap();
        let (a, b) = (v(&[0.3, -1.0]), v(&[1.2, 0.4]));
        let lhs = bregman(&g, &a, &b).unwrap();
        let rhs = dual_bregman(&g, &g.grad(&b).unwrap(), &g.grad(&a).unwrap()).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn jensen_examples() {
        let g = quadratic(vec![vec![1.0]], vec![0.0], 0.0);
        assert_abs_diff_eq!(jensen(&g, &v(&[0.0]), &v(&[2.0])).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(jensen(&g, &v(&[1.3]), &v(&[1.3])).unwrap(), 0.0, epsilon = 1e-15);
        let l = GeneratorSpec::Lse0 { dim: 1 }.build().unwrap();
        let t = 3.0_f64;
        // direct evaluation: (log(1+e^{-3}) + log(1+e^3))/2 − log 2
        let expected = 0.5 * ((-t).exp().ln_1p() + t.exp().ln_1p()) - std::f64::consts::LN_2;
        assert_abs_diff_eq!(jensen(&l, &v(&[-t]), &v(&[t])).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn mn_jensen_examples() {
        let a = ScalarMeanSpec::arithmetic();
        let geo = ScalarMeanSpec::geometric();
        let sq = |t: f64| 0.5 * t * t;
        let g = quadratic(vec![vec![1.0]], vec![0.0], 0.0);
        let direct = jensen(&g, &v(&[0.3]), &v(&[2.1])).unwrap();
        assert_abs_diff_eq!(mn_jensen(&a, &a, sq, 0.3, 2.1).unwrap(), direct, epsilon = 1e-14);
        assert_abs_diff_eq!(mn_jensen(&geo, &a, f64::exp, 0.0, 2.0).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mn_jensen(&a, &geo, |t| t * t, 1.0, 4.0).unwrap(), 4.5, epsilon = 1e-13);
    }

    #[test]
    fn convexity_scan_examples() {
        let id = ScalarMeanSpec::arithmetic();
        let log = ScalarMeanSpec::geometric();
        assert!(mn_convexity_test(&id, &id, f64::exp, (0.0, 1.0), 41).unwrap());
        assert!(!mn_convexity_test(&id, &id, f64::ln, (1.0, 2.0), 41).unwrap());
        // exp is multiplicatively convex: log∘exp∘exp = exp is convex on log([1,2])
        assert!(mn_convexity_test(&log, &log, f64::exp, (1.0, 2.0), 41).unwrap());
        // ln is not: log∘ln∘exp = ln is concave on log([2,3])
        assert!(!mn_convexity_test(&log, &log, f64::ln, (2.0, 3.0), 41).unwrap());
        // exp is (A, G)-affine (log∘exp = id), so not strictly convex
        assert!(!mn_convexity_test(&id, &log, f64::exp, (0.0, 1.0), 41).unwrap());
    }

    #[test]
    fn convexity_scan_agrees_with_mn_jensen_sign() {
        // whenever the scan passes, every sampled (M, N)-Jensen gap is positive
        let specs = [ScalarMeanSpec::arithmetic(), ScalarMeanSpec::geometric(), ScalarMeanSpec::harmonic()];
        let funcs: [fn(f64) -> f64; 3] = [|t| t * t, f64::sqrt, |t| t.powf(1.5)];
        for f1 in &specs {
            for f2 in &specs {
                for g in funcs {
                    let pass = mn_convexity_test(f1, f2, g, (0.5, 3.0), 25).unwrap();
                    let mut all_positive = true;
                    for i in 0..20 {
                        for j in (i + 1)..20 {
                            let x = 0.5 + 2.5 * i as f64 / 19.0;
                            let y = 0.5 + 2.5 * j as f64 / 19.0;
                            let gap = mn_jensen(f2, f1, g, x, y).unwrap();
                            all_positive &= gap > 0.0;
                        }
                    }
                    if pass {
                        assert!(all_positive);
                    }
                }
            }
        }
    }
}
