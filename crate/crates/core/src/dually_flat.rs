//! Dually flat structure induced by a generator: the two affine charts,
//! primal and dual geodesics, sided Bregman centroids and the Jensen
//! barycenter iteration.

use serde::Serialize;

use crate::averages::{dual_qaa, qaa, WeightVector};
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::linalg::{self, Point};

pub const BARYCENTER_TOL: f64 = 1e-10;
pub const BARYCENTER_MAX_ITER: usize = 200;

/// A point given in both affine charts, η = ∇F(θ).
#[derive(Debug, Clone, PartialEq)]
pub struct DfsPoint {
    pub theta: Point,
    pub eta: Point,
}

impl DfsPoint {
    /// ‖η − ∇F(θ)‖∞, the chart consistency defect.
    pub fn chart_defect(&self, gen: &Generator) -> Result<f64> {
        Ok(linalg::max_abs(&(gen.grad(&self.theta)? - &self.eta)))
    }
}

pub fn lift_point(gen: &Generator, theta: &Point) -> Result<DfsPoint> {
    Ok(DfsPoint {
        eta: gen.grad(theta)?,
        theta: theta.clone(),
    })
}

/// Point from dual coordinates, θ = ∇F⁻¹(η).
pub fn lift_dual(gen: &Generator, eta: &Point) -> Result<DfsPoint> {
    Ok(DfsPoint {
        theta: gen.grad_inv(eta)?,
        eta: eta.clone(),
    })
}

fn check_t(t: f64) -> Result<WeightVector> {
    if !t.is_finite() {
        return Err(Error::InvalidSpec(format!("geodesic parameter {t} is not finite")));
    }
    WeightVector::pair(t)
}

/// Point at parameter t of the ∇-geodesic (straight in θ).
pub fn primal_geodesic_point(gen: &Generator, p: &DfsPoint, q: &DfsPoint, t: f64) -> Result<DfsPoint> {
    let w = check_t(t)?;
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t == 1.0 {
        return Ok(q.clone());
    }
    let theta = linalg::weighted_sum(&[p.theta.clone(), q.theta.clone()], w.as_slice());
    let eta = dual_qaa(gen, &[p.eta.clone(), q.eta.clone()], &w)?;
    Ok(DfsPoint { theta, eta })
}

/// Point at parameter t of the ∇*-geodesic (straight in η).
pub fn dual_geodesic_point(gen: &Generator, p: &DfsPoint, q: &DfsPoint, t: f64) -> Result<DfsPoint> {
    let w = check_t(t)?;
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t == 1.0 {
        return Ok(q.clone());
    }
    let eta = linalg::weighted_sum(&[p.eta.clone(), q.eta.clone()], w.as_slice());
    let theta = qaa(gen, &[p.theta.clone(), q.theta.clone()], &w)?;
    Ok(DfsPoint { theta, eta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicKind {
    Primal,
    Dual,
}

/// Samples a geodesic at t = k / samples for k = 0..=samples.
pub fn sample_geodesic(
    gen: &Generator,
    p: &DfsPoint,
    q: &DfsPoint,
    kind: GeodesicKind,
    samples: usize,
) -> Result<Vec<(f64, DfsPoint)>> {
    if samples == 0 {
        return Err(Error::InvalidSpec("need at least one sample interval".into()));
    }
    (0..=samples)
        .map(|k| {
            let t = k as f64 / samples as f64;
            let pt = match kind {
                GeodesicKind::Primal => primal_geodesic_point(gen, p, q, t)?,
                GeodesicKind::Dual => dual_geodesic_point(gen, p, q, t)?,
            };
            Ok((t, pt))
        })
        .collect()
}

fn check_points(points: &[DfsPoint], w: &WeightVector) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidSpec("centroid of an empty set".into()));
    }
    if points.len() != w.len() {
        return Err(Error::LengthMismatch {
            what: "points vs weights",
            expected: w.len(),
            got: points.len(),
        });
    }
    Ok(())
}

/// Minimizer of Σ wᵢ B_F(θᵢ:θ): arithmetic in θ.
pub fn right_centroid(gen: &Generator, points: &[DfsPoint], w: &WeightVector) -> Result<DfsPoint> {
    check_points(points, w)?;
    let thetas: Vec<Point> = points.iter().map(|p| p.theta.clone()).collect();
    for (i, t) in thetas.iter().enumerate() {
        gen.require_primal(t, &format!("centroid point {i}"))?;
    }
    lift_point(gen, &linalg::weighted_sum(&thetas, w.as_slice()))
}

/// Minimizer of Σ wᵢ B_F(θ:θᵢ): arithmetic in η.
pub fn left_centroid(gen: &Generator, points: &[DfsPoint], w: &WeightVector) -> Result<DfsPoint> {
    check_points(points, w)?;
    let thetas: Vec<Point> = points.iter().map(|p| p.theta.clone()).collect();
    let theta = qaa(gen, &thetas, w)?;
    let etas: Vec<Point> = points.iter().map(|p| p.eta.clone()).collect();
    let eta = linalg::weighted_sum(&etas, w.as_slice());
    Ok(DfsPoint { theta, eta })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterTrace {
    pub iterates: Vec<Point>,
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl BarycenterTrace {
    pub fn point(&self) -> &Point {
        self.iterates.last().expect("trace holds the initial iterate")
    }

    pub fn residual(&self) -> f64 {
        *self.residuals.last().expect("trace holds the initial residual")
    }

    /// Number of updates performed.
    pub fn iterations(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// ‖∇F(θ) − Σ wᵢ ∇F((θ + θᵢ)/2)‖₂, twice the gradient of Σ wᵢ J_F(θ, θᵢ).
pub fn barycenter_stationarity(gen: &Generator, theta: &Point, thetas: &[Point], w: &WeightVector) -> Result<f64> {
    let mids: Vec<Point> = thetas.iter().map(|t| (theta + t) * 0.5).collect();
    let grads = mids.iter().map(|m| gen.grad(m)).collect::<Result<Vec<_>>>()?;
    Ok((gen.grad(theta)? - linalg::weighted_sum(&grads, w.as_slice())).norm())
}

/// Fixed-point iteration θ ← M_∇F((θ + θ₁)/2, …, (θ + θₙ)/2; w) started at the
/// arithmetic mean, stopping on first-order stationarity of Σ wᵢ J_F(θ, θᵢ).
///
/// Exhausting `max_iter` yields a trace with `converged = false`.
pub fn jensen_barycenter(
    gen: &Generator,
    thetas: &[Point],
    w: &WeightVector,
    tol: f64,
    max_iter: usize,
) -> Result<BarycenterTrace> {
    if thetas.is_empty() {
        return Err(Error::InvalidSpec("barycenter of an empty set".into()));
    }
    if thetas.len() != w.len() {
        return Err(Error::LengthMismatch {
            what: "points vs weights",
            expected: w.len(),
            got: thetas.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
    }
    for (i, t) in thetas.iter().enumerate() {
        gen.require_primal(t, &format!("barycenter point {i}"))?;
    }
    let mut theta = linalg::weighted_sum(thetas, w.as_slice());
    let mut trace = BarycenterTrace {
        residuals: vec![barycenter_stationarity(gen, &theta, thetas, w)?],
        iterates: vec![theta.clone()],
        converged: false,
    };
    for iteration in 1..=max_iter {
        if trace.residual() <= tol {
            trace.converged = true;
            return Ok(trace);
        }
        let mids: Vec<Point> = thetas.iter().map(|t| (&theta + t) * 0.5).collect();
        theta = qaa(gen, &mids, w).map_err(|e| match e {
            Error::DomainViolation { detail, .. } | Error::DualDomainViolation { detail, .. } => {
                Error::DomainEscape { iteration, detail }
            }
            other => other,
        })?;
        if !gen.domain_contains(&theta) {
            return Err(Error::DomainEscape {
                iteration,
                detail: "iterate left the primal domain".into(),
            });
        }
        log::debug!("barycenter iteration {iteration}: residual {:e}", trace.residual());
        trace.residuals.push(barycenter_stationarity(gen, &theta, thetas, w)?);
        trace.iterates.push(theta.clone());
    }
    trace.converged = trace.residual() <= tol;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{bregman, jensen};
    use crate::generators::GeneratorSpec;
    use crate::linalg::{from_matrix, to_matrix};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, DVector};

    fn v(xs: &[f64]) -> Point {
        DVector::from_column_slice(xs)
    }

    fn identity(dim: usize) -> Generator {
        let q = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        GeneratorSpec::Quadratic { q, c: vec![0.0; dim], kappa: 0.0 }.build().unwrap()
    }

    fn lse(dim: usize) -> Generator {
        GeneratorSpec::Lse0 { dim }.build().unwrap()
    }

    fn nld() -> Generator {
        GeneratorSpec::NegLogDet { dim: 2 }.build().unwrap()
    }

    fn spd(a: f64, b: f64, c: f64) -> Point {
        from_matrix(&DMatrix::from_row_slice(2, 2, &[a, b, b, c]))
    }

    fn harmonic(p: &Point, q: &Point) -> DMatrix<f64> {
        let pi = to_matrix(p, 2).try_inverse().unwrap();
        let qi = to_matrix(q, 2).try_inverse().unwrap();
        ((pi + qi) * 0.5).try_inverse().unwrap()
    }

    #[test]
    fn lift_examples() {
        let t = v(&[0.3, -2.0]);
        let p = lift_point(&identity(2), &t).unwrap();
        assert_eq!(p.eta, t);
        let p = lift_point(&lse(1), &v(&[0.0])).unwrap();
        assert_abs_diff_eq!(p.eta[0], 0.5, epsilon = 1e-15);
        let p = lift_point(&nld(), &spd(2.0, 0.0, 4.0)).unwrap();
        assert_abs_diff_eq!(p.eta[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eta[3], -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eta[1], 0.0, epsilon = 1e-15);
        assert!(lift_point(&nld(), &spd(-1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn geodesic_endpoints_and_midpoints() {
        let g = lse(1);
        let p = lift_point(&g, &v(&[-2.0])).unwrap();
        let q = lift_point(&g, &v(&[2.0])).unwrap();
        for f in [primal_geodesic_point, dual_geodesic_point] {
            assert_eq!(f(&g, &p, &q, 0.0).unwrap(), p);
            assert_eq!(f(&g, &p, &q, 1.0).unwrap(), q);
            let m = f(&g, &p, &q, 0.5).unwrap();
            assert_abs_diff_eq!(m.theta[0], 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(m.eta[0], 0.5, epsilon = 1e-14);
            assert!(m.chart_defect(&g).unwrap() < 1e-12);
        }
        assert!(primal_geodesic_point(&g, &p, &q, 1.5).is_err());

        let id = identity(2);
        let p = lift_point(&id, &v(&[0.0, 2.0])).unwrap();
        let q = lift_point(&id, &v(&[4.0, -2.0])).unwrap();
        let m = primal_geodesic_point(&id, &p, &q, 0.5).unwrap();
        assert_eq!(m.theta, v(&[2.0, 0.0]));
        assert_eq!(m.eta, v(&[2.0, 0.0]));
    }

    #[test]
    fn neg_log_det_dual_midpoint_is_harmonic_mean() {
        let g = nld();
        let (a, b) = (spd(2.0, 0.3, 1.0), spd(0.5, -0.2, 3.0));
        let p = lift_point(&g, &a).unwrap();
        let q = lift_point(&g, &b).unwrap();
        let m = dual_geodesic_point(&g, &p, &q, 0.5).unwrap();
        assert!((to_matrix(&m.theta, 2) - harmonic(&a, &b)).amax() < 1e-12);
        let m = primal_geodesic_point(&g, &p, &q, 0.5).unwrap();
        assert!((&m.theta - (&a + &b) * 0.5).amax() < 1e-15);
        assert!(m.chart_defect(&g).unwrap() < 1e-9);
    }

    #[test]
    fn geodesic_reversal() {
        let g = lse(2);
        let p = lift_point(&g, &v(&[0.4, -1.0])).unwrap();
        let q = lift_point(&g, &v(&[-0.7, 1.5])).unwrap();
        for t in [0.1, 0.35, 0.8] {
            let a = dual_geodesic_point(&g, &p, &q, t).unwrap();
            let b = dual_geodesic_point(&g, &q, &p, 1.0 - t).unwrap();
            assert!((&a.theta - &b.theta).amax() < 1e-12);
            let a = primal_geodesic_point(&g, &p, &q, t).unwrap();
            let b = primal_geodesic_point(&g, &q, &p, 1.0 - t).unwrap();
            assert!((&a.eta - &b.eta).amax() < 1e-12);
        }
    }

    fn objective(g: &Generator, pts: &[Point], w: &[f64], x: &Point, right: bool) -> f64 {
        pts.iter()
            .zip(w)
            .map(|(p, wi)| wi * if right { bregman(g, p, x).unwrap() } else { bregman(g, x, p).unwrap() })
            .sum()
    }

    #[test]
    fn centroids_of_single_point_and_quadratic() {
        let g = lse(2);
        let p = lift_point(&g, &v(&[0.3, 0.1])).unwrap();
        let w = WeightVector::uniform(1).unwrap();
        assert!((right_centroid(&g, std::slice::from_ref(&p), &w).unwrap().theta - &p.theta).amax() < 1e-12);
        assert!((left_centroid(&g, std::slice::from_ref(&p), &w).unwrap().theta - &p.theta).amax() < 1e-12);

        let id = identity(2);
        let pts = [lift_point(&id, &v(&[0.0, 1.0])).unwrap(), lift_point(&id, &v(&[2.0, 3.0])).unwrap()];
        let w = WeightVector::uniform(2).unwrap();
        let r = right_centroid(&id, &pts, &w).unwrap();
        let l = left_centroid(&id, &pts, &w).unwrap();
        assert_eq!(r.theta, v(&[1.0, 2.0]));
        assert!((&r.theta - &l.theta).amax() < 1e-15);
    }

    #[test]
    fn right_centroid_stationarity() {
        let g = lse(2);
        let thetas = [v(&[0.2, -0.5]), v(&[1.1, 0.3]), v(&[-0.8, 0.9])];
        let pts: Vec<DfsPoint> = thetas.iter().map(|t| lift_point(&g, t).unwrap()).collect();
        let w = WeightVector::uniform(3).unwrap();
        let c = right_centroid(&g, &pts, &w).unwrap();
        let etas: Vec<Point> = pts.iter().map(|p| p.eta.clone()).collect();
        assert!((dual_qaa(&g, &etas, &w).unwrap() - &c.eta).amax() < 1e-12);
        assert!(c.chart_defect(&g).unwrap() < 1e-12);
        let h = 1e-5;
        let mut grad = DVector::zeros(2);
        for k in 0..2 {
            let mut e = DVector::zeros(2);
            e[k] = h;
            grad[k] = (objective(&g, &thetas, w.as_slice(), &(&c.theta + &e), true)
                - objective(&g, &thetas, w.as_slice(), &(&c.theta - &e), true))
                / (2.0 * h);
        }
        assert!(grad.norm() < 1e-7, "{grad}");
    }

    #[test]
    fn left_centroid_matches_grid_minimizer() {
        let g = lse(2);
        let thetas = [v(&[0.2, -0.5]), v(&[1.1, 0.3]), v(&[-0.8, 0.9])];
        let pts: Vec<DfsPoint> = thetas.iter().map(|t| lift_point(&g, t).unwrap()).collect();
        let w = WeightVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let c = left_centroid(&g, &pts, &w).unwrap();
        // dense grid, then repeatedly shrink a local grid around the best node
        let (mut cx, mut cy, mut half) = (0.0, 0.0, 2.0);
        for _ in 0..30 {
            let mut best = (f64::INFINITY, cx, cy);
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = cx - half + 2.0 * half * i as f64 / 20.0;
                    let y = cy - half + 2.0 * half * j as f64 / 20.0;
                    let o = objective(&g, &thetas, w.as_slice(), &v(&[x, y]), false);
                    if o < best.0 {
                        best = (o, x, y);
                    }
                }
            }
            (cx, cy) = (best.1, best.2);
            half *= 0.5;
        }
        assert!((c.theta[0] - cx).abs() < 1e-4 && (c.theta[1] - cy).abs() < 1e-4);
        let etas: Vec<Point> = pts.iter().map(|p| p.eta.clone()).collect();
        assert!((linalg::weighted_sum(&etas, w.as_slice()) - &c.eta).amax() < 1e-15);
        assert!(c.chart_defect(&g).unwrap() < 1e-9);
    }

    #[test]
    fn neg_log_det_left_centroid_is_harmonic_mean() {
        let g = nld();
        let (a, b) = (spd(3.0, 1.0, 2.0), spd(1.0, 0.0, 0.25));
        let pts = [lift_point(&g, &a).unwrap(), lift_point(&g, &b).unwrap()];
        let c = left_centroid(&g, &pts, &WeightVector::uniform(2).unwrap()).unwrap();
        assert!((to_matrix(&c.theta, 2) - harmonic(&a, &b)).amax() < 1e-12);
    }

    #[test]
    fn barycenter_trivial_cases() {
        let g = lse(2);
        let t = v(&[0.5, -0.1]);
        let tr = jensen_barycenter(&g, &[t.clone(), t.clone()], &WeightVector::uniform(2).unwrap(), 1e-10, 200).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.iterations(), 0);
        assert!((tr.point() - &t).amax() < 1e-15);

        let id = identity(2);
        let thetas = [v(&[0.0, 1.0]), v(&[3.0, -1.0]), v(&[1.0, 1.0])];
        let tr = jensen_barycenter(&id, &thetas, &WeightVector::uniform(3).unwrap(), 1e-12, 200).unwrap();
        assert!(tr.converged);
        assert_eq!(tr.iterations(), 0);
        assert!((tr.point() - v(&[4.0 / 3.0, 1.0 / 3.0])).amax() < 1e-15);
    }

    #[test]
    fn barycenter_matches_golden_section() {
        let g = lse(1);
        let thetas = [v(&[-1.0]), v(&[2.0])];
        let w = WeightVector::uniform(2).unwrap();
        let tr = jensen_barycenter(&g, &thetas, &w, 1e-10, 200).unwrap();
        assert!(tr.converged);
        assert!(tr.residual() <= 1e-10);
        let obj = |x: f64| -> f64 {
            thetas.iter().map(|t| 0.5 * jensen(&g, &v(&[x]), t).unwrap()).sum()
        };
        let (mut lo, mut hi) = (-1.0_f64, 2.0_f64);
        let r = (5.0_f64.sqrt() - 1.0) / 2.0;
        for _ in 0..100 {
            let a = hi - r * (hi - lo);
            let b = lo + r * (hi - lo);
            if obj(a) < obj(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        assert!((tr.point()[0] - 0.5 * (lo + hi)).abs() < 1e-6);
    }

    #[test]
    fn barycenter_reports_non_convergence() {
        let g = lse(2);
        let thetas = [v(&[-3.0, 0.0]), v(&[2.0, 1.0])];
        let tr = jensen_barycenter(&g, &thetas, &WeightVector::uniform(2).unwrap(), 1e-14, 1).unwrap();
        assert!(!tr.converged);
        assert_eq!(tr.iterates.len(), 2);
        assert!(jensen_barycenter(&g, &thetas, &WeightVector::uniform(2).unwrap(), 0.0, 10).is_err());
    }
}
