//! Seeded property suites behind `qam check`.

use clap::ValueEnum;
use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use crate::averages::{qaa, ScalarMeanSpec};
use crate::divergences::{bregman, jensen_diversity};
use crate::dually_flat::jensen_barycenter;
use crate::error::Result;
use crate::generators::{
    affine_reparam, comonotonicity_gap, conjugate, fd_gradient_error, inverse_residual, young_residual,
    GeneratorSpec,
};
use crate::linalg::{self, Point};
use crate::mixtures::geodesic::{alpha_geodesic, AlphaGeodesicConfig, GeodesicSolver, DEFAULT_GRID};
use crate::mixtures::{
    categorical_density, cauchy_closure_check, mixture_family_jsd_identity, qamix_with_normalizer,
    shannon_entropy,
};
use crate::sampling::{self, SeededRng};
use crate::spd::{ahm_geometric, convergence_order, gap_floor, spd_geometric_closed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Generators,
    Invariance,
    Convergence,
    Closures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<CheckItem>,
}

#[derive(Default)]
struct Collector {
    items: Vec<CheckItem>,
}

impl Collector {
    fn push(&mut self, name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) {
        let passed = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::AtLeast => measured >= threshold,
            Relation::Above => measured > threshold,
        };
        self.items.push(CheckItem { name: name.into(), measured, relation, threshold, passed });
    }

    /// Records a failed evaluation as a failing item instead of aborting.
    fn record(&mut self, name: &str, relation: Relation, threshold: f64, value: Result<f64>) {
        match value {
            Ok(v) => self.push(name, v, relation, threshold),
            Err(e) => {
                log::warn!("check {name} failed to evaluate: {e}");
                self.push(name, f64::NAN, relation, threshold);
            }
        }
    }
}

pub fn run_suite(suite: Suite) -> CheckReport {
    let mut c = Collector::default();
    match suite {
        Suite::Generators => generators(&mut c, &mut sampling::seeded(1)),
        Suite::Invariance => invariance(&mut c, &mut sampling::seeded(2)),
        Suite::Convergence => convergence(&mut c, &mut sampling::seeded(3)),
        Suite::Closures => closures(&mut c, &mut sampling::seeded(4)),
    }
    CheckReport { suite, passed: c.items.iter().all(|i| i.passed), checks: c.items }
}

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0_f64, |m, v| Ok(m.max(v?)))
}

fn min_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(f64::INFINITY, |m, v| Ok(m.min(v?)))
}

fn generators(c: &mut Collector, rng: &mut SeededRng) {
    for spec in sampling::generator_zoo(rng) {
        let gen = spec.build().expect("zoo specs are valid");
        let pts: Vec<Point> = (0..25).map(|_| sampling::random_point(rng, &spec)).collect();
        let label = gen.label().to_string();
        c.record(&format!("{label}/inverse_residual"), Relation::AtMost, 1e-9, max_of(pts.iter().map(|t| inverse_residual(&gen, t))));
        c.record(&format!("{label}/young_residual"), Relation::AtMost, 1e-9, max_of(pts.iter().map(|t| young_residual(&gen, t))));
        c.record(&format!("{label}/fd_gradient_error"), Relation::AtMost, 1e-5, max_of(pts.iter().map(|t| fd_gradient_error(&gen, t, 1e-6))));
        c.record(
            &format!("{label}/min_comonotonicity"),
            Relation::Above,
            0.0,
            min_of(pts.windows(2).map(|w| comonotonicity_gap(&gen, &w[0], &w[1]))),
        );
    }
}

fn invariance(c: &mut Collector, rng: &mut SeededRng) {
    let mut equivariance = Vec::new();
    let mut reparam = Vec::new();
    let mut shift = Vec::new();
    let mut scaling = Vec::new();
    for k in 0..20 {
        let dim = 1 + k % 4;
        let spec = if k % 2 == 0 {
            GeneratorSpec::Lse0 { dim }
        } else {
            GeneratorSpec::Power { p: rng.gen_range(-1.0..1.0), dim }
        };
        let gen = spec.build().expect("valid spec");
        let draw = sampling::random_affine(rng, dim);
        let n = 3;
        let thetas: Vec<Point> = (0..n).map(|_| sampling::random_point(rng, &spec)).collect();
        let w = sampling::random_weights(rng, n);
        let eval = || -> Result<(f64, f64, f64, f64)> {
            let bar = affine_reparam(&gen, &draw.a, &draw.b, &draw.c, draw.d, draw.lambda)?;
            let moved: Vec<Point> = thetas.iter().map(|t| &draw.a * t + &draw.b).collect();
            let lhs = qaa(&bar, &moved, &w)?;
            let rhs = &draw.a * qaa(&gen, &thetas, &w)? + &draw.b;
            let e1 = linalg::max_abs(&(lhs - rhs));
            let base = bregman(&gen, &thetas[0], &thetas[1])?;
            let e2 = (bregman(&bar, &moved[0], &moved[1])? - draw.lambda * base).abs();
            let eye = nalgebra::DMatrix::identity(dim, dim);
            let zero = DVector::zeros(dim);
            let tilted = affine_reparam(&gen, &eye, &zero, &draw.c, draw.d, 1.0)?;
            let e3 = (bregman(&tilted, &thetas[0], &thetas[1])? - base).abs();
            let scaled = affine_reparam(&gen, &eye, &zero, &zero, 0.0, draw.lambda)?;
            let e4 = (bregman(&scaled, &thetas[0], &thetas[1])? - draw.lambda * base).abs();
            Ok((e1, e2, e3, e4))
        };
        match eval() {
            Ok((e1, e2, e3, e4)) => {
                equivariance.push(Ok(e1));
                reparam.push(Ok(e2));
                shift.push(Ok(e3));
                scaling.push(Ok(e4));
            }
            Err(e) => equivariance.push(Err(e)),
        }
    }
    c.record("affine_equivariance", Relation::AtMost, 1e-8, max_of(equivariance));
    c.record("reparameterization_invariance", Relation::AtMost, 1e-8, max_of(reparam));
    c.record("affine_term_invariance", Relation::AtMost, 1e-10, max_of(shift));
    c.record("scaling_covariance", Relation::AtMost, 1e-10, max_of(scaling));
}

fn convergence(c: &mut Collector, rng: &mut SeededRng) {
    let mut iterations = 0.0_f64;
    let mut rel_err = Vec::new();
    let mut order = f64::INFINITY;
    for k in 0..10 {
        let dim = 2 + k % 7;
        let p = sampling::random_spd(rng, dim, 100.0);
        let q = sampling::random_spd(rng, dim, 100.0);
        let result = ahm_geometric(&p, &q, 1e-12, 60).and_then(|tr| {
            let g = spd_geometric_closed(&p, &q)?;
            Ok((tr, g))
        });
        match result {
            Ok((tr, g)) => {
                iterations = iterations.max(tr.iterations() as f64);
                rel_err.push(Ok((tr.limit.matrix() - g.matrix()).norm() / g.frobenius()));
                if let Some(k) = convergence_order(&tr.gaps, gap_floor(&p, &q)) {
                    order = order.min(k);
                }
            }
            Err(e) => rel_err.push(Err(e)),
        }
    }
    c.push("ahm_max_iterations", iterations, Relation::AtMost, 10.0);
    c.record("ahm_relative_error", Relation::AtMost, 1e-10, max_of(rel_err));
    c.push("ahm_order_estimate", order, Relation::AtLeast, 1.8);

    let mut residuals = Vec::new();
    for dim in [1, 2] {
        for _ in 0..3 {
            let spec = GeneratorSpec::Lse0 { dim };
            let gen = spec.build().expect("valid spec");
            let thetas: Vec<Point> = (0..3).map(|_| sampling::random_point(rng, &spec)).collect();
            let w = sampling::random_weights(rng, 3);
            residuals.push(jensen_barycenter(&gen, &thetas, &w, 1e-10, 200).map(|tr| {
                if tr.converged { tr.residual() } else { f64::INFINITY }
            }));
        }
    }
    c.record("barycenter_residual", Relation::AtMost, 1e-10, max_of(residuals));

    let p = sampling::random_density(rng, 3, 0.05);
    let q = sampling::random_density(rng, 3, 0.05);
    let refinement = (|| -> Result<f64> {
        let cfg = |n| AlphaGeodesicConfig::with_solver(0.0, GeodesicSolver::Bvp { grid_size: n, max_sweeps: 50, tol: 1e-9 });
        let fine = alpha_geodesic(&p, &q, &cfg(DEFAULT_GRID)?)?;
        let coarse = alpha_geodesic(&p, &q, &cfg(DEFAULT_GRID / 2)?)?;
        Ok((&fine.nodes[DEFAULT_GRID / 2] - &coarse.nodes[DEFAULT_GRID / 4]).amax())
    })();
    c.record("geodesic_refinement_change", Relation::AtMost, 1e-6, refinement);
}

fn closures(c: &mut Collector, rng: &mut SeededRng) {
    let cauchy = (0..5).map(|_| {
        let s1 = rng.gen_range(0.1f64.ln()..10f64.ln()).exp();
        let s2 = rng.gen_range(0.1f64.ln()..10f64.ln()).exp();
        cauchy_closure_check(s1, s2, 2001).map(|r| r.sup_error)
    });
    let cauchy: Vec<Result<f64>> = cauchy.collect();
    c.record("cauchy_quadrature_residual", Relation::AtMost, 1e-6, max_of(cauchy));

    let mut density_err = Vec::new();
    let mut normalizer_err = Vec::new();
    let mut entropy_err = Vec::new();
    for k in 0..10 {
        let dim = 1 + k % 4;
        let n = 2 + k % 3;
        let spec = GeneratorSpec::Lse0 { dim };
        let gen = spec.build().expect("valid spec");
        let thetas: Vec<Point> = (0..n).map(|_| sampling::random_point(rng, &spec)).collect();
        let w = sampling::random_weights(rng, n);
        let eval = || -> Result<(f64, f64, f64)> {
            let dens = thetas.iter().map(categorical_density).collect::<Result<Vec<_>>>()?;
            let mix = qamix_with_normalizer(&ScalarMeanSpec::geometric(), &dens, &w)?;
            let target = categorical_density(&linalg::weighted_sum(&thetas, w.as_slice()))?;
            let e1 = mix
                .density
                .probs()
                .iter()
                .zip(target.probs())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let e2 = (mix.normalizer - (-jensen_diversity(&gen, &thetas, &w)?).exp()).abs();
            let eta = gen.grad(&thetas[0])?;
            let e3 = (shannon_entropy(&dens[0]) + conjugate(&gen, &eta)?).abs();
            Ok((e1, e2, e3))
        };
        match eval() {
            Ok((e1, e2, e3)) => {
                density_err.push(Ok(e1));
                normalizer_err.push(Ok(e2));
                entropy_err.push(Ok(e3));
            }
            Err(e) => density_err.push(Err(e)),
        }
    }
    c.record("exponential_family_density", Relation::AtMost, 1e-10, max_of(density_err));
    c.record("exponential_family_normalizer", Relation::AtMost, 1e-9, max_of(normalizer_err));
    c.record("entropy_conjugate_identity", Relation::AtMost, 1e-9, max_of(entropy_err));

    let mut identity = Vec::new();
    for k in 0..10 {
        let m = 3 + k % 4;
        let n = 1 + k % (m - 1);
        let densities: Vec<Vec<f64>> = (0..=n).map(|_| sampling::random_density(rng, m, 0.05).probs().to_vec()).collect();
        let spec = GeneratorSpec::MixtureNegentropy { densities };
        identity.push(spec.build().and_then(|gen| {
            let t1 = sampling::random_point(rng, &spec);
            let t2 = sampling::random_point(rng, &spec);
            let (a, b) = mixture_family_jsd_identity(&gen, &t1, &t2)?;
            Ok((a - b).abs())
        }));
    }
    c.record("mixture_family_jsd_identity", Relation::AtMost, 1e-9, max_of(identity));
}
