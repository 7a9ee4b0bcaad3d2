//! Seeded random instances for the property checks.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::averages::WeightVector;
use crate::generators::{GeneratorSpec, ScalarGenerator};
use crate::linalg::{self, Point};
use crate::mixtures::DiscreteDensity;
use crate::spd::SpdMatrix;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform(rng: &mut SeededRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Orthogonal factor of a QR decomposition of a uniform random matrix.
pub fn random_orthogonal(rng: &mut SeededRng, dim: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    raw.qr().q()
}

/// SPD matrix whose spectrum is log-uniform in [s, s·cond] with the
/// condition number itself drawn log-uniform in [1, max_cond].
pub fn random_spd(rng: &mut SeededRng, dim: usize, max_cond: f64) -> SpdMatrix {
    let scale = log_uniform(rng, 0.5, 2.0);
    let cond = if max_cond > 1.0 { log_uniform(rng, 1.0, max_cond) } else { 1.0 };
    let mut spectrum: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
    // pin the extremes so the requested condition number is attained
    spectrum[0] = 0.0;
    if dim > 1 {
        spectrum[dim - 1] = 1.0;
    }
    let d = DVector::from_iterator(dim, spectrum.iter().map(|u| scale * cond.powf(*u)));
    let u = random_orthogonal(rng, dim);
    SpdMatrix::new(linalg::symmetrize(&(&u * DMatrix::from_diagonal(&d) * u.transpose())))
        .expect("spectrum is positive and bounded")
}

pub fn random_symmetric(rng: &mut SeededRng, dim: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-2.0..2.0));
    linalg::symmetrize(&raw)
}

/// Density with entries proportional to uniform draws in [floor, 1].
pub fn random_density(rng: &mut SeededRng, m: usize, floor: f64) -> DiscreteDensity {
    let masses: Vec<f64> = (0..m).map(|_| rng.gen_range(floor..1.0)).collect();
    DiscreteDensity::normalized(&masses).expect("positive masses")
}

pub fn random_weights(rng: &mut SeededRng, n: usize) -> WeightVector {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    // absorb rounding in the last weight so the sum is one to machine precision
    let head: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - head;
    WeightVector::open(w).expect("weights are positive and sum to one")
}

/// Interior point of the open simplex {θ > 0, Σθ < 1} in dimension n.
pub fn random_simplex_parameter(rng: &mut SeededRng, n: usize) -> Point {
    let raw: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    DVector::from_iterator(n, raw[1..].iter().map(|x| x / total))
}

/// One instance of each concrete generator family, drawn at random where the
/// family has free parameters.
pub fn generator_zoo(rng: &mut SeededRng) -> Vec<GeneratorSpec> {
    let q = random_spd(rng, 3, 20.0);
    let qm = q.matrix();
    let mix_support = 5;
    let densities = (0..3)
        .map(|_| random_density(rng, mix_support, 0.05).probs().to_vec())
        .collect();
    vec![
        GeneratorSpec::Power { p: rng.gen_range(-1.5..1.5), dim: 3 },
        GeneratorSpec::Separable {
            axes: vec![
                ScalarGenerator::Power { p: 0.0 },
                ScalarGenerator::Lse,
                ScalarGenerator::Power { p: -1.0 },
                ScalarGenerator::Power { p: 2.0 },
            ],
        },
        GeneratorSpec::Lse0 { dim: 3 },
        GeneratorSpec::Quadratic {
            q: (0..3).map(|i| (0..3).map(|j| qm[(i, j)]).collect()).collect(),
            c: (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            kappa: rng.gen_range(-1.0..1.0),
        },
        GeneratorSpec::NegLogDet { dim: 3 },
        GeneratorSpec::HalfTraceSquare { dim: 3 },
        GeneratorSpec::MixtureNegentropy { densities },
    ]
}

/// Random interior point of the primal domain described by `spec`.
pub fn random_point(rng: &mut SeededRng, spec: &GeneratorSpec) -> Point {
    match spec {
        GeneratorSpec::Power { dim, .. } => DVector::from_fn(*dim, |_, _| log_uniform(rng, 0.2, 5.0)),
        GeneratorSpec::Separable { axes } => DVector::from_iterator(
            axes.len(),
            axes.iter().map(|a| match a {
                ScalarGenerator::Power { .. } => log_uniform(rng, 0.2, 5.0),
                ScalarGenerator::Lse => rng.gen_range(-3.0..3.0),
            }),
        ),
        GeneratorSpec::Lse0 { dim } => DVector::from_fn(*dim, |_, _| rng.gen_range(-4.0..4.0)),
        GeneratorSpec::Quadratic { c, .. } => DVector::from_fn(c.len(), |_, _| rng.gen_range(-3.0..3.0)),
        GeneratorSpec::NegLogDet { dim } => linalg::from_matrix(random_spd(rng, *dim, 100.0).matrix()),
        GeneratorSpec::HalfTraceSquare { dim } => linalg::from_matrix(&random_symmetric(rng, *dim)),
        GeneratorSpec::MixtureNegentropy { densities } => random_simplex_parameter(rng, densities.len() - 1),
    }
}

/// Random invertible A with singular values in [0.5, 2], offsets b, c, a
/// constant d and a scale λ in [0.5, 2].
pub struct AffineDraw {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
    pub lambda: f64,
}

pub fn random_affine(rng: &mut SeededRng, dim: usize) -> AffineDraw {
    let u = random_orthogonal(rng, dim);
    let v = random_orthogonal(rng, dim);
    let s = DVector::from_fn(dim, |_, _| log_uniform(rng, 0.5, 2.0));
    AffineDraw {
        a: &u * DMatrix::from_diagonal(&s) * v.transpose(),
        b: DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)),
        c: DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)),
        d: rng.gen_range(-1.0..1.0),
        lambda: log_uniform(rng, 0.5, 2.0),
    }
}
