//! Legendre-type generators: a convex potential F together with its gradient
//! map ∇F : Θ → H, the reciprocal map ∇F⁻¹ = ∇F* : H → Θ and, when known,
//! the closed-form convex conjugate F*.
//!
//! | variant | F(θ) | ∇F(θ) | ∇F⁻¹(η) |
//! |---|---|---|---|
//! | `power(p)` | Σ φ_p(θᵢ), φ_p' = f_p | f_p(θᵢ) = (θᵢᵖ − 1)/p | (1 + pηᵢ)^{1/p} |
//! | `lse0` | log(1 + Σ e^{θᵢ}) | softmax without the reference class | log(ηᵢ / (1 − Σ η)) |
//! | `quadratic` | ½θᵀQθ + cᵀθ + κ | Qθ + c | Q⁻¹(η − c) |
//! | `neg_log_det` | −log det θ | −θ⁻¹ | −η⁻¹ |
//! | `half_trace_square` | ½ tr(θ²) | θ | η |
//! | `mixture_negentropy` | Σₓ m_θ log m_θ | Σₓ (pᵢ − p₀)(1 + log m_θ) | damped Newton |

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, compensated_sum, dot, Point};

/// Strict interior margin used by domain predicates.
pub const INTERIOR_MARGIN: f64 = 1e-12;

/// Symmetry tolerance (relative) accepted for matrix-valued points.
pub const SYMMETRY_TOL: f64 = 1e-10;

const POWER_BRANCH_EPS: f64 = 1e-8;

/// Newton controls for the mixture-negentropy gradient inverse.
const NEWTON_STEP_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 100;

/// Shape of the points a generator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointKind {
    Vector { dim: usize },
    SymMatrix { dim: usize },
}

impl PointKind {
    /// Number of stored coordinates (d or d²).
    pub fn len(&self) -> usize {
        match *self {
            PointKind::Vector { dim } => dim,
            PointKind::SymMatrix { dim } => dim * dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, PointKind::SymMatrix { .. })
    }
}

/// A strictly increasing scalar map f = φ' used either as a quasi-arithmetic
/// mean generator or as one axis of a separable potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ScalarGenerator {
    /// f_p(t) = (tᵖ − 1)/p, and log t at p = 0.
    Power { p: f64 },
    /// f(t) = eᵗ.
    Lse,
}

impl ScalarGenerator {
    fn power_is_log(p: f64) -> bool {
        p.abs() < POWER_BRANCH_EPS
    }

    /// Open domain of f (and of the potential φ).
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            ScalarGenerator::Power { .. } => x.is_finite() && x > 0.0,
            ScalarGenerator::Lse => x.is_finite(),
        }
    }

    /// Open image of f.
    pub fn image_contains(&self, y: f64) -> bool {
        if !y.is_finite() {
            return false;
        }
        match *self {
            ScalarGenerator::Power { p } if Self::power_is_log(p) => true,
            ScalarGenerator::Power { p } => 1.0 + p * y > 0.0,
            ScalarGenerator::Lse => y > 0.0,
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        match *self {
            ScalarGenerator::Power { p } if Self::power_is_log(p) => x.ln(),
            ScalarGenerator::Power { p } => (p * x.ln()).exp_m1() / p,
            ScalarGenerator::Lse => x.exp(),
        }
    }

    pub fn f_inv(&self, y: f64) -> f64 {
        match *self {
            ScalarGenerator::Power { p } if Self::power_is_log(p) => y.exp(),
            ScalarGenerator::Power { p } => ((p * y).ln_1p() / p).exp(),
            ScalarGenerator::Lse => y.ln(),
        }
    }

    /// Potential φ with φ' = f (defined up to an additive constant).
    pub fn potential(&self, x: f64) -> f64 {
        match *self {
            ScalarGenerator::Power { p } if Self::power_is_log(p) => x * x.ln() - x,
            ScalarGenerator::Power { p } if (p + 1.0).abs() < POWER_BRANCH_EPS => x - x.ln(),
            ScalarGenerator::Power { p } if p > -0.5 => {
                x * ((p * x.ln()).exp_m1() - p) / (p * (p + 1.0))
            }
            ScalarGenerator::Power { p } => {
                ((p + 1.0) * x.ln()).exp_m1() / (p * (p + 1.0)) - x / p
            }
            ScalarGenerator::Lse => x.exp(),
        }
    }

    /// Closed-form conjugate φ*, when one is implemented.
    pub fn conjugate(&self, y: f64) -> Option<f64> {
        match *self {
            ScalarGenerator::Lse => Some(y * y.ln() - y),
            ScalarGenerator::Power { .. } => None,
        }
    }
}

/// Serializable description of a concrete generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Power {
        p: f64,
        dim: usize,
    },
    Separable {
        axes: Vec<ScalarGenerator>,
    },
    Lse0 {
        dim: usize,
    },
    Quadratic {
        q: Vec<Vec<f64>>,
        c: Vec<f64>,
        #[serde(default)]
        kappa: f64,
    },
    NegLogDet {
        dim: usize,
    },
    HalfTraceSquare {
        dim: usize,
    },
    MixtureNegentropy {
        densities: Vec<Vec<f64>>,
    },
}

/// The finite-support mixture family m_θ = p₀ + Σᵢ θᵢ (pᵢ − p₀).
#[derive(Debug, Clone)]
pub(crate) struct MixtureFamily {
    /// Row i holds pᵢ, i = 0..=n.
    bases: DMatrix<f64>,
    /// Row i holds pᵢ₊₁ − p₀.
    diffs: DMatrix<f64>,
}

impl MixtureFamily {
    fn n_params(&self) -> usize {
        self.diffs.nrows()
    }

    fn density(&self, theta: &Point) -> DVector<f64> {
        let m = self.bases.ncols();
        DVector::from_iterator(
            m,
            (0..m).map(|x| {
                let mut acc = linalg::CompensatedSum::new();
                acc.add(self.bases[(0, x)]);
                for i in 0..self.n_params() {
                    acc.add(theta[i] * self.diffs[(i, x)]);
                }
                acc.value()
            }),
        )
    }

    fn in_simplex(&self, theta: &Point) -> bool {
        theta.len() == self.n_params()
            && theta.iter().all(|t| t.is_finite() && *t > INTERIOR_MARGIN)
            && 1.0 - compensated_sum(theta.iter().copied()) > INTERIOR_MARGIN
    }

    fn negentropy(&self, theta: &Point) -> f64 {
        compensated_sum(self.density(theta).iter().map(|&m| m * m.ln()))
    }

    fn gradient(&self, theta: &Point) -> Point {
        let dens = self.density(theta);
        let n = self.n_params();
        DVector::from_iterator(
            n,
            (0..n).map(|i| {
                compensated_sum(
                    dens.iter()
                        .enumerate()
                        .map(|(x, &m)| self.diffs[(i, x)] * (1.0 + m.ln())),
                )
            }),
        )
    }

    fn hessian(&self, theta: &Point) -> DMatrix<f64> {
        let dens = self.density(theta);
        let n = self.n_params();
        DMatrix::from_fn(n, n, |i, j| {
            compensated_sum(
                dens.iter()
                    .enumerate()
                    .map(|(x, &m)| self.diffs[(i, x)] * self.diffs[(j, x)] / m),
            )
        })
    }

    /// Solves ∇F(θ) = η by damped Newton on the convex objective F(θ) − ⟨θ, η⟩,
    /// starting from uniform weights.
    fn gradient_inverse(&self, eta: &Point) -> Result<Point> {
        let n = self.n_params();
        let objective = |t: &Point| self.negentropy(t) - dot(t, eta);
        let mut theta = DVector::from_element(n, 1.0 / (n as f64 + 1.0));
        let mut value = objective(&theta);
        let mut residual = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let r = self.gradient(&theta) - eta;
            residual = linalg::max_abs(&r);
            let hess = self.hessian(&theta);
            let step = hess
                .cholesky()
                .ok_or_else(|| Error::Singular("mixture-negentropy Hessian".into()))?
                .solve(&(-&r));
            let mut scale = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = &theta + &step * scale;
                if self.in_simplex(&trial) {
                    let v = objective(&trial);
                    // Tolerate round-off once the quadratic model is tiny.
                    if v <= value + 1e-14 * (1.0 + value.abs()) {
                        accepted = Some((trial, v));
                        break;
                    }
                }
                scale *= 0.5;
            }
            let Some((next, v)) = accepted else {
                return Err(Error::dual_domain(
                    "gradient-inverse target",
                    format!("Newton iterate pinned to the simplex boundary (residual {residual:e})"),
                ));
            };
            let moved = linalg::max_abs(&(&next - &theta));
            theta = next;
            value = v;
            if moved <= NEWTON_STEP_TOL {
                let r = self.gradient(&theta) - eta;
                if linalg::max_abs(&r) <= 1e-9 {
                    return Ok(theta);
                }
                return Err(Error::dual_domain(
                    "gradient-inverse target",
                    format!("Newton stalled with residual {:e}", linalg::max_abs(&r)),
                ));
            }
        }
        Err(Error::NonConvergence {
            iterations: NEWTON_MAX_ITER,
            residual,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AffineParts {
    pub(crate) base: Generator,
    pub(crate) a: DMatrix<f64>,
    pub(crate) a_inv: DMatrix<f64>,
    pub(crate) b: DVector<f64>,
    pub(crate) c: DVector<f64>,
    pub(crate) d: f64,
    pub(crate) lambda: f64,
}

impl AffineParts {
    fn pull_back(&self, theta: &Point) -> Point {
        &self.a_inv * (theta - &self.b)
    }

    fn dual_pull_back(&self, eta: &Point) -> Point {
        self.a.transpose() * eta / self.lambda - &self.c
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Repr {
    Separable(Vec<ScalarGenerator>),
    Lse0,
    Quadratic {
        q: DMatrix<f64>,
        q_inv: DMatrix<f64>,
        c: DVector<f64>,
        kappa: f64,
    },
    NegLogDet,
    HalfTraceSquare,
    MixtureNegentropy(MixtureFamily),
    Affine(Box<AffineParts>),
}

/// An immutable Legendre-type generator bundle.
#[derive(Debug, Clone)]
pub struct Generator {
    label: String,
    kind: PointKind,
    pub(crate) repr: Repr,
}

impl Generator {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn point_kind(&self) -> PointKind {
        self.kind
    }

    /// Number of stored coordinates of a point.
    pub fn dim(&self) -> usize {
        self.kind.len()
    }

    fn matrix_dim(&self) -> usize {
        match self.kind {
            PointKind::SymMatrix { dim } | PointKind::Vector { dim } => dim,
        }
    }

    /// Θ membership.
    pub fn domain_contains(&self, theta: &Point) -> bool {
        if theta.len() != self.dim() || theta.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match &self.repr {
            Repr::Separable(axes) => axes.iter().zip(theta.iter()).all(|(g, &x)| g.contains(x)),
            Repr::Lse0 | Repr::Quadratic { .. } => true,
            Repr::NegLogDet => {
                let m = linalg::to_matrix(theta, self.matrix_dim());
                linalg::asymmetry(&m) <= SYMMETRY_TOL
                    && linalg::smallest_eigenvalue(&m) > INTERIOR_MARGIN
            }
            Repr::HalfTraceSquare => {
                linalg::asymmetry(&linalg::to_matrix(theta, self.matrix_dim())) <= SYMMETRY_TOL
            }
            Repr::MixtureNegentropy(fam) => fam.in_simplex(theta),
            Repr::Affine(parts) => parts.base.domain_contains(&parts.pull_back(theta)),
        }
    }

    /// H membership (image of ∇F).
    pub fn dual_domain_contains(&self, eta: &Point) -> bool {
        if eta.len() != self.dim() || eta.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match &self.repr {
            Repr::Separable(axes) => axes
                .iter()
                .zip(eta.iter())
                .all(|(g, &y)| g.image_contains(y)),
            Repr::Lse0 => {
                eta.iter().all(|&y| y > 0.0) && 1.0 - compensated_sum(eta.iter().copied()) > 0.0
            }
            Repr::Quadratic { .. } => true,
            Repr::NegLogDet => {
                let m = -linalg::to_matrix(eta, self.matrix_dim());
                linalg::asymmetry(&m) <= SYMMETRY_TOL
                    && linalg::smallest_eigenvalue(&m) > INTERIOR_MARGIN
            }
            Repr::HalfTraceSquare => {
                linalg::asymmetry(&linalg::to_matrix(eta, self.matrix_dim())) <= SYMMETRY_TOL
            }
            Repr::MixtureNegentropy(fam) => fam.gradient_inverse(eta).is_ok(),
            Repr::Affine(parts) => parts
                .base
                .dual_domain_contains(&parts.dual_pull_back(eta)),
        }
    }

    pub(crate) fn require_primal(&self, theta: &Point, what: &str) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::LengthMismatch {
                what: "point coordinates",
                expected: self.dim(),
                got: theta.len(),
            });
        }
        if self.domain_contains(theta) {
            Ok(())
        } else {
            Err(Error::domain(what, format!("not in the domain of `{}`", self.label)))
        }
    }

    pub(crate) fn require_dual(&self, eta: &Point, what: &str) -> Result<()> {
        if eta.len() != self.dim() {
            return Err(Error::LengthMismatch {
                what: "point coordinates",
                expected: self.dim(),
                got: eta.len(),
            });
        }
        // The mixture family has no cheap image test; its inverse reports it.
        if matches!(self.repr, Repr::MixtureNegentropy(_)) || self.dual_domain_contains(eta) {
            Ok(())
        } else {
            Err(Error::dual_domain(
                what,
                format!("not in the gradient image of `{}`", self.label),
            ))
        }
    }

    /// The potential F.
    pub fn f_eval(&self, theta: &Point) -> Result<f64> {
        self.require_primal(theta, "argument of F")?;
        Ok(self.f_unchecked(theta))
    }

    pub(crate) fn f_unchecked(&self, theta: &Point) -> f64 {
        match &self.repr {
            Repr::Separable(axes) => {
                compensated_sum(axes.iter().zip(theta.iter()).map(|(g, &x)| g.potential(x)))
            }
            Repr::Lse0 => {
                let shift = theta.iter().cloned().fold(0.0_f64, f64::max);
                let z = (-shift).exp()
                    + compensated_sum(theta.iter().map(|&t| (t - shift).exp()));
                shift + z.ln()
            }
            Repr::Quadratic { q, c, kappa, .. } => 0.5 * dot(theta, &(q * theta)) + dot(c, theta) + kappa,
            Repr::NegLogDet => {
                let m = linalg::to_matrix(theta, self.matrix_dim());
                let (vals, _) = linalg::sym_eigen(&m);
                -compensated_sum(vals.iter().map(|l| l.ln()))
            }
            Repr::HalfTraceSquare => 0.5 * dot(theta, theta),
            Repr::MixtureNegentropy(fam) => fam.negentropy(theta),
            Repr::Affine(parts) => {
                let u = parts.pull_back(theta);
                parts.lambda * (parts.base.f_unchecked(&u) + dot(&parts.c, &u) + parts.d)
            }
        }
    }

    /// The gradient map ∇F : Θ → H.
    pub fn grad(&self, theta: &Point) -> Result<Point> {
        self.require_primal(theta, "argument of ∇F")?;
        Ok(self.grad_unchecked(theta))
    }

    pub(crate) fn grad_unchecked(&self, theta: &Point) -> Point {
        match &self.repr {
            Repr::Separable(axes) => DVector::from_iterator(
                theta.len(),
                axes.iter().zip(theta.iter()).map(|(g, &x)| g.f(x)),
            ),
            Repr::Lse0 => {
                let shift = theta.iter().cloned().fold(0.0_f64, f64::max);
                let e: Vec<f64> = theta.iter().map(|&t| (t - shift).exp()).collect();
                let z = (-shift).exp() + compensated_sum(e.iter().copied());
                DVector::from_iterator(e.len(), e.into_iter().map(|x| x / z))
            }
            Repr::Quadratic { q, c, .. } => q * theta + c,
            Repr::NegLogDet => {
                let m = linalg::to_matrix(theta, self.matrix_dim());
                linalg::from_matrix(&linalg::sym_fn(&m, |l| -1.0 / l))
            }
            Repr::HalfTraceSquare => theta.clone(),
            Repr::MixtureNegentropy(fam) => fam.gradient(theta),
            Repr::Affine(parts) => {
                let u = parts.pull_back(theta);
                parts.a_inv.transpose() * (parts.base.grad_unchecked(&u) + &parts.c) * parts.lambda
            }
        }
    }

    /// The reciprocal gradient map ∇F⁻¹ = ∇F* : H → Θ.
    pub fn grad_inv(&self, eta: &Point) -> Result<Point> {
        self.require_dual(eta, "argument of ∇F⁻¹")?;
        match &self.repr {
            Repr::Separable(axes) => Ok(DVector::from_iterator(
                eta.len(),
                axes.iter().zip(eta.iter()).map(|(g, &y)| g.f_inv(y)),
            )),
            Repr::Lse0 => {
                let rest = (1.0 - compensated_sum(eta.iter().copied())).ln();
                Ok(eta.map(|y| y.ln() - rest))
            }
            Repr::Quadratic { q_inv, c, .. } => Ok(q_inv * (eta - c)),
            Repr::NegLogDet => {
                let m = linalg::to_matrix(eta, self.matrix_dim());
                Ok(linalg::from_matrix(&linalg::sym_fn(&m, |l| -1.0 / l)))
            }
            Repr::HalfTraceSquare => Ok(linalg::from_matrix(&linalg::symmetrize(
                &linalg::to_matrix(eta, self.matrix_dim()),
            ))),
            Repr::MixtureNegentropy(fam) => fam.gradient_inverse(eta),
            Repr::Affine(parts) => {
                let u = parts.base.grad_inv(&parts.dual_pull_back(eta))?;
                Ok(&parts.a * u + &parts.b)
            }
        }
    }

    /// Closed-form F*(η) when the generator has one.
    pub fn conj_eval(&self, eta: &Point) -> Option<Result<f64>> {
        if !self.has_closed_conjugate() {
            return None;
        }
        Some(
            self.require_dual(eta, "argument of F*")
                .map(|_| self.conj_unchecked(eta).expect("closed form available")),
        )
    }

    pub fn has_closed_conjugate(&self) -> bool {
        match &self.repr {
            Repr::Separable(axes) => axes.iter().all(|g| g.conjugate(1.0).is_some()),
            Repr::Lse0 | Repr::Quadratic { .. } | Repr::NegLogDet | Repr::HalfTraceSquare => true,
            Repr::MixtureNegentropy(_) => false,
            Repr::Affine(parts) => parts.base.has_closed_conjugate(),
        }
    }

    fn conj_unchecked(&self, eta: &Point) -> Option<f64> {
        match &self.repr {
            Repr::Separable(axes) => axes
                .iter()
                .zip(eta.iter())
                .map(|(g, &y)| g.conjugate(y))
                .sum(),
            Repr::Lse0 => {
                let rest = 1.0 - compensated_sum(eta.iter().copied());
                Some(compensated_sum(
                    eta.iter().map(|&y| y * y.ln()).chain(std::iter::once(rest * rest.ln())),
                ))
            }
            Repr::Quadratic { q_inv, c, kappa, .. } => {
                let shifted = eta - c;
                Some(0.5 * dot(&shifted, &(q_inv * &shifted)) - kappa)
            }
            Repr::NegLogDet => {
                let d = self.matrix_dim();
                let (vals, _) = linalg::sym_eigen(&(-linalg::to_matrix(eta, d)));
                Some(-(d as f64) - compensated_sum(vals.iter().map(|l| l.ln())))
            }
            Repr::HalfTraceSquare => Some(0.5 * dot(eta, eta)),
            Repr::MixtureNegentropy(_) => None,
            Repr::Affine(parts) => {
                let zeta = parts.dual_pull_back(eta);
                let inner = parts.base.conj_unchecked(&zeta)?;
                Some(parts.lambda * (inner - parts.d) + dot(&parts.b, eta))
            }
        }
    }

    /// m_θ for a mixture-negentropy generator.
    pub fn mixture_density(&self, theta: &Point) -> Result<DVector<f64>> {
        match &self.repr {
            Repr::MixtureNegentropy(fam) => {
                self.require_primal(theta, "mixture parameter")?;
                Ok(fam.density(theta))
            }
            _ => Err(Error::InvalidSpec(format!(
                "`{}` is not a mixture-negentropy generator",
                self.label
            ))),
        }
    }

    /// Base densities p₀..pₙ of a mixture-negentropy generator.
    pub fn mixture_bases(&self) -> Option<&DMatrix<f64>> {
        match &self.repr {
            Repr::MixtureNegentropy(fam) => Some(&fam.bases),
            _ => None,
        }
    }
}

fn require_positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidSpec("dimension must be positive".into()))
    } else {
        Ok(())
    }
}

fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * max.max(f64::MIN_POSITIVE)).count()
}

fn rows_to_matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::InvalidSpec(format!("{what} is empty")));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::LengthMismatch {
            what: "matrix row",
            expected: ncols,
            got: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Builds a generator bundle from its serializable description.
pub fn build_generator(spec: &GeneratorSpec) -> Result<Generator> {
    match spec {
        GeneratorSpec::Power { p, dim } => {
            require_positive_dim(*dim)?;
            if !p.is_finite() {
                return Err(Error::InvalidSpec("power exponent must be finite".into()));
            }
            Ok(Generator {
                label: "power".into(),
                kind: PointKind::Vector { dim: *dim },
                repr: Repr::Separable(vec![ScalarGenerator::Power { p: *p }; *dim]),
            })
        }
        GeneratorSpec::Separable { axes } => {
            require_positive_dim(axes.len())?;
            if axes
                .iter()
                .any(|a| matches!(a, ScalarGenerator::Power { p } if !p.is_finite()))
            {
                return Err(Error::InvalidSpec("power exponent must be finite".into()));
            }
            Ok(Generator {
                label: "separable".into(),
                kind: PointKind::Vector { dim: axes.len() },
                repr: Repr::Separable(axes.clone()),
            })
        }
        GeneratorSpec::Lse0 { dim } => {
            require_positive_dim(*dim)?;
            Ok(Generator {
                label: "lse0".into(),
                kind: PointKind::Vector { dim: *dim },
                repr: Repr::Lse0,
            })
        }
        GeneratorSpec::Quadratic { q, c, kappa } => {
            let q = rows_to_matrix(q, "Q")?;
            if !q.is_square() {
                return Err(Error::InvalidSpec("Q must be square".into()));
            }
            let d = q.nrows();
            if c.len() != d {
                return Err(Error::LengthMismatch {
                    what: "linear term c",
                    expected: d,
                    got: c.len(),
                });
            }
            if linalg::asymmetry(&q) > SYMMETRY_TOL {
                return Err(Error::NotSpd("Q is not symmetric".into()));
            }
            let q = linalg::symmetrize(&q);
            let (vals, vecs) = linalg::sym_eigen(&q);
            if vals[0] <= INTERIOR_MARGIN {
                return Err(Error::NotSpd(format!("Q has eigenvalue {:e}", vals[0])));
            }
            let q_inv = linalg::spectral_apply(&vals, &vecs, |l| 1.0 / l);
            Ok(Generator {
                label: "quadratic".into(),
                kind: PointKind::Vector { dim: d },
                repr: Repr::Quadratic {
                    q,
                    q_inv,
                    c: DVector::from_column_slice(c),
                    kappa: *kappa,
                },
            })
        }
        GeneratorSpec::NegLogDet { dim } => {
            require_positive_dim(*dim)?;
            Ok(Generator {
                label: "neg_log_det".into(),
                kind: PointKind::SymMatrix { dim: *dim },
                repr: Repr::NegLogDet,
            })
        }
        GeneratorSpec::HalfTraceSquare { dim } => {
            require_positive_dim(*dim)?;
            Ok(Generator {
                label: "half_trace_square".into(),
                kind: PointKind::SymMatrix { dim: *dim },
                repr: Repr::HalfTraceSquare,
            })
        }
        GeneratorSpec::MixtureNegentropy { densities } => {
            if densities.len() < 2 {
                return Err(Error::InvalidSpec(
                    "a mixture family needs at least two base densities".into(),
                ));
            }
            let bases = rows_to_matrix(densities, "base densities")?;
            for (i, row) in densities.iter().enumerate() {
                if let Some(x) = row.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                    return Err(Error::InvalidDensity(format!(
                        "base density {i} has non-positive mass {x}"
                    )));
                }
                let s = compensated_sum(row.iter().copied());
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDensity(format!(
                        "base density {i} sums to {s}"
                    )));
                }
            }
            let n = bases.nrows() - 1;
            let m = bases.ncols();
            let log_ratios = DMatrix::from_fn(n, m, |i, x| (bases[(i + 1, x)] / bases[(0, x)]).ln());
            if rank(&log_ratios, 1e-10) < n {
                return Err(Error::InvalidSpec(
                    "log-ratio vectors log(pᵢ/p₀) are linearly dependent".into(),
                ));
            }
            let diffs = DMatrix::from_fn(n, m, |i, x| bases[(i + 1, x)] - bases[(0, x)]);
            if rank(&diffs, 1e-10) < n {
                return Err(Error::InvalidSpec(
                    "difference vectors pᵢ − p₀ are linearly dependent".into(),
                ));
            }
            Ok(Generator {
                label: "mixture_negentropy".into(),
                kind: PointKind::Vector { dim: n },
                repr: Repr::MixtureNegentropy(MixtureFamily { bases, diffs }),
            })
        }
    }
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<Generator> {
        build_generator(self)
    }
}

/// F*(η) = ⟨∇F⁻¹(η), η⟩ − F(∇F⁻¹(η)).
pub fn legendre_conjugate(gen: &Generator, eta: &Point) -> Result<f64> {
    let theta = gen.grad_inv(eta)?;
    Ok(dot(&theta, eta) - gen.f_unchecked(&theta))
}

/// F* through the closed form when available, the Legendre transform otherwise.
pub fn conjugate(gen: &Generator, eta: &Point) -> Result<f64> {
    match gen.conj_eval(eta) {
        Some(v) => v,
        None => legendre_conjugate(gen, eta),
    }
}

/// Affine Legendre reparameterization
/// F̄(θ̄) = λ (F(A⁻¹(θ̄ − b)) + ⟨c, A⁻¹(θ̄ − b)⟩ + d).
///
/// The induced average satisfies M_{∇F̄}(Aθᵢ + b; w) = A M_{∇F}(θᵢ; w) + b.
pub fn affine_reparam(
    gen: &Generator,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DVector<f64>,
    d: f64,
    lambda: f64,
) -> Result<Generator> {
    let dim = match gen.point_kind() {
        PointKind::Vector { dim } => dim,
        PointKind::SymMatrix { .. } => {
            return Err(Error::InvalidSpec(
                "affine reparameterization is defined for vector generators".into(),
            ))
        }
    };
    if a.shape() != (dim, dim) {
        return Err(Error::LengthMismatch {
            what: "rows of A",
            expected: dim,
            got: a.nrows(),
        });
    }
    for (what, v) in [("offset b", b), ("linear term c", c)] {
        if v.len() != dim {
            return Err(Error::LengthMismatch {
                what,
                expected: dim,
                got: v.len(),
            });
        }
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidSpec(format!("scale λ must be positive, got {lambda}")));
    }
    if !d.is_finite() {
        return Err(Error::InvalidSpec("additive constant must be finite".into()));
    }
    let cond = linalg::condition_number(a);
    if !(cond.is_finite() && cond < 1e12) {
        return Err(Error::Singular(format!("condition number of A is {cond:e}")));
    }
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("A is not invertible".into()))?;
    Ok(Generator {
        label: format!("affine({})", gen.label),
        kind: gen.kind,
        repr: Repr::Affine(Box::new(AffineParts {
            base: gen.clone(),
            a: a.clone(),
            a_inv,
            b: b.clone(),
            c: c.clone(),
            d,
            lambda,
        })),
    })
}

/// Tolerances for the generator identity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Absolute tolerance for algebraic identities.
    pub algebraic: f64,
    /// Relative tolerance for finite-difference comparisons.
    pub finite_difference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-9,
            finite_difference: 1e-5,
        }
    }
}

/// ‖∇F⁻¹(∇F(θ)) − θ‖∞.
pub fn inverse_residual(gen: &Generator, theta: &Point) -> Result<f64> {
    let back = gen.grad_inv(&gen.grad(theta)?)?;
    Ok(linalg::max_abs(&(back - theta)))
}

/// ‖∇F(∇F⁻¹(η)) − η‖∞.
pub fn dual_inverse_residual(gen: &Generator, eta: &Point) -> Result<f64> {
    let back = gen.grad(&gen.grad_inv(eta)?)?;
    Ok(linalg::max_abs(&(back - eta)))
}

/// |F(θ) + F*(η) − ⟨θ, η⟩| at η = ∇F(θ).
pub fn young_residual(gen: &Generator, theta: &Point) -> Result<f64> {
    let eta = gen.grad(theta)?;
    let conj = conjugate(gen, &eta)?;
    Ok((gen.f_unchecked(theta) + conj - dot(theta, &eta)).abs())
}

/// ⟨θ₁ − θ₂, ∇F(θ₁) − ∇F(θ₂)⟩.
pub fn comonotonicity_gap(gen: &Generator, t1: &Point, t2: &Point) -> Result<f64> {
    let g1 = gen.grad(t1)?;
    let g2 = gen.grad(t2)?;
    Ok(dot(&(t1 - t2), &(g1 - g2)))
}

/// Coordinate directions used for finite differences: unit vectors for vector
/// points, the symmetric basis e_ieⱼᵀ + e_jeᵢᵀ (i ≤ j, halved on the diagonal)
/// for matrix points.
fn fd_directions(kind: PointKind) -> Vec<Point> {
    match kind {
        PointKind::Vector { dim } => (0..dim)
            .map(|i| {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                v
            })
            .collect(),
        PointKind::SymMatrix { dim } => {
            let mut out = Vec::new();
            for i in 0..dim {
                for j in i..dim {
                    let mut m = DMatrix::zeros(dim, dim);
                    m[(i, j)] = 1.0;
                    m[(j, i)] = 1.0;
                    out.push(linalg::from_matrix(&m));
                }
            }
            out
        }
    }
}

/// Largest discrepancy between ⟨∇F(θ), e⟩ and central differences of F along
/// the basis directions e, relative to max(1, |⟨∇F(θ), e⟩|).
pub fn fd_gradient_error(gen: &Generator, theta: &Point, step: f64) -> Result<f64> {
    let g = gen.grad(theta)?;
    let mut worst = 0.0_f64;
    for e in fd_directions(gen.point_kind()) {
        let plus = theta + &e * step;
        let minus = theta - &e * step;
        let fd = (gen.f_eval(&plus)? - gen.f_eval(&minus)?) / (2.0 * step);
        let analytic = dot(&g, &e);
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(1.0));
    }
    Ok(worst)
}

/// (F(θ₁) + F(θ₂))/2 − F((θ₁ + θ₂)/2).
pub fn midpoint_convexity_gap(gen: &Generator, t1: &Point, t2: &Point) -> Result<f64> {
    let mid = (t1 + t2) * 0.5;
    Ok(0.5 * (gen.f_eval(t1)? + gen.f_eval(t2)?) - gen.f_eval(&mid)?)
}
