//! Means and distances on the cone of symmetric positive-definite matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub const SPD_SYMMETRY_TOL: f64 = 1e-12;
pub const MAX_CONDITION: f64 = 1e12;
pub const AHM_TOL: f64 = 1e-12;
pub const AHM_MAX_ITER: usize = 60;
/// Iterate pairs kept in an [`AhmTrace`]; later steps keep only their gaps.
pub const AHM_HISTORY: usize = 64;

/// A validated SPD matrix with its spectral decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpdRaw", into = "SpdRaw")]
pub struct SpdMatrix {
    m: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

/// Wire form: a declared dimension and row-major entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpdRaw {
    pub dim: usize,
    pub entries: Vec<f64>,
}

impl TryFrom<SpdRaw> for SpdMatrix {
    type Error = Error;

    fn try_from(raw: SpdRaw) -> Result<Self> {
        if raw.dim == 0 || raw.entries.len() != raw.dim * raw.dim {
            return Err(Error::LengthMismatch {
                what: "matrix entries",
                expected: raw.dim * raw.dim,
                got: raw.entries.len(),
            });
        }
        SpdMatrix::new(DMatrix::from_row_slice(raw.dim, raw.dim, &raw.entries))
    }
}

impl From<SpdMatrix> for SpdRaw {
    fn from(p: SpdMatrix) -> Self {
        SpdRaw {
            dim: p.dim(),
            entries: linalg::from_matrix(&p.m).as_slice().to_vec(),
        }
    }
}

impl SpdMatrix {
    /// Validates symmetry (relative 1e−12), positivity of the spectrum and a
    /// condition number of at most 1e12.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::NotSpd(format!("shape {:?} is not square", m.shape())));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotSpd("non-finite entry".into()));
        }
        let asym = linalg::asymmetry(&m);
        if asym > SPD_SYMMETRY_TOL {
            return Err(Error::NotSpd(format!("asymmetry {asym:e}")));
        }
        Self::from_symmetric(linalg::symmetrize(&m))
    }

    fn from_symmetric(m: DMatrix<f64>) -> Result<Self> {
        let (eigenvalues, eigenvectors) = linalg::sym_eigen(&m);
        let lo = eigenvalues[0];
        let hi = eigenvalues[eigenvalues.len() - 1];
        if !(lo > 0.0) {
            return Err(Error::NotSpd(format!("smallest eigenvalue {lo:e}")));
        }
        if hi / lo > MAX_CONDITION {
            return Err(Error::Singular(format!("condition number {:e}", hi / lo)));
        }
        Ok(SpdMatrix { m, eigenvalues, eigenvectors })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn condition(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] / self.eigenvalues[0]
    }

    pub fn frobenius(&self) -> f64 {
        self.m.norm()
    }

    /// f applied to the spectrum, resymmetrized.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        linalg::spectral_apply(&self.eigenvalues, &self.eigenvectors, f)
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        self.apply(f64::recip)
    }

    /// Wraps a computed result, reporting loss of definiteness as a numerical
    /// failure rather than as bad input.
    fn computed(m: DMatrix<f64>, what: &str) -> Result<Self> {
        Self::from_symmetric(linalg::symmetrize(&m)).map_err(|e| Error::DomainEscape {
            iteration: 0,
            detail: format!("{what}: {e}"),
        })
    }
}

fn same_dim(p: &SpdMatrix, q: &SpdMatrix) -> Result<()> {
    if p.dim() == q.dim() {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            what: "matrix dimension",
            expected: p.dim(),
            got: q.dim(),
        })
    }
}

pub fn spd_sqrt(p: &SpdMatrix) -> Result<SpdMatrix> {
    SpdMatrix::computed(p.apply(f64::sqrt), "square root")
}

pub fn spd_arith_mean(p: &SpdMatrix, q: &SpdMatrix) -> Result<SpdMatrix> {
    same_dim(p, q)?;
    SpdMatrix::computed((p.matrix() + q.matrix()) * 0.5, "arithmetic mean")
}

/// 2 (P⁻¹ + Q⁻¹)⁻¹.
pub fn spd_harmonic_mean(p: &SpdMatrix, q: &SpdMatrix) -> Result<SpdMatrix> {
    same_dim(p, q)?;
    let s = SpdMatrix::computed(p.inverse() + q.inverse(), "inverse sum")?;
    SpdMatrix::computed(s.inverse() * 2.0, "harmonic mean")
}

/// Q^½ (Q^−½ P Q^−½)^½ Q^½.
pub fn spd_geometric_closed(p: &SpdMatrix, q: &SpdMatrix) -> Result<SpdMatrix> {
    same_dim(p, q)?;
    let q_half = q.apply(f64::sqrt);
    let q_mhalf = q.apply(|l| l.sqrt().recip());
    let inner = SpdMatrix::computed(&q_mhalf * p.matrix() * &q_mhalf, "congruence")?;
    let root = inner.apply(f64::sqrt);
    SpdMatrix::computed(&q_half * root * &q_half, "geometric mean")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AhmTrace {
    /// (P_t, Q_t) for t = 0, 1, … up to [`AHM_HISTORY`] entries.
    pub iterates: Vec<(SpdMatrix, SpdMatrix)>,
    /// ‖P_t − Q_t‖_F for every t.
    pub gaps: Vec<f64>,
    /// (P_T + Q_T)/2 at the last step.
    pub limit: SpdMatrix,
    pub converged: bool,
}

impl AhmTrace {
    pub fn iterations(&self) -> usize {
        self.gaps.len() - 1
    }

    pub fn final_gap(&self) -> f64 {
        *self.gaps.last().expect("trace holds the initial gap")
    }
}

/// Arithmetic-harmonic iteration P ← A(P, Q), Q ← H(P, Q), stopped once
/// ‖P_t − Q_t‖_F ≤ tol. Its limit is the geometric mean.
pub fn ahm_geometric(p: &SpdMatrix, q: &SpdMatrix, tol: f64, max_iter: usize) -> Result<AhmTrace> {
    same_dim(p, q)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidSpec(format!("tolerance must be positive, got {tol}")));
    }
    let (mut pt, mut qt) = (p.clone(), q.clone());
    let mut gaps = vec![(pt.matrix() - qt.matrix()).norm()];
    let mut iterates = vec![(pt.clone(), qt.clone())];
    let mut t = 0;
    while gaps[t] > tol && t < max_iter {
        t += 1;
        let a = spd_arith_mean(&pt, &qt);
        let h = spd_harmonic_mean(&pt, &qt);
        let (a, h) = match (a, h) {
            (Ok(a), Ok(h)) => (a, h),
            (Err(e), _) | (_, Err(e)) => {
                return Err(Error::DomainEscape {
                    iteration: t,
                    detail: e.to_string(),
                })
            }
        };
        pt = a;
        qt = h;
        gaps.push((pt.matrix() - qt.matrix()).norm());
        log::debug!("ahm step {t}: gap {:e}", gaps[t]);
        if iterates.len() < AHM_HISTORY {
            iterates.push((pt.clone(), qt.clone()));
        }
    }
    let converged = gaps[t] <= tol;
    let limit = spd_arith_mean(&pt, &qt)?;
    Ok(AhmTrace { iterates, gaps, limit, converged })
}

/// Trace-metric distance √(Σ log² λᵢ(P^−½ Q P^−½)).
pub fn trace_metric_distance(p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    same_dim(p, q)?;
    let p_mhalf = p.apply(|l| l.sqrt().recip());
    let inner = linalg::symmetrize(&(&p_mhalf * q.matrix() * &p_mhalf));
    let (vals, _) = linalg::sym_eigen(&inner);
    if !(vals[0] > 0.0) {
        return Err(Error::DomainEscape {
            iteration: 0,
            detail: format!("congruence lost definiteness (eigenvalue {:e})", vals[0]),
        });
    }
    Ok(linalg::compensated_sum(vals.iter().map(|l| l.ln().powi(2))).sqrt())
}

/// Roundoff floor below which AHM gaps carry no rate information.
pub fn gap_floor(p: &SpdMatrix, q: &SpdMatrix) -> f64 {
    1e3 * f64::EPSILON * p.frobenius().max(q.frobenius())
}

/// Convergence order from the gap sequence: the slope of log g_{t+1} against
/// log g_t through the last two consecutive pairs above `floor`. Only the
/// tail is used because the order is an asymptotic property and early gaps
/// are pre-asymptotic. Needs three gaps above the floor.
pub fn convergence_order(gaps: &[f64], floor: f64) -> Option<f64> {
    let usable: Vec<f64> = gaps.iter().copied().take_while(|&g| g > floor).collect();
    let n = usable.len();
    if n < 3 {
        return None;
    }
    let (g0, g1, g2) = (usable[n - 3], usable[n - 2], usable[n - 1]);
    let denom = (g1 / g0).ln();
    (denom != 0.0).then(|| (g2 / g1).ln() / denom)
}
