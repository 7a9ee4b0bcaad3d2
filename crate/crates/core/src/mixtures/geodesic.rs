//! α-geodesics on the open probability simplex.
//!
//! In mixture coordinates the α-connection has Christoffel symbols
//! (1 + α)/2 times those of the exponential connection, which gives the
//! geodesic equation
//!
//!   ẍᵢ = c (ẋᵢ²/xᵢ − xᵢ Σⱼ ẋⱼ²/xⱼ),  c = (1 + α)/2.
//!
//! The two-point problem is discretized with central differences on a
//! uniform grid and solved by damped Newton iterations on the resulting
//! block-tridiagonal system, working in the reduced chart (x₁, …, x_{m−1}).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::DiscreteDensity;
use crate::error::{Error, Result};

/// Coordinates below this along a solved path raise the boundary flag.
pub const BOUNDARY_WARNING: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 1024;
pub const DEFAULT_MAX_SWEEPS: usize = 50;
pub const DEFAULT_BVP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum GeodesicSolver {
    /// Exact paths for α = ±1.
    ClosedForm,
    /// Finite-difference boundary value solve with `grid_size` intervals.
    Bvp {
        grid_size: usize,
        max_sweeps: usize,
        tol: f64,
    },
}

impl GeodesicSolver {
    pub fn bvp() -> Self {
        GeodesicSolver::Bvp {
            grid_size: DEFAULT_GRID,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            tol: DEFAULT_BVP_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGeodesicConfig {
    pub alpha: f64,
    pub solver: GeodesicSolver,
}

impl AlphaGeodesicConfig {
    /// Closed form at α = ±1, default BVP settings otherwise.
    pub fn new(alpha: f64) -> Result<Self> {
        let solver = if alpha.abs() == 1.0 {
            GeodesicSolver::ClosedForm
        } else {
            GeodesicSolver::bvp()
        };
        Self::with_solver(alpha, solver)
    }

    pub fn with_solver(alpha: f64, solver: GeodesicSolver) -> Result<Self> {
        if !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidSpec(format!("alpha = {alpha} is outside [-1, 1]")));
        }
        match solver {
            GeodesicSolver::ClosedForm if alpha.abs() != 1.0 => Err(Error::InvalidSpec(format!(
                "closed-form geodesics exist only for alpha = ±1 (got {alpha})"
            ))),
            GeodesicSolver::Bvp { grid_size, tol, .. } if grid_size < 16 || grid_size % 2 != 0 || !(tol > 0.0) => {
                Err(Error::InvalidSpec(format!(
                    "BVP needs an even grid of at least 16 intervals and a positive tolerance (got {grid_size}, {tol})"
                )))
            }
            _ => Ok(AlphaGeodesicConfig { alpha, solver }),
        }
    }
}

/// A geodesic sampled on a uniform grid t_k = k / N.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub nodes: Vec<DVector<f64>>,
    /// Max-norm residual of the discrete geodesic equation (zero for closed forms).
    pub residual: f64,
    pub iterations: usize,
    pub near_boundary: bool,
}

impl GeodesicPath {
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Cubic Hermite interpolation between nodes, renormalized.
    pub fn at(&self, t: f64) -> Result<DiscreteDensity> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidSpec(format!("t = {t} is outside [0, 1]")));
        }
        let n = self.intervals();
        let h = 1.0 / n as f64;
        let s = t * n as f64;
        let k = (s.floor() as usize).min(n - 1);
        let u = s - k as f64;
        if u == 0.0 {
            return DiscreteDensity::normalized(self.nodes[k].as_slice());
        }
        if u == 1.0 {
            return DiscreteDensity::normalized(self.nodes[k + 1].as_slice());
        }
        let slope = |j: usize| -> DVector<f64> {
            if j == 0 {
                (&self.nodes[1] - &self.nodes[0]) / h
            } else if j == n {
                (&self.nodes[n] - &self.nodes[n - 1]) / h
            } else {
                (&self.nodes[j + 1] - &self.nodes[j - 1]) / (2.0 * h)
            }
        };
        let (h00, h10) = (2.0 * u.powi(3) - 3.0 * u * u + 1.0, u.powi(3) - 2.0 * u * u + u);
        let (h01, h11) = (-2.0 * u.powi(3) + 3.0 * u * u, u.powi(3) - u * u);
        let x = &self.nodes[k] * h00 + slope(k) * (h10 * h) + &self.nodes[k + 1] * h01 + slope(k + 1) * (h11 * h);
        DiscreteDensity::normalized(x.as_slice())
    }
}

fn endpoints(p: &DiscreteDensity, q: &DiscreteDensity) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            what: "support size",
            expected: p.len(),
            got: q.len(),
        });
    }
    if !p.is_positive() || !q.is_positive() {
        return Err(Error::InvalidDensity("geodesic endpoints must be strictly positive".into()));
    }
    Ok(())
}

/// (1 − t) p + t q.
pub fn mixture_path_point(p: &DiscreteDensity, q: &DiscreteDensity, t: f64) -> DVector<f64> {
    DVector::from_iterator(p.len(), p.probs().iter().zip(q.probs()).map(|(a, b)| (1.0 - t) * a + t * b))
}

/// p^{1−t} q^t / Z.
pub fn exponential_path_point(p: &DiscreteDensity, q: &DiscreteDensity, t: f64) -> DVector<f64> {
    let logs: Vec<f64> = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (1.0 - t) * a.ln() + t * b.ln())
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let un: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let z = crate::linalg::compensated_sum(un.iter().copied());
    DVector::from_iterator(un.len(), un.into_iter().map(|x| x / z))
}

/// Solves for the α-geodesic from p to q.
pub fn alpha_geodesic(p: &DiscreteDensity, q: &DiscreteDensity, cfg: &AlphaGeodesicConfig) -> Result<GeodesicPath> {
    endpoints(p, q)?;
    match cfg.solver {
        GeodesicSolver::ClosedForm => {
            let n = DEFAULT_GRID;
            let nodes: Vec<DVector<f64>> = (0..=n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    if cfg.alpha < 0.0 {
                        mixture_path_point(p, q, t)
                    } else {
                        exponential_path_point(p, q, t)
                    }
                })
                .collect();
            Ok(finish(nodes, 0.0, 0))
        }
        GeodesicSolver::Bvp { grid_size, max_sweeps, tol } => {
            solve_bvp(p, q, 0.5 * (1.0 + cfg.alpha), grid_size, max_sweeps, tol)
        }
    }
}

fn finish(mut nodes: Vec<DVector<f64>>, residual: f64, iterations: usize) -> GeodesicPath {
    let near_boundary = nodes.iter().any(|x| x.iter().any(|&v| v < BOUNDARY_WARNING));
    if near_boundary {
        log::warn!("geodesic passes within {BOUNDARY_WARNING:e} of the simplex boundary");
    }
    for x in nodes.iter_mut() {
        x.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    GeodesicPath { nodes, residual, iterations, near_boundary }
}

/// Full-chart residual blocks of the discrete equation at an interior node,
/// together with the derivatives of the acceleration term.
struct NodeTerms {
    residual: DVector<f64>,
    g_x: DMatrix<f64>,
    g_v: DMatrix<f64>,
}

fn node_terms(prev: &DVector<f64>, x: &DVector<f64>, next: &DVector<f64>, h: f64, c: f64) -> NodeTerms {
    let m = x.len();
    let v = (next - prev) / (2.0 * h);
    let s: f64 = (0..m).map(|j| v[j] * v[j] / x[j]).sum();
    let accel = DVector::from_fn(m, |i, _| c * (v[i] * v[i] / x[i] - x[i] * s));
    let residual = (next - x * 2.0 + prev) / (h * h) - accel;
    let g_x = DMatrix::from_fn(m, m, |i, j| {
        let diag = if i == j { -v[i] * v[i] / (x[i] * x[i]) - s } else { 0.0 };
        c * (diag + x[i] * v[j] * v[j] / (x[j] * x[j]))
    });
    let g_v = DMatrix::from_fn(m, m, |i, j| {
        let diag = if i == j { 2.0 * v[i] / x[i] } else { 0.0 };
        c * (diag - 2.0 * x[i] * v[j] / x[j])
    });
    NodeTerms { residual, g_x, g_v }
}

fn max_residual(nodes: &[DVector<f64>], h: f64, c: f64) -> f64 {
    (1..nodes.len() - 1)
        .map(|k| node_terms(&nodes[k - 1], &nodes[k], &nodes[k + 1], h, c).residual.amax())
        .fold(0.0, f64::max)
}

/// Reduced block: rows and columns 0..m−1 of J E with E = [I; −1ᵀ].
fn reduce(j: &DMatrix<f64>) -> DMatrix<f64> {
    let r = j.nrows() - 1;
    DMatrix::from_fn(r, r, |a, b| j[(a, b)] - j[(a, r)])
}

fn solve_bvp(
    p: &DiscreteDensity,
    q: &DiscreteDensity,
    c: f64,
    n: usize,
    max_sweeps: usize,
    tol: f64,
) -> Result<GeodesicPath> {
    let h = 1.0 / n as f64;
    let m = p.len();
    let mut nodes: Vec<DVector<f64>> = (0..=n).map(|k| mixture_path_point(p, q, k as f64 / n as f64)).collect();
    if m == 1 || c == 0.0 {
        return Ok(finish(nodes, 0.0, 0));
    }
    let r = m - 1;
    let ident = DMatrix::<f64>::identity(m, m);
    let mut res = max_residual(&nodes, h, c);
    let mut iterations = 0;
    while res > tol && iterations < max_sweeps {
        iterations += 1;
        // block-tridiagonal Newton system L_k Δ_{k−1} + D_k Δ_k + U_k Δ_{k+1} = −R_k
        let mut diag = Vec::with_capacity(n - 1);
        let mut lower = Vec::with_capacity(n - 1);
        let mut upper = Vec::with_capacity(n - 1);
        let mut rhs = Vec::with_capacity(n - 1);
        for k in 1..n {
            let t = node_terms(&nodes[k - 1], &nodes[k], &nodes[k + 1], h, c);
            lower.push(reduce(&(&ident / (h * h) + &t.g_v / (2.0 * h))));
            diag.push(reduce(&(&ident * (-2.0 / (h * h)) - &t.g_x)));
            upper.push(reduce(&(&ident / (h * h) - &t.g_v / (2.0 * h))));
            rhs.push(-t.residual.rows(0, r).into_owned());
        }
        let delta = block_thomas(&lower, &diag, &upper, rhs)?;
        let mut lambda = 1.0;
        let accepted = loop {
            let trial: Vec<DVector<f64>> = nodes
                .iter()
                .enumerate()
                .map(|(k, x)| {
                    if k == 0 || k == n {
                        return x.clone();
                    }
                    let d = &delta[k - 1];
                    let mut y = x.clone();
                    for i in 0..r {
                        y[i] += lambda * d[i];
                    }
                    y[r] = 1.0 - crate::linalg::compensated_sum(y.rows(0, r).iter().copied());
                    y
                })
                .collect();
            let positive = trial.iter().all(|x| x.iter().all(|&v| v > 0.0));
            if positive {
                let trial_res = max_residual(&trial, h, c);
                if trial_res < res || trial_res <= tol {
                    break Some((trial, trial_res));
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                break None;
            }
        };
        match accepted {
            Some((trial, trial_res)) => {
                nodes = trial;
                res = trial_res;
            }
            None => break,
        }
        log::debug!("geodesic Newton step {iterations}: damping {lambda}, residual {res:e}");
    }
    if res > tol {
        return Err(Error::NonConvergence { iterations, residual: res });
    }
    Ok(finish(nodes, res, iterations))
}

/// Block Thomas elimination for a block-tridiagonal system.
fn block_thomas(
    lower: &[DMatrix<f64>],
    diag: &[DMatrix<f64>],
    upper: &[DMatrix<f64>],
    mut rhs: Vec<DVector<f64>>,
) -> Result<Vec<DVector<f64>>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut u_mod: Vec<DMatrix<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        if k > 0 {
            let l = &lower[k];
            d[k] -= l * &u_mod[k - 1];
            let prev = rhs[k - 1].clone();
            rhs[k] -= l * prev;
        }
        let lu = d[k].clone().lu();
        let solve_err = || Error::NonConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        };
        u_mod.push(lu.solve(&upper[k]).ok_or_else(solve_err)?);
        rhs[k] = lu.solve(&rhs[k]).ok_or_else(solve_err)?;
    }
    for k in (0..n.saturating_sub(1)).rev() {
        let next = rhs[k + 1].clone();
        rhs[k] -= &u_mod[k] * next;
    }
    Ok(rhs)
}

/// Point at parameter t of the α-geodesic from p to q.
pub fn alpha_geodesic_point(
    p: &DiscreteDensity,
    q: &DiscreteDensity,
    t: f64,
    cfg: &AlphaGeodesicConfig,
) -> Result<DiscreteDensity> {
    endpoints(p, q)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidSpec(format!("t = {t} is outside [0, 1]")));
    }
    if t == 0.0 {
        return Ok(p.clone());
    }
    if t == 1.0 {
        return Ok(q.clone());
    }
    match cfg.solver {
        GeodesicSolver::ClosedForm if cfg.alpha < 0.0 => DiscreteDensity::new(mixture_path_point(p, q, t).as_slice().to_vec()),
        GeodesicSolver::ClosedForm => DiscreteDensity::normalized(exponential_path_point(p, q, t).as_slice()),
        GeodesicSolver::Bvp { .. } => alpha_geodesic(p, q, cfg)?.at(t),
    }
}
