//! Small dense linear-algebra helpers shared by the generator, SPD and
//! mixture modules.

use nalgebra::{DMatrix, DVector};

/// A point of a generator domain. Matrix-valued points are stored flattened
/// in row-major order, so the Euclidean dot product of two flattened points
/// is the Hilbert-Schmidt product tr(ABᵀ).
pub type Point = DVector<f64>;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a sequence of reals.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    xs.into_iter().collect::<CompensatedSum>().value()
}

/// Componentwise compensated weighted sum Σ wᵢ vᵢ.
pub fn weighted_sum(vs: &[Point], weights: &[f64]) -> Point {
    debug_assert_eq!(vs.len(), weights.len());
    let dim = vs.first().map_or(0, |v| v.len());
    let mut acc = vec![CompensatedSum::new(); dim];
    for (v, &w) in vs.iter().zip(weights) {
        for (a, &x) in acc.iter_mut().zip(v.iter()) {
            a.add(w * x);
        }
    }
    DVector::from_iterator(dim, acc.iter().map(CompensatedSum::value))
}

/// Compensated dot product.
pub fn dot(a: &Point, b: &Point) -> f64 {
    compensated_sum(a.iter().zip(b.iter()).map(|(x, y)| x * y))
}

pub fn max_abs(v: &Point) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Reads a flattened row-major point as a `dim × dim` matrix.
pub fn to_matrix(p: &Point, dim: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(dim, dim, p.as_slice())
}

/// Flattens a square matrix in row-major order.
pub fn from_matrix(m: &DMatrix<f64>) -> Point {
    let (r, c) = m.shape();
    DVector::from_iterator(r * c, (0..r).flat_map(|i| (0..c).map(move |j| m[(i, j)])))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest |a_ij − a_ji| relative to max(1, max |a_ij|).
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
    let mut worst = 0.0_f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Eigenvalues (ascending) and eigenvectors of a symmetric matrix.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = nalgebra::SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// V f(Λ) Vᵀ for a symmetric matrix with spectral data (Λ, V), resymmetrized.
pub fn spectral_apply(
    vals: &DVector<f64>,
    vecs: &DMatrix<f64>,
    f: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let mut scaled = vecs.clone();
    for (k, &l) in vals.iter().enumerate() {
        let s = f(l);
        scaled.column_mut(k).scale_mut(s);
    }
    symmetrize(&(scaled * vecs.transpose()))
}

pub fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen(m);
    spectral_apply(&vals, &vecs, f)
}

pub fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0[0]
}

/// Spectral condition number of a general square matrix (ratio of extreme
/// singular values); infinite when singular.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn matrix_round_trip_is_row_major() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let p = from_matrix(&m);
        assert_eq!(p.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(to_matrix(&p, 2), m);
    }

    #[test]
    fn sym_fn_square_root_of_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![9.0, 4.0]));
        let r = sym_fn(&m, f64::sqrt);
        assert!((r[(0, 0)] - 3.0).abs() < 1e-14);
        assert!((r[(1, 1)] - 2.0).abs() < 1e-14);
        assert!(r[(0, 1)].abs() < 1e-14);
    }
}
