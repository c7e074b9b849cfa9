//! Ridge-penalized least squares for B-spline coefficients at fixed knots.
//!
//! For a basis matrix `B` (rows = basis functions, columns = samples) the
//! coefficients solve `(B Bᵀ + λ I) α = B y`, and the fitness minimized over
//! knot placements is `Σ (y - αB)² + λ Σ α²`.

use serde::{Deserialize, Serialize};

use crate::bspline::{build_basis_matrix, BasisMatrix, KnotVector};
use crate::error::{Result, ShapesError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficients<T> {
    pub alpha: Vec<T>,
    /// Set when the normal matrix had to be regularized by a diagonal jitter.
    pub jittered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenalizedFitResult<T> {
    pub coefficients: FitCoefficients<T>,
    /// Fitted values `α B` on the grid.
    pub estimate: Vec<T>,
    pub rss: T,
    pub penalty: T,
    /// `rss + λ * penalty`.
    pub fitness: T,
}

/// Symmetric band matrix: lower triangle with `w` diagonals, entry `(i, j)`
/// for `0 <= i - j < w` stored at `a[i * w + (i - j)]`.
struct BandMatrix<T> {
    n: usize,
    w: usize,
    a: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    fn zeros(n: usize, w: usize) -> Self {
        Self { n, w, a: vec![T::zero(); n * w] }
    }

    fn at(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.a[i * self.w + (i - j)]
    }

    fn diag(&self, i: usize) -> T {
        self.a[i * self.w]
    }

    fn add_diagonal(&mut self, v: T) {
        for i in 0..self.n {
            self.a[i * self.w] = self.a[i * self.w] + v;
        }
    }

    /// Lower Cholesky factor in the same band layout; `None` if a pivot
    /// falls below `tol`.
    fn cholesky(&self, tol: T) -> Option<Vec<T>> {
        let (n, w) = (self.n, self.w);
        let mut l = self.a.clone();
        for j in 0..n {
            let lo = j.saturating_sub(w - 1);
            let mut d = l[j * w];
            for p in lo..j {
                let v = l[j * w + (j - p)];
                d = d - v * v;
            }
            if !(d > tol) {
                return None;
            }
            let d = d.sqrt();
            l[j * w] = d;
            for i in j + 1..n.min(j + w) {
                let lo_i = i.saturating_sub(w - 1).max(lo);
                let mut s = l[i * w + (i - j)];
                for p in lo_i..j {
                    s = s - l[i * w + (i - p)] * l[j * w + (j - p)];
                }
                l[i * w + (i - j)] = s / d;
            }
        }
        Some(l)
    }
}

fn band_solve<T: Scalar>(l: &[T], n: usize, w: usize, rhs: &[T]) -> Vec<T> {
    let mut z = rhs.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for p in i.saturating_sub(w - 1)..i {
            s = s - l[i * w + (i - p)] * z[p];
        }
        z[i] = s / l[i * w];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for p in i + 1..n.min(i + w) {
            s = s - l[p * w + (p - i)] * z[p];
        }
        z[i] = s / l[i * w];
    }
    z
}

/// Solves the ridge normal equations by Cholesky factorization.
///
/// A numerically singular normal matrix is retried once with a diagonal
/// jitter of `1e-12 * trace(G) / n` (or a few ulps for single precision) and
/// the result flagged; if that also fails the matrix is reported rank deficient.
pub fn solve_coefficients<T: Scalar>(
    basis: &BasisMatrix<T>,
    y: &[T],
    lambda: T,
) -> Result<FitCoefficients<T>> {
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(ShapesError::InvalidConfig(format!("regulator gain {lambda} must be >= 0")));
    }
    if y.len() != basis.cols() {
        return Err(ShapesError::IllPosed(format!(
            "{} observations for {} grid points",
            y.len(),
            basis.cols()
        )));
    }
    let n = basis.rows();
    // basis functions more than k - 1 apart never overlap
    let k = basis.knots().order();
    let w = k.min(n);
    let mut g = BandMatrix::zeros(n, w);
    let mut rhs = vec![T::zero(); n];
    let mut col: Vec<(usize, T)> = Vec::with_capacity(k);
    for (c, &yc) in y.iter().enumerate() {
        col.clear();
        col.extend(basis.column(c).filter(|&(_, v)| v != T::zero()));
        for (i, &(a, va)) in col.iter().enumerate() {
            rhs[a] = rhs[a] + va * yc;
            for &(b, vb) in &col[..=i] {
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                let e = g.at(hi, lo);
                *e = *e + va * vb;
            }
        }
    }
    g.add_diagonal(lambda);

    let max_diag = (0..n).map(|i| g.diag(i)).fold(T::zero(), T::max);
    let tol = T::from_usize_lossy(n) * T::epsilon() * max_diag;
    if let Some(l) = g.cholesky(tol) {
        return Ok(FitCoefficients { alpha: band_solve(&l, n, w, &rhs), jittered: false });
    }
    let scale = T::lit(1e-12).max(T::lit(100.0) * T::epsilon());
    let trace: T = (0..n).map(|i| g.diag(i)).sum();
    let jitter = scale * trace / T::from_usize_lossy(n);
    if jitter > T::zero() {
        g.add_diagonal(jitter);
        if let Some(l) = g.cholesky(T::zero()) {
            return Ok(FitCoefficients { alpha: band_solve(&l, n, w, &rhs), jittered: true });
        }
    }
    Err(ShapesError::RankDeficient(format!("{n}x{n} normal matrix, lambda = {lambda}")))
}

/// Penalized fit of `y` on a prebuilt basis.
pub fn fit_basis<T: Scalar>(basis: &BasisMatrix<T>, y: &[T], lambda: T) -> Result<PenalizedFitResult<T>> {
    let coefficients = solve_coefficients(basis, y, lambda)?;
    let estimate = basis.combine(&coefficients.alpha);
    let rss = y.iter().zip(&estimate).map(|(&a, &b)| (a - b) * (a - b)).sum();
    let penalty = coefficients.alpha.iter().map(|&a| a * a).sum();
    Ok(PenalizedFitResult { fitness: rss + lambda * penalty, coefficients, estimate, rss, penalty })
}

/// Fitness `F_λ(τ)` of a knot placement: the minimum over coefficients of the
/// penalized least-squares function.
pub fn fitness<T: Scalar>(
    knots: &KnotVector<T>,
    grid: &[T],
    y: &[T],
    lambda: T,
    drop_end_bsplines: bool,
) -> Result<PenalizedFitResult<T>> {
    let basis = build_basis_matrix(knots, grid, drop_end_bsplines)?;
    fit_basis(&basis, y, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    fn knots() -> KnotVector<f64> {
        KnotVector::new(
            vec![0.0, 0.0, 0.0, 0.0, 0.3, 0.5, 0.8, 1.0, 1.0, 1.0, 1.0],
            4,
        )
        .unwrap()
    }

    #[test]
    fn exact_recovery_without_penalty() {
        let b = build_basis_matrix(&knots(), &grid(64), false).unwrap();
        let truth = vec![1.0, -2.0, 0.5, 3.0, 2.5, -1.0, 0.25];
        let y = b.combine(&truth);
        let c = solve_coefficients(&b, &y, 0.0).unwrap();
        assert!(!c.jittered);
        for (a, t) in c.alpha.iter().zip(&truth) {
            assert!((a - t).abs() < 1e-8, "{a} vs {t}");
        }
    }

    #[test]
    fn residual_is_orthogonal_to_basis() {
        let b = build_basis_matrix(&knots(), &grid(64), false).unwrap();
        let y: Vec<f64> = grid(64).iter().map(|x| (7.0 * x).sin() + x * x).collect();
        let fit = fit_basis(&b, &y, 0.0).unwrap();
        let r: Vec<f64> = y.iter().zip(&fit.estimate).map(|(a, b)| a - b).collect();
        let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let br: Vec<f64> = (0..b.rows())
            .map(|m| (0..b.cols()).map(|n| b.get(m, n) * r[n]).sum())
            .collect();
        let norm = br.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 1e-8 * ynorm);
        assert_eq!(fit.fitness, fit.rss);
    }

    #[test]
    fn huge_gain_shrinks_to_zero() {
        let b = build_basis_matrix(&knots(), &grid(64), false).unwrap();
        let y: Vec<f64> = grid(64).iter().map(|x| 10.0 * x).collect();
        let c = solve_coefficients(&b, &y, 1e9).unwrap();
        let norm = c.alpha.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm < 1e-6, "{norm}");
    }

    #[test]
    fn zero_data() {
        let fit = fitness(&knots(), &grid(64), &[0.0; 64], 0.3, false).unwrap();
        assert!(fit.coefficients.alpha.iter().all(|&a| a == 0.0));
        assert_eq!(fit.fitness, 0.0);
    }

    #[test]
    fn fitness_decomposes() {
        let y: Vec<f64> = grid(64).iter().map(|x| (4.0 * x).cos()).collect();
        let fit = fitness(&knots(), &grid(64), &y, 0.7, true).unwrap();
        assert_eq!(fit.coefficients.alpha.len(), 5);
        assert!((fit.fitness - (fit.rss + 0.7 * fit.penalty)).abs() < 1e-14);
    }

    #[test]
    fn singular_system_uses_jitter() {
        // five knots inside one sample interval leave a basis function with no samples
        let kv = KnotVector::new(
            vec![0.0, 0.0, 0.0, 0.0, 0.501, 0.502, 0.503, 0.504, 0.505, 1.0, 1.0, 1.0, 1.0],
            4,
        )
        .unwrap();
        let g = grid(11);
        let y: Vec<f64> = g.iter().map(|x| x * x).collect();
        let b = build_basis_matrix(&kv, &g, false).unwrap();
        let c = solve_coefficients(&b, &y, 0.0).unwrap();
        assert!(c.jittered);
        assert!(c.alpha.iter().all(|a| a.is_finite()));
        let c = solve_coefficients(&b, &y, 0.1).unwrap();
        assert!(!c.jittered);
    }

    #[test]
    fn rejects_bad_input() {
        let b = build_basis_matrix(&knots(), &grid(64), false).unwrap();
        assert!(matches!(solve_coefficients(&b, &[0.0; 63], 0.0), Err(ShapesError::IllPosed(_))));
        assert!(matches!(solve_coefficients(&b, &[0.0; 64], -1.0), Err(ShapesError::InvalidConfig(_))));
    }
}
