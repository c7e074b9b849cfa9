//! B-spline basis functions over knot sequences with repeated knots.
//!
//! Values are computed with the Cox–de Boor recursion restricted to the `k`
//! functions that are nonzero on the knot span containing `x`. Spans of zero
//! length never contribute, which reproduces the `0/0 := 0` convention of the
//! full recursion. The last nondegenerate span is treated as closed on the
//! right so the basis is a partition of unity on the whole knot range.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShapesError};
use crate::scalar::Scalar;

/// Nondecreasing knot sequence with `k`-fold end knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotVector<T> {
    values: Vec<T>,
    order: usize,
}

impl<T: Scalar> KnotVector<T> {
    /// Validates and wraps a knot sequence for splines of order `order`.
    pub fn new(values: Vec<T>, order: usize) -> Result<Self> {
        let bad = |msg: String| Err(ShapesError::InvalidKnots(msg));
        if order == 0 {
            return bad("order must be at least 1".into());
        }
        let p = values.len();
        if p < 2 * order {
            return bad(format!("{p} knots given, order {order} needs at least {}", 2 * order));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return bad(format!("knot {i} is not finite"));
        }
        if values[0] < T::zero() || values[p - 1] > T::one() {
            return bad("knots must lie in [0, 1]".into());
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return bad(format!("knots decrease at index {}", i + 1));
        }
        if values[..order].iter().any(|&v| v != values[0]) {
            return bad(format!("first {order} knots must coincide"));
        }
        if values[p - order..].iter().any(|&v| v != values[p - 1]) {
            return bad(format!("last {order} knots must coincide"));
        }
        let mut run = 1;
        for w in values.windows(2) {
            run = if w[1] == w[0] { run + 1 } else { 1 };
            if run > order {
                return bad(format!("knot {} repeated more than {order} times", w[0]));
            }
        }
        Ok(Self { values, order })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total number of knots `P`, repetitions included.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Dimension `P - k` of the spline space.
    pub fn num_basis(&self) -> usize {
        self.values.len() - self.order
    }

    /// Closed interval `[τ_0, τ_{P-1}]` on which the basis is defined.
    pub fn domain(&self) -> (T, T) {
        (self.values[0], self.values[self.values.len() - 1])
    }

    pub fn contains(&self, x: T) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && x <= hi
    }

    /// Index `μ` of the nondegenerate span `τ_μ <= x < τ_{μ+1}` containing `x`,
    /// with the final span closed on the right. `x` must lie in the domain.
    fn span(&self, x: T) -> usize {
        let k = self.order;
        let last = self.values.len() - k - 1;
        let i = self.values.partition_point(|&t| t <= x);
        i.saturating_sub(1).clamp(k - 1, last)
    }

    /// Writes the `k` basis values that may be nonzero at `x` into `out` and
    /// returns the index of the first one. `left` and `right` are scratch of
    /// length `k`.
    fn nonzero_into(&self, x: T, out: &mut [T], left: &mut [T], right: &mut [T]) -> usize {
        let k = self.order;
        let tau = &self.values;
        let mu = self.span(x);
        out[0] = T::one();
        for j in 1..k {
            left[j] = x - tau[mu + 1 - j];
            right[j] = tau[mu + j] - x;
            let mut saved = T::zero();
            for r in 0..j {
                let temp = out[r] / (right[r + 1] + left[j - r]);
                out[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            out[j] = saved;
        }
        mu + 1 - k
    }

    /// Value of the single basis function `B_{j,k}(x)`; zero outside the knot range.
    pub fn basis_function(&self, j: usize, x: T) -> T {
        if j >= self.num_basis() || !self.contains(x) {
            return T::zero();
        }
        let k = self.order;
        let mut out = vec![T::zero(); k];
        let mut left = vec![T::zero(); k];
        let mut right = vec![T::zero(); k];
        let first = self.nonzero_into(x, &mut out, &mut left, &mut right);
        if j >= first && j < first + k {
            out[j - first]
        } else {
            T::zero()
        }
    }
}

/// All `P - k` basis values `(B_{0,k}(x), ..., B_{P-k-1,k}(x))`.
pub fn evaluate_basis<T: Scalar>(knots: &KnotVector<T>, x: T) -> Result<Vec<T>> {
    if !knots.contains(x) {
        let (lo, hi) = knots.domain();
        return Err(ShapesError::OutOfDomain {
            x: x.as_f64(),
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    let k = knots.order();
    let mut vals = vec![T::zero(); k];
    let mut left = vec![T::zero(); k];
    let mut right = vec![T::zero(); k];
    let first = knots.nonzero_into(x, &mut vals, &mut left, &mut right);
    let mut all = vec![T::zero(); knots.num_basis()];
    all[first..first + k].copy_from_slice(&vals);
    Ok(all)
}

/// Design matrix `B(τ)` with entry `(m, n) = B_{m,k}(x_n)`, stored column-wise
/// as the `k` possibly nonzero values of each column.
///
/// Grid points outside the knot range give all-zero columns.
#[derive(Debug, Clone)]
pub struct BasisMatrix<T> {
    knots: KnotVector<T>,
    grid: Vec<T>,
    rows: usize,
    /// 1 when the first (and last) end B-spline has been dropped.
    row_offset: usize,
    /// Unshifted index of the first stored value of each column.
    first: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> BasisMatrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.grid.len()
    }

    pub fn knots(&self) -> &KnotVector<T> {
        &self.knots
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn ends_dropped(&self) -> bool {
        self.row_offset == 1
    }

    /// Entry `(m, n)`.
    pub fn get(&self, m: usize, n: usize) -> T {
        self.column(n)
            .find(|&(row, _)| row == m)
            .map_or(T::zero(), |(_, v)| v)
    }

    /// Nonzero-candidate entries `(row, value)` of column `n`.
    pub fn column(&self, n: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let k = self.knots.order();
        let first = self.first[n];
        let lo = self.row_offset;
        let hi = self.row_offset + self.rows;
        self.values[n * k..(n + 1) * k]
            .iter()
            .enumerate()
            .filter_map(move |(r, &v)| {
                let orig = first + r;
                (orig >= lo && orig < hi).then(|| (orig - lo, v))
            })
    }

    /// Dense `rows x cols` copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.cols()]; self.rows];
        for n in 0..self.cols() {
            for (m, v) in self.column(n) {
                dense[m][n] = v;
            }
        }
        dense
    }

    /// `Σ_m α_m B_{m,n}` for every grid point `n`.
    pub fn combine(&self, alpha: &[T]) -> Vec<T> {
        assert_eq!(alpha.len(), self.rows, "coefficient count must match basis rows");
        (0..self.cols())
            .map(|n| self.column(n).map(|(m, v)| alpha[m] * v).sum())
            .collect()
    }
}

/// Builds the basis matrix on a strictly increasing grid in `[0, 1]`.
///
/// With `drop_end_bsplines` the first and last basis functions are removed,
/// leaving `P - k - 2` rows.
pub fn build_basis_matrix<T: Scalar>(
    knots: &KnotVector<T>,
    grid: &[T],
    drop_end_bsplines: bool,
) -> Result<BasisMatrix<T>> {
    if grid.is_empty() {
        return Err(ShapesError::Empty("predictor grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ShapesError::IllPosed("grid must be strictly increasing".into()));
    }
    if grid[0] < T::zero() || grid[grid.len() - 1] > T::one() {
        return Err(ShapesError::IllPosed("grid must lie in [0, 1]".into()));
    }
    let k = knots.order();
    let row_offset = usize::from(drop_end_bsplines);
    let rows = knots
        .num_basis()
        .checked_sub(2 * row_offset)
        .filter(|&r| r > 0)
        .ok_or_else(|| ShapesError::IllPosed("no basis functions left after dropping ends".into()))?;
    if grid.len() <= rows {
        return Err(ShapesError::IllPosed(format!(
            "{} grid points for {rows} basis functions",
            grid.len()
        )));
    }

    let mut first = Vec::with_capacity(grid.len());
    let mut values = vec![T::zero(); grid.len() * k];
    let mut left = vec![T::zero(); k];
    let mut right = vec![T::zero(); k];
    for (n, &x) in grid.iter().enumerate() {
        if knots.contains(x) {
            let out = &mut values[n * k..(n + 1) * k];
            first.push(knots.nonzero_into(x, out, &mut left, &mut right));
        } else {
            first.push(0);
        }
    }
    Ok(BasisMatrix {
        knots: knots.clone(),
        grid: grid.to_vec(),
        rows,
        row_offset,
        first,
        values,
    })
}
