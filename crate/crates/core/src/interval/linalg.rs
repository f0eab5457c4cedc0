//! Interval vectors and matrices, and a residual-certified matrix inverse.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{round, Interval, IntervalError};

/// Fixed-length vector of intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(v: Vec<Interval>) -> Self {
        IntervalVector(v)
    }

    pub fn zeros(n: usize) -> Self {
        IntervalVector(vec![Interval::ZERO; n])
    }

    pub fn from_points(x: &[f64]) -> Self {
        IntervalVector(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Interval> {
        self.0
    }

    pub fn mid(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.mid()).collect()
    }

    pub fn map(&self, f: impl Fn(Interval) -> Interval) -> IntervalVector {
        IntervalVector(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(
        &self,
        o: &IntervalVector,
        f: impl Fn(Interval, Interval) -> Interval,
    ) -> IntervalVector {
        assert_eq!(self.len(), o.len(), "vector length mismatch");
        IntervalVector(self.0.iter().zip(&o.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, o: &IntervalVector) -> IntervalVector {
        self.zip_map(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &IntervalVector) -> IntervalVector {
        self.zip_map(o, |a, b| a - b)
    }

    pub fn scale(&self, s: Interval) -> IntervalVector {
        self.map(|a| a * s)
    }

    pub fn hull(&self, o: &IntervalVector) -> IntervalVector {
        self.zip_map(o, |a, b| a.hull(b))
    }

    /// `o ⊆ self` componentwise.
    pub fn contains(&self, o: &IntervalVector) -> bool {
        self.len() == o.len() && self.0.iter().zip(&o.0).all(|(a, b)| a.contains_interval(*b))
    }

    /// `o ⊆ int(self)` componentwise.
    pub fn interior_contains(&self, o: &IntervalVector) -> bool {
        self.len() == o.len()
            && self
                .0
                .iter()
                .zip(&o.0)
                .all(|(a, b)| a.interior_contains(*b))
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.len() == x.len() && self.0.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Upper bound on the max-norm.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.mag()))
    }

    /// Largest component width.
    pub fn max_width(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.width()))
    }

    /// Euclidean inner product, enclosed.
    pub fn dot(&self, o: &IntervalVector) -> Interval {
        assert_eq!(self.len(), o.len(), "vector length mismatch");
        self.0.iter().zip(&o.0).map(|(&a, &b)| a * b).sum()
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}

/// Dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntervalMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Interval) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntervalMatrix { rows, cols, data }
    }

    /// Point matrix from row-major floats.
    pub fn from_points(rows: usize, cols: usize, x: &[f64]) -> Self {
        assert_eq!(x.len(), rows * cols, "matrix data length mismatch");
        IntervalMatrix {
            rows,
            cols,
            data: x.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| Interval::point(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Interval] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> IntervalVector {
        IntervalVector::new(self.row(i).to_vec())
    }

    pub fn column(&self, j: usize) -> IntervalVector {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mid(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].mid())
    }

    pub fn transpose(&self) -> IntervalMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Sub-block `rows r0..r1`, `cols c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> IntervalMatrix {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn map(&self, f: impl Fn(Interval) -> Interval) -> IntervalMatrix {
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn add(&self, o: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        IntervalMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Interval) -> IntervalMatrix {
        self.map(|a| a * s)
    }

    pub fn matvec(&self, v: &IntervalVector) -> IntervalVector {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v.iter())
                    .fold(Interval::ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, o: &IntervalMatrix) -> IntervalMatrix {
        assert_eq!(self.cols, o.rows, "matmul shape mismatch");
        let mut out = IntervalMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Interval::ZERO {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o[(k, j)];
                }
            }
        }
        out
    }

    /// Upper bound on the induced max-norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(0.0, |s, x| round::add_up(s, x.mag())))
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// `o ⊆ self` entrywise.
    pub fn contains(&self, o: &IntervalMatrix) -> bool {
        (self.rows, self.cols) == (o.rows, o.cols)
            && self.data.iter().zip(&o.data).all(|(a, b)| a.contains_interval(*b))
    }

    pub fn max_width(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.width()))
    }
}

impl Index<(usize, usize)> for IntervalMatrix {
    type Output = Interval;
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntervalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

/// Enclosure of `M⁻¹` for every point matrix in `m`.
///
/// With `Ĝ` a float inverse of `mid(m)` and `ρ ≥ ‖I − Ĝ·m‖∞` (interval
/// evaluation), `ρ < 1` gives `‖M⁻¹ − Ĝ‖∞ ≤ ‖Ĝ‖∞·ρ/(1−ρ)`, which bounds
/// every entry of the difference.
pub fn verified_inverse(m: &IntervalMatrix) -> Result<IntervalMatrix, IntervalError> {
    assert_eq!(m.rows, m.cols, "verified_inverse needs a square matrix");
    let n = m.rows;
    let approx = m
        .mid()
        .try_inverse()
        .ok_or(IntervalError::InversionFailure { rho: f64::INFINITY })?;
    let g = IntervalMatrix::from_dmatrix(&approx);
    let residual = IntervalMatrix::identity(n).sub(&g.matmul(m));
    let rho = residual.norm_inf();
    if !(rho < 1.0) {
        return Err(IntervalError::InversionFailure { rho });
    }
    let delta = (Interval::point(g.norm_inf()) * rho / (1.0 - Interval::point(rho))).hi();
    Ok(g.map(|x| x.inflate(delta)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_inverse() {
        let m = IntervalMatrix::from_points(1, 1, &[3.0]);
        let g = verified_inverse(&m).unwrap();
        assert!(g[(0, 0)].contains(1.0 / 3.0));
        assert!((g[(0, 0)] * 3.0).contains(1.0));
    }

    #[test]
    fn identity_inverse() {
        let g = verified_inverse(&IntervalMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(g[(i, j)].contains(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn singular_matrix_fails() {
        let m = IntervalMatrix::from_points(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            verified_inverse(&m),
            Err(IntervalError::InversionFailure { .. })
        ));
    }

    #[test]
    fn inverse_times_matrix_contains_identity() {
        let m = IntervalMatrix::from_points(3, 3, &[4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0]);
        let g = verified_inverse(&m).unwrap();
        let p = g.matmul(&m);
        for i in 0..3 {
            for j in 0..3 {
                assert!(p[(i, j)].contains(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }
}
