//! A small reverse-mode gradient tape over dense matrices.
//!
//! Operators (sparse graph matrices) are borrowed constants; only dense
//! matrices carry gradients. The op set is exactly what the line-graph network
//! and its two losses need.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{Csr, Matrix};
use crate::math::{exp, ln, sqrt};

/// Floor applied inside logarithms of probabilities.
pub const LOG_FLOOR: f64 = 1e-12;

/// Variance offset of [`Tape::normalize`].
pub const NORM_EPS: f64 = 1e-5;

/// Relative variance below which a column counts as constant.
const CONSTANT_SPREAD: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub(crate) usize);

enum Op<'a> {
    Leaf,
    MatMul(Var, Var),
    Sparse(&'a Csr, Var),
    SparseT(&'a Csr, Var),
    RowScale(&'a [f64], Var),
    Sum(Vec<Var>),
    /// ReLU on columns `< split`, identity on the rest.
    SplitRelu(Var, usize),
    /// Per-column centering and scaling over rows.
    Normalize(Var),
    SoftmaxRows(Var),
    /// `a·x + b` elementwise; only the scale matters for gradients.
    Affine(Var, f64),
    Column(Var, usize),
    /// `xᵀ S x` for a column vector `x`; a 1×1 result.
    QuadForm(&'a Csr, Var),
    /// `Σ W ∘ log(max(x, floor))`; a 1×1 result.
    WeightedLog(Var, Matrix),
}

/// Records operations and their values for one backward pass.
pub struct Tape<'a> {
    ops: Vec<Op<'a>>,
    values: Vec<Matrix>,
}

impl Default for Tape<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self { ops: Vec::new(), values: Vec::new() }
    }

    fn push(&mut self, op: Op<'a>, value: Matrix) -> Var {
        self.ops.push(op);
        self.values.push(value);
        Var(self.values.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.values[v.0]
    }

    pub fn scalar(&self, v: Var) -> f64 {
        let m = self.value(v);
        debug_assert_eq!(m.shape(), (1, 1));
        m.data[0]
    }

    pub fn leaf(&mut self, value: Matrix) -> Var {
        self.push(Op::Leaf, value)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).matmul(self.value(b));
        self.push(Op::MatMul(a, b), v)
    }

    pub fn sparse(&mut self, s: &'a Csr, a: Var) -> Var {
        let v = s.mul_dense(self.value(a));
        self.push(Op::Sparse(s, a), v)
    }

    pub fn sparse_t(&mut self, s: &'a Csr, a: Var) -> Var {
        let v = s.t_mul_dense(self.value(a));
        self.push(Op::SparseT(s, a), v)
    }

    pub fn row_scale(&mut self, d: &'a [f64], a: Var) -> Var {
        let mut v = self.value(a).clone();
        for (r, &s) in d.iter().enumerate() {
            v.row_mut(r).iter_mut().for_each(|x| *x *= s);
        }
        self.push(Op::RowScale(d, a), v)
    }

    pub fn sum(&mut self, terms: Vec<Var>) -> Var {
        let mut v = self.value(terms[0]).clone();
        for t in &terms[1..] {
            v.add_assign(self.value(*t));
        }
        self.push(Op::Sum(terms), v)
    }

    pub fn split_relu(&mut self, a: Var, split: usize) -> Var {
        let mut v = self.value(a).clone();
        for r in 0..v.rows {
            for x in &mut v.row_mut(r)[..split] {
                *x = x.max(0.0);
            }
        }
        self.push(Op::SplitRelu(a, split), v)
    }

    pub fn normalize(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut v = x.clone();
        for c in 0..x.cols {
            let (mean, inv) = column_stats(x, c);
            for r in 0..x.rows {
                v.set(r, c, (x.get(r, c) - mean) * inv);
            }
        }
        self.push(Op::Normalize(a), v)
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        for r in 0..v.rows {
            let row = v.row_mut(r);
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for x in row.iter_mut() {
                *x = exp(*x - max);
                z += *x;
            }
            row.iter_mut().for_each(|x| *x /= z);
        }
        self.push(Op::SoftmaxRows(a), v)
    }

    pub fn affine(&mut self, a: Var, scale: f64, shift: f64) -> Var {
        let mut v = self.value(a).clone();
        v.data.iter_mut().for_each(|x| *x = scale * *x + shift);
        self.push(Op::Affine(a, scale), v)
    }

    pub fn column(&mut self, a: Var, c: usize) -> Var {
        let x = self.value(a);
        let v = Matrix::from_vec(x.rows, 1, (0..x.rows).map(|r| x.get(r, c)).collect());
        self.push(Op::Column(a, c), v)
    }

    pub fn quad_form(&mut self, s: &'a Csr, a: Var) -> Var {
        let x = self.value(a);
        debug_assert_eq!(x.cols, 1);
        let sx = s.mul_dense(x);
        let q: f64 = x.data.iter().zip(&sx.data).map(|(p, q)| p * q).sum();
        self.push(Op::QuadForm(s, a), Matrix::from_vec(1, 1, vec![q]))
    }

    pub fn weighted_log(&mut self, a: Var, weights: Matrix) -> Var {
        let x = self.value(a);
        assert_eq!(x.shape(), weights.shape(), "weighted_log shape");
        let s: f64 = x.data.iter().zip(&weights.data).map(|(p, w)| if *w == 0.0 { 0.0 } else { w * ln(p.max(LOG_FLOOR)) }).sum();
        self.push(Op::WeightedLog(a, weights), Matrix::from_vec(1, 1, vec![s]))
    }

    /// Gradients of the scalar `root` with respect to every recorded value.
    /// Entries that do not influence `root` are `None`.
    pub fn backward(&self, root: Var) -> Vec<Option<Matrix>> {
        let mut grads: Vec<Option<Matrix>> = (0..self.values.len()).map(|_| None).collect();
        grads[root.0] = Some(Matrix::filled(1, 1, 1.0));
        for idx in (0..=root.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            match &self.ops[idx] {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Sparse(s, a) => accumulate(&mut grads, *a, s.t_mul_dense(&g)),
                Op::SparseT(s, a) => accumulate(&mut grads, *a, s.mul_dense(&g)),
                Op::RowScale(d, a) => {
                    let mut ga = g.clone();
                    for (r, &s) in d.iter().enumerate() {
                        ga.row_mut(r).iter_mut().for_each(|x| *x *= s);
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Sum(terms) => {
                    for t in terms {
                        accumulate(&mut grads, *t, g.clone());
                    }
                }
                Op::SplitRelu(a, split) => {
                    let x = self.value(*a);
                    let mut ga = g.clone();
                    for r in 0..x.rows {
                        for c in 0..*split {
                            if x.get(r, c) <= 0.0 {
                                ga.set(r, c, 0.0);
                            }
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Normalize(a) => {
                    let x = self.value(*a);
                    let y = &self.values[idx];
                    let rows = x.rows as f64;
                    let mut ga = Matrix::zeros(x.rows, x.cols);
                    for c in 0..x.cols {
                        let (_, inv) = column_stats(x, c);
                        let mean_g = (0..x.rows).map(|r| g.get(r, c)).sum::<f64>() / rows;
                        let mean_gy = (0..x.rows).map(|r| g.get(r, c) * y.get(r, c)).sum::<f64>() / rows;
                        for r in 0..x.rows {
                            ga.set(r, c, inv * (g.get(r, c) - mean_g - y.get(r, c) * mean_gy));
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::SoftmaxRows(a) => {
                    let y = &self.values[idx];
                    let mut ga = Matrix::zeros(y.rows, y.cols);
                    for r in 0..y.rows {
                        let yr = y.row(r);
                        let gr = g.row(r);
                        let inner: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                        for (c, out) in ga.row_mut(r).iter_mut().enumerate() {
                            *out = yr[c] * (gr[c] - inner);
                        }
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::Affine(a, scale) => {
                    let mut ga = g.clone();
                    ga.scale(*scale);
                    accumulate(&mut grads, *a, ga);
                }
                Op::Column(a, c) => {
                    let x = self.value(*a);
                    let mut ga = Matrix::zeros(x.rows, x.cols);
                    for r in 0..x.rows {
                        ga.set(r, *c, g.data[r]);
                    }
                    accumulate(&mut grads, *a, ga);
                }
                Op::QuadForm(s, a) => {
                    // d(xᵀSx)/dx = (S + Sᵀ)x.
                    let x = self.value(*a);
                    let mut ga = s.mul_dense(x);
                    ga.add_assign(&s.t_mul_dense(x));
                    ga.scale(g.data[0]);
                    accumulate(&mut grads, *a, ga);
                }
                Op::WeightedLog(a, w) => {
                    let x = self.value(*a);
                    let data = x
                        .data
                        .iter()
                        .zip(&w.data)
                        .map(|(p, wv)| if *wv == 0.0 || *p < LOG_FLOOR { 0.0 } else { g.data[0] * wv / p })
                        .collect();
                    accumulate(&mut grads, *a, Matrix::from_vec(x.rows, x.cols, data));
                }
            }
            grads[idx] = Some(g);
        }
        grads
    }
}

/// Column mean and inverse scale. Columns whose spread is at roundoff level
/// are treated as exactly constant: they normalize to zero and pass no
/// gradient (an inverse scale of 0).
fn column_stats(x: &Matrix, c: usize) -> (f64, f64) {
    let rows = x.rows as f64;
    let mean = (0..x.rows).map(|r| x.get(r, c)).sum::<f64>() / rows;
    let var = (0..x.rows).map(|r| (x.get(r, c) - mean) * (x.get(r, c) - mean)).sum::<f64>() / rows;
    if var <= CONSTANT_SPREAD * (1.0 + mean * mean) {
        (mean, 0.0)
    } else {
        (mean, 1.0 / sqrt(var + NORM_EPS))
    }
}

fn accumulate(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot => *slot = Some(g),
    }
}
