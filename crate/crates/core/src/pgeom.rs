//! Signed linear algebra over pseudo-Euclidean spaces.
//!
//! Inner products of index `t`, orthonormalization of a basis through the
//! eigendecomposition of its Gram matrix, and Jordan-type classification of
//! small shape operators.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Schur};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Default threshold for rank and degeneracy decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Dimension and index of a pseudo-Euclidean space `R^n_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    dim: usize,
    index: usize,
}

impl Signature {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GeomError::Invalid("signature dimension must be positive".into()));
        }
        if index > dim {
            return Err(GeomError::Invalid(format!(
                "signature index {index} exceeds dimension {dim}"
            )));
        }
        Ok(Self { dim, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// `-1` on the first `index` coordinates, `+1` afterwards.
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.index {
            -1.0
        } else {
            1.0
        }
    }

    pub fn signs(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.sign(i)).collect()
    }

    /// Diagonal matrix of the form.
    pub fn metric(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(self.signs()))
    }

    /// `<x, y>` without a dimension check. Callers guarantee matching lengths.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .enumerate()
            .map(|(i, (a, b))| self.sign(i) * a * b)
            .sum()
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }
}

/// `-sum_{i<t} x_i y_i + sum_{i>=t} x_i y_i`.
pub fn pseudo_dot(x: &[f64], y: &[f64], sig: &Signature) -> Result<f64> {
    sig.check(x.len())?;
    sig.check(y.len())?;
    Ok(sig.dot(x, y))
}

/// A pseudo-orthonormal list of vectors, `<e_i, e_j> = signs[i] delta_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub vectors: Vec<Vec<f64>>,
    pub signs: Vec<f64>,
    /// Coefficients expressing the frame in the input basis: `e_k = sum_j coeffs[(j, k)] b_j`.
    #[serde(skip)]
    pub coeffs: DMatrix<f64>,
}

impl Frame {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn negative_count(&self) -> usize {
        self.signs.iter().filter(|s| **s < 0.0).count()
    }

    /// `max_{i,j} |<e_i,e_j> - eps_i delta_ij|`.
    pub fn orthonormality_defect(&self, sig: &Signature) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, ei) in self.vectors.iter().enumerate() {
            for (j, ej) in self.vectors.iter().enumerate() {
                let target = if i == j { self.signs[i] } else { 0.0 };
                worst = worst.max((sig.dot(ei, ej) - target).abs());
            }
        }
        worst
    }
}

/// Gram matrix `G_ij = <b_i, b_j>`.
pub fn gram(basis: &[Vec<f64>], sig: &Signature) -> Result<DMatrix<f64>> {
    for b in basis {
        sig.check(b.len())?;
    }
    let k = basis.len();
    Ok(DMatrix::from_fn(k, k, |i, j| sig.dot(&basis[i], &basis[j])))
}

/// Orthonormalize `basis` with respect to `sig` via the Gram eigendecomposition.
///
/// Frame vectors are ordered by ascending Gram eigenvalue, so negative signs
/// come first. Each eigenvector is normalized so that its largest-magnitude
/// component is positive, which makes the output deterministic.
pub fn orthonormalize(basis: &[Vec<f64>], sig: &Signature, tol: f64) -> Result<Frame> {
    if basis.is_empty() {
        return Err(GeomError::Invalid("cannot orthonormalize an empty basis".into()));
    }
    let g = gram(basis, sig)?;
    let k = basis.len();
    let eig = g.symmetric_eigen();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut coeffs = DMatrix::zeros(k, k);
    let mut vectors = Vec::with_capacity(k);
    let mut signs = Vec::with_capacity(k);
    for (col, &idx) in order.iter().enumerate() {
        let lam = eig.eigenvalues[idx];
        if lam.abs() <= tol {
            return Err(GeomError::DegenerateMetric { eigenvalue: lam, tol });
        }
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v = -v;
        }
        let scale = 1.0 / lam.abs().sqrt();
        let mut e = vec![0.0; sig.dim()];
        for (j, b) in basis.iter().enumerate() {
            let w = v[j] * scale;
            coeffs[(j, col)] = w;
            for (ei, bi) in e.iter_mut().zip(b) {
                *ei += w * bi;
            }
        }
        vectors.push(e);
        signs.push(lam.signum());
    }
    Ok(Frame {
        vectors,
        signs,
        coeffs,
    })
}

/// Jordan canonical type of a self-adjoint operator under an indefinite metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JordanTag {
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JordanType {
    pub tag: JordanTag,
    /// Real eigenvalues with repetition, ascending. Empty real part of a
    /// complex pair is not listed here.
    pub real_eigenvalues: Vec<f64>,
    /// `(a0, b0)` for type IV, with `b0 > 0`.
    pub complex_pair: Option<(f64, f64)>,
    /// Eigenvalue separation fell below `100 * tol`; the decision depends on
    /// the tolerance.
    pub near_degenerate: bool,
}

impl JordanType {
    pub fn is_diagonalizable(&self) -> bool {
        self.tag == JordanTag::I
    }
}

/// Classify an `m x m` operator (`m` in {2, 3}) into Jordan types I-IV.
pub fn classify_operator(a: &DMatrix<f64>, tol: f64) -> Result<JordanType> {
    if a.nrows() != a.ncols() {
        return Err(GeomError::Invalid("operator matrix must be square".into()));
    }
    match a.nrows() {
        2 => Ok(classify2(&Matrix2::from_fn(|i, j| a[(i, j)]), tol)),
        3 => Ok(classify3(&Matrix3::from_fn(|i, j| a[(i, j)]), tol)),
        m => Err(GeomError::UnsupportedDimension(m)),
    }
}

fn classify2(a: &Matrix2<f64>, tol: f64) -> JordanType {
    let scale = 1.0 + a.abs().max();
    let half_tr = 0.5 * (a[(0, 0)] + a[(1, 1)]);
    let half_diff = 0.5 * (a[(0, 0)] - a[(1, 1)]);
    let disc = half_diff * half_diff + a[(0, 1)] * a[(1, 0)];
    let disc_tol = tol * scale * scale;
    let separation = 2.0 * disc.abs().sqrt();
    let near_degenerate = separation < 100.0 * tol * scale;

    if disc < -disc_tol {
        let b0 = (-disc).sqrt();
        return JordanType {
            tag: JordanTag::IV,
            real_eigenvalues: vec![],
            complex_pair: Some((half_tr, b0)),
            near_degenerate,
        };
    }
    if disc > disc_tol {
        let r = disc.sqrt();
        return JordanType {
            tag: JordanTag::I,
            real_eigenvalues: vec![half_tr - r, half_tr + r],
            complex_pair: None,
            near_degenerate,
        };
    }
    let n = a - Matrix2::identity() * half_tr;
    let tag = if n.abs().max() <= tol * scale {
        JordanTag::I
    } else {
        JordanTag::II
    };
    JordanType {
        tag,
        real_eigenvalues: vec![half_tr, half_tr],
        complex_pair: None,
        near_degenerate,
    }
}

fn rank3(n: &Matrix3<f64>, thresh: f64) -> usize {
    n.singular_values().iter().filter(|s| **s > thresh).count()
}

/// Eigenvalues as `(re, im)`. The unbounded Schur iteration behind
/// `Matrix3::complex_eigenvalues` can stall on nearly scalar matrices, so
/// the iteration count is capped and the characteristic cubic is the fallback.
fn eigenvalues3(a: &Matrix3<f64>) -> Vec<(f64, f64)> {
    if let Some(s) = Schur::try_new(*a, f64::EPSILON, 500) {
        return s.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
    }
    cubic_eigenvalues3(a)
}

/// Roots of the characteristic polynomial: bisection for a real root, then
/// the deflated quadratic. Works on the trace-free part so that scalar
/// matrices come out exact.
fn cubic_eigenvalues3(a: &Matrix3<f64>) -> Vec<(f64, f64)> {
    let shift = a.trace() / 3.0;
    let a = &(a - Matrix3::identity() * shift);
    let tr = a.trace();
    let c2 = 0.5 * (tr * tr - (a * a).trace());
    let det = a.determinant();
    // x^3 + p x^2 + q x + r
    let (p, q, r) = (-tr, c2, -det);
    let f = |x: f64| ((x + p) * x + q) * x + r;
    let bound = 1.0 + p.abs().max(q.abs()).max(r.abs());
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x0 = 0.5 * (lo + hi);
    // Deflate to x^2 + b x + c.
    let b = p + x0;
    let c = q + b * x0;
    let disc = 0.25 * b * b - c;
    let mut out = vec![(x0, 0.0)];
    if disc >= 0.0 {
        let s = disc.sqrt();
        out.extend([(-0.5 * b - s, 0.0), (-0.5 * b + s, 0.0)]);
    } else {
        let s = (-disc).sqrt();
        out.extend([(-0.5 * b, -s), (-0.5 * b, s)]);
    }
    out.into_iter().map(|(re, im)| (re + shift, im)).collect()
}

fn classify3(a: &Matrix3<f64>, tol: f64) -> JordanType {
    let scale = 1.0 + a.abs().max();
    let rank_tol = tol * scale;
    // Defective eigenvalues are perturbed by O(eps^(1/k)); cluster with a
    // looser threshold and recover the cluster value from the trace.
    let cluster_tol = tol.sqrt() * scale;
    let mut ev = eigenvalues3(a);
    ev.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));

    let mut min_sep = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let d = ((ev[i].0 - ev[j].0).powi(2) + (ev[i].1 - ev[j].1).powi(2)).sqrt();
            min_sep = min_sep.min(d);
        }
    }
    let near_degenerate = min_sep < 100.0 * tol * scale;
    let trace = a.trace();

    if let Some(pos) = ev.iter().position(|z| z.1.abs() > cluster_tol) {
        let b0 = ev[pos].1.abs();
        let a0 = ev[pos].0;
        let real = trace - 2.0 * a0;
        return JordanType {
            tag: JordanTag::IV,
            real_eigenvalues: vec![real],
            complex_pair: Some((a0, b0)),
            near_degenerate,
        };
    }
    let re: Vec<f64> = ev.iter().map(|z| z.0).collect();
    let close01 = (re[1] - re[0]).abs() <= cluster_tol;
    let close12 = (re[2] - re[1]).abs() <= cluster_tol;
    let id = Matrix3::identity();

    if close01 && close12 {
        let lam = trace / 3.0;
        let n = a - id * lam;
        let tag = match rank3(&n, rank_tol) {
            0 => JordanTag::I,
            1 => JordanTag::II,
            _ => {
                if rank3(&(n * n), rank_tol) == 1 {
                    JordanTag::III
                } else {
                    // Full 3-block with a rank-deficient square does not occur
                    // for self-adjoint operators of index <= 1; report II.
                    JordanTag::II
                }
            }
        };
        return JordanType {
            tag,
            real_eigenvalues: vec![lam; 3],
            complex_pair: None,
            near_degenerate,
        };
    }
    if close01 || close12 {
        let (simple, _) = if close01 { (re[2], re[0]) } else { (re[0], re[2]) };
        let lam = 0.5 * (trace - simple);
        let n = a - id * lam;
        let tag = if rank3(&n, rank_tol) <= 1 {
            JordanTag::I
        } else {
            JordanTag::II
        };
        let mut real = vec![lam, lam, simple];
        real.sort_by(f64::total_cmp);
        return JordanType {
            tag,
            real_eigenvalues: real,
            complex_pair: None,
            near_degenerate,
        };
    }
    JordanType {
        tag: JordanTag::I,
        real_eigenvalues: re,
        complex_pair: None,
        near_degenerate,
    }
}
