//! Closed-form hypersurface families with exact charts.
//!
//! Every family carries an analytic chart (through [`AutoDiff`]) and the
//! expected shape operator, normal sign and invariants, so that numerically
//! computed [`ShapeReport`]s can be compared against them.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::immersion::{
    matrix_rows, AutoDiff, DerivPolicy, ImmersionChart, ScalarMap, ShapeReport,
};
use crate::pgeom::JordanTag;
use crate::scalar::Scalar;
use crate::space_form::SpaceForm;

/// Family name plus parameters. This is also the on-disk chart format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `S^m_t(c)` in `S^{m+1}_t`, slice `x_{m+2} = sqrt(1 - 1/c)`, `c >= 1`.
    SmallSphere { m: usize, t: usize, c: f64 },
    /// `S^m_{t-1}(c)` in `S^{m+1}_t`, slice `x_1 = sqrt(1/c - 1)`, `0 < c <= 1`.
    SpacelikeNormalSphere { m: usize, t: usize, c: f64 },
    /// `R^m_{t-1}` in `S^{m+1}_t`, slice `x_1 = x_{m+2} + a`, `a > 0`.
    FlatSlice {
        m: usize,
        t: usize,
        #[serde(default = "default_a")]
        a: f64,
    },
    /// `H^m_{t-1}(c)` in `S^{m+1}_t`, slice `x_{m+2} = sqrt(1 - 1/c)`, `c < 0`.
    HyperbolicSlice { m: usize, t: usize, c: f64 },
    /// `S^k_l(c) x S^{m-k}_{t-l}(c/(c-1))` in `S^{m+1}_t`, `c > 1`.
    Clifford {
        m: usize,
        k: usize,
        l: usize,
        t: usize,
        c: f64,
    },
    /// `S^k_l(c) x H^{m-k}_{t-l-1}(c/(c-1))` in `S^{m+1}_t`, `0 < c < 1`.
    SphereHyperbolicProduct {
        m: usize,
        k: usize,
        l: usize,
        t: usize,
        c: f64,
    },
    /// Flat Lorentzian surface in `H^3_1`, `b^2 - a^2 = 1`, `ab != 0`.
    ComplexCircle { a: f64, b: f64 },
    /// Space-like `H^m(c)` in `H^{m+1}_1`, slice `x_1 = sqrt(1 - 1/|c|)`, `c <= -1`.
    HyperbolicSphere { m: usize, c: f64 },
    /// Space-like `H^1(-c) x H^1(-c/(c-1))` in `H^3_1`, `c > 1`.
    HyperbolicClifford { c: f64 },
    /// B-scroll over the explicit null curve with `k = 1`.
    Bscroll { lambda: f64 },
}

fn default_a() -> f64 {
    1.0
}

/// Expected extrinsic data (the `+` branch of every `±`).
#[derive(Debug, Clone, Serialize)]
pub struct ClosedForm {
    pub epsilon: f64,
    pub ambient_curvature: f64,
    pub m: usize,
    /// Shape operator in a basis where it takes its tabulated form.
    #[serde(serialize_with = "matrix_rows")]
    pub a_matrix: DMatrix<f64>,
    pub tr_a: f64,
    pub tr_a2: f64,
    /// `(1/m) eps tr A`.
    pub f: f64,
    pub jordan: JordanTag,
    pub description: String,
}

impl ClosedForm {
    fn new(
        epsilon: f64,
        ambient_curvature: f64,
        a_matrix: DMatrix<f64>,
        jordan: JordanTag,
        description: String,
    ) -> Self {
        let m = a_matrix.nrows();
        let tr_a = a_matrix.trace();
        let tr_a2 = (&a_matrix * &a_matrix).trace();
        Self {
            epsilon,
            ambient_curvature,
            m,
            tr_a,
            tr_a2,
            f: epsilon * tr_a / m as f64,
            a_matrix,
            jordan,
            description,
        }
    }

    fn diagonal(eps: f64, c: f64, principal: &[f64], description: String) -> Self {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(principal));
        Self::new(eps, c, a, JordanTag::I, description)
    }
}

#[derive(Debug, Clone)]
pub struct CatalogSurface {
    pub name: String,
    pub family: Family,
    pub chart: ImmersionChart,
    pub closed_form: ClosedForm,
}

/// Distance between a numerical report and a closed form. Spectral data is
/// compared through power sums `tr A^j`, `j = 1..m`, minimized over the
/// global sign of `A`, so it does not depend on the tangent frame.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub epsilon_match: bool,
    pub f_error: f64,
    pub tr_a2_error: f64,
    pub spectrum_error: f64,
    pub jordan_match: bool,
}

impl OracleComparison {
    pub fn max_error(&self) -> f64 {
        self.f_error.max(self.tr_a2_error).max(self.spectrum_error)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.epsilon_match && self.jordan_match && self.max_error() <= tol
    }
}

fn power_sums(a: &DMatrix<f64>) -> Vec<f64> {
    let mut p = a.clone();
    let mut out = Vec::with_capacity(a.nrows());
    for _ in 0..a.nrows() {
        out.push(p.trace());
        p = &p * a;
    }
    out
}

pub fn compare(report: &ShapeReport, closed: &ClosedForm) -> OracleComparison {
    let num = power_sums(&report.a_coord);
    let exp = power_sums(&closed.a_matrix);
    let spectrum_error = [1.0, -1.0]
        .iter()
        .map(|s: &f64| {
            num.iter()
                .zip(&exp)
                .enumerate()
                .map(|(j, (x, y))| (x - s.powi(j as i32 + 1) * y).abs())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    OracleComparison {
        epsilon_match: report.epsilon == closed.epsilon,
        f_error: (report.f.abs() - closed.f.abs()).abs(),
        tr_a2_error: (report.tr_a2 - closed.tr_a2).abs(),
        spectrum_error,
        jordan_match: report.jordan.as_ref().map_or(true, |j| j.tag == closed.jordan),
    }
}

impl CatalogSurface {
    pub fn compare_at(&self, u: &[f64]) -> Result<OracleComparison> {
        Ok(compare(&self.chart.shape_report(u)?, &self.closed_form))
    }
}

// ---------------------------------------------------------------------------
// Chart building blocks

/// Round sphere `S^d` of radius one in `R^{d+1}` from `d` hyperspherical angles.
fn euclid_sphere<S: Scalar>(angles: &[S]) -> Vec<S> {
    let d = angles.len();
    let mut out = Vec::with_capacity(d + 1);
    let mut prod = S::from_f64(1.0);
    for a in angles {
        out.push(prod * a.cos());
        prod = prod * a.sin();
    }
    out.push(prod);
    out
}

/// Point of `{<x,x> = radius^2}` in `R^{n+1}_p` (negative coordinates first).
fn pseudo_sphere_point<S: Scalar>(n: usize, p: usize, params: &[S], radius: f64) -> Vec<S> {
    debug_assert_eq!(params.len(), n);
    let pts = if p == 0 {
        euclid_sphere(params)
    } else {
        let rho = params[0];
        let q = euclid_sphere(&params[1..p]);
        let w = euclid_sphere(&params[p..n]);
        let (sh, ch) = (rho.sinh(), rho.cosh());
        q.into_iter().map(|v| sh * v).chain(w.into_iter().map(|v| ch * v)).collect()
    };
    pts.into_iter().map(|v| v.scale(radius)).collect()
}

/// Point of `{<x,x> = -radius^2}` in `R^{n+1}_{p+1}`.
fn pseudo_hyperbolic_point<S: Scalar>(n: usize, p: usize, params: &[S], radius: f64) -> Vec<S> {
    debug_assert_eq!(params.len(), n);
    let pts = if p == n {
        euclid_sphere(params)
    } else {
        let rho = params[0];
        let q = euclid_sphere(&params[1..1 + p]);
        let w = euclid_sphere(&params[1 + p..n]);
        let (sh, ch) = (rho.sinh(), rho.cosh());
        q.into_iter().map(|v| ch * v).chain(w.into_iter().map(|v| sh * v)).collect()
    };
    pts.into_iter().map(|v| v.scale(radius)).collect()
}

#[derive(Debug, Clone, Copy)]
enum Piece {
    /// `S^n_p` of the given radius.
    Sphere { n: usize, p: usize, radius: f64 },
    /// `H^n_p` of the given radius.
    Hyperbolic { n: usize, p: usize, radius: f64 },
}

impl Piece {
    fn dim(&self) -> usize {
        match *self {
            Piece::Sphere { n, .. } | Piece::Hyperbolic { n, .. } => n,
        }
    }

    fn point<S: Scalar>(&self, params: &[S]) -> Vec<S> {
        match *self {
            Piece::Sphere { n, p, radius } => pseudo_sphere_point(n, p, params, radius),
            Piece::Hyperbolic { n, p, radius } => pseudo_hyperbolic_point(n, p, params, radius),
        }
    }
}

/// Quadric pieces placed at given flat coordinates, plus fixed coordinates.
#[derive(Debug, Clone)]
struct ProductMap {
    flat_dim: usize,
    pieces: Vec<(Piece, Vec<usize>)>,
    fixed: Vec<(usize, f64)>,
}

impl ScalarMap for ProductMap {
    fn param_dim(&self) -> usize {
        self.pieces.iter().map(|(p, _)| p.dim()).sum()
    }
    fn flat_dim(&self) -> usize {
        self.flat_dim
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        let mut out = vec![S::from_f64(0.0); self.flat_dim];
        let mut offset = 0;
        for (piece, slots) in &self.pieces {
            let d = piece.dim();
            for (slot, v) in slots.iter().zip(piece.point(&u[offset..offset + d])) {
                out[*slot] = v;
            }
            offset += d;
        }
        for &(i, v) in &self.fixed {
            out[i] = S::from_f64(v);
        }
        out
    }
}

/// `R^m_{t-1}` slice `x_1 = x_{m+2} + a` of the unit `S^{m+1}_t`.
#[derive(Debug, Clone)]
struct FlatSliceMap {
    m: usize,
    t: usize,
    a: f64,
}

impl ScalarMap for FlatSliceMap {
    fn param_dim(&self) -> usize {
        self.m
    }
    fn flat_dim(&self) -> usize {
        self.m + 2
    }
    fn map<S: Scalar>(&self, z: &[S]) -> Vec<S> {
        let mut zz = S::from_f64(0.0);
        for (i, v) in z.iter().enumerate() {
            let sq = *v * *v;
            zz = if i + 1 < self.t { zz - sq } else { zz + sq };
        }
        let w = (zz - S::from_f64(1.0 + self.a * self.a)).scale(0.5 / self.a);
        let mut out = Vec::with_capacity(self.m + 2);
        out.push(w + S::from_f64(self.a));
        out.extend_from_slice(z);
        out.push(w);
        out
    }
}

#[derive(Debug, Clone)]
struct ComplexCircleMap {
    a: f64,
    b: f64,
}

impl ScalarMap for ComplexCircleMap {
    fn param_dim(&self) -> usize {
        2
    }
    fn flat_dim(&self) -> usize {
        4
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        let (a, b) = (self.a, self.b);
        let (cs, sn) = (u[0].cos(), u[0].sin());
        let (ch, sh) = (u[1].cosh(), u[1].sinh());
        vec![
            (cs * ch).scale(b) - (sn * sh).scale(a),
            (cs * sh).scale(a) + (sn * ch).scale(b),
            (cs * ch).scale(a) + (sn * sh).scale(b),
            (cs * sh).scale(b) - (sn * ch).scale(a),
        ]
    }
}

/// Explicit null curve `gamma` and its companion `B` for `k = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BScrollClosedForm {
    pub lambda: f64,
    /// `sqrt(1 + lambda^2) + lambda`.
    pub p: f64,
    /// `sqrt(1 + lambda^2) - lambda`.
    pub q: f64,
}

impl BScrollClosedForm {
    pub fn new(lambda: f64) -> Self {
        let root = (1.0 + lambda * lambda).sqrt();
        Self {
            lambda,
            p: root + lambda,
            q: root - lambda,
        }
    }

    fn trig<S: Scalar>(&self, s: S) -> (S, S, S, S) {
        let (sp, sq) = (self.p.sqrt(), self.q.sqrt());
        let x = s.scale(sq);
        let y = s.scale(sp);
        (x.sin(), x.cos(), y.sinh(), y.cosh())
    }

    pub fn gamma<S: Scalar>(&self, s: S) -> [S; 4] {
        let (p, q) = (self.p, self.q);
        let (sp, sq) = (p.sqrt(), q.sqrt());
        let (sn, cs, sh, ch) = self.trig(s);
        let pq = p + q;
        [
            (sn.scale(sp * (pq - 2.0)) + cs.scale(2.0 * p) + sh.scale(sq * (pq + 2.0)) + ch.scale(2.0 * q))
                .scale(1.0 / (2.0 * pq)),
            (sn.scale(sp * pq) + cs.scale(2.0 * p) + sh.scale(sq * pq) + ch.scale(2.0 * q))
                .scale(1.0 / (2.0 * pq)),
            (sn.scale(-sp) + cs.scale(p) + sh.scale(sq) + ch.scale(q)).scale(1.0 / pq),
            (cs - ch).scale(1.0 / pq),
        ]
    }

    pub fn b<S: Scalar>(&self, s: S) -> [S; 4] {
        let (p, q) = (self.p, self.q);
        let (sp, sq) = (p.sqrt(), q.sqrt());
        let (sn, cs, sh, ch) = self.trig(s);
        let pq = p + q;
        [
            (sn.scale(2.0 * sp) + cs.scale(2.0 - pq) + sh.scale(2.0 * sq) + ch.scale(2.0 + pq)).scale(0.25),
            (sn.scale(2.0 * sp) + sh.scale(2.0 * sq) + (ch - cs).scale(pq)).scale(0.25),
            (sn.scale(2.0 * sp) + sh.scale(2.0 * sq) + ch.scale(2.0) + cs.scale(2.0)).scale(0.25),
            (sn.scale(2.0 * sq) - sh.scale(2.0 * sp)).scale(0.25),
        ]
    }

    /// `gamma'(s)` by forward-mode differentiation.
    pub fn gamma_prime(&self, s: f64) -> [f64; 4] {
        let g = self.gamma(crate::scalar::Jet2::<1>::variable(s, 0));
        [g[0].g[0], g[1].g[0], g[2].g[0], g[3].g[0]]
    }
}

pub fn bscroll_closed_form(lambda: f64) -> BScrollClosedForm {
    BScrollClosedForm::new(lambda)
}

/// `x(s,u) = gamma(s) + u B(s)` for the explicit curve.
#[derive(Debug, Clone)]
struct BScrollMap(BScrollClosedForm);

impl ScalarMap for BScrollMap {
    fn param_dim(&self) -> usize {
        2
    }
    fn flat_dim(&self) -> usize {
        4
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let g = self.0.gamma(x[0]);
        let b = self.0.b(x[0]);
        (0..4).map(|i| g[i] + x[1] * b[i]).collect()
    }
}

// ---------------------------------------------------------------------------
// Constraints

fn require(ok: bool, what: &str, family: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(GeomError::ConstraintViolation(format!("{family}: requires {what}")))
    }
}

/// `(tr A^2, alpha^2)` of the pseudo-Clifford product with parameters `(m, k, c)`.
pub fn clifford_invariants(m: usize, k: usize, c: f64) -> Result<(f64, f64)> {
    require(c > 1.0, "c > 1", "clifford")?;
    require(k >= 1 && k < m, "1 <= k <= m-1", "clifford")?;
    let (mf, kf) = (m as f64, k as f64);
    let tr_a2 = kf * (c - 1.0) + (mf - kf) / (c - 1.0);
    let alpha2 = (c * kf - mf).powi(2) / (mf * mf * (c - 1.0));
    Ok((tr_a2, alpha2))
}

const BOX: (f64, f64) = (0.2, 1.2);

fn chart(ambient: SpaceForm, map: impl crate::immersion::Parametrization + 'static, domain: Vec<(f64, f64)>) -> Result<ImmersionChart> {
    ImmersionChart::new(ambient, Arc::new(map), domain, DerivPolicy::Analytic)
}

/// Index sets of the two quadric factors of a product family.
fn product_slots(m: usize, k: usize, l: usize, t: usize) -> (Vec<usize>, Vec<usize>) {
    let first: Vec<usize> = (0..l).chain(t..=t + k - l).collect();
    let second: Vec<usize> = (l..t).chain(t + k - l + 1..m + 2).collect();
    (first, second)
}

/// Build the chart and closed form of a catalog family.
pub fn table_entry(family: &Family) -> Result<CatalogSurface> {
    let (name, chart, closed) = match *family {
        Family::SmallSphere { m, t, c } => {
            let fam = "small_sphere";
            require(m >= 2, "m >= 2", fam)?;
            require(t <= m, "t <= m", fam)?;
            require(c >= 1.0, "1 <= c", fam)?;
            let ambient = SpaceForm::sphere(m + 1, t, 1.0)?;
            let slots: Vec<usize> = (0..=m).collect();
            let map = ProductMap {
                flat_dim: m + 2,
                pieces: vec![(Piece::Sphere { n: m, p: t, radius: (1.0 / c).sqrt() }, slots)],
                fixed: vec![(m + 1, (1.0 - 1.0 / c).sqrt())],
            };
            (
                format!("S^{m}_{t}({c}) in S^{}_{t}", m + 1),
                chart(ambient, AutoDiff(map), vec![BOX; m])?,
                ClosedForm::diagonal(1.0, 1.0, &vec![(c - 1.0).sqrt(); m], "sqrt(c-1) I".into()),
            )
        }
        Family::SpacelikeNormalSphere { m, t, c } => {
            let fam = "spacelike_normal_sphere";
            require(m >= 2, "m >= 2", fam)?;
            require(t >= 1 && t <= m, "1 <= t <= m", fam)?;
            require(c > 0.0 && c <= 1.0, "0 < c <= 1", fam)?;
            let ambient = SpaceForm::sphere(m + 1, t, 1.0)?;
            let map = ProductMap {
                flat_dim: m + 2,
                pieces: vec![(
                    Piece::Sphere { n: m, p: t - 1, radius: (1.0 / c).sqrt() },
                    (1..m + 2).collect(),
                )],
                fixed: vec![(0, (1.0 / c - 1.0).sqrt())],
            };
            (
                format!("S^{m}_{}({c}) in S^{}_{t}", t - 1, m + 1),
                chart(ambient, AutoDiff(map), vec![BOX; m])?,
                ClosedForm::diagonal(-1.0, 1.0, &vec![(1.0 - c).sqrt(); m], "sqrt(1-c) I".into()),
            )
        }
        Family::FlatSlice { m, t, a } => {
            let fam = "flat_slice";
            require(m >= 2, "m >= 2", fam)?;
            require(t >= 1 && t <= m, "1 <= t <= m", fam)?;
            require(a > 0.0, "a > 0", fam)?;
            let ambient = SpaceForm::sphere(m + 1, t, 1.0)?;
            (
                format!("R^{m}_{} in S^{}_{t}", t - 1, m + 1),
                chart(ambient, AutoDiff(FlatSliceMap { m, t, a }), vec![(-1.0, 1.0); m])?,
                ClosedForm::diagonal(-1.0, 1.0, &vec![1.0; m], "I".into()),
            )
        }
        Family::HyperbolicSlice { m, t, c } => {
            let fam = "hyperbolic_slice";
            require(m >= 2, "m >= 2", fam)?;
            require(t >= 1 && t <= m, "1 <= t <= m", fam)?;
            require(c < 0.0, "c < 0", fam)?;
            let ambient = SpaceForm::sphere(m + 1, t, 1.0)?;
            let map = ProductMap {
                flat_dim: m + 2,
                pieces: vec![(
                    Piece::Hyperbolic { n: m, p: t - 1, radius: (-1.0 / c).sqrt() },
                    (0..=m).collect(),
                )],
                fixed: vec![(m + 1, (1.0 - 1.0 / c).sqrt())],
            };
            (
                format!("H^{m}_{}({c}) in S^{}_{t}", t - 1, m + 1),
                chart(ambient, AutoDiff(map), vec![BOX; m])?,
                ClosedForm::diagonal(-1.0, 1.0, &vec![(1.0 - c).sqrt(); m], "sqrt(1-c) I".into()),
            )
        }
        Family::Clifford { m, k, l, t, c } => {
            let fam = "clifford";
            require(c > 1.0, "c > 1", fam)?;
            require(k >= 1 && k < m, "1 <= k <= m-1", fam)?;
            require(l <= k, "0 <= l <= k", fam)?;
            require(l <= t, "0 <= l <= t", fam)?;
            require(t <= m, "t <= m", fam)?;
            require(t - l <= m - k, "t-l <= m-k", fam)?;
            let ambient = SpaceForm::sphere(m + 1, t, 1.0)?;
            let (first, second) = product_slots(m, k, l, t);
            let map = ProductMap {
                flat_dim: m + 2,
                pieces: vec![
                    (Piece::Sphere { n: k, p: l, radius: (1.0 / c).sqrt() }, first),
                    (Piece::Sphere { n: m - k, p: t - l, radius: ((c - 1.0) / c).sqrt() }, second),
                ],
                fixed: vec![],
            };
            let mut principal = vec![(c - 1.0).sqrt(); k];
            principal.extend(vec![-1.0 / (c - 1.0).sqrt(); m - k]);
            (
                format!("S^{k}_{l}({c}) x S^{}_{}({}) in S^{}_{t}", m - k, t - l, c / (c - 1.0), m + 1),
                chart(ambient, AutoDiff(map), vec![BOX; m])?,
                ClosedForm::diagonal(1.0, 1.0, &principal, "sqrt(c-1) I_k + (-1/sqrt(c-1)) I_(m-k)".into()),
            )
        }
        Family::SphereHyperbolicProduct { m, k, l, t, c } => {
            let fam = "sphere_hyperbolic_product";
            require(c > 0.0 && c < 1.0, "0 < c < 1", fam)?;
            require(k >= 1 && k < m, "1 <= k <= m-1", fam)?;
            require(l <= k, "0 <= l <= k", fam)?;
            require(t >= 1 && l < t, "0 <= l <= t-1", fam)?;
            require(t <= m, "t <= m", fam)?;
            require(t - l - 1 <= m - k, "t-l-1 <= m-k", fam)?;
            let ambient = SpaceForm::sphere(m + 1, t, 1.0)?;
            let (first, second) = product_slots(m, k, l, t);
            let map = ProductMap {
                flat_dim: m + 2,
                pieces: vec![
                    (Piece::Sphere { n: k, p: l, radius: (1.0 / c).sqrt() }, first),
                    (Piece::Hyperbolic { n: m - k, p: t - l - 1, radius: ((1.0 - c) / c).sqrt() }, second),
                ],
                fixed: vec![],
            };
            let mut principal = vec![(1.0 - c).sqrt(); k];
            principal.extend(vec![(1.0 / (1.0 - c)).sqrt(); m - k]);
            (
                format!("S^{k}_{l}({c}) x H^{}_{}({}) in S^{}_{t}", m - k, t - l - 1, c / (c - 1.0), m + 1),
                chart(ambient, AutoDiff(map), vec![BOX; m])?,
                ClosedForm::diagonal(-1.0, 1.0, &principal, "sqrt(1-c) I_k + sqrt(1/(1-c)) I_(m-k)".into()),
            )
        }
        Family::ComplexCircle { a, b } => {
            let fam = "complex_circle";
            require((b * b - a * a - 1.0).abs() <= 1e-12, "b^2 - a^2 = 1", fam)?;
            require(a * b != 0.0, "ab != 0", fam)?;
            let ambient = SpaceForm::hyperbolic(3, 1, -1.0)?;
            let n2 = a * a + b * b;
            let a_matrix = DMatrix::from_row_slice(2, 2, &[2.0 * a * b, 1.0, -1.0, 2.0 * a * b]) / n2;
            (
                format!("complex circle a = {a}, b = {b}"),
                chart(ambient, AutoDiff(ComplexCircleMap { a, b }), vec![(-1.5, 1.5), (-1.0, 1.0)])?,
                ClosedForm::new(1.0, -1.0, a_matrix, JordanTag::IV, "(1/(a^2+b^2)) [[2ab, 1], [-1, 2ab]]".into()),
            )
        }
        Family::HyperbolicSphere { m, c } => {
            let fam = "hyperbolic_sphere";
            require(m >= 2, "m >= 2", fam)?;
            require(c <= -1.0, "c <= -1", fam)?;
            let ambient = SpaceForm::hyperbolic(m + 1, 1, -1.0)?;
            let map = ProductMap {
                flat_dim: m + 2,
                pieces: vec![(
                    Piece::Hyperbolic { n: m, p: 0, radius: (-1.0 / c).sqrt() },
                    (1..m + 2).collect(),
                )],
                fixed: vec![(0, (1.0 + 1.0 / c).sqrt())],
            };
            (
                format!("H^{m}({c}) in H^{}_1", m + 1),
                chart(ambient, AutoDiff(map), vec![BOX; m])?,
                ClosedForm::diagonal(-1.0, -1.0, &vec![(-c - 1.0).sqrt(); m], "sqrt(|c|-1) I".into()),
            )
        }
        Family::HyperbolicClifford { c } => {
            let fam = "hyperbolic_clifford";
            require(c > 1.0, "c > 1", fam)?;
            let ambient = SpaceForm::hyperbolic(3, 1, -1.0)?;
            let map = ProductMap {
                flat_dim: 4,
                pieces: vec![
                    (Piece::Hyperbolic { n: 1, p: 0, radius: (1.0 / c).sqrt() }, vec![0, 2]),
                    (Piece::Hyperbolic { n: 1, p: 0, radius: ((c - 1.0) / c).sqrt() }, vec![1, 3]),
                ],
                fixed: vec![],
            };
            (
                format!("H^1({}) x H^1({}) in H^3_1", -c, -c / (c - 1.0)),
                chart(ambient, AutoDiff(map), vec![(-1.0, 1.0); 2])?,
                ClosedForm::diagonal(
                    -1.0,
                    -1.0,
                    &[(c - 1.0).sqrt(), -1.0 / (c - 1.0).sqrt()],
                    "sqrt(c-1) + (-1/sqrt(c-1))".into(),
                ),
            )
        }
        Family::Bscroll { lambda } => {
            let ambient = SpaceForm::sphere(3, 1, 1.0)?;
            let a_matrix = DMatrix::from_row_slice(2, 2, &[lambda, 0.0, 1.0, lambda]);
            (
                format!("B-scroll lambda = {lambda}, k = 1"),
                chart(
                    ambient,
                    AutoDiff(BScrollMap(BScrollClosedForm::new(lambda))),
                    vec![(-1.0, 2.0), (-0.5, 0.5)],
                )?,
                ClosedForm::new(1.0, 1.0, a_matrix, JordanTag::II, "[[lambda, 0], [k, lambda]]".into()),
            )
        }
    };
    Ok(CatalogSurface {
        name,
        family: family.clone(),
        chart,
        closed_form: closed,
    })
}

/// One representative of every family, used by catalog-wide checks.
pub fn representatives() -> Vec<Family> {
    let a2 = 0.5f64.sqrt() - 0.5;
    vec![
        Family::SmallSphere { m: 2, t: 1, c: 3.0 },
        Family::SmallSphere { m: 3, t: 2, c: 2.5 },
        Family::SpacelikeNormalSphere { m: 2, t: 1, c: 0.5 },
        Family::SpacelikeNormalSphere { m: 3, t: 2, c: 0.3 },
        Family::FlatSlice { m: 2, t: 1, a: 1.0 },
        Family::FlatSlice { m: 3, t: 2, a: 0.7 },
        Family::HyperbolicSlice { m: 2, t: 1, c: -2.0 },
        Family::HyperbolicSlice { m: 3, t: 2, c: -0.5 },
        Family::Clifford { m: 2, k: 1, l: 0, t: 1, c: 3.0 },
        Family::Clifford { m: 2, k: 1, l: 1, t: 1, c: 1.5 },
        Family::Clifford { m: 3, k: 1, l: 1, t: 2, c: 2.5 },
        Family::Clifford { m: 4, k: 2, l: 1, t: 2, c: 5.0f64.sqrt() * 0.5 + 2.5 },
        Family::SphereHyperbolicProduct { m: 2, k: 1, l: 0, t: 1, c: 0.5 },
        Family::SphereHyperbolicProduct { m: 3, k: 2, l: 1, t: 2, c: 0.3 },
        Family::ComplexCircle { a: a2.sqrt(), b: (1.0 + a2).sqrt() },
        Family::ComplexCircle { a: -0.6, b: 1.36f64.sqrt() },
        Family::HyperbolicSphere { m: 2, c: -3.0 },
        Family::HyperbolicClifford { c: 2.5 },
        Family::Bscroll { lambda: 2.0 },
        Family::Bscroll { lambda: -0.5 },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_representative_matches_its_closed_form() {
        for fam in representatives() {
            let s = table_entry(&fam).unwrap();
            for u in s.chart.interior_grid(&vec![3; s.chart.dim()]) {
                let cmp = s.compare_at(&u).unwrap();
                assert!(cmp.passes(1e-8), "{}: {cmp:?} at {u:?}", s.name);
            }
        }
    }

    #[test]
    fn table_signs() {
        let s = table_entry(&Family::SmallSphere { m: 2, t: 1, c: 3.0 }).unwrap();
        assert_eq!(s.closed_form.epsilon, 1.0);
        assert!((s.closed_form.a_matrix[(0, 0)] - 2f64.sqrt()).abs() < 1e-15);
        let f = table_entry(&Family::FlatSlice { m: 2, t: 1, a: 1.0 }).unwrap();
        assert_eq!(f.closed_form.epsilon, -1.0);
        let p = table_entry(&Family::SphereHyperbolicProduct { m: 2, k: 1, l: 0, t: 1, c: 0.5 }).unwrap();
        assert_eq!(p.closed_form.epsilon, -1.0);
        assert!((p.closed_form.a_matrix[(0, 0)] - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((p.closed_form.a_matrix[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constraints_are_named() {
        let e = table_entry(&Family::SmallSphere { m: 2, t: 1, c: 0.5 }).unwrap_err();
        assert!(e.to_string().contains("1 <= c"));
        let e = table_entry(&Family::Clifford { m: 2, k: 1, l: 0, t: 2, c: 3.0 }).unwrap_err();
        assert!(e.to_string().contains("t-l <= m-k"));
        let e = table_entry(&Family::ComplexCircle { a: 1.0, b: 1.0 }).unwrap_err();
        assert!(e.to_string().contains("b^2 - a^2 = 1"));
        assert!(table_entry(&Family::ComplexCircle { a: 0.0, b: 1.0 }).is_err());
    }

    #[test]
    fn clifford_invariant_examples() {
        let (t, a) = clifford_invariants(2, 1, 2.0).unwrap();
        assert!((t - 2.0).abs() < 1e-15 && a.abs() < 1e-15);
        let (t, a) = clifford_invariants(4, 2, 2.0).unwrap();
        assert!((t - 4.0).abs() < 1e-15 && a.abs() < 1e-15);
        let c = (5.0 + 5f64.sqrt()) / 2.0;
        let (_, a) = clifford_invariants(2, 1, c).unwrap();
        assert!((a - (c - 2.0).powi(2) / (4.0 * (c - 1.0))).abs() < 1e-15);
        assert!(clifford_invariants(2, 1, 0.5).is_err());
        assert!(clifford_invariants(2, 2, 3.0).is_err());
    }

    #[test]
    fn complex_circle_lies_in_anti_de_sitter() {
        let a2 = 3f64.sqrt() / 3.0 - 0.5;
        let s = table_entry(&Family::ComplexCircle { a: a2.sqrt(), b: (1.0 + a2).sqrt() }).unwrap();
        let sig = s.chart.signature();
        for u in s.chart.interior_grid(&[5, 5]) {
            let x = s.chart.eval(&u);
            assert!((sig.dot(&x, &x) + 1.0).abs() < 1e-12);
        }
        assert!((s.closed_form.tr_a2 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn bscroll_curve_is_null_with_cartan_pairings() {
        let sig = crate::pgeom::Signature::new(4, 1).unwrap();
        for lambda in [0.0, 2.0, -1.3] {
            let cf = bscroll_closed_form(lambda);
            for i in 0..100 {
                let s = 3.0 * i as f64 / 99.0;
                let g = cf.gamma(s);
                let b = cf.b(s);
                let gp = cf.gamma_prime(s);
                let scale = 1.0 + sig.dot(&g, &g).abs().max(g.iter().map(|v| v * v).sum());
                assert!((sig.dot(&g, &g) - 1.0).abs() < 1e-10 * scale);
                assert!(sig.dot(&gp, &gp).abs() < 1e-10 * scale);
                assert!(sig.dot(&b, &b).abs() < 1e-8 * scale);
                assert!((sig.dot(&gp, &b) + 1.0).abs() < 1e-8 * scale);
            }
        }
        let cf = bscroll_closed_form(0.0);
        assert_eq!(cf.gamma(0.0)[3], 0.0);
        assert_eq!(cf.p, 1.0);
    }

    #[test]
    fn family_documents_are_strict() {
        let f: Family = serde_json::from_str(r#"{"family":"flat_slice","m":2,"t":1}"#).unwrap();
        assert_eq!(f, Family::FlatSlice { m: 2, t: 1, a: 1.0 });
        assert!(serde_json::from_str::<Family>(r#"{"family":"small_sphere","m":2,"t":1,"c":3,"x":1}"#).is_err());
        assert!(serde_json::from_str::<Family>(r#"{"family":"nope"}"#).is_err());
    }
}
