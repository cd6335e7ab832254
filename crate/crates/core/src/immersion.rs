//! Extrinsic geometry of a parametrized hypersurface patch.
//!
//! A chart maps `u in R^m` to flat coordinates of the ambient space form.
//! From the first and second derivatives of the map we build the induced
//! metric, the unit normal, the second fundamental form and the shape
//! operator `A = g^{-1} h`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{GeomError, Result};
use crate::pgeom::{classify_operator, orthonormalize, Frame, JordanType, Signature, DEFAULT_TOL};
use crate::scalar::{Jet2, Scalar};
use crate::space_form::SpaceForm;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Point value with first and second partial derivatives of a chart map.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub point: Vec<f64>,
    /// `first[i]` is `d_i x`.
    pub first: Vec<Vec<f64>>,
    /// `second[i][j]` is `d_i d_j x`.
    pub second: Vec<Vec<Vec<f64>>>,
}

/// Object-safe map `u -> x(u)` into flat coordinates.
pub trait Parametrization: Send + Sync {
    fn param_dim(&self) -> usize;
    fn flat_dim(&self) -> usize;
    fn eval(&self, u: &[f64]) -> Vec<f64>;
    /// Exact derivatives when the map can provide them.
    fn jet(&self, _u: &[f64]) -> Option<Jet> {
        None
    }
}

/// A map written generically over [`Scalar`], so it can be evaluated on
/// second-order jets.
pub trait ScalarMap: Send + Sync {
    fn param_dim(&self) -> usize;
    fn flat_dim(&self) -> usize;
    fn map<S: Scalar>(&self, u: &[S]) -> Vec<S>;
}

/// Adapter giving a [`ScalarMap`] exact derivatives through [`Jet2`].
#[derive(Debug, Clone)]
pub struct AutoDiff<M>(pub M);

fn jet_n<const N: usize, M: ScalarMap>(map: &M, u: &[f64]) -> Jet {
    let vars: Vec<Jet2<N>> = (0..N).map(|i| Jet2::variable(u[i], i)).collect();
    let out = map.map(&vars);
    Jet {
        point: out.iter().map(|c| c.v).collect(),
        first: (0..N).map(|i| out.iter().map(|c| c.g[i]).collect()).collect(),
        second: (0..N)
            .map(|i| {
                (0..N)
                    .map(|j| out.iter().map(|c| c.h[i][j]).collect())
                    .collect()
            })
            .collect(),
    }
}

impl<M: ScalarMap> Parametrization for AutoDiff<M> {
    fn param_dim(&self) -> usize {
        self.0.param_dim()
    }
    fn flat_dim(&self) -> usize {
        self.0.flat_dim()
    }
    fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.0.map(u)
    }
    fn jet(&self, u: &[f64]) -> Option<Jet> {
        Some(match self.0.param_dim() {
            1 => jet_n::<1, M>(&self.0, u),
            2 => jet_n::<2, M>(&self.0, u),
            3 => jet_n::<3, M>(&self.0, u),
            4 => jet_n::<4, M>(&self.0, u),
            5 => jet_n::<5, M>(&self.0, u),
            6 => jet_n::<6, M>(&self.0, u),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivPolicy {
    /// Use the chart's exact derivatives.
    Analytic,
    /// Second-order central differences with step `h`.
    CentralDifference { h: f64 },
}

/// Which of the two unit normals is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalOrientation {
    /// First component of `eta` with magnitude above `1e-9 |eta|` is positive.
    #[default]
    Canonical,
    Reversed,
}

/// A parametrized hypersurface patch in a space form.
#[derive(Clone)]
pub struct ImmersionChart {
    ambient: SpaceForm,
    map: Arc<dyn Parametrization>,
    domain: Vec<(f64, f64)>,
    policy: DerivPolicy,
}

impl fmt::Debug for ImmersionChart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImmersionChart")
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .field("policy", &self.policy)
            .finish()
    }
}

/// Metric, normal and second fundamental form at a point.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    pub jet: Jet,
    /// `g_ij = <d_i x, d_j x>`.
    pub g: DMatrix<f64>,
    /// `h_ij = <d_i d_j x, eta>`.
    pub h: DMatrix<f64>,
    pub frame: Frame,
    pub normal: Vec<f64>,
    pub epsilon: f64,
    pub orientation: NormalOrientation,
    /// Index of the flat component used to fix the canonical orientation.
    pub reference_component: usize,
}

/// Shape operator and its invariants at a point.
#[derive(Debug, Clone, Serialize)]
pub struct ShapeReport {
    pub point: Vec<f64>,
    pub frame_signs: Vec<f64>,
    pub epsilon: f64,
    pub normal: Vec<f64>,
    pub orientation: NormalOrientation,
    pub reference_component: usize,
    /// Shape matrix in the pseudo-orthonormal frame.
    #[serde(serialize_with = "matrix_rows")]
    pub a_matrix: DMatrix<f64>,
    /// Mixed shape matrix `g^{-1} h` in the coordinate basis.
    #[serde(serialize_with = "matrix_rows")]
    pub a_coord: DMatrix<f64>,
    pub f: f64,
    pub tr_a: f64,
    pub tr_a2: f64,
    pub det_a: f64,
    /// `eps det A + c`, surfaces only.
    pub gauss_curvature: Option<f64>,
    /// `max |<A e_i, e_j> - <e_i, A e_j>|`.
    pub self_adjoint_residual: f64,
    /// Jordan type of the frame matrix; `None` when `m > 3`.
    pub jordan: Option<JordanType>,
}

pub fn matrix_rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect();
    rows.serialize(s)
}

/// Options for [`ImmersionChart::shape_report_with`].
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub tol: f64,
    pub orientation: NormalOrientation,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            orientation: NormalOrientation::Canonical,
        }
    }
}

impl ImmersionChart {
    pub fn new(
        ambient: SpaceForm,
        map: Arc<dyn Parametrization>,
        domain: Vec<(f64, f64)>,
        policy: DerivPolicy,
    ) -> Result<Self> {
        let m = ambient.dim() - 1;
        if map.param_dim() != m {
            return Err(GeomError::DimensionMismatch {
                expected: m,
                got: map.param_dim(),
            });
        }
        let n = ambient.flat_model().dim();
        if map.flat_dim() != n {
            return Err(GeomError::DimensionMismatch {
                expected: n,
                got: map.flat_dim(),
            });
        }
        if domain.len() != m || domain.iter().any(|(a, b)| !(a < b)) {
            return Err(GeomError::Invalid(format!(
                "domain must be {m} non-empty intervals"
            )));
        }
        if let DerivPolicy::CentralDifference { h } = policy {
            if !(h > 0.0) {
                return Err(GeomError::Invalid("finite-difference step must be positive".into()));
            }
        }
        let chart = Self {
            ambient,
            map,
            domain,
            policy,
        };
        if !ambient.is_flat() {
            let center = chart.center();
            let x = chart.map.eval(&center);
            let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>();
            let h = match policy {
                DerivPolicy::CentralDifference { h } => h,
                DerivPolicy::Analytic => DEFAULT_FD_STEP,
            };
            if !ambient.contains(&x, 10.0 * h * h * scale) {
                return Err(GeomError::ConstraintViolation(format!(
                    "chart image at the domain center is not on the space form (x = {x:?})"
                )));
            }
        }
        Ok(chart)
    }

    pub fn ambient(&self) -> SpaceForm {
        self.ambient
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn policy(&self) -> DerivPolicy {
        self.policy
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn signature(&self) -> Signature {
        self.ambient.flat_model()
    }

    pub fn with_policy(&self, policy: DerivPolicy) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        self.map.eval(u)
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Uniform grid with `n[i]` points per axis, inset by 10% of each interval.
    pub fn interior_grid(&self, n: &[usize]) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .domain
            .iter()
            .zip(n)
            .map(|(&(a, b), &k)| {
                let lo = a + 0.1 * (b - a);
                let hi = b - 0.1 * (b - a);
                if k <= 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..k)
                        .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let mut pts = vec![vec![]];
        for axis in &axes {
            let mut next = Vec::with_capacity(pts.len() * axis.len());
            for p in &pts {
                for v in axis {
                    let mut q = p.clone();
                    q.push(*v);
                    next.push(q);
                }
            }
            pts = next;
        }
        pts
    }

    fn check_point(&self, u: &[f64], margin: f64) -> Result<()> {
        if u.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                got: u.len(),
            });
        }
        let inside = u
            .iter()
            .zip(&self.domain)
            .all(|(v, (a, b))| *v - margin >= *a && *v + margin <= *b);
        if inside {
            Ok(())
        } else {
            Err(GeomError::OutsideDomain(u.to_vec()))
        }
    }

    /// Point, first and second derivatives according to the chart policy.
    pub fn derivatives(&self, u: &[f64]) -> Result<Jet> {
        match self.policy {
            DerivPolicy::Analytic => {
                self.check_point(u, 0.0)?;
                self.map.jet(u).ok_or(GeomError::MissingDerivatives)
            }
            DerivPolicy::CentralDifference { h } => {
                self.check_point(u, 2.0 * h)?;
                Ok(self.fd_jet(u, h))
            }
        }
    }

    fn fd_jet(&self, u: &[f64], h: f64) -> Jet {
        let m = self.dim();
        let at = |shift: &[(usize, f64)]| {
            let mut v = u.to_vec();
            for &(i, d) in shift {
                v[i] += d;
            }
            self.map.eval(&v)
        };
        let point = self.map.eval(u);
        let n = point.len();
        let mut first = vec![vec![0.0; n]; m];
        let mut second = vec![vec![vec![0.0; n]; m]; m];
        for i in 0..m {
            let p = at(&[(i, h)]);
            let q = at(&[(i, -h)]);
            for k in 0..n {
                first[i][k] = (p[k] - q[k]) / (2.0 * h);
                second[i][i][k] = (p[k] - 2.0 * point[k] + q[k]) / (h * h);
            }
            for j in (i + 1)..m {
                let pp = at(&[(i, h), (j, h)]);
                let pm = at(&[(i, h), (j, -h)]);
                let mp = at(&[(i, -h), (j, h)]);
                let mm = at(&[(i, -h), (j, -h)]);
                for k in 0..n {
                    let v = (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h);
                    second[i][j][k] = v;
                    second[j][i][k] = v;
                }
            }
        }
        Jet {
            point,
            first,
            second,
        }
    }

    pub fn fundamental_data(&self, u: &[f64]) -> Result<FundamentalData> {
        self.fundamental_data_with(u, &ReportOptions::default())
    }

    pub fn fundamental_data_with(&self, u: &[f64], opts: &ReportOptions) -> Result<FundamentalData> {
        let jet = self.derivatives(u)?;
        let sig = self.signature();
        let m = self.dim();
        let n = sig.dim();

        let g = DMatrix::from_fn(m, m, |i, j| sig.dot(&jet.first[i], &jet.first[j]));
        let frame = orthonormalize(&jet.first, &sig, opts.tol)?;

        // eta spans the <,>-orthogonal complement of the tangents (and of the
        // position when c != 0): the kernel of rows w^T E.
        let mut rows: Vec<&Vec<f64>> = jet.first.iter().collect();
        if !self.ambient.is_flat() {
            rows.push(&jet.point);
        }
        let mut constraint = DMatrix::zeros(n, n);
        for (r, w) in rows.iter().enumerate() {
            let scale = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            for k in 0..n {
                constraint[(r, k)] = sig.sign(k) * w[k] / scale;
            }
        }
        let svd = constraint.svd(false, true);
        let v_t = svd.v_t.expect("requested V^T");
        let smallest = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty spectrum");
        let raw: Vec<f64> = v_t.row(smallest).iter().copied().collect();
        let nn = sig.dot(&raw, &raw);
        if nn.abs() <= opts.tol.max(1e-12) {
            return Err(GeomError::NormalNotFound { norm: nn });
        }
        let scale = 1.0 / nn.abs().sqrt();
        let mut normal: Vec<f64> = raw.iter().map(|v| v * scale).collect();
        let epsilon = nn.signum();

        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        let reference_component = normal
            .iter()
            .position(|v| v.abs() > 1e-9 * norm)
            .unwrap_or(0);
        let mut flip = normal[reference_component] < 0.0;
        if opts.orientation == NormalOrientation::Reversed {
            flip = !flip;
        }
        if flip {
            normal.iter_mut().for_each(|v| *v = -*v);
        }

        let h = DMatrix::from_fn(m, m, |i, j| sig.dot(&jet.second[i][j], &normal));
        Ok(FundamentalData {
            jet,
            g,
            h,
            frame,
            normal,
            epsilon,
            orientation: opts.orientation,
            reference_component,
        })
    }

    pub fn shape_report(&self, u: &[f64]) -> Result<ShapeReport> {
        self.shape_report_with(u, &ReportOptions::default())
    }

    pub fn shape_report_with(&self, u: &[f64], opts: &ReportOptions) -> Result<ShapeReport> {
        let fd = self.fundamental_data_with(u, opts)?;
        let m = self.dim();
        let g_inv = fd
            .g
            .clone()
            .try_inverse()
            .ok_or(GeomError::DegenerateMetric {
                eigenvalue: 0.0,
                tol: opts.tol,
            })?;
        let a_coord = &g_inv * &fd.h;
        let p = &fd.frame.coeffs;
        let p_inv = p.clone().try_inverse().ok_or(GeomError::DegenerateMetric {
            eigenvalue: 0.0,
            tol: opts.tol,
        })?;
        let a_matrix = &p_inv * &a_coord * p;

        let tr_a = a_coord.trace();
        let tr_a2 = (&a_coord * &a_coord).trace();
        let det_a = a_coord.determinant();
        let f = fd.epsilon * tr_a / m as f64;
        let signs = &fd.frame.signs;
        let mut self_adjoint_residual: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let lhs = signs[j] * a_matrix[(j, i)];
                let rhs = signs[i] * a_matrix[(i, j)];
                self_adjoint_residual = self_adjoint_residual.max((lhs - rhs).abs());
            }
        }
        let jordan = if m == 2 || m == 3 {
            Some(classify_operator(&a_matrix, opts.tol)?)
        } else {
            None
        };
        let gauss_curvature = (m == 2).then(|| fd.epsilon * det_a + self.ambient.curvature());
        Ok(ShapeReport {
            point: u.to_vec(),
            frame_signs: fd.frame.signs.clone(),
            epsilon: fd.epsilon,
            normal: fd.normal,
            orientation: fd.orientation,
            reference_component: fd.reference_component,
            a_matrix,
            a_coord,
            f,
            tr_a,
            tr_a2,
            det_a,
            gauss_curvature,
            self_adjoint_residual,
            jordan,
        })
    }

    /// Christoffel symbols `Gamma[l][i][j]` of the induced metric.
    pub fn christoffel(jet: &Jet, g_inv: &DMatrix<f64>, sig: &Signature) -> Vec<Vec<Vec<f64>>> {
        let m = jet.first.len();
        let mut first_kind = vec![vec![vec![0.0; m]; m]; m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    first_kind[i][j][k] = sig.dot(&jet.second[i][j], &jet.first[k]);
                }
            }
        }
        let mut out = vec![vec![vec![0.0; m]; m]; m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    out[l][i][j] = (0..m).map(|k| g_inv[(l, k)] * first_kind[i][j][k]).sum();
                }
            }
        }
        out
    }

    /// Coordinate components of `trace(nabla A) - m eps grad f`, with the
    /// derivatives of `A` and `f` taken by central differences of step `h_outer`.
    pub fn codazzi_trace_residual(&self, u: &[f64], h_outer: f64) -> Result<Vec<f64>> {
        let m = self.dim();
        let inner_margin = match self.policy {
            DerivPolicy::CentralDifference { h } => 2.0 * h,
            DerivPolicy::Analytic => 0.0,
        };
        self.check_point(u, h_outer + inner_margin)?;
        let center = self.shape_report(u)?;
        let fd = self.fundamental_data(u)?;
        let g_inv = fd.g.clone().try_inverse().ok_or(GeomError::DegenerateMetric {
            eigenvalue: 0.0,
            tol: DEFAULT_TOL,
        })?;
        let gamma = Self::christoffel(&fd.jet, &g_inv, &self.signature());

        let mut d_a = Vec::with_capacity(m);
        let mut d_f = DVector::zeros(m);
        for i in 0..m {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[i] += h_outer;
            dn[i] -= h_outer;
            let rp = self.shape_report(&up)?;
            let rm = self.shape_report(&dn)?;
            if rp.epsilon != center.epsilon || rm.epsilon != center.epsilon {
                return Err(GeomError::Invalid("normal causal character changes within stencil".into()));
            }
            // Keep the orientation consistent with the center point.
            let sp = orientation_sign(&rp.normal, &center.normal);
            let sm = orientation_sign(&rm.normal, &center.normal);
            d_a.push((&rp.a_coord * sp - &rm.a_coord * sm) / (2.0 * h_outer));
            d_f[i] = (rp.f * sp - rm.f * sm) / (2.0 * h_outer);
        }

        let a = &center.a_coord;
        let mut trace_vec = vec![0.0; m];
        for (k, tv) in trace_vec.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let mut cov = d_a[i][(k, j)];
                    for l in 0..m {
                        cov += gamma[k][i][l] * a[(l, j)] - gamma[l][i][j] * a[(k, l)];
                    }
                    acc += g_inv[(i, j)] * cov;
                }
            }
            *tv = acc;
        }
        let grad_f = &g_inv * d_f;
        let scale = m as f64 * center.epsilon;
        Ok((0..m).map(|k| trace_vec[k] - scale * grad_f[k]).collect())
    }
}

fn orientation_sign(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    if d < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Chart given by one expression per flat coordinate.
#[derive(Debug, Clone)]
pub struct ExprMap {
    pub exprs: Vec<crate::expr::Expr>,
    pub vars: usize,
}

impl ScalarMap for ExprMap {
    fn param_dim(&self) -> usize {
        self.vars
    }
    fn flat_dim(&self) -> usize {
        self.exprs.len()
    }
    fn map<S: Scalar>(&self, u: &[S]) -> Vec<S> {
        self.exprs.iter().map(|e| e.eval(u)).collect()
    }
}

impl ExprMap {
    pub fn parse(coords: &[String], vars: &[String]) -> Result<Self> {
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let exprs = coords
            .iter()
            .map(|c| crate::expr::Expr::parse(c, &names))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            exprs,
            vars: vars.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `S^2_1(c)` as the slice `x_4 = sqrt(1 - 1/c)` of `S^3_1`.
    struct SmallSphere21 {
        c: f64,
    }

    impl ScalarMap for SmallSphere21 {
        fn param_dim(&self) -> usize {
            2
        }
        fn flat_dim(&self) -> usize {
            4
        }
        fn map<S: Scalar>(&self, u: &[S]) -> Vec<S> {
            let r = (1.0 / self.c).sqrt();
            let (v, th) = (u[0], u[1]);
            vec![
                v.sinh().scale(r),
                (v.cosh() * th.cos()).scale(r),
                (v.cosh() * th.sin()).scale(r),
                S::from_f64((1.0 - 1.0 / self.c).sqrt()),
            ]
        }
    }

    fn sphere_chart(c: f64, policy: DerivPolicy) -> ImmersionChart {
        ImmersionChart::new(
            SpaceForm::sphere(3, 1, 1.0).unwrap(),
            Arc::new(AutoDiff(SmallSphere21 { c })),
            vec![(-1.0, 1.0), (-2.0, 2.0)],
            policy,
        )
        .unwrap()
    }

    #[test]
    fn small_sphere_second_form_is_proportional_to_metric() {
        let chart = sphere_chart(3.0, DerivPolicy::Analytic);
        let fd = chart.fundamental_data(&[0.3, 0.4]).unwrap();
        assert_eq!(fd.epsilon, 1.0);
        let k = 2f64.sqrt();
        let ratio = fd.h[(0, 0)] / fd.g[(0, 0)];
        assert!((ratio.abs() - k).abs() < 1e-12);
        for i in 0..2 {
            for j in 0..2 {
                assert!((fd.h[(i, j)] - ratio * fd.g[(i, j)]).abs() < 1e-12);
            }
        }
        let sig = chart.signature();
        for t in &fd.jet.first {
            assert!(sig.dot(t, &fd.normal).abs() < 1e-12);
        }
        assert!(sig.dot(&fd.jet.point, &fd.normal).abs() < 1e-12);
    }

    #[test]
    fn equator_is_totally_geodesic() {
        let chart = sphere_chart(1.0, DerivPolicy::Analytic);
        let fd = chart.fundamental_data(&[0.2, -0.5]).unwrap();
        assert!(fd.h.abs().max() < 1e-14);
    }

    #[test]
    fn report_fields_are_consistent_under_both_orientations() {
        let chart = sphere_chart(3.0, DerivPolicy::Analytic);
        let u = [0.1, 0.7];
        let a = chart.shape_report(&u).unwrap();
        let b = chart
            .shape_report_with(
                &u,
                &ReportOptions {
                    orientation: NormalOrientation::Reversed,
                    ..Default::default()
                },
            )
            .unwrap();
        assert!((a.f - a.epsilon * a.tr_a / 2.0).abs() < 1e-14);
        assert!((a.f + b.f).abs() < 1e-12);
        assert!((a.tr_a2 - b.tr_a2).abs() < 1e-12);
        assert_eq!(a.epsilon, b.epsilon);
        assert!((&a.a_matrix + &b.a_matrix).abs().max() < 1e-12);
        assert!((a.tr_a2 - 4.0).abs() < 1e-12);
        assert!((a.f.abs() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.jordan.as_ref().unwrap().tag, crate::pgeom::JordanTag::I);
        assert!((a.gauss_curvature.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn finite_differences_agree_with_jets() {
        let exact = sphere_chart(3.0, DerivPolicy::Analytic);
        let approx = exact.with_policy(DerivPolicy::CentralDifference { h: DEFAULT_FD_STEP });
        let u = [0.2, 0.3];
        let a = exact.shape_report(&u).unwrap();
        let b = approx.shape_report(&u).unwrap();
        assert!((a.tr_a2 - b.tr_a2).abs() < 1e-4);
        assert!((a.f - b.f).abs() < 1e-4);
    }

    #[test]
    fn domain_and_dimension_errors() {
        let chart = sphere_chart(3.0, DerivPolicy::Analytic);
        assert!(matches!(
            chart.shape_report(&[5.0, 0.0]),
            Err(GeomError::OutsideDomain(_))
        ));
        assert!(matches!(
            chart.shape_report(&[0.0]),
            Err(GeomError::DimensionMismatch { .. })
        ));
        let bad = ImmersionChart::new(
            SpaceForm::sphere(4, 1, 1.0).unwrap(),
            Arc::new(AutoDiff(SmallSphere21 { c: 3.0 })),
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            DerivPolicy::Analytic,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn off_manifold_chart_is_rejected() {
        struct Off;
        impl ScalarMap for Off {
            fn param_dim(&self) -> usize {
                2
            }
            fn flat_dim(&self) -> usize {
                4
            }
            fn map<S: Scalar>(&self, u: &[S]) -> Vec<S> {
                vec![u[0], u[1], S::from_f64(2.0), S::from_f64(0.0)]
            }
        }
        let r = ImmersionChart::new(
            SpaceForm::sphere(3, 1, 1.0).unwrap(),
            Arc::new(AutoDiff(Off)),
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            DerivPolicy::Analytic,
        );
        assert!(matches!(r, Err(GeomError::ConstraintViolation(_))));
    }

    #[test]
    fn null_hypersurface_is_rejected() {
        // Light-like plane x_0 = x_1 in R^3_1.
        struct NullPlane;
        impl ScalarMap for NullPlane {
            fn param_dim(&self) -> usize {
                2
            }
            fn flat_dim(&self) -> usize {
                3
            }
            fn map<S: Scalar>(&self, u: &[S]) -> Vec<S> {
                vec![u[0], u[0], u[1]]
            }
        }
        let chart = ImmersionChart::new(
            SpaceForm::flat(3, 1).unwrap(),
            Arc::new(AutoDiff(NullPlane)),
            vec![(-1.0, 1.0), (-1.0, 1.0)],
            DerivPolicy::Analytic,
        )
        .unwrap();
        assert!(matches!(
            chart.shape_report(&[0.0, 0.0]),
            Err(GeomError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn grid_is_interior() {
        let chart = sphere_chart(3.0, DerivPolicy::Analytic);
        let g = chart.interior_grid(&[3, 4]);
        assert_eq!(g.len(), 12);
        assert!(g.iter().all(|p| p[0] > -1.0 && p[0] < 1.0 && p[1] > -2.0 && p[1] < 2.0));
    }
}
