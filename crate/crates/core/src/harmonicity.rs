//! r-harmonicity of CMC hypersurfaces with constant `tr A^2`.
//!
//! All scalar criteria take `(m, c, eps, alpha, tr A^2, r)`; the chart-based
//! field residuals for `r = 3` sample an [`ImmersionChart`].

use serde::{Deserialize, Serialize};

use crate::catalog::{table_entry, ClosedForm, Family};
use crate::error::{GeomError, Result};
use crate::immersion::{ImmersionChart, ShapeReport};
use crate::pgeom::{Signature, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicityInput {
    pub m: usize,
    /// Ambient curvature.
    pub c: f64,
    pub epsilon: f64,
    /// Constant mean curvature.
    pub alpha: f64,
    pub tr_a2: f64,
    pub r: usize,
}

impl HarmonicityInput {
    pub fn new(m: usize, c: f64, epsilon: f64, alpha: f64, tr_a2: f64, r: usize) -> Self {
        Self {
            m,
            c,
            epsilon,
            alpha,
            tr_a2,
            r,
        }
    }

    pub fn from_closed_form(cf: &ClosedForm, r: usize) -> Self {
        Self::new(cf.m, cf.ambient_curvature, cf.epsilon, cf.f, cf.tr_a2, r)
    }

    pub fn from_report(report: &ShapeReport, ambient_curvature: f64, r: usize) -> Self {
        Self::new(
            report.a_coord.nrows(),
            ambient_curvature,
            report.epsilon,
            report.f,
            report.tr_a2,
            r,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Minimal,
    ProperRHarmonic,
    NotRHarmonic,
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    TrA2Zero,
    MainEquation,
    Biharmonic,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Flags {
    /// `eps = -1`, `c >= 0`, `r >= 3`: a space-like CMC hypersurface with
    /// constant `tr A^2` must be minimal.
    pub space_like_rigid: bool,
    /// `tr A^2 > 0` and `eps c < 0`: must be minimal.
    pub sign_obstruction: bool,
    /// Verdict is proper but the closed tension coefficient does not vanish.
    /// Happens on the `tr A^2 = 0` branch at `r = 3`.
    pub tension_mismatch: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicityReport {
    pub input: HarmonicityInput,
    pub tol: f64,
    pub residual_biharmonic: f64,
    pub residual_tr_a2: f64,
    pub residual_main: f64,
    /// `tau_r / m` along the unit normal.
    pub tension: f64,
    pub verdict: Verdict,
    pub active_branch: Branch,
    pub flags: Flags,
}

/// `eps tr A^2 - m c`.
pub fn biharmonic_residual(input: &HarmonicityInput) -> f64 {
    input.epsilon * input.tr_a2 - input.m as f64 * input.c
}

/// `(tr A^2, eps (tr A^2)^2 - m c tr A^2 - (r-2) m^2 c alpha^2)`.
pub fn r_harmonic_residuals(input: &HarmonicityInput) -> (f64, f64) {
    let m = input.m as f64;
    let t = input.tr_a2;
    let main = input.epsilon * t * t
        - m * input.c * t
        - (input.r as f64 - 2.0) * m * m * input.c * input.alpha * input.alpha;
    (t, main)
}

fn grade(residual: f64, tol: f64) -> Option<Verdict> {
    if residual <= tol {
        Some(Verdict::ProperRHarmonic)
    } else if residual < 100.0 * tol {
        Some(Verdict::Borderline)
    } else {
        None
    }
}

pub fn classify(input: &HarmonicityInput, tol: f64) -> HarmonicityReport {
    let residual_biharmonic = biharmonic_residual(input);
    let (residual_tr_a2, residual_main) = r_harmonic_residuals(input);
    let tension = tau_r_closed(input);
    let mut flags = Flags::default();
    flags.space_like_rigid = input.r >= 3 && input.epsilon < 0.0 && input.c >= 0.0;
    // Also holds at r = 2, where eps tr A^2 = m c has no solution.
    flags.sign_obstruction = input.tr_a2 > tol && input.epsilon * input.c < 0.0;

    let (verdict, active_branch) = if input.alpha.abs() <= tol {
        (Verdict::Minimal, Branch::None)
    } else if input.r == 2 {
        match grade(residual_biharmonic.abs(), tol) {
            Some(v) => (v, Branch::Biharmonic),
            None => (Verdict::NotRHarmonic, Branch::None),
        }
    } else if flags.space_like_rigid || flags.sign_obstruction {
        (Verdict::NotRHarmonic, Branch::None)
    } else {
        let (res, branch) = if residual_tr_a2.abs() <= residual_main.abs() {
            (residual_tr_a2.abs(), Branch::TrA2Zero)
        } else {
            (residual_main.abs(), Branch::MainEquation)
        };
        match grade(res, tol) {
            Some(v) => (v, branch),
            None => (Verdict::NotRHarmonic, Branch::None),
        }
    };
    flags.tension_mismatch = verdict == Verdict::ProperRHarmonic && tension.abs() > tol.max(DEFAULT_TOL) * 100.0;

    HarmonicityReport {
        input: *input,
        tol,
        residual_biharmonic,
        residual_tr_a2,
        residual_main,
        tension,
        verdict,
        active_branch,
        flags,
    }
}

// ---------------------------------------------------------------------------
// Tension field coefficient

/// Closed coefficient of `tau_r / m` along the normal.
///
/// Even `r`: `alpha T^{r-3} Q`; odd `r`: `alpha eps T^{r-3} Q`, where
/// `Q = eps T^2 - m c T - (r-2) m^2 c alpha^2` and `T = tr A^2`.
/// For `r = 2` the `T^{-1}` is cancelled by hand.
pub fn tau_r_closed(input: &HarmonicityInput) -> f64 {
    let (t, q) = r_harmonic_residuals(input);
    let a = input.alpha;
    match input.r {
        0 | 1 => 0.0,
        2 => a * biharmonic_residual(input),
        r if r % 2 == 0 => a * t.powi(r as i32 - 3) * q,
        r => a * input.epsilon * t.powi(r as i32 - 3) * q,
    }
}

/// Model of the normal bundle algebra: tangent frame plus the unit normal
/// as the last coordinate, with `A = eps alpha I` so that `tr A = m eps alpha`.
struct TensionModel {
    sig: Signature,
    /// Position of each tangent frame vector and of the normal.
    tangent: Vec<usize>,
    normal: usize,
    c: f64,
    eps: f64,
    alpha: f64,
    tr_a2: f64,
}

impl TensionModel {
    fn new(input: &HarmonicityInput) -> Self {
        let m = input.m;
        // Half the tangent directions time-like; negatives come first.
        let neg_tangent = m / 2;
        let normal_negative = input.epsilon < 0.0;
        let index = neg_tangent + usize::from(normal_negative);
        let sig = Signature::new(m + 1, index).expect("index bounded by dimension");
        let (normal, tangent) = if normal_negative {
            (0, (1..=m).collect())
        } else {
            (m, (0..m).collect())
        };
        Self {
            sig,
            tangent,
            normal,
            c: input.c,
            eps: input.epsilon,
            alpha: input.alpha,
            tr_a2: input.tr_a2,
        }
    }

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.sig.dim()]
    }

    fn basis(&self, i: usize) -> Vec<f64> {
        let mut v = self.zero();
        v[i] = 1.0;
        v
    }

    /// `c (<Y,Z> X - <X,Z> Y)`.
    fn curvature(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let yz = self.sig.dot(y, z);
        let xz = self.sig.dot(x, z);
        x.iter().zip(y).map(|(a, b)| self.c * (yz * a - xz * b)).collect()
    }

    /// `Delta-bar^p H = alpha eps^p T^p eta`, coefficient only.
    fn d(&self, p: i32) -> f64 {
        self.alpha * self.eps.powi(p) * self.tr_a2.powi(p)
    }

    fn shape(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.zero();
        for &i in &self.tangent {
            out[i] = self.eps * self.alpha * v[i];
        }
        out
    }

    /// `nabla_{e_i} (d eta) = -d A e_i` for constant `d`.
    fn nabla_normal(&self, d: f64, e: &[f64]) -> Vec<f64> {
        self.shape(e).into_iter().map(|v| -d * v).collect()
    }

    fn eta(&self, d: f64) -> Vec<f64> {
        let mut v = self.zero();
        v[self.normal] = d;
        v
    }

    /// `sum_i eps_i R(X_i, Y_i) e_i`.
    fn traced<F: Fn(&[f64]) -> (Vec<f64>, Vec<f64>)>(&self, pair: F) -> Vec<f64> {
        let mut acc = self.zero();
        for &i in &self.tangent {
            let e = self.basis(i);
            let (x, y) = pair(&e);
            let r = self.curvature(&x, &y, &e);
            let s = self.sig.sign(i);
            acc.iter_mut().zip(r).for_each(|(a, b)| *a += s * b);
        }
        acc
    }

    /// `sum_i eps_i { R(nabla d_a eta, d_b eta) - R(d_a eta, nabla d_b eta) } e_i`.
    fn cross(&self, a: i32, b: i32) -> Vec<f64> {
        let (da, db) = (self.d(a), self.d(b));
        let first = self.traced(|e| (self.nabla_normal(da, e), self.eta(db)));
        let second = self.traced(|e| (self.eta(da), self.nabla_normal(db, e)));
        first.iter().zip(&second).map(|(x, y)| x - y).collect()
    }

    fn assemble(&self, r: usize, m: f64) -> Result<f64> {
        let mut v: Vec<f64>;
        let add = |v: &mut Vec<f64>, w: &[f64], k: f64| v.iter_mut().zip(w).for_each(|(a, b)| *a += k * b);
        if r % 2 == 0 {
            let s = (r / 2) as i32;
            v = self.eta(self.d(2 * s - 1));
            let t2 = self.traced(|e| (self.eta(self.d(2 * s - 2)), e.to_vec()));
            add(&mut v, &t2, -1.0);
            for l in 1..s {
                add(&mut v, &self.cross(s + l - 2, s - l - 1), -m);
            }
        } else {
            let s = ((r - 1) / 2) as i32;
            v = self.eta(self.d(2 * s));
            let t2 = self.traced(|e| (self.eta(self.d(2 * s - 1)), e.to_vec()));
            add(&mut v, &t2, -1.0);
            for l in 1..s {
                add(&mut v, &self.cross(s + l - 1, s - l - 1), -m);
            }
            let d = self.d(s - 1);
            let last = self.traced(|e| (self.nabla_normal(d, e), self.eta(d)));
            add(&mut v, &last, -m);
        }
        let tangential = self
            .tangent
            .iter()
            .map(|&i| v[i].abs())
            .fold(0.0, f64::max);
        let coeff = v[self.normal];
        if tangential > 1e-9 * (1.0 + coeff.abs()) {
            return Err(GeomError::Invalid(format!(
                "assembled tension has a tangential part {tangential}"
            )));
        }
        Ok(coeff)
    }
}

/// Recompute [`tau_r_closed`] by summing the tension-field terms one by one:
/// the leading `Delta-bar^{r-1} H` term, the single curvature term and the
/// paired curvature terms, each evaluated as an actual curvature tensor on a
/// model of `T M + span(eta)`.
pub fn tau_r_assembled(input: &HarmonicityInput) -> Result<f64> {
    if input.r < 2 {
        return Err(GeomError::Invalid("order r must be at least 2".into()));
    }
    if input.m == 0 {
        return Err(GeomError::Invalid("m must be positive".into()));
    }
    TensionModel::new(input).assemble(input.r, input.m as f64)
}

// ---------------------------------------------------------------------------
// Clifford cubic

/// `k c^3 - k(r+2) c^2 + [m(r-1) + k(r+2)] c - m r`.
pub fn p3_eval(c: f64, m: usize, k: usize, r: usize) -> f64 {
    let (m, k, r) = (m as f64, k as f64, r as f64);
    ((k * c - k * (r + 2.0)) * c + m * (r - 1.0) + k * (r + 2.0)) * c - m * r
}

fn p3_derivative(c: f64, m: usize, k: usize, r: usize) -> f64 {
    let (m, k, r) = (m as f64, k as f64, r as f64);
    (3.0 * k * c - 2.0 * k * (r + 2.0)) * c + m * (r - 1.0) + k * (r + 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P3Root {
    pub root: f64,
    pub multiplicity: usize,
    /// `c > 1`.
    pub admissible: bool,
    /// `|c k - m| <= tol`.
    pub minimal: bool,
    pub residual: f64,
}

/// Distinct real roots of the monic cubic `x^3 + b x^2 + c x + d` with
/// multiplicities.
pub fn cubic_real_roots(b: f64, c: f64, d: f64) -> Vec<(f64, usize)> {
    let shift = -b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let scale = 1.0 + b.abs().powi(3) + c.abs().powf(1.5) + d.abs();
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let disc_tol = 1e-12 * scale * scale;

    let mut roots: Vec<(f64, usize)> = if p.abs() <= 1e-12 * scale.cbrt().powi(2) && q.abs() <= 1e-12 * scale {
        vec![(shift, 3)]
    } else if disc.abs() <= disc_tol {
        // Double root: y = -3q/(2p), simple root: y = 3q/p.
        vec![(shift + 3.0 * q / p, 1), (shift - 1.5 * q / p, 2)]
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        let y = (-half_q + sq).cbrt() + (-half_q - sq).cbrt();
        vec![(shift + y, 1)]
    } else {
        let rad = 2.0 * (-third_p).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|j| {
                let y = rad * (theta - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos();
                (shift + y, 1)
            })
            .collect()
    };
    roots.sort_by(|x, y| x.0.total_cmp(&y.0));
    roots
}

/// Real roots of `P3`, polished by one Newton step (simple roots only).
pub fn p3_roots(m: usize, k: usize, r: usize, tol: f64) -> Result<Vec<P3Root>> {
    if k == 0 || k >= m {
        return Err(GeomError::ConstraintViolation("P3: requires 1 <= k <= m-1".into()));
    }
    if r < 3 {
        return Err(GeomError::ConstraintViolation("P3: requires r >= 3".into()));
    }
    let (mf, kf, rf) = (m as f64, k as f64, r as f64);
    let b = -(rf + 2.0);
    let c1 = (mf * (rf - 1.0) + kf * (rf + 2.0)) / kf;
    let d = -mf * rf / kf;
    Ok(cubic_real_roots(b, c1, d)
        .into_iter()
        .map(|(mut root, multiplicity)| {
            if multiplicity == 1 {
                let dp = p3_derivative(root, m, k, r);
                if dp != 0.0 {
                    root -= p3_eval(root, m, k, r) / dp;
                }
            }
            P3Root {
                root,
                multiplicity,
                admissible: root > 1.0,
                minimal: (root * kf - mf).abs() <= tol,
                residual: p3_eval(root, m, k, r),
            }
        })
        .collect())
}

/// Number of distinct real roots from the sign of the cubic discriminant.
pub fn p3_distinct_real_root_count(m: usize, k: usize, r: usize) -> usize {
    let (mf, kf, rf) = (m as f64, k as f64, r as f64);
    let (a, b, c, d) = (kf, -kf * (rf + 2.0), mf * (rf - 1.0) + kf * (rf + 2.0), -mf * rf);
    let disc = 18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c - 4.0 * a * c.powi(3) - 27.0 * a * a * d * d;
    let scale = (b * b * c * c).abs().max(1.0);
    if disc > 1e-12 * scale {
        3
    } else if disc < -1e-12 * scale {
        1
    } else {
        // Double or triple root.
        let p = (3.0 * a * c - b * b) / (3.0 * a * a);
        if p.abs() < 1e-12 * (1.0 + (b / a).powi(2)) {
            1
        } else {
            2
        }
    }
}

// ---------------------------------------------------------------------------
// Triharmonic field system on a chart

#[derive(Debug, Clone, Serialize)]
pub struct FieldResidual {
    pub point: Vec<f64>,
    /// `Delta T + eps T^2 - m c T - m^2 c f^2`.
    pub scalar: f64,
    /// Max component of `A(grad T)` in coordinates.
    pub vector: f64,
    pub f: f64,
    pub tr_a2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldResidualReport {
    pub points: Vec<FieldResidual>,
    pub max_scalar: f64,
    pub max_vector: f64,
    /// `max f - min f` over the grid.
    pub f_spread: f64,
    /// Set when `f_spread` exceeds the CMC tolerance.
    pub cmc_warning: bool,
    pub h_outer: f64,
}

/// Residuals of the `r = 3` system at every grid point. `T` is
/// differentiated by central differences of step `h_outer`.
pub fn triharmonic_field_residuals(
    chart: &ImmersionChart,
    grid: &[Vec<f64>],
    h_outer: f64,
    cmc_tol: f64,
) -> Result<FieldResidualReport> {
    let m = chart.dim();
    let c = chart.ambient().curvature();
    let mut points = Vec::with_capacity(grid.len());
    let mut fmin = f64::INFINITY;
    let mut fmax = f64::NEG_INFINITY;
    for u in grid {
        let center = chart.shape_report(u)?;
        let fd = chart.fundamental_data(u)?;
        let g_inv = fd.g.clone().try_inverse().ok_or(GeomError::DegenerateMetric {
            eigenvalue: 0.0,
            tol: DEFAULT_TOL,
        })?;
        let gamma = ImmersionChart::christoffel(&fd.jet, &g_inv, &chart.signature());
        let t_at = |shift: &[(usize, f64)]| -> Result<f64> {
            let mut v = u.clone();
            for &(i, d) in shift {
                v[i] += d;
            }
            Ok(chart.shape_report(&v)?.tr_a2)
        };
        let t0 = center.tr_a2;
        let h = h_outer;
        let mut grad = vec![0.0; m];
        let mut hess = vec![vec![0.0; m]; m];
        for i in 0..m {
            let p = t_at(&[(i, h)])?;
            let q = t_at(&[(i, -h)])?;
            grad[i] = (p - q) / (2.0 * h);
            hess[i][i] = (p - 2.0 * t0 + q) / (h * h);
            for j in (i + 1)..m {
                let v = (t_at(&[(i, h), (j, h)])? - t_at(&[(i, h), (j, -h)])? - t_at(&[(i, -h), (j, h)])?
                    + t_at(&[(i, -h), (j, -h)])?)
                    / (4.0 * h * h);
                hess[i][j] = v;
                hess[j][i] = v;
            }
        }
        let mut lap = 0.0;
        for i in 0..m {
            for j in 0..m {
                let conn: f64 = (0..m).map(|k| gamma[k][i][j] * grad[k]).sum();
                lap -= g_inv[(i, j)] * (hess[i][j] - conn);
            }
        }
        let grad_up = &g_inv * nalgebra::DVector::from_vec(grad);
        let a_grad = &center.a_coord * grad_up;
        let mf = m as f64;
        let scalar = lap + center.epsilon * t0 * t0 - mf * c * t0 - mf * mf * c * center.f * center.f;
        fmin = fmin.min(center.f);
        fmax = fmax.max(center.f);
        points.push(FieldResidual {
            point: u.clone(),
            scalar,
            vector: a_grad.amax(),
            f: center.f,
            tr_a2: t0,
        });
    }
    let max_scalar = points.iter().map(|p| p.scalar.abs()).fold(0.0, f64::max);
    let max_vector = points.iter().map(|p| p.vector).fold(0.0, f64::max);
    let f_spread = if points.is_empty() { 0.0 } else { fmax - fmin };
    Ok(FieldResidualReport {
        points,
        max_scalar,
        max_vector,
        f_spread,
        cmc_warning: f_spread > cmc_tol,
        h_outer,
    })
}

// ---------------------------------------------------------------------------
// Isoparametric surfaces in three-dimensional Lorentz space forms

#[derive(Debug, Clone, Serialize)]
pub struct ClassifiedSolution {
    /// Case label: "1", "2", "3", "4", "5", "6a", "6b".
    pub case: String,
    pub description: String,
    pub family: Family,
    pub ambient_curvature: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionCheck {
    pub solution: ClassifiedSolution,
    /// Verdict from the tabulated invariants.
    pub closed_form: HarmonicityReport,
    /// Verdict from invariants computed on the chart.
    pub numeric: HarmonicityReport,
    pub verified: bool,
}

impl ClassifiedSolution {
    /// Instantiate the chart and classify both from closed-form and sampled
    /// invariants. `numeric_tol` applies to the sampled ones.
    pub fn verify(&self, r: usize, tol: f64, numeric_tol: f64) -> Result<SolutionCheck> {
        let surface = table_entry(&self.family)?;
        let closed_form = classify(&HarmonicityInput::from_closed_form(&surface.closed_form, r), tol);
        let report = surface.chart.shape_report(&surface.chart.center())?;
        let numeric = classify(
            &HarmonicityInput::from_report(&report, surface.chart.ambient().curvature(), r),
            numeric_tol,
        );
        let verified = closed_form.verdict == Verdict::ProperRHarmonic && numeric.verdict == Verdict::ProperRHarmonic;
        Ok(SolutionCheck {
            solution: self.clone(),
            closed_form,
            numeric,
            verified,
        })
    }
}

pub fn complex_circle_from_a2(a2: f64) -> Family {
    Family::ComplexCircle {
        a: a2.sqrt(),
        b: (1.0 + a2).sqrt(),
    }
}

/// The proper r-harmonic isoparametric surfaces of `S^3_1` and `H^3_1`.
pub fn lorentz3_solutions(r: usize) -> Result<Vec<ClassifiedSolution>> {
    if r < 3 {
        return Err(GeomError::ConstraintViolation("classification requires r >= 3".into()));
    }
    let rf = r as f64;
    let mut out = vec![
        ClassifiedSolution {
            case: "1".into(),
            description: format!("S^2_1({r}) in S^3_1"),
            family: Family::SmallSphere { m: 2, t: 1, c: rf },
            ambient_curvature: 1.0,
        },
        ClassifiedSolution {
            case: "2".into(),
            description: format!("H^2({}) in H^3_1", -rf),
            family: Family::HyperbolicSphere { m: 2, c: -rf },
            ambient_curvature: -1.0,
        },
    ];
    let tori: Vec<f64> = p3_roots(2, 1, r, 1e-9)?
        .into_iter()
        .filter(|p| p.admissible && !p.minimal)
        .map(|p| p.root)
        .collect();
    for &c in &tori {
        for l in 0..=1 {
            out.push(ClassifiedSolution {
                case: "3".into(),
                description: format!("S^1_{l}({c}) x S^1_{}({}) in S^3_1", 1 - l, c / (c - 1.0)),
                family: Family::Clifford { m: 2, k: 1, l, t: 1, c },
                ambient_curvature: 1.0,
            });
        }
    }
    for &c in &tori {
        out.push(ClassifiedSolution {
            case: "4".into(),
            description: format!("H^1({}) x H^1({}) in H^3_1", -c, -c / (c - 1.0)),
            family: Family::HyperbolicClifford { c },
            ambient_curvature: -1.0,
        });
    }
    let lambda = (rf - 1.0).sqrt();
    out.push(ClassifiedSolution {
        case: "5".into(),
        description: format!("B-scroll in S^3_1 with lambda = {lambda}, K = {r}"),
        family: Family::Bscroll { lambda },
        ambient_curvature: 1.0,
    });
    out.push(ClassifiedSolution {
        case: "6a".into(),
        description: "complex circle with tr A^2 = 0, a^2 = sqrt(2)/2 - 1/2".into(),
        family: complex_circle_from_a2(0.5f64.sqrt() - 0.5),
        ambient_curvature: -1.0,
    });
    if r == 3 {
        out.push(ClassifiedSolution {
            case: "6b".into(),
            description: "complex circle with a^2 = sqrt(3)/3 - 1/2".into(),
            family: complex_circle_from_a2(3f64.sqrt() / 3.0 - 0.5),
            ambient_curvature: -1.0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(m: usize, c: f64, eps: f64, alpha: f64, t: f64, r: usize) -> HarmonicityInput {
        HarmonicityInput::new(m, c, eps, alpha, t, r)
    }

    #[test]
    fn biharmonic_examples() {
        assert_eq!(biharmonic_residual(&input(3, 1.0, 1.0, 1.0, 3.0, 2)), 0.0);
        let rep = classify(&input(2, 1.0, 1.0, 0.0, 2.0, 2), 1e-9);
        assert_eq!(rep.residual_biharmonic, 0.0);
        assert_eq!(rep.verdict, Verdict::Minimal);
    }

    #[test]
    fn main_residual_examples() {
        for cs in [1.5, 3.0, 4.0] {
            let m = 3.0;
            let (_, main) = r_harmonic_residuals(&input(3, 1.0, 1.0, (cs - 1.0f64).sqrt(), m * (cs - 1.0), 4));
            assert!((main - m * m * (cs - 1.0) * (cs - 4.0)).abs() < 1e-12);
        }
        let l: f64 = 1.7;
        let (_, main) = r_harmonic_residuals(&input(2, 1.0, 1.0, l, 2.0 * l * l, 5));
        assert!((main - 4.0 * l * l * (l * l - 4.0)).abs() < 1e-12);
        let (_, main) = r_harmonic_residuals(&input(2, -1.0, 1.0, 0.5, -1.0, 3));
        assert!(main.abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let rep = classify(&input(2, 1.0, -1.0, 0.7, 1.0, 3), 1e-9);
        assert_eq!(rep.verdict, Verdict::NotRHarmonic);
        assert!(rep.flags.space_like_rigid);
        let rep = classify(&input(2, -1.0, 1.0, 0.7, 5.0, 4), 1e-9);
        assert_eq!(rep.verdict, Verdict::NotRHarmonic);
        assert!(rep.flags.sign_obstruction);
        for r in [3usize, 4, 7] {
            let a2 = r as f64 - 1.0;
            let rep = classify(&input(2, 1.0, 1.0, a2.sqrt(), 2.0 * a2, r), 1e-9);
            assert_eq!(rep.verdict, Verdict::ProperRHarmonic);
            assert_eq!(rep.active_branch, Branch::MainEquation);
            assert!(!rep.flags.tension_mismatch);
        }
    }

    #[test]
    fn borderline_band() {
        let r = 3;
        let a2: f64 = 2.0;
        let rep = classify(&input(2, 1.0, 1.0, a2.sqrt(), 2.0 * a2 + 1e-8, r), 1e-9);
        assert_eq!(rep.verdict, Verdict::Borderline);
    }

    #[test]
    fn zero_trace_branch_at_order_three_is_flagged() {
        let rep = classify(&input(2, -1.0, 1.0, 0.5f64.sqrt(), 0.0, 3), 1e-9);
        assert_eq!(rep.verdict, Verdict::ProperRHarmonic);
        assert_eq!(rep.active_branch, Branch::TrA2Zero);
        assert!(rep.flags.tension_mismatch);
        let rep = classify(&input(2, -1.0, 1.0, 0.5f64.sqrt(), 0.0, 4), 1e-9);
        assert!(!rep.flags.tension_mismatch);
    }

    #[test]
    fn tau_examples() {
        // alpha T (eps T^2 - m c T - 2 m^2 c alpha^2) = 2 (4 - 4 - 8).
        let i = input(2, 1.0, 1.0, 1.0, 2.0, 4);
        assert!((tau_r_closed(&i) + 16.0).abs() < 1e-12);
        assert!((tau_r_assembled(&i).unwrap() + 16.0).abs() < 1e-12);
        let z = input(3, 1.0, -1.0, 0.0, 2.0, 6);
        assert_eq!(tau_r_closed(&z), 0.0);
        assert_eq!(tau_r_assembled(&z).unwrap(), 0.0);
        for r in [4usize, 6] {
            let rf = r as f64;
            let i = input(3, 1.0, 1.0, (rf - 1.0).sqrt(), 3.0 * (rf - 1.0), r);
            assert!(tau_r_closed(&i).abs() < 1e-9);
            assert!(tau_r_assembled(&i).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn odd_orders_assemble_to_the_closed_form() {
        for r in [3usize, 5, 7] {
            for eps in [1.0, -1.0] {
                let i = input(3, -0.6, eps, 0.8, 1.7, r);
                let a = tau_r_assembled(&i).unwrap();
                let c = tau_r_closed(&i);
                assert!((a - c).abs() <= 1e-12 * (1.0 + c.abs()), "r={r} {a} {c}");
            }
        }
    }

    #[test]
    fn p3_examples() {
        let roots = p3_roots(2, 1, 3, 1e-9).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].root - 2.0).abs() < 1e-12 && roots[0].minimal);
        let roots = p3_roots(4, 2, 5, 1e-9).unwrap();
        let values: Vec<f64> = roots.iter().map(|r| r.root).collect();
        let expect = [(5.0 - 5f64.sqrt()) / 2.0, 2.0, (5.0 + 5f64.sqrt()) / 2.0];
        for (v, e) in values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-10);
        }
        assert!(roots.iter().all(|r| r.residual.abs() < 1e-9));
        let triple = p3_roots(2, 1, 4, 1e-9).unwrap();
        assert_eq!(triple.len(), 1);
        assert_eq!(triple[0].multiplicity, 3);
        assert!((triple[0].root - 2.0).abs() < 1e-9);
        assert_eq!(p3_distinct_real_root_count(2, 1, 4), 1);
        assert_eq!(p3_distinct_real_root_count(2, 1, 5), 3);
        assert_eq!(p3_distinct_real_root_count(2, 1, 3), 1);
        let r313 = p3_roots(3, 1, 3, 1e-9).unwrap();
        assert_eq!(r313.len(), p3_distinct_real_root_count(3, 1, 3));
        assert!(r313.iter().all(|r| r.residual.abs() < 1e-9));
    }

    #[test]
    fn lorentz3_case_lists() {
        let cases = |r| -> Vec<String> {
            let mut v: Vec<String> = lorentz3_solutions(r).unwrap().into_iter().map(|s| s.case).collect();
            v.dedup();
            v
        };
        assert_eq!(cases(3), ["1", "2", "5", "6a", "6b"]);
        assert_eq!(cases(4), ["1", "2", "5", "6a"]);
        assert_eq!(cases(5), ["1", "2", "3", "4", "5", "6a"]);
        assert!(lorentz3_solutions(2).is_err());
    }
}
