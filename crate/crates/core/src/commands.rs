//! Command implementations behind the `polyharm` binary. Each returns a
//! serializable report with a `schema_version` and an `ok` flag; the binary
//! maps `ok == false` to exit code 1 and errors to exit code 2.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bscroll::{
    bscroll_checks, integrate_directed, surface_samples, BScrollReport, CartanSystem, CartanTrajectory,
    CheckOptions, Direction, KSpec, SurfaceSample,
};
use crate::catalog::{compare, representatives, table_entry, Family, OracleComparison};
use crate::error::{GeomError, Result};
use crate::expr::eval_formula;
use crate::harmonicity::{
    classify, lorentz3_solutions, p3_distinct_real_root_count, p3_roots, triharmonic_field_residuals,
    FieldResidualReport, HarmonicityInput, HarmonicityReport, P3Root, SolutionCheck, Verdict,
};
use crate::immersion::{DerivPolicy, ExprMap, ImmersionChart};
use crate::space_form::SpaceForm;

pub const SCHEMA_VERSION: u32 = 1;

/// Tolerance for verdicts computed from sampled (numeric) invariants.
pub const NUMERIC_TOL: f64 = 1e-6;

const BUNDLED_EXPECTATIONS: &str = include_str!("../data/expectations.json");

// ---------------------------------------------------------------------------
// Expectations

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub id: String,
    #[serde(rename = "ref")]
    pub reference: String,
    /// A [`Family`] document whose string values are formulas in `r`.
    pub family: Value,
    pub r: Vec<usize>,
    pub expect: Verdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationFile {
    pub schema_version: u32,
    pub entries: Vec<Expectation>,
}

impl ExpectationFile {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_EXPECTATIONS).expect("bundled expectations are well formed")
    }

    pub fn parse(src: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(src).map_err(|e| GeomError::Parse(e.to_string()))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(GeomError::Invalid(format!(
                "expectations schema_version {} (supported: {SCHEMA_VERSION})",
                file.schema_version
            )));
        }
        for e in &file.entries {
            for &r in &e.r {
                e.instantiate(r)?;
            }
        }
        Ok(file)
    }
}

impl Expectation {
    /// Substitute `r` into the family parameters.
    pub fn instantiate(&self, r: usize) -> Result<Family> {
        let Value::Object(map) = &self.family else {
            return Err(GeomError::Invalid(format!("{}: family must be an object", self.id)));
        };
        let mut out = serde_json::Map::new();
        for (k, v) in map {
            let v = match v {
                Value::String(s) if k != "family" => {
                    let x = eval_formula(s, "r", r as f64)?;
                    if !x.is_finite() {
                        return Err(GeomError::Invalid(format!("{}: '{s}' is not finite at r = {r}", self.id)));
                    }
                    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
                }
                other => other.clone(),
            };
            out.insert(k.clone(), v);
        }
        serde_json::from_value(Value::Object(out)).map_err(|e| GeomError::Parse(format!("{}: {e}", self.id)))
    }
}

// ---------------------------------------------------------------------------
// verify-catalog

#[derive(Debug, Clone, Serialize)]
pub struct VerdictPair {
    pub r: usize,
    pub closed_form: Verdict,
    pub numeric: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyCheck {
    pub name: String,
    pub family: Family,
    pub points: usize,
    /// Worst comparison over the sampled points.
    pub worst: OracleComparison,
    pub oracle_ok: bool,
    pub verdicts: Vec<VerdictPair>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationResult {
    pub id: String,
    #[serde(rename = "ref")]
    pub reference: String,
    pub r: usize,
    pub family: Family,
    pub expected: Verdict,
    pub closed_form: HarmonicityReport,
    pub numeric: HarmonicityReport,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub r_list: Vec<usize>,
    pub oracle_tol: f64,
    pub families: Vec<FamilyCheck>,
    pub expectations: Vec<ExpectationResult>,
    pub failures: Vec<String>,
    pub ok: bool,
}

fn verdicts_for(family: &Family, r: usize, tol: f64) -> Result<(HarmonicityReport, HarmonicityReport)> {
    let s = table_entry(family)?;
    let closed = classify(&HarmonicityInput::from_closed_form(&s.closed_form, r), tol);
    let rep = s.chart.shape_report(&s.chart.center())?;
    let numeric = classify(
        &HarmonicityInput::from_report(&rep, s.chart.ambient().curvature(), r),
        NUMERIC_TOL.max(tol),
    );
    Ok((closed, numeric))
}

pub fn cmd_verify_catalog(r_list: &[usize], tol: f64, expectations: &ExpectationFile) -> Result<CatalogReport> {
    let oracle_tol = 1e-6;
    let mut failures = Vec::new();
    let mut families = Vec::new();
    for fam in representatives() {
        let s = table_entry(&fam)?;
        let grid = s.chart.interior_grid(&vec![3; s.chart.dim()]);
        let mut worst: Option<OracleComparison> = None;
        for u in &grid {
            let cmp = s.compare_at(u)?;
            // Tag or sign mismatches rank above any numerical error.
            let key = |c: &OracleComparison| (!(c.epsilon_match && c.jordan_match), c.max_error());
            if worst.as_ref().map_or(true, |w| {
                let (a, b) = (key(&cmp), key(w));
                a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
            }) {
                worst = Some(cmp);
            }
        }
        let worst = worst.ok_or_else(|| GeomError::Invalid(format!("{}: empty grid", s.name)))?;
        let oracle_ok = worst.passes(oracle_tol);
        if !oracle_ok {
            failures.push(format!("oracle mismatch: {} ({:e})", s.name, worst.max_error()));
        }
        let mut verdicts = Vec::new();
        for &r in r_list {
            let (closed, numeric) = verdicts_for(&fam, r, tol)?;
            if closed.verdict != numeric.verdict {
                failures.push(format!(
                    "{} at r = {r}: closed form says {:?}, numeric says {:?}",
                    s.name, closed.verdict, numeric.verdict
                ));
            }
            verdicts.push(VerdictPair {
                r,
                closed_form: closed.verdict,
                numeric: numeric.verdict,
            });
        }
        families.push(FamilyCheck {
            name: s.name,
            family: fam,
            points: grid.len(),
            worst,
            oracle_ok,
            verdicts,
        });
    }

    let mut results = Vec::new();
    for e in &expectations.entries {
        for &r in &e.r {
            if !r_list.is_empty() && !r_list.contains(&r) {
                continue;
            }
            let family = e.instantiate(r)?;
            let (closed_form, numeric) = verdicts_for(&family, r, tol)?;
            let passed = closed_form.verdict == e.expect && numeric.verdict == e.expect;
            if !passed {
                failures.push(format!(
                    "{} at r = {r}: expected {:?}, got {:?} (numeric {:?})",
                    e.id, e.expect, closed_form.verdict, numeric.verdict
                ));
            }
            results.push(ExpectationResult {
                id: e.id.clone(),
                reference: e.reference.clone(),
                r,
                family,
                expected: e.expect,
                closed_form,
                numeric,
                passed,
            });
        }
    }
    Ok(CatalogReport {
        schema_version: SCHEMA_VERSION,
        command: "verify-catalog",
        r_list: r_list.to_vec(),
        oracle_tol,
        ok: failures.is_empty(),
        families,
        expectations: results,
        failures,
    })
}

// ---------------------------------------------------------------------------
// p3

#[derive(Debug, Clone, Serialize)]
pub struct TorusCheck {
    pub c: f64,
    pub family: Family,
    pub verdict: Verdict,
    pub numeric_verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct P3Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub m: usize,
    pub k: usize,
    pub r: usize,
    /// Coefficients of `c^3, c^2, c, 1`.
    pub coefficients: [f64; 4],
    pub distinct_real_roots: usize,
    pub roots: Vec<P3Root>,
    pub tori: Vec<TorusCheck>,
    pub ok: bool,
}

pub fn cmd_p3(m: usize, k: usize, r: usize, tol: f64) -> Result<P3Report> {
    let roots = p3_roots(m, k, r, tol)?;
    let (mf, kf, rf) = (m as f64, k as f64, r as f64);
    let coefficients = [kf, -kf * (rf + 2.0), mf * (rf - 1.0) + kf * (rf + 2.0), -mf * rf];
    let scale = coefficients.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let mut ok = roots
        .iter()
        .all(|p| p.residual.abs() <= 1e-9 * scale.max(1.0) * (1.0 + p.root.abs().powi(3)));
    let mut tori = Vec::new();
    for p in roots.iter().filter(|p| p.admissible && !p.minimal) {
        let family = Family::Clifford {
            m,
            k,
            l: 0,
            t: 0,
            c: p.root,
        };
        let (closed, numeric) = verdicts_for(&family, r, tol)?;
        ok &= closed.verdict == Verdict::ProperRHarmonic && numeric.verdict == Verdict::ProperRHarmonic;
        tori.push(TorusCheck {
            c: p.root,
            family,
            verdict: closed.verdict,
            numeric_verdict: numeric.verdict,
        });
    }
    Ok(P3Report {
        schema_version: SCHEMA_VERSION,
        command: "p3",
        m,
        k,
        r,
        coefficients,
        distinct_real_roots: p3_distinct_real_root_count(m, k, r),
        roots,
        tori,
        ok,
    })
}

// ---------------------------------------------------------------------------
// check

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSpec {
    pub dim: usize,
    pub index: usize,
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomChart {
    pub ambient: AmbientSpec,
    pub vars: Vec<String>,
    /// Flat coordinates as formulas in `vars`.
    pub coords: Vec<String>,
    pub domain: Vec<[f64; 2]>,
    #[serde(default)]
    pub policy: Option<DerivPolicy>,
}

/// Input chart document: `{"catalog": {...}}` or `{"custom": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartSpec {
    Catalog(Family),
    Custom(CustomChart),
}

impl ChartSpec {
    pub fn parse(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| GeomError::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<ImmersionChart> {
        match self {
            ChartSpec::Catalog(f) => Ok(table_entry(f)?.chart),
            ChartSpec::Custom(c) => {
                let ambient = SpaceForm::new(c.ambient.dim, c.ambient.index, c.ambient.curvature)?;
                let map = ExprMap::parse(&c.coords, &c.vars)?;
                let policy = c.policy.unwrap_or(DerivPolicy::Analytic);
                let domain = c.domain.iter().map(|[a, b]| (*a, *b)).collect();
                let map: Arc<dyn crate::immersion::Parametrization> = Arc::new(crate::immersion::AutoDiff(map));
                ImmersionChart::new(ambient, map, domain, policy)
            }
        }
    }
}

/// `"20x20"` or `"20"` (same count on every axis).
pub fn parse_grid(spec: &str, dim: usize) -> Result<Vec<usize>> {
    let parts: Vec<usize> = spec
        .split('x')
        .map(|p| p.trim().parse::<usize>().ok().filter(|n| *n >= 1))
        .collect::<Option<_>>()
        .ok_or_else(|| GeomError::Parse(format!("bad grid '{spec}'")))?;
    match parts.len() {
        1 => Ok(vec![parts[0]; dim]),
        n if n == dim => Ok(parts),
        n => Err(GeomError::Invalid(format!("grid '{spec}' has {n} axes, chart has {dim}"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub r: usize,
    pub grid: Vec<usize>,
    pub samples: usize,
    pub epsilon: f64,
    pub epsilon_constant: bool,
    pub f_range: (f64, f64),
    pub tr_a2_range: (f64, f64),
    pub cmc: bool,
    pub tr_a2_constant: bool,
    /// Classification from the invariants at the domain center.
    pub harmonicity: HarmonicityReport,
    pub field_residuals: Option<FieldResidualReport>,
    pub ok: bool,
}

/// Sample the chart, test CMC and constant `tr A^2`, classify; for `r = 3`
/// also evaluate the triharmonic field system. `ok` means proper
/// r-harmonic with all checks consistent.
pub fn cmd_check(spec: &ChartSpec, r: usize, grid: &[usize], tol: f64) -> Result<CheckReport> {
    let chart = spec.build()?;
    let pts = chart.interior_grid(grid);
    let mut eps = Vec::with_capacity(pts.len());
    let (mut fmin, mut fmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for u in &pts {
        let rep = chart.shape_report(u)?;
        eps.push(rep.epsilon);
        // Mean curvature up to the normal orientation.
        fmin = fmin.min(rep.f.abs());
        fmax = fmax.max(rep.f.abs());
        tmin = tmin.min(rep.tr_a2);
        tmax = tmax.max(rep.tr_a2);
    }
    let numeric_tol = tol.max(NUMERIC_TOL);
    let cmc = fmax - fmin <= numeric_tol * (1.0 + fmax);
    let tr_a2_constant = tmax - tmin <= numeric_tol * (1.0 + tmax.abs());
    let center = chart.shape_report(&chart.center())?;
    let harmonicity = classify(
        &HarmonicityInput::from_report(&center, chart.ambient().curvature(), r),
        numeric_tol,
    );
    let field_residuals = if r == 3 {
        Some(triharmonic_field_residuals(&chart, &pts, 1e-3, 1e-6)?)
    } else {
        None
    };
    let fields_ok = field_residuals
        .as_ref()
        .map_or(true, |f| f.max_scalar < 1e-4 && f.max_vector < 1e-4);
    let epsilon_constant = eps.iter().all(|e| *e == eps[0]);
    let ok = epsilon_constant
        && cmc
        && tr_a2_constant
        && fields_ok
        && harmonicity.verdict == Verdict::ProperRHarmonic;
    Ok(CheckReport {
        schema_version: SCHEMA_VERSION,
        command: "check",
        r,
        grid: grid.to_vec(),
        samples: pts.len(),
        epsilon: center.epsilon,
        epsilon_constant,
        f_range: (fmin, fmax),
        tr_a2_range: (tmin, tmax),
        cmc,
        tr_a2_constant,
        harmonicity,
        field_residuals,
        ok,
    })
}

// ---------------------------------------------------------------------------
// bscroll

#[derive(Debug, Clone, Serialize)]
pub struct BScrollCommandReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub direction: Direction,
    pub u_values: Vec<f64>,
    pub report: BScrollReport,
    /// Conservation and numeric consistency held.
    pub ok: bool,
}

pub struct BScrollRun {
    pub report: BScrollCommandReport,
    pub trajectory: CartanTrajectory,
    pub samples: Vec<SurfaceSample>,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_bscroll(
    lambda: f64,
    k_spec: &KSpec,
    r: usize,
    s_max: f64,
    step: f64,
    u_values: &[f64],
    direction: Direction,
    tol: f64,
) -> Result<BScrollRun> {
    let sys = CartanSystem::new(lambda, k_spec.clone())?;
    let trajectory = integrate_directed(&sys, s_max, step, direction)?;
    let opts = CheckOptions {
        tol,
        u_values: if u_values.is_empty() {
            CheckOptions::default().u_values
        } else {
            u_values.to_vec()
        },
        ..CheckOptions::default()
    };
    let report = bscroll_checks(&trajectory, r, &opts)?;
    let samples = surface_samples(&trajectory, u_values);
    let ok = report.max_pairing_drift < 1e-8
        && report.frame_relation_residual < 1e-7
        && report.numeric.epsilon_all_match
        && report.numeric.max_tr_a2_error < 1e-4
        && report.numeric.max_gauss_error < 1e-6;
    Ok(BScrollRun {
        report: BScrollCommandReport {
            schema_version: SCHEMA_VERSION,
            command: "bscroll",
            direction,
            u_values: u_values.to_vec(),
            report,
            ok,
        },
        trajectory,
        samples,
    })
}

// ---------------------------------------------------------------------------
// lorentz3

#[derive(Debug, Clone, Serialize)]
pub struct Lorentz3Report {
    pub schema_version: u32,
    pub command: &'static str,
    pub r: usize,
    /// Distinct case labels in emission order.
    pub cases: Vec<String>,
    pub solutions: Vec<SolutionCheck>,
    pub ok: bool,
}

pub fn cmd_lorentz3(r: usize, tol: f64) -> Result<Lorentz3Report> {
    let mut solutions = Vec::new();
    let mut cases: Vec<String> = Vec::new();
    for sol in lorentz3_solutions(r)? {
        if !cases.contains(&sol.case) {
            cases.push(sol.case.clone());
        }
        solutions.push(sol.verify(r, tol, NUMERIC_TOL.max(tol))?);
    }
    Ok(Lorentz3Report {
        schema_version: SCHEMA_VERSION,
        command: "lorentz3",
        r,
        ok: solutions.iter().all(|s| s.verified),
        cases,
        solutions,
    })
}

/// Frame-independent oracle comparison at one point of a family chart.
pub fn oracle_at(family: &Family, u: &[f64]) -> Result<OracleComparison> {
    let s = table_entry(family)?;
    Ok(compare(&s.chart.shape_report(u)?, &s.closed_form))
}
