//! Problem files, end-to-end orchestration and JSON reports.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algcert::{
    check_nonsingular, count_negative_valuation_roots, newton_polygon, search_annihilator, vanishing_window,
    verify_annihilator, BivarPoly, NewtonPolygon, SearchBounds, DEFAULT_GUARD,
};
use crate::error::{Error, Result};
use crate::fock::{free_independence_check, moment_oracle, DEFAULT_CAP};
use crate::laws::Law;
use crate::ncpoly::{parse, MatNCPoly};
use crate::realize::{build_sd_data, realize, Realization, SDData};
use crate::scalar::Scalar;
use crate::sde::{solve_gsde, stieltjes_from_g, Nondegeneracy, SDSolution};
use crate::series::{MatSeries, TruncLaurent};

/// How far past the solve order the escalating search may raise each degree.
pub const ESCALATION_STEPS: u32 = 2;

/// One law of a problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LawSpec {
    Preset {
        preset: String,
        #[serde(default)]
        params: BTreeMap<String, Scalar>,
    },
    Cumulants {
        cumulants: Vec<Scalar>,
    },
    Moments {
        moments: Vec<Scalar>,
    },
}

impl LawSpec {
    pub fn to_law(&self) -> Result<Law> {
        match self {
            LawSpec::Preset { preset, params } => Law::preset(preset, params),
            LawSpec::Cumulants { cumulants } => Ok(Law::from_cumulants(cumulants.clone())),
            LawSpec::Moments { moments } => Law::from_moments(moments.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub q: usize,
    pub laws: Vec<LawSpec>,
    pub expression: String,
    pub order: usize,
    pub degx: u32,
    pub degy: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_cap: Option<usize>,
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<ProblemSpec> {
        let spec: ProblemSpec =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("problem file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::Input("q must be at least 1".into()));
        }
        if self.laws.len() != self.q {
            return Err(Error::Input(format!("{} laws given for q = {}", self.laws.len(), self.q)));
        }
        if self.order < 4 {
            return Err(Error::Input(format!("order {} is below 4", self.order)));
        }
        Ok(())
    }

    pub fn guard(&self) -> usize {
        self.guard.unwrap_or(DEFAULT_GUARD)
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap.unwrap_or(DEFAULT_CAP)
    }
}

/// A parsed and realized problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub f: MatNCPoly,
    pub laws: Vec<Law>,
    pub realization: Realization,
}

/// A solved equation and the normalized Stieltjes series derived from it.
#[derive(Debug, Clone)]
pub struct Solved {
    pub data: SDData,
    pub solution: SDSolution,
    pub stieltjes: TruncLaurent,
}

impl Problem {
    pub fn new(spec: ProblemSpec) -> Result<Problem> {
        spec.validate()?;
        let f = parse(&spec.expression)?;
        if f.max_var() > spec.q {
            return Err(Error::Input(format!(
                "expression uses x{} but q = {}",
                f.max_var(),
                spec.q
            )));
        }
        let laws = spec.laws.iter().map(LawSpec::to_law).collect::<Result<Vec<_>>>()?;
        let realization = realize(&f);
        Ok(Problem {
            spec,
            f,
            laws,
            realization,
        })
    }

    pub fn dims(&self) -> Dims {
        let p = self.realization.p;
        Dims {
            p,
            big_n: self.realization.n_internal,
            n: p + self.realization.n_internal,
        }
    }

    /// Solves through `z^{-order}`. Cumulants are supplied well beyond `order`
    /// because the fixed point consumes high cumulants of laws with infinite
    /// cumulant support.
    pub fn solve(&self, order: usize) -> Result<Solved> {
        let kappa_order = 4 * (order + self.dims().n + 2);
        let data = build_sd_data(&self.realization, &self.laws, kappa_order)?;
        let solution = solve_gsde(&data, order)?;
        let stieltjes = stieltjes_from_g(&solution.g, data.p)?.truncate(-(order as i64));
        Ok(Solved {
            data,
            solution,
            stieltjes,
        })
    }

    /// Moments `m_0..m_{order-1}` from the Fock model.
    pub fn oracle_moments(&self, order: usize) -> Result<Vec<Scalar>> {
        moment_oracle(&self.f, &self.laws, order - 1, self.spec.depth_cap())
    }
}

/// `m_0..m_{len-1}` read off `S = Σ m_k z^{-k-1}`.
pub fn moments_of(s: &TruncLaurent, len: usize) -> Vec<Scalar> {
    (0..len).map(|k| s.coeff(-(k as i64) - 1)).collect()
}

fn ratio_strings(v: &[Scalar]) -> Vec<String> {
    v.iter().map(Scalar::to_ratio_string).collect()
}

/// Number of leading entries on which two sequences agree.
pub fn agreement_window(a: &[Scalar], b: &[Scalar]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub p: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdChecks {
    /// Valuation bound of the residual, `None` when it vanishes exactly.
    pub residual_val: Option<i64>,
    pub residual_exact_zero: bool,
    pub gsde1: Vec<bool>,
    pub gsde3: Nondegeneracy,
    pub iterations: usize,
}

impl SdChecks {
    fn from_solution(s: &SDSolution) -> SdChecks {
        SdChecks {
            residual_val: s.residual_val,
            residual_exact_zero: s.residual_val.is_none(),
            gsde1: s.spectral_ok.clone(),
            gsde3: s.nondegenerate,
            iterations: s.iterations,
        }
    }

    /// Residual below `-order`, all spectral conditions and nondegeneracy.
    pub fn passed(&self, order: usize) -> bool {
        self.residual_val.is_none_or(|v| v <= -(order as i64))
            && self.gsde1.iter().all(|&b| b)
            && self.gsde3 == Nondegeneracy::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub moments: Vec<String>,
    pub agreement_window: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolygonReport {
    pub polynomial: String,
    pub segments: NewtonPolygon,
    pub y_content: u32,
    pub negative_valuation_roots: usize,
    /// `∂P/∂y (0, 0) != 0`.
    pub nonsingular_at_origin: bool,
}

impl PolygonReport {
    pub fn of(p: &BivarPoly) -> PolygonReport {
        let poly = newton_polygon(p);
        PolygonReport {
            polynomial: p.to_string(),
            y_content: poly.y_content,
            segments: poly,
            negative_valuation_roots: count_negative_valuation_roots(p),
            nonsingular_at_origin: check_nonsingular(p, &TruncLaurent::zero()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnihilatorReport {
    pub polynomial: Option<BivarPoly>,
    pub display: Option<String>,
    pub certified: bool,
    /// Coefficients of `P(1/z, S)` known to vanish.
    pub vanishing_window: Option<usize>,
    pub guard: usize,
    pub series_order: usize,
    /// Degree pairs tried, in order.
    pub escalation: Vec<(u32, u32)>,
    pub nonsingular: Option<bool>,
    /// Minimality is by degree only; no factorization is attempted.
    pub irreducibility_checked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub sd_checks_passed: bool,
    pub oracle_agrees: bool,
    pub free_independence: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Certified,
    NotFound,
    Inconclusive,
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok | Status::Certified => 0,
            Status::NotFound | Status::Inconclusive | Status::Failed => 2,
        }
    }
}

/// Process exit code for an error: 2 when the computation could not reach a
/// conclusion, 3 for bad input, 4 otherwise.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::NotFound(_)
        | Error::NotFoundWithin(_)
        | Error::DepthOverflow { .. }
        | Error::InsufficientPrecision(_)
        | Error::NonContractive { .. }
        | Error::NotSummable(_)
        | Error::IndeterminateValuation { .. } => 2,
        Error::Parse { .. }
        | Error::UnknownPreset(_)
        | Error::NotAState(_)
        | Error::Input(_)
        | Error::InsufficientOrder(_)
        | Error::DimensionMismatch(_)
        | Error::ZeroPolynomial
        | Error::NotAffine { .. }
        | Error::NotMonic => 3,
        _ => 4,
    }
}

/// Everything a subcommand may report. Absent parts are omitted from the JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realization: Option<Dims>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moments: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stieltjes: Option<TruncLaurent>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<MatSeries>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd_checks: Option<SdChecks>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annihilator: Option<AnnihilatorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polygon: Option<PolygonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyReport>,
    /// Wall-clock milliseconds per stage; the only nondeterministic part.
    pub timings: BTreeMap<String, u128>,
}

impl Report {
    fn new(command: &str) -> Report {
        Report {
            command: command.to_string(),
            status: Status::Ok,
            order: None,
            realization: None,
            moments: None,
            stieltjes: None,
            g: None,
            sd_checks: None,
            annihilator: None,
            polygon: None,
            oracle: None,
            verify: None,
            timings: BTreeMap::new(),
        }
    }

    /// JSON without the timings block, for reproducibility comparisons.
    pub fn to_json_without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("timings");
        }
        v
    }
}

fn timed<T>(timings: &mut BTreeMap<String, u128>, key: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    timings.insert(key.to_string(), start.elapsed().as_millis());
    out
}

fn oracle_report(problem: &Problem, ours: &[Scalar], timings: &mut BTreeMap<String, u128>) -> Result<OracleReport> {
    let oracle = timed(timings, "oracle", || problem.oracle_moments(ours.len()))?;
    Ok(OracleReport {
        agreement_window: agreement_window(ours, &oracle),
        moments: ratio_strings(&oracle),
    })
}

/// Moments through the equation, optionally checked against the Fock model.
pub fn run_moments(spec: &ProblemSpec, with_oracle: bool) -> Result<Report> {
    let mut report = Report::new("moments");
    let problem = timed(&mut report.timings, "realize", || Problem::new(spec.clone()))?;
    let order = spec.order;
    let solved = timed(&mut report.timings, "solve", || problem.solve(order))?;
    let moments = moments_of(&solved.stieltjes, order);
    report.order = Some(order);
    report.realization = Some(problem.dims());
    report.moments = Some(ratio_strings(&moments));
    if with_oracle {
        let o = oracle_report(&problem, &moments, &mut report.timings)?;
        if o.agreement_window < order {
            report.status = Status::Failed;
        }
        report.oracle = Some(o);
    }
    Ok(report)
}

/// The Stieltjes series, the solution matrix and the side conditions.
pub fn run_stieltjes(spec: &ProblemSpec) -> Result<Report> {
    let mut report = Report::new("stieltjes");
    let problem = timed(&mut report.timings, "realize", || Problem::new(spec.clone()))?;
    let solved = timed(&mut report.timings, "solve", || problem.solve(spec.order))?;
    report.order = Some(spec.order);
    report.realization = Some(problem.dims());
    report.moments = Some(ratio_strings(&moments_of(&solved.stieltjes, spec.order)));
    report.sd_checks = Some(SdChecks::from_solution(&solved.solution));
    report.stieltjes = Some(solved.stieltjes);
    report.g = Some(solved.solution.g);
    Ok(report)
}

/// The oracle path alone.
pub fn run_oracle(spec: &ProblemSpec) -> Result<Report> {
    let mut report = Report::new("oracle");
    let problem = Problem::new(spec.clone())?;
    let moments = timed(&mut report.timings, "oracle", || problem.oracle_moments(spec.order))?;
    report.order = Some(spec.order);
    report.moments = Some(ratio_strings(&moments));
    Ok(report)
}

/// The full pipeline: solve, search for an annihilator, certify it.
pub fn run_annihilator(spec: &ProblemSpec, with_oracle: bool) -> Result<Report> {
    let mut report = Report::new("annihilator");
    let problem = timed(&mut report.timings, "realize", || Problem::new(spec.clone()))?;
    let guard = spec.guard();
    let bounds = SearchBounds {
        degx: spec.degx,
        degy: spec.degy,
        max_degx: spec.degx + ESCALATION_STEPS,
        max_degy: spec.degy + ESCALATION_STEPS,
        guard,
    };
    let base = timed(&mut report.timings, "solve", || problem.solve(spec.order))?;
    let mut best = base.clone();
    let start = Instant::now();
    let outcome = search_annihilator(bounds, |need| {
        let order = need.max(spec.order);
        if best.solution.order < order {
            best = problem.solve(order)?;
        }
        Ok(best.stieltjes.clone())
    })?;
    report.timings.insert("certify".into(), start.elapsed().as_millis());

    let moments = moments_of(&base.stieltjes, spec.order);
    let checks = SdChecks::from_solution(&base.solution);
    let spectral = checks.gsde1.iter().chain(&best.solution.spectral_ok).all(|&b| b);
    let s = &best.stieltjes;
    let ann = match &outcome.poly {
        Some(p) => {
            let certified = verify_annihilator(p, s, guard) && spectral;
            report.polygon = Some(PolygonReport::of(p));
            AnnihilatorReport {
                polynomial: Some(p.clone()),
                display: Some(p.to_string()),
                certified,
                vanishing_window: vanishing_window(p, s),
                guard,
                series_order: best.solution.order,
                escalation: outcome.tried.clone(),
                nonsingular: Some(check_nonsingular(p, s)),
                irreducibility_checked: false,
            }
        }
        None => AnnihilatorReport {
            polynomial: None,
            display: None,
            certified: false,
            vanishing_window: None,
            guard,
            series_order: best.solution.order,
            escalation: outcome.tried.clone(),
            nonsingular: None,
            irreducibility_checked: false,
        },
    };
    report.status = match (&outcome.poly, ann.certified) {
        (None, _) => Status::NotFound,
        (Some(_), true) => Status::Certified,
        (Some(_), false) => Status::Inconclusive,
    };
    report.order = Some(spec.order);
    report.realization = Some(problem.dims());
    if with_oracle {
        report.oracle = Some(oracle_report(&problem, &moments, &mut report.timings)?);
    }
    report.moments = Some(ratio_strings(&moments));
    report.sd_checks = Some(checks);
    report.annihilator = Some(ann);
    Ok(report)
}

/// Side conditions, oracle agreement and a freeness spot check.
pub fn run_verify(spec: &ProblemSpec) -> Result<Report> {
    let mut report = Report::new("verify");
    let problem = timed(&mut report.timings, "realize", || Problem::new(spec.clone()))?;
    let solved = timed(&mut report.timings, "solve", || problem.solve(spec.order))?;
    let moments = moments_of(&solved.stieltjes, spec.order);
    let checks = SdChecks::from_solution(&solved.solution);
    let oracle = oracle_report(&problem, &moments, &mut report.timings)?;
    let free = timed(&mut report.timings, "freeness", || {
        if problem.laws.len() < 2 {
            return Ok(true);
        }
        free_independence_check(&problem.laws, 6, 3)
    })?;
    let v = VerifyReport {
        sd_checks_passed: checks.passed(spec.order),
        oracle_agrees: oracle.agreement_window == spec.order,
        free_independence: free,
        passed: false,
    };
    let passed = v.sd_checks_passed && v.oracle_agrees && v.free_independence;
    report.status = if passed {
        Status::Ok
    } else if checks.gsde3 == Nondegeneracy::Inconclusive {
        Status::Inconclusive
    } else {
        Status::Failed
    };
    report.order = Some(spec.order);
    report.realization = Some(problem.dims());
    report.moments = Some(ratio_strings(&moments));
    report.sd_checks = Some(checks);
    report.oracle = Some(oracle);
    report.verify = Some(VerifyReport { passed, ..v });
    Ok(report)
}

/// Newton polygon, root count and nonsingularity at the origin.
pub fn run_newton(p: &BivarPoly) -> Result<Report> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut report = Report::new("newton");
    report.polygon = Some(PolygonReport::of(p));
    Ok(report)
}

/// Reads a polynomial file: either a bare term list or a report containing one.
pub fn parse_polynomial_file(text: &str) -> Result<BivarPoly> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("polynomial file: {e}")))?;
    let terms = match &value {
        serde_json::Value::Array(_) => value.clone(),
        serde_json::Value::Object(obj) => obj
            .get("annihilator")
            .and_then(|a| a.get("polynomial"))
            .cloned()
            .ok_or_else(|| Error::Input("polynomial file has no annihilator.polynomial".into()))?,
        _ => return Err(Error::Input("polynomial file must hold a term list".into())),
    };
    serde_json::from_value(terms).map_err(|e| Error::Input(format!("polynomial terms: {e}")))
}
