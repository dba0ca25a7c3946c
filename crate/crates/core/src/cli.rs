//! Pipeline orchestration behind the command-line front end: stage
//! sequencing, verdict aggregation, exit codes, and report rendering.
//!
//! Exit codes: 0 sufficient-certified, 1 necessary-consistent,
//! 2 inconclusive, 3 refuted, 4 input error.

use std::path::Path;

use thiserror::Error;

use crate::config::{OutputFormat, RunConfig};
use crate::ext::ExtVal;
use crate::first_order::{first_order_certificate, FirstOrderVerdict};
use crate::multipliers::jacobian_uniqueness_check;
use crate::oracle::{oracle_stage, GrowthVerdict};
use crate::problem::{load_problem, CandidatePoint, ProblemSpec};
use crate::report::{from_json, to_json, CertificateReport, PointEcho, SCHEMA_VERSION};
use crate::second_order::second_order_certificate;
use crate::verdict::Verdict;

pub const EXIT_INPUT_ERROR: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("internal failure: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_INPUT_ERROR
    }
}

/// Seed from the environment (`MINIMAX_CERT_SEED`), default 0.
pub fn seed_from_env() -> u64 {
    std::env::var("MINIMAX_CERT_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn resolve_point(
    spec: &ProblemSpec,
    file_x: Option<Vec<f64>>,
    file_y: Option<Vec<f64>>,
    cli_x: Option<Vec<f64>>,
    cli_y: Option<Vec<f64>>,
) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let x = cli_x.or(file_x).ok_or_else(|| {
        CliError::Input("no candidate x given (use --x or a point_x line in the file)".into())
    })?;
    let y = cli_y.or(file_y).ok_or_else(|| {
        CliError::Input("no candidate y given (use --y or a point_y line in the file)".into())
    })?;
    if x.len() != spec.n || y.len() != spec.m {
        return Err(CliError::Input(format!(
            "point dimensions ({}, {}) do not match problem ({}, {})",
            x.len(),
            y.len(),
            spec.n,
            spec.m
        )));
    }
    Ok((x, y))
}

/// Run the certification pipeline. Stages run in order first -> second
/// -> jacobian -> oracle; a refuted stage does not stop later stages
/// unless `fail_fast` is set.
pub fn run_certify(
    problem_path: &Path,
    cli_x: Option<Vec<f64>>,
    cli_y: Option<Vec<f64>>,
    cfg: &RunConfig,
) -> Result<CertificateReport, CliError> {
    cfg.validate().map_err(CliError::Input)?;
    let loaded = load_problem(problem_path).map_err(|e| CliError::Input(e.to_string()))?;
    let spec = loaded.spec;
    let (x, y) = resolve_point(&spec, loaded.point_x, loaded.point_y, cli_x, cli_y)?;
    let point = CandidatePoint::new(&spec, &x, &y).map_err(|e| CliError::Input(e.to_string()))?;

    let mut report = CertificateReport {
        schema: SCHEMA_VERSION,
        problem_digest: spec.digest(),
        point: PointEcho { x, y },
        first_order: None,
        second_order: None,
        jacobian: None,
        oracle: None,
        overall: Verdict::Inconclusive,
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    };

    // the second-order certificate is gated on the first-order one, so
    // the first stage runs whenever either is enabled
    let first = if cfg.stages.first || cfg.stages.second {
        Some(
            first_order_certificate(&spec, &point, cfg)
                .map_err(|e| CliError::Internal(e.to_string()))?,
        )
    } else {
        None
    };
    if cfg.stages.first {
        report.first_order = first.clone();
    }
    let first_refuted = first
        .as_ref()
        .map(|f| f.overall == FirstOrderVerdict::Refuted)
        .unwrap_or(false);
    let stop = cfg.fail_fast && first_refuted;

    if cfg.stages.second && !stop {
        let base = first.as_ref().expect("first stage computed above");
        report.second_order = Some(
            second_order_certificate(&spec, &point, base, cfg)
                .map_err(|e| CliError::Internal(e.to_string()))?,
        );
    }
    let stop = stop
        || (cfg.fail_fast
            && report
                .second_order
                .as_ref()
                .map(|s| s.overall == Verdict::Refuted)
                .unwrap_or(false));

    if cfg.stages.jacobian && !stop {
        let eps_act = cfg
            .eps_act
            .unwrap_or_else(|| crate::cones::default_eps_act(&point));
        match crate::cones::active_sets(&spec, &point, eps_act) {
            Ok(act) => {
                report.jacobian = Some(
                    jacobian_uniqueness_check(&spec, &point, &act)
                        .map_err(|e| CliError::Internal(e.to_string()))?,
                );
            }
            Err(_) => {
                // infeasible candidate: the diagnostic is undefined and
                // the first-order stage already carries the refutation
            }
        }
    }

    if cfg.stages.oracle && !stop {
        let kappa = cfg.kappa.unwrap_or_else(|| estimate_kappa(&report));
        report.oracle = Some(
            oracle_stage(&spec, &point, cfg, kappa)
                .map_err(|e| CliError::Internal(e.to_string()))?,
        );
    }

    report.overall = report.combined_verdict();
    Ok(report)
}

/// Calmness modulus estimate from the second-order stage: twice the
/// largest maximizer norm over critical unit directions, floored at 2.
fn estimate_kappa(report: &CertificateReport) -> f64 {
    let mut ratio = 1.0f64;
    if let Some(second) = &report.second_order {
        for d in second.directions.iter().filter(|d| d.critical) {
            let h_norm = d.best_h.iter().map(|v| v * v).sum::<f64>().sqrt();
            ratio = ratio.max(h_norm);
        }
    }
    2.0 * ratio.max(1.0)
}

/// Oracle-only run (the `oracle` subcommand).
pub fn run_oracle(
    problem_path: &Path,
    cli_x: Option<Vec<f64>>,
    cli_y: Option<Vec<f64>>,
    cfg: &RunConfig,
) -> Result<CertificateReport, CliError> {
    let mut cfg = cfg.clone();
    cfg.stages.first = false;
    cfg.stages.second = false;
    cfg.stages.jacobian = false;
    cfg.stages.oracle = true;
    run_certify(problem_path, cli_x, cli_y, &cfg)
}

/// Load a JSON report and render it as prose.
pub fn run_explain(report_path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(report_path)
        .map_err(|e| CliError::Input(format!("cannot read report: {e}")))?;
    let report = from_json(&text).map_err(|e| CliError::Input(format!("corrupt report: {e}")))?;
    Ok(explain(&report))
}

pub fn emit(report: &CertificateReport) -> Result<String, CliError> {
    match report.config.format {
        OutputFormat::Json => to_json(report).map_err(|e| CliError::Internal(e.to_string())),
        OutputFormat::Text => Ok(render_text(report)),
    }
}

// -------------------- rendering --------------------

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

pub fn render_text(report: &CertificateReport) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    push(&mut out, format!("problem digest : {}", report.problem_digest));
    push(
        &mut out,
        format!(
            "candidate      : x = {}, y = {}",
            fmt_vec(&report.point.x),
            fmt_vec(&report.point.y)
        ),
    );
    if let Some(first) = &report.first_order {
        push(&mut out, format!("first-order    : {:?}", first.overall));
        push(
            &mut out,
            format!(
                "  inner stationarity {} (value {})",
                pass_str(first.inner_pass),
                first.inner_value
            ),
        );
        push(
            &mut out,
            format!(
                "  outer directional duals {} over {} directions",
                pass_str(first.outer_pass),
                first.directions.len()
            ),
        );
        match &first.witness {
            Some(w) => push(
                &mut out,
                format!(
                    "  multiplier witness alpha = {} {}, beta = {} {}",
                    fmt_vec(&w.alpha_ineq),
                    fmt_vec(&w.alpha_eq),
                    fmt_vec(&w.beta_ineq),
                    fmt_vec(&w.beta_eq)
                ),
            ),
            None => push(&mut out, "  no multiplier witness".into()),
        }
        push(
            &mut out,
            format!(
                "  CQ: MFCQ {} | RCRCQ {} | affine {} | outer {}",
                pass_str(first.cq.mfcq.pass),
                pass_str(first.cq.rcrcq.pass),
                pass_str(first.cq.linear_cq),
                pass_str(first.cq.outer_cq)
            ),
        );
    }
    if let Some(second) = &report.second_order {
        push(&mut out, format!("second-order   : {}", second.overall));
        if let Some(sonc) = &second.inner_sonc {
            push(
                &mut out,
                format!(
                    "  inner curvature necessary check {} ({} directions)",
                    pass_str(sonc.pass),
                    sonc.sampled
                ),
            );
        }
        push(
            &mut out,
            format!(
                "  {} critical direction(s) of {} sampled",
                second.critical_count,
                second.directions.len()
            ),
        );
        for d in second.directions.iter().filter(|d| d.critical) {
            push(
                &mut out,
                format!(
                    "    u = {}: value {:?}, h = {}, SSOSC {}, verdict {}",
                    fmt_vec(&d.u),
                    d.lower,
                    fmt_vec(&d.best_h),
                    d.ssosc
                        .as_ref()
                        .map(|s| pass_str(s.pass))
                        .unwrap_or("n/a"),
                    d.verdict
                ),
            );
        }
    }
    if let Some(jac) = &report.jacobian {
        push(
            &mut out,
            format!(
                "jacobian-uniq  : {} (LICQ {}, KKT {}, strict compl. {}, inner SOSC {})",
                pass_str(jac.overall),
                pass_str(jac.licq),
                pass_str(jac.kkt),
                pass_str(jac.strict_complementarity),
                pass_str(jac.sosc)
            ),
        );
    }
    if let Some(oracle) = &report.oracle {
        push(&mut out, format!("oracle         : {}", oracle.overall));
        push(
            &mut out,
            format!(
                "  defining inequalities: inner {}, outer {} (kappa {:.3})",
                pass_str(oracle.calm.inner_pass),
                pass_str(oracle.calm.outer_pass),
                oracle.kappa
            ),
        );
        for g in &oracle.growth {
            push(
                &mut out,
                format!(
                    "  growth at delta {:.3}: eps_hat {:.4}, mu_hat {:.4} -> {:?}",
                    g.delta, g.eps_hat, g.mu_hat, g.verdict
                ),
            );
        }
    }
    push(&mut out, format!("overall        : {}", report.overall));
    out
}

fn pass_str(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

/// Prose rendering of a report, naming the mathematical conditions that
/// passed or failed together with their witnesses.
pub fn explain(report: &CertificateReport) -> String {
    let mut out = String::new();
    let mut say = |line: String| {
        out.push_str(&line);
        out.push('\n');
    };
    say(format!(
        "Certificate for problem {} at x = {}, y = {} (overall: {}).",
        &report.problem_digest[..12.min(report.problem_digest.len())],
        fmt_vec(&report.point.x),
        fmt_vec(&report.point.y),
        report.overall
    ));
    if let Some(first) = &report.first_order {
        match first.overall {
            FirstOrderVerdict::Certified => {
                say("First-order KKT conditions hold: the inner maximization is stationary, \
                     every sampled outer direction has a nonnegative dual directional \
                     derivative, and a multiplier pair exists."
                    .into());
                if let Some(w) = &first.witness {
                    say(format!(
                        "  Witness multipliers: alpha = {} {}, beta = {} {}.",
                        fmt_vec(&w.alpha_ineq),
                        fmt_vec(&w.alpha_eq),
                        fmt_vec(&w.beta_ineq),
                        fmt_vec(&w.beta_eq)
                    ));
                }
                let worst_gap = first
                    .directions
                    .iter()
                    .map(|d| d.gap)
                    .fold(0.0f64, f64::max);
                say(format!(
                    "  Strong duality verified on {} directions (worst primal-dual gap {:.3e}).",
                    first.directions.len(),
                    worst_gap
                ));
            }
            FirstOrderVerdict::Refuted => {
                say("First-order conditions FAIL under verified constraint qualifications:".into());
                for note in &first.notes {
                    say(format!("  - {note}"));
                }
                for d in &first.directions {
                    let bad = matches!(d.dual, ExtVal::Finite(v) if v < 0.0)
                        || d.dual == ExtVal::MinusInf;
                    if bad {
                        say(format!(
                            "  Direction u = {} has dual directional value {} (gap {:.3e}).",
                            fmt_vec(&d.u),
                            d.dual,
                            d.gap
                        ));
                        break;
                    }
                }
            }
            FirstOrderVerdict::Inconclusive => {
                say("First-order check is inconclusive: a required hypothesis was not \
                     established."
                    .into());
                for note in &first.notes {
                    say(format!("  - {note}"));
                }
            }
        }
    }
    if let Some(second) = &report.second_order {
        say(format!(
            "Second-order analysis: {} ({} critical directions).",
            second.overall, second.critical_count
        ));
        for d in second.directions.iter().filter(|d| d.critical) {
            say(format!(
                "  Critical u = {}: best inner direction h = {}, quadratic-form value {:?}, \
                 SSOSC {}.",
                fmt_vec(&d.u),
                fmt_vec(&d.best_h),
                d.lower,
                d.ssosc
                    .as_ref()
                    .map(|s| if s.pass { "holds" } else { "fails" })
                    .unwrap_or("not evaluated")
            ));
        }
        if second.growth_claimed {
            say("  The strict quadratic-form test and SSOSC certify the second-order growth \
                 condition."
                .into());
        }
    }
    if let Some(oracle) = &report.oracle {
        say(format!("Grid oracle: {}.", oracle.overall));
        if let Some(w) = &oracle.calm.worst_inner {
            say(format!(
                "  Inner defining inequality violated at y = {} by {:.3e}.",
                fmt_vec(&w.point),
                w.violation
            ));
        }
        if let Some(w) = &oracle.calm.worst_outer {
            say(format!(
                "  Outer defining inequality violated at x = {} by {:.3e}.",
                fmt_vec(&w.point),
                w.violation
            ));
        }
        for g in &oracle.growth {
            match g.verdict {
                GrowthVerdict::Pass => say(format!(
                    "  Growth constants at radius {:.3}: eps_hat = {:.4}, mu_hat = {:.4}.",
                    g.delta, g.eps_hat, g.mu_hat
                )),
                GrowthVerdict::Fail => say(format!(
                    "  Growth FAILS at radius {:.3} (eps_hat = {:.4}, mu_hat = {:.4}).",
                    g.delta, g.eps_hat, g.mu_hat
                )),
                GrowthVerdict::BoundaryDegenerate => say(format!(
                    "  Growth estimate at radius {:.3} is boundary-dominated \
                     (eps_hat = {:.4}, mu_hat = {:.4}); inconclusive.",
                    g.delta, g.eps_hat, g.mu_hat
                )),
            }
        }
    }
    if let Some(jac) = &report.jacobian {
        say(format!(
            "Inner strong regularity diagnostic (LICQ + KKT + strict complementarity + SOSC): {}.",
            if jac.overall { "holds" } else { "not established" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_fixture(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const P_SADDLE: &str = "n = 1\nm = 1\nf = x1*y1 - y1^2\npoint_x = 0\npoint_y = 0\n";

    #[test]
    fn missing_file_is_input_error() {
        let err = run_certify(
            Path::new("/nonexistent/problem.prob"),
            None,
            None,
            &RunConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), EXIT_INPUT_ERROR);
    }

    #[test]
    fn missing_point_is_input_error() {
        let f = write_fixture("n = 1\nm = 1\nf = y1\n");
        let err = run_certify(f.path(), None, None, &RunConfig::default()).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }

    #[test]
    fn bad_resolution_is_input_error() {
        let f = write_fixture(P_SADDLE);
        let mut cfg = RunConfig::default();
        cfg.resolution = 2;
        let err = run_certify(f.path(), None, None, &cfg).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }

    #[test]
    fn cli_point_overrides_file_point() {
        let f = write_fixture(P_SADDLE);
        let mut cfg = RunConfig::default();
        cfg.stages.second = false;
        cfg.stages.jacobian = false;
        cfg.stages.oracle = false;
        let report = run_certify(f.path(), Some(vec![0.5]), Some(vec![0.25]), &cfg).unwrap();
        assert_eq!(report.point.x, vec![0.5]);
        assert_eq!(report.overall, Verdict::Refuted);
    }

    #[test]
    fn saddle_certifies_end_to_end() {
        let f = write_fixture(P_SADDLE);
        let report = run_certify(f.path(), None, None, &RunConfig::default()).unwrap();
        assert_eq!(report.overall, Verdict::SufficientCertified);
        assert_eq!(report.overall.exit_code(), 0);
    }

    #[test]
    fn explain_renders_prose() {
        let f = write_fixture(P_SADDLE);
        let report = run_certify(f.path(), None, None, &RunConfig::default()).unwrap();
        let text = explain(&report);
        assert!(text.contains("First-order KKT conditions hold"));
        assert!(text.contains("SSOSC"));
    }
}
