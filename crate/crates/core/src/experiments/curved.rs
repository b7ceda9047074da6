use rayon::prelude::*;

use super::boxes::axis_point;
use super::fit::fit_exponent_unweighted;
use super::report::num;
use super::{Check, CsvTable, CurvedRole, DomainSpec, ExperimentConfig, ExperimentError, ExperimentReport};
use crate::catalog::{barrier_exponent, PowerFunction};
use crate::geometry::BoundaryGraph;
use crate::operator::{regional_pv, OperatorProblem, SweepVerdict};

/// Regional operator of `h_p(y) = (y_n - Γ(ỹ))^p` on `{x_n > c|x̃|^β}` along
/// the axis, with the role-specific bound check.
pub fn curved_bound_scan(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let DomainSpec::PowerGraph { c, beta } = cfg.domain else {
        return Err(ExperimentError::Config("curved-scan needs a power-graph domain".into()));
    };
    let alpha = cfg.alpha;
    let spec = &cfg.curved;
    let p = spec.p.unwrap_or(match spec.role {
        CurvedRole::Positivity => barrier_exponent(alpha, beta),
        CurvedRole::DecayBound | CurvedRole::Divergence => alpha - 1.0,
    });
    let graph = BoundaryGraph::power(cfg.dim, c, beta);
    let h = PowerFunction::graph_height(graph, p);
    let dom = cfg.domain_geometry();
    let kernel = cfg.kernel();
    let problem = OperatorProblem::new(&h, &dom, &kernel, alpha);
    let heights = cfg.ladder.heights();
    let results = heights
        .par_iter()
        .map(|&t| regional_pv(&problem, &axis_point(&dom, cfg.dim, t)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = CsvTable::new(&["t", "value", "error_estimate", "converged", "verdict", "bound_reference"]);
    let mut ok = Vec::new();
    let mut excluded = Vec::new();
    for (&t, r) in heights.iter().zip(&results) {
        let reference = match spec.role {
            CurvedRole::DecayBound if beta < 2.0 => t.powf(beta - 2.0),
            CurvedRole::DecayBound => t.ln().abs() + 1.0,
            _ => t.powf(p - alpha),
        };
        table.push(vec![
            num(t),
            num(r.value),
            num(r.error_estimate),
            (r.converged as u8).to_string(),
            format!("{:?}", r.verdict),
            num(reference),
        ]);
        if r.converged && r.value.is_finite() {
            ok.push((t, r.value));
        } else {
            excluded.push(t);
        }
    }

    let tol = spec.exponent_tolerance;
    let mut checks = Vec::new();
    if spec.role == CurvedRole::Divergence {
        let all = results.iter().all(|r| r.verdict == SweepVerdict::DivergentNegative);
        checks.push(Check::new(
            "divergent-negative",
            all,
            format!("verdicts {:?}", results.iter().map(|r| r.verdict).collect::<Vec<_>>()),
        ));
        return Ok(ExperimentReport::new(cfg, table, checks));
    }
    checks.push(Check::new(
        "converged",
        excluded.is_empty() || beta <= alpha,
        if excluded.is_empty() { "all ladder points converged".into() } else { format!("excluded heights {excluded:?}") },
    ));
    let ts: Vec<f64> = ok.iter().map(|v| v.0).collect();
    match spec.role {
        CurvedRole::DecayBound if beta < 2.0 => {
            let abs: Vec<f64> = ok.iter().map(|v| v.1.abs()).collect();
            checks.push(slope_check(&ts, &abs, beta - 2.0 - tol, cfg.min_r_squared, "|value|"));
        }
        CurvedRole::DecayBound => {
            // |value| / (|ln t| + 1) must stay bounded toward the boundary
            let q: Vec<f64> = ok.iter().map(|&(t, v)| v.abs() / (t.ln().abs() + 1.0)).collect();
            let pass = q.len() >= 2 && q[q.len() - 1] <= 2.0 * q[0];
            checks.push(Check::new("log-bound", pass, format!("|value|/(|ln t|+1) from {:.4} to {:.4}", q[0], q[q.len() - 1])));
        }
        CurvedRole::Positivity => {
            let positive = ok.iter().all(|v| v.1 > 0.0);
            checks.push(Check::new("positive", positive && !ok.is_empty(), format!("{} values, all positive: {positive}", ok.len())));
            if positive {
                let vals: Vec<f64> = ok.iter().map(|v| v.1).collect();
                checks.push(slope_check(&ts, &vals, p - alpha - tol, cfg.min_r_squared, "value"));
            }
        }
        CurvedRole::Divergence => unreachable!(),
    }
    Ok(ExperimentReport::new(cfg, table, checks))
}

fn slope_check(ts: &[f64], vals: &[f64], floor: f64, min_r2: f64, what: &str) -> Check {
    match fit_exponent_unweighted(ts, vals) {
        Some(f) => Check::new(
            "exponent",
            f.r_squared >= min_r2 && f.slope >= floor,
            format!("{what} ~ t^{:.4} (± {:.4}), floor {floor:.4}, r2 = {:.4}", f.slope, f.ci_half_width, f.r_squared),
        ),
        None => Check::new("exponent", false, format!("too few points ({})", ts.len())),
    }
}
