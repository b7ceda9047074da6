use super::report::num;
use super::{Check, CsvTable, ExperimentConfig, ExperimentError, ExperimentReport};
use crate::geometry::{Point, Region};
use crate::operator::{regional_pv, GridGenerator, OperatorProblem, ScalarField};
use crate::simulator::{dynkin_check, StopRule};

/// `(1 - |y-c|²/R²)³` inside `B(c, R)`, zero outside: C² with compact support.
#[derive(Debug, Clone, Copy)]
pub struct SmoothBump {
    pub center: Point,
    pub radius: f64,
}

impl ScalarField for SmoothBump {
    fn value(&self, y: &Point) -> f64 {
        let s = y.dist(&self.center) / self.radius;
        if s < 1.0 {
            (1.0 - s * s).powi(3)
        } else {
            0.0
        }
    }

    fn ray_breaks(&self, x: &Point, dir: &Point, r_max: f64, out: &mut Vec<f64>) {
        // |x + r d - c|² = R²
        let w = *x - self.center;
        let b = w.dot(dir);
        let disc = b * b - (w.norm_sq() - self.radius * self.radius);
        if disc > 0.0 {
            let sq = disc.sqrt();
            out.extend([-b - sq, -b + sq].into_iter().filter(|&r| r > 0.0 && r < r_max));
        }
    }
}

/// Both sides of Dynkin's formula for a bump started at its center, stopped
/// on leaving a ball or at the horizon. The generator is tabulated by the
/// quadrature engine on a grid over the ball.
pub fn dynkin_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let spec = &cfg.dynkin;
    let center = Point::new(&spec.center);
    let dom = cfg.domain_geometry();
    if dom.distance(&center) <= spec.region_radius {
        return Err(ExperimentError::Config("the stopping ball must lie inside the domain".into()));
    }
    let f = SmoothBump { center, radius: spec.bump_radius };
    let kernel = cfg.kernel();
    let problem = OperatorProblem::new(&f, &dom, &kernel, cfg.alpha);
    let ra = spec.region_radius;
    let lo = center - Point::new(&vec![ra; cfg.dim]);
    let hi = center + Point::new(&vec![ra; cfg.dim]);
    let counts = vec![spec.grid; cfg.dim];
    let grid = GridGenerator::build(lo, hi, &counts, |x| regional_pv(&problem, x).map_or(f64::NAN, |r| r.value));
    let bad = grid.nodes().filter(|(_, v)| !v.is_finite()).count();
    if bad > 0 {
        return Err(ExperimentError::Config(format!("{bad} generator nodes failed")));
    }

    let region = Region::All(vec![Region::Domain(dom.clone()), Region::Ball { center, radius: ra }]);
    let stop = StopRule::new(region, Region::Everywhere).with_horizon(spec.horizon);
    let mut chain = cfg.chain_config(cfg.seed);
    chain.epsilon_cap = spec.epsilon_cap;
    let lf = |x: &Point| grid.eval(x);
    let res = dynkin_check(&f, &lf, &center, &chain, &stop, cfg.n_paths)?;
    let f0 = f.value(&center);
    let rel = res.relative_to_increment(f0);
    let mut table = CsvTable::new(&[
        "f_start", "lhs", "lhs_ci", "rhs", "rhs_ci", "discrepancy", "discrepancy_ci", "relative_to_increment", "generator_at_start",
    ]);
    table.push(
        [f0, res.lhs.mean, res.lhs.half_width_95, res.rhs.mean, res.rhs.half_width_95, res.discrepancy, res.discrepancy_half_width, rel, lf(&center)]
            .map(num)
            .to_vec(),
    );
    let checks = vec![Check::new(
        "dynkin-identity",
        rel < spec.tolerance,
        format!(
            "|lhs - rhs| = {:.3e} ± {:.3e}, {:.2}% of the increment {:.4e} (limit {}%)",
            res.discrepancy,
            res.discrepancy_half_width,
            100.0 * rel,
            res.lhs.mean - f0,
            100.0 * spec.tolerance
        ),
    )];
    Ok(ExperimentReport::new(cfg, table, checks))
}
