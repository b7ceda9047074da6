//! Experiments built on exit events of the box `K₀ = Δ(0,a,r)`:
//! `H₁` = exit into `K₁ = Δ(0,2a,r) \ K₀`, `H₂` = exit into `G \ Δ(0,2a,r)`.

use super::fit::fit_exponent;
use super::report::num;
use super::{Check, CsvTable, ExperimentConfig, ExperimentError, ExperimentReport};
use crate::geometry::{BoxRegion, DomainGeometry, Point, Region};
use crate::simulator::{exit_records, EstimateWithCI, ExitEvent, ExitKind, JumpChainConfig, Mode, StopRule};

pub(crate) struct BoxSetup {
    pub dom: DomainGeometry,
    pub stop: StopRule,
    pub h1: ExitEvent,
    pub h2: ExitEvent,
}

pub(crate) fn box_setup(cfg: &ExperimentConfig) -> Result<BoxSetup, ExperimentError> {
    let dom = cfg.domain_geometry();
    let base = Point::zeros(cfg.dim);
    let mk = |a: f64| {
        BoxRegion::new(base, a, cfg.box_r, dom.clone())
            .map(Region::Box)
            .map_err(|e| ExperimentError::Config(e.to_string()))
    };
    let (k0, upper) = (mk(cfg.box_a)?, mk(2.0 * cfg.box_a)?);
    let h2 = Region::All(vec![Region::Domain(dom.clone()), Region::Not(Box::new(upper.clone()))]);
    Ok(BoxSetup {
        dom,
        stop: StopRule::new(k0, upper.clone()),
        h1: ExitEvent::new(upper),
        h2: ExitEvent::new(h2),
    })
}

/// The point `(0̃, Γ(0̃) + t)` on the box axis.
pub(crate) fn axis_point(dom: &DomainGeometry, dim: usize, t: f64) -> Point {
    let tilde = vec![0.0; dim - 1];
    let g = dom.as_graph().map_or(0.0, |g| g.value(&tilde));
    Point::from_parts(&tilde, g + t)
}

pub(crate) struct PointStats {
    pub events: Vec<EstimateWithCI>,
    pub absorbed: f64,
    pub mean_steps: f64,
    pub hits: Vec<usize>,
    pub time: EstimateWithCI,
}

pub(crate) fn point_stats(
    start: &Point,
    chain: &JumpChainConfig,
    stop: &StopRule,
    events: &[&ExitEvent],
    n: usize,
) -> Result<PointStats, ExperimentError> {
    let recs = exit_records(start, chain, stop, n)?;
    let hits: Vec<usize> = events.iter().map(|e| recs.iter().filter(|r| e.matches(r)).count()).collect();
    let absorbed = recs.iter().filter(|r| r.classification == ExitKind::AbsorbedAtBoundary).count();
    let times: Vec<f64> = recs.iter().map(|r| r.process_time).collect();
    Ok(PointStats {
        events: hits.iter().map(|&h| EstimateWithCI::proportion(h, n)).collect(),
        absorbed: absorbed as f64 / n as f64,
        mean_steps: recs.iter().map(|r| r.steps as f64).sum::<f64>() / n as f64,
        hits,
        time: EstimateWithCI::from_samples(&times),
    })
}

/// `a/b` with the delta-method half-width.
fn ratio(a: &EstimateWithCI, b: &EstimateWithCI) -> (f64, f64) {
    let r = a.mean / b.mean;
    (r, r * (a.half_width_95 / a.mean + b.half_width_95 / b.mean))
}

fn coords(p: &Point) -> Vec<String> {
    p.coords().iter().map(|&c| num(c)).collect()
}

fn coord_header(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("{prefix}{}", i + 1)).collect()
}

/// `u(t) = P_{(0̃,t)}(H₁)` along the ladder and its log-log slope, which
/// should be α−1 for the censored chain and α/2 for the killed one.
pub fn bhi_decay_fit(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let s = box_setup(cfg)?;
    let chain = cfg.chain_config(cfg.seed);
    let heights = cfg.ladder.heights();
    let mut table = CsvTable::new(&["t", "estimate", "ci_half_width", "hits", "absorbed_fraction", "mean_steps", "used"]);
    let (mut ts, mut ests, mut dropped) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &heights {
        let st = point_stats(&axis_point(&s.dom, cfg.dim, t), &chain, &s.stop, &[&s.h1], cfg.n_paths)?;
        let e = st.events[0];
        let used = st.hits[0] > 0;
        table.push(vec![
            num(t),
            num(e.mean),
            num(e.half_width_95),
            st.hits[0].to_string(),
            num(st.absorbed),
            num(st.mean_steps),
            (used as u8).to_string(),
        ]);
        if used {
            ts.push(t);
            ests.push(e);
        } else {
            dropped.push(t);
        }
    }
    let target = match chain.mode {
        Mode::Censored => cfg.alpha - 1.0,
        Mode::Killed => cfg.alpha / 2.0,
    };
    let mut checks = Vec::new();
    if !dropped.is_empty() {
        checks.push(Check::new("zero-estimates", true, format!("dropped heights {dropped:?}")));
    }
    match fit_exponent(&ts, &ests) {
        Some(f) if ts.len() >= 5 => {
            checks.push(Check::new(
                "r-squared",
                f.r_squared >= cfg.min_r_squared,
                format!("r2 = {:.4} (min {})", f.r_squared, cfg.min_r_squared),
            ));
            checks.push(Check::new(
                "decay-slope",
                f.r_squared >= cfg.min_r_squared && (f.slope - target).abs() <= cfg.slope_tolerance,
                format!(
                    "slope = {:.4} ± {:.4}, target {:.4} ± {}",
                    f.slope, f.ci_half_width, target, cfg.slope_tolerance
                ),
            ));
        }
        _ => checks.push(Check::new("decay-slope", false, format!("only {} usable ladder points", ts.len()))),
    }
    let monotone = ests.windows(2).all(|w| w[1].mean <= w[0].mean + w[0].half_width_95 + w[1].half_width_95);
    checks.push(Check::new("monotone", monotone, "estimates non-increasing toward the boundary at CI resolution".into()));
    Ok(ExperimentReport::new(cfg, table, checks))
}

/// Ratios `u(x₁)/u(x₂)` of `u = P(H₁)` for vertical pairs with
/// `|x₁ - x₂| < 2^k r`, normalized by `2^{k(n+α)}`; plus a mirror pair and
/// an identical pair.
pub fn harnack_scan(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let s = box_setup(cfg)?;
    let chain = cfg.chain_config(cfg.seed);
    let hs = &cfg.harnack;
    let n = cfg.dim;
    let x1 = axis_point(&s.dom, n, hs.base_height);
    let admissible = |p: &Point| s.dom.distance(p) >= hs.radius && s.stop.run.contains(p);
    let mut pairs: Vec<(String, u32, Point, Point)> = vec![("identity".into(), 0, x1, x1)];
    for &k in &hs.ks {
        let sep = 0.9 * 2f64.powi(k as i32) * hs.radius;
        pairs.push((format!("dyadic-{k}"), k, x1, axis_point(&s.dom, n, hs.base_height - sep)));
    }
    if n >= 2 {
        let mut a = x1;
        a.set(0, 0.3 * cfg.box_r);
        let mut b = x1;
        b.set(0, -0.3 * cfg.box_r);
        pairs.push(("mirror".into(), 0, a, b));
    }
    for (label, _, a, b) in &pairs {
        if !admissible(a) || !admissible(b) {
            return Err(ExperimentError::Config(format!("harnack pair '{label}' violates B(x, r) ⊂ K₀")));
        }
    }
    let mut header = vec!["label".to_string(), "k".to_string()];
    header.extend(coord_header("x1_", n));
    header.extend(coord_header("x2_", n));
    for h in ["u1", "u1_ci", "u2", "u2_ci", "ratio", "ratio_ci", "normalized"] {
        header.push(h.into());
    }
    let mut table = CsvTable { header, rows: Vec::new() };
    let mut checks = Vec::new();
    let mut normalized = Vec::new();
    let u = |p: &Point| point_stats(p, &chain, &s.stop, &[&s.h1], cfg.n_paths).map(|st| st.events[0]);
    for (label, k, a, b) in &pairs {
        let (ua, ub) = (u(a)?, u(b)?);
        if ub.mean == 0.0 {
            checks.push(Check::new(label, false, "zero-probability denominator".into()));
            continue;
        }
        let (r, rhw) = ratio(&ua, &ub);
        let norm = r / 2f64.powf(*k as f64 * (n as f64 + cfg.alpha));
        let mut row = vec![label.clone(), k.to_string()];
        row.extend(coords(a));
        row.extend(coords(b));
        row.extend([ua.mean, ua.half_width_95, ub.mean, ub.half_width_95, r, rhw, norm].map(num));
        table.push(row);
        match label.as_str() {
            "identity" => checks.push(Check::new("identity-pair", r == 1.0, format!("ratio = {r}"))),
            "mirror" => checks.push(Check::new("mirror-pair", (r - 1.0).abs() <= rhw, format!("ratio = {r:.4} ± {rhw:.4}"))),
            _ => normalized.push((*k, norm)),
        }
    }
    if let Some(&(_, base)) = normalized.first() {
        let worst = normalized.iter().map(|&(_, v)| v).fold(0.0, f64::max);
        checks.push(Check::new(
            "normalized-bounded",
            worst <= hs.factor * base,
            format!("max normalized {worst:.4e}, k=1 baseline {base:.4e}, limit {:.4e}", hs.factor * base),
        ));
    }
    Ok(ExperimentReport::new(cfg, table, checks))
}

/// `sup u / u(x₀)` over a grid in `G ∩ B(0, 1/2)` with `x₀ = (0̃, 1/2)`,
/// for two seeds and two grid refinements. Here `u` is the probability of
/// leaving `K₀` into the box of half-width r/2 adjacent to it along `e₁`, so
/// the supremum sits off the axis rather than at `x₀`.
pub fn carleson_scan(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let mut s = box_setup(cfg)?;
    let n = cfg.dim;
    if n >= 2 {
        let mut base = Point::zeros(n);
        base.set(0, 1.5 * cfg.box_r);
        let g = s.dom.as_graph().map_or(0.0, |g| g.value(base.tilde()));
        base.set(n - 1, g);
        let side = BoxRegion::new(base, cfg.box_a, 0.5 * cfg.box_r, s.dom.clone())
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        s.stop.target = Region::Box(side.clone());
        s.h1 = ExitEvent::new(Region::Box(side));
    }
    let x0 = axis_point(&s.dom, n, 0.5);
    let laterals: Vec<f64> = if n >= 2 { vec![-0.4, -0.2, 0.0, 0.2, 0.4] } else { vec![0.0] };
    let mut heights = cfg.ladder.heights();
    heights.insert(0, 0.4);
    let coarse_floor = heights.iter().copied().fold(f64::INFINITY, f64::min).max(0.05);
    let mut grid = Vec::new();
    for &l in &laterals {
        for &t in &heights {
            let mut p = axis_point(&s.dom, n, t);
            if n >= 2 {
                p.set(0, l);
                let g = s.dom.as_graph().map_or(0.0, |g| g.value(p.tilde()));
                p.set(n - 1, g + t);
            }
            if p.norm() < 0.5 && s.dom.contains(&p) {
                grid.push((p, t >= coarse_floor));
            }
        }
    }
    let mut header = vec!["seed".to_string(), "level".to_string()];
    header.extend(coord_header("x", n));
    for h in ["u", "u_ci", "ratio"] {
        header.push(h.into());
    }
    let mut table = CsvTable { header, rows: Vec::new() };
    let mut sup = Vec::new();
    for seed in [cfg.seed, cfg.seed.wrapping_add(1)] {
        let chain = cfg.chain_config(seed);
        let u0 = point_stats(&x0, &chain, &s.stop, &[&s.h1], cfg.n_paths)?.events[0];
        if u0.mean == 0.0 {
            return Err(ExperimentError::Config("u(x₀) estimated as zero".into()));
        }
        let mut row = vec![seed.to_string(), "reference".into()];
        row.extend(coords(&x0));
        row.extend([u0.mean, u0.half_width_95, 1.0].map(num));
        table.push(row);
        let (mut best_coarse, mut best_fine) = ((1.0, 0.0), (1.0, 0.0));
        for (p, coarse) in &grid {
            let u = point_stats(p, &chain, &s.stop, &[&s.h1], cfg.n_paths)?.events[0];
            let r = ratio(&u, &u0);
            let mut row = vec![seed.to_string(), if *coarse { "coarse" } else { "fine" }.into()];
            row.extend(coords(p));
            row.extend([u.mean, u.half_width_95, r.0].map(num));
            table.push(row);
            if *coarse && r.0 > best_coarse.0 {
                best_coarse = r;
            }
            if r.0 > best_fine.0 {
                best_fine = r;
            }
        }
        sup.push((seed, best_coarse, best_fine));
    }
    let (a, b) = (sup[0].2, sup[1].2);
    let mut checks = vec![
        Check::new("finite", a.0.is_finite() && b.0.is_finite(), format!("sup ratios {:.4}, {:.4}", a.0, b.0)),
        Check::new(
            "seed-stability",
            (a.0 - b.0).abs() <= 2.0 * (a.1 + b.1),
            format!("|{:.4} - {:.4}| vs 2×({:.4} + {:.4})", a.0, b.0, a.1, b.1),
        ),
    ];
    for (seed, coarse, fine) in &sup {
        checks.push(Check::new(
            &format!("refinement-seed-{seed}"),
            fine.0 <= coarse.0 + coarse.1 + fine.1,
            format!("coarse {:.4}, refined {:.4}", coarse.0, fine.0),
        ));
    }
    Ok(ExperimentReport::new(cfg, table, checks))
}

/// `u/v` with `u = P(H₁)`, `v = P(H₂)` along the box axis of a Lipschitz
/// domain, and the decay exponent of `P(H₁)`.
pub fn lipschitz_ratio(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let s = box_setup(cfg)?;
    let chain = cfg.chain_config(cfg.seed);
    let mut table = CsvTable::new(&["t", "u", "u_ci", "v", "v_ci", "ratio", "ratio_ci"]);
    let (mut ts, mut us, mut ratios, mut dropped) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for t in cfg.ladder.heights() {
        let st = point_stats(&axis_point(&s.dom, cfg.dim, t), &chain, &s.stop, &[&s.h1, &s.h2], cfg.n_paths)?;
        let (u, v) = (st.events[0], st.events[1]);
        if u.mean == 0.0 || v.mean == 0.0 {
            dropped.push(t);
            table.push(vec![num(t), num(u.mean), num(u.half_width_95), num(v.mean), num(v.half_width_95), num(f64::NAN), num(f64::NAN)]);
            continue;
        }
        let r = ratio(&u, &v);
        table.push(vec![num(t), num(u.mean), num(u.half_width_95), num(v.mean), num(v.half_width_95), num(r.0), num(r.1)]);
        ts.push(t);
        us.push(u);
        ratios.push(r);
    }
    let mut checks = Vec::new();
    if !dropped.is_empty() {
        checks.push(Check::new("zero-estimates", true, format!("dropped heights {dropped:?}")));
    }
    if ratios.is_empty() {
        checks.push(Check::new("ratio-bounded", false, "no usable ladder points".into()));
        return Ok(ExperimentReport::new(cfg, table, checks));
    }
    let max = ratios.iter().copied().fold((f64::NEG_INFINITY, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let min = ratios.iter().copied().fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    // the spread counts as excessive only if it survives shrinking both ends
    // to their CI limits
    let spread = (max.0 - max.1) / (min.0 + min.1);
    checks.push(Check::new(
        "ratio-bounded",
        spread <= cfg.ratio_bound,
        format!("max/min = {:.4} (CI-adjusted {:.4}), bound {}", max.0 / min.0, spread, cfg.ratio_bound),
    ));
    match fit_exponent(&ts, &us) {
        Some(f) if ts.len() >= 3 => {
            let cap = cfg.alpha + cfg.slope_tolerance;
            checks.push(Check::new(
                "lower-bound-exponent",
                f.r_squared >= cfg.min_r_squared && f.slope <= cap,
                format!("P(H1) slope = {:.4} ± {:.4} (cap {cap:.4}), r2 = {:.4}", f.slope, f.ci_half_width, f.r_squared),
            ));
        }
        _ => checks.push(Check::new("lower-bound-exponent", false, "too few usable points".into())),
    }
    Ok(ExperimentReport::new(cfg, table, checks))
}

/// Exit probabilities and mean exit times from `(0̃,t)` against the same
/// quantities from `(0̃,λt)` in the dilated configuration, run on an
/// independent seed.
pub fn scaling_check(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let s = box_setup(cfg)?;
    let lambda = cfg.scaling.lambda;
    if !(lambda > 0.0) {
        return Err(ExperimentError::Config(format!("scaling.lambda = {lambda}")));
    }
    let time_factor = lambda.powf(cfg.alpha);
    let small = cfg.chain_config(cfg.seed);
    let big = cfg.chain_config(cfg.seed.wrapping_add(1)).scaled(lambda);
    let big_stop = s.stop.scaled(lambda, time_factor);
    let big_h1 = ExitEvent::new(s.h1.region.scaled(lambda));
    let mut table = CsvTable::new(&[
        "t", "p", "p_ci", "p_scaled", "p_scaled_ci", "time", "time_ci", "time_scaled", "time_scaled_ci", "time_ratio",
    ]);
    let mut checks = Vec::new();
    for &t in &cfg.scaling.start_heights {
        let x = axis_point(&s.dom, cfg.dim, t);
        if !s.stop.run.contains(&x) {
            return Err(ExperimentError::Config(format!("start height {t} outside the box")));
        }
        let a = point_stats(&x, &small, &s.stop, &[&s.h1], cfg.n_paths)?;
        let b = point_stats(&(x * lambda), &big, &big_stop, &[&big_h1], cfg.n_paths)?;
        let (pa, pb) = (a.events[0], b.events[0]);
        let tr = b.time.mean / a.time.mean;
        table.push(
            [t, pa.mean, pa.half_width_95, pb.mean, pb.half_width_95, a.time.mean, a.time.half_width_95, b.time.mean, b.time.half_width_95, tr]
                .map(num)
                .to_vec(),
        );
        checks.push(Check::new(
            &format!("probability-invariant-t{t}"),
            pa.agrees_with(&pb, 1.0),
            format!("{:.5} ± {:.5} vs {:.5} ± {:.5}", pa.mean, pa.half_width_95, pb.mean, pb.half_width_95),
        ));
        let rescaled = EstimateWithCI {
            mean: b.time.mean / time_factor,
            half_width_95: b.time.half_width_95 / time_factor,
            n_paths: b.time.n_paths,
        };
        checks.push(Check::new(
            &format!("time-scaling-t{t}"),
            a.time.agrees_with(&rescaled, 1.0),
            format!("ratio {tr:.4} vs λ^α = {time_factor:.4}"),
        ));
    }
    Ok(ExperimentReport::new(cfg, table, checks))
}
