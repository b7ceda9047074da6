use super::*;
use crate::geometry::Point;
use crate::operator::ScalarField;

const SAMPLE: &str = r#"
name = "censored-box"
experiment = "bhi-fit"
alpha = 1.5
n_paths = 2000
seed = 11

[domain]
kind = "half-space"

[kernel]
kind = "constant"
value = 1.0

[ladder]
lo = 0.02
hi = 0.3
per_decade = 4
"#;

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new("small", kind, 1.5, DomainSpec::HalfSpace);
    c.n_paths = 1500;
    c.ladder = LadderSpec::log(0.02, 0.3, 4);
    c
}

#[test]
fn toml_round_trip() {
    let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
    assert_eq!(cfg.experiment, ExperimentKind::BhiFit);
    assert_eq!(cfg.chain, ChainSpec::default());
    let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.hash(), again.hash());
    assert_eq!(cfg.hash().len(), 64);
}

#[test]
fn hash_tracks_content() {
    let a = ExperimentConfig::from_toml(SAMPLE).unwrap();
    let mut b = a.clone();
    b.seed += 1;
    assert_ne!(a.hash(), b.hash());
}

#[test]
fn unknown_keys_rejected() {
    let text = format!("{SAMPLE}\nbogus = 1\n");
    assert!(matches!(ExperimentConfig::from_toml(&text), Err(ExperimentError::Config(_))));
}

#[test]
fn ladder_default_is_eight_per_decade() {
    let t = LadderSpec::default().heights();
    assert_eq!(t.len(), 13);
    assert!((t[0] - 0.3).abs() < 1e-15 && (t[12] - 0.01).abs() < 1e-15);
    assert!(t.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn validation_rejects_bad_ladders() {
    let mut c = small(ExperimentKind::BhiFit);
    c.ladder = LadderSpec { points: Some(vec![0.1, 0.2, 0.05, 0.01, 0.005]), ..LadderSpec::default() };
    assert!(c.validate().is_err());
    c.ladder = LadderSpec { points: Some(vec![0.3, 0.2, 0.1, 0.05]), ..LadderSpec::default() };
    assert!(c.validate().is_err(), "fits need five points");
    c.experiment = ExperimentKind::Harnack;
    assert!(c.validate().is_ok());
}

#[test]
fn validation_rejects_bad_parameters() {
    let mut c = small(ExperimentKind::BhiFit);
    c.alpha = 2.0;
    assert!(c.validate().is_err());
    let mut c = small(ExperimentKind::BhiFit);
    c.chain.epsilon_fraction = 0.9;
    assert!(c.validate().is_err());
    let c = small(ExperimentKind::CurvedScan);
    assert!(c.validate().is_err(), "curved scan on a half-space");
}

#[test]
fn csv_carries_metadata() {
    let cfg = small(ExperimentKind::BhiFit);
    let rep = run_experiment(&cfg).unwrap();
    let csv = rep.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), format!("# experiment=small config_sha256={} seed=0", cfg.hash()));
    assert_eq!(lines.next().unwrap(), "t,estimate,ci_half_width,hits,absorbed_fraction,mean_steps,used");
    assert_eq!(lines.count(), cfg.ladder.heights().len());
}

#[test]
fn rerun_is_byte_identical() {
    let cfg = small(ExperimentKind::BhiFit);
    assert_eq!(run_experiment(&cfg).unwrap().to_csv(), run_experiment(&cfg).unwrap().to_csv());
}

#[test]
fn harnack_identity_pair_is_exact() {
    let mut cfg = small(ExperimentKind::Harnack);
    cfg.harnack.ks = vec![1];
    let rep = run_experiment(&cfg).unwrap();
    let id = rep.checks.iter().find(|c| c.label == "identity-pair").unwrap();
    assert!(id.passed, "{}", id.detail);
}

#[test]
fn harnack_rejects_pairs_near_the_boundary() {
    let mut cfg = small(ExperimentKind::Harnack);
    cfg.harnack.base_height = 0.1;
    assert!(matches!(run_experiment(&cfg), Err(ExperimentError::Config(_))));
}

#[test]
fn lipschitz_ratio_identical_events() {
    // u = v gives ratio one at every height
    let mut cfg = small(ExperimentKind::Lipschitz);
    cfg.domain = DomainSpec::Wedge { slope: 1.0 };
    cfg.box_a = 0.2;
    cfg.box_r = 0.2;
    cfg.ladder = LadderSpec::log(0.01, 0.1, 2);
    let rep = run_experiment(&cfg).unwrap();
    assert_eq!(rep.table.rows.len(), 3);
    for row in &rep.table.rows {
        let u: f64 = row[1].parse().unwrap();
        assert!(u > 0.0 && u < 1.0);
    }
}

#[test]
fn bump_is_c2_with_compact_support() {
    let b = SmoothBump { center: Point::new(&[0.0, 1.0]), radius: 0.5 };
    assert_eq!(b.value(&Point::new(&[0.0, 1.0])), 1.0);
    assert_eq!(b.value(&Point::new(&[0.5, 1.0])), 0.0);
    assert_eq!(b.value(&Point::new(&[3.0, 1.0])), 0.0);
    let mut out = Vec::new();
    b.ray_breaks(&Point::new(&[0.0, 1.0]), &Point::new(&[1.0, 0.0]), 10.0, &mut out);
    assert_eq!(out, vec![0.5]);
    out.clear();
    b.ray_breaks(&Point::new(&[-1.0, 1.0]), &Point::new(&[1.0, 0.0]), 10.0, &mut out);
    assert!((out[0] - 0.5).abs() < 1e-15 && (out[1] - 1.5).abs() < 1e-15);
}

#[test]
fn fit_reports_slope_checks() {
    let rep = run_experiment(&small(ExperimentKind::BhiFit)).unwrap();
    for label in ["r-squared", "decay-slope", "monotone"] {
        assert!(rep.checks.iter().any(|c| c.label == label), "missing {label}");
    }
}
