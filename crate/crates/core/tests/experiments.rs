use wavedens::experiments::*;
use wavedens::grid::BoxRegion;
use wavedens::Error;

fn config(theorem: u8) -> ExperimentConfig {
    ExperimentConfig {
        theorem,
        density: "uniform01".into(),
        dimension: 1,
        basis: "haar".into(),
        h: BoxRegion::cube(0.25, 0.75, 1).unwrap(),
        schedule: if theorem == 1 {
            ResolutionSchedule::Crs { gamma: 0.6 }
        } else {
            ResolutionSchedule::Er { c: 0.5 }
        },
        n_grid: vec![256, 512, 1024],
        replications: 4,
        base_seed: 11,
        grid: GridSpec::default(),
        output: "out".into(),
        contrast: None,
    }
}

#[test]
fn schedule_examples() {
    let er = ResolutionSchedule::Er { c: 1.0 };
    assert_eq!(schedule_level(&er, 1024, 1), 7);
    assert!((realized_ratio(1024, 1, 7).1 - 8.0 / 1024f64.ln()).abs() < 1e-12);
    let crs = ResolutionSchedule::Crs { gamma: 0.5 };
    assert_eq!(schedule_level(&crs, 1024, 1), 5);
    assert!((realized_ratio(1024, 1, 5).1 - 32.0 / 1024f64.ln()).abs() < 1e-12);
    assert_eq!(schedule_level(&crs, 1024, 2), 2);
    assert_eq!(
        schedule_level(&ResolutionSchedule::Crs { gamma: 0.1 }, 16, 1),
        1
    );
}

#[test]
fn config_json_round_trip() {
    let text = r#"{
        "theorem": 2, "density": "uniform01", "dimension": 1, "basis": "haar",
        "h": {"lo": [0.25], "hi": [0.75]},
        "schedule": {"regime": "ER", "c": 0.5},
        "n_grid": [4096, 8192], "replications": 3, "base_seed": 1,
        "grid": {"kind": "dyadic", "cap": 4096},
        "output": "out/t2",
        "contrast": {"regime": "CRS", "gamma": 0.6}
    }"#;
    let c = ExperimentConfig::from_json(text).unwrap();
    c.validate().unwrap();
    assert_eq!(c.schedule, ResolutionSchedule::Er { c: 0.5 });
    let back = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
    assert!(
        ExperimentConfig::from_json(&text.replace("\"basis\"", "\"bogus\": 1, \"basis\"")).is_err()
    );
}

#[test]
fn validation_errors() {
    let mut c = config(1);
    c.n_grid.clear();
    assert!(matches!(c.validate(), Err(Error::Config(_))));
    let mut c = config(1);
    c.n_grid = vec![512, 256];
    assert!(c.validate().is_err());
    let mut c = config(1);
    c.h = BoxRegion::cube(0.0, 0.5, 1).unwrap();
    assert!(c.validate().is_err());
    let mut c = config(1);
    c.schedule = ResolutionSchedule::Er { c: 1.0 };
    assert!(c.validate().is_err());
    let mut c = config(1);
    c.schedule = ResolutionSchedule::Crs { gamma: 1.5 };
    assert!(c.validate().is_err());
    let mut c = config(1);
    c.contrast = Some(ResolutionSchedule::Crs { gamma: 0.6 });
    assert!(c.validate().is_err());
    let mut c = config(2);
    c.basis = "db9".into();
    assert!(c.validate().is_err());
}

#[test]
fn small_runs_are_deterministic_and_ordered() {
    let a = run_theorem1(&config(1)).unwrap();
    let b = run_theorem1(&config(1)).unwrap();
    assert_eq!(a.records_csv(), b.records_csv());
    assert_eq!(a.summary_json().unwrap(), b.summary_json().unwrap());
    let keys: Vec<(usize, usize)> = a.records.iter().map(|r| (r.n, r.rep)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(a.records.len(), 12);
}

#[test]
fn record_regenerates_in_isolation() {
    let c = config(1);
    let report = run_theorem1(&c).unwrap();
    let r = &report.records[7];
    let again = regenerate_record(&c, r.n, r.rep).unwrap();
    assert_eq!(again.sup_dev.to_bits(), r.sup_dev.to_bits());
    assert_eq!(again.argmax, r.argmax);
}

#[test]
fn theorem2_threshold_for_uniform_haar() {
    let (eps, t) = theorem2_epsilon(&config(2)).unwrap();
    assert!((t.delta - 1.0).abs() < 1e-9);
    assert!((eps - 0.25).abs() < 1e-9);
    assert_eq!(t.v, 0.5);
}

#[test]
fn quantiles_and_tau() {
    let q = Quantiles::of(&[3.0, 1.0, 2.0, 4.0]);
    assert_eq!(q.median, 2.5);
    assert_eq!(q.min, 1.0);
    assert_eq!(q.max, 4.0);
    assert_eq!(kendall_tau(&[1.0, 2.0, 3.0]), 1.0);
    assert_eq!(kendall_tau(&[3.0, 2.0, 1.0]), -1.0);
    assert!((kendall_tau(&[1.0, 3.0, 2.0]) - 1.0 / 3.0).abs() < 1e-15);
}
