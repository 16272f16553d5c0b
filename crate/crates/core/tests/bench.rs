use madbcd::bench::{
    emit_outputs, read_summary_csv, run_experiment, ExperimentConfig, MethodSpec, ProblemSpec,
    StopSpec,
};
use madbcd::solver::Method;

fn config() -> ExperimentConfig {
    ExperimentConfig {
        name: "small".into(),
        problem: ProblemSpec::Gaussian { m: 300, n: 30 },
        methods: vec![
            MethodSpec::new(Method::Fbcd, 0.0),
            MethodSpec::new(Method::Madbcd, 0.1),
            MethodSpec::sketched(0.1, 4.0),
        ],
        stop: StopSpec::default(),
        repeats: 2,
        seed: 5,
        serial_timing: true,
        output_dir: None,
    }
}

#[test]
fn outputs_parse_back() {
    let outcome = run_experiment(&config()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_outputs(&outcome, dir.path()).unwrap();
    assert_eq!(written.len(), 1 + 6 + 1);
    let rows = read_summary_csv(dir.path().join("summary.csv")).unwrap();
    assert_eq!(rows, outcome.rows);
    assert_eq!(rows[1].speedup, Some(1.0));
    assert_eq!(rows[2].sketch_d, Some(120));
    assert!(rows[2].mean_prep_s.is_some() && rows[0].mean_prep_s.is_none());

    for run in &outcome.runs {
        let name = madbcd::bench::sanitize_label(&run.label);
        let file = if run.repeat == 0 {
            format!("{name}.csv")
        } else {
            format!("{name}.rep{}.csv", run.repeat)
        };
        let text = std::fs::read_to_string(dir.path().join("curves").join(file)).unwrap();
        // header plus k = 0 ..= IT
        assert_eq!(text.lines().count(), run.report.iterations + 2);
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 6);
    assert_eq!(manifest["config"]["seed"], 5);
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = config();
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config();
    cfg.methods.clear();
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = config();
    cfg.repeats = 0;
    assert!(cfg.validate().is_err());
    assert!(ExperimentConfig::from_toml_str("name = 'x'\nbogus = 1\n").is_err());
}

#[test]
fn parallel_and_serial_runs_agree_on_iterations() {
    let serial = run_experiment(&config()).unwrap();
    let mut cfg = config();
    cfg.serial_timing = false;
    let parallel = run_experiment(&cfg).unwrap();
    for (a, b) in serial.runs.iter().zip(&parallel.runs) {
        assert_eq!(a.report.iterations, b.report.iterations);
        assert_eq!(a.report.x, b.report.x);
    }
}

#[test]
fn rse_strictly_decreases_without_momentum_on_well_conditioned_suite() {
    // cond(A) of a 3500x350 Gaussian matrix is about 2
    let cfg = ExperimentConfig {
        name: "mono".into(),
        problem: ProblemSpec::Gaussian { m: 3500, n: 350 },
        methods: vec![MethodSpec::new(Method::Madbcd, 0.0)],
        stop: StopSpec::default(),
        repeats: 3,
        seed: 17,
        serial_timing: true,
        output_dir: None,
    };
    let outcome = run_experiment(&cfg).unwrap();
    for run in &outcome.runs {
        assert!(run.report.converged());
        let rse: Vec<f64> = run.report.records.iter().map(|r| r.rse.unwrap()).collect();
        assert!(rse.windows(2).all(|w| w[1] < w[0]), "{rse:?}");
    }
}
