use std::fs;

use wpdj::harness::{cmd_calibrate, cmd_dj, cmd_enumerate, cmd_transients, cmd_validate, write_dj, write_transients};
use wpdj::{Error, Execution, FunctionCharacter, RunConfig};

fn config(json: &str) -> RunConfig {
    RunConfig::from_json(json).unwrap()
}

#[test]
fn enumerate_line_counts() {
    for (inputs, lines) in [(2, 4), (4, 8), (6, 22), (8, 72)] {
        let rows = cmd_enumerate(inputs).unwrap();
        assert_eq!(rows.len(), lines);
        assert_eq!(
            rows.iter().filter(|(_, c)| *c == FunctionCharacter::Constant).count(),
            2
        );
    }
    assert!(cmd_enumerate(3).is_err());
}

#[test]
fn dj_default_is_perfect_noiseless() {
    let cfg = config(r#"{"noise": {"trials": 2000}}"#);
    let report = cmd_dj(&cfg, Execution::default()).unwrap();
    assert_eq!(report.functions, 72);
    assert!(report.noiseless_perfect());
    for row in &report.margins {
        assert!(row.margin > 0.0, "{}", row.function);
    }
    assert!(report.accuracy.accuracy > 0.99);
}

#[test]
fn dark_level_fails_dj() {
    let cfg = config(r#"{"couplings": {"dipoles": [1, 1, 1, 0, 1, 1, 1, 1]}}"#);
    let err = cmd_dj(&cfg, Execution::Sequential).unwrap_err();
    assert!(matches!(err, Error::Calibration(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn calibrate_matches_dj() {
    let cfg = config(r#"{"noise": {"trials": 10}}"#);
    let cal = cmd_calibrate(&cfg, Execution::Sequential).unwrap();
    let dj = cmd_dj(&cfg, Execution::default()).unwrap();
    assert_eq!(cal.threshold, dj.calibration.threshold);
    assert_eq!(cal.balanced_visited, 70);
}

#[test]
fn transients_reference_functions() {
    let cfg = config(r#"{"functions": ["f1", "00001111"]}"#);
    let fs = cfg.selected_functions().unwrap();
    let ts = cmd_transients(&cfg, &fs, Execution::default()).unwrap();
    assert_eq!(ts.len(), 2);
    assert_eq!(ts[0].len(), 601);
    assert_eq!(ts[0].delays[ts[0].argmax()], 5.0);
    assert!(matches!(
        cmd_transients(&cfg, &[], Execution::Sequential),
        Err(Error::Selection(_))
    ));
    assert!(RunConfig::from_json(r#"{"functions": ["f11"]}"#).is_err());
    assert!(RunConfig::from_json(r#"{"functions": ["00001110"]}"#).is_err());
}

#[test]
fn outputs_are_byte_identical_across_runs_and_modes() {
    let cfg = config(r#"{"seed": 11, "noise": {"sigma": 2.0, "sequences": 100, "trials": 500}, "functions": ["f1", "f3", "f5"]}"#);
    let fs = cfg.selected_functions().unwrap();
    let mut dirs = Vec::new();
    for exec in [Execution::Sequential, Execution::default()] {
        let dir = tempfile::tempdir().unwrap();
        let ts = cmd_transients(&cfg, &fs, exec).unwrap();
        write_transients(dir.path(), &cfg, &ts).unwrap();
        write_dj(dir.path(), &cfg, &cmd_dj(&cfg, exec).unwrap()).unwrap();
        dirs.push(dir);
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 7);
    let hash = cfg.hash();
    for name in names {
        let a = fs::read(dirs[0].path().join(&name)).unwrap();
        let b = fs::read(dirs[1].path().join(&name)).unwrap();
        assert_eq!(a, b, "{name:?}");
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains(&hash), "{name:?} lacks the config hash");
    }
}

#[test]
fn validate_converges() {
    let cfg = RunConfig::default().resolve().unwrap();
    let report = cmd_validate(&cfg, Execution::default()).unwrap();
    assert!(report.monotone());
    assert!(report.decades() >= 2.0);
    let smallest = report.smallest_scale().unwrap();
    assert!(smallest.amplitude_error < 1e-3);
    assert!(report.rows.iter().all(|r| r.norm_drift < 1e-6));

    let empty = config(r#"{"validation": {"field_scales": []}}"#);
    assert!(matches!(cmd_validate(&empty, Execution::Sequential), Err(Error::Domain(_))));
}

#[test]
fn generalized_registers_classify() {
    for inputs in [2, 4, 6] {
        let cfg = config(&format!(r#"{{"register": {{"inputs": {inputs}}}, "noise": {{"trials": 10}}}}"#));
        let report = cmd_dj(&cfg, Execution::default()).unwrap();
        assert!(report.noiseless_perfect(), "{inputs} inputs");
    }
}

#[test]
fn bundled_config_is_the_default() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.json");
    let bundled = wpdj::load_config(&path).unwrap();
    assert_eq!(bundled, RunConfig::default().resolve().unwrap());
}
