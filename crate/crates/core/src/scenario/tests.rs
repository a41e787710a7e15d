use super::*;
use crate::error::Error;

fn opts(dir: &std::path::Path, allow: bool) -> RunOptions {
    RunOptions { out_dir: dir.to_path_buf(), seed: None, allow_incompatible: allow }
}

#[test]
fn bundled_scenarios_parse_and_build() {
    for (name, _) in BUNDLED {
        let sc = Scenario::load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(&sc.name, name);
        let b = sc.build().unwrap();
        b.initial_state(sc.grid.n).unwrap().validate().unwrap();
    }
}

#[test]
fn unknown_scenario_is_a_config_error() {
    assert!(matches!(Scenario::load("no_such_thing"), Err(Error::Config { .. })));
}

fn mutate(name: &str, from: &str, to: &str) -> String {
    let text = BUNDLED.iter().find(|(n, _)| *n == name).unwrap().1;
    assert!(text.contains(from));
    text.replacen(from, to, 1)
}

#[test]
fn malformed_fields_report_their_path() {
    let cases = [
        ("gamma = 1.4", "gamma = \"steep\"", "eos"),
        ("n = 32", "n = 4", "grid.n"),
        ("dt = 0.002", "dt = -0.002", "solver"),
        ("radius = 1.0", "radius = 1.0\nwobble = 2", "domain"),
        ("name = \"M1\"", "name = \"M9\"", "chart.name"),
    ];
    for (from, to, path) in cases {
        let text = mutate("mass_torus", from, to);
        let err = Scenario::from_toml(&text).and_then(|s| s.build().map(|_| ())).unwrap_err();
        match err {
            Error::Config { path: p, .. } => assert!(p.starts_with(path), "{to}: path {p}"),
            other => panic!("{to}: {other}"),
        }
    }
}

#[test]
fn non_positive_initial_density_is_refused() {
    let text = mutate("mass_torus", "{ coef = -0.2,", "{ coef = -1.5,");
    let b = Scenario::from_toml(&text).unwrap().build().unwrap();
    assert!(matches!(b.initial_state(32), Err(Error::NonPositiveDensity { .. })));
}

#[test]
fn mass_torus_simulation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let b = Scenario::load("mass_torus").unwrap().build().unwrap();
    let r = Command::Simulate.run(&b, &opts(dir.path(), false)).unwrap();
    assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
    let out = dir.path().join("mass_torus/simulate");
    assert!(out.join("summary.json").exists());
    for name in r.artifacts.keys() {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let b = Scenario::load("mass_torus").unwrap().build().unwrap();
    let read = |dir: &std::path::Path| {
        Command::Simulate.run(&b, &opts(dir, false)).unwrap();
        let out = dir.join("mass_torus/simulate");
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.into_iter().map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    let (a, b2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(read(a.path()), read(b2.path()));
}

#[test]
fn forbidden_pairing_needs_override_and_fails_as_designed() {
    let dir = tempfile::tempdir().unwrap();
    let b = Scenario::load("similarity_falsified").unwrap().build().unwrap();
    let err = Command::VerifyDensities.run(&b, &opts(dir.path(), false)).unwrap_err();
    assert!(matches!(err, Error::Classification(_)), "{err}");
    let r = Command::VerifyDensities.run(&b, &opts(dir.path(), true)).unwrap();
    assert_eq!(r.outcome, Outcome::ExpectedFail, "{}", r.render());
    assert_eq!(r.outcome.exit_code(), 0);
}

#[test]
fn compatible_densities_certify() {
    let dir = tempfile::tempdir().unwrap();
    let b = Scenario::load("mass_torus").unwrap().build().unwrap();
    for cmd in [Command::VerifyDensities, Command::VerifyDetermining, Command::VerifyCirculation] {
        let r = cmd.run(&b, &opts(dir.path(), false)).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
    }
}

#[test]
fn sphere_geometry_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let b = Scenario::load("sphere_geometry").unwrap().build().unwrap();
    let r = Command::GeometryReport.run(&b, &opts(dir.path(), false)).unwrap();
    assert_eq!(r.outcome, Outcome::Pass, "{}", r.render());
    assert!(dir.path().join("sphere_geometry/geometry-report/curvature.csv").exists());
}

#[test]
fn command_names_round_trip() {
    for c in Command::ALL {
        assert_eq!(Command::from_name(c.name()), Some(c));
    }
    assert_eq!(Command::from_name("simulate-all"), None);
}
