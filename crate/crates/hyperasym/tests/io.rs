use hyperasym::exact::{int, Rational};
use hyperasym::io::{analyze, coeff, critical_points, decompose, plot_data, verify, ProblemFile, Report, RunError, RunOptions};

fn load(name: &str) -> ProblemFile {
    let path = format!("{}/tests/data/{name}.json", env!("CARGO_MANIFEST_DIR"));
    ProblemFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn with_direction(mut p: ProblemFile, r: &[u64]) -> ProblemFile {
    p.direction = r.to_vec();
    p
}

fn opts() -> RunOptions {
    RunOptions::default()
}

fn assert_round_trip(r: &Report) {
    let text = r.to_json();
    let back = Report::from_json(&text).unwrap();
    assert_eq!(&back, r);
    assert_eq!(back.to_json(), text);
}

#[test]
fn analyze_main_constant_three() {
    let r = analyze(&load("main"), &opts()).unwrap();
    let d = r.dominant.as_ref().unwrap();
    assert_eq!(d.status, "generic");
    assert_eq!(d.contributions[0].constant.expression, "3");
    assert_eq!(d.contributions[0].base, hyperasym::io::report::ValueJson::Exact("1".into()));
    assert_round_trip(&r);
}

#[test]
fn analyze_main_non_generic() {
    let r = analyze(&with_direction(load("main"), &[2, 1]), &opts()).unwrap();
    let d = r.dominant.as_ref().unwrap();
    assert_eq!(d.status, "non_generic");
    assert_eq!(d.contributions[0].constant.expression, "3/2");
    assert_round_trip(&r);
}

#[test]
fn decompose_nbc_four_quarters() {
    let r = decompose(&load("nbc"), &opts()).unwrap();
    let dec = r.decomposition.as_ref().unwrap();
    assert_eq!(dec.terms.len(), 4);
    assert!(dec.terms.iter().all(|t| t.coeff == "1/4"));
    assert_eq!(dec.verified_degree, Some(10));
    let spot = RunOptions { spot_checks: 3, seed: 7, verify_degree: 4, ..opts() };
    let again = decompose(&load("nbc"), &spot).unwrap();
    let checked = &again.decomposition.as_ref().unwrap().spot_checks;
    assert_eq!(checked.len(), 3);
    assert!(checked.iter().flatten().all(|&i| (4..=8).contains(&i)));
    assert_eq!(decompose(&load("nbc"), &spot).unwrap(), again);
    let mut broken = r.arrangement.as_ref().unwrap().broken_circuits.clone();
    broken.sort();
    assert_eq!(broken, vec![vec![0, 1, 2], vec![0, 3], vec![1, 2]]);
    assert_round_trip(&r);
}

#[test]
fn critical_table_and_coefficients() {
    let r = critical_points(&load("main"), &opts()).unwrap();
    assert!(r.critical.iter().any(|c| c.stratum == vec![0, 1] && c.classification == "contributing"));
    assert_round_trip(&r);
    let c = coeff(&load("line"), &[3, 2], &opts()).unwrap();
    assert_eq!(c.coefficient.as_ref().unwrap().coefficient, "10");
    let capped = RunOptions { degree_cap: Some(2), ..opts() };
    assert!(matches!(coeff(&load("line"), &[3, 2], &capped), Err(RunError::Input(_))));
}

#[test]
fn verify_passes_and_fails_honestly() {
    let r = verify(&load("line"), &RunOptions { nmax: 30, ..opts() }).unwrap();
    assert_eq!(r.verification.as_ref().unwrap().verdict, "PASS");
    assert_round_trip(&r);
    let strict = RunOptions { nmax: 10, tolerance: 1e-6, ..opts() };
    let r = verify(&load("line"), &strict).unwrap();
    assert_eq!(r.verification.as_ref().unwrap().verdict, "FAIL");
    let r = verify(&load("parity"), &RunOptions { nmax: 9, ..opts() }).unwrap();
    assert_eq!(r.verification.as_ref().unwrap().verdict, "PASS");
}

#[test]
fn input_errors_map_to_exit_two() {
    let mut p = load("main");
    p.factors[0].b[0] = "two".into();
    let e = analyze(&p, &opts()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    let e = plot_data(&load("nbc"), None, &opts()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn plot_main_example() {
    let bbox: [Rational; 4] = [int(-1), int(4), int(-1), int(4)];
    let doc = plot_data(&load("main"), Some(bbox), &opts()).unwrap();
    assert_eq!(doc.lines.len(), 2);
    assert_eq!(doc.points.len(), 3);
    assert_eq!(doc.cone_rays.len(), 1);
    assert_eq!(doc.cone_rays[0].rays.len(), 2);
    let svg = doc.to_svg();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
}

#[test]
fn plot_compute1_and_single_line() {
    let doc = plot_data(&load("compute1"), None, &opts()).unwrap();
    assert_eq!(doc.lines.len(), 4);
    assert_eq!(doc.points.iter().filter(|p| p.classification == "contributing").count(), 5);
    let doc = plot_data(&load("line"), None, &opts()).unwrap();
    assert_eq!(doc.lines.len(), 1);
    // only the (+,+) piece of the line is bounded
    assert_eq!(doc.points.len(), 1);
}
