use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use invdyn::cli::pgm::decode_mask;
use invdyn::cli::scenarios::{builtin, quadratic};
use invdyn::cli::{JobConfig, RunReport};
use invdyn::fractal::DEFAULT_OVERLAP;
use invdyn::topology::ComponentClass;
use invdyn::SpherePoint;

fn invdyn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invdyn"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, cfg: &JobConfig) -> String {
    let path = dir.join("job.json");
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn small(mut cfg: JobConfig, dir: &Path) -> JobConfig {
    cfg.grid_n = 128;
    cfg.resolutions = vec![64, 128];
    cfg.estimator.samples = 50_000;
    cfg.output_dir = dir.join("out");
    cfg
}

fn report(dir: &Path) -> RunReport {
    RunReport::from_json(&fs::read_to_string(dir.join("out").join("report.json")).unwrap()).unwrap()
}

#[test]
fn julia_of_square_traces_the_circle() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(JobConfig::new(vec![quadratic(0.0)]), tmp.path());
    let path = write_config(tmp.path(), &cfg);
    let out = invdyn(&["estimate-julia", "--config", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(tmp.path().join("out").join("julia.pgm")).unwrap();
    assert!(bytes.starts_with(b"P5\n128 256\n255\n"));
    let mask = decode_mask(&bytes, DEFAULT_OVERLAP).unwrap();
    let g = mask.grid().clone();
    for i in mask.set_indices() {
        let c = g.centre(g.pixel(i));
        assert!((c.norm() - 1.0).abs() < 3.0 * g.pixel_size(), "{c}");
    }
    assert!(mask.contains_point(SpherePoint::real(1.0)));
    let r = report(tmp.path());
    assert_eq!(r.class, Some(ComponentClass::Two));
    assert_eq!(r.rh[0].deficiency, 2);
}

#[test]
fn invariant_run_writes_images_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(builtin("example1").unwrap(), tmp.path());
    let path = write_config(tmp.path(), &cfg);
    let out = invdyn(&["estimate-invariant", "--config", &path, "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("out");
    for f in ["e_set.pgm", "w_components.pgm", "report.json"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let r = report(tmp.path());
    assert_eq!(r.seed, 5);
    assert_eq!(r.scenario, "example1");
    assert_eq!(r.class, Some(ComponentClass::Two));
    assert_eq!(r.components.len(), 2);
    assert!(r.components.iter().all(|c| c.simply_connected));
    assert_eq!(r.permutations.len(), 2);
    let labels = fs::read(dir.join("w_components.pgm")).unwrap();
    let body = &labels[labels.len() - 2 * 128 * 128..];
    let mut levels: Vec<u8> = body.to_vec();
    levels.sort_unstable();
    levels.dedup();
    assert_eq!(levels, vec![0, 127, 255]);

    let e_set = dir.join("e_set.pgm");
    let out = invdyn(&["components", "--config", &path, "--mask", e_set.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let again = report(tmp.path());
    assert_eq!(again.components, r.components);
    assert_eq!(again.counts, vec![2]);
}

#[test]
fn empty_generator_list_exits_with_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("job.json");
    fs::write(&path, r#"{"generators": []}"#).unwrap();
    let out = invdyn(&["estimate-julia", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least one generator required"));
    let out = invdyn(&["estimate-julia", "--config", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(invdyn(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn capped_closure_exits_with_numeric_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small(builtin("square-and-chebyshev").unwrap(), tmp.path());
    cfg.estimator.max_closure_iters = 1;
    let path = write_config(tmp.path(), &cfg);
    let out = invdyn(&["estimate-invariant", "--config", &path]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!tmp.path().join("out").join("e_set.pgm").exists());
}

#[test]
fn rh_check_passes_for_example_generators() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small(builtin("example1").unwrap(), tmp.path());
    let path = write_config(tmp.path(), &cfg);
    let out = invdyn(&["rh-check", "--config", &path]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(tmp.path());
    let deficiencies: Vec<usize> = r.rh.iter().map(|e| e.deficiency).collect();
    assert_eq!(deficiencies, vec![2, 2, 6, 6, 6, 6]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("PASS"));
}

#[test]
fn verify_rh_identities_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = invdyn(&["verify", "rh-identities", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 24);
}
