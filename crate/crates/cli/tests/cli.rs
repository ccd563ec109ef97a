use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use recomb_core::ancestral::{build_generator, coefficients_semigroup};
use recomb_core::measure::TypeSpace;
use recomb_core::rates::Recombination;
use recomb_core::{io, Partition, PartitionIndex};

fn recomb(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_recomb"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SINGLE_CROSSOVER: &str = r#"{
    "alphabet_sizes": [2, 2, 2],
    "initial": {"kind": "explicit", "masses": [
        {"type": [0, 0, 0], "mass": 0.4}, {"type": [1, 1, 1], "mass": 0.4}, {"type": [0, 1, 0], "mass": 0.2}]},
    "recombination": {"style": "rate", "entries": [
        {"partition": "1|2,3", "value": 0.8}, {"partition": "1,2|3", "value": 1.7}]},
    "run": {"t_grid": [0.1, 1, 10], "dt": 0.001, "seed": 5}
}"#;

const THREE_SITE: &str = r#"{
    "alphabet_sizes": [2, 2, 2],
    "initial": {"kind": "explicit", "masses": [{"type": [0, 0, 0], "mass": 0.5}, {"type": [1, 1, 1], "mass": 0.5}]},
    "recombination": {"style": "probability", "mu": 1.0, "entries": [
        {"partition": "1|2,3", "value": 0.3}, {"partition": "1,2|3", "value": 0.5}, {"partition": "1,3|2", "value": 0.2}]},
    "run": {"t": 1.0, "t_grid": {"start": 0, "stop": 5, "steps": 10}, "dt": 0.001, "N": 200, "N_list": [100, 1000],
            "replicates": 3, "generations": 6}
}"#;

const COLLISION: &str = r#"{
    "alphabet_sizes": [2, 2, 2, 2],
    "recombination": {"style": "rate", "entries": [
        {"partition": "1,2|3,4", "value": 1.0}, {"partition": "1,3|2,4", "value": 1.0}]},
    "run": {"t": 1.0}
}"#;

fn tmp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn crosscheck_single_crossover_benchmark_passes() {
    let dir = tmp();
    let o = recomb(dir.path(), SINGLE_CROSSOVER, &["crosscheck"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = std::fs::read_to_string(dir.path().join("crosscheck.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 9, "three method pairs at three times");
    for row in rows {
        let dev: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(dev <= 1e-10, "{row}");
    }
}

#[test]
fn crosscheck_breach_exits_with_four() {
    let dir = tmp();
    let o = recomb(dir.path(), SINGLE_CROSSOVER, &["crosscheck", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn nonpositive_step_is_a_config_error() {
    let dir = tmp();
    let cfg = THREE_SITE.replace("\"dt\": 0.001", "\"dt\": 0");
    let o = recomb(dir.path(), &cfg, &["solve-ode"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("run.dt"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_named() {
    let dir = tmp();
    let cfg = THREE_SITE.replace("\"generations\"", "\"generation\"");
    let o = recomb(dir.path(), &cfg, &["solve-discrete"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("generation"), "{}", stderr(&o));
}

#[test]
fn recursion_on_collision_is_numerical_error() {
    let dir = tmp();
    let o = recomb(dir.path(), COLLISION, &["coefficients", "--method", "recursion"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("non-generic rates"), "{}", stderr(&o));
    // The semigroup handles the same model.
    let o = recomb(dir.path(), COLLISION, &["coefficients", "--method", "semigroup"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // Crosscheck skips the recursion but still compares nothing incorrectly.
    let o = recomb(dir.path(), COLLISION, &["crosscheck"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn coefficients_round_trip_against_library() {
    let dir = tmp();
    let o = recomb(dir.path(), THREE_SITE, &["coefficients", "--method", "semigroup"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let idx = Arc::new(PartitionIndex::for_sites(3).unwrap());
    let file = std::fs::File::open(dir.path().join("coefficients.csv")).unwrap();
    let read = io::read_coefficients(file, &idx).unwrap();
    let p = |s: &str| s.parse::<Partition>().unwrap();
    let d = Recombination::from_probabilities(3, 1.0, vec![(p("1|2,3"), 0.3), (p("1,2|3"), 0.5), (p("1,3|2"), 0.2)])
        .unwrap();
    let expected = coefficients_semigroup(&build_generator(&d, &idx).unwrap(), 1.0, idx.get(0)).unwrap();
    assert_eq!(read, expected);

    let o = recomb(dir.path(), THREE_SITE, &["coefficients", "--method", "semigroup", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("coefficients.json")).unwrap()).unwrap();
    let values: Vec<f64> = v["coefficients"].as_array().unwrap().iter().map(|e| e["a_t"].as_f64().unwrap()).collect();
    assert_eq!(values, expected.values());
}

#[test]
fn exact_and_ode_trajectories_agree() {
    let dir = tmp();
    let space = TypeSpace::binary(3).unwrap();
    let ode_dir = dir.path().join("ode");
    let exact_dir = dir.path().join("exact");
    std::fs::create_dir_all(&ode_dir).unwrap();
    std::fs::create_dir_all(&exact_dir).unwrap();
    assert!(recomb(&ode_dir, THREE_SITE, &["solve-ode"]).status.success());
    let o = recomb(&exact_dir, THREE_SITE, &["solve-exact", "--method", "recursion"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let read = |d: &PathBuf| io::read_trajectory(std::fs::File::open(d.join("trajectory.csv")).unwrap(), &space).unwrap();
    let (ode, exact) = (read(&ode_dir), read(&exact_dir));
    assert_eq!(ode.times, exact.times);
    assert_eq!(ode.times.len(), 11);
    for (a, b) in ode.states.iter().zip(&exact.states) {
        assert!(a.sup_distance(b).unwrap() < 1e-6);
    }
}

#[test]
fn simulations_are_deterministic() {
    let dir = tmp();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (d, jobs) in [(&a, "1"), (&b, "3")] {
        std::fs::create_dir_all(d).unwrap();
        for mode in ["simulate-moran", "simulate-arg"] {
            let o = recomb(d, THREE_SITE, &[mode, "--jobs", jobs, "--seed", "11"]);
            assert!(o.status.success(), "{}", stderr(&o));
        }
    }
    for file in ["moran.csv", "arg.csv"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let rows = io::read_moran(std::fs::File::open(a.join("moran.csv")).unwrap()).unwrap();
    for r in 0..3 {
        for k in 0..11 {
            let t = 0.5 * k as f64;
            let total: u64 = rows.iter().filter(|x| x.replicate == r && x.t == t).map(|x| x.count).sum();
            assert_eq!(total, 200);
        }
    }
    let args = io::read_arg(std::fs::File::open(a.join("arg.csv")).unwrap()).unwrap();
    assert_eq!(args.len(), 3);
}

#[test]
fn discrete_and_lln_modes_run() {
    let dir = tmp();
    let o = recomb(dir.path(), THREE_SITE, &["solve-discrete"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tr = io::read_trajectory(
        std::fs::File::open(dir.path().join("trajectory.csv")).unwrap(),
        &TypeSpace::binary(3).unwrap(),
    )
    .unwrap();
    assert_eq!(tr.times, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let o = recomb(dir.path(), THREE_SITE, &["lln-report", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("lln.json")).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("log-log slope"));
}

#[test]
fn missing_config_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_recomb")).arg("crosscheck").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_recomb")).arg("no-such-mode").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
