use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kppspeeds::mortality::survival_threshold_r;
use kppspeeds::params::Params;

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests")
}

fn kppspeeds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kppspeeds")).args(args).output().expect("binary runs")
}

fn run_config(name: &str) -> Output {
    let cfg = dir().join("configs").join(format!("{name}.cfg"));
    let text = fs::read_to_string(&cfg).unwrap();
    let command = text
        .lines()
        .find_map(|l| l.split('#').next().unwrap().trim().strip_prefix("command"))
        .map(|v| v.trim_start_matches([' ', '=']).trim().to_string())
        .unwrap();
    kppspeeds(&[&command, "--config", cfg.to_str().unwrap()])
}

fn golden(name: &str, code: i32) {
    let out = run_config(name);
    assert_eq!(out.status.code(), Some(code), "{}", String::from_utf8_lossy(&out.stderr));
    let expected = fs::read_to_string(dir().join("golden").join(format!("{name}.csv"))).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "golden mismatch for {name}");
}

#[test]
fn golden_speed_rows() {
    for name in ["speed_cylinder", "speed_halfspace", "speed_halfspace_mortality", "speed_roadfield"] {
        golden(name, 0);
    }
}

#[test]
fn golden_mortality_rows() {
    for name in ["eigen", "threshold", "steady_radial", "steady_halfspace"] {
        golden(name, 0);
    }
}

#[test]
fn golden_diagram() {
    golden("diagram", 0);
    let text = fs::read_to_string(dir().join("golden/diagram.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 50 * 50);
    for kind in ["FISHER", "INTERIOR", "ANOMALOUS"] {
        assert!(text.contains(kind));
    }
}

#[test]
fn golden_sweeps_and_simulation() {
    golden("sweep_cylinder_d", 0);
    golden("simulate_radial", 0);
    golden("sweep_mortality_r", 3);
}

#[test]
fn mortality_sweep_switches_at_r0() {
    let r0 = survival_threshold_r(&Params::mortality(1.0, 1.0, 1.0, 1.0)).unwrap();
    let text = fs::read_to_string(dir().join("golden/sweep_mortality_r.csv")).unwrap();
    let rows: Vec<(f64, bool)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[1].parse().unwrap(), *cells.last().unwrap() == "extinct")
        })
        .collect();
    let k = rows.iter().position(|r| !r.1).unwrap();
    assert!(rows[..k].iter().all(|r| r.1) && rows[k..].iter().all(|r| !r.1));
    assert!(rows[k - 1].0 < r0 && r0 <= rows[k].0);
}

#[test]
fn out_flag_writes_file() {
    let cfg = dir().join("configs/speed_cylinder.cfg");
    let out = std::env::temp_dir().join(format!("kppspeeds-cli-{}.csv", std::process::id()));
    let o = kppspeeds(&["speed", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let expected = fs::read_to_string(dir().join("golden/speed_cylinder.csv")).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), expected);
    fs::remove_file(out).unwrap();
}

#[test]
fn config_errors_exit_2() {
    let cfg = dir().join("configs/speed_cylinder.cfg");
    let o = kppspeeds(&["eigen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let bad = std::env::temp_dir().join(format!("kppspeeds-bad-{}.cfg", std::process::id()));
    fs::write(&bad, fs::read_to_string(&cfg).unwrap().replace("D = 2", "D = -1")).unwrap();
    let o = kppspeeds(&["speed", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("`D`"));
    fs::remove_file(bad).unwrap();
}

#[test]
fn unstable_simulation_exits_4() {
    let cfg = dir().join("configs/simulate_radial.cfg");
    let bad = std::env::temp_dir().join(format!("kppspeeds-cfl-{}.cfg", std::process::id()));
    fs::write(&bad, fs::read_to_string(&cfg).unwrap().replace("sim.dt = 0.002", "sim.dt = 0.05")).unwrap();
    let o = kppspeeds(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("unstable"));
    fs::remove_file(bad).unwrap();
}

#[test]
fn xcheck_default_case() {
    let o = run_config("xcheck");
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').take(3).map(|c| c.parse().unwrap()).collect();
    println!("XCHECK c*={} sim={} rel_err={}", row[0], row[1], row[2]);
    assert!(row[2] < 0.10);
}
