use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn dirac_ent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-ent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    lines.skip(1).map(split_csv).collect()
}

// the only quoted field is region_id, which never contains quotes
fn split_csv(line: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(String::new()),
            _ => out.last_mut().unwrap().push(c),
        }
    }
    out
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn coeff_rows_match_known_values() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.cfg",
        "d = 1\nfermi_energy = 1, 0.5\nmass = 0, 1\nregion = interval(0, 1)\n",
    );
    let out = dir.path().join("out");
    let o = dirac_ent(&["coeff", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = fs::read_to_string(out.join("coeff.csv")).unwrap();
    assert!(header
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("alpha,d,m,E_F,b,region_id,regime,p_F,Phi,W,V"));
    let rows = rows(&out.join("coeff.csv"));
    assert_eq!(rows.len(), 4);
    let massless = rows.iter().find(|r| r[2] == "0" && r[3] == "1").unwrap();
    assert_eq!(massless[6], "enhanced");
    assert_eq!(massless[9], "0.333333333333");
    let gapped = rows.iter().find(|r| r[2] == "1" && r[3] == "0.5").unwrap();
    assert_eq!(gapped[6], "gapped-area-law");
    assert_eq!(num(&gapped[9]), 0.0);
    // one hash for the whole run
    assert!(rows.iter().all(|r| r[11] == rows[0][11] && r[11].len() == 16));
}

#[test]
fn coeff_disc_in_two_dimensions() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.cfg", "d = 2\nfermi_energy = 1\nregion = disc(0, 0, 1)\n");
    let out = dir.path().join("out");
    assert!(dirac_ent(&["coeff", "--config", &cfg, "--out", out.to_str().unwrap()])
        .status
        .success());
    let r = &rows(&out.join("coeff.csv"))[0];
    assert!((num(&r[8]) - 4.0).abs() < 1e-10);
    assert!((num(&r[9]) - 1.0 / 3.0).abs() < 1e-10);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.cfg",
        "d = 1\nfermi_energy = 1\nregoin = interval(0, 1)\n",
    );
    let o = dirac_ent(&["coeff", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("regoin") && err.contains("region"), "{err}");

    let cfg = write_config(
        dir.path(),
        "m.cfg",
        "d = 1\nfermi_energy = 1\nmass = -2\nregion = interval(0, 1)\n",
    );
    let o = dirac_ent(&["coeff", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mass"));
}

#[test]
fn two_scales_are_insufficient() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "s.cfg",
        "d = 1\nfermi_energy = 1\nregion = interval(0, 1)\nscales = 10, 20\n",
    );
    let o = dirac_ent(&["scan", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient points"));
}

const SCAN: &str = "d = 1\nfermi_energy = 1\nregion = interval(0, 1)\nscales = 10, 20, 40, 80\n";

fn without_wall_time(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| {
            let mut f = split_csv(l);
            if f.len() == 5 {
                f.remove(3);
            }
            f.join(",")
        })
        .collect()
}

#[test]
fn scan_is_deterministic_and_resumable() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", SCAN);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = dirac_ent(&[
            "scan",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "2",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    // fresh runs agree in everything but the wall time
    assert_eq!(
        without_wall_time(&a.join("scan.csv")),
        without_wall_time(&b.join("scan.csv"))
    );
    assert_eq!(
        fs::read(a.join("fit.json")).unwrap(),
        fs::read(b.join("fit.json")).unwrap()
    );

    let first = fs::read(a.join("scan.csv")).unwrap();
    let o = dirac_ent(&["scan", "--config", &cfg, "--out", a.to_str().unwrap(), "--resume"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("4 of 4 scale(s) reused"));
    assert_eq!(fs::read(a.join("scan.csv")).unwrap(), first);

    let fit: serde_json::Value = serde_json::from_slice(&fs::read(a.join("fit.json")).unwrap()).unwrap();
    for key in ["c_log", "c_area", "residual", "window", "predicted_W", "verdict"] {
        assert!(fit.get(key).is_some(), "missing {key}");
    }
    assert_eq!(fit["verdict"], "PASS");
    assert!((fit["c_log"].as_f64().unwrap() - 1.0 / 3.0).abs() < 0.05 / 3.0);
}

#[test]
fn strict_failure_exits_with_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.cfg", &format!("{SCAN}tolerance = 1e-6\n"));
    let out = dir.path().to_str().unwrap();
    let lenient = dirac_ent(&["scan", "--config", &cfg, "--out", out]);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&lenient.stdout).contains("verdict: FAIL"));
    let strict = dirac_ent(&["scan", "--config", &cfg, "--out", out, "--resume", "--strict"]);
    assert_eq!(strict.status.code(), Some(4));
}

#[test]
fn three_domain_mode() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "t.cfg",
        "d = 1\nfermi_energy = 1\ninner_region = interval(0, 1)\nouter_region = interval(-1, 2)\nscales = 10, 20, 40, 80\n",
    );
    let out = dir.path().to_str().unwrap();
    let o = dirac_ent(&["scan", "--config", &cfg, "--out", out, "--mode", "three-domain"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = rows(&dir.path().join("scan.csv"));
    // volume terms cancel, so both trace columns coincide
    assert!(rows.iter().all(|r| r[1] == r[2]));
    let single = dirac_ent(&["scan", "--config", &cfg, "--out", out]);
    assert_eq!(single.status.code(), Some(2));
}

#[test]
fn selftest_passes() {
    let o = dirac_ent(&["selftest"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("selftest: 7/7 passed"), "{stdout}");
}
