use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tfim_cli::{Cell, Table};

fn tfim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfim")).args(args).output().expect("run tfim")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tfim-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = scratch("config-errors");
    let cases = [
        ("backend = \"chain\"\nobservables = []\n[model]\nd = 1\nsize = 8\ng = 0.5\nT = 0.1\n", "observables"),
        ("backend = \"chain\"\n[model]\nd = 2\nsize = 4\ng = 0.5\nT = 0.1\n", "backend"),
        ("backend = \"qmc\"\n[model]\nd = 2\nsize = 4\ng = 1.0\nT = 0.5\n[qmc]\nbins = 2\n", "qmc.bins"),
        ("backend = \"collective\"\n[model]\nd = \"inf\"\nsize = 10\ng = 1.0\nT = 0.1\nbeta = 10.0\n", "model"),
        ("backend = \"chain\"\n[model]\nd = 1\nsize = 8\ng = 0.5\nT = -1.0\n", "model.T"),
    ];
    for (k, (text, field)) in cases.iter().enumerate() {
        let p = write(&dir, &format!("c{k}.toml"), text);
        let o = tfim(&["observables", "--config", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", stderr(&o));
        assert!(stderr(&o).contains(field), "case {k}: {}", stderr(&o));
    }
    let o = tfim(&["observables", "--config", dir.join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn observables_rejects_grids() {
    let dir = scratch("grid");
    let p = write(&dir, "c.toml", "backend = \"chain\"\n[model]\nd = 1\nsize = 8\nT = 0.1\n[scan]\ng = [0.4, 0.6]\n");
    let o = tfim(&["observables", "--config", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(tfim(&["scan", "--config", p.to_str().unwrap()]).status.success());
}

#[test]
fn one_point_scan_equals_observables() {
    let dir = scratch("one-point");
    for (name, text) in [
        ("chain", "backend = \"chain\"\n[model]\nd = 1\nsize = 12\ng = 0.5\nT = 0.2\n"),
        ("collective", "backend = \"collective\"\n[model]\nd = \"inf\"\nsize = 40\ng = 1.0\nbeta = 5.0\n"),
        ("oracle", "backend = \"oracle\"\n[model]\nd = 1\nsize = 6\ng = 0.7\nT = 0.3\n"),
    ] {
        let p = write(&dir, &format!("{name}.toml"), text);
        let a = tfim(&["observables", "--config", p.to_str().unwrap()]);
        let b = tfim(&["scan", "--config", p.to_str().unwrap()]);
        assert!(a.status.success(), "{name}: {}", stderr(&a));
        assert_eq!(a.stdout, b.stdout, "{name}");
    }
}

#[test]
fn written_tables_round_trip_and_keep_blank_cells() {
    let dir = scratch("round-trip");
    let p = write(
        &dir,
        "c.toml",
        "backend = \"chain\"\nobservables = [\"xi_r_sq\", \"energy\", \"var_jy\"]\n[model]\nd = 1\nsize = 10\n[scan]\ng = [0.3, 0.5, 0.9]\nbeta = { start = 1.0, stop = 9.0, steps = 3 }\n",
    );
    for fmt in ["csv", "json"] {
        let out = dir.join(format!("r.{fmt}"));
        let o = tfim(&["scan", "--config", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let text = std::fs::read_to_string(&out).unwrap();
        let t = Table::read(&out).unwrap();
        assert_eq!(t.rows.len(), 9);
        assert_eq!(&t.columns[..6], ["g", "T_over_J", "N", "var_jy", "xi_r_sq", "energy"]);
        assert!(t.column("inverse_xi_r_sq_db").is_some());
        assert_eq!(t.encode(tfim_cli::Format::for_path(&out)).unwrap(), text);
        let seed = t.column("seed").unwrap();
        assert!(t.rows.iter().all(|r| r[seed] == Cell::Empty));
        let backend = t.column("backend").unwrap();
        assert!(t.rows.iter().all(|r| r[backend] == Cell::text("chain")));
    }
}

#[test]
fn missing_observables_are_blank_not_zero() {
    let dir = scratch("blank");
    let p = write(&dir, "c.toml", "backend = \"qmc\"\nobservables = [\"chi_sq\", \"xi_r_sq\"]\n[model]\nd = 2\nsize = 4\ng = 2.0\nT = 0.5\n[qmc]\nthermalization = 100\nsweeps = 640\n");
    let o = tfim(&["observables", "--config", p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::from_csv(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(t.rows[0][t.column("chi_sq").unwrap()], Cell::Empty);
    assert!(matches!(t.rows[0][t.column("xi_r_sq").unwrap()], Cell::Num(_)));
}

#[test]
fn fit_recovers_synthetic_exponent() {
    let dir = scratch("fit");
    let mut t = Table::new(vec!["N".into(), "y".into(), "y_err".into()]);
    for n in [16.0, 32.0, 64.0, 128.0, 256.0, 512.0f64] {
        let y = 0.8 * n.powf(-1.0 / 3.0);
        t.push(vec![Cell::Num(n), Cell::Num(y), Cell::Num(0.01 * y)]);
    }
    let data = dir.join("data.csv");
    t.write(&data, tfim_cli::Format::Csv).unwrap();
    let o = tfim(&["fit", data.to_str().unwrap(), "--x", "N", "--y", "y", "--err", "y_err", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let f = Table::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let b = f.values("exponent").unwrap()[0].unwrap();
    assert!((b + 1.0 / 3.0).abs() < 1e-10, "{b}");
    let o = tfim(&["fit", data.to_str().unwrap(), "--x", "N", "--y", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn qmc_scan_is_seeded_and_resumable() {
    let dir = scratch("qmc");
    let p = write(
        &dir,
        "c.toml",
        "backend = \"qmc\"\nobservables = [\"jx_mean\", \"var_jy\", \"xi_r_sq\", \"energy\"]\n[model]\nd = 2\nsize = 4\nT = 0.5\n[scan]\ng = [1.0, 2.0]\n[qmc]\nthermalization = 200\nsweeps = 1000\nbins = 32\ncheckpoint_every = 300\n",
    );
    let cfg = p.to_str().unwrap();
    let a = tfim(&["scan", "--config", cfg, "--seed", "9"]);
    let b = tfim(&["scan", "--config", cfg, "--seed", "9", "--workers", "1"]);
    let c = tfim(&["scan", "--config", cfg, "--seed", "10"]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let ck = dir.join("ck");
    let d = tfim(&["scan", "--config", cfg, "--seed", "9", "--checkpoint", ck.to_str().unwrap()]);
    assert_eq!(a.stdout, d.stdout);
    assert!(ck.join("point-0000.x.ckpt").exists());
    let e = tfim(&["scan", "--config", cfg, "--seed", "9", "--checkpoint", ck.to_str().unwrap(), "--resume"]);
    assert_eq!(a.stdout, e.stdout);
    let t = Table::from_csv(&String::from_utf8(a.stdout).unwrap()).unwrap();
    let seed = t.column("seed").unwrap();
    assert!(matches!(&t.rows[0][seed], Cell::Text(s) if s.starts_with("0x")));
}

#[test]
fn reproduce_lists_and_rejects_unknown_ids() {
    let o = tfim(&["reproduce", "list"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for id in ["fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b", "sm-fig4", "sm-fig5"] {
        assert!(text.contains(id));
    }
    assert_eq!(tfim(&["reproduce", "fig9"]).status.code(), Some(2));
}

#[test]
fn reproduce_prints_one_line_per_check() {
    let dir = scratch("reproduce");
    let out = dir.join("fig1c.csv");
    let o = tfim(&["reproduce", "fig1c", "--out", out.to_str().unwrap()]);
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let failing = text.lines().any(|l| l.starts_with("FAIL "));
    assert_eq!(o.status.code(), Some(if failing { 1 } else { 0 }), "{text}{}", stderr(&o));
    assert!(text.lines().all(|l| l.starts_with("PASS ") || l.starts_with("FAIL ") || l.starts_with("INFO ")));
    let t = Table::read(&out).unwrap();
    assert_eq!(t.columns, ["series", "g", "T_over_J", "N", "quantity", "value", "error"]);
}
