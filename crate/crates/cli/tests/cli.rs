//! Black-box tests of the `sdot` binary: outputs, formats, exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sdot() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdot"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = sdot().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "expected success for {args:?}\nstderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sdot-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn write_config(dir: &Path, contents: &str) -> PathBuf {
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, contents).unwrap();
    path
}

const SYMMETRIC_CONFIG: &str = r#"{
  "atoms": [[0.5, 0.25], [0.5, 0.75]],
  "steps": 10
}"#;

#[test]
fn symmetric_pair_has_zero_errors() {
    let dir = tmp_dir("sym");
    let cfg = write_config(&dir, SYMMETRIC_CONFIG);
    run_ok(&[
        "continue",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    let errors = read(&dir.join("out/errors.csv"));
    let mut lines = errors.lines();
    assert_eq!(lines.next(), Some("atom,relative_error_pct"));
    for line in lines {
        let pct = line.split(',').nth(1).unwrap();
        assert_eq!(pct, "0.00%", "line {line}");
    }
}

#[test]
fn seeded_run_meets_error_bounds_at_both_step_counts() {
    let dir = tmp_dir("seeded");
    for (steps, bound) in [("100", 5.0f64), ("500", 1.0)] {
        let out = dir.join(format!("out{steps}"));
        run_ok(&[
            "continue",
            "--seed",
            "7",
            "--steps",
            steps,
            "--out",
            out.to_str().unwrap(),
        ]);
        let errors = read(&out.join("errors.csv"));
        for line in errors.lines().skip(1) {
            let pct: f64 = line
                .split(',')
                .nth(1)
                .unwrap()
                .trim_end_matches('%')
                .parse()
                .unwrap();
            assert!(
                pct.abs() <= bound,
                "steps {steps}: error {pct}% exceeds {bound}%"
            );
        }
    }
}

#[test]
fn trajectory_csv_round_trips_bit_for_bit() {
    let dir = tmp_dir("roundtrip");
    let out = dir.join("out");
    run_ok(&[
        "continue",
        "--seed",
        "7",
        "--steps",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    for name in ["trajectory.csv", "correlation.csv"] {
        let original = read(&out.join(name));
        let mut lines = original.lines();
        let header = lines.next().unwrap();
        let mut rebuilt = format!("{header}\n");
        for line in lines {
            let fields: Vec<String> = line
                .split(',')
                .map(|field| match field.parse::<f64>() {
                    Ok(x) if x.is_finite() => format!("{x:.16e}"),
                    Ok(x) if x.is_infinite() && x > 0.0 => "inf".into(),
                    Ok(x) if x.is_infinite() => "-inf".into(),
                    _ => field.to_string(),
                })
                .collect();
            rebuilt.push_str(&fields.join(","));
            rebuilt.push('\n');
        }
        assert_eq!(original, rebuilt, "{name} does not round-trip");
    }
}

/// Extracts `points="..."` polygons and counts circles from an SVG body.
fn parse_svg(svg: &str) -> (Vec<Vec<(f64, f64)>>, usize) {
    let mut polys = Vec::new();
    for part in svg.split("<polygon points=\"").skip(1) {
        let coords = part.split('"').next().unwrap();
        let pts: Vec<(f64, f64)> = coords
            .split_whitespace()
            .map(|pair| {
                let mut it = pair.split(',');
                (
                    it.next().unwrap().parse().unwrap(),
                    it.next().unwrap().parse().unwrap(),
                )
            })
            .collect();
        polys.push(pts);
    }
    let circles = svg.matches("<circle ").count();
    (polys, circles)
}

fn shoelace(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    let mut twice = 0.0;
    for k in 0..n {
        let (x0, y0) = pts[k];
        let (x1, y1) = pts[(k + 1) % n];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice.abs()
}

#[test]
fn svg_snapshots_have_n_cells_and_consistent_areas() {
    let dir = tmp_dir("svg");
    let out = dir.join("out");
    run_ok(&[
        "continue",
        "--seed",
        "7",
        "--steps",
        "50",
        "--snapshots",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let svg = read(&out.join("snapshots/eps_1.0000.svg"));
    let (polys, circles) = parse_svg(&svg);
    assert_eq!(polys.len(), 5);
    assert_eq!(circles, 5);

    // areas recomputed from SVG coordinates (unit square maps to 800x800,
    // so the area scale is 800²) match the final trajectory row
    let trajectory = read(&out.join("trajectory.csv"));
    let last = trajectory.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    // layout: eps,frame,ratio,p1..p5,area1..area5,min_eig
    let areas: Vec<f64> = fields[8..13].iter().map(|f| f.parse().unwrap()).collect();
    for (poly, &area) in polys.iter().zip(&areas) {
        let from_svg = shoelace(poly) / (800.0 * 800.0);
        assert!(
            (from_svg - area).abs() < 1e-6,
            "svg area {from_svg} vs trajectory {area}"
        );
    }
}

#[test]
fn duplicate_ordinates_exit_with_config_error_naming_the_pair() {
    let dir = tmp_dir("dup");
    let cfg = write_config(&dir, r#"{ "atoms": [[0.2, 0.5], [0.8, 0.5]] }"#);
    let out = sdot()
        .args([
            "continue",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("atoms 0 and 1"),
        "stderr should name the offending pair: {stderr}"
    );
}

#[test]
fn exact_at_eps_one_reports_exact_areas() {
    let dir = tmp_dir("exact1");
    let out = dir.join("out");
    run_ok(&[
        "exact",
        "--eps",
        "1.0",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    let errors = read(&out.join("errors.csv"));
    for line in errors.lines().skip(1) {
        assert!(line.ends_with(",0.00%") || line.split(',').nth(1) == Some("0.00%"));
    }
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    assert_eq!(report["eps"], 1.0);
    assert!(report["grad_norm"].as_f64().unwrap() <= 1e-10);
    let areas = report["areas"].as_array().unwrap();
    for a in areas {
        assert!((a.as_f64().unwrap() - 0.2).abs() <= 1e-10);
    }
}

#[test]
fn exact_at_small_eps_is_nearly_strips() {
    let dir = tmp_dir("exact-small");
    let out = dir.join("out");
    run_ok(&[
        "exact",
        "--eps",
        "0.001",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]);
    let report: serde_json::Value = serde_json::from_str(&read(&out.join("report.json"))).unwrap();
    let deviation = report["strip_deviation"].as_f64().unwrap();
    assert!(deviation <= 0.02, "strip deviation {deviation}");
    assert!(out.join("snapshots/eps_0.0010.svg").exists());
}

#[test]
fn correlation_curves_coincide_for_symmetric_pair() {
    let dir = tmp_dir("corr");
    let cfg = write_config(&dir, SYMMETRIC_CONFIG);
    let out = dir.join("out");
    run_ok(&[
        "correlation",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let parse_rows = |name: &str| -> Vec<(f64, f64, f64)> {
        read(&out.join(name))
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].parse().unwrap(),
                    f[3].parse().unwrap(),
                    f[4].parse().unwrap(),
                )
            })
            .collect()
    };
    let exact = parse_rows("correlation_exact.csv");
    let cont = parse_rows("correlation_continuation.csv");
    // symmetric problem: the prices never move, both curves agree wherever
    // the grids share a point
    for (eps, z1e, z2e) in &exact {
        if let Some((_, z1c, z2c)) = cont.iter().find(|(ec, _, _)| (ec - eps).abs() < 1e-12) {
            assert!((z1e - z1c).abs() < 1e-9 && (z2e - z2c).abs() < 1e-9);
        }
    }
}

#[test]
fn full_sweep_writes_both_frames() {
    let dir = tmp_dir("sweep");
    let out = dir.join("out");
    run_ok(&[
        "continue",
        "--schedule",
        "full_sweep",
        "--seed",
        "7",
        "--steps",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    let trajectory = read(&out.join("trajectory.csv"));
    assert!(trajectory.contains(",original,"));
    assert!(trajectory.contains(",reflected,"));
    let last = trajectory.lines().last().unwrap();
    assert!(
        last.contains(",inf,"),
        "last row should reach infinite ratio: {last}"
    );
}

#[test]
fn projection_flag_runs_and_tightens_final_errors() {
    let dir = tmp_dir("project");
    let out = dir.join("out");
    run_ok(&[
        "continue",
        "--seed",
        "7",
        "--steps",
        "40",
        "--project-every",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    let errors = read(&out.join("errors.csv"));
    for line in errors.lines().skip(1) {
        let pct: f64 = line
            .split(',')
            .nth(1)
            .unwrap()
            .trim_end_matches('%')
            .parse()
            .unwrap();
        assert!(pct.abs() <= 2.0, "projected run error {pct}%");
    }
}

#[test]
fn band_exit_flushes_partial_outputs_with_exit_code_3() {
    let dir = tmp_dir("band-exit");
    let cfg = write_config(
        &dir,
        r#"{ "atoms": [[0.05, 0.500], [0.95, 0.502], [0.50, 0.504]], "steps": 10 }"#,
    );
    let out_dir = dir.join("out");
    let out = sdot()
        .args([
            "continue",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let run_json: serde_json::Value =
        serde_json::from_str(&read(&out_dir.join("run.json"))).unwrap();
    assert_eq!(run_json["status"], "exited_safe_region");
    assert!(run_json["failed_step"].as_u64().is_some());
    // the partial trajectory still parses
    let trajectory = read(&out_dir.join("trajectory.csv"));
    assert!(trajectory.lines().count() >= 2);
}

#[test]
fn nonsense_schedule_is_a_config_error() {
    let out = sdot()
        .args(["continue", "--schedule", "sideways"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
