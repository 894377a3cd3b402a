mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::WELL_TABLE;

fn gvflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gvflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// The well table repeated at three time indices, each value mapped by `f`.
fn series_with(f: impl Fn(f64, u32) -> f64) -> String {
    let mut text = String::from("station_id,lat,long,value,time_index\n");
    for t in 0..3 {
        for line in WELL_TABLE.lines().skip(1) {
            let c: Vec<&str> = line.split(',').collect();
            let v = f(c[3].parse().unwrap(), t);
            text.push_str(&format!("{},{},{},{v:.2},{t}\n", c[0], c[1], c[2]));
        }
    }
    text
}

/// A slow drawdown of the measured heads.
fn series_table() -> String {
    series_with(|v, t| v - 0.5 * f64::from(t))
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new(table: &str) -> Workspace {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("wells.csv"), table).unwrap();
        let ws = Workspace { dir };
        let out = gvflow(&["ingest", ws.s("wells.csv").as_str(), ws.s("store").as_str()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

#[test]
fn ingest_writes_a_store() {
    let ws = Workspace::new(WELL_TABLE);
    let manifest = fs::read_to_string(ws.path("store").join("manifest.txt")).unwrap();
    assert_eq!(manifest.trim(), "gvflow-store v1");
}

#[test]
fn ingest_rejects_bad_input() {
    let ws = Workspace::new(WELL_TABLE);
    fs::write(ws.path("bad.csv"), "station_id,lat,long,value,time_index\nw1,x,1,1,0\n").unwrap();
    let out = gvflow(&["ingest", &ws.s("bad.csv"), &ws.s("s2")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("lat"));

    let out = gvflow(&["ingest", &ws.s("missing.csv"), &ws.s("s3")]);
    assert_eq!(code(&out), 3);
}

#[test]
fn check_reports_a_witness() {
    let ws = Workspace::new(WELL_TABLE);
    let out = gvflow(&["check", &ws.s("store")]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("t=0 infeasible samples=8 witness="));

    let out = gvflow(&["check", &ws.s("store"), "--set", "scale.ratio=6"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("t=0 feasible samples=8"));

    let out = gvflow(&["check", &ws.s("store"), "--time", "5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn check_rejects_bad_config() {
    let ws = Workspace::new(WELL_TABLE);
    let out = gvflow(&["check", &ws.s("store"), "--set", "grid.rows=banana"]);
    assert_eq!(code(&out), 2);
    let out = gvflow(&["check", &ws.s("store"), "--config", &ws.s("nope.cfg")]);
    assert_eq!(code(&out), 3);
    fs::write(ws.path("run.cfg"), "# ratio\nscale.ratio = 6\n").unwrap();
    let out = gvflow(&["check", &ws.s("store"), "--config", &ws.s("run.cfg")]);
    assert_eq!(code(&out), 0);
}

#[test]
fn fit_writes_rasters_and_report() {
    let ws = Workspace::new(WELL_TABLE);
    let out = gvflow(&[
        "fit", &ws.s("store"), "--time", "0", "--out", &ws.s("out"),
        "--set", "scale.ratio=6", "--set", "io.raster_format=both",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = fs::read_to_string(ws.path("out").join("fit_t0.report.txt")).unwrap();
    assert!(report.contains("converged=true"));
    assert!(report.contains("max_violation=0"));
    let pgm = fs::read(ws.path("out").join("fit_t0.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n60 60\n255\n"));
    let raster = fs::read_to_string(ws.path("out").join("fit_t0.csv")).unwrap();
    assert_eq!(raster.lines().count(), 60);

    let out = gvflow(&["fit", &ws.s("store"), "--time", "0", "--out", &ws.s("out1")]);
    assert_eq!(code(&out), 1);
}

#[test]
fn fit_needs_an_output_directory() {
    let ws = Workspace::new(WELL_TABLE);
    let out = gvflow(&["fit", &ws.s("store"), "--time", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_single_time_falls_back_to_fit() {
    let ws = Workspace::new(WELL_TABLE);
    let out = gvflow(&["simulate", &ws.s("store"), "--out", &ws.s("out"), "--set", "scale.ratio=6"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("warning"));
    assert!(ws.path("out").join("fit_t0.pgm").exists());
}

fn simulate(ws: &Workspace, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["simulate", "--out"];
    let dir = ws.s(out);
    let store = ws.s("store");
    args.push(&dir);
    args.push(&store);
    args.extend_from_slice(&["--set", "scale.ratio=6", "--set", "grid.rows=24", "--set", "grid.cols=24"]);
    args.extend_from_slice(extra);
    gvflow(&args)
}

#[test]
fn simulate_writes_every_step() {
    let ws = Workspace::new(&series_table());
    let out = simulate(&ws, "out", &[]);
    assert_eq!(code(&out), 0, "{}\n{}", stdout(&out), stderr(&out));
    for t in 0..3 {
        assert!(ws.path("out").join(format!("sim_t{t}.pgm")).exists());
    }
    let log = fs::read_to_string(ws.path("out").join("convergence.csv")).unwrap();
    let lines: Vec<&str> = log.lines().collect();
    assert_eq!(lines[0], "time,iters,max_change");
    assert_eq!(lines[1], "0,0,0");
    assert_eq!(lines.len(), 4);
}

#[test]
fn simulate_with_a_sink_draws_down() {
    let ws = Workspace::new(&series_with(|_, _| 50.0));
    let out = simulate(&ws, "out", &["--set", "flow.source_cells=20:5:2", "--set", "io.raster_format=csv"]);
    assert_eq!(code(&out), 0, "{}\n{}", stdout(&out), stderr(&out));
    let rows = gvflow::data::read_raster_csv(&ws.path("out").join("sim_t2.csv")).unwrap();
    // raster row 0 is the north edge
    let at = |row: usize, col: usize| rows[23 - row][col];
    for (r, c) in [(21, 5), (19, 5), (20, 4), (20, 6)] {
        assert!(at(20, 5) < at(r, c), "{} vs {}", at(20, 5), at(r, c));
    }

    let out = simulate(&ws, "bad", &["--set", "flow.source_cells=99:0:1"]);
    assert_eq!(code(&out), 2);
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_is_deterministic() {
    let ws = Workspace::new(&series_table());
    let both = ["--set", "io.raster_format=both"];
    assert_eq!(code(&simulate(&ws, "a", &both)), 0);
    assert_eq!(code(&simulate(&ws, "b", &both)), 0);
    assert_eq!(dir_bytes(&ws.path("a")), dir_bytes(&ws.path("b")));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let ws = Workspace::new(WELL_TABLE);
    fs::write(ws.path("file"), "x").unwrap();
    let out = gvflow(&["fit", &ws.s("store"), "--time", "0", "--out", &ws.s("file"), "--set", "scale.ratio=6"]);
    assert_eq!(code(&out), 3);
}
