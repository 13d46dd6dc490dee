use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qlayers(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlayers"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn setup(name: &str, body: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join(name), body).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CATENOID: &str = "half_width = 0.5\nends = 2\n[surface]\nkind = \"catenoid\"\nwaist = 1.0\n";
const BUMP: &str =
    "half_width = 0.3\n[surface]\nkind = \"gaussian_bump\"\nheight = 1.0\nwidth = 2.0\n";

#[test]
fn analyze_catenoid_predicts_via_total_curvature() {
    let d = setup("c.toml", CATENOID);
    let o = qlayers(&["analyze", "c.toml"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("(a)        holds"), "{s}");
    assert!(s.contains("discrete spectrum below the threshold is predicted"));
    assert!(d.path().join("out/analysis.json").exists());
    assert!(d.path().join("out/truncated.csv").exists());
}

#[test]
fn analyze_paraboloid_predicts_via_c_and_d() {
    let d = setup(
        "p.toml",
        "half_width = 0.3\n[surface]\nkind = \"paraboloid\"\np = 1.0\n",
    );
    let s = stdout(&qlayers(&["analyze", "p.toml"], d.path()));
    assert!(
        s.contains("(c)        holds") && s.contains("(d)        holds"),
        "{s}"
    );
}

#[test]
fn analyze_plane_predicts_nothing() {
    let d = setup("p.toml", "half_width = 1.0\n[surface]\nkind = \"plane\"\n");
    let o = qlayers(&["analyze", "p.toml"], d.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no prediction: the surface is a plane"));
}

#[test]
fn certify_catenoid_writes_ladder() {
    let d = setup("c.toml", CATENOID);
    let o = qlayers(&["certify", "c.toml", "--out", "cert"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict     Certified"));
    let csv = fs::read_to_string(d.path().join("cert/ladder.csv")).unwrap();
    assert!(csv.starts_with("strategy,n,inner_radius,outer_radius,epsilon,q1,error\n"));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("cert/certificate.json")).unwrap())
            .unwrap();
    assert_eq!(json["certificate"]["verdict"], "CERTIFIED");
}

#[test]
fn solve_rejects_charts_without_symmetry() {
    let d = setup("b.toml", BUMP);
    let o = qlayers(&["solve", "b.toml"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("solve requires cylindrical symmetry"));
}

#[test]
fn hypothesis_violation_exits_two() {
    let d = setup(
        "c.toml",
        "half_width = 1.0\n[surface]\nkind = \"smoothed_cone\"\ntheta = 0.785\nsigma = 0.5\n",
    );
    let o = qlayers(&["certify", "c.toml"], d.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_one_with_location() {
    let d = setup(
        "c.toml",
        "half_width = 0.5\n[surface]\nkind = \"catenoid\"\nwaist = 1.0\nneck = 2.0\n",
    );
    let o = qlayers(&["analyze", "c.toml"], d.path());
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    assert!(e.contains("neck") && e.contains("line"), "{e}");

    let d = setup("c.toml", &CATENOID.replace("0.5", "-0.5"));
    let o = qlayers(&["analyze", "c.toml"], d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("half_width"));

    let o = qlayers(&["run", "c.toml"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn solve_plane_counts_nothing() {
    let d = setup("p.toml", "command = \"solve\"\nhalf_width = 1.0\n[surface]\nkind = \"plane\"\n[solve]\nlength = 20.0\nn_u = [8, 16]\n");
    let o = qlayers(&["run", "p.toml"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("eigenvalues below the threshold (with multiplicity): 0"));
    let csv = fs::read_to_string(d.path().join("out/spectrum.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn solve_cone_finds_a_bound_state() {
    let d = setup("c.toml", "half_width = 1.0\n[surface]\nkind = \"smoothed_cone\"\ntheta = 0.2617993877991494\nsigma = 1.2\n[solve]\nlength = 40.0\nn_s = 200\nn_u = [32, 48]\n");
    let o = qlayers(&["solve", "c.toml"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("out/count.json")).unwrap())
            .unwrap();
    assert!(json["report"]["count"].as_u64().unwrap() >= 1);
}

#[test]
fn probe_on_plane_is_identically_zero() {
    let d = setup("p.toml", "half_width = 1.0\n[surface]\nkind = \"plane\"\n");
    let o = qlayers(&["probe-conjecture", "p.toml"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("out/probe.csv")).unwrap();
    assert!(csv.lines().count() > 3);
    for line in csv.lines().skip(1) {
        assert_eq!(line.split(',').nth(1), Some("0e0"), "{line}");
    }
}

#[test]
fn sweeps_are_byte_identical_across_runs() {
    let cfg = "half_width = 1.0\n[surface]\nkind = \"smoothed_cone\"\ntheta = 0.5\nsigma = 1.2\n[sweep]\ncommand = \"certify\"\n\
               [[sweep.axis]]\nname = \"theta\"\nvalues = [1.0471975511965976, 0.5235987755982988]\n\
               [[sweep.axis]]\nname = \"half_width\"\nvalues = [0.5, 1.0]\n";
    let d = setup("s.toml", cfg);
    let a = qlayers(&["sweep", "s.toml", "--out", "a"], d.path());
    let b = qlayers(&["sweep", "s.toml", "--out", "b"], d.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0));
    let x = fs::read(d.path().join("a/sweep.csv")).unwrap();
    let y = fs::read(d.path().join("b/sweep.csv")).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("point,theta,half_width,quantity,value,error\n"));
    assert_eq!(
        text.lines().filter(|l| l.contains(",certified,")).count(),
        4
    );
}
