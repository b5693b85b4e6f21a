use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use tensemble::vtk;
use tensemble_core::synthetic::{build_box_mesh, BoxDomain};
use tensemble_core::{SymTensor3, TensorField};

fn tensemble(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tensemble"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary_value(o: &Output, key: &str) -> Option<String> {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn point_count(path: &Path) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    let line = text.lines().find(|l| l.starts_with("POINTS")).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn gen_paper_scale_trans_rot() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["gen", "--members", "5", "--resolution", "51", "--out", "g"]);
    assert!(o.status.success(), "{o:?}");
    for i in 0..5 {
        assert_eq!(point_count(&tmp.path().join(format!("g/members/member_00{i}.vtk"))), 132_651);
    }
    let manifest = std::fs::read_to_string(tmp.path().join("g/manifest.txt")).unwrap();
    assert!(manifest.contains("[members]\nmembers/member_000.vtk\n"));
    assert_eq!(summary_value(&o, "tets").as_deref(), Some("625000"));
}

#[test]
fn gen_noise_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["gen", "--kind", "noise", "--members", "10", "--resolution", "21", "--seed", "7", "--out", out];
    assert!(tensemble(tmp.path(), &args("a")).status.success());
    assert!(tensemble(tmp.path(), &args("b")).status.success());
    for i in 0..10 {
        let f = format!("members/member_{i:03}.vtk");
        let a = std::fs::read(tmp.path().join("a").join(&f)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(&f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn gen_rejects_single_point_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["gen", "--resolution", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolution"));
}

#[test]
fn stats_writes_four_fields() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(tensemble(tmp.path(), &["gen", "--resolution", "7", "--out", "s"]).status.success());
    let o = tensemble(tmp.path(), &["stats", "--manifest", "s/manifest.txt"]);
    assert!(o.status.success(), "{o:?}");
    for name in ["mean_tensor", "mean_mode", "mode_std", "mode_of_mean"] {
        assert_eq!(point_count(&tmp.path().join(format!("s/stats/{name}.vtk"))), 343, "{name}");
    }
}

#[test]
fn single_member_has_zero_mode_std() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["stats", "--kind", "noise", "--members", "1", "--resolution", "5", "--out", "one"]);
    assert!(o.status.success(), "{o:?}");
    let f = vtk::read_vtk_scalar_field(&tmp.path().join("one/stats/mode_std.vtk"), Some("mode_std")).unwrap();
    assert!(f.values().iter().all(|&v| v == 0.0));
}

#[test]
fn mismatched_meshes_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(tensemble(tmp.path(), &["gen", "--resolution", "5", "--members", "1", "--out", "a"]).status.success());
    assert!(tensemble(tmp.path(), &["gen", "--resolution", "6", "--members", "1", "--out", "b"]).status.success());
    write(tmp.path(), "m.txt", "[members]\na/members/member_000.vtk\nb/members/member_000.vtk\n");
    let o = tensemble(tmp.path(), &["stats", "--manifest", "m.txt"]);
    assert_eq!(o.status.code(), Some(2), "{o:?}");
}

#[test]
fn base_field_mean_line() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(
        tmp.path(),
        &["lines", "--mean", "--kind", "noise", "--sigma", "0", "--members", "1", "--resolution", "11", "--out", "l"],
    );
    assert!(o.status.success(), "{o:?}");
    let lines = vtk::read_polylines_vtk(&tmp.path().join("l/lines/mean_line.vtk")).unwrap();
    assert_eq!(lines.len(), 1);
    for p in &lines[0].points {
        assert!((p.x - 1.0).hypot(p.y - 1.0) < 1e-9);
    }
    assert!(tmp.path().join("l/lines/mean_line.obj").exists());
}

#[test]
fn constant_field_gives_empty_file() {
    let tmp = tempfile::tempdir().unwrap();
    let mesh = Arc::new(build_box_mesh(&BoxDomain::unit(), 4));
    let n = mesh.point_count();
    let f = TensorField::new(mesh, vec![SymTensor3::diag(3.0, 2.0, 1.0); n]).unwrap();
    vtk::write_vtk_tensor_field(&f, &tmp.path().join("const.vtk"), "constant").unwrap();
    write(tmp.path(), "m.txt", "out = res\n[members]\nconst.vtk\n");
    let o = tensemble(tmp.path(), &["lines", "--per-member", "--mean", "--manifest", "m.txt"]);
    assert!(o.status.success(), "{o:?}");
    assert!(summary_value(&o, "notice").is_some());
    let lines = vtk::read_polylines_vtk(&tmp.path().join("res/lines/mean_line.vtk")).unwrap();
    assert!(lines.is_empty());
    assert!(vtk::read_polylines_vtk(&tmp.path().join("res/lines/member_000.vtk")).unwrap().is_empty());
}

#[test]
fn noise_mean_line_carries_uncertainty() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "m.txt", "kind = noise\nmembers = 8\nresolution = 11\nsigma = 0.1\nseed = 3\nout = n\n");
    let o = tensemble(tmp.path(), &["lines", "--manifest", "m.txt"]);
    assert!(o.status.success(), "{o:?}");
    let lines = vtk::read_polylines_vtk(&tmp.path().join("n/lines/mean_line.vtk")).unwrap();
    assert!(!lines.is_empty());
    for l in &lines {
        let std = l.channel("mode_std").unwrap();
        assert!(std.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(l.channel("mean_mode").is_some());
        assert_eq!(l.tangents.len(), l.len());
    }
}

#[test]
fn band_writes_one_surface_per_c() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["band", "--t", "0.95", "--c", "0.15,0.5,0.9", "--out", "b"]);
    assert!(o.status.success(), "{o:?}");
    for c in ["0.15", "0.5", "0.9"] {
        let (s, title) = vtk::read_surface_vtk(&tmp.path().join(format!("b/band/band_c{c}.vtk"))).unwrap();
        assert!(!s.is_empty());
        assert!(title.contains(&format!("probability={c}")));
        let want: f64 = c.parse().unwrap();
        assert!(s.channel("probability").unwrap().iter().all(|&v| v == want));
    }
}

#[test]
fn band_rejects_c_out_of_range() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["band", "--c", "1.5", "--resolution", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("tensemble-out/band").exists());
}

#[test]
fn tube_around_noise_mean_line_is_watertight() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(
        tmp.path(),
        &["tube", "--kind", "noise", "--members", "6", "--resolution", "11", "--seed", "5", "--out", "t"],
    );
    assert!(o.status.success(), "{o:?}");
    let (s, _) = vtk::read_surface_vtk(&tmp.path().join("t/tube/mode_tube.vtk")).unwrap();
    assert!(!s.is_empty());
    assert!(s.is_watertight());
    let d = s.channel("d_c").unwrap();
    assert!(d.iter().all(|v| v.is_nan() || v.abs() <= 1.0));
}

#[test]
fn flags_override_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "m.txt", "c = 0.5\nresolution = 5\n");
    let o = tensemble(tmp.path(), &["band", "--manifest", "m.txt", "--c", "0.3,0.6", "--out", "x"]);
    assert!(o.status.success(), "{o:?}");
    assert!(tmp.path().join("x/band/band_c0.3.vtk").exists());
    assert!(!tmp.path().join("x/band/band_c0.5.vtk").exists());
}

#[test]
fn error_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["stats", "--manifest", "missing.txt"]);
    assert_eq!(o.status.code(), Some(3));
    write(tmp.path(), "bad.txt", "colour = blue\n");
    let o = tensemble(tmp.path(), &["stats", "--manifest", "bad.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    write(tmp.path(), "file", "");
    let o = tensemble(tmp.path(), &["gen", "--resolution", "3", "--out", "file/sub"]);
    assert_eq!(o.status.code(), Some(3));
    let o = tensemble(tmp.path(), &["band", "--t", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tensemble(tmp.path(), &["tube", "--rings", "2", "--resolution", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn summary_is_key_value() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tensemble(tmp.path(), &["gen", "--resolution", "3", "--members", "2", "--out", "k"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.split_once('=').is_some_and(|(k, _)| !k.is_empty() && !k.contains(' '))));
    assert_eq!(summary_value(&o, "command").as_deref(), Some("gen"));
    assert_eq!(summary_value(&o, "members").as_deref(), Some("2"));
}
