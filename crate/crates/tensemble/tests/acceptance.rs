//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! fails. Runs as a plain binary (`harness = false`) so the lines always show.

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use tensemble_core::extract::{extract_degenerate_lines, DegenerateLineSet};
use tensemble_core::mesh::interpolate_tensor;
use tensemble_core::special::{erf, tube_displacement_factor};
use tensemble_core::synthetic::{
    build_box_mesh, gen_trans_rot_ensemble, noise_member, sample_base, BoxDomain, LinearFieldSpec, NoiseSpec,
};
use tensemble_core::{
    build_mode_tube, marching_tetrahedra, mode_stats, probability_band_from_stats, probability_field, EnsembleAccumulator,
    FeaturePolyline, Location, ModeStats, ModeTubeParams, PointLocator, ProbabilityBandParams, ScalarField, SymTensor3,
    TensorField, TetMesh, Vec3,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Distance from a point to the segment `a..b`.
fn point_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let d = b - a;
    let t = ((p - a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
    p.distance(a + d * t)
}

fn locus_distance(p: Vec3) -> f64 {
    point_segment(p, Vec3::new(1.0, 1.0, 0.0), Vec3::new(1.0, 1.0, 2.0))
}

/// Symmetric Hausdorff distance between a polyline and the locus segment.
fn hausdorff_to_locus(line: &FeaturePolyline) -> f64 {
    let there = line.points.iter().map(|p| locus_distance(*p)).fold(0.0, f64::max);
    let back = (0..=2000)
        .map(|k| {
            let q = Vec3::new(1.0, 1.0, 2.0 * k as f64 / 2000.0);
            line.points
                .windows(2)
                .map(|w| point_segment(q, w[0], w[1]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    there.max(back)
}

fn sample_tensor(field: &TensorField, loc: &PointLocator, p: Vec3) -> Option<SymTensor3> {
    match loc.locate(p) {
        Location::Inside { tet, weights } => interpolate_tensor(field, tet, &weights).ok(),
        Location::Outside => None,
    }
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn c1_analytic_line() -> Outcome {
    let spec = LinearFieldSpec::reference(21);
    let start = Instant::now();
    let (field, set) = single_threaded(|| {
        let mesh = Arc::new(build_box_mesh(&spec.domain, spec.resolution));
        let field = TensorField::new(mesh.clone(), sample_base(&spec, &mesh)).unwrap();
        let set = extract_degenerate_lines(&field);
        (field, set)
    });
    let elapsed = start.elapsed();
    check(set.polylines.len() == 1, || format!("{} polylines", set.polylines.len()))?;
    let line = &set.polylines[0];
    let h = hausdorff_to_locus(line);
    check(h <= 0.1, || format!("Hausdorff {h}"))?;
    let loc = PointLocator::new(field.mesh());
    let min_mode = line
        .points
        .iter()
        .map(|p| sample_tensor(&field, &loc, *p).map_or(0.0, |t| t.mode().value.abs()))
        .fold(1.0, f64::min);
    check(min_mode >= 0.9999, || format!("min |mode| {min_mode}"))?;
    check(elapsed <= Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} points, Hausdorff {h:.2e}, min |mode| {min_mode:.12}, {:.2?} single-threaded",
        line.len(),
        elapsed
    ))
}

fn c2_grid_counts() -> Outcome {
    let m = build_box_mesh(&BoxDomain::default(), 51);
    check(m.point_count() == 132_651 && m.tet_count() == 625_000, || {
        format!("{} points, {} tets", m.point_count(), m.tet_count())
    })?;
    Ok("132651 points, 625000 tets".into())
}

/// The m = 1000 noise ensemble shared by criteria 3 and 5.
struct NoiseRun {
    mesh: Arc<TetMesh>,
    stats: ModeStats,
    mean_lines: DegenerateLineSet,
    member_lines: Vec<DegenerateLineSet>,
    elapsed: Duration,
}

fn noise_run() -> NoiseRun {
    let start = Instant::now();
    let spec = LinearFieldSpec::reference(21);
    let mesh = Arc::new(build_box_mesh(&spec.domain, spec.resolution));
    let base = sample_base(&spec, &mesh);
    let noise = NoiseSpec { sigma: 0.1, seed: 20240607 };
    let mut acc = EnsembleAccumulator::new(mesh.clone());
    let mut member_lines = Vec::new();
    for i in 0..1000 {
        let member = noise_member(&base, &noise, i);
        acc.push(&member).unwrap();
        if i < 10 {
            member_lines.push(extract_degenerate_lines(&TensorField::new(mesh.clone(), member).unwrap()));
        }
    }
    let mean_lines = extract_degenerate_lines(&acc.mean_field().unwrap());
    NoiseRun {
        stats: acc.mode_stats().unwrap(),
        mesh,
        mean_lines,
        member_lines,
        elapsed: start.elapsed(),
    }
}

fn mean_locus_distance<'a>(lines: impl Iterator<Item = &'a FeaturePolyline>) -> f64 {
    let d: Vec<f64> = lines.flat_map(|l| l.points.iter().map(|p| locus_distance(*p))).collect();
    d.iter().sum::<f64>() / d.len().max(1) as f64
}

fn c3_noise_mean_line(run: &NoiseRun) -> Outcome {
    let lines = &run.mean_lines.polylines;
    check(lines.len() == 1, || format!("meanLine has {} polylines", lines.len()))?;
    let h = hausdorff_to_locus(&lines[0]);
    check(h <= 0.2, || format!("Hausdorff {h}"))?;
    let mean_d = mean_locus_distance(lines.iter());
    let member_d = mean_locus_distance(run.member_lines.iter().flat_map(|s| s.polylines.iter()));
    check(member_d > mean_d, || format!("member mean distance {member_d} <= meanLine {mean_d}"))?;
    check(run.elapsed <= Duration::from_secs(300), || format!("took {:?}", run.elapsed))?;
    Ok(format!(
        "Hausdorff {h:.3e}, mean distance meanLine {mean_d:.3e} < members {member_d:.3e}, {:.1?}",
        run.elapsed
    ))
}

fn c4_band_nesting() -> Outcome {
    let spec = LinearFieldSpec::reference(21);
    let ens = gen_trans_rot_ensemble(&spec, 5, (-0.5, 0.5), (0.0, FRAC_PI_2)).unwrap();
    let stats = mode_stats(&ens);
    let t = 0.95;
    let f = probability_field(&stats, t).unwrap();
    let loc = PointLocator::new(ens.mesh());
    let cs = [0.15, 0.5, 0.9];
    let bands: Vec<_> = cs
        .iter()
        .map(|&c| probability_band_from_stats(&stats, &ProbabilityBandParams { t, c }).unwrap())
        .collect();
    let mut worst = 1.0f64;
    for (i, lo) in cs.iter().enumerate() {
        for band in &bands[i + 1..] {
            check(!band.is_empty(), || "empty band".into())?;
            let ok = band
                .points
                .iter()
                .filter(|p| loc.sample(&f, **p).is_some_and(|v| v >= lo - 1e-12))
                .count();
            worst = worst.min(ok as f64 / band.points.len() as f64);
        }
    }
    check(worst >= 0.99, || format!("only {:.2}% nested", 100.0 * worst))?;
    let sizes: Vec<usize> = bands.iter().map(|b| b.triangles.len()).collect();
    Ok(format!("{:.2}% of higher-c vertices inside lower-c bands, triangles {sizes:?}", 100.0 * worst))
}

fn c5_band_containment(run: &NoiseRun) -> Outcome {
    let (t, c) = (0.95, 0.33);
    let band = probability_band_from_stats(&run.stats, &ProbabilityBandParams { t, c }).unwrap();
    check(!band.is_empty(), || "empty band".into())?;
    let far = band.points.iter().map(|p| locus_distance(*p)).fold(0.0, f64::max);
    let f = probability_field(&run.stats, t).unwrap();
    let loc = PointLocator::new(&run.mesh);
    let pts: Vec<Vec3> = run
        .member_lines
        .iter()
        .flat_map(|s| s.polylines.iter().flat_map(|l| l.points.iter().copied()))
        .collect();
    let inside = pts.iter().filter(|p| loc.sample(&f, **p).is_some_and(|v| v >= c)).count();
    let frac = inside as f64 / pts.len().max(1) as f64;
    let detail = format!(
        "farthest band vertex {far:.3} from the line, {:.1}% of {} member line points enclosed",
        100.0 * frac,
        pts.len()
    );
    check(far <= 0.5 && frac >= 0.9, || detail.clone())?;
    Ok(detail)
}

fn c6_statistics() -> Outcome {
    let mesh = Arc::new(build_box_mesh(&BoxDomain::unit(), 2));
    let mut rng = rand::rngs::StdRng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mu: f64 = rng.random_range(0.0..1.0);
        let sigma: f64 = rng.random_range(0.01..0.3);
        let t: f64 = rng.random_range(0.05..1.0);
        let n = mesh.point_count();
        let stats = ModeStats {
            mean_mode: ScalarField::new(mesh.clone(), vec![mu; n]).unwrap(),
            mode_std: ScalarField::new(mesh.clone(), vec![sigma; n]).unwrap(),
            near_isotropic_count: vec![0; n],
            member_count: 2,
        };
        let p = probability_field(&stats, t).unwrap().values()[0];
        let hits = (0..1_000_000)
            .filter(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                mu + sigma * z >= t
            })
            .count();
        worst = worst.max((p - hits as f64 / 1e6).abs());
    }
    check(worst <= 2e-3, || format!("Monte Carlo deviation {worst}"))?;
    // erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1))
    let series = |x: f64| {
        let (mut term, mut sum, mut n) = (x, x, 0.0);
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= 2.0 * x * x / (2.0 * n + 1.0);
            sum += term;
        }
        2.0 / PI.sqrt() * (-x * x).exp() * sum
    };
    let erf_err = (-6000..=6000)
        .map(|k| {
            let x = k as f64 / 1000.0;
            (erf(x) - series(x)).abs()
        })
        .fold(0.0, f64::max);
    check(erf_err <= 1e-12, || format!("erf deviation {erf_err:e}"))?;
    Ok(format!("Monte Carlo max deviation {worst:.2e}, erf max deviation {erf_err:.2e}"))
}

fn random_rotation(rng: &mut impl Rng) -> [[f64; 3]; 3] {
    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn c7_invariance() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut mode_err = 0.0f64;
    for _ in 0..1000 {
        let c: [f64; 6] = std::array::from_fn(|_| rng.random_range(-5.0..5.0));
        let t = SymTensor3::from_components(c);
        let m = t.mode().value;
        let r = random_rotation(&mut rng);
        let s = rng.random_range(0.01..100.0);
        let a = rng.random_range(-10.0..10.0);
        for v in [
            t.rotated(&r).mode().value,
            (t * s).mode().value,
            (t + SymTensor3::IDENTITY * a).mode().value,
        ] {
            mode_err = mode_err.max((v - m).abs());
        }
    }
    check(mode_err <= 1e-8, || format!("mode invariance error {mode_err:e}"))?;

    let spec = LinearFieldSpec::reference(11);
    let ens = gen_trans_rot_ensemble(&spec, 5, (-0.5, 0.5), (0.0, FRAC_PI_2)).unwrap();
    let field = ens.member_field(1);
    let a = extract_degenerate_lines(&field);
    let points = |s: &DegenerateLineSet| -> Vec<Vec3> { s.polylines.iter().flat_map(|l| l.points.clone()).collect() };
    let nearest = |p: &Vec3, set: &[Vec3]| set.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min);
    let pa = points(&a);
    let mut extract_err = 0.0f64;
    for k in [1e-3, 7.5, 1e4] {
        let pb = points(&extract_degenerate_lines(&field.map(|t| *t * k)));
        check(!pb.is_empty(), || format!("no lines after scaling by {k}"))?;
        for p in &pa {
            extract_err = extract_err.max(nearest(p, &pb));
        }
        for p in &pb {
            extract_err = extract_err.max(nearest(p, &pa));
        }
    }
    check(!pa.is_empty() && extract_err <= 1e-6, || format!("extraction scaling error {extract_err:e}"))?;

    let mesh = Arc::new(build_box_mesh(&BoxDomain::default(), 9));
    let lin = |p: Vec3| 0.3 * p.x - 0.7 * p.y + 0.45 * p.z;
    let f = ScalarField::new(mesh.clone(), mesh.points().iter().map(|p| lin(*p)).collect()).unwrap();
    let plane = marching_tetrahedra(&f, 0.1);
    let lin_err = plane.points.iter().map(|p| (lin(*p) - 0.1).abs()).fold(0.0, f64::max);
    check(!plane.is_empty() && lin_err <= 1e-12, || format!("linear isosurface error {lin_err:e}"))?;

    let mesh = Arc::new(build_box_mesh(&BoxDomain::default(), 41));
    let center = Vec3::new(1.0, 1.0, 1.0);
    let f = ScalarField::new(mesh.clone(), mesh.points().iter().map(|p| p.distance(center)).collect()).unwrap();
    let r = 0.7;
    let sphere = marching_tetrahedra(&f, r);
    let area_err = (sphere.area() - 4.0 * PI * r * r).abs() / (4.0 * PI * r * r);
    check(area_err <= 0.02, || format!("sphere area error {area_err}"))?;
    Ok(format!(
        "mode {mode_err:.1e}, extraction {extract_err:.1e}, linear isosurface {lin_err:.1e}, sphere area {:.3}%",
        100.0 * area_err
    ))
}

fn c8_tube() -> Outcome {
    let f0 = tube_displacement_factor(0.0);
    let f5 = tube_displacement_factor(0.5);
    check(f0 == 1.0, || format!("fc(0) = {f0}"))?;
    check((f5 - 1.46212).abs() <= 1e-5, || format!("fc(0.5) = {f5}"))?;
    let mut prev = 0.0;
    // beyond |d| ~ 18 the value rounds to 0 or 2 in double precision
    for k in -1500..=1500 {
        let v = tube_displacement_factor(k as f64 / 100.0);
        check(v > 0.0 && v < 2.0 && v >= prev, || format!("fc not monotone in (0, 2) at {}", k as f64 / 100.0))?;
        prev = v;
    }
    let mesh = Arc::new(build_box_mesh(&BoxDomain::default(), 11));
    let n = mesh.point_count();
    let stats = ModeStats {
        mean_mode: ScalarField::new(mesh.clone(), vec![0.8; n]).unwrap(),
        mode_std: ScalarField::new(mesh.clone(), vec![0.0; n]).unwrap(),
        near_isotropic_count: vec![0; n],
        member_count: 1,
    };
    let line = tensemble_core::extract::compute_tangents(FeaturePolyline::new(
        (0..=30)
            .map(|k| {
                let s = k as f64 / 30.0;
                Vec3::new(0.6 + 0.8 * s, 1.0 + 0.3 * (3.0 * s).sin(), 0.2 + 1.6 * s)
            })
            .collect(),
        false,
    ));
    let rs = 0.04;
    let tube = build_mode_tube(std::slice::from_ref(&line), &stats, &ModeTubeParams { rs, ..Default::default() }).unwrap();
    let k = ModeTubeParams::default().samples_per_ring;
    let err = tube
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.distance(line.points[i / k]) - rs).abs())
        .fold(0.0, f64::max);
    check(err <= 1e-9, || format!("cylinder radius error {err:e}"))?;
    Ok(format!("fc(0) = 1, fc(0.5) = {f5:.7}, monotone, cylinder radius error {err:.1e}"))
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn c9_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = tmp.path().join("manifest.txt");
    std::fs::write(&manifest, "kind = noise\nmembers = 6\nresolution = 11\nsigma = 0.1\nseed = 7\nc = 0.2, 0.6\n").unwrap();
    let run = |out: &str, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_tensemble"))
            .args(["all", "--manifest"])
            .arg(&manifest)
            .args(["--out", out, "--threads", threads])
            .current_dir(tmp.path())
            .output()
            .unwrap();
        check(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())
    };
    run("a", "4")?;
    run("b", "1")?;
    let (a, b) = (tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
    check(!a.is_empty() && a == b, || "output trees differ".into())?;
    let bytes: usize = a.iter().map(|(_, v)| v.len()).sum();
    Ok(format!("{} files ({bytes} bytes) byte-identical across runs with 4 and 1 threads", a.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, r: std::thread::Result<Outcome>| {
        let line = match r {
            Ok(Ok(d)) => format!("criterion {n} PASS {name}: {d}"),
            Ok(Err(d)) => format!("criterion {n} FAIL {name}: {d}"),
            Err(_) => format!("criterion {n} FAIL {name}: panicked"),
        };
        if line.contains(" FAIL ") {
            failed += 1;
        }
        println!("{line}");
    };
    let guard = |f: &dyn Fn() -> Outcome| catch_unwind(AssertUnwindSafe(f));
    report(1, "analytic degenerate line", guard(&c1_analytic_line));
    report(2, "grid counts", guard(&c2_grid_counts));
    let run = catch_unwind(noise_run);
    match &run {
        Ok(run) => {
            report(3, "noise-ensemble meanLine", guard(&|| c3_noise_mean_line(run)));
            report(4, "probabilityBand nesting", guard(&c4_band_nesting));
            report(5, "noise-ensemble band containment", guard(&|| c5_band_containment(run)));
        }
        Err(_) => {
            report(3, "noise-ensemble meanLine", Ok(Err("ensemble generation panicked".into())));
            report(4, "probabilityBand nesting", guard(&c4_band_nesting));
            report(5, "noise-ensemble band containment", Ok(Err("ensemble generation panicked".into())));
        }
    }
    report(6, "statistics oracles", guard(&c6_statistics));
    report(7, "invariance suite", guard(&c7_invariance));
    report(8, "modeTube formula", guard(&c8_tube));
    report(9, "determinism", guard(&c9_determinism));
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
