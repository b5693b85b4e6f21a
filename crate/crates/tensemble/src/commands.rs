//! The pipeline commands behind the `tensemble` binary.
//!
//! Members are produced one at a time (read from disk or regenerated), so
//! statistics over large ensembles stream through an accumulator instead of
//! holding every member in memory.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use tensemble_core::extract::{extract_degenerate_lines_with, ExtractionParams};
use tensemble_core::features::enhance_mean_lines;
use tensemble_core::stats::abs_mode_field;
use tensemble_core::synthetic::{
    build_box_mesh, noise_member, sample_base, sample_member, trans_rot_transforms, MemberTransform, SyntheticError,
};
use tensemble_core::{
    build_mode_tube, probability_band_from_stats, EnsembleAccumulator, FeaturePolyline, ModeStats, ProbabilityBandParams,
    StatsError, SymTensor3, TensorField, TetMesh,
};

use crate::error::CliError;
use crate::manifest::{GeneratorKind, Manifest};
use crate::obj::{write_obj, Geometry};
use crate::vtk;

/// Line-oriented `key=value` run summary.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Summary {
    pub records: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl Display) {
        self.records.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.records.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.records.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinesMode {
    PerMember,
    Mean,
    Both,
}

fn synthetic(e: SyntheticError) -> CliError {
    CliError::Config(e.to_string())
}

fn stats_err(e: StatsError) -> CliError {
    match e {
        StatsError::MeshMismatch { .. } | StatsError::Domain(_) => CliError::Config(e.to_string()),
        StatsError::Empty | StatsError::MemberLength { .. } => CliError::Internal(e.to_string()),
    }
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn read_err(path: &Path, e: vtk::VtkError) -> CliError {
    match e {
        vtk::VtkError::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
        other => CliError::Config(format!("{}: {other}", path.display())),
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(write_err(dir))
}

fn member_name(i: usize, m: usize) -> String {
    let width = m.saturating_sub(1).to_string().len().max(3);
    format!("member_{i:0width$}")
}

enum Members {
    Files {
        paths: Vec<PathBuf>,
        first: TensorField,
    },
    TransRot {
        spec: tensemble_core::synthetic::LinearFieldSpec,
        mesh: Arc<TetMesh>,
        transforms: Vec<MemberTransform>,
    },
    Noise {
        mesh: Arc<TetMesh>,
        base: Vec<SymTensor3>,
        noise: tensemble_core::synthetic::NoiseSpec,
        m: usize,
    },
}

impl Members {
    /// Member files when the manifest lists any, otherwise the generator.
    fn from_manifest(man: &Manifest) -> Result<Self, CliError> {
        if let Some(p) = man.member_files.first() {
            let first = vtk::read_vtk_tensor_field(p).map_err(|e| read_err(p, e))?;
            return Ok(Members::Files {
                paths: man.member_files.clone(),
                first,
            });
        }
        Self::generator(man)
    }

    fn generator(man: &Manifest) -> Result<Self, CliError> {
        let spec = man.field_spec();
        spec.validate().map_err(synthetic)?;
        if man.members == 0 {
            return Err(synthetic(SyntheticError::MemberCount));
        }
        let finite = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite();
        if !finite(man.dx_range) || !finite(man.theta_range) {
            return Err(CliError::Config("dx_range and theta_range must be finite".into()));
        }
        let mesh = Arc::new(build_box_mesh(&spec.domain, spec.resolution));
        Ok(match man.kind {
            GeneratorKind::TransRot => Members::TransRot {
                spec,
                transforms: trans_rot_transforms(man.members, man.dx_range, man.theta_range),
                mesh,
            },
            GeneratorKind::Noise => {
                if !(man.sigma >= 0.0 && man.sigma.is_finite()) {
                    return Err(synthetic(SyntheticError::Sigma(man.sigma)));
                }
                Members::Noise {
                    base: sample_base(&spec, &mesh),
                    mesh,
                    noise: man.noise(),
                    m: man.members,
                }
            }
        })
    }

    fn len(&self) -> usize {
        match self {
            Members::Files { paths, .. } => paths.len(),
            Members::TransRot { transforms, .. } => transforms.len(),
            Members::Noise { m, .. } => *m,
        }
    }

    fn mesh(&self) -> &Arc<TetMesh> {
        match self {
            Members::Files { first, .. } => first.mesh(),
            Members::TransRot { mesh, .. } | Members::Noise { mesh, .. } => mesh,
        }
    }

    fn member(&self, i: usize) -> Result<TensorField, CliError> {
        let mesh = self.mesh().clone();
        let tensors = match self {
            Members::Files { paths, first } => {
                if i == 0 {
                    return Ok(first.clone());
                }
                let f = vtk::read_vtk_tensor_field(&paths[i]).map_err(|e| read_err(&paths[i], e))?;
                if **f.mesh() != *mesh {
                    return Err(stats_err(StatsError::MeshMismatch { member: i }));
                }
                f.into_tensors()
            }
            Members::TransRot { spec, transforms, .. } => sample_member(spec, &transforms[i], &mesh),
            Members::Noise { base, noise, .. } => noise_member(base, noise, i),
        };
        TensorField::new(mesh, tensors).map_err(|e| CliError::Internal(e.to_string()))
    }
}

/// Lazily computed results shared by the commands of one run.
pub struct Pipeline {
    man: Manifest,
    members: Members,
    stats: Option<(TensorField, ModeStats)>,
    mean_lines: Option<Vec<FeaturePolyline>>,
}

impl Pipeline {
    pub fn new(man: Manifest) -> Result<Self, CliError> {
        let members = Members::from_manifest(&man)?;
        Ok(Self {
            man,
            members,
            stats: None,
            mean_lines: None,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.man
    }

    fn out_dir(&self, sub: &str) -> Result<PathBuf, CliError> {
        let d = self.man.out.join(sub);
        ensure_dir(&d)?;
        Ok(d)
    }

    fn extraction_params(&self) -> ExtractionParams {
        ExtractionParams {
            weld_eps: self.man.weld_eps,
            ..Default::default()
        }
    }

    fn ensure_stats(&mut self) -> Result<&(TensorField, ModeStats), CliError> {
        if self.stats.is_none() {
            let mut acc = EnsembleAccumulator::new(self.members.mesh().clone());
            for i in 0..self.members.len() {
                acc.push(self.members.member(i)?.tensors()).map_err(stats_err)?;
            }
            let mean = acc.mean_field().map_err(stats_err)?;
            let stats = acc.mode_stats().map_err(stats_err)?;
            self.stats = Some((mean, stats));
        }
        Ok(self.stats.as_ref().expect("just computed"))
    }

    fn ensure_mean_lines(&mut self) -> Result<&[FeaturePolyline], CliError> {
        if self.mean_lines.is_none() {
            let params = self.extraction_params();
            let (mean, stats) = self.ensure_stats()?;
            let set = extract_degenerate_lines_with(mean, &params);
            self.mean_lines = Some(enhance_mean_lines(&set.polylines, stats));
        }
        Ok(self.mean_lines.as_deref().expect("just computed"))
    }

    /// Writes every member plus a manifest listing them.
    pub fn gen(&mut self, sum: &mut Summary) -> Result<(), CliError> {
        let gen = Members::generator(&self.man)?;
        let dir = self.out_dir("members")?;
        let m = gen.len();
        let mut files = Vec::with_capacity(m);
        for i in 0..m {
            let field = gen.member(i)?;
            let path = dir.join(format!("{}.vtk", member_name(i, m)));
            let title = format!("{} member {i} of {m} seed {}", self.man.kind.as_str(), self.man.seed);
            vtk::write_vtk_tensor_field(&field, &path, &title).map_err(write_err(&path))?;
            files.push(path);
        }
        let mut listed = self.man.clone();
        listed.member_files = files;
        let out = listed.out.clone();
        let mpath = out.join("manifest.txt");
        std::fs::write(&mpath, listed.render(&out)).map_err(write_err(&mpath))?;
        sum.push("kind", self.man.kind.as_str());
        sum.push("members", m);
        sum.push("points", gen.mesh().point_count());
        sum.push("tets", gen.mesh().tet_count());
        sum.push("manifest", mpath.display());
        self.man = listed;
        self.members = gen;
        Ok(())
    }

    pub fn stats(&mut self, sum: &mut Summary) -> Result<(), CliError> {
        let dir = self.out_dir("stats")?;
        let (mean, stats) = self.ensure_stats()?;
        let m = stats.member_count;
        let files = [
            ("mean_tensor", None),
            ("mean_mode", Some(("mean_mode", &stats.mean_mode))),
            ("mode_std", Some(("mode_std", &stats.mode_std))),
        ];
        for (name, scalar) in files {
            let path = dir.join(format!("{name}.vtk"));
            let title = format!("{name} of {m} members");
            match scalar {
                None => vtk::write_vtk_tensor_field(mean, &path, &title),
                Some((channel, f)) => vtk::write_vtk_scalar_field(f, channel, &path, &title),
            }
            .map_err(write_err(&path))?;
        }
        let path = dir.join("mode_of_mean.vtk");
        vtk::write_vtk_scalar_field(&abs_mode_field(mean), "mode_of_mean", &path, "mode_of_mean")
            .map_err(write_err(&path))?;
        let iso: u64 = stats.near_isotropic_count.iter().map(|&c| c as u64).sum();
        sum.push("members", m);
        sum.push("points", mean.mesh().point_count());
        sum.push("near_isotropic_samples", iso);
        sum.push("stats_dir", dir.display());
        Ok(())
    }

    pub fn lines(&mut self, mode: LinesMode, sum: &mut Summary) -> Result<(), CliError> {
        let dir = self.out_dir("lines")?;
        if matches!(mode, LinesMode::PerMember | LinesMode::Both) {
            let params = self.extraction_params();
            let m = self.members.len();
            let (mut total, mut warnings) = (0, 0);
            for i in 0..m {
                let set = extract_degenerate_lines_with(&self.members.member(i)?, &params);
                let name = member_name(i, m);
                write_lines(&dir, &name, &set.polylines, &format!("degenerate lines of member {i}"))?;
                total += set.polylines.len();
                warnings += set.report.warning_count();
            }
            sum.push("member_line_files", m);
            sum.push("member_polylines", total);
            sum.push("member_warnings", warnings);
        }
        if matches!(mode, LinesMode::Mean | LinesMode::Both) {
            let lines = self.ensure_mean_lines()?.to_vec();
            write_lines(&dir, "mean_line", &lines, "meanLine")?;
            sum.push("mean_polylines", lines.len());
            sum.push("mean_points", lines.iter().map(|l| l.len()).sum::<usize>());
            if lines.is_empty() {
                sum.push("notice", "mean field has no degenerate lines; wrote an empty file");
            }
        }
        sum.push("lines_dir", dir.display());
        Ok(())
    }

    pub fn tube(&mut self, sum: &mut Summary) -> Result<(), CliError> {
        let params = self.man.tube_params();
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let dir = self.out_dir("tube")?;
        let lines = self.ensure_mean_lines()?.to_vec();
        let (_, stats) = self.ensure_stats()?;
        let tube = build_mode_tube(&lines, stats, &params).map_err(|e| CliError::Config(e.to_string()))?;
        let title = format!(
            "modeTube r0={} rs={} rings={} normalization={}",
            params.r0,
            params.rs,
            params.samples_per_ring,
            crate::manifest::normalization_str(params.normalization)
        );
        write_surface(&dir, "mode_tube", &tube, &title)?;
        sum.push("tube_points", tube.points.len());
        sum.push("tube_triangles", tube.triangles.len());
        if lines.is_empty() {
            sum.push("notice", "no meanLine to build a tube around; wrote an empty file");
        }
        Ok(())
    }

    pub fn band(&mut self, sum: &mut Summary) -> Result<(), CliError> {
        let t = self.man.t;
        let cs = self.man.c.clone();
        if cs.is_empty() {
            return Err(CliError::Config("no iso-probability c given".into()));
        }
        for &c in &cs {
            ProbabilityBandParams { t, c }
                .validate()
                .map_err(|e| CliError::Config(format!("{e} (t = {t}, c = {c})")))?;
        }
        let dir = self.out_dir("band")?;
        let (_, stats) = self.ensure_stats()?;
        let mut counts = Vec::new();
        for c in cs {
            let band = probability_band_from_stats(stats, &ProbabilityBandParams { t, c })
                .map_err(|e| CliError::Config(e.to_string()))?;
            write_surface(&dir, &format!("band_c{c}"), &band, &format!("probabilityBand t={t} probability={c}"))?;
            counts.push(band.triangles.len().to_string());
        }
        sum.push("band_files", counts.len());
        sum.push("band_triangles", counts.join(","));
        Ok(())
    }
}

fn write_lines(dir: &Path, name: &str, lines: &[FeaturePolyline], title: &str) -> Result<(), CliError> {
    let path = dir.join(format!("{name}.vtk"));
    vtk::write_polylines_vtk(lines, &path, title).map_err(write_err(&path))?;
    let path = dir.join(format!("{name}.obj"));
    write_obj(Geometry::Polylines(lines), &path).map_err(write_err(&path))
}

fn write_surface(dir: &Path, name: &str, s: &tensemble_core::TriangleSurface, title: &str) -> Result<(), CliError> {
    let path = dir.join(format!("{name}.vtk"));
    vtk::write_surface_vtk(s, &path, title).map_err(write_err(&path))?;
    let path = dir.join(format!("{name}.obj"));
    write_obj(Geometry::Surface(s), &path).map_err(write_err(&path))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Gen,
    Stats,
    Lines(LinesMode),
    Tube,
    Band,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Stats => "stats",
            Command::Lines(_) => "lines",
            Command::Tube => "tube",
            Command::Band => "band",
            Command::All => "all",
        }
    }
}

/// Runs one command against a fully resolved manifest.
pub fn run(cmd: Command, man: Manifest) -> Result<Summary, CliError> {
    let start = Instant::now();
    let mut sum = Summary::default();
    sum.push("command", cmd.name());
    sum.push("out", man.out.display());
    match cmd {
        Command::Gen => {
            ensure_dir(&man.out)?;
            let mut p = Pipeline {
                members: Members::generator(&man)?,
                man,
                stats: None,
                mean_lines: None,
            };
            p.gen(&mut sum)?;
        }
        Command::All => {
            ensure_dir(&man.out)?;
            let mut p = Pipeline::new(man)?;
            if p.man.member_files.is_empty() {
                p.gen(&mut sum)?;
            }
            p.stats(&mut sum)?;
            p.lines(LinesMode::Both, &mut sum)?;
            p.tube(&mut sum)?;
            p.band(&mut sum)?;
        }
        Command::Stats => Pipeline::new(man)?.stats(&mut sum)?,
        Command::Lines(mode) => Pipeline::new(man)?.lines(mode, &mut sum)?,
        Command::Tube => Pipeline::new(man)?.tube(&mut sum)?,
        Command::Band => Pipeline::new(man)?.band(&mut sum)?,
    }
    sum.push("elapsed_ms", start.elapsed().as_millis());
    Ok(sum)
}
