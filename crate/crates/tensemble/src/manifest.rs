//! Ensemble manifest: flat `key = value` lines plus an optional `[members]`
//! section listing member files, one path per line. `#` starts a comment.
//!
//! ```text
//! kind = noise
//! members = 10
//! resolution = 21
//! sigma = 0.1
//! seed = 7
//! c = 0.15, 0.5, 0.9
//!
//! [members]
//! members/member_000.vtk
//! ```
//!
//! Relative paths (`out` and member files) resolve against the directory
//! holding the manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tensemble_core::synthetic::{BoxDomain, LinearFieldSpec, NoiseSpec};
use tensemble_core::{ModeTubeParams, Normalization, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{origin}:{line}: {msg}")]
pub struct ManifestError {
    pub origin: String,
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    TransRot,
    Noise,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::TransRot => "trans-rot",
            GeneratorKind::Noise => "noise",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "trans-rot" | "transrot" => Some(GeneratorKind::TransRot),
            "noise" => Some(GeneratorKind::Noise),
            _ => None,
        }
    }
}

pub fn normalization_str(n: Normalization) -> &'static str {
    match n {
        Normalization::Global => "global",
        Normalization::PerPoint => "perpoint",
    }
}

pub fn parse_normalization(s: &str) -> Option<Normalization> {
    match s.to_ascii_lowercase().as_str() {
        "global" => Some(Normalization::Global),
        "perpoint" | "per-point" => Some(Normalization::PerPoint),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub kind: GeneratorKind,
    /// Member count for generated ensembles.
    pub members: usize,
    pub resolution: usize,
    pub domain: BoxDomain,
    pub seed: u64,
    pub sigma: f64,
    pub dx_range: (f64, f64),
    pub theta_range: (f64, f64),
    /// Member files; when non-empty they are the ensemble and the generator
    /// keys only matter to `gen`.
    pub member_files: Vec<PathBuf>,
    pub out: PathBuf,
    pub t: f64,
    pub c: Vec<f64>,
    pub r0: f64,
    pub rs: f64,
    pub rings: usize,
    pub weld_eps: Option<f64>,
    pub normalization: Normalization,
}

impl Default for Manifest {
    fn default() -> Self {
        let tube = ModeTubeParams::default();
        Self {
            kind: GeneratorKind::TransRot,
            members: 5,
            resolution: 21,
            domain: BoxDomain::default(),
            seed: 0,
            sigma: 0.1,
            dx_range: (-0.5, 0.5),
            theta_range: (0.0, std::f64::consts::FRAC_PI_2),
            member_files: Vec::new(),
            out: PathBuf::from("tensemble-out"),
            t: 0.95,
            c: vec![0.15, 0.5, 0.9],
            r0: tube.r0,
            rs: tube.rs,
            rings: tube.samples_per_ring,
            weld_eps: None,
            normalization: tube.normalization,
        }
    }
}

fn parse_list(v: &str) -> Option<Vec<f64>> {
    v.split(',').map(|s| s.trim().parse::<f64>().ok()).collect()
}

/// Comma-separated reals, as used by `c` and the range keys.
pub fn parse_reals(v: &str) -> Result<Vec<f64>, String> {
    parse_list(v).ok_or_else(|| format!("`{v}` is not a comma-separated list of numbers"))
}

fn pair(v: &str) -> Option<(f64, f64)> {
    match parse_list(v)?.as_slice() {
        [a, b] => Some((*a, *b)),
        _ => None,
    }
}

fn triple(v: &str) -> Option<Vec3> {
    match parse_list(v)?.as_slice() {
        [x, y, z] => Some(Vec3::new(*x, *y, *z)),
        _ => None,
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl Manifest {
    /// Parses manifest text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, origin: &str) -> Result<Self, ManifestError> {
        let mut m = Manifest::default();
        let mut in_members = false;
        let mut out_set = false;
        for (i, raw) in text.lines().enumerate() {
            let err = |msg: String| ManifestError {
                origin: origin.to_string(),
                line: i + 1,
                msg,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if line.eq_ignore_ascii_case("[members]") {
                    in_members = true;
                    continue;
                }
                return Err(err(format!("unknown section {line}")));
            }
            if in_members {
                m.member_files.push(resolve(base, line));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let bad = |what: &str| err(format!("`{key}`: expected {what}, found `{value}`"));
            match key {
                "kind" => m.kind = GeneratorKind::parse(value).ok_or_else(|| bad("trans-rot or noise"))?,
                "members" => m.members = value.parse().map_err(|_| bad("a member count"))?,
                "resolution" => m.resolution = value.parse().map_err(|_| bad("an integer"))?,
                "seed" => m.seed = value.parse().map_err(|_| bad("an unsigned integer"))?,
                "sigma" => m.sigma = value.parse().map_err(|_| bad("a number"))?,
                "dx_range" => m.dx_range = pair(value).ok_or_else(|| bad("two numbers"))?,
                "theta_range" => m.theta_range = pair(value).ok_or_else(|| bad("two numbers"))?,
                "domain_min" => m.domain.min = triple(value).ok_or_else(|| bad("three numbers"))?,
                "domain_max" => m.domain.max = triple(value).ok_or_else(|| bad("three numbers"))?,
                "out" => {
                    m.out = resolve(base, value);
                    out_set = true;
                }
                "t" => m.t = value.parse().map_err(|_| bad("a number"))?,
                "c" => m.c = parse_list(value).ok_or_else(|| bad("a comma-separated list"))?,
                "r0" => m.r0 = value.parse().map_err(|_| bad("a number"))?,
                "rs" => m.rs = value.parse().map_err(|_| bad("a number"))?,
                "rings" | "samples_per_ring" => m.rings = value.parse().map_err(|_| bad("an integer"))?,
                "weld_eps" => m.weld_eps = Some(value.parse().map_err(|_| bad("a number"))?),
                "normalization" => {
                    m.normalization = parse_normalization(value).ok_or_else(|| bad("global or perpoint"))?
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        if !out_set {
            m.out = base.join(&m.out);
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io(path.to_path_buf(), e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Ok(Self::parse(&text, base, &path.display().to_string())?)
    }

    pub fn field_spec(&self) -> LinearFieldSpec {
        LinearFieldSpec {
            domain: self.domain,
            ..LinearFieldSpec::reference(self.resolution)
        }
    }

    pub fn noise(&self) -> NoiseSpec {
        NoiseSpec {
            sigma: self.sigma,
            seed: self.seed,
        }
    }

    pub fn tube_params(&self) -> ModeTubeParams {
        ModeTubeParams {
            r0: self.r0,
            rs: self.rs,
            samples_per_ring: self.rings,
            normalization: self.normalization,
        }
    }

    /// Manifest text; paths are written relative to `base` when they lie
    /// under it.
    pub fn render(&self, base: &Path) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "kind = {}", self.kind.as_str());
        let _ = writeln!(s, "members = {}", self.members);
        let _ = writeln!(s, "resolution = {}", self.resolution);
        let d = self.domain;
        let _ = writeln!(s, "domain_min = {}", list(&[d.min.x, d.min.y, d.min.z]));
        let _ = writeln!(s, "domain_max = {}", list(&[d.max.x, d.max.y, d.max.z]));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "sigma = {}", self.sigma);
        let _ = writeln!(s, "dx_range = {}", list(&[self.dx_range.0, self.dx_range.1]));
        let _ = writeln!(s, "theta_range = {}", list(&[self.theta_range.0, self.theta_range.1]));
        let out = self.out.strip_prefix(base).unwrap_or(&self.out);
        let out = if out.as_os_str().is_empty() { Path::new(".") } else { out };
        let _ = writeln!(s, "out = {}", out.display());
        let _ = writeln!(s, "t = {}", self.t);
        let _ = writeln!(s, "c = {}", list(&self.c));
        let _ = writeln!(s, "r0 = {}", self.r0);
        let _ = writeln!(s, "rs = {}", self.rs);
        let _ = writeln!(s, "rings = {}", self.rings);
        if let Some(w) = self.weld_eps {
            let _ = writeln!(s, "weld_eps = {w}");
        }
        let _ = writeln!(s, "normalization = {}", normalization_str(self.normalization));
        if !self.member_files.is_empty() {
            s.push_str("\n[members]\n");
            for p in &self.member_files {
                let shown = p.strip_prefix(base).unwrap_or(p);
                let _ = writeln!(s, "{}", shown.display());
            }
        }
        s
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read manifest {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Parse(#[from] ManifestError),
}
