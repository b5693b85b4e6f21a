//! Legacy ASCII VTK files: unstructured-grid fields and polydata lines and
//! surfaces.
//!
//! Reals are written with 17 significant digits, so a write/read cycle
//! reproduces every value bit for bit.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use tensemble_core::{Channel, FeaturePolyline, MeshError, ScalarField, SymTensor3, TensorField, TetMesh, TriangleSurface, Vec3};

const VTK_TETRA: u32 = 10;
const HEADER: &str = "# vtk DataFile Version 3.0";

/// Relative tolerance on `|M_ij - M_ji|` for TENSORS blocks.
pub const SYMMETRY_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum VtkError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported cell type {cell_type} (only tetrahedra, type 10, are read)")]
    UnsupportedCellType { cell_type: u32 },
    #[error("tensor at point {point} is not symmetric (relative deviation {deviation:e})")]
    Asymmetry { point: usize, deviation: f64 },
    #[error("invalid mesh: {0}")]
    Mesh(#[from] MeshError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> VtkError {
    VtkError::Parse { line, msg: msg.into() }
}

fn title_line(title: &str) -> String {
    let t: String = title.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).take(255).collect();
    if t.is_empty() {
        "tensemble".into()
    } else {
        t
    }
}

struct Out<W: Write> {
    w: W,
}

impl<W: Write> Out<W> {
    fn header(&mut self, title: &str, dataset: &str) -> io::Result<()> {
        writeln!(self.w, "{HEADER}\n{}\nASCII\nDATASET {dataset}", title_line(title))
    }

    fn real(&mut self, v: f64) -> io::Result<()> {
        write!(self.w, "{v:.16e}")
    }

    fn reals(&mut self, vals: &[f64]) -> io::Result<()> {
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                self.w.write_all(b" ")?;
            }
            self.real(*v)?;
        }
        self.w.write_all(b"\n")
    }

    fn points<'a>(&mut self, n: usize, pts: impl Iterator<Item = &'a Vec3>) -> io::Result<()> {
        writeln!(self.w, "POINTS {n} double")?;
        for p in pts {
            self.reals(&[p.x, p.y, p.z])?;
        }
        Ok(())
    }

    fn scalars(&mut self, name: &str, vals: &[f64]) -> io::Result<()> {
        writeln!(self.w, "SCALARS {} double 1\nLOOKUP_TABLE default", attr_name(name))?;
        for v in vals {
            self.real(*v)?;
            self.w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Attribute names may not contain whitespace.
fn attr_name(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    if s.is_empty() {
        "unnamed".into()
    } else {
        s
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_grid<W: Write>(out: &mut Out<W>, mesh: &TetMesh, title: &str) -> io::Result<()> {
    out.header(title, "UNSTRUCTURED_GRID")?;
    out.points(mesh.point_count(), mesh.points().iter())?;
    let t = mesh.tet_count();
    writeln!(out.w, "CELLS {t} {}", 5 * t)?;
    for [a, b, c, d] in mesh.tets() {
        writeln!(out.w, "4 {a} {b} {c} {d}")?;
    }
    writeln!(out.w, "CELL_TYPES {t}")?;
    for _ in 0..t {
        writeln!(out.w, "{VTK_TETRA}")?;
    }
    Ok(())
}

/// Full 9-component TENSORS block on an unstructured grid.
pub fn write_tensor_field_to<W: Write>(w: W, field: &TensorField, title: &str) -> io::Result<()> {
    let mut out = Out { w };
    write_grid(&mut out, field.mesh(), title)?;
    writeln!(out.w, "POINT_DATA {}\nTENSORS tensor double", field.tensors().len())?;
    for t in field.tensors() {
        out.reals(&[t.xx, t.xy, t.xz])?;
        out.reals(&[t.xy, t.yy, t.yz])?;
        out.reals(&[t.xz, t.yz, t.zz])?;
    }
    out.w.flush()
}

pub fn write_vtk_tensor_field(field: &TensorField, path: &Path, title: &str) -> io::Result<()> {
    write_tensor_field_to(create(path)?, field, title)
}

pub fn write_scalar_field_to<W: Write>(w: W, field: &ScalarField, name: &str, title: &str) -> io::Result<()> {
    let mut out = Out { w };
    write_grid(&mut out, field.mesh(), title)?;
    writeln!(out.w, "POINT_DATA {}", field.values().len())?;
    out.scalars(name, field.values())?;
    out.w.flush()
}

pub fn write_vtk_scalar_field(field: &ScalarField, name: &str, path: &Path, title: &str) -> io::Result<()> {
    write_scalar_field_to(create(path)?, field, name, title)
}

fn channel_names<'a>(sets: impl Iterator<Item = &'a [Channel]>) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for set in sets {
        for c in set {
            if !names.contains(&c.name) {
                names.push(c.name.clone());
            }
        }
    }
    names
}

/// Stored point count of a polyline: a closed line drops its repeated end
/// point and refers back to its first index instead.
fn stored_len(l: &FeaturePolyline) -> usize {
    if l.closed && l.len() > 1 {
        l.len() - 1
    } else {
        l.len()
    }
}

/// POLYDATA with one LINES cell per polyline. Channels become SCALARS
/// (NaN where a line lacks one), tangents a VECTORS block.
pub fn write_polylines_to<W: Write>(w: W, lines: &[FeaturePolyline], title: &str) -> io::Result<()> {
    let mut out = Out { w };
    out.header(title, "POLYDATA")?;
    let total: usize = lines.iter().map(stored_len).sum();
    out.points(total, lines.iter().flat_map(|l| l.points[..stored_len(l)].iter()))?;
    let cells: Vec<&FeaturePolyline> = lines.iter().filter(|l| !l.is_empty()).collect();
    let size: usize = cells.iter().map(|l| l.len() + 1).sum();
    writeln!(out.w, "LINES {} {size}", cells.len())?;
    let mut base = 0;
    for l in lines {
        let k = stored_len(l);
        if k > 0 {
            write!(out.w, "{}", l.len())?;
            for i in 0..l.len() {
                write!(out.w, " {}", base + i % k)?;
            }
            out.w.write_all(b"\n")?;
        }
        base += k;
    }
    if total > 0 {
        writeln!(out.w, "POINT_DATA {total}")?;
        for name in channel_names(lines.iter().map(|l| l.channels.as_slice())) {
            let vals: Vec<f64> = lines
                .iter()
                .flat_map(|l| {
                    let k = stored_len(l);
                    match l.channel(&name) {
                        Some(v) => v[..k].to_vec(),
                        None => vec![f64::NAN; k],
                    }
                })
                .collect();
            out.scalars(&name, &vals)?;
        }
        if lines.iter().any(|l| !l.tangents.is_empty()) {
            writeln!(out.w, "VECTORS tangent double")?;
            for l in lines {
                for i in 0..stored_len(l) {
                    let t = l.tangents.get(i).copied().unwrap_or(Vec3::ZERO);
                    out.reals(&[t.x, t.y, t.z])?;
                }
            }
        }
    }
    out.w.flush()
}

pub fn write_polylines_vtk(lines: &[FeaturePolyline], path: &Path, title: &str) -> io::Result<()> {
    write_polylines_to(create(path)?, lines, title)
}

/// POLYDATA with POLYGONS; every surface channel becomes a SCALARS block.
pub fn write_surface_to<W: Write>(w: W, surface: &TriangleSurface, title: &str) -> io::Result<()> {
    let mut out = Out { w };
    out.header(title, "POLYDATA")?;
    out.points(surface.points.len(), surface.points.iter())?;
    let t = surface.triangles.len();
    writeln!(out.w, "POLYGONS {t} {}", 4 * t)?;
    for [a, b, c] in &surface.triangles {
        writeln!(out.w, "3 {a} {b} {c}")?;
    }
    if !surface.points.is_empty() && !surface.channels.is_empty() {
        writeln!(out.w, "POINT_DATA {}", surface.points.len())?;
        for c in &surface.channels {
            out.scalars(&c.name, &c.values)?;
        }
    }
    out.w.flush()
}

pub fn write_surface_vtk(surface: &TriangleSurface, path: &Path, title: &str) -> io::Result<()> {
    write_surface_to(create(path)?, surface, title)
}

// ---------------------------------------------------------------- reading

struct Tokens {
    toks: Vec<(usize, String)>,
    pos: usize,
    last_line: usize,
}

impl Tokens {
    fn next(&mut self) -> Option<(usize, &str)> {
        let (l, t) = self.toks.get(self.pos)?;
        self.pos += 1;
        self.last_line = *l;
        Some((*l, t.as_str()))
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|(_, t)| t.as_str())
    }

    fn word(&mut self, what: &str) -> Result<String, VtkError> {
        let line = self.last_line;
        self.next()
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| parse_err(line, format!("unexpected end of file, expected {what}")))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), VtkError> {
        let w = self.word(kw)?;
        if w.eq_ignore_ascii_case(kw) {
            Ok(())
        } else {
            Err(parse_err(self.last_line, format!("expected {kw}, found `{w}`")))
        }
    }

    fn count(&mut self, what: &str) -> Result<usize, VtkError> {
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| parse_err(self.last_line, format!("bad {what} `{w}`")))
    }

    fn real(&mut self) -> Result<f64, VtkError> {
        let w = self.word("a number")?;
        w.parse()
            .map_err(|_| parse_err(self.last_line, format!("bad number `{w}`")))
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>, VtkError> {
        (0..n).map(|_| self.real()).collect()
    }
}

/// Reads the three header lines and tokenizes the rest.
fn tokenize<R: Read>(r: R) -> Result<(String, Tokens), VtkError> {
    let mut lines = BufReader::new(r).lines();
    let head = lines.next().transpose()?.unwrap_or_default();
    if !head.trim_start().starts_with("# vtk DataFile Version") {
        return Err(parse_err(1, "missing `# vtk DataFile Version` header"));
    }
    let title = lines.next().transpose()?.unwrap_or_default();
    let fmt = lines.next().transpose()?.unwrap_or_default();
    if !fmt.trim().eq_ignore_ascii_case("ASCII") {
        return Err(parse_err(3, format!("only ASCII files are supported, found `{}`", fmt.trim())));
    }
    let mut toks = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        toks.extend(body.split_whitespace().map(|t| (i + 4, t.to_string())));
    }
    Ok((title, Tokens { toks, pos: 0, last_line: 3 }))
}

fn dataset(t: &mut Tokens, expected: &str) -> Result<(), VtkError> {
    t.keyword("DATASET")?;
    let kind = t.word("dataset type")?;
    if kind.eq_ignore_ascii_case(expected) {
        Ok(())
    } else {
        Err(parse_err(t.last_line, format!("expected DATASET {expected}, found {kind}")))
    }
}

fn points(t: &mut Tokens) -> Result<Vec<Vec3>, VtkError> {
    t.keyword("POINTS")?;
    let n = t.count("point count")?;
    t.word("data type")?;
    let v = t.reals(3 * n)?;
    Ok(v.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect())
}

/// `n` cells of the form `k i0 .. ik-1`.
fn cell_list(t: &mut Tokens, n: usize, np: usize) -> Result<Vec<Vec<usize>>, VtkError> {
    let _size = t.count("cell list size")?;
    let mut cells = Vec::with_capacity(n);
    for _ in 0..n {
        let k = t.count("cell size")?;
        let ids = (0..k)
            .map(|_| {
                let i = t.count("point index")?;
                if i >= np {
                    Err(parse_err(t.last_line, format!("point index {i} out of range ({np} points)")))
                } else {
                    Ok(i)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        cells.push(ids);
    }
    Ok(cells)
}

/// Point or cell attributes following a POINT_DATA/CELL_DATA header.
#[derive(Default)]
struct Attributes {
    scalars: Vec<(String, Vec<f64>)>,
    tensors: Option<Vec<f64>>,
    vectors: Vec<(String, Vec<f64>)>,
    field: Vec<(String, usize, Vec<f64>)>,
}

fn attributes(t: &mut Tokens, n: usize) -> Result<Attributes, VtkError> {
    let mut a = Attributes::default();
    while let Some(kw) = t.peek() {
        let kw = kw.to_ascii_uppercase();
        match kw.as_str() {
            "POINT_DATA" | "CELL_DATA" => break,
            "SCALARS" => {
                t.next();
                let name = t.word("scalar name")?;
                t.word("data type")?;
                let mut comps = 1;
                if t.peek().is_some_and(|w| w.parse::<usize>().is_ok()) {
                    comps = t.count("component count")?;
                }
                if t.peek().is_some_and(|w| w.eq_ignore_ascii_case("LOOKUP_TABLE")) {
                    t.next();
                    t.word("lookup table name")?;
                }
                let vals = t.reals(comps * n)?;
                if comps == 1 {
                    a.scalars.push((name, vals));
                }
            }
            "TENSORS" | "TENSORS6" => {
                t.next();
                t.word("tensor name")?;
                t.word("data type")?;
                let per = if kw == "TENSORS" { 9 } else { 6 };
                let vals = t.reals(per * n)?;
                a.tensors = Some(if per == 9 { vals } else { expand_tensors6(&vals) });
            }
            "VECTORS" | "NORMALS" => {
                t.next();
                let name = t.word("vector name")?;
                t.word("data type")?;
                a.vectors.push((name, t.reals(3 * n)?));
            }
            "LOOKUP_TABLE" => {
                t.next();
                t.word("table name")?;
                let k = t.count("table size")?;
                t.reals(4 * k)?;
            }
            "FIELD" => {
                t.next();
                t.word("field name")?;
                let arrays = t.count("array count")?;
                for _ in 0..arrays {
                    let name = t.word("array name")?;
                    let comps = t.count("component count")?;
                    let tuples = t.count("tuple count")?;
                    t.word("data type")?;
                    let vals = t.reals(comps * tuples)?;
                    a.field.push((name, comps, vals));
                }
            }
            other => return Err(parse_err(t.last_line + 1, format!("unsupported section `{other}`"))),
        }
    }
    Ok(a)
}

/// TENSORS6 order XX YY ZZ XY YZ XZ expanded to row-major 3x3.
fn expand_tensors6(v: &[f64]) -> Vec<f64> {
    v.chunks_exact(6)
        .flat_map(|c| [c[0], c[3], c[5], c[3], c[1], c[4], c[5], c[4], c[2]])
        .collect()
}

fn data_sections(t: &mut Tokens, np: usize, nc: usize) -> Result<Attributes, VtkError> {
    let mut point = Attributes::default();
    while let Some(kw) = t.peek() {
        match kw.to_ascii_uppercase().as_str() {
            "POINT_DATA" => {
                t.next();
                let n = t.count("point count")?;
                if n != np {
                    return Err(parse_err(t.last_line, format!("POINT_DATA {n} but {np} points")));
                }
                point = attributes(t, n)?;
            }
            "CELL_DATA" => {
                t.next();
                let n = t.count("cell count")?;
                if n != nc {
                    return Err(parse_err(t.last_line, format!("CELL_DATA {n} but {nc} cells")));
                }
                attributes(t, n)?;
            }
            other => return Err(parse_err(t.last_line + 1, format!("unexpected `{other}`"))),
        }
    }
    Ok(point)
}

/// Unstructured tet grid and its point attributes.
fn read_grid<R: Read>(r: R) -> Result<(Arc<TetMesh>, Attributes), VtkError> {
    let (_, mut t) = tokenize(r)?;
    dataset(&mut t, "UNSTRUCTURED_GRID")?;
    let pts = points(&mut t)?;
    t.keyword("CELLS")?;
    let nc = t.count("cell count")?;
    let cells = cell_list(&mut t, nc, pts.len())?;
    t.keyword("CELL_TYPES")?;
    let nt = t.count("cell type count")?;
    if nt != nc {
        return Err(parse_err(t.last_line, format!("CELL_TYPES {nt} but {nc} cells")));
    }
    for _ in 0..nt {
        let ty = t.count("cell type")? as u32;
        if ty != VTK_TETRA {
            return Err(VtkError::UnsupportedCellType { cell_type: ty });
        }
    }
    let tets = cells
        .iter()
        .map(|c| {
            <[usize; 4]>::try_from(c.as_slice())
                .map_err(|_| parse_err(t.last_line, format!("tetrahedron with {} points", c.len())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let np = pts.len();
    let attrs = data_sections(&mut t, np, nc)?;
    Ok((Arc::new(TetMesh::new(pts, tets)?), attrs))
}

/// Symmetrizes a row-major 3x3 block, rejecting asymmetry beyond
/// [`SYMMETRY_TOL`] relative to the largest entry.
fn symmetrize(point: usize, m: &[f64]) -> Result<SymTensor3, VtkError> {
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let dev = [(1, 3), (2, 6), (5, 7)]
        .iter()
        .fold(0.0f64, |d, &(i, j)| d.max((m[i] - m[j]).abs()));
    if dev > SYMMETRY_TOL * scale || dev.is_nan() {
        return Err(VtkError::Asymmetry {
            point,
            deviation: if scale > 0.0 { dev / scale } else { dev },
        });
    }
    Ok(SymTensor3::new(
        m[0],
        m[4],
        m[8],
        0.5 * (m[1] + m[3]),
        0.5 * (m[2] + m[6]),
        0.5 * (m[5] + m[7]),
    ))
}

/// Reads a tensor field from a TENSORS block, or failing that from a
/// 6-component FIELD array named `sym_tensor` in VTK order
/// XX YY ZZ XY YZ XZ.
pub fn read_tensor_field_from<R: Read>(r: R) -> Result<TensorField, VtkError> {
    let (mesh, attrs) = read_grid(r)?;
    let n = mesh.point_count();
    let tensors = if let Some(v) = attrs.tensors {
        v.chunks_exact(9)
            .enumerate()
            .map(|(i, m)| symmetrize(i, m))
            .collect::<Result<Vec<_>, _>>()?
    } else if let Some((_, _, v)) = attrs.field.iter().find(|(name, c, _)| name == "sym_tensor" && *c == 6) {
        if v.len() != 6 * n {
            return Err(parse_err(0, format!("sym_tensor has {} tuples, expected {n}", v.len() / 6)));
        }
        v.chunks_exact(6)
            .map(|c| SymTensor3::new(c[0], c[1], c[2], c[3], c[5], c[4]))
            .collect()
    } else {
        return Err(parse_err(0, "no TENSORS block or 6-component `sym_tensor` FIELD array"));
    };
    Ok(TensorField::new(mesh, tensors)?)
}

pub fn read_vtk_tensor_field(path: &Path) -> Result<TensorField, VtkError> {
    read_tensor_field_from(File::open(path)?)
}

/// Reads the named scalar array, or the first one when `name` is `None`.
pub fn read_scalar_field_from<R: Read>(r: R, name: Option<&str>) -> Result<ScalarField, VtkError> {
    let (mesh, attrs) = read_grid(r)?;
    let (_, vals) = attrs
        .scalars
        .into_iter()
        .find(|(n, _)| name.is_none_or(|want| n == want))
        .ok_or_else(|| parse_err(0, "no matching SCALARS block"))?;
    Ok(ScalarField::new(mesh, vals)?)
}

pub fn read_vtk_scalar_field(path: &Path, name: Option<&str>) -> Result<ScalarField, VtkError> {
    read_scalar_field_from(File::open(path)?, name)
}

/// Polydata as stored: points, cells and point attributes.
struct PolyData {
    title: String,
    points: Vec<Vec3>,
    lines: Vec<Vec<usize>>,
    polygons: Vec<Vec<usize>>,
    attrs: Attributes,
}

fn read_polydata<R: Read>(r: R) -> Result<PolyData, VtkError> {
    let (title, mut t) = tokenize(r)?;
    dataset(&mut t, "POLYDATA")?;
    let pts = points(&mut t)?;
    let (mut lines, mut polygons) = (Vec::new(), Vec::new());
    let mut ncells = 0;
    while let Some(kw) = t.peek() {
        let kw = kw.to_ascii_uppercase();
        let target = match kw.as_str() {
            "LINES" => &mut lines,
            "POLYGONS" => &mut polygons,
            "VERTICES" | "TRIANGLE_STRIPS" => {
                return Err(parse_err(t.last_line + 1, format!("unsupported cell section {kw}")))
            }
            _ => break,
        };
        t.next();
        let n = t.count("cell count")?;
        *target = cell_list(&mut t, n, pts.len())?;
        ncells += n;
    }
    let attrs = data_sections(&mut t, pts.len(), ncells)?;
    Ok(PolyData { title, points: pts, lines, polygons, attrs })
}

/// Polylines back from [`write_polylines_to`] output: a line whose last
/// index repeats its first is closed.
pub fn read_polylines_from<R: Read>(r: R) -> Result<Vec<FeaturePolyline>, VtkError> {
    let pd = read_polydata(r)?;
    let tangents = pd.attrs.vectors.iter().find(|(n, _)| n == "tangent").map(|(_, v)| v);
    let mut out = Vec::with_capacity(pd.lines.len());
    for ids in &pd.lines {
        let closed = ids.len() > 2 && ids.first() == ids.last();
        let mut l = FeaturePolyline::new(ids.iter().map(|&i| pd.points[i]).collect(), closed);
        if let Some(tv) = tangents {
            l.tangents = ids.iter().map(|&i| Vec3::new(tv[3 * i], tv[3 * i + 1], tv[3 * i + 2])).collect();
        }
        for (name, vals) in &pd.attrs.scalars {
            l.set_channel(name, ids.iter().map(|&i| vals[i]).collect());
        }
        out.push(l);
    }
    Ok(out)
}

pub fn read_polylines_vtk(path: &Path) -> Result<Vec<FeaturePolyline>, VtkError> {
    read_polylines_from(File::open(path)?)
}

/// Triangle surface and its title line.
pub fn read_surface_from<R: Read>(r: R) -> Result<(TriangleSurface, String), VtkError> {
    let pd = read_polydata(r)?;
    let triangles = pd
        .polygons
        .iter()
        .map(|c| {
            <[usize; 3]>::try_from(c.as_slice()).map_err(|_| parse_err(0, format!("polygon with {} points", c.len())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut s = TriangleSurface {
        points: pd.points,
        triangles,
        channels: Vec::new(),
    };
    for (name, vals) in pd.attrs.scalars {
        s.set_channel(&name, vals);
    }
    Ok((s, pd.title))
}

pub fn read_surface_vtk(path: &Path) -> Result<(TriangleSurface, String), VtkError> {
    read_surface_from(File::open(path)?)
}
