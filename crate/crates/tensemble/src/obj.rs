//! Wavefront OBJ export (geometry only: `v`, `l` and `f` records).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use tensemble_core::{FeaturePolyline, TriangleSurface, Vec3};

#[derive(Debug, Clone, Copy)]
pub enum Geometry<'a> {
    Polylines(&'a [FeaturePolyline]),
    Surface(&'a TriangleSurface),
}

fn vertex<W: Write>(w: &mut W, p: Vec3) -> io::Result<()> {
    writeln!(w, "v {:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)
}

pub fn write_obj_to<W: Write>(mut w: W, geometry: Geometry<'_>) -> io::Result<()> {
    match geometry {
        Geometry::Polylines(lines) => {
            let mut base = 1;
            for l in lines {
                let k = if l.closed && l.len() > 1 { l.len() - 1 } else { l.len() };
                for p in &l.points[..k] {
                    vertex(&mut w, *p)?;
                }
                if l.len() > 1 {
                    w.write_all(b"l")?;
                    for i in 0..l.len() {
                        write!(w, " {}", base + i % k)?;
                    }
                    w.write_all(b"\n")?;
                }
                base += k;
            }
        }
        Geometry::Surface(s) => {
            for p in &s.points {
                vertex(&mut w, *p)?;
            }
            for [a, b, c] in &s.triangles {
                writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?;
            }
        }
    }
    w.flush()
}

pub fn write_obj(geometry: Geometry<'_>, path: &Path) -> io::Result<()> {
    write_obj_to(BufWriter::new(File::create(path)?), geometry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_line_reuses_first_vertex() {
        let p = vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::ZERO];
        let mut buf = Vec::new();
        write_obj_to(&mut buf, Geometry::Polylines(&[FeaturePolyline::new(p, true)])).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert!(s.contains("\nl 1 2 3 1\n"));
    }

    #[test]
    fn surface_faces_are_one_based() {
        let s = TriangleSurface {
            points: vec![Vec3::ZERO, Vec3::X, Vec3::Y],
            triangles: vec![[0, 1, 2]],
            channels: Vec::new(),
        };
        let mut buf = Vec::new();
        write_obj_to(&mut buf, Geometry::Surface(&s)).unwrap();
        assert!(String::from_utf8(buf).unwrap().ends_with("f 1 2 3\n"));
    }
}
