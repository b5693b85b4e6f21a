//! Degenerate tensor line extraction on a single tensor field.
//!
//! The discriminant of the linearly interpolated tensor is a sum of squared
//! cubic minors; its zeros are located on every mesh vertex, edge and face,
//! paired inside each tet into segments, and stitched into polylines.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::geometry::FeaturePolyline;
use crate::mesh::TensorField;
use crate::par::par_map_collect;

mod minors;
mod scan;
mod segments;
mod stitch;
mod tangents;

pub use scan::{find_face_degeneracies, FaceDegeneratePoint, FaceScan, FaceStatus};
pub use segments::{build_segments, Pairing, SegmentEnd};
pub use stitch::{stitch_polylines, LinePoint, Welder};
pub use tangents::compute_tangents;

use scan::{kind_of, scan_edge, vertex_is_degenerate, EdgeScan};

/// Which eigenvalue pair coincides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DegenKind {
    /// `λ2 = λ3`, mode +1.
    Linear,
    /// `λ1 = λ2`, mode −1.
    Planar,
}

impl DegenKind {
    /// +1 for linear, −1 for planar.
    pub fn sign(self) -> f64 {
        match self {
            DegenKind::Linear => 1.0,
            DegenKind::Planar => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionParams {
    /// Maximum face subdivision depth.
    pub face_depth: usize,
    /// Maximum edge bisection depth.
    pub edge_depth: usize,
    /// A refined point is accepted when its normalized discriminant is at
    /// most this fraction of the simplex maximum.
    pub accept_rel: f64,
    /// Vertices with `discriminant / ‖deviator‖⁶` at or below this are degenerate.
    pub vertex_tol: f64,
    /// Roots closer than this in barycentric coordinates are merged.
    pub dedup_bary: f64,
    /// Endpoint weld distance; `None` uses `1e-6` of the mesh bbox diagonal.
    pub weld_eps: Option<f64>,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        Self {
            face_depth: 7,
            edge_depth: 12,
            accept_rel: 1e-16,
            vertex_tol: 1e-20,
            dedup_bary: 1e-6,
            weld_eps: None,
        }
    }
}

/// Counts and non-fatal conditions met during extraction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtractionReport {
    pub faces_scanned: usize,
    pub degenerate_vertices: usize,
    pub degenerate_edges: usize,
    pub edge_points: usize,
    pub face_points: usize,
    /// Faces with a curve of degenerate points inside.
    pub non_isolated_faces: Vec<[usize; 3]>,
    /// Faces degenerate everywhere; their tets are skipped.
    pub degenerate_plane_faces: Vec<[usize; 3]>,
    pub skipped_tets: usize,
    /// Face points left without a partner inside a tet.
    pub unpaired_points: usize,
    /// Subdivision seeds whose descent did not reach a degenerate point.
    pub unconverged_seeds: usize,
}

impl ExtractionReport {
    pub fn warning_count(&self) -> usize {
        self.non_isolated_faces.len() + self.degenerate_plane_faces.len() + self.unpaired_points
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DegenerateLineSet {
    pub polylines: Vec<FeaturePolyline>,
    pub report: ExtractionReport,
}

impl DegenerateLineSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.polylines.iter().map(|l| l.len()).sum()
    }
}

pub fn extract_degenerate_lines(field: &TensorField) -> DegenerateLineSet {
    extract_degenerate_lines_with(field, &ExtractionParams::default())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Site {
    Vertex,
    Edge,
    Face,
}

pub fn extract_degenerate_lines_with(field: &TensorField, params: &ExtractionParams) -> DegenerateLineSet {
    let mesh = field.mesh();
    let tensors = field.tensors();
    let points = mesh.points();
    let mut report = ExtractionReport::default();

    let vertex_hits: Vec<Option<f64>> =
        par_map_collect!(0..points.len(), |v: usize| vertex_is_degenerate(&tensors[v], params));

    let edges = mesh.edges();
    let edge_scans: Vec<EdgeScan> = par_map_collect!(0..edges.len(), |i: usize| {
        let [a, b] = edges[i];
        scan_edge(&tensors[a], &tensors[b], params)
    });

    let faces = mesh.faces();
    let face_scans: Vec<FaceScan> = par_map_collect!(0..faces.len(), |i: usize| {
        find_face_degeneracies(field, faces[i].0, params)
    });
    report.faces_scanned = faces.len();

    // vertices degenerate on their own or as ends of degenerate edges
    let mut degenerate_vertex: BTreeMap<usize, f64> = BTreeMap::new();
    for (v, hit) in vertex_hits.iter().enumerate() {
        if let Some(r) = hit {
            degenerate_vertex.insert(v, *r);
        }
    }
    for (e, scan) in edges.iter().zip(&edge_scans) {
        if *scan == EdgeScan::Degenerate {
            report.degenerate_edges += 1;
            for &v in e {
                if !tensors[v].mode().near_isotropic {
                    degenerate_vertex
                        .entry(v)
                        .or_insert_with(|| minors::relative_discriminant(&tensors[v].deviator()));
                }
            }
        }
    }
    report.degenerate_vertices = degenerate_vertex.len();

    let weld_eps = params.weld_eps.unwrap_or(1e-6 * mesh.bbox_diagonal());
    let mut welder = Welder::new(weld_eps);
    let mut nodes: Vec<LinePoint> = Vec::new();
    let mut node_site: Vec<Site> = Vec::new();
    let mut add = |p: LinePoint, site: Site, nodes: &mut Vec<LinePoint>, node_site: &mut Vec<Site>| {
        let id = welder.insert(p.position);
        if id == nodes.len() {
            nodes.push(p);
            node_site.push(site);
        }
        id
    };

    let mut vertex_node: BTreeMap<usize, usize> = BTreeMap::new();
    for (&v, &r) in &degenerate_vertex {
        let p = LinePoint {
            position: points[v],
            kind: kind_of(&tensors[v].deviator()),
            residual: r,
        };
        vertex_node.insert(v, add(p, Site::Vertex, &mut nodes, &mut node_site));
    }

    let mut edge_nodes: BTreeMap<[usize; 2], Vec<usize>> = BTreeMap::new();
    for (e, scan) in edges.iter().zip(&edge_scans) {
        if let EdgeScan::Roots(roots) = scan {
            if roots.is_empty() {
                continue;
            }
            let ids = roots
                .iter()
                .map(|&(t, r)| {
                    let tensor = tensors[e[0]] * (1.0 - t) + tensors[e[1]] * t;
                    let p = LinePoint {
                        position: points[e[0]] * (1.0 - t) + points[e[1]] * t,
                        kind: kind_of(&tensor.deviator()),
                        residual: r,
                    };
                    add(p, Site::Edge, &mut nodes, &mut node_site)
                })
                .collect();
            report.edge_points += roots.len();
            edge_nodes.insert(*e, ids);
        }
    }

    let mut face_nodes: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
    let mut plane_faces: BTreeSet<[usize; 3]> = BTreeSet::new();
    for ((f, _), scan) in faces.iter().zip(&face_scans) {
        report.unconverged_seeds += scan.unconverged_seeds;
        match scan.status {
            FaceStatus::Regular => {}
            FaceStatus::NonIsolated => report.non_isolated_faces.push(*f),
            FaceStatus::DegeneratePlane => {
                report.degenerate_plane_faces.push(*f);
                plane_faces.insert(*f);
            }
        }
        if scan.points.is_empty() {
            continue;
        }
        let ids = scan
            .points
            .iter()
            .map(|fp| {
                let p = LinePoint {
                    position: fp.position,
                    kind: fp.kind,
                    residual: fp.residual,
                };
                add(p, Site::Face, &mut nodes, &mut node_site)
            })
            .collect();
        report.face_points += scan.points.len();
        face_nodes.insert(*f, ids);
    }

    let tets = mesh.tets();
    let per_tet: Vec<(Vec<[usize; 2]>, bool, usize)> = par_map_collect!(0..tets.len(), |ti: usize| {
        let t = tets[ti];
        let mut ids: Vec<usize> = Vec::new();
        for v in t {
            if let Some(&id) = vertex_node.get(&v) {
                ids.push(id);
            }
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                let key = [t[i].min(t[j]), t[i].max(t[j])];
                if let Some(list) = edge_nodes.get(&key) {
                    ids.extend_from_slice(list);
                }
            }
        }
        for skip in 0..4 {
            let mut key = [0usize; 3];
            let mut k = 0;
            for (j, &v) in t.iter().enumerate() {
                if j != skip {
                    key[k] = v;
                    k += 1;
                }
            }
            key.sort_unstable();
            if plane_faces.contains(&key) {
                return (Vec::new(), true, 0);
            }
            if let Some(list) = face_nodes.get(&key) {
                ids.extend_from_slice(list);
            }
        }
        ids.sort_unstable();
        ids.dedup();
        if ids.len() < 2 {
            let lone_face_point = ids.first().map_or(0, |&id| usize::from(node_site[id] == Site::Face));
            return (Vec::new(), false, lone_face_point);
        }
        let ends: Vec<SegmentEnd> = ids
            .iter()
            .map(|&id| SegmentEnd {
                position: nodes[id].position,
                kind: nodes[id].kind,
            })
            .collect();
        let pairing = build_segments(&ends);
        let unpaired = pairing
            .unpaired
            .map_or(0, |i| usize::from(node_site[ids[i]] == Site::Face));
        let segs = pairing.segments.iter().map(|s| [ids[s[0]], ids[s[1]]]).collect();
        (segs, false, unpaired)
    });

    let mut segments: Vec<[usize; 2]> = Vec::new();
    for (segs, skipped, unpaired) in per_tet {
        segments.extend(segs);
        report.skipped_tets += usize::from(skipped);
        report.unpaired_points += unpaired;
    }

    DegenerateLineSet {
        polylines: stitch::chain(&nodes, &segments).into_iter().map(compute_tangents).collect(),
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{build_box_mesh, eval_linear, BoxDomain, LinearFieldSpec};
    use crate::tensor::SymTensor3;
    use crate::vec3::Vec3;
    use alloc::sync::Arc;

    fn field_from(spec: &LinearFieldSpec, f: impl Fn(Vec3) -> SymTensor3) -> TensorField {
        let mesh = Arc::new(build_box_mesh(&spec.domain, spec.resolution));
        let ts = mesh.points().iter().map(|p| f(*p)).collect();
        TensorField::new(mesh, ts).unwrap()
    }

    fn distance_to_vertical(p: Vec3, x: f64, y: f64) -> f64 {
        libm::hypot(p.x - x, p.y - y)
    }

    #[test]
    fn base_field_line() {
        let spec = LinearFieldSpec::reference(9);
        let field = field_from(&spec, |p| eval_linear(&spec, p.x, p.y, p.z));
        let set = extract_degenerate_lines(&field);
        assert_eq!(set.polylines.len(), 1, "{:?}", set.report);
        let l = &set.polylines[0];
        assert!(l.points.iter().all(|p| distance_to_vertical(*p, 1.0, 1.0) < 1e-9));
        assert_eq!(l.points.first().unwrap().z, 0.0);
        assert_eq!(l.points.last().unwrap().z, 2.0);
        assert!(l.channel("kind").unwrap().iter().all(|&k| k == -1.0));
    }

    #[test]
    fn constant_field_has_no_lines() {
        let spec = LinearFieldSpec::reference(5);
        let field = field_from(&spec, |_| SymTensor3::diag(7.0, 6.0, 1.0));
        let set = extract_degenerate_lines(&field);
        assert!(set.is_empty());
        assert_eq!(set.report.warning_count(), 0);
    }

    #[test]
    fn shifted_line() {
        let spec = LinearFieldSpec::reference(9);
        let tr = crate::synthetic::MemberTransform { dx: 0.25, ..Default::default() };
        let field = field_from(&spec, |p| crate::synthetic::eval_member(&spec, &tr, p.x, p.y, p.z));
        let set = extract_degenerate_lines(&field);
        assert_eq!(set.polylines.len(), 1, "{:?}", set.report);
        for p in &set.polylines[0].points {
            assert!(distance_to_vertical(*p, 1.25, 1.0) < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn oblique_line_crosses_faces_generically() {
        // planar degeneracy where x - 1 = 0.3(z - 1) and y - 1 = 0.2(z - 1) + 0.01
        let spec = LinearFieldSpec { domain: BoxDomain::default(), ..LinearFieldSpec::reference(7) };
        let field = field_from(&spec, |p| {
            let q = Vec3::new(p.x - 0.3 * (p.z - 1.0), p.y - 0.2 * (p.z - 1.0) - 0.01, p.z);
            eval_linear(&spec, q.x, q.y, q.z)
        });
        let set = extract_degenerate_lines(&field);
        assert_eq!(set.polylines.len(), 1, "{:?}", set.report);
        let l = &set.polylines[0];
        assert!(l.len() > 7);
        for p in &l.points {
            let x = 1.0 + 0.3 * (p.z - 1.0);
            let y = 1.01 + 0.2 * (p.z - 1.0);
            assert!(distance_to_vertical(*p, x, y) < 1e-6, "{p:?}");
        }
        assert_eq!(set.report.unpaired_points, 0);
    }

    #[test]
    fn constant_degenerate_field_is_reported_not_traced() {
        let spec = LinearFieldSpec::reference(3);
        let field = field_from(&spec, |_| SymTensor3::diag(8.0, 8.0, 1.0));
        let set = extract_degenerate_lines(&field);
        assert!(set.is_empty());
        assert!(!set.report.degenerate_plane_faces.is_empty());
        assert_eq!(set.report.skipped_tets, field.mesh().tet_count());
    }
}
