//! Welding segment endpoints and chaining segments into polylines.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::tangents::compute_tangents;
use super::DegenKind;
use crate::geometry::FeaturePolyline;
use crate::vec3::Vec3;

/// A point on an extracted line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePoint {
    pub position: Vec3,
    pub kind: DegenKind,
    pub residual: f64,
}

/// Merges points closer than `eps`. The first point inserted at a location
/// becomes its representative.
#[derive(Debug, Clone)]
pub struct Welder {
    eps: f64,
    cells: BTreeMap<(i64, i64, i64), Vec<usize>>,
    points: Vec<Vec3>,
}

impl Welder {
    pub fn new(eps: f64) -> Self {
        Self {
            eps: eps.max(f64::MIN_POSITIVE),
            cells: BTreeMap::new(),
            points: Vec::new(),
        }
    }

    fn cell(&self, p: Vec3) -> (i64, i64, i64) {
        let c = |v: f64| libm::floor(v / self.eps) as i64;
        (c(p.x), c(p.y), c(p.z))
    }

    /// Node id of `p`, creating a node if nothing lies within `eps`.
    pub fn insert(&mut self, p: Vec3) -> usize {
        let (cx, cy, cz) = self.cell(p);
        let mut best: Option<(f64, usize)> = None;
        for dz in -1..=1 {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if let Some(ids) = self.cells.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &id in ids {
                            let d = self.points[id].distance(p);
                            if d <= self.eps && best.map_or(true, |(bd, bid)| (d, id) < (bd, bid)) {
                                best = Some((d, id));
                            }
                        }
                    }
                }
            }
        }
        if let Some((_, id)) = best {
            return id;
        }
        let id = self.points.len();
        self.points.push(p);
        self.cells.entry((cx, cy, cz)).or_default().push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Welds segment endpoints within `weld_eps` and chains the segments into
/// maximal polylines; points of valence other than 2 end a chain.
pub fn stitch_polylines(segments: &[[LinePoint; 2]], weld_eps: f64) -> Vec<FeaturePolyline> {
    let mut welder = Welder::new(weld_eps);
    let mut nodes: Vec<LinePoint> = Vec::new();
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(segments.len());
    for seg in segments {
        let ids = seg.map(|p| {
            let id = welder.insert(p.position);
            if id == nodes.len() {
                nodes.push(p);
            }
            id
        });
        edges.push(ids);
    }
    chain(&nodes, &edges)
}

/// Chains a node graph into polylines with "kind" and "residual" channels,
/// oriented and ordered lexicographically.
pub(crate) fn chain(nodes: &[LinePoint], edges: &[[usize; 2]]) -> Vec<FeaturePolyline> {
    let mut edges: Vec<[usize; 2]> = edges
        .iter()
        .filter(|e| e[0] != e[1])
        .map(|e| [e[0].min(e[1]), e[0].max(e[1])])
        .collect();
    edges.sort_unstable();
    edges.dedup();

    let n = nodes.len();
    let mut adj: Vec<Vec<(usize, usize)>> = alloc::vec![Vec::new(); n];
    for (ei, e) in edges.iter().enumerate() {
        adj[e[0]].push((e[1], ei));
        adj[e[1]].push((e[0], ei));
    }
    let mut used = alloc::vec![false; edges.len()];
    let mut chains: Vec<(Vec<usize>, bool)> = Vec::new();

    let walk = |start: usize, first_edge: usize, used: &mut Vec<bool>| -> Vec<usize> {
        let mut path = alloc::vec![start];
        let mut cur = start;
        let mut e = first_edge;
        loop {
            used[e] = true;
            let next = if edges[e][0] == cur { edges[e][1] } else { edges[e][0] };
            path.push(next);
            if adj[next].len() != 2 || next == start {
                break;
            }
            match adj[next].iter().find(|(_, ne)| !used[*ne]) {
                Some(&(_, ne)) => {
                    cur = next;
                    e = ne;
                }
                None => break,
            }
        }
        path
    };

    for v in 0..n {
        if adj[v].len() == 2 || adj[v].is_empty() {
            continue;
        }
        for k in 0..adj[v].len() {
            let (_, e) = adj[v][k];
            if !used[e] {
                chains.push((walk(v, e, &mut used), false));
            }
        }
    }
    for v in 0..n {
        for k in 0..adj[v].len() {
            let (_, e) = adj[v][k];
            if !used[e] {
                let path = walk(v, e, &mut used);
                let closed = path.len() > 2 && path.first() == path.last();
                chains.push((path, closed));
            }
        }
    }

    let mut lines: Vec<FeaturePolyline> = chains
        .into_iter()
        .map(|(path, closed)| {
            let path = orient(path, closed, nodes);
            let mut line = FeaturePolyline::new(path.iter().map(|&i| nodes[i].position).collect(), closed);
            line.set_channel("kind", path.iter().map(|&i| nodes[i].kind.sign()).collect());
            line.set_channel("residual", path.iter().map(|&i| nodes[i].residual).collect());
            compute_tangents(line)
        })
        .collect();
    lines.sort_by(|a, b| {
        a.points
            .iter()
            .zip(b.points.iter())
            .map(|(p, q)| p.lex_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(a.points.len().cmp(&b.points.len()))
    });
    lines
}

fn orient(mut path: Vec<usize>, closed: bool, nodes: &[LinePoint]) -> Vec<usize> {
    let pos = |i: usize| nodes[i].position;
    if !closed {
        if pos(path[path.len() - 1]).lex_cmp(&pos(path[0])).is_lt() {
            path.reverse();
        }
        return path;
    }
    // start the cycle at its lexicographically smallest point and head
    // towards the smaller of the two neighbours
    path.pop();
    let m = path.len();
    let start = (0..m)
        .min_by(|&a, &b| pos(path[a]).lex_cmp(&pos(path[b])))
        .unwrap_or(0);
    path.rotate_left(start);
    if m > 2 && pos(path[m - 1]).lex_cmp(&pos(path[1])).is_lt() {
        path[1..].reverse();
    }
    path.push(path[0]);
    path
}
