//! Output geometry: attributed polylines and triangle surfaces.

use alloc::string::String;
use alloc::vec::Vec;

use crate::vec3::Vec3;

/// A named per-point scalar channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

impl Channel {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

fn find_channel<'a>(channels: &'a [Channel], name: &str) -> Option<&'a Channel> {
    channels.iter().find(|c| c.name == name)
}

fn set_channel(channels: &mut Vec<Channel>, name: &str, values: Vec<f64>) {
    match channels.iter_mut().find(|c| c.name == name) {
        Some(c) => c.values = values,
        None => channels.push(Channel::new(name, values)),
    }
}

/// Ordered line points with tangents and named channels.
///
/// A closed polyline repeats its first point at the end.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeaturePolyline {
    pub points: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
    pub channels: Vec<Channel>,
    pub closed: bool,
}

impl FeaturePolyline {
    pub fn new(points: Vec<Vec3>, closed: bool) -> Self {
        Self {
            points,
            tangents: Vec::new(),
            channels: Vec::new(),
            closed,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        find_channel(&self.channels, name).map(|c| c.values.as_slice())
    }

    /// Inserts or replaces a channel. Panics if the length mismatches.
    pub fn set_channel(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.points.len(), "channel `{name}` length");
        set_channel(&mut self.channels, name, values);
    }

    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}

/// Indexed triangle mesh with optional per-point channels.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleSurface {
    pub points: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
    pub channels: Vec<Channel>,
}

impl TriangleSurface {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        find_channel(&self.channels, name).map(|c| c.values.as_slice())
    }

    pub fn set_channel(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.points.len(), "channel `{name}` length");
        set_channel(&mut self.channels, name, values);
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.points[i]);
        0.5 * (b - a).cross(c - a).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// True if every undirected edge is used by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(self.triangles.len() * 3);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                edges.push((a.min(b), a.max(b)));
            }
        }
        edges.sort_unstable();
        let mut i = 0;
        while i < edges.len() {
            let mut j = i;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i != 2 {
                return false;
            }
            i = j;
        }
        !self.triangles.is_empty()
    }

    /// Appends another surface, concatenating channels present in both.
    pub fn append(&mut self, other: &TriangleSurface) {
        let base = self.points.len();
        let names: Vec<String> = self
            .channels
            .iter()
            .map(|c| c.name.clone())
            .chain(other.channels.iter().map(|c| c.name.clone()))
            .collect();
        let mut merged: Vec<Channel> = Vec::new();
        for name in names {
            if merged.iter().any(|c| c.name == name) {
                continue;
            }
            let mut values = match find_channel(&self.channels, &name) {
                Some(c) => c.values.clone(),
                None => alloc::vec![f64::NAN; base],
            };
            match find_channel(&other.channels, &name) {
                Some(c) => values.extend_from_slice(&c.values),
                None => values.extend(core::iter::repeat(f64::NAN).take(other.points.len())),
            }
            merged.push(Channel::new(name, values));
        }
        self.points.extend_from_slice(&other.points);
        self.triangles
            .extend(other.triangles.iter().map(|t| t.map(|i| i + base)));
        self.channels = merged;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tetra_surface() -> TriangleSurface {
        TriangleSurface {
            points: vec![Vec3::ZERO, Vec3::X, Vec3::Y, Vec3::Z],
            triangles: vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]],
            channels: vec![Channel::new("a", vec![1.0; 4])],
        }
    }

    #[test]
    fn watertight_detection() {
        let s = tetra_surface();
        assert!(s.is_watertight());
        let mut open = s.clone();
        open.triangles.pop();
        assert!(!open.is_watertight());
    }

    #[test]
    fn append_merges_channels() {
        let mut a = tetra_surface();
        let b = TriangleSurface {
            channels: vec![Channel::new("b", vec![2.0; 4])],
            ..tetra_surface()
        };
        a.append(&b);
        assert_eq!(a.points.len(), 8);
        assert_eq!(a.triangles[4], [4, 6, 5]);
        assert_eq!(a.channel("a").unwrap().len(), 8);
        assert!(a.channel("a").unwrap()[5].is_nan());
        assert_eq!(a.channel("b").unwrap()[6], 2.0);
    }

    #[test]
    fn polyline_channels() {
        let mut l = FeaturePolyline::new(vec![Vec3::ZERO, Vec3::X, Vec3::new(2.0, 0.0, 0.0)], false);
        l.set_channel("mode_std", vec![0.0, 0.1, 0.2]);
        l.set_channel("mode_std", vec![0.3, 0.1, 0.2]);
        assert_eq!(l.channels.len(), 1);
        assert_eq!(l.channel("mode_std").unwrap()[0], 0.3);
        assert_eq!(l.arc_length(), 2.0);
    }
}
