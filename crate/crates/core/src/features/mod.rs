//! The ensemble features: meanLine, modeTube and probabilityBand.

use alloc::vec::Vec;

use crate::extract::{extract_degenerate_lines_with, DegenerateLineSet, ExtractionParams};
use crate::geometry::{FeaturePolyline, TriangleSurface};
use crate::locate::PointLocator;
use crate::stats::{mean_tensor_field, mode_stats, probability_field, Ensemble, ModeStats, StatsError};

mod marching;
mod tube;

pub use marching::marching_tetrahedra;
pub use tube::{build_mode_tube, rotation_minimizing_frames, Frame};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FeatureError {
    #[error("invalid parameter: {0}")]
    InvalidParams(&'static str),
    #[error("polyline has no tangents")]
    MissingTangents,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide by the largest |d_c| over every tube.
    #[default]
    Global,
    /// Divide by the largest |d_c| within each ring.
    PerPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTubeParams {
    /// Sampling radius.
    pub r0: f64,
    /// Display radius.
    pub rs: f64,
    pub samples_per_ring: usize,
    pub normalization: Normalization,
}

impl Default for ModeTubeParams {
    fn default() -> Self {
        Self {
            r0: 0.01,
            rs: 0.01,
            samples_per_ring: 32,
            normalization: Normalization::Global,
        }
    }
}

impl ModeTubeParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.r0 > 0.0 && self.r0.is_finite()) {
            return Err(FeatureError::InvalidParams("r0 must be positive"));
        }
        if !(self.rs > 0.0 && self.rs.is_finite()) {
            return Err(FeatureError::InvalidParams("rs must be positive"));
        }
        if self.samples_per_ring < 3 {
            return Err(FeatureError::InvalidParams("samples per ring must be at least 3"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityBandParams {
    /// Mode threshold in (0, 1].
    pub t: f64,
    /// Iso-probability in (0, 1).
    pub c: f64,
}

impl ProbabilityBandParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if !(self.t > 0.0 && self.t <= 1.0) {
            return Err(FeatureError::InvalidParams("t must lie in (0, 1]"));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(FeatureError::InvalidParams("c must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Degenerate lines of the component-wise mean field.
pub fn mean_line(ens: &Ensemble) -> DegenerateLineSet {
    mean_line_with(ens, &ExtractionParams::default())
}

pub fn mean_line_with(ens: &Ensemble, params: &ExtractionParams) -> DegenerateLineSet {
    extract_degenerate_lines_with(&mean_tensor_field(ens), params)
}

/// Adds "mode_std" and "mean_mode" channels sampled at the line points;
/// points off the mesh get NaN.
pub fn enhance_mean_line(line: &FeaturePolyline, stats: &ModeStats) -> FeaturePolyline {
    let locator = PointLocator::new(stats.mesh());
    enhance_with(line, stats, &locator)
}

pub(crate) fn enhance_with(line: &FeaturePolyline, stats: &ModeStats, locator: &PointLocator) -> FeaturePolyline {
    let mut out = line.clone();
    let std: Vec<f64> = line
        .points
        .iter()
        .map(|p| locator.sample(&stats.mode_std, *p).unwrap_or(f64::NAN))
        .collect();
    let mean: Vec<f64> = line
        .points
        .iter()
        .map(|p| locator.sample(&stats.mean_mode, *p).unwrap_or(f64::NAN))
        .collect();
    out.set_channel("mode_std", std);
    out.set_channel("mean_mode", mean);
    out
}

/// Enhances every line with one shared point locator.
pub fn enhance_mean_lines(lines: &[FeaturePolyline], stats: &ModeStats) -> Vec<FeaturePolyline> {
    let locator = PointLocator::new(stats.mesh());
    lines.iter().map(|l| enhance_with(l, stats, &locator)).collect()
}

/// Isosurface at `c` of the probability that the mode is at least `t`.
pub fn probability_band(ens: &Ensemble, params: &ProbabilityBandParams) -> Result<TriangleSurface, FeatureError> {
    params.validate()?;
    probability_band_from_stats(&mode_stats(ens), params)
}

pub fn probability_band_from_stats(
    stats: &ModeStats,
    params: &ProbabilityBandParams,
) -> Result<TriangleSurface, FeatureError> {
    params.validate()?;
    let f = probability_field(stats, params.t)?;
    let mut s = marching_tetrahedra(&f, params.c);
    let n = s.points.len();
    s.set_channel("probability", alloc::vec![params.c; n]);
    Ok(s)
}
