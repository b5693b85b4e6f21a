//! Uncertainty-aware degenerate-tensor features for ensembles of symmetric
//! second-order 3D tensor fields on tetrahedral meshes.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! spread the per-vertex, per-face and per-tet loops over a rayon pool; the
//! results are identical with or without it.
//!
//! Layout:
//!
//! * [`tensor`] symmetric 3x3 algebra (eigen-decomposition, deviator, mode,
//!   discriminant).
//! * [`mesh`] and [`locate`] the tetrahedral mesh model, barycentric
//!   interpolation and point location.
//! * [`synthetic`] linear test fields and the translated/rotated and
//!   component-noise ensembles built from them.
//! * [`stats`] per-vertex ensemble statistics and the degeneracy
//!   probability field.
//! * [`extract`] degenerate line extraction on a single field.
//! * [`features`] meanLine, modeTube and probabilityBand construction.

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

mod par;

pub mod extract;
pub mod features;
pub mod geometry;
pub mod locate;
pub mod mesh;
pub mod special;
pub mod stats;
pub mod synthetic;
pub mod tensor;
pub mod vec3;

pub use extract::{extract_degenerate_lines, DegenerateLineSet, ExtractionParams, ExtractionReport};
pub use features::{
    build_mode_tube, enhance_mean_line, marching_tetrahedra, mean_line, probability_band,
    probability_band_from_stats, ModeTubeParams, Normalization, ProbabilityBandParams,
};
pub use geometry::{Channel, FeaturePolyline, TriangleSurface};
pub use locate::{locate_point, Location, PointLocator};
pub use mesh::{interpolate_tensor, MeshError, ScalarField, TensorField, TetMesh};
pub use stats::{
    mean_tensor_field, mode_of_mean_field, mode_stats, probability_field, Ensemble,
    EnsembleAccumulator, ModeStats, StatsError,
};
pub use tensor::{EigenSystem, Mode, SymTensor3};
pub use vec3::Vec3;
