//! Kinematic analysis of analytic planar 3-RPR parallel manipulators.
//!
//! The manipulators covered here have congruent base and platform triangles,
//! with the platform flipped over, so that the forward kinematics reduces to
//! a cubic in `t = tan(φ/2)` followed by a quadratic position solve.

// `!(x < tol)` is used on purpose so that NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atlas;
pub mod cubic;
pub mod cusp;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod motion;
pub mod pose;
pub mod reference;
pub mod singularity;

pub use atlas::{classify_section, count_aspects, AspectReport, SectionGrid, SectionMap};
pub use cubic::{CharacteristicCubic, CubicRoots, RealRoot};
pub use cusp::{find_cusps_in_section, triple_root_residuals, CuspPoint, CuspSearch, SearchBox, SeedGrid};
pub use error::{Error, Result};
pub use geometry::{check_analytic_class, AnalyticGeometry, ClassVerdict, GeometryParams};
pub use kinematics::{
    characteristic_cubic, forward_kinematics_analytic, inverse_kinematics, linear_reduction, orientation_to_positions,
    FkPose, FkSolutionSet, LinearReduction,
};
pub use motion::{make_cusp_loop, track_branch, JointPath, TrackOptions, TransitReport};
pub use pose::{JointVector, OrientationParam, Pose};
pub use reference::forward_kinematics_reference;
pub use singularity::{
    branch_surface, discriminant_surface, jacobian_parallel_det, workspace_singularity_factors, SurfaceValue,
};
