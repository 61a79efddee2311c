//! Skeletal motion and its embedding into product manifolds.
//!
//! Conventions: y-up right-handed frame, quaternions ordered `(w, x, y, z)`,
//! joint 0 is the root and rotation 0 is the global orientation.

mod frame;
mod kinematics;
mod quaternion;
mod repr;
mod skeleton;

pub use frame::{LoadReport, MotionFrame, MotionSequence};
pub use kinematics::{compute_preshape, convert_to_position_format, forward_kinematics, PositionFrame};
pub use quaternion::Quat;
pub use repr::{
    ambient_dimension, config_to_manifold, frame_to_point, point_to_frame, point_to_positions,
    temporal_difference, temporal_difference_frames, QuatDrift, RecoveredFrame, RepresentationConfig,
};
pub use skeleton::Skeleton;

/// Ambient dimensions of the prior motion formats compared in the
/// representation survey, as functions of the joint count `J`.
pub mod format_dims {
    /// HumanML3D feature vector: `12J − 1`.
    pub fn humanml3d(j: usize) -> usize {
        12 * j - 1
    }
    /// MotionStreamer: `12J + 8`.
    pub fn motion_streamer(j: usize) -> usize {
        12 * j + 8
    }
    /// DART: `12J + 12`.
    pub fn dart(j: usize) -> usize {
        12 * j + 12
    }
    /// HY-Motion: `9J + 3`.
    pub fn hy_motion(j: usize) -> usize {
        9 * j + 3
    }
    /// Translation plus one quaternion per joint: `4J + 3`.
    pub fn translation_rotation(j: usize) -> usize {
        4 * j + 3
    }
}
