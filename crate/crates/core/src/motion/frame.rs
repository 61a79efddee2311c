use serde::{Deserialize, Serialize};

use super::quaternion::Quat;
use super::skeleton::Skeleton;
use crate::error::{Error, Result};
use crate::tolerances::{LOAD_QUAT_TOL, POINT_TOL};

/// Skeletal state at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionFrame {
    pub root_translation: [f64; 3],
    /// Index 0 is the global orientation, the rest are local joint rotations.
    pub rotations: Vec<Quat>,
}

impl MotionFrame {
    /// Zero translation and identity rotations.
    pub fn rest(joints: usize) -> Self {
        MotionFrame { root_translation: [0.0; 3], rotations: vec![Quat::IDENTITY; joints] }
    }

    /// Checks unit norms (within [`POINT_TOL`]) and hemisphere signs.
    pub fn validate(&self, index: usize, joints: usize) -> Result<()> {
        if self.rotations.len() != joints {
            return Err(Error::InvalidFrame {
                frame: index,
                reason: format!("{} rotations for a {joints}-joint skeleton", self.rotations.len()),
            });
        }
        if self.root_translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFrame { frame: index, reason: "non-finite root translation".into() });
        }
        for (j, q) in self.rotations.iter().enumerate() {
            let dev = (q.norm() - 1.0).abs();
            if dev > POINT_TOL || dev.is_nan() {
                return Err(Error::InvalidFrame {
                    frame: index,
                    reason: format!("joint {j} quaternion norm {} is not unit", q.norm()),
                });
            }
            if !q.is_canonical() {
                return Err(Error::InvalidFrame {
                    frame: index,
                    reason: format!("joint {j} quaternion is not in the upper hemisphere"),
                });
            }
        }
        Ok(())
    }
}

/// Frames sampled at a fixed rate on one skeleton.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSequence {
    pub fps: f64,
    pub skeleton: Skeleton,
    pub frames: Vec<MotionFrame>,
}

/// What the loader had to fix up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub hemisphere_flips: usize,
    pub renormalized: usize,
}

impl MotionSequence {
    pub fn new(fps: f64, skeleton: Skeleton, frames: Vec<MotionFrame>) -> Result<Self> {
        let seq = MotionSequence { fps, skeleton, frames };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::invalid("fps", format!("must be > 0, got {}", self.fps)));
        }
        let j = self.skeleton.joint_count();
        for (i, f) in self.frames.iter().enumerate() {
            f.validate(i, j)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Parses the motion JSON format. Quaternions whose norm is off by more
    /// than [`LOAD_QUAT_TOL`] are rejected (the error names the frame);
    /// smaller drift is renormalized and lower-hemisphere signs are flipped.
    pub fn from_json(text: &str) -> Result<(Self, LoadReport)> {
        let mut seq: MotionSequence = serde_json::from_str(text)?;
        let mut report = LoadReport::default();
        let joints = seq.skeleton.joint_count();
        for (i, f) in seq.frames.iter_mut().enumerate() {
            if f.rotations.len() != joints {
                return Err(Error::InvalidFrame {
                    frame: i,
                    reason: format!("{} rotations for a {joints}-joint skeleton", f.rotations.len()),
                });
            }
            for (j, q) in f.rotations.iter_mut().enumerate() {
                let n = q.norm();
                let dev = (n - 1.0).abs();
                if dev > LOAD_QUAT_TOL || dev.is_nan() {
                    return Err(Error::InvalidFrame {
                        frame: i,
                        reason: format!("joint {j} quaternion norm {n} deviates from 1 by more than {LOAD_QUAT_TOL:e}"),
                    });
                }
                if n != 1.0 {
                    report.renormalized += 1;
                }
                if !q.is_canonical() {
                    report.hemisphere_flips += 1;
                }
                *q = q.canonicalize()?;
            }
        }
        seq.validate()?;
        if report.hemisphere_flips > 0 {
            log::info!("canonicalized {} quaternion hemisphere signs", report.hemisphere_flips);
        }
        Ok((seq, report))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("motion sequence serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(q: &str) -> String {
        format!(
            r#"{{"fps": 30, "skeleton": {{"parents": [-1, 0], "rest_offsets": [[0,0,0],[1,0,0]]}},
               "frames": [{{"root_translation": [0,0,0], "rotations": [[1,0,0,0], [1,0,0,0]]}},
                          {{"root_translation": [0,1,0], "rotations": [[1,0,0,0], {q}]}}]}}"#
        )
    }

    #[test]
    fn loads_and_canonicalizes() {
        let (seq, report) = MotionSequence::from_json(&text("[-1,0,0,0]")).unwrap();
        assert_eq!(report.hemisphere_flips, 1);
        assert_eq!(seq.frames[1].rotations[1], Quat::IDENTITY);
        assert_eq!(seq.len(), 2);
    }

    #[test]
    fn renormalizes_small_drift() {
        let (seq, report) = MotionSequence::from_json(&text("[1.0000001,0,0,0]")).unwrap();
        assert_eq!(report.renormalized, 1);
        assert_eq!(seq.frames[1].rotations[1], Quat::IDENTITY);
    }

    #[test]
    fn rejects_bad_norm_naming_frame() {
        let err = MotionSequence::from_json(&text("[0.5,0,0,0]")).unwrap_err();
        assert!(matches!(err, Error::InvalidFrame { frame: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_fields_and_bad_fps() {
        let t = text("[1,0,0,0]").replacen("\"fps\"", "\"fps_\"", 1);
        assert!(MotionSequence::from_json(&t).is_err());
        let t = text("[1,0,0,0]").replacen("30", "0", 1);
        assert!(MotionSequence::from_json(&t).is_err());
    }

    #[test]
    fn roundtrip_json() {
        let (seq, _) = MotionSequence::from_json(&text("[0,0,1,0]")).unwrap();
        let (back, report) = MotionSequence::from_json(&seq.to_json()).unwrap();
        assert_eq!(back, seq);
        assert_eq!(report, LoadReport::default());
    }
}
