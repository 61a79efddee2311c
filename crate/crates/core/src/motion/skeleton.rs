use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SMPL22_JSON: &str = include_str!("../../fixtures/smpl22_skeleton.json");

/// Joint tree with rest-pose bone offsets (meters). Joint 0 is the root;
/// every other joint's parent has a smaller index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSkeleton", into = "RawSkeleton")]
pub struct Skeleton {
    parents: Vec<Option<usize>>,
    rest_offsets: Vec<[f64; 3]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSkeleton {
    parents: Vec<i64>,
    rest_offsets: Vec<[f64; 3]>,
}

impl TryFrom<RawSkeleton> for Skeleton {
    type Error = Error;

    fn try_from(raw: RawSkeleton) -> Result<Self> {
        let parents = raw
            .parents
            .iter()
            .map(|&p| if p < 0 { None } else { Some(p as usize) })
            .collect();
        Skeleton::new(parents, raw.rest_offsets)
    }
}

impl From<Skeleton> for RawSkeleton {
    fn from(s: Skeleton) -> Self {
        RawSkeleton {
            parents: s.parents.iter().map(|p| p.map_or(-1, |i| i as i64)).collect(),
            rest_offsets: s.rest_offsets,
        }
    }
}

impl Skeleton {
    pub fn new(parents: Vec<Option<usize>>, rest_offsets: Vec<[f64; 3]>) -> Result<Self> {
        if parents.is_empty() {
            return Err(Error::InvalidSkeleton("no joints".into()));
        }
        if parents.len() != rest_offsets.len() {
            return Err(Error::InvalidSkeleton(format!(
                "{} parents but {} rest offsets",
                parents.len(),
                rest_offsets.len()
            )));
        }
        if parents[0].is_some() {
            return Err(Error::InvalidSkeleton("joint 0 must be the root".into()));
        }
        if rest_offsets[0] != [0.0; 3] {
            return Err(Error::InvalidSkeleton("root rest offset must be zero".into()));
        }
        for (j, p) in parents.iter().enumerate().skip(1) {
            match p {
                None => return Err(Error::InvalidSkeleton(format!("joint {j} is a second root"))),
                Some(p) if *p >= j => {
                    return Err(Error::InvalidSkeleton(format!("joint {j} has parent {p}; parents must precede children")))
                }
                _ => {}
            }
        }
        if rest_offsets.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSkeleton("non-finite rest offset".into()));
        }
        Ok(Skeleton { parents, rest_offsets })
    }

    /// 22-joint SMPL-style body in a T-pose.
    pub fn smpl22() -> Self {
        serde_json::from_str(SMPL22_JSON).expect("bundled skeleton fixture is valid")
    }

    /// A straight chain of `joints` bones, each `bone` long along +x.
    pub fn chain(joints: usize, bone: f64) -> Self {
        let parents = (0..joints).map(|j| j.checked_sub(1)).collect();
        let offsets = (0..joints).map(|j| if j == 0 { [0.0; 3] } else { [bone, 0.0, 0.0] }).collect();
        Skeleton::new(parents, offsets).expect("chain skeleton is valid")
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn rest_offset(&self, joint: usize) -> [f64; 3] {
        self.rest_offsets[joint]
    }

    pub fn rest_offsets(&self) -> &[[f64; 3]] {
        &self.rest_offsets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_loads() {
        let s = Skeleton::smpl22();
        assert_eq!(s.joint_count(), 22);
        assert_eq!(s.parent(0), None);
        assert_eq!(s.parent(21), Some(19));
    }

    #[test]
    fn json_uses_minus_one_for_root() {
        let s = Skeleton::chain(3, 0.5);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains(r#""parents":[-1,0,1]"#), "{text}");
        let back: Skeleton = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_malformed_trees() {
        assert!(Skeleton::new(vec![None, Some(1)], vec![[0.0; 3], [1.0, 0.0, 0.0]]).is_err());
        assert!(Skeleton::new(vec![None, None], vec![[0.0; 3]; 2]).is_err());
        assert!(Skeleton::new(vec![Some(0)], vec![[0.0; 3]]).is_err());
        assert!(Skeleton::new(vec![None], vec![[1.0, 0.0, 0.0]]).is_err());
        assert!(Skeleton::new(vec![None, Some(0)], vec![[0.0; 3]]).is_err());
    }
}
