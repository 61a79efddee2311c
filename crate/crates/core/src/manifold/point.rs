use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

/// A point in ambient coordinates. Which manifold it belongs to is carried
/// by the [`ManifoldSpec`](super::ManifoldSpec) the caller pairs it with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

/// A tangent vector in ambient coordinates. The base point is always passed
/// alongside it to operations that need one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tangent(pub Vec<f64>);

macro_rules! coord_newtype {
    ($t:ident) => {
        impl $t {
            pub fn zeros(dim: usize) -> Self {
                $t(vec![0.0; dim])
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }
        }

        impl Deref for $t {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $t {
            fn from(v: Vec<f64>) -> Self {
                $t(v)
            }
        }
    };
}

coord_newtype!(Point);
coord_newtype!(Tangent);

impl Tangent {
    pub fn scaled(&self, s: f64) -> Tangent {
        Tangent(self.0.iter().map(|v| v * s).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
