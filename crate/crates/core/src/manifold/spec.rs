use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::point::Point;

/// One manifold type. Ambient dimensions: `Euclidean(n) → n`,
/// `Sphere(d) → d + 1`, `PreShape(k, m) → k·m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Euclidean { dim: usize },
    Sphere { dim: usize },
    /// `k` landmarks in ℝᵐ, stored row-major as a `k × m` matrix.
    PreShape { landmarks: usize, dim: usize },
}

impl FactorKind {
    pub fn ambient_dim(&self) -> usize {
        match *self {
            FactorKind::Euclidean { dim } => dim,
            FactorKind::Sphere { dim } => dim + 1,
            FactorKind::PreShape { landmarks, dim } => landmarks * dim,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FactorKind::Euclidean { dim } if dim < 1 => {
                Err(Error::InvalidFactor("euclidean dim must be >= 1".into()))
            }
            FactorKind::Sphere { dim } if dim < 1 => {
                Err(Error::InvalidFactor("sphere dim must be >= 1".into()))
            }
            FactorKind::PreShape { landmarks, dim } if landmarks < 2 || dim < 1 => Err(
                Error::InvalidFactor("preshape needs landmarks >= 2 and dim >= 1".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorSpec {
    pub kind: FactorKind,
    pub multiplicity: usize,
}

impl FactorSpec {
    pub fn euclidean(dim: usize) -> Self {
        FactorSpec { kind: FactorKind::Euclidean { dim }, multiplicity: 1 }
    }

    pub fn sphere(dim: usize) -> Self {
        FactorSpec { kind: FactorKind::Sphere { dim }, multiplicity: 1 }
    }

    pub fn preshape(landmarks: usize, dim: usize) -> Self {
        FactorSpec { kind: FactorKind::PreShape { landmarks, dim }, multiplicity: 1 }
    }

    pub fn times(mut self, multiplicity: usize) -> Self {
        self.multiplicity = multiplicity;
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.kind.ambient_dim() * self.multiplicity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Euclidean,
    Sphere,
    PreShape { landmarks: usize, dim: usize },
}

/// One copy of one factor inside the flat coordinate vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub offset: usize,
    pub len: usize,
    pub factor: usize,
    pub copy: usize,
}

impl Segment {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// A product manifold with a fixed flat layout.
///
/// Factors are laid out in order; a factor with multiplicity `r` occupies
/// `r` consecutive copies of its ambient block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifoldSpec {
    factors: Vec<FactorSpec>,
    layout: Vec<(usize, usize)>,
    segments: Vec<Segment>,
    total_ambient_dim: usize,
}

impl ManifoldSpec {
    pub fn new(factors: Vec<FactorSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidFactor("manifold needs at least one factor".into()));
        }
        let mut layout = Vec::with_capacity(factors.len());
        let mut segments = Vec::new();
        let mut offset = 0;
        for (fi, f) in factors.iter().enumerate() {
            f.kind.validate()?;
            if f.multiplicity < 1 {
                return Err(Error::InvalidFactor("multiplicity must be >= 1".into()));
            }
            let start = offset;
            let len = f.kind.ambient_dim();
            let kind = match f.kind {
                FactorKind::Euclidean { .. } => SegmentKind::Euclidean,
                FactorKind::Sphere { .. } => SegmentKind::Sphere,
                FactorKind::PreShape { landmarks, dim } => SegmentKind::PreShape { landmarks, dim },
            };
            for copy in 0..f.multiplicity {
                segments.push(Segment { kind, offset, len, factor: fi, copy });
                offset += len;
            }
            layout.push((start, offset - start));
        }
        Ok(ManifoldSpec { factors, layout, segments, total_ambient_dim: offset })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(vec![FactorSpec::euclidean(dim)])
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        Self::new(vec![FactorSpec::sphere(dim)])
    }

    pub fn preshape(landmarks: usize, dim: usize) -> Result<Self> {
        Self::new(vec![FactorSpec::preshape(landmarks, dim)])
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    /// Per-factor `(offset, length)` into the flat coordinate vector.
    pub fn layout(&self) -> &[(usize, usize)] {
        &self.layout
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_ambient_dim(&self) -> usize {
        self.total_ambient_dim
    }

    pub fn is_euclidean(&self) -> bool {
        self.segments.iter().all(|s| s.kind == SegmentKind::Euclidean)
    }

    /// A fixed valid point: zeros on Euclidean segments, the first basis
    /// vector on spheres, and on pre-shapes landmark 0 at `+e₀` and
    /// landmark 1 at `−e₀` (scaled to unit norm) with the rest at the origin.
    pub fn base_point(&self) -> Point {
        let mut x = vec![0.0; self.total_ambient_dim];
        for seg in &self.segments {
            match seg.kind {
                SegmentKind::Euclidean => {}
                SegmentKind::Sphere => x[seg.offset] = 1.0,
                SegmentKind::PreShape { dim, .. } => {
                    x[seg.offset] = std::f64::consts::FRAC_1_SQRT_2;
                    x[seg.offset + dim] = -std::f64::consts::FRAC_1_SQRT_2;
                }
            }
        }
        Point(x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("manifold spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactor {
    kind: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    landmarks: Option<usize>,
    #[serde(default = "one")]
    multiplicity: usize,
}

fn one() -> usize {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    factors: Vec<RawFactor>,
}

impl Serialize for ManifoldSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let factors = self
            .factors
            .iter()
            .map(|f| {
                let (kind, dim, landmarks) = match f.kind {
                    FactorKind::Euclidean { dim } => ("euclidean", dim, None),
                    FactorKind::Sphere { dim } => ("sphere", dim, None),
                    FactorKind::PreShape { landmarks, dim } => ("preshape", dim, Some(landmarks)),
                };
                RawFactor { kind: kind.to_string(), dim, landmarks, multiplicity: f.multiplicity }
            })
            .collect();
        RawSpec { factors }.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ManifoldSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawSpec::deserialize(de)?;
        let mut factors = Vec::with_capacity(raw.factors.len());
        for f in raw.factors {
            let kind = match (f.kind.as_str(), f.landmarks) {
                ("euclidean", None) => FactorKind::Euclidean { dim: f.dim },
                ("sphere", None) => FactorKind::Sphere { dim: f.dim },
                ("preshape", Some(landmarks)) => FactorKind::PreShape { landmarks, dim: f.dim },
                ("preshape", None) => return Err(D::Error::missing_field("landmarks")),
                ("euclidean" | "sphere", Some(_)) => {
                    return Err(D::Error::custom(format!("`landmarks` is not valid for kind `{}`", f.kind)))
                }
                (other, _) => {
                    return Err(D::Error::unknown_variant(other, &["euclidean", "sphere", "preshape"]))
                }
            };
            factors.push(FactorSpec { kind, multiplicity: f.multiplicity });
        }
        ManifoldSpec::new(factors).map_err(D::Error::custom)
    }
}
