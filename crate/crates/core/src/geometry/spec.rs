use serde::{Deserialize, Serialize};

/// Region document as read from disk.
///
/// ```json
/// {"type": "polygon", "vertices": [[1,0],[0,1],[-1,0],[0,-1]]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegionSpec {
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    CircularPolygon {
        sides: Vec<SideSpec>,
    },
    Smooth {
        points: Vec<[f64; 2]>,
    },
    Annulus {
        outer: Box<RegionSpec>,
        inner: Box<RegionSpec>,
    },
    DisjointPair {
        left: Box<RegionSpec>,
        right: Box<RegionSpec>,
    },
}

/// Side of a circular polygon: starts at `start` and ends at the next side's start.
///
/// A missing or zero radius gives a straight segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideSpec {
    pub start: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

/// Top-level document: a shape plus an optional mapping target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDocument {
    #[serde(flatten)]
    pub shape: RegionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl RegionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            RegionSpec::Polygon { .. } => "polygon",
            RegionSpec::CircularPolygon { .. } => "circular_polygon",
            RegionSpec::Smooth { .. } => "smooth",
            RegionSpec::Annulus { .. } => "annulus",
            RegionSpec::DisjointPair { .. } => "disjoint_pair",
        }
    }
}
