//! Point features and the scene that groups them.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::Vec2;
use crate::{Error, Result};

/// Named point landmark in the world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Feature {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Self { id: id.into(), x, y }
    }

    pub fn pos(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Half-plane `{ p : (p - point) . normal >= 0 }`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    pub normal: Vec2,
}

impl HalfPlane {
    pub fn signed_distance(&self, p: Vec2) -> f64 {
        (p - self.point).dot(self.normal)
    }
}

/// Features plus the obstacle annotations used by the protocols and the
/// track classifier.
///
/// The woods lie to the left of the woods-edge polyline as declared.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub id: String,
    pub features: Vec<Feature>,
    pub vine: Option<String>,
    pub pole: Option<String>,
    pub woods_edge: Vec<String>,
    pub bounds: Bounds,
    /// Terminal region for protocols; defaults to leaving through the right edge of `bounds`.
    pub exit: Option<HalfPlane>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.features.iter().enumerate() {
            if !(f.x.is_finite() && f.y.is_finite()) {
                return Err(Error::InvalidScene(format!("feature `{}` has non-finite coordinates", f.id)));
            }
            if self.features[..i].iter().any(|g| g.id == f.id) {
                return Err(Error::InvalidScene(format!("duplicate feature id `{}`", f.id)));
            }
        }
        for r in self.vine.iter().chain(self.pole.iter()) {
            self.index_of(r).ok_or_else(|| Error::UnknownFeature(r.clone()))?;
        }
        if self.woods_edge.len() < 2 {
            return Err(Error::InvalidScene("woods edge needs at least two features".into()));
        }
        for r in &self.woods_edge {
            self.index_of(r).ok_or_else(|| Error::UnknownFeature(r.clone()))?;
        }
        let b = &self.bounds;
        if !(b.x_min < b.x_max && b.y_min < b.y_max) {
            return Err(Error::InvalidScene("bounds must have positive extent".into()));
        }
        if let Some(h) = &self.exit {
            if !(h.point.is_finite() && h.normal.is_finite()) || h.normal.norm() == 0.0 {
                return Err(Error::InvalidScene("exit half-plane needs a finite nonzero normal".into()));
            }
        }
        Ok(())
    }

    /// Index of a feature by id. The labels `vine` and `pole` fall back to the
    /// scene's annotations when no feature carries that id.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.features.iter().position(|f| f.id == name) {
            return Some(i);
        }
        let alias = match name {
            "vine" => self.vine.as_deref(),
            "pole" => self.pole.as_deref(),
            _ => None,
        }?;
        self.features.iter().position(|f| f.id == alias)
    }

    pub fn feature(&self, name: &str) -> Option<&Feature> {
        self.index_of(name).map(|i| &self.features[i])
    }

    pub fn vine_feature(&self) -> Option<&Feature> {
        self.vine.as_deref().and_then(|v| self.feature(v))
    }

    pub fn woods_edge_points(&self) -> Vec<Vec2> {
        self.woods_edge.iter().filter_map(|r| self.feature(r)).map(Feature::pos).collect()
    }

    pub fn exit_region(&self) -> HalfPlane {
        self.exit.unwrap_or(HalfPlane { point: Vec2::new(self.bounds.x_max, 0.0), normal: Vec2::new(1.0, 0.0) })
    }

    /// Direction of travel along the woods edge, first feature to last.
    pub fn travel_direction(&self) -> Option<Vec2> {
        let pts = self.woods_edge_points();
        let (first, last) = (pts.first()?, pts.last()?);
        (*last - *first).normalized()
    }
}
