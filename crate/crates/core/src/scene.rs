//! Vector ground truth: building polygons in pixel coordinates.

use crate::error::{Error, Result};
use crate::geom::{self, Vec2};
use serde::{Deserialize, Serialize};

/// A polygon with holes. Rings are stored closed (first vertex repeated last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub outer: Vec<Vec2>,
    pub holes: Vec<Vec<Vec2>>,
}

impl Building {
    /// Builds a polygon, closing rings and fixing their orientation
    /// (outer positive, holes negative).
    pub fn new(outer: Vec<Vec2>, holes: Vec<Vec<Vec2>>) -> Self {
        let mut outer = geom::close_ring(&outer);
        if geom::signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        let holes = holes
            .into_iter()
            .map(|h| {
                let mut h = geom::close_ring(&h);
                if geom::signed_area(&h) > 0.0 {
                    h.reverse();
                }
                h
            })
            .collect();
        Building { outer, holes }
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Vec2>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn area(&self) -> f64 {
        self.rings().map(|r| geom::signed_area(r)).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (k, ring) in self.rings().enumerate() {
            if ring.len() < 4 || ring[0] != ring[ring.len() - 1] {
                return Err(Error::InvalidInput(format!("ring {k} is not closed")));
            }
            if ring.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidInput(format!("ring {k} has non-finite vertices")));
            }
            if geom::ring_self_intersects(ring) {
                return Err(Error::InvalidInput(format!("ring {k} self-intersects")));
            }
            let area = geom::signed_area(ring);
            if (k == 0 && area <= 0.0) || (k > 0 && area >= 0.0) {
                return Err(Error::InvalidInput(format!("ring {k} has wrong orientation")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub height: usize,
    pub width: usize,
    pub buildings: Vec<Building>,
}

impl Scene {
    pub fn new(height: usize, width: usize) -> Self {
        Scene {
            height,
            width,
            buildings: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, b) in self.buildings.iter().enumerate() {
            b.validate()
                .map_err(|e| Error::InvalidInput(format!("building {i}: {e}")))?;
        }
        Ok(())
    }

    /// All ring segments of all buildings, in storage order.
    pub fn segments(&self) -> Vec<(Vec2, Vec2)> {
        self.buildings
            .iter()
            .flat_map(|b| b.rings())
            .flat_map(|r| r.windows(2).map(|w| (w[0], w[1])))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_fixes_orientation() {
        let cw = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 4.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(4.0, 0.0),
        ];
        let hole = vec![
            Vec2::new(1.0, 1.0),
            Vec2::new(2.0, 1.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(1.0, 2.0),
        ];
        let b = Building::new(cw, vec![hole]);
        assert!(b.validate().is_ok());
        assert_eq!(b.area(), 15.0);
    }

    #[test]
    fn open_ring_rejected() {
        let b = Building {
            outer: vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)],
            holes: vec![],
        };
        assert!(b.validate().is_err());
    }
}
