//! Small planar geometry helpers used throughout the crate.

use serde::{Deserialize, Serialize};

/// A point or vector in the plane. Components are named after the
/// coordinates `x1` (tangential) and `x2` (normal to the boundary).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        Vec2 { x1, x2 }
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2
    }

    /// Rotate by a quarter turn: (x1, x2) -> (x2, -x1).
    pub fn perp(self) -> Vec2 {
        Vec2::new(self.x2, -self.x1)
    }

    /// Mirror across the horizontal axis: (x1, x2) -> (x1, -x2).
    pub fn bar(self) -> Vec2 {
        Vec2::new(self.x1, -self.x2)
    }

    /// Mirror across the vertical axis: (x1, x2) -> (-x1, x2).
    pub fn tilde(self) -> Vec2 {
        Vec2::new(-self.x1, self.x2)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x1 * s, self.x2 * s)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x1, -self.x2)
    }
}

/// Axis-aligned rectangle, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Rect {
    pub fn new(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Self {
        Rect {
            lo: Vec2::new(lo1, lo2),
            hi: Vec2::new(hi1, hi2),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi.x1 - self.lo.x1
    }

    pub fn height(&self) -> f64 {
        self.hi.x2 - self.lo.x2
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.hi.x1 <= self.lo.x1 || self.hi.x2 <= self.lo.x2
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x1 >= self.lo.x1 && p.x1 <= self.hi.x1 && p.x2 >= self.lo.x2 && p.x2 <= self.hi.x2
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.lo.x1 + self.hi.x1), 0.5 * (self.lo.x2 + self.hi.x2))
    }

    pub fn intersect(&self, o: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.lo.x1.max(o.lo.x1),
            self.hi.x1.min(o.hi.x1),
            self.lo.x2.max(o.lo.x2),
            self.hi.x2.min(o.hi.x2),
        );
        if r.is_empty() {
            None
        } else {
            Some(r)
        }
    }

    /// Distance from a point to this rectangle in the sup norm.
    pub fn dist_inf(&self, p: Vec2) -> f64 {
        let d1 = (self.lo.x1 - p.x1).max(0.0).max(p.x1 - self.hi.x1);
        let d2 = (self.lo.x2 - p.x2).max(0.0).max(p.x2 - self.hi.x2);
        d1.max(d2)
    }

    /// Remove `cut` from `self`, returning up to four rectangles that tile
    /// the difference.
    pub fn subtract(&self, cut: &Rect) -> Vec<Rect> {
        let Some(ov) = self.intersect(cut) else {
            return vec![*self];
        };
        let mut out = Vec::with_capacity(4);
        // Left and right strips run the full height of `self`.
        if ov.lo.x1 > self.lo.x1 {
            out.push(Rect::new(self.lo.x1, ov.lo.x1, self.lo.x2, self.hi.x2));
        }
        if ov.hi.x1 < self.hi.x1 {
            out.push(Rect::new(ov.hi.x1, self.hi.x1, self.lo.x2, self.hi.x2));
        }
        // Bottom and top strips cover the remaining middle band.
        if ov.lo.x2 > self.lo.x2 {
            out.push(Rect::new(ov.lo.x1, ov.hi.x1, self.lo.x2, ov.lo.x2));
        }
        if ov.hi.x2 < self.hi.x2 {
            out.push(Rect::new(ov.lo.x1, ov.hi.x1, ov.hi.x2, self.hi.x2));
        }
        out.retain(|r| !r.is_empty());
        out
    }
}
