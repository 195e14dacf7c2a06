//! Closed-form Biot–Savart kernels: the free-plane kernel, its half-plane
//! image form, the two quarter-plane kernels obtained from odd symmetry in
//! both coordinates, and a tapered regularization of each.
//!
//! Conventions: `y_perp = (y2, -y1)`, `bar y = (y1, -y2)`,
//! `tilde y = (-y1, y2)`.

use serde::{Deserialize, Serialize};

use crate::error::{GsqgError, Result};
use crate::geom::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    alpha: f64,
    cutoff_radius: f64,
    mollifier_width: f64,
}

impl KernelParams {
    pub fn new(alpha: f64, cutoff_radius: f64, mollifier_width: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(GsqgError::InvalidParameter(format!(
                "kernel exponent alpha must lie in (0, 1/2), got {alpha}"
            )));
        }
        if cutoff_radius < 0.0 || mollifier_width < 0.0 {
            return Err(GsqgError::InvalidParameter(
                "cutoff_radius and mollifier_width must be nonnegative".into(),
            ));
        }
        if mollifier_width > cutoff_radius {
            return Err(GsqgError::InvalidParameter(
                "mollifier_width must not exceed cutoff_radius".into(),
            ));
        }
        Ok(KernelParams {
            alpha,
            cutoff_radius,
            mollifier_width,
        })
    }

    /// Exact singular kernel (no regularization).
    pub fn exact(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cutoff_radius(&self) -> f64 {
        self.cutoff_radius
    }

    pub fn is_exact(&self) -> bool {
        self.cutoff_radius == 0.0
    }

    /// Smooth cutoff profile: 0 inside `cutoff - width`, 1 outside `cutoff`,
    /// a C^2 quintic ramp in between. Identically 1 for the exact kernel.
    pub fn taper(&self, r: f64) -> f64 {
        if self.cutoff_radius == 0.0 || r >= self.cutoff_radius {
            return 1.0;
        }
        let inner = self.cutoff_radius - self.mollifier_width;
        if r <= inner {
            return 0.0;
        }
        let t = (r - inner) / self.mollifier_width;
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }

    /// `y_perp / |y|^{2+2a}`, tapered to zero inside the cutoff ball when
    /// regularized.
    pub fn free_kernel(&self, y: Vec2) -> Result<Vec2> {
        let r = y.norm();
        if self.is_exact() {
            if r == 0.0 {
                return Err(GsqgError::Singularity(
                    "free kernel evaluated at the origin without regularization".into(),
                ));
            }
            return Ok(y.perp().scale(r.powf(-2.0 - 2.0 * self.alpha)));
        }
        let t = self.taper(r);
        if t == 0.0 {
            return Ok(Vec2::ZERO);
        }
        Ok(y.perp().scale(t * r.powf(-2.0 - 2.0 * self.alpha)))
    }

    /// Difference of the free kernel at `x - y` and at the mirror image
    /// `x - bar y`; the image enforces the impermeable boundary, so the
    /// second component vanishes identically on `x2 = 0`.
    pub fn halfplane_kernel(&self, x: Vec2, y: Vec2) -> Result<Vec2> {
        let a = self.free_kernel(x - y)?;
        let b = self.free_kernel(x - y.bar())?;
        Ok(a - b)
    }

    fn term(&self, num: f64, d: Vec2) -> Result<f64> {
        let r = d.norm();
        if r == 0.0 {
            if self.is_exact() {
                return Err(GsqgError::Singularity(
                    "quadrant kernel evaluated at an image point".into(),
                ));
            }
            return Ok(0.0);
        }
        Ok(self.taper(r) * num * r.powf(-2.0 - 2.0 * self.alpha))
    }

    /// Tangential-velocity kernel of a scalar that is odd in both
    /// coordinates, reduced to an integral over the open quadrant:
    /// four image terms with numerators `x2 -+ y2`.
    pub fn k1(&self, x: Vec2, y: Vec2) -> Result<f64> {
        Ok(self.term(x.x2 - y.x2, x - y)?
            - self.term(x.x2 - y.x2, x - y.tilde())?
            - self.term(x.x2 + y.x2, x - y.bar())?
            + self.term(x.x2 + y.x2, x + y)?)
    }

    /// Normal-velocity kernel for odd-odd scalars over the quadrant:
    /// four image terms with numerators `y1 -+ x1`.
    pub fn k2(&self, x: Vec2, y: Vec2) -> Result<f64> {
        Ok(self.term(y.x1 - x.x1, x - y)?
            - self.term(y.x1 - x.x1, x - y.bar())?
            + self.term(y.x1 + x.x1, x - y.tilde())?
            - self.term(y.x1 + x.x1, x + y)?)
    }
}
