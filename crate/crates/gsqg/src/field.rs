//! Gridded scalar fields on a rectangle of the closed upper half-plane.
//!
//! A `ScalarField` stores node values on a uniform grid over
//! `[origin.x1, origin.x1 + (nx-1) h] x [origin.x2, origin.x2 + (ny-1) h]`
//! and evaluates anywhere in the plane by bilinear interpolation, extended
//! by the declared parities: with `odd_x2` set, evaluation at `(x1, -x2)`
//! returns the negated value at `(x1, x2)`, and likewise for `odd_x1`.
//! Points outside the (reflected) grid evaluate to zero.

use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GsqgError, Result};
use crate::geom::{Rect, Vec2};
use crate::params::{kappa_beta, StretchMap};

/// Uniform grid layout: `nx` by `ny` nodes with spacing `spacing`,
/// lower-left node at `origin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec2,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// Square grid over `[0, len]^2` with `cells` cells per side.
    pub fn square(len: f64, cells: usize) -> GridSpec {
        GridSpec {
            origin: Vec2::ZERO,
            spacing: len / cells as f64,
            nx: cells + 1,
            ny: cells + 1,
        }
    }

    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x1 + i as f64 * self.spacing,
            self.origin.x2 + j as f64 * self.spacing,
        )
    }

    pub fn rect(&self) -> Rect {
        Rect::new(
            self.origin.x1,
            self.origin.x1 + (self.nx - 1) as f64 * self.spacing,
            self.origin.x2,
            self.origin.x2 + (self.ny - 1) as f64 * self.spacing,
        )
    }
}

/// Odd-extension flags across the coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Parity {
    pub odd_x1: bool,
    pub odd_x2: bool,
}

impl Parity {
    pub const NONE: Parity = Parity { odd_x1: false, odd_x2: false };
    pub const ODD_BOTH: Parity = Parity { odd_x1: true, odd_x2: true };
    pub const ODD_X1: Parity = Parity { odd_x1: true, odd_x2: false };
    pub const ODD_X2: Parity = Parity { odd_x1: false, odd_x2: true };
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    spec: GridSpec,
    values: Vec<f64>, // row-major: values[j * nx + i]
    parity: Parity,
    support: Rect,
}

/// JSON header written next to the binary value file.
#[derive(Debug, Serialize, Deserialize)]
struct FieldHeader {
    format: String,
    origin: [f64; 2],
    spacing: f64,
    nx: usize,
    ny: usize,
    odd_x1: bool,
    odd_x2: bool,
    support: [[f64; 2]; 2],
    data_file: String,
    count: usize,
}

impl ScalarField {
    pub fn zeros(spec: GridSpec, parity: Parity) -> ScalarField {
        let support = spec.rect();
        ScalarField {
            spec,
            values: vec![0.0; spec.nx * spec.ny],
            parity,
            support,
        }
    }

    /// Sample `f` at every node. The support box defaults to the grid
    /// rectangle; shrink it afterwards with `set_support` when known.
    pub fn from_fn(spec: GridSpec, parity: Parity, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        let mut values = vec![0.0; spec.nx * spec.ny];
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let p = spec.node(i, j);
                values[j * spec.nx + i] = f(p.x1, p.x2);
            }
        }
        ScalarField {
            spec,
            values,
            parity,
            support: spec.rect(),
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn support(&self) -> Rect {
        self.support
    }

    pub fn set_support(&mut self, support: Rect) {
        self.support = support;
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing
    }

    pub fn node_value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.spec.nx + i]
    }

    pub fn set_node_value(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.spec.nx + i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bilinear interpolation on the stored rectangle, zero outside.
    fn value_raw(&self, x1: f64, x2: f64) -> f64 {
        let h = self.spec.spacing;
        let fx = (x1 - self.spec.origin.x1) / h;
        let fy = (x2 - self.spec.origin.x2) / h;
        if fx < 0.0 || fy < 0.0 || fx > (self.spec.nx - 1) as f64 || fy > (self.spec.ny - 1) as f64
        {
            return 0.0;
        }
        let i = (fx as usize).min(self.spec.nx - 2);
        let j = (fy as usize).min(self.spec.ny - 2);
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.node_value(i, j);
        let v10 = self.node_value(i + 1, j);
        let v01 = self.node_value(i, j + 1);
        let v11 = self.node_value(i + 1, j + 1);
        (1.0 - tx) * (1.0 - ty) * v00 + tx * (1.0 - ty) * v10
            + (1.0 - tx) * ty * v01
            + tx * ty * v11
    }

    /// Parity-extended evaluation anywhere in the plane.
    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let mut sign = 1.0;
        let mut x1 = x1;
        let mut x2 = x2;
        if x2 < 0.0 && self.parity.odd_x2 {
            sign = -sign;
            x2 = -x2;
        }
        if x1 < 0.0 && self.parity.odd_x1 {
            sign = -sign;
            x1 = -x1;
        }
        sign * self.value_raw(x1, x2)
    }

    pub fn value_at(&self, p: Vec2) -> f64 {
        self.value(p.x1, p.x2)
    }

    /// Sup of |values| over the stored nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete L1 mass: sum of |node value| times cell area.
    pub fn l1_mass(&self) -> f64 {
        let cell = self.spec.spacing * self.spec.spacing;
        self.values.iter().map(|v| v.abs()).sum::<f64>() * cell
    }

    /// Sup norm and the boundary-weighted gradient seminorm
    /// `sup sqrt((d1 theta)^2 + (kappa_beta(x2) d2 theta)^2)`,
    /// both over grid nodes. Derivatives use centered differences with the
    /// grid spacing. The weighted sup is a sup over the open half-plane, so
    /// the seminorm scan skips nodes with `x2 < 2h`: there the stencil
    /// straddles the boundary and cannot see the power scale of the weight.
    pub fn wbeta_norm(&self, beta: f64) -> Result<(f64, f64)> {
        if self.spec.nx < 3 || self.spec.ny < 3 {
            return Err(GsqgError::Resolution(format!(
                "weighted norm needs at least 3 nodes per axis, grid is {}x{}",
                self.spec.nx, self.spec.ny
            )));
        }
        let h = self.spec.spacing;
        let sup = self.sup_norm();
        let mut semi = 0.0f64;
        for j in 1..self.spec.ny - 1 {
            let x2 = self.spec.origin.x2 + j as f64 * h;
            if x2 < 2.0 * h {
                continue;
            }
            let w = kappa_beta(beta, x2.max(0.0));
            for i in 1..self.spec.nx - 1 {
                let d1 = (self.node_value(i + 1, j) - self.node_value(i - 1, j)) / (2.0 * h);
                let d2 = (self.node_value(i, j + 1) - self.node_value(i, j - 1)) / (2.0 * h);
                semi = semi.max(d1.hypot(w * d2));
            }
        }
        Ok((sup, semi))
    }

    /// Resample through the vertical stretching. `Forward` produces the
    /// stretched companion field `x -> theta(x1, lambda(x2))`; `Inverse`
    /// composes with the inverse map instead. The grid layout is reused.
    pub fn stretch(&self, map: &StretchMap, dir: StretchDirection) -> Result<ScalarField> {
        let spec = self.spec;
        let mut out = ScalarField::zeros(spec, self.parity);
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let p = spec.node(i, j);
                if p.x2 < 0.0 {
                    continue;
                }
                let y2 = match dir {
                    StretchDirection::Forward => map.lambda(p.x2)?,
                    StretchDirection::Inverse => map.lambda_inv(p.x2)?,
                };
                out.set_node_value(i, j, self.value(p.x1, y2));
            }
        }
        // carry the support box through the (inverse) map in x2
        let (lo, hi) = (self.support.lo, self.support.hi);
        let map_back = |v: f64| -> Result<f64> {
            let v = v.max(0.0);
            match dir {
                StretchDirection::Forward => map.lambda_inv(v),
                StretchDirection::Inverse => map.lambda(v),
            }
        };
        let grid = spec.rect();
        out.support = Rect::new(
            lo.x1,
            hi.x1,
            map_back(lo.x2)?.min(grid.hi.x2),
            map_back(hi.x2)?.min(grid.hi.x2),
        );
        Ok(out)
    }

    /// Write the JSON header at `json_path` and the node values as
    /// little-endian f64, row-major, in a sidecar `.bin` next to it.
    pub fn save(&self, json_path: &Path) -> Result<()> {
        let bin_name = json_path
            .file_stem()
            .map(|s| format!("{}.bin", s.to_string_lossy()))
            .ok_or_else(|| GsqgError::Other("field path has no file stem".into()))?;
        let header = FieldHeader {
            format: "gsqg-field-v1".to_string(),
            origin: [self.spec.origin.x1, self.spec.origin.x2],
            spacing: self.spec.spacing,
            nx: self.spec.nx,
            ny: self.spec.ny,
            odd_x1: self.parity.odd_x1,
            odd_x2: self.parity.odd_x2,
            support: [
                [self.support.lo.x1, self.support.hi.x1],
                [self.support.lo.x2, self.support.hi.x2],
            ],
            data_file: bin_name.clone(),
            count: self.values.len(),
        };
        let file = std::fs::File::create(json_path)?;
        serde_json::to_writer_pretty(BufWriter::new(file), &header)?;
        let bin_path = json_path.with_file_name(bin_name);
        let mut w = BufWriter::new(std::fs::File::create(bin_path)?);
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(json_path: &Path) -> Result<ScalarField> {
        let file = std::fs::File::open(json_path)?;
        let header: FieldHeader = serde_json::from_reader(BufReader::new(file))?;
        if header.format != "gsqg-field-v1" {
            return Err(GsqgError::Other(format!(
                "unknown field format {:?}",
                header.format
            )));
        }
        let bin_path = json_path.with_file_name(&header.data_file);
        let mut bytes = Vec::new();
        BufReader::new(std::fs::File::open(bin_path)?).read_to_end(&mut bytes)?;
        if bytes.len() != header.count * 8 || header.count != header.nx * header.ny {
            return Err(GsqgError::Other(format!(
                "field data size mismatch: {} bytes for {} values",
                bytes.len(),
                header.count
            )));
        }
        let values: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(ScalarField {
            spec: GridSpec {
                origin: Vec2::new(header.origin[0], header.origin[1]),
                spacing: header.spacing,
                nx: header.nx,
                ny: header.ny,
            },
            values,
            parity: Parity {
                odd_x1: header.odd_x1,
                odd_x2: header.odd_x2,
            },
            support: Rect::new(
                header.support[0][0],
                header.support[0][1],
                header.support[1][0],
                header.support[1][1],
            ),
        })
    }

    /// Plot-ready CSV dump of `(x1, x2, value)` triples, row-major.
    pub fn to_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "x1,x2,value")?;
        for j in 0..self.spec.ny {
            for i in 0..self.spec.nx {
                let p = self.spec.node(i, j);
                writeln!(w, "{},{},{}", p.x1, p.x2, self.node_value(i, j))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StretchDirection {
    Forward,
    Inverse,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cone(cx: f64, cy: f64) -> impl Fn(f64, f64) -> f64 {
        move |x1, x2| (1.0 - ((x1 - cx).powi(2) + (x2 - cy).powi(2)).sqrt()).max(0.0)
    }

    #[test]
    fn parity_evaluation() {
        let spec = GridSpec::square(4.0, 64);
        let f = ScalarField::from_fn(spec, Parity::ODD_BOTH, cone(2.0, 2.0));
        for k in 1..20 {
            let (x1, x2) = (1.3 + 0.05 * k as f64, 1.7 + 0.02 * k as f64);
            let v = f.value(x1, x2);
            assert_eq!(f.value(x1, -x2), -v);
            assert_eq!(f.value(-x1, x2), -v);
            assert_eq!(f.value(-x1, -x2), v);
        }
    }

    #[test]
    fn vanishes_outside_support() {
        let spec = GridSpec::square(4.0, 64);
        let mut f = ScalarField::from_fn(spec, Parity::NONE, cone(2.0, 2.0));
        f.set_support(Rect::new(1.0, 3.0, 1.0, 3.0));
        for &(x1, x2) in &[(0.5, 0.5), (3.5, 2.0), (2.0, 3.5), (0.9, 2.9)] {
            assert_eq!(f.value(x1, x2), 0.0, "nonzero at ({x1},{x2})");
        }
        // and on the support boundary for this compactly supported cone
        assert_eq!(f.value(1.0, 2.0), 0.0);
    }

    #[test]
    fn wbeta_norm_zero_field() {
        let f = ScalarField::zeros(GridSpec::square(2.0, 16), Parity::NONE);
        assert_eq!(f.wbeta_norm(0.5).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn wbeta_norm_rejects_coarse_grid() {
        let f = ScalarField::zeros(
            GridSpec {
                origin: Vec2::ZERO,
                spacing: 1.0,
                nx: 2,
                ny: 2,
            },
            Parity::NONE,
        );
        assert!(matches!(f.wbeta_norm(0.5), Err(GsqgError::Resolution(_))));
    }

    #[test]
    fn wbeta_norm_of_cone_is_one() {
        // cone far from the boundary has unit gradient wherever smooth
        let spec = GridSpec::square(4.0, 256);
        let h = spec.spacing;
        let f = ScalarField::from_fn(spec, Parity::NONE, cone(2.0, 2.0));
        for &beta in &[0.0, 0.3, 0.6] {
            let (sup, semi) = f.wbeta_norm(beta).unwrap();
            assert!((sup - 1.0).abs() < 1e-12);
            assert!((semi - 1.0).abs() < 4.0 * h, "beta={beta} semi={semi}");
        }
    }

    #[test]
    fn wbeta_norm_invariant_under_stretching() {
        // theta = (Lipschitz cone) ∘ inverse stretching: its weighted
        // seminorm equals the plain seminorm of the cone, up to O(h)
        let spec = GridSpec::square(4.0, 256);
        let h = spec.spacing;
        for &beta in &[0.25, 0.5] {
            let map = StretchMap::new(beta).unwrap();
            let tilde = cone(2.0, 1.2);
            let theta = ScalarField::from_fn(spec, Parity::NONE, |x1, x2| {
                tilde(x1, map.lambda_inv(x2.max(0.0)).unwrap())
            });
            let plain = ScalarField::from_fn(spec, Parity::NONE, &tilde);
            let (_, semi_w) = theta.wbeta_norm(beta).unwrap();
            let (_, semi_plain) = plain.wbeta_norm(0.0).unwrap();
            assert!(
                (semi_w - semi_plain).abs() < 6.0 * h,
                "beta={beta}: {semi_w} vs {semi_plain}"
            );
        }
    }

    #[test]
    fn stretch_identity_at_beta_zero() {
        let spec = GridSpec::square(4.0, 32);
        let f = ScalarField::from_fn(spec, Parity::NONE, cone(2.0, 2.0));
        let map = StretchMap::new(0.0).unwrap();
        let g = f.stretch(&map, StretchDirection::Forward).unwrap();
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                assert!((g.node_value(i, j) - f.node_value(i, j)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn stretch_preserves_plateau_and_sup() {
        let spec = GridSpec::square(4.0, 128);
        let plateau = |x1: f64, x2: f64| {
            if (0.5..=3.5).contains(&x1) && (0.5..=3.0).contains(&x2) {
                1.0
            } else {
                0.0
            }
        };
        let f = ScalarField::from_fn(spec, Parity::NONE, plateau);
        let map = StretchMap::new(0.5).unwrap();
        let g = f.stretch(&map, StretchDirection::Forward).unwrap();
        // composition preserves the range: interior plateau values stay 1
        assert!((g.value(2.0, 2.5) - 1.0).abs() < 1e-12); // lambda(2.5) = 2 in plateau
        assert!((g.sup_norm() - f.sup_norm()).abs() < 1e-12);
    }

    #[test]
    fn stretch_round_trip() {
        let spec = GridSpec::square(4.0, 128);
        let h = spec.spacing;
        let smooth = |x1: f64, x2: f64| {
            let r2 = (x1 - 2.0).powi(2) + (x2 - 2.0).powi(2);
            (-2.0 * r2).exp()
        };
        let f = ScalarField::from_fn(spec, Parity::NONE, smooth);
        let map = StretchMap::new(0.4).unwrap();
        let back = f
            .stretch(&map, StretchDirection::Forward)
            .unwrap()
            .stretch(&map, StretchDirection::Inverse)
            .unwrap();
        let top = spec.rect().hi.x2;
        let mut worst = 0.0f64;
        for j in 0..spec.ny {
            let x2 = spec.node(0, j).x2;
            // skip the boundary layer and the band whose forward image
            // falls off the stored grid
            if x2 < 2.0 * h || map.lambda_inv(x2).unwrap() > top {
                continue;
            }
            for i in 0..spec.nx {
                worst = worst.max((back.node_value(i, j) - f.node_value(i, j)).abs());
            }
        }
        assert!(worst <= 10.0 * h * h, "round-trip error {worst}");
    }

    #[test]
    fn save_load_round_trip() {
        let dir = std::env::temp_dir().join("gsqg-field-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("field.json");
        let spec = GridSpec::square(2.0, 24);
        let mut f = ScalarField::from_fn(spec, Parity::ODD_BOTH, cone(1.0, 1.0));
        f.set_support(Rect::new(0.0, 2.0, 0.0, 2.0));
        f.save(&path).unwrap();
        let g = ScalarField::load(&path).unwrap();
        assert_eq!(f, g);
        let mut csv = Vec::new();
        f.to_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), spec.nx * spec.ny + 1);
    }
}
