//! Closed-form evaluation and independent quadrature cross-checks of the
//! region integrals behind the blow-up barrier estimates.
//!
//! Everything here is built from two special quantities:
//!
//! * `f(s) = ∫_0^s (q^2+1)^{-alpha} dq`, and
//! * `mu = lim_{s->inf} [ s^{1-2 alpha}/(1-2 alpha) - f(s) ]`,
//!
//! the finite tail constant of `f`. The left-edge shear bound reduces to the
//! function `I(b)` of the edge aspect ratio `b` and to `g(c)`, which controls
//! the monotonicity of `I` through the substitution `c = 1/b`. The corner
//! balance is the analogous combination for the normal velocity at the
//! diagonal probe. Each closed form is cross-checked by iterated adaptive
//! quadrature over the defining plane regions, truncated tails handled by a
//! power substitution.

use serde::{Deserialize, Serialize};

use crate::error::{GsqgError, Result};
use crate::quad::{adaptive_1d, adaptive_segments, adaptive_tail, QuadOutcome};

const F_ABS_TOL: f64 = 1e-12;
const MU_TAIL_START: f64 = 100.0;

/// `∫_0^s (q^2+1)^{-alpha} dq`, strictly increasing in `s`, bounded by `s`.
pub fn f_integral(alpha: f64, s: f64) -> Result<f64> {
    if !(0.0..0.5).contains(&alpha) {
        return Err(GsqgError::InvalidParameter(format!(
            "f integral needs alpha in [0, 1/2), got {alpha}"
        )));
    }
    if s < 0.0 || !s.is_finite() {
        return Err(GsqgError::Domain(format!("f integral needs s >= 0, got {s}")));
    }
    if alpha == 0.0 {
        return Ok(s);
    }
    // decade breakpoints keep the adaptive pass cheap for large s
    let mut pts = vec![0.0];
    let mut p = 1.0;
    while p < s {
        pts.push(p);
        p *= 10.0;
    }
    pts.push(s);
    let out = adaptive_segments(
        &|q: f64| (q * q + 1.0).powf(-alpha),
        &pts,
        F_ABS_TOL,
        1e-14,
        50_000,
    );
    Ok(out.value)
}

/// The tail constant `mu = lim [ s^{1-2a}/(1-2a) - f(s) ] > 0`, evaluated at
/// a finite anchor plus a quadrature of the stabilized tail integrand
/// `q^{-2a} - (q^2+1)^{-a}`.
pub fn mu_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.49) {
        return Err(GsqgError::InvalidParameter(format!(
            "mu is ill-conditioned outside (0, 0.49], got alpha = {alpha}"
        )));
    }
    mu_alpha_at(alpha, MU_TAIL_START)
}

/// Same as `mu_alpha` with an explicit anchor point, exposed so tests can
/// confirm the value has stabilized in the anchor.
pub fn mu_alpha_at(alpha: f64, anchor: f64) -> Result<f64> {
    let head = anchor.powf(1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha) - f_integral(alpha, anchor)?;
    // q^{-2a} - (q^2+1)^{-a} = -q^{-2a} expm1(-a ln(1 + q^{-2})), exact to
    // machine precision even when the two terms agree to many digits
    let tail_fn = |q: f64| -> f64 {
        let u = 1.0 / (q * q);
        -q.powf(-2.0 * alpha) * (-alpha * u.ln_1p()).exp_m1()
    };
    let tail = adaptive_tail(&tail_fn, anchor, 1.0 + 2.0 * alpha, 1e-13, 1e-12, 20_000);
    Ok(head + tail.value)
}

/// Upper bound for `mu`: `1/(1-2a) - f(1) + a/(1+2a)`.
pub fn mu_upper_bound(alpha: f64) -> Result<f64> {
    Ok(1.0 / (1.0 - 2.0 * alpha) - f_integral(alpha, 1.0)? + alpha / (1.0 + 2.0 * alpha))
}

/// Tabulated `f` values with the tail constant, for reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecialValues {
    pub alpha: f64,
    pub f_of: Vec<(f64, f64)>,
    pub mu: f64,
    pub mu_upper: f64,
}

pub fn special_values(alpha: f64, s_list: &[f64]) -> Result<SpecialValues> {
    let mut f_of = Vec::with_capacity(s_list.len());
    for &s in s_list {
        f_of.push((s, f_integral(alpha, s)?));
    }
    Ok(SpecialValues {
        alpha,
        f_of,
        mu: mu_alpha(alpha)?,
        mu_upper: mu_upper_bound(alpha)?,
    })
}

/// Closed form of the left-edge region balance `I(b)` for `b` in (0, 1].
pub fn i_of_b(alpha: f64, b: f64) -> Result<f64> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(GsqgError::Domain(format!("I(b) needs b in (0, 1], got {b}")));
    }
    let f1 = f_integral(alpha, 1.0)?;
    let f_inv_b = f_integral(alpha, 1.0 / b)?;
    let mu = mu_alpha(alpha)?;
    let om = 1.0 - 2.0 * alpha;
    let two_ma = 2f64.powf(-alpha);
    Ok((2f64.powf(1.0 - 2.0 * alpha) - 2.0) / om - two_ma * (f1 + mu)
        + 2.0 * b.powf(om) * (f_inv_b + f1 - 0.5 * two_ma / om + 0.5 * two_ma * mu))
}

/// `I(1)` in the reduced form free of `mu`.
pub fn i_one(alpha: f64) -> Result<f64> {
    let f1 = f_integral(alpha, 1.0)?;
    let om = 1.0 - 2.0 * alpha;
    let two_ma = 2f64.powf(-alpha);
    Ok((4.0 - two_ma) * f1 - (2.0 + two_ma - 2f64.powf(1.0 - 2.0 * alpha)) / om)
}

/// The monotonicity driver `g(c)` for `c >= 1`; `I(1/c)` is nondecreasing
/// wherever `g` is nonnegative.
pub fn g_of_c(alpha: f64, c: f64) -> Result<f64> {
    if c < 1.0 {
        return Err(GsqgError::Domain(format!("g(c) needs c >= 1, got {c}")));
    }
    let om = 1.0 - 2.0 * alpha;
    let mu = mu_alpha(alpha)?;
    Ok(c / (om * (c * c + 1.0).powf(alpha)) - f_integral(alpha, c)? - f_integral(alpha, 1.0)?
        + 2f64.powf(-1.0 - alpha) / om
        - 2f64.powf(-1.0 - alpha) * mu)
}

/// `g(1) = 3·2^{-1-a}/(1-2a) - 2 f(1) - 2^{-1-a} mu`, the minimum of `g`
/// over `[1, inf)`.
pub fn g_one(alpha: f64) -> Result<f64> {
    let om = 1.0 - 2.0 * alpha;
    Ok(3.0 * 2f64.powf(-1.0 - alpha) / om - 2.0 * f_integral(alpha, 1.0)?
        - 2f64.powf(-1.0 - alpha) * mu_alpha(alpha)?)
}

/// Closed-form lower bound for `inf_b I(b)`: `min(I(1), I(1) + 2 g(1))`.
pub fn shear_lower_bound(alpha: f64) -> Result<f64> {
    let i1 = i_one(alpha)?;
    let g1 = g_one(alpha)?;
    Ok(if g1 >= 0.0 { i1 } else { i1 + 2.0 * g1 })
}

/// Margin whose sign decides how far the blow-up argument reaches:
/// `f(1) - (2 + 2^{-a} - 2^{1-2a}) / ((1-2a)(4 - 2^{-a}))`.
/// Positive up to the critical exponent near 0.2573, negative beyond.
pub fn critical_alpha_margin(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(GsqgError::InvalidParameter(format!(
            "margin needs alpha in (0, 1/2), got {alpha}"
        )));
    }
    let om = 1.0 - 2.0 * alpha;
    let two_ma = 2f64.powf(-alpha);
    Ok(f_integral(alpha, 1.0)? - (2.0 + two_ma - 2f64.powf(1.0 - 2.0 * alpha)) / (om * (4.0 - two_ma)))
}

/// Margin of the older, cruder blow-up criterion, in the bracketed reading
/// `20^{-a}/6 - [ 1/(1-2a) - 2^{-a} ]` whose root sits near 0.05.
pub fn coarse_margin(alpha: f64) -> f64 {
    20f64.powf(-alpha) / 6.0 - (1.0 / (1.0 - 2.0 * alpha) - 2f64.powf(-alpha))
}

/// The same criterion read literally as printed,
/// `20^{-a}/6 - 1/(1-2a) - 2^{-a}`; negative for every alpha in (0, 1/2),
/// so it admits no positive root. Reported alongside the bracketed reading
/// rather than silently corrected.
pub fn coarse_margin_literal(alpha: f64) -> f64 {
    20f64.powf(-alpha) / 6.0 - 1.0 / (1.0 - 2.0 * alpha) - 2f64.powf(-alpha)
}

/// A bisection root with its bracket and residual.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Root {
    pub root: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection with bracket widening; 60 halvings once a sign change is found.
pub fn bisect_root(f: &impl Fn(f64) -> f64, lo0: f64, hi0: f64) -> Result<Root> {
    let (mut lo, mut hi) = (lo0, hi0);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    let mut widen = 0;
    while flo.signum() == fhi.signum() && widen < 30 {
        let w = hi - lo;
        lo = (lo - 0.5 * w).max(1e-6);
        hi += 0.5 * w;
        flo = f(lo);
        fhi = f(hi);
        widen += 1;
    }
    if flo.signum() == fhi.signum() {
        return Err(GsqgError::Other(format!(
            "no sign change in [{lo}, {hi}] after widening"
        )));
    }
    let bracket = (lo, hi);
    let mut iterations = 0;
    for _ in 0..60 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    Ok(Root {
        root,
        bracket,
        residual: f(root),
        iterations,
    })
}

/// Root of the critical margin, bracketed in [0.25, 0.28].
pub fn critical_alpha_root() -> Result<Root> {
    bisect_root(&|a| critical_alpha_margin(a).unwrap_or(f64::NAN), 0.25, 0.28)
}

/// Smallest positive root of the bracketed coarse-criterion margin.
pub fn coarse_root() -> Result<Root> {
    // scan for the first sign change from the left
    let mut prev_a = 0.005;
    let mut prev = coarse_margin(prev_a);
    let mut a = prev_a + 0.005;
    while a < 0.49 {
        let v = coarse_margin(a);
        if prev.signum() != v.signum() {
            return bisect_root(&coarse_margin, prev_a, a);
        }
        prev_a = a;
        prev = v;
        a += 0.005;
    }
    Err(GsqgError::Other("coarse margin has no root in (0, 0.49)".into()))
}

/// The four-term doubly-reflected kernel difference whose positivity pins
/// the sign of the left-edge kernel on the lower-triangle region:
/// positive whenever `alpha >= 0`, `b1, b2 > 0`, `0 < x1 <= x2 < min(b1, b2)`.
pub fn reflected_difference(alpha: f64, x1: f64, x2: f64, b1: f64, b2: f64) -> f64 {
    let pow = |u: f64, v: f64| (u * u + v * v).powf(-1.0 - alpha);
    x2 * pow(x1, x2) - x2 * pow(2.0 * b1 - x1, x2) - (2.0 * b2 - x2) * pow(x1, 2.0 * b2 - x2)
        + (2.0 * b2 - x2) * pow(2.0 * b1 - x1, 2.0 * b2 - x2)
}

/// The reduced one-variable form of the same claim: after scaling by `b2`,
/// the difference `F(y1) - F(2c - y1)` with `c = b1/b2`, `y = x/b2`.
pub fn reflected_difference_reduced(alpha: f64, y1: f64, y2: f64, c: f64) -> f64 {
    let ff = |s: f64| -> f64 {
        y2 * (s * s + y2 * y2).powf(-1.0 - alpha)
            - (2.0 - y2) * (s * s + (2.0 - y2) * (2.0 - y2)).powf(-1.0 - alpha)
    };
    ff(y1) - ff(2.0 * c - y1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityReport {
    pub alpha: f64,
    pub samples: usize,
    pub violations: usize,
    pub min_value: f64,
    /// largest mismatch between the four-term expression and its reduced form
    pub max_reduced_mismatch: f64,
}

/// Draw random admissible tuples and count non-positive values of the
/// reflected difference; also confirms the scaling-reduced form agrees.
pub fn reflected_positivity_sample(alpha: f64, samples: usize, seed: u64) -> PositivityReport {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_value = f64::INFINITY;
    let mut max_reduced_mismatch = 0.0f64;
    for _ in 0..samples {
        let b1: f64 = rng.gen_range(0.05..5.0);
        let b2: f64 = rng.gen_range(0.05..5.0);
        let m = b1.min(b2);
        let x2 = m * rng.gen_range(1e-6..1.0 - 1e-9);
        // closed upper end exercises the x1 = x2 boundary case
        let x1 = x2 * (1.0 - rng.gen_range(0.0..1.0 - 1e-9));
        let v = reflected_difference(alpha, x1, x2, b1, b2);
        if !(v > 0.0) {
            violations += 1;
        }
        min_value = min_value.min(v);
        let scale = b2.powf(1.0 + 2.0 * alpha);
        let reduced = reflected_difference_reduced(alpha, x1 / b2, x2 / b2, b1 / b2);
        let mismatch = (v * scale - reduced).abs() / reduced.abs().max(1e-300);
        max_reduced_mismatch = max_reduced_mismatch.max(mismatch);
    }
    PositivityReport {
        alpha,
        samples,
        violations,
        min_value,
        max_reduced_mismatch,
    }
}

// ---------------------------------------------------------------------------
// Iterated region quadrature. Each plane region is sliced vertically; the
// inner integral runs in x2 for the shear family (integrand x2/|x|^{2+2a})
// and in x2 for the corner family as well, with the numerator being the
// outer variable there (integrand x1/|x|^{2+2a}).
// ---------------------------------------------------------------------------

const INNER_ABS: f64 = 1e-13;
const INNER_REL: f64 = 1e-11;

/// ∫ s (fixed^2 + s^2)^{-1-a} ds over [lo, hi], numerator = inner variable.
fn inner_var_num(alpha: f64, fixed: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    adaptive_1d(
        &|s: f64| s * (fixed * fixed + s * s).powf(-1.0 - alpha),
        lo,
        hi,
        INNER_ABS,
        INNER_REL,
        4_000,
    )
    .value
}

/// fixed · ∫ (fixed^2 + s^2)^{-1-a} ds over [lo, hi], numerator = outer
/// variable.
fn inner_fixed_num(alpha: f64, fixed: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    adaptive_1d(
        &|s: f64| (fixed * fixed + s * s).powf(-1.0 - alpha),
        lo,
        hi,
        INNER_ABS,
        INNER_REL,
        4_000,
    )
    .value
    .mul_add(fixed, 0.0)
}

fn outer_with_tail(
    f: &impl Fn(f64) -> f64,
    segments: &[f64],
    tail_from: f64,
    decay_p: f64,
    tol: f64,
) -> QuadOutcome<f64> {
    let body = adaptive_segments(f, segments, 0.5 * tol, 1e-11, 30_000);
    let tail = adaptive_tail(f, tail_from, decay_p, 0.5 * tol, 1e-11, 30_000);
    QuadOutcome::merged([body, tail])
}

/// `2a ∫` over the centered box `(-1,1) x (0,b)` of `x2/|x|^{2+2a}`.
pub fn quad_box(alpha: f64, b: f64, tol: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    // symmetric in x1; the x1 -> 0 edge is integrable but singular, so give
    // the adaptive pass a graded start
    let f = |x1: f64| inner_var_num(alpha, x1, 0.0, b);
    let out = adaptive_segments(&f, &[0.0, 1e-4, 1e-2, 0.1, 1.0], 0.5 * tol, 1e-11, 60_000);
    2.0 * 2.0 * alpha * out.value
}

/// `2a ∫` over the rising diagonal strip `{x2 > 0, x2 < x1 < x2 + 2}`.
/// The inner slice is parameterized by the offset `u = x1 - x2` so the
/// integration interval survives when `x1` dwarfs the strip width.
pub fn quad_rising_strip(alpha: f64, tol: f64) -> f64 {
    let f = |x1: f64| {
        let hi = x1.min(2.0);
        if hi <= 0.0 {
            return 0.0;
        }
        adaptive_1d(
            &|u: f64| {
                let s = x1 - u;
                s * (x1 * x1 + s * s).powf(-1.0 - alpha)
            },
            0.0,
            hi,
            INNER_ABS,
            INNER_REL,
            4_000,
        )
        .value
    };
    let out = outer_with_tail(&f, &[0.0, 1e-4, 1e-2, 1.0, 2.0, 4.0], 4.0, 2.0 * alpha, tol);
    2.0 * alpha * out.value
}

/// `2a ∫` over the reflected sheared strip for edge ratio `b`:
/// `x1 in (-b, inf)`, `x2 in (max(b, x1), x1 + 2b)`, offset-parameterized
/// like the rising strip.
pub fn quad_sheared_strip(alpha: f64, b: f64, tol: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let f = |x1: f64| {
        let lo = (b - x1).max(0.0);
        let hi = 2.0 * b;
        if hi <= lo {
            return 0.0;
        }
        adaptive_1d(
            &|u: f64| {
                let s = x1 + u;
                s * (x1 * x1 + s * s).powf(-1.0 - alpha)
            },
            lo,
            hi,
            INNER_ABS,
            INNER_REL,
            4_000,
        )
        .value
    };
    let out = outer_with_tail(
        &f,
        &[-b, 0.0, b, 2.0 * b, (2.0 * b).max(2.0)],
        (2.0 * b).max(2.0),
        2.0 * alpha,
        tol,
    );
    2.0 * alpha * out.value
}

/// Quadrature route to `I(b)`: rising strip plus sheared strip minus box.
pub fn i_of_b_quadrature(alpha: f64, b: f64, tol: f64) -> f64 {
    quad_rising_strip(alpha, tol) + quad_sheared_strip(alpha, b, tol) - quad_box(alpha, b, tol)
}

/// `2a ∫` over `(1, inf) x (-1, 1)` of `x1/|x|^{2+2a}`.
fn quad_corner_far_band(alpha: f64, tol: f64) -> f64 {
    let f = |x1: f64| inner_fixed_num(alpha, x1, -1.0, 1.0);
    let out = adaptive_tail(&f, 1.0, 2.0 * alpha, tol, 1e-11, 30_000);
    2.0 * alpha * out.value
}

/// `2a ∫` over the mirrored wedge `{x1 > 2, -1 < x2 < min(x1 - 2, 1)}`.
fn quad_corner_wedge(alpha: f64, tol: f64) -> f64 {
    let f = |x1: f64| inner_fixed_num(alpha, x1, -1.0, (x1 - 2.0).min(1.0));
    let out = outer_with_tail(&f, &[2.0, 3.0, 4.0], 4.0, 2.0 * alpha, tol);
    2.0 * alpha * out.value
}

/// `2a ∫` over the rising diagonal band `{x1 > 0, x1 < x2 < x1 + 2}` of
/// `x1/|x|^{2+2a}`, offset-parameterized in the inner variable.
fn quad_corner_diag_band(alpha: f64, tol: f64) -> f64 {
    let f = |x1: f64| {
        adaptive_1d(
            &|u: f64| {
                let s = x1 + u;
                (x1 * x1 + s * s).powf(-1.0 - alpha)
            },
            0.0,
            2.0,
            INNER_ABS,
            INNER_REL,
            4_000,
        )
        .value
            * x1
    };
    let out = outer_with_tail(&f, &[0.0, 1e-4, 1e-2, 1.0, 2.0, 4.0], 4.0, 2.0 * alpha, tol);
    2.0 * alpha * out.value
}

/// `2a ∫` over the mirrored upper band `{x1 > 2, max(x1-2, 1) < x2 < x1}`.
fn quad_corner_upper_band(alpha: f64, tol: f64) -> f64 {
    let f = |x1: f64| {
        let hi = 2f64.min(x1 - 1.0);
        if hi <= 0.0 {
            return 0.0;
        }
        adaptive_1d(
            &|u: f64| {
                let s = x1 - u;
                (x1 * x1 + s * s).powf(-1.0 - alpha)
            },
            0.0,
            hi,
            INNER_ABS,
            INNER_REL,
            4_000,
        )
        .value
            * x1
    };
    let out = outer_with_tail(&f, &[2.0, 3.0, 4.0], 4.0, 2.0 * alpha, tol);
    2.0 * alpha * out.value
}

/// Quadrature route to the corner balance.
pub fn corner_balance_quadrature(alpha: f64, tol: f64) -> f64 {
    quad_corner_far_band(alpha, tol) + quad_corner_wedge(alpha, tol)
        - quad_corner_diag_band(alpha, tol)
        - quad_corner_upper_band(alpha, tol)
}

/// Closed form of the corner balance:
/// `(2 - 2^{1-2a}) f(1) + 2^{2-2a} f(1/2) - 2^{1-2a}(1 - 2^{-a})/(1-2a)`.
pub fn corner_balance(alpha: f64) -> Result<f64> {
    let f1 = f_integral(alpha, 1.0)?;
    let fh = f_integral(alpha, 0.5)?;
    let om = 1.0 - 2.0 * alpha;
    Ok((2.0 - 2f64.powf(1.0 - 2.0 * alpha)) * f1 + 2f64.powf(2.0 - 2.0 * alpha) * fh
        - 2f64.powf(1.0 - 2.0 * alpha) * (1.0 - 2f64.powf(-alpha)) / om)
}

/// A named computed quantity with its bound, verdict, and quadrature
/// cross-check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub alpha: f64,
    pub aux_param: Option<f64>,
    pub closed_form: f64,
    pub quadrature: Option<f64>,
    pub bound: f64,
    pub pass: bool,
    pub discrepancy: f64,
}

/// Verdict for the left-edge shear bound at one `alpha`: the closed-form
/// infimum lower bound against `1/20` (equivalently the scaled infimum
/// against `1/(40 a)`), cross-checked by region quadrature at the listed
/// `b` values.
pub fn shear_infimum_report(alpha: f64, cross_check_b: &[f64], tol: f64) -> Result<LemmaReport> {
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(GsqgError::InvalidParameter(format!(
            "shear bound is stated for alpha in (0, 1/4], got {alpha}"
        )));
    }
    let lower = shear_lower_bound(alpha)?;
    let mut worst = 0.0f64;
    let mut quad_at_one = None;
    for &b in cross_check_b {
        let closed = if b == 0.0 {
            // the box and sheared strip vanish with b
            let f1 = f_integral(alpha, 1.0)?;
            2f64.powf(1.0 - 2.0 * alpha) / (1.0 - 2.0 * alpha)
                - 2f64.powf(-alpha) * (f1 + mu_alpha(alpha)?)
        } else {
            i_of_b(alpha, b)?
        };
        let quad = i_of_b_quadrature(alpha, b, tol * 0.05);
        worst = worst.max((closed - quad).abs());
        if b == 1.0 {
            quad_at_one = Some(quad);
        }
    }
    let pass = lower >= 0.05 && worst <= tol;
    Ok(LemmaReport {
        name: "shear-infimum".into(),
        alpha,
        aux_param: None,
        closed_form: lower,
        quadrature: quad_at_one,
        bound: 0.05,
        pass,
        discrepancy: worst,
    })
}

/// Verdict for the corner balance at one `alpha`: positivity of the closed
/// form, cross-checked against region quadrature.
pub fn corner_balance_report(alpha: f64, tol: f64) -> Result<LemmaReport> {
    if !(alpha > 0.0 && alpha <= 0.25) {
        return Err(GsqgError::InvalidParameter(format!(
            "corner balance is stated for alpha in (0, 1/4], got {alpha}"
        )));
    }
    let closed = corner_balance(alpha)?;
    let quad = corner_balance_quadrature(alpha, tol * 0.05);
    let discrepancy = (closed - quad).abs();
    Ok(LemmaReport {
        name: "corner-balance".into(),
        alpha,
        aux_param: None,
        closed_form: closed,
        quadrature: Some(quad),
        bound: 0.0,
        pass: closed > 0.0 && discrepancy <= tol,
        discrepancy,
    })
}
