use gsqg::field::{GridSpec, Parity, ScalarField};
use gsqg::geom::{Rect, Vec2};
use gsqg::kernel::KernelParams;
use gsqg::quad::QuadConfig;
use gsqg::velocity::velocity_at;
use std::time::Instant;

fn main() {
    let spec = GridSpec::square(4.0, 256);
    let eps = 0.05f64;
    let w = eps / 2.0;
    let ramp = |t: f64| if t <= 0.0 { 0.0 } else if t >= 1.0 { 1.0 } else { t * t * (3.0 - 2.0 * t) };
    let f = |x1: f64, x2: f64| {
        let p1 = ramp((x1 - (2.0 * eps - w)) / w) * (1.0 - ramp((x1 - 2.0) / w));
        let p2 = 1.0 - ramp((x2 - 2.0) / w);
        p1 * p2
    };
    let mut field = ScalarField::from_fn(spec, Parity::ODD_BOTH, f);
    field.set_support(Rect::new(2.0 * eps - w, 2.0 + w, 0.0, 2.0 + w));
    let kp = KernelParams::exact(0.25).unwrap();
    let qc = QuadConfig { abs_tol: 1e-7, rel_tol: 1e-7, split_radius: 0.05, max_subdivisions: 200_000, fd_step: 1e-3 };
    for &(x1, x2) in &[(0.15, 0.075), (1.0, 0.02), (1.0, 1.0), (0.15, 0.001), (3.5, 3.5)] {
        let t0 = Instant::now();
        match velocity_at(&field, &kp, Vec2::new(x1, x2), &qc) {
            Ok(out) => println!("({x1},{x2}): u = ({:+.6e}, {:+.6e}) err {:.2e}  [{:?}]", out.u.x1, out.u.x2, out.err_est, t0.elapsed()),
            Err(e) => println!("({x1},{x2}): ERR {e}  [{:?}]", t0.elapsed()),
        }
    }
}
