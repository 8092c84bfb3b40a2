//! Boundary velocity of α-patches: the circle boundary moves at the closed-form
//! speed along its boundary, and an ellipse obeys the mirror rule v(Rp) = −R v(p).

use alpha_patch::biot_savart::{boundary_velocity, circle_speed, normal_strain, AlphaParam};
use alpha_patch::curve_geometry::{star_curve, ClosedCurve};
use alpha_patch::field::grid_point;

fn main() -> alpha_patch::Result<()> {
    for al in [0.1, 0.25, 0.4] {
        let a = AlphaParam::new(al)?;
        let c = star_curve(256, 1.0, &[])?;
        let v = boundary_velocity(&c, a).v;
        let speeds: Vec<f64> = v.iter().map(|p| p[0].hypot(p[1])).collect();
        let spread = speeds.iter().map(|s| (s - speeds[0]).abs()).fold(0.0, f64::max);
        println!("α = {al}: U = {:+.9}, node 0 velocity ({:+.9}, {:+.9}), |v| spread {spread:.1e}", circle_speed(a, 1.0), v[0][0], v[0][1]);
    }

    let a = AlphaParam::new(0.25)?;
    let n = 256;
    let nodes: Vec<_> = (0..n).map(|j| [grid_point(j, n).cos(), 0.6 * grid_point(j, n).sin()]).collect();
    let e = ClosedCurve::new(&nodes)?;
    let v = boundary_velocity(&e, a).v;
    let mirror = (0..n)
        .map(|j| {
            let m = (n - j) % n;
            (v[m][0] + v[j][0]).hypot(v[m][1] - v[j][1])
        })
        .fold(0.0, f64::max);
    println!("ellipse 1 × 0.6: |v| at tip {:.6}, mirror defect {mirror:.1e}", v[0][0].hypot(v[0][1]));

    let (kappa, dsv_n) = normal_strain(&e, a);
    println!("ellipse: max κ {:.6}, max |∂_s v·N| {:.6}", kappa.lp_norm(f64::INFINITY), dsv_n.lp_norm(f64::INFINITY));
    Ok(())
}
