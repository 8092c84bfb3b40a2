//! Geometry of a three-lobed star: length, area, curvature, turning and
//! a round trip through the curve text format.

use alpha_patch::curve_geometry::{curvature, discrete_norms, resample_arclength, star_curve, total_turning, ClosedCurve, NormSpec};

fn main() -> alpha_patch::Result<()> {
    let c = star_curve(512, 1.0, &[(3, 0.15, 0.0), (5, 0.0, 0.03)])?;
    println!("nodes        {}", c.n());
    println!("length       {:.12}", c.length());
    println!("area         {:.12}", c.area());
    println!("ccw          {}", c.is_ccw());
    println!("turning/2π   {:.12}", total_turning(&c) / (2.0 * std::f64::consts::PI));
    println!("margin       {:.6}", c.simplicity_margin());

    let k = curvature(&c);
    let (lo, hi) = k.samples().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    println!("κ range      [{lo:.6}, {hi:.6}]");
    println!("W^{{2,2}} norm {:.6}", discrete_norms(&c, NormSpec::Sobolev { p: 2.0 })?);

    let r = resample_arclength(&c, 256)?;
    println!("resampled L  {:.12} (metric spread {:.2e})", r.length(), {
        let g = r.metric().samples();
        g.iter().cloned().fold(0.0, f64::max) - g.iter().cloned().fold(f64::INFINITY, f64::min)
    });

    let back = ClosedCurve::from_text(&c.to_text())?;
    println!("text roundtrip exact: {}", back.nodes() == c.nodes());
    Ok(())
}
