use otlab_core::ctransform::*;
use otlab_core::geometry::*;
use std::sync::Arc;
fn main() {
    for r in [2u32, 3, 4, 6] {
        let d = 2;
        let ga = Arc::new(sample_grid(Side::A, d, r, None).unwrap());
        let y0 = SimplexPoint::vertex(Side::B, d, 2);
        let y1 = SimplexPoint::vertex(Side::B, d, 3);
        let f = SampledPotential::from_fn(ga.clone(), |x| {
            pairing(x, &y0).unwrap().max(pairing(x, &y1).unwrap())
        });
        // smooth comparison: a single affine branch
        let fs = SampledPotential::from_fn(ga.clone(), |x| pairing(x, &y0).unwrap());
        let chart = Chart::star(Side::A, 0, 1);
        let cp = chart_potential(&f, &chart).unwrap();
        let cps = chart_potential(&fs, &chart).unwrap();
        let params = GradientParams { radius_factor: 2.6, stability_factor: 1e9, stability_floor: 0.0, image_slack: 1e-6 };
        for (name, c) in [("kink", &cp), ("affine", &cps)] {
            let g0 = chart_gradient(c, &[0.0,0.0], ga.spacing, &params).unwrap();
            let mut worst: f64 = 0.0;
            for axis in 0..2 { for sign in [-1.0f64, 1.0] {
                let mut x = vec![0.0, 0.0];
                x[axis] += sign * 0.5 * ga.spacing;
                if let Ok(g) = chart_gradient(c, &x, ga.spacing, &params) {
                    let dev = g.iter().zip(&g0).map(|(a,b)| (a-b).abs()).fold(0.0f64, f64::max);
                    worst = worst.max(dev);
                }
            }}
            println!("r={r} spacing={:.3} {name}: worst shifted-fit dev = {:.4}", ga.spacing, worst);
        }
    }
}
