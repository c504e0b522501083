use crate::linalg::Mat;

/// `(intensity, semi-axis x, semi-axis y, center x, center y, rotation°)` of
/// the modified (higher-contrast) Shepp–Logan head.
const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

fn coords(i: usize, j: usize, n1: usize, n2: usize) -> (f64, f64) {
    let lin = |t: usize, n: usize| if n == 1 { 0.0 } else { -1.0 + 2.0 * t as f64 / (n - 1) as f64 };
    (lin(j, n2), -lin(i, n1))
}

/// Modified Shepp–Logan phantom on an `n1×n2` grid, values in `[0, 1]`.
pub fn shepp_logan(n1: usize, n2: usize) -> Mat {
    Mat::from_fn(n1, n2, |i, j| {
        let (x, y) = coords(i, j, n1, n2);
        let mut v = 0.0;
        for &(a, sa, sb, x0, y0, deg) in &ELLIPSES {
            let t = deg.to_radians();
            let (dx, dy) = (x - x0, y - y0);
            let xr = dx * t.cos() + dy * t.sin();
            let yr = -dx * t.sin() + dy * t.cos();
            if (xr / sa).powi(2) + (yr / sb).powi(2) <= 1.0 {
                v += a;
            }
        }
        v.clamp(0.0, 1.0)
    })
}

/// Shepp–Logan with a smooth intensity ramp and a gentle bump inside the
/// head: piecewise smooth rather than piecewise constant.
pub fn piecewise_smooth(n1: usize, n2: usize) -> Mat {
    let base = shepp_logan(n1, n2);
    Mat::from_fn(n1, n2, |i, j| {
        let v = base[(i, j)];
        if v == 0.0 {
            return 0.0;
        }
        let (x, y) = coords(i, j, n1, n2);
        let smooth = 0.1 * (x + 1.0) / 2.0 + 0.08 * (-(x * x + (y - 0.2).powi(2)) / 0.1).exp();
        (v + smooth).clamp(0.0, 1.0)
    })
}
