//! Composite Simpson weights on uniform grids.

use statrs::function::gamma::ln_gamma;

/// Per-node weights of the composite Simpson rule on `points` equally
/// spaced nodes with spacing `h`. An even node count closes with the
/// Simpson 3/8 rule on the last three intervals; two nodes fall back to
/// the trapezoid.
pub fn simpson_weights(points: usize, h: f64) -> Vec<f64> {
    assert!(points >= 2, "Simpson rule needs at least two nodes");
    let mut w = vec![0.0; points];
    if points == 2 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    // Simpson part covers nodes 0..=simpson_end.
    let simpson_end = if points % 2 == 1 { points - 1 } else { points - 4 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if points.is_multiple_of(2) {
        let s = simpson_end;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}

/// Surface area of the unit sphere in R^n.
pub fn unit_sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * std::f64::consts::PI.powf(nf / 2.0) / ln_gamma(nf / 2.0).exp()
}

/// Fixed-order dot product of weights and integrand values.
pub fn weighted_sum(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(points: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = (b - a) / (points - 1) as f64;
        let w = simpson_weights(points, h);
        (0..points).map(|i| w[i] * f(a + i as f64 * h)).sum()
    }

    #[test]
    fn cubic_exact_for_odd_and_even_counts() {
        for points in [3, 4, 5, 6, 7, 10, 101, 1000] {
            let v = integrate(points, -1.0, 2.0, |x| x * x * x - 2.0 * x + 1.0);
            let exact = (16.0 - 1.0) / 4.0 - (4.0 - 1.0) + 3.0;
            assert!((v - exact).abs() < 1e-12, "points={points} got {v}");
        }
    }

    #[test]
    fn weights_sum_to_length() {
        for points in 2..40 {
            let w = simpson_weights(points, 0.1);
            let s: f64 = w.iter().sum();
            assert!((s - 0.1 * (points - 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let f = |x: f64| x.sin().exp();
        let exact = integrate(20001, 0.0, 2.0, f);
        let e1 = (integrate(41, 0.0, 2.0, f) - exact).abs();
        let e2 = (integrate(81, 0.0, 2.0, f) - exact).abs();
        let order = (e1 / e2).log2();
        assert!((order - 4.0).abs() < 0.3, "order {order}");
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-12);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }
}
