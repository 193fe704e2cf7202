//! Finite-difference gradients on grid densities.

use super::grid::{Geometry, GridDensity};
use super::par;

/// A vector field sampled on the nodes of a grid, one component per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn at(&self, i: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.components.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node-wise norm of the field.
    pub fn norms(&self, norm: Norm) -> Vec<f64> {
        (0..self.len()).map(|i| norm.eval(&self.at(i))).collect()
    }
}

/// Vector norms used for gradients and positions. `P(p)` is the l^p norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    Euclidean,
    P(f64),
}

impl Norm {
    pub fn eval(&self, v: &[f64]) -> f64 {
        match *self {
            Norm::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::P(p) if p.is_infinite() => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::P(p) => v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }

    /// The dual norm.
    pub fn dual(&self) -> Norm {
        match *self {
            Norm::Euclidean => Norm::Euclidean,
            Norm::P(1.0) => Norm::P(f64::INFINITY),
            Norm::P(p) if p.is_infinite() => Norm::P(1.0),
            Norm::P(p) => Norm::P(p / (p - 1.0)),
        }
    }
}

/// Gradient by finite differences.
///
/// Central differences where both neighbours lie in the support; at the
/// edge of the support (or of the domain) a second-order one-sided stencil
/// reaching only into the support. Nodes outside the support get zero.
/// On radial grids the derivative is `d/dr` and vanishes at `r = 0`.
pub fn gradient(f: &GridDensity) -> VectorField {
    let vals = f.values();
    let mask = f.support_mask();
    let radial = matches!(f.geometry(), Geometry::Radial { .. });
    let components = (0..f.axes().len())
        .map(|k| {
            let axis = f.axes()[k];
            let h = axis.step();
            let stride = f.stride(k);
            let n = axis.points;
            par::map_range(f.len(), |i| {
                if !mask[i] {
                    return 0.0;
                }
                let j = (i / stride) % n;
                if radial && j == 0 {
                    return 0.0;
                }
                let inside = |jj: isize| jj >= 0 && (jj as usize) < n && {
                    let idx = i as isize + (jj - j as isize) * stride as isize;
                    mask[idx as usize]
                };
                let at = |jj: isize| vals[(i as isize + (jj - j as isize) * stride as isize) as usize];
                let j = j as isize;
                match (inside(j - 1), inside(j + 1)) {
                    (true, true) => (at(j + 1) - at(j - 1)) / (2.0 * h),
                    (true, false) if inside(j - 2) => {
                        (3.0 * at(j) - 4.0 * at(j - 1) + at(j - 2)) / (2.0 * h)
                    }
                    (true, false) => (at(j) - at(j - 1)) / h,
                    (false, true) if inside(j + 2) => {
                        (-3.0 * at(j) + 4.0 * at(j + 1) - at(j + 2)) / (2.0 * h)
                    }
                    (false, true) => (at(j + 1) - at(j)) / h,
                    (false, false) => 0.0,
                }
            })
        })
        .collect();
    VectorField { components }
}

#[cfg(test)]
mod tests {
    use super::super::grid::Axis;
    use super::*;

    #[test]
    fn linear_ramp_has_unit_gradient() {
        let g = GridDensity::cartesian_1d(0.0, 1.0, 101, |x| x).unwrap();
        let d = gradient(&g);
        // node 0 has f = 0 and lies outside the support
        for i in 1..101 {
            assert!((d.components[0][i] - 1.0).abs() < 1e-12, "node {i}");
        }
    }

    #[test]
    fn gaussian_derivative_at_one() {
        let g = GridDensity::cartesian_1d(-5.0, 5.0, 1001, |x| (-0.5 * x * x).exp()).unwrap();
        let d = gradient(&g);
        let i = 600; // x = 1
        assert!((g.point(i)[0] - 1.0).abs() < 1e-12);
        let exact = -(-0.5f64).exp();
        let h = 0.01;
        assert!((d.components[0][i] - exact).abs() < h * h);
    }

    #[test]
    fn product_gaussian_gradient_vanishes_at_origin() {
        let ax = Axis::symmetric(4.0, 81).unwrap();
        let g = GridDensity::from_fn(Geometry::Cartesian, vec![ax, ax], |x| {
            (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp()
        })
        .unwrap();
        let d = gradient(&g);
        let origin = 40 * 81 + 40;
        assert_eq!(g.point(origin), vec![0.0, 0.0]);
        assert!(d.at(origin).iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn compact_support_uses_interior_stencil() {
        // (1 - x^2)_+ sampled with the support edge between nodes
        let g = GridDensity::cartesian_1d(-1.3, 1.3, 131, |x| (1.0 - x * x).max(0.0)).unwrap();
        let d = gradient(&g);
        for i in 0..g.len() {
            let x = g.point(i)[0];
            if g.values()[i] > 0.0 {
                assert!((d.components[0][i] + 2.0 * x).abs() < 1e-10, "x={x}");
            } else {
                assert_eq!(d.components[0][i], 0.0);
            }
        }
    }

    #[test]
    fn dual_norms() {
        assert_eq!(Norm::P(3.0).dual(), Norm::P(1.5));
        assert_eq!(Norm::P(1.0).dual(), Norm::P(f64::INFINITY));
        assert!((Norm::P(1.0).eval(&[1.0, -2.0]) - 3.0).abs() < 1e-15);
        assert!((Norm::P(f64::INFINITY).eval(&[1.0, -2.0]) - 2.0).abs() < 1e-15);
    }
}
