//! Densities sampled on regular grids.

use serde::{Deserialize, Serialize};

use super::par;
use super::quadrature::{simpson_weights, unit_sphere_area, weighted_sum};
use crate::error::{Error, Result};

/// A uniform axis `lower..=upper` with `points` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lower: f64, upper: f64, points: usize) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidParams(format!(
                "axis bounds must be finite with lower < upper, got [{lower}, {upper}]"
            )));
        }
        if points < 3 {
            return Err(Error::InvalidParams(format!(
                "axis needs at least 3 nodes, got {points}"
            )));
        }
        Ok(Axis {
            lower,
            upper,
            points,
        })
    }

    /// Symmetric axis `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, points: usize) -> Result<Self> {
        Axis::new(-half_width, half_width, points)
    }

    pub fn step(&self) -> f64 {
        (self.upper - self.lower) / (self.points - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.points {
            self.upper
        } else {
            self.lower + i as f64 * self.step()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.coord(i)).collect()
    }

    fn shifted(&self, d: f64) -> Axis {
        Axis {
            lower: self.lower + d,
            upper: self.upper + d,
            points: self.points,
        }
    }

    fn scaled(&self, c: f64) -> Axis {
        Axis {
            lower: self.lower * c,
            upper: self.upper * c,
            points: self.points,
        }
    }
}

/// How grid coordinates map to points of R^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    /// Full tensor grid, one axis per dimension (n = 1 or 2).
    Cartesian,
    /// Radially symmetric density on R^dim stored along `r = ||x||`.
    Radial { dim: usize },
}

/// A nonnegative density on a regular grid.
///
/// Values are stored row-major (last axis fastest). The support mask is
/// derived from the values on demand, so it is always exactly `{f > 0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRecord", into = "GridRecord")]
pub struct GridDensity {
    geometry: Geometry,
    axes: Vec<Axis>,
    values: Vec<f64>,
}

/// On-disk JSON layout of a [`GridDensity`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridRecord {
    pub dim: usize,
    pub geometry: Geometry,
    pub axes: Vec<Axis>,
    pub values: Vec<f64>,
}

impl TryFrom<GridRecord> for GridDensity {
    type Error = Error;

    fn try_from(r: GridRecord) -> Result<Self> {
        let g = GridDensity::new(r.geometry, r.axes, r.values)?;
        if g.dim() != r.dim {
            return Err(Error::InvalidParams(format!(
                "record declares dim {} but geometry implies {}",
                r.dim,
                g.dim()
            )));
        }
        Ok(g)
    }
}

impl From<GridDensity> for GridRecord {
    fn from(g: GridDensity) -> Self {
        GridRecord {
            dim: g.dim(),
            geometry: g.geometry,
            axes: g.axes,
            values: g.values,
        }
    }
}

impl GridDensity {
    pub fn new(geometry: Geometry, axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        match geometry {
            Geometry::Cartesian => {
                if !(1..=2).contains(&axes.len()) {
                    return Err(Error::InvalidParams(format!(
                        "cartesian grids support 1 or 2 axes, got {}",
                        axes.len()
                    )));
                }
            }
            Geometry::Radial { dim } => {
                if dim == 0 || axes.len() != 1 || axes[0].lower != 0.0 {
                    return Err(Error::InvalidParams(
                        "radial grids need dim >= 1 and a single axis starting at r = 0".into(),
                    ));
                }
            }
        }
        for a in &axes {
            Axis::new(a.lower, a.upper, a.points)?;
        }
        let expected: usize = axes.iter().map(|a| a.points).product();
        if values.len() != expected {
            return Err(Error::InvalidParams(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        let g = GridDensity {
            geometry,
            axes,
            values,
        };
        for (i, &v) in g.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    index: i,
                    coords: g.point(i),
                    value: v,
                });
            }
            if v < 0.0 {
                return Err(Error::Negative { index: i, value: v });
            }
        }
        Ok(g)
    }

    /// Sample `f` at every node. For radial grids `f` receives `[r]`.
    pub fn from_fn<F>(geometry: Geometry, axes: Vec<Axis>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let shell = GridDensity {
            geometry,
            axes,
            values: Vec::new(),
        };
        let n: usize = shell.axes.iter().map(|a| a.points).product();
        let values = par::map_range(n, |i| f(&shell.point(i)));
        GridDensity::new(shell.geometry, shell.axes, values)
    }

    pub fn cartesian_1d<F>(lower: f64, upper: f64, points: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let axis = Axis::new(lower, upper, points)?;
        GridDensity::from_fn(Geometry::Cartesian, vec![axis], |x| f(x[0]))
    }

    pub fn radial<F>(dim: usize, r_max: f64, points: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let axis = Axis::new(0.0, r_max, points)?;
        GridDensity::from_fn(Geometry::Radial { dim }, vec![axis], |x| f(x[0]))
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Dimension n of the ambient space.
    pub fn dim(&self) -> usize {
        match self.geometry {
            Geometry::Cartesian => self.axes.len(),
            Geometry::Radial { dim } => dim,
        }
    }

    /// Per-axis index of flat node `i`.
    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            idx[k] = i % a.points;
            i /= a.points;
        }
        idx
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.points).product()
    }

    /// Grid coordinates of node `i` (the radius for radial grids).
    pub fn point(&self, i: usize) -> Vec<f64> {
        self.multi_index(i)
            .into_iter()
            .zip(&self.axes)
            .map(|(j, a)| a.coord(j))
            .collect()
    }

    /// Euclidean norm of node `i`.
    pub fn radius(&self, i: usize) -> f64 {
        self.point(i).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn support_mask(&self) -> Vec<bool> {
        self.values.iter().map(|&v| v > 0.0).collect()
    }

    /// Quadrature weights: tensor Simpson, times `|S^{n-1}| r^{n-1}` on
    /// radial grids.
    pub fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| simpson_weights(a.points, a.step()))
            .collect();
        let mut w: Vec<f64> = (0..self.len())
            .map(|i| {
                self.multi_index(i)
                    .iter()
                    .enumerate()
                    .map(|(k, &j)| per_axis[k][j])
                    .product()
            })
            .collect();
        if let Geometry::Radial { dim } = self.geometry {
            let area = unit_sphere_area(dim);
            let axis = &self.axes[0];
            for (j, wj) in w.iter_mut().enumerate() {
                *wj *= area * axis.coord(j).powi(dim as i32 - 1);
            }
        }
        w
    }

    /// Integrate node-wise integrand values over the grid.
    pub fn integrate_nodes(&self, integrand: &[f64]) -> Result<f64> {
        debug_assert_eq!(integrand.len(), self.len());
        if let Some((i, &v)) = integrand.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                coords: self.point(i),
                value: v,
            });
        }
        Ok(weighted_sum(&self.weights(), integrand))
    }

    /// Total mass.
    pub fn integrate(&self) -> Result<f64> {
        self.integrate_nodes(&self.values)
    }

    /// Integrate `g(coords, f(x))` over the grid.
    pub fn integrate_fn<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(&[f64], f64) -> f64 + Sync + Send,
    {
        let vals = par::map_range(self.len(), |i| g(&self.point(i), self.values[i]));
        self.integrate_nodes(&vals)
    }

    /// `E_f[h(x)]` for a normalized density.
    pub fn expectation<H>(&self, h: H) -> Result<f64>
    where
        H: Fn(&[f64]) -> f64 + Sync + Send,
    {
        self.integrate_fn(|x, v| if v > 0.0 { v * h(x) } else { 0.0 })
    }

    /// Rescale to unit mass.
    pub fn normalize(&self) -> Result<GridDensity> {
        let mass = self.integrate()?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::ZeroMass(mass));
        }
        self.with_values(self.values.iter().map(|v| v / mass).collect())
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<GridDensity> {
        GridDensity::new(self.geometry, self.axes.clone(), values)
    }

    /// Apply `h` to every value (same grid).
    pub fn map_values<H>(&self, h: H) -> Result<GridDensity>
    where
        H: Fn(f64) -> f64,
    {
        self.with_values(self.values.iter().map(|&v| h(v)).collect())
    }

    /// Mean vector; zero for radial grids.
    pub fn mean(&self) -> Result<Vec<f64>> {
        match self.geometry {
            Geometry::Radial { dim } => Ok(vec![0.0; dim]),
            Geometry::Cartesian => (0..self.axes.len())
                .map(|k| self.expectation(|x| x[k]))
                .collect(),
        }
    }

    /// Density of `X + shift` (cartesian only): the grid moves, values stay.
    pub fn translated(&self, shift: &[f64]) -> Result<GridDensity> {
        if self.geometry != Geometry::Cartesian || shift.len() != self.axes.len() {
            return Err(Error::InvalidParams(
                "translation needs a cartesian grid and a matching shift vector".into(),
            ));
        }
        let axes = self
            .axes
            .iter()
            .zip(shift)
            .map(|(a, d)| a.shifted(*d))
            .collect();
        GridDensity::new(self.geometry, axes, self.values.clone())
    }

    /// Density of `c X` for `c > 0`: coordinates scale by `c`, values by `c^-n`.
    pub fn dilated(&self, c: f64) -> Result<GridDensity> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParams(format!("dilation factor {c}")));
        }
        let axes = self.axes.iter().map(|a| a.scaled(c)).collect();
        let s = c.powi(-(self.dim() as i32));
        GridDensity::new(
            self.geometry,
            axes,
            self.values.iter().map(|v| v * s).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<GridDensity> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParams(e.to_string()))
    }
}
