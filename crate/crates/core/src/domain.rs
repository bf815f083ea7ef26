//! Cell-centred grids for radially symmetric fields on `R^{N+1}` and for a
//! plain interval, with a finite-volume Laplacian and matching quadrature.
//!
//! Cell `i` covers `[i h, (i + 1) h]`. Face areas are `r_f^N`, cell volumes the
//! exact shell volumes `(r_{i+1/2}^{N+1} - r_{i-1/2}^{N+1}) / (N + 1)`, both
//! without the sphere factor `sigma_N`, which only enters [`integrate`]. The
//! axis face has zero area and the outer face carries a homogeneous Neumann
//! condition, so the discrete operators satisfy summation by parts exactly:
//! `integrate(u * laplacian(v)) == -integrate(grad_dot(u, v))`.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Radial,
    Line,
}

#[derive(Debug)]
struct Geometry {
    centers: Vec<f64>,
    volumes: Vec<f64>,
    /// `n + 1` face areas, first and last are the boundary faces.
    faces: Vec<f64>,
    /// `a_{i-1/2} / (h V_i)` and `a_{i+1/2} / (h V_i)`.
    lap_minus: Vec<f64>,
    lap_plus: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Grid {
    kind: GridKind,
    ambient_dim_minus_one: usize,
    r_max: f64,
    n_cells: usize,
    h: f64,
    sigma: f64,
    geom: Arc<Geometry>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.ambient_dim_minus_one == other.ambient_dim_minus_one
            && self.r_max == other.r_max
            && self.n_cells == other.n_cells
    }
}

/// Area of the unit `N`-sphere in `R^{N+1}`: `2 pi^{(N+1)/2} / Gamma((N+1)/2)`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => sphere_area(n - 2) * 2.0 * PI / (n as f64 - 1.0),
    }
}

impl Grid {
    pub fn radial(ambient_dim_minus_one: usize, r_max: f64, n_cells: usize) -> Result<Self> {
        if ambient_dim_minus_one == 0 {
            return Err(Error::InvalidGrid(
                "radial grids need N >= 1 (use a line grid for N = 0)".into(),
            ));
        }
        Self::build(GridKind::Radial, ambient_dim_minus_one, r_max, n_cells)
    }

    pub fn line(length: f64, n_cells: usize) -> Result<Self> {
        Self::build(GridKind::Line, 0, length, n_cells)
    }

    fn build(kind: GridKind, n: usize, r_max: f64, n_cells: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "n_cells must be at least {MIN_CELLS}, got {n_cells}"
            )));
        }
        let h = r_max / n_cells as f64;
        let p = n as i32;
        let centers: Vec<f64> = (0..n_cells).map(|i| (i as f64 + 0.5) * h).collect();
        let faces: Vec<f64> = (0..=n_cells)
            .map(|f| {
                let r = f as f64 * h;
                match kind {
                    GridKind::Line => {
                        if f == 0 || f == n_cells {
                            0.0
                        } else {
                            1.0
                        }
                    }
                    GridKind::Radial => {
                        if f == n_cells {
                            0.0
                        } else {
                            r.powi(p)
                        }
                    }
                }
            })
            .collect();
        let volumes: Vec<f64> = (0..n_cells)
            .map(|i| match kind {
                GridKind::Line => h,
                GridKind::Radial => {
                    let lo = i as f64 * h;
                    let hi = lo + h;
                    (hi.powi(p + 1) - lo.powi(p + 1)) / (n as f64 + 1.0)
                }
            })
            .collect();
        let lap_minus = (0..n_cells).map(|i| faces[i] / (h * volumes[i])).collect();
        let lap_plus = (0..n_cells)
            .map(|i| faces[i + 1] / (h * volumes[i]))
            .collect();
        let sigma = match kind {
            GridKind::Line => 1.0,
            GridKind::Radial => sphere_area(n),
        };
        Ok(Self {
            kind,
            ambient_dim_minus_one: n,
            r_max,
            n_cells,
            h,
            sigma,
            geom: Arc::new(Geometry {
                centers,
                volumes,
                faces,
                lap_minus,
                lap_plus,
            }),
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// `N`, so that the ambient space is `R^{N+1}` (`0` for line grids).
    pub fn ambient_dim_minus_one(&self) -> usize {
        self.ambient_dim_minus_one
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.geom.centers
    }

    /// Cell measures including the sphere factor.
    pub fn cell_measure(&self, i: usize) -> f64 {
        self.sigma * self.geom.volumes[i]
    }

    pub(crate) fn lap_coefficients(&self) -> (&[f64], &[f64]) {
        (&self.geom.lap_minus, &self.geom.lap_plus)
    }

    pub(crate) fn laplacian_slice(&self, v: &[f64], out: &mut [f64]) {
        let (cm, cp) = self.lap_coefficients();
        let n = self.n_cells;
        for i in 0..n {
            let mut acc = 0.0;
            if i > 0 {
                acc += cm[i] * (v[i - 1] - v[i]);
            }
            if i + 1 < n {
                acc += cp[i] * (v[i + 1] - v[i]);
            }
            out[i] = acc;
        }
    }

    /// Per-cell share of `sum_f a_f h D_f u D_f v`, normalised by cell volume.
    pub(crate) fn grad_dot_slice(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let g = &self.geom;
        let n = self.n_cells;
        let inv_h2 = 1.0 / (self.h * self.h);
        // face f sits between cells f-1 and f
        let face = |f: usize| -> f64 {
            if f == 0 || f == n {
                0.0
            } else {
                g.faces[f] * (u[f] - u[f - 1]) * (v[f] - v[f - 1]) * inv_h2
            }
        };
        let mut left = face(0);
        for i in 0..n {
            let right = face(i + 1);
            out[i] = 0.5 * self.h * (left + right) / g.volumes[i];
            left = right;
        }
    }

    pub(crate) fn integrate_slice(&self, density: &[f64]) -> f64 {
        let s: f64 = density
            .iter()
            .zip(self.geom.volumes.iter())
            .map(|(d, v)| d * v)
            .sum();
        self.sigma * s
    }
}

/// One scalar per cell at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for {} cells",
                values.len(),
                grid.n_cells()
            )));
        }
        if let Some(cell) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: time, cell });
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: &Grid, time: f64, mut profile: impl FnMut(f64) -> f64) -> Self {
        let values = grid.centers().iter().map(|&r| profile(r)).collect();
        Self {
            grid: grid.clone(),
            values,
            time,
        }
    }

    pub fn constant(grid: &Grid, time: f64, c: f64) -> Self {
        Self::from_fn(grid, time, |_| c)
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            grid: self.grid.clone(),
            values,
            time: self.time,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        self.with_values(
            self.values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["r", "v"])?;
        for (r, v) in self.grid.centers().iter().zip(self.values.iter()) {
            w.write_record([r.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a snapshot written by [`Field::write_csv`] back onto `grid`.
    pub fn read_csv(grid: &Grid, time: f64, path: impl AsRef<Path>) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path)?;
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["r", "v"] {
            return Err(Error::Io(format!("unexpected snapshot header {headers:?}")));
        }
        let mut values = Vec::with_capacity(grid.n_cells());
        for rec in rd.records() {
            let rec = rec?;
            let v: f64 = rec[1]
                .parse()
                .map_err(|e| Error::Io(format!("bad value {:?}: {e}", &rec[1])))?;
            values.push(v);
        }
        Field::new(grid.clone(), values, time)
    }
}

/// Radial Laplacian `v'' + (N / r) v'` in conservative form, Neumann at `r_max`
/// and even reflection at the axis.
pub fn laplacian(field: &Field) -> Field {
    let mut out = vec![0.0; field.values.len()];
    field.grid.laplacian_slice(&field.values, &mut out);
    field.with_values(out)
}

/// `|Dv|^2` per cell, built from face differences so that its integral is the
/// discrete Dirichlet energy paired with [`laplacian`].
pub fn grad_sq(field: &Field) -> Field {
    grad_dot(field, field)
}

pub fn grad_dot(u: &Field, v: &Field) -> Field {
    let mut out = vec![0.0; u.values.len()];
    u.grid.grad_dot_slice(&u.values, &v.values, &mut out);
    u.with_values(out)
}

/// `int density dx` over the ball (radial) or interval (line).
pub fn integrate(density: &Field) -> f64 {
    density.grid.integrate_slice(&density.values)
}

/// Tridiagonal factorisation of `I - c * Laplacian` for a fixed `c > 0`.
#[derive(Debug, Clone)]
pub struct ImplicitDiffusion {
    lower: Vec<f64>,
    /// Modified super-diagonal and inverse pivots of the Thomas sweep.
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl ImplicitDiffusion {
    pub fn new(grid: &Grid, c: f64) -> Self {
        let n = grid.n_cells();
        let (cm, cp) = grid.lap_coefficients();
        let lower: Vec<f64> = (0..n).map(|i| -c * cm[i]).collect();
        let upper: Vec<f64> = (0..n).map(|i| -c * cp[i]).collect();
        let diag: Vec<f64> = (0..n).map(|i| 1.0 + c * (cm[i] + cp[i])).collect();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_u = 0.0;
        for i in 0..n {
            let pivot = diag[i] - if i > 0 { lower[i] * prev_u } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            upper_mod[i] = upper[i] * inv_pivot[i];
            prev_u = upper_mod[i];
        }
        Self {
            lower,
            upper_mod,
            inv_pivot,
        }
    }

    /// Solve in place: `rhs` becomes `(I - c Lap)^{-1} rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        let mut prev = 0.0;
        for i in 0..n {
            let y = (rhs[i] - if i > 0 { self.lower[i] * prev } else { 0.0 }) * self.inv_pivot[i];
            rhs[i] = y;
            prev = y;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}
