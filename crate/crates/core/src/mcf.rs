//! Exact mean curvature flows and interface extraction.

use serde::Serialize;

use crate::domain::Field;
use crate::error::{Error, Result};
use crate::solver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    /// Round sphere in `R^{N+1}` moving with speed `N / r`.
    Sphere { n: usize },
    /// `S^{N-j} x R^j`, moving with speed `(N - j) / r`.
    Cylinder { n: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusLaw {
    pub kind: RadiusKind,
    pub r0: f64,
}

impl RadiusLaw {
    pub fn sphere(n: usize, r0: f64) -> Result<Self> {
        Self::build(RadiusKind::Sphere { n }, r0)
    }

    pub fn cylinder(n: usize, j: usize, r0: f64) -> Result<Self> {
        if j >= n {
            return Err(Error::InvalidArgument(format!(
                "cylinder needs j < N, got j = {j}, N = {n}"
            )));
        }
        Self::build(RadiusKind::Cylinder { n, j }, r0)
    }

    fn build(kind: RadiusKind, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "R0 must be positive, got {r0}"
            )));
        }
        let law = Self { kind, r0 };
        if law.codim_speed() == 0.0 {
            return Err(Error::InvalidArgument(
                "curvature factor must be positive".into(),
            ));
        }
        Ok(law)
    }

    fn codim_speed(&self) -> f64 {
        match self.kind {
            RadiusKind::Sphere { n } => n as f64,
            RadiusKind::Cylinder { n, j } => (n - j) as f64,
        }
    }

    pub fn extinction(&self) -> f64 {
        self.r0 * self.r0 / (2.0 * self.codim_speed())
    }
}

/// `sqrt(R0^2 - 2 N t)` (with `N - j` for cylinders).
pub fn sphere_radius(t: f64, law: &RadiusLaw) -> Result<f64> {
    let ext = law.extinction();
    if !(t >= 0.0 && t < ext) {
        return Err(Error::InvalidTime {
            t,
            range: format!("[0, {ext})"),
        });
    }
    Ok((law.r0 * law.r0 - 2.0 * law.codim_speed() * t).sqrt())
}

/// Height `t - ln cos p` of the translating grim reaper.
pub fn grim_reaper(p: f64, t: f64) -> Result<f64> {
    if !(p.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "|p| must be below pi/2, got {p}"
        )));
    }
    Ok(t - p.cos().ln())
}

/// Radius of the single sign change, by linear interpolation between the
/// bracketing cell centres.
pub fn extract_zero_level(field: &Field) -> Result<f64> {
    let r = field.grid.centers();
    let v = &field.values;
    let mut found = None;
    let mut count = 0;
    for i in 0..v.len() - 1 {
        let (a, b) = (v[i], v[i + 1]);
        if a == 0.0 && i > 0 {
            continue;
        }
        if (a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0) || (a == 0.0 && b != 0.0) {
            if b == 0.0 && i + 2 < v.len() && v[i + 2].signum() == a.signum() {
                // touches zero without crossing
                continue;
            }
            count += 1;
            found = Some(r[i] + (r[i + 1] - r[i]) * a / (a - b));
        }
    }
    match (count, found) {
        (0, _) | (_, None) => Err(Error::NoInterface),
        (1, Some(x)) => Ok(x),
        (c, _) => Err(Error::MultipleInterfaces { count: c }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusSample {
    pub t: f64,
    pub r_extracted: f64,
    pub r_exact: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusReport {
    pub samples: Vec<RadiusSample>,
    /// Maximum relative error over samples whose exact radius is at least `min_radius`.
    pub max_rel_error: f64,
    pub min_radius: f64,
    /// Largest increase of the extracted radius between consecutive samples.
    pub max_reexpansion: f64,
}

/// Compares the extracted interface with the law on every snapshot before
/// extinction that still has an interface.
pub fn radius_error(trajectory: &Trajectory, law: &RadiusLaw, min_radius: f64) -> RadiusReport {
    let mut samples = Vec::new();
    for f in &trajectory.snapshots {
        let Ok(exact) = sphere_radius(f.time, law) else {
            continue;
        };
        let Ok(got) = extract_zero_level(f) else {
            continue;
        };
        samples.push(RadiusSample {
            t: f.time,
            r_extracted: got,
            r_exact: exact,
            rel_error: (got - exact).abs() / exact,
        });
    }
    let max_rel_error = samples
        .iter()
        .filter(|s| s.r_exact >= min_radius)
        .map(|s| s.rel_error)
        .fold(0.0, f64::max);
    let max_reexpansion = samples
        .windows(2)
        .map(|w| w[1].r_extracted - w[0].r_extracted)
        .fold(0.0, f64::max);
    RadiusReport {
        samples,
        max_rel_error,
        min_radius,
        max_reexpansion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Grid;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_3, LN_2};

    #[test]
    fn sphere_law() {
        let law = RadiusLaw::sphere(1, 1.0).unwrap();
        assert_eq!(sphere_radius(0.0, &law).unwrap(), 1.0);
        assert_relative_eq!(sphere_radius(0.25, &law).unwrap(), 0.5f64.sqrt());
        assert_eq!(RadiusLaw::sphere(2, 1.0).unwrap().extinction(), 0.25);
        assert!(sphere_radius(0.5, &law).is_err());
        let cyl = RadiusLaw::cylinder(3, 1, 2.0).unwrap();
        assert_eq!(cyl.extinction(), 1.0);
        assert!(RadiusLaw::cylinder(2, 2, 1.0).is_err());
    }

    #[test]
    fn grim_reaper_values() {
        assert_eq!(grim_reaper(0.0, 0.7).unwrap(), 0.7);
        assert_relative_eq!(grim_reaper(FRAC_PI_3, 0.0).unwrap(), LN_2, epsilon = 1e-15);
        for p in [-1.2, -0.3, 0.0, 0.9] {
            let d = grim_reaper(p, 1.5).unwrap() - grim_reaper(p, 0.25).unwrap();
            assert_relative_eq!(d, 1.25, epsilon = 1e-14);
        }
        assert!(grim_reaper(std::f64::consts::FRAC_PI_2, 0.0).is_err());
    }

    #[test]
    fn zero_level_extraction() {
        let g = Grid::radial(1, 2.0, 512).unwrap();
        let lin = Field::from_fn(&g, 0.0, |r| 0.737 - r);
        assert!((extract_zero_level(&lin).unwrap() - 0.737).abs() < g.h() * 1e-12);
        let th = Field::from_fn(&g, 0.0, |r| ((0.5 - r) / 0.05).tanh());
        assert!((extract_zero_level(&th).unwrap() - 0.5).abs() < g.h());
        let flat = Field::constant(&g, 0.0, -1.0);
        assert_eq!(extract_zero_level(&flat), Err(Error::NoInterface));
        let two = Field::from_fn(&g, 0.0, |r| (r - 0.5) * (r - 1.5));
        assert_eq!(
            extract_zero_level(&two),
            Err(Error::MultipleInterfaces { count: 2 })
        );
    }

    #[test]
    fn synthetic_profiles_follow_law() {
        let law = RadiusLaw::sphere(1, 1.0).unwrap();
        let g = Grid::radial(1, 2.0, 400).unwrap();
        for k in 0..8 {
            let t = 0.05 * k as f64;
            let r = sphere_radius(t, &law).unwrap();
            let f = Field::from_fn(&g, t, |x| ((r - x) / 0.05).tanh());
            assert!((extract_zero_level(&f).unwrap() - r).abs() < g.h());
        }
    }
}
