//! Closed-form references: the PEC wall and the PEC circular cylinder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::bessel::{bessel_j_all, bessel_y_all};
use crate::fem::problem::{Geometry, ScatteringProblem};
use crate::C64;

/// Relative size of the last retained term at which the series stops.
pub const SERIES_RTOL: f64 = 1e-10;

const MAX_ORDER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    /// Exact value of the far-field functional `R.x`.
    pub far_field: C64,
    /// Cross section in the normalization of the problem's geometry.
    pub cross_section: f64,
    /// Series terms used (0 for closed forms).
    pub terms: usize,
}

/// Partial sum `sum_{|n| < terms} J_n(ka) / H_n^(2)(ka) e^{i n phi}` over
/// `n = 0, +-1, ..., +-(terms - 1)`.
pub fn circle_series_partial(ka: f64, phi: f64, terms: usize) -> C64 {
    if terms == 0 {
        return C64::new(0.0, 0.0);
    }
    let n_max = terms - 1;
    let j = bessel_j_all(n_max, ka);
    let y = bessel_y_all(n_max, ka);
    (0..terms).map(|n| series_term(&j, &y, n, phi)).sum()
}

fn series_term(j: &[f64], y: &[f64], n: usize, phi: f64) -> C64 {
    let ratio = j[n] / C64::new(j[n], -y[n]);
    if n == 0 {
        ratio
    } else {
        ratio * (2.0 * (n as f64 * phi).cos())
    }
}

/// Series truncated once `n > ka` and the last term is below
/// `SERIES_RTOL` of the partial sum. Returns `(sum, terms)`.
pub fn circle_series(ka: f64, phi: f64) -> Result<(C64, usize)> {
    let j = bessel_j_all(MAX_ORDER, ka);
    let y = bessel_y_all(MAX_ORDER, ka);
    let mut sum = C64::new(0.0, 0.0);
    for n in 0..=MAX_ORDER {
        let t = series_term(&j, &y, n, phi);
        sum += t;
        // cos(n phi) can vanish for a single n; require the ratio itself to be small too
        let small = t.norm() < SERIES_RTOL * sum.norm() && (j[n] / y[n]).abs() < SERIES_RTOL;
        if n as f64 > ka && small {
            return Ok((sum, n + 1));
        }
    }
    Err(Error::Unsupported(format!(
        "cylinder series did not converge for ka = {ka}"
    )))
}

/// Angle between the observation and incident directions.
fn scattering_angle(p: &ScatteringProblem) -> f64 {
    let (d, s) = (p.incident_direction, p.observation_direction);
    (d[0] * s[1] - d[1] * s[0]).atan2(d[0] * s[0] + d[1] * s[1])
}

/// Exact far-field functional and cross section for slab and circle geometries.
///
/// Slab: the reflected wave is `-A e^{-ikx}`, so `R.x = -A` and the
/// reflectance is `|A|^2`. Circle: with `S` the cylinder series at the
/// scattering angle, `R.x = -4 i A S` and the echo width is `(4/k) |A S|^2`.
pub fn reference_solution(problem: &ScatteringProblem) -> Result<ReferenceSolution> {
    problem.validate()?;
    let amp = problem.amplitude;
    match problem.geometry {
        Geometry::Slab { .. } => Ok(ReferenceSolution {
            far_field: C64::new(-amp, 0.0),
            cross_section: amp * amp,
            terms: 0,
        }),
        Geometry::Circle { radius, .. } => {
            let k = problem.wavenumber;
            let (s, terms) = circle_series(k * radius, scattering_angle(problem))?;
            let far_field = C64::new(0.0, -4.0 * amp) * s;
            Ok(ReferenceSolution {
                far_field,
                cross_section: far_field.norm_sqr() / (4.0 * k),
                terms,
            })
        }
        Geometry::Polygon => Err(Error::Unsupported(
            "no closed-form reference for polygon scatterers".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn slab_reflection_has_unit_magnitude() {
        let r = reference_solution(&ScatteringProblem::slab(3.0, 2.0)).unwrap();
        assert_eq!(r.far_field.norm(), 1.0);
        assert_eq!(r.cross_section, 1.0);
    }

    #[test]
    fn truncation_control() {
        assert_ne!(
            circle_series_partial(1.0, PI, 0),
            circle_series_partial(1.0, PI, 1)
        );
        let (s, n) = circle_series(1.0, PI).unwrap();
        let doubled = circle_series_partial(1.0, PI, 2 * n);
        assert!((s - doubled).norm() < 1e-9 * s.norm());
        assert!((s - circle_series_partial(1.0, PI, n)).norm() < 1e-15);
    }

    #[test]
    fn small_cylinder_low_frequency_limit() {
        // ka -> 0: the n = 0 term dominates, J0/H0 ~ 1 / (1 - i (2/pi)(ln(ka/2) + gamma))
        let ka = 1e-3;
        let (s, _) = circle_series(ka, PI).unwrap();
        let approx = C64::new(1.0, 0.0)
            / C64::new(1.0, -2.0 / PI * ((ka / 2.0f64).ln() + 0.5772156649015329));
        assert!((s - approx).norm() < 1e-3 * approx.norm());
    }

    #[test]
    fn backscatter_echo_width_ka_one() {
        // independent sum of the +-n pairs written out in terms of complex exponentials
        let ka: f64 = 1.0;
        let j = bessel_j_all(30, ka);
        let y = bessel_y_all(30, ka);
        let mut direct = C64::new(0.0, 0.0);
        for n in -30i64..=30 {
            let m = n.unsigned_abs() as usize;
            // J_{-n}/H_{-n} = J_n/H_n
            direct += j[m] / C64::new(j[m], -y[m]) * C64::from_polar(1.0, n as f64 * PI);
        }
        let r = reference_solution(&ScatteringProblem::circle(1.0, 1.0, 5.0)).unwrap();
        assert!((r.cross_section - 4.0 * direct.norm_sqr()).abs() < 1e-12 * r.cross_section);
    }

    #[test]
    fn polygon_is_unsupported() {
        let mut p = ScatteringProblem::circle(1.0, 1.0, 2.0);
        p.geometry = Geometry::Polygon;
        assert!(matches!(reference_solution(&p), Err(Error::Unsupported(_))));
    }
}
