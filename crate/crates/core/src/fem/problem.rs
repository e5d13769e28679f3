use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::C64;

/// Scatterer description used for mesh generation and reference values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    /// PEC wall at `x = 0`, computational interval `[0, length]`.
    Slab { length: f64 },
    /// PEC cylinder of `radius` centered at the origin, truncated at `outer_radius`.
    Circle { radius: f64, outer_radius: f64 },
    /// Any other 2-D scatterer supplied as a mesh file; no closed-form reference.
    Polygon,
}

/// Outer-boundary condition for the outgoing scattered field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbsorbingBoundary {
    /// `dE/dn = -ik E`: the plain `ik` surface mass term.
    #[default]
    FirstOrder,
    /// `dE/dn = -(ik + 1/(2 rho)) E` on a circle of radius `rho`; 2-D only.
    Curvature,
    /// Second-order Bayliss-Turkel condition on a circle of radius `rho`,
    /// `dE/dn = [(2k^2 - 3ik/rho - 3/(4 rho^2)) E + d^2E/ds^2] / (2/rho + 2ik)`
    /// with `s` the arclength; 2-D only.
    SecondOrder,
}

/// Time-harmonic scalar scattering setup, time convention `e^{+i omega t}`.
///
/// The incident field is `amplitude * exp(-i k d.r)`, a plane wave moving
/// along `d`. The unknown is the scattered field, which satisfies
/// `E_s = -E_i` on the scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringProblem {
    pub wavenumber: f64,
    pub incident_direction: [f64; 2],
    /// Far-field observation direction `s`.
    pub observation_direction: [f64; 2],
    pub geometry: Geometry,
    #[serde(default = "unit")]
    pub amplitude: f64,
    #[serde(default)]
    pub absorbing: AbsorbingBoundary,
}

fn unit() -> f64 {
    1.0
}

impl ScatteringProblem {
    /// Slab lit from the right (`d = -x`): the incident wave `e^{ikx}`
    /// reflects off the wall at the origin.
    pub fn slab(k: f64, length: f64) -> Self {
        ScatteringProblem {
            wavenumber: k,
            incident_direction: [-1.0, 0.0],
            observation_direction: [1.0, 0.0],
            geometry: Geometry::Slab { length },
            amplitude: 1.0,
            absorbing: AbsorbingBoundary::FirstOrder,
        }
    }

    /// Circle lit along `+x`, observed in backscatter.
    pub fn circle(k: f64, radius: f64, outer_radius: f64) -> Self {
        ScatteringProblem {
            wavenumber: k,
            incident_direction: [1.0, 0.0],
            observation_direction: [-1.0, 0.0],
            geometry: Geometry::Circle {
                radius,
                outer_radius,
            },
            amplitude: 1.0,
            absorbing: AbsorbingBoundary::FirstOrder,
        }
    }

    pub fn with_absorbing(mut self, absorbing: AbsorbingBoundary) -> Self {
        self.absorbing = absorbing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavenumber > 0.0 && self.wavenumber.is_finite()) {
            return Err(contract(format!(
                "wavenumber must be positive, got {}",
                self.wavenumber
            )));
        }
        for (name, d) in [
            ("incident", self.incident_direction),
            ("observation", self.observation_direction),
        ] {
            let n = d[0].hypot(d[1]);
            if (n - 1.0).abs() > 1e-12 {
                return Err(contract(format!(
                    "{name} direction has norm {n}, expected 1"
                )));
            }
        }
        if !self.amplitude.is_finite() {
            return Err(contract("incident amplitude must be finite"));
        }
        match self.geometry {
            Geometry::Slab { length } if !(length > 0.0) => {
                Err(contract("slab length must be positive"))
            }
            Geometry::Circle {
                radius,
                outer_radius,
            } if !(radius > 0.0 && outer_radius > radius) => {
                Err(contract("circle needs 0 < radius < outer_radius"))
            }
            _ => Ok(()),
        }
    }

    pub fn incident_field(&self, p: [f64; 2]) -> C64 {
        let d = self.incident_direction;
        C64::from_polar(
            self.amplitude,
            -self.wavenumber * (d[0] * p[0] + d[1] * p[1]),
        )
    }

    /// Cross-section normalization appropriate to the geometry.
    pub fn cross_section(&self) -> CrossSection {
        match self.geometry {
            Geometry::Slab { .. } => CrossSection::Reflectance,
            _ => CrossSection::EchoWidth { k: self.wavenumber },
        }
    }
}

/// Normalization from the far-field functional `R.x` to a cross section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CrossSection {
    /// Three-dimensional radar cross section, `|R.x|^2 / (4 pi)`.
    Rcs3d,
    /// Two-dimensional echo width, `|R.x|^2 / (4 k)`.
    EchoWidth { k: f64 },
    /// 1-D power reflection coefficient `|R.x|^2`.
    Reflectance,
}

impl CrossSection {
    pub fn prefactor(&self) -> f64 {
        match *self {
            CrossSection::Rcs3d => 1.0 / (4.0 * PI),
            CrossSection::EchoWidth { k } => 1.0 / (4.0 * k),
            CrossSection::Reflectance => 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CrossSection::Rcs3d => "rcs_3d",
            CrossSection::EchoWidth { .. } => "echo_width",
            CrossSection::Reflectance => "reflectance",
        }
    }
}
