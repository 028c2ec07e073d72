use std::f64::consts::PI;

use super::waveform::Waveform;
use crate::error::{Error, Result};
use crate::mesh::{Point3, SurfaceMesh};

/// Largest `|p . d|` accepted for a plane wave.
const ORTHOGONALITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// `E(x, t) = p g(t - d . (x - x_ref) / c)`.
    PlaneWave {
        direction: Point3,
        polarization: Point3,
        reference: Point3,
    },
    /// Retarded Hertzian dipole `E = curl curl (q g(t - |x - z| / c) / (4 pi |x - z|))`.
    Dipole { position: Point3, moment: Point3 },
}

/// An incident electric field in vacuum with wave speed `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentField {
    source: Source,
    waveform: Waveform,
    c: f64,
}

fn check_speed(c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(format!("wave speed must be positive (got {c})")));
    }
    Ok(())
}

fn unit(v: Point3, what: &str) -> Result<Point3> {
    let n = v.norm();
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::Config(format!("{what} must be a non-zero finite vector")));
    }
    Ok(v / n)
}

/// Plane wave travelling along `d` with polarization `p`.
pub fn plane_wave(d: Point3, p: Point3, g: Waveform, c: f64, x_ref: Point3) -> Result<IncidentField> {
    check_speed(c)?;
    let direction = unit(d, "propagation direction")?;
    let polarization = unit(p, "polarization")?;
    if direction.dot(&polarization).abs() > ORTHOGONALITY_TOLERANCE {
        return Err(Error::Config(format!(
            "polarization is not orthogonal to the direction (p . d = {:e})",
            direction.dot(&polarization)
        )));
    }
    if !x_ref.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("plane wave reference point".into()));
    }
    Ok(IncidentField {
        source: Source::PlaneWave {
            direction,
            polarization,
            reference: x_ref,
        },
        waveform: g,
        c,
    })
}

/// Field of a point dipole at `z` with moment `q`.
pub fn dipole_field(z: Point3, q: Point3, g: Waveform, c: f64) -> Result<IncidentField> {
    check_speed(c)?;
    if !(z.iter().all(|v| v.is_finite()) && q.iter().all(|v| v.is_finite())) {
        return Err(Error::NonFinite("dipole position or moment".into()));
    }
    Ok(IncidentField {
        source: Source::Dipole { position: z, moment: q },
        waveform: g,
        c,
    })
}

impl IncidentField {
    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn waveform(&self) -> &Waveform {
        &self.waveform
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `d^order/dt^order` of the field, which is the same field driven by `g^(order)`.
    pub fn time_derivative(&self, order: usize) -> Self {
        Self {
            waveform: self.waveform.derivative(order),
            ..*self
        }
    }

    /// The field with opposite sign.
    pub fn negated(&self) -> Self {
        let source = match self.source {
            Source::PlaneWave {
                direction,
                polarization,
                reference,
            } => Source::PlaneWave {
                direction,
                polarization: -polarization,
                reference,
            },
            Source::Dipole { position, moment } => Source::Dipole {
                position,
                moment: -moment,
            },
        };
        Self { source, ..*self }
    }

    pub fn value(&self, x: &Point3, t: f64) -> Result<Point3> {
        match self.source {
            Source::PlaneWave {
                direction,
                polarization,
                reference,
            } => {
                let tau = t - direction.dot(&(x - reference)) / self.c;
                Ok(polarization * self.waveform.value(tau))
            }
            Source::Dipole { position, moment } => {
                let d = x - position;
                let r = d.norm();
                if r == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                let tau = t - r / self.c;
                if tau <= 0.0 {
                    return Ok(Point3::zeros());
                }
                let g = self.waveform.eval(tau, 0);
                let g1 = self.waveform.eval(tau, 1);
                let g2 = self.waveform.eval(tau, 2);
                let rh = d / r;
                let radial = rh * rh.dot(&moment);
                let near = (3.0 * radial - moment) * (g / (r * r * r) + g1 / (self.c * r * r));
                let far = (radial - moment) * (g2 / (self.c * self.c * r));
                Ok((near + far) / (4.0 * PI))
            }
        }
    }

    /// Checks that a plane wave reaches `mesh` only after `t = 0`, or that a
    /// dipole sits strictly inside it.
    pub fn check_against(&self, mesh: &SurfaceMesh) -> Result<()> {
        match self.source {
            Source::PlaneWave {
                direction, reference, ..
            } => {
                let lead = mesh
                    .vertices()
                    .iter()
                    .map(|x| direction.dot(&(x - reference)))
                    .fold(f64::INFINITY, f64::min);
                if !(lead > 0.0) {
                    return Err(Error::Config(format!(
                        "plane wave reference point is not upstream of the surface (min d.(x - x_ref) = {lead:e})"
                    )));
                }
                Ok(())
            }
            Source::Dipole { position, .. } => {
                let (distance, _) = mesh.distance_to(&position);
                if !(distance > 0.0 && mesh.contains(&position)) {
                    return Err(Error::Config(format!(
                        "dipole at {:?} is not strictly inside the scatterer",
                        position.as_slice()
                    )));
                }
                Ok(())
            }
        }
    }
}
