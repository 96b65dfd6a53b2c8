//! Sector and satellite antenna gain models.
//!
//! The sector pattern is the parabolic-in-dB azimuth/elevation model with a
//! front-back cap in azimuth and a sidelobe cap in elevation; the combined 3D
//! gain is the plain dB sum of the two cuts. The satellite beam is flat-top:
//! constant boresight gain inside the footprint, no coverage outside.

use serde::{Deserialize, Serialize};

use crate::geometry::{distance_2d, AngleDeg, GroundPosition, SatelliteGeometry};

/// Sector antenna pattern parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorPattern {
    /// Peak gain at boresight, dBi.
    pub max_gain_dbi: f64,
    /// Front-back ratio capping the azimuth attenuation, dB.
    pub front_back_ratio_db: f64,
    /// Sidelobe attenuation capping the elevation attenuation, dB.
    pub sidelobe_atten_db: f64,
    /// Azimuth half-power beamwidth, degrees.
    pub azimuth_hpbw_deg: f64,
    /// Elevation half-power beamwidth, degrees.
    pub elevation_hpbw_deg: f64,
}

impl Default for SectorPattern {
    fn default() -> Self {
        Self {
            max_gain_dbi: 14.0,
            front_back_ratio_db: 20.0,
            sidelobe_atten_db: 20.0,
            azimuth_hpbw_deg: 70.0,
            elevation_hpbw_deg: 65.0,
        }
    }
}

/// Mechanical plus electrical downtilt of one sector antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Downtilt {
    pub mech_deg: f64,
    pub elec_deg: f64,
}

impl Downtilt {
    pub fn new(mech_deg: f64, elec_deg: f64) -> Self {
        Self { mech_deg, elec_deg }
    }

    /// Total tilt applied to the elevation cut, degrees.
    pub fn total_deg(&self) -> f64 {
        self.mech_deg + self.elec_deg
    }
}

/// Flat-top satellite transmit beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SatelliteBeam {
    /// Gain inside the footprint, dBi.
    pub boresight_gain_dbi: f64,
    /// Footprint radius on the ground around the nadir point, meters.
    pub footprint_radius_m: f64,
}

impl Default for SatelliteBeam {
    fn default() -> Self {
        Self {
            boresight_gain_dbi: 40.0,
            footprint_radius_m: 500e3,
        }
    }
}

/// Azimuth-cut gain: `-min(12 (a/a3dB)^2, F) + Bmax`, dBi.
pub fn azimuth_gain(p: &SectorPattern, alpha_offset: AngleDeg) -> f64 {
    let ratio = alpha_offset.deg() / p.azimuth_hpbw_deg;
    -(12.0 * ratio * ratio).min(p.front_back_ratio_db) + p.max_gain_dbi
}

/// Elevation-cut gain relative to the tilted axis:
/// `-min(12 ((b - tilt)/b3dB)^2, S)`, dB.
pub fn elevation_gain(p: &SectorPattern, beta: AngleDeg, tilt: &Downtilt) -> f64 {
    let ratio = (beta.deg() - tilt.total_deg()) / p.elevation_hpbw_deg;
    -(12.0 * ratio * ratio).min(p.sidelobe_atten_db)
}

/// Combined 3D gain: dB sum of the azimuth and elevation cuts.
pub fn gain_3d(p: &SectorPattern, alpha: AngleDeg, beta: AngleDeg, tilt: &Downtilt) -> f64 {
    azimuth_gain(p, alpha) + elevation_gain(p, beta, tilt)
}

/// Satellite beam gain toward a user, dBi.
///
/// Constant inside the footprint (boundary inclusive); `-inf` outside, which
/// zeroes the linear-domain link budget.
pub fn satellite_gain(beam: &SatelliteBeam, user: &GroundPosition, sat: &SatelliteGeometry) -> f64 {
    if distance_2d(user, &sat.nadir) <= beam.footprint_radius_m {
        beam.boresight_gain_dbi
    } else {
        f64::NEG_INFINITY
    }
}
