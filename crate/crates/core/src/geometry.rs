//! Positions, distances, and angles.
//!
//! Terrestrial links live on a flat ground plane; Earth curvature enters only
//! through the satellite slant-range and elevation geometry. Angles cross
//! module boundaries in degrees; radians are internal.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_378_000.0;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// A point on (or above) the ground plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPosition {
    pub x: f64,
    pub y: f64,
    /// Height above the ground plane; never negative.
    pub altitude: f64,
}

impl GroundPosition {
    pub fn new(x: f64, y: f64, altitude: f64) -> Self {
        debug_assert!(altitude >= 0.0, "altitude must be non-negative");
        Self { x, y, altitude }
    }
}

/// Satellite described by its altitude and the ground point directly beneath it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteGeometry {
    /// Orbit altitude above the ground, meters.
    pub altitude_m: f64,
    /// Sub-satellite point on the ground plane.
    pub nadir: GroundPosition,
    /// Earth radius used for curvature terms, meters.
    pub earth_radius_m: f64,
}

impl SatelliteGeometry {
    pub fn new(altitude_m: f64, nadir: GroundPosition) -> Self {
        debug_assert!(altitude_m > 0.0, "satellite altitude must be positive");
        Self {
            altitude_m,
            nadir,
            earth_radius_m: EARTH_RADIUS_M,
        }
    }
}

/// An angle in degrees.
///
/// Azimuth offsets are normalized to `(-180, 180]` by [`AngleDeg::wrapped`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AngleDeg(pub f64);

impl AngleDeg {
    pub fn deg(self) -> f64 {
        self.0
    }

    pub fn to_radians(self) -> f64 {
        self.0.to_radians()
    }

    /// Normalize into `(-180, 180]`.
    pub fn wrapped(self) -> AngleDeg {
        let mut a = self.0 % 360.0;
        if a <= -180.0 {
            a += 360.0;
        } else if a > 180.0 {
            a -= 360.0;
        }
        AngleDeg(a)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Horizontal (ground-plane) distance between two points, meters.
pub fn distance_2d(a: &GroundPosition, b: &GroundPosition) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// 3D distance between a gNB mast and a user: `sqrt(dh^2 + d2d^2)`.
pub fn distance_3d(gnb: &GroundPosition, user: &GroundPosition) -> f64 {
    let dh = gnb.altitude - user.altitude;
    dh.hypot(distance_2d(gnb, user))
}

/// Slant range from a ground user to a satellite seen at elevation `beta`.
///
/// `sqrt(R^2 sin^2(b) + h^2 + 2 h R) - R sin(b)`, with `b` restricted to
/// `[0, 90]` degrees.
pub fn slant_range(sat: &SatelliteGeometry, elevation: AngleDeg) -> Result<f64> {
    let beta = elevation.deg();
    if !(0.0..=90.0).contains(&beta) {
        return Err(SimError::AngleOutOfRange {
            name: "elevation",
            value_deg: beta,
        });
    }
    let r = sat.earth_radius_m;
    let h = sat.altitude_m;
    let s = elevation.to_radians().sin();
    Ok((r * r * s * s + h * h + 2.0 * h * r).sqrt() - r * s)
}

/// Elevation angle from a user to a satellite.
///
/// The horizontal distance to the nadir point is read as an arc on a sphere
/// of radius `R`, giving the central angle `gamma`; the elevation follows as
/// `atan((cos g - R/(R+h)) / sin g)`. Users at the nadir point see 90°.
/// Returns an error when the satellite sits below the local horizon.
pub fn satellite_elevation(user: &GroundPosition, sat: &SatelliteGeometry) -> Result<AngleDeg> {
    let arc = distance_2d(user, &sat.nadir);
    let gamma = arc / sat.earth_radius_m;
    if gamma == 0.0 {
        return Ok(AngleDeg(90.0));
    }
    let ratio = sat.earth_radius_m / (sat.earth_radius_m + sat.altitude_m);
    let beta = ((gamma.cos() - ratio) / gamma.sin()).atan().to_degrees();
    if beta < 0.0 {
        return Err(SimError::BelowHorizon {
            elevation_deg: beta,
        });
    }
    Ok(AngleDeg(beta))
}

/// Vertical angle from a sector antenna down to a user, degrees.
///
/// Positive means the antenna looks down. A user directly beneath the mast
/// (`d2d == 0`) is assigned 90° by convention.
pub fn vertical_angle_to_user(gnb: &GroundPosition, user: &GroundPosition) -> AngleDeg {
    let d2d = distance_2d(gnb, user);
    if d2d == 0.0 {
        return AngleDeg(90.0);
    }
    AngleDeg(((gnb.altitude - user.altitude) / d2d).atan().to_degrees())
}

/// Horizontal bearing from `from` to `to`, measured from the x-axis, degrees
/// in `(-180, 180]`.
pub fn bearing_deg(from: &GroundPosition, to: &GroundPosition) -> AngleDeg {
    AngleDeg((to.y - from.y).atan2(to.x - from.x).to_degrees()).wrapped()
}

/// Azimuth offset between a sector boresight and the bearing to a user,
/// wrapped into `(-180, 180]`.
pub fn azimuth_offset(boresight: AngleDeg, bearing_to_user: AngleDeg) -> AngleDeg {
    AngleDeg(bearing_to_user.deg() - boresight.deg()).wrapped()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
