//! Geodetic and timekeeping constants shared by every module.

/// Constants of the spherical Earth model with a J2 zonal term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthConstants {
    pub equatorial_radius_km: f64,
    pub gravitational_parameter_km3_s2: f64,
    pub j2: f64,
    pub sidereal_day_s: f64,
    pub tropical_year_days: f64,
    pub earth_rotation_rate_deg_s: f64,
}

/// The single authoritative instance.
pub const EARTH: EarthConstants = EarthConstants {
    equatorial_radius_km: 6378.137,
    gravitational_parameter_km3_s2: 398600.4418,
    j2: 1.08262668e-3,
    sidereal_day_s: 86164.0905,
    tropical_year_days: 365.2422,
    earth_rotation_rate_deg_s: 360.0 / 86164.0905,
};

pub const SOLAR_DAY_S: f64 = 86400.0;

impl EarthConstants {
    /// Mean apparent motion of the Sun along the equator, deg/day.
    pub fn sun_mean_motion_deg_day(&self) -> f64 {
        360.0 / self.tropical_year_days
    }

    pub fn earth_rotation_rate_rad_s(&self) -> f64 {
        self.earth_rotation_rate_deg_s.to_radians()
    }

    pub fn semi_major_axis_km(&self, altitude_km: f64) -> f64 {
        self.equatorial_radius_km + altitude_km
    }
}
