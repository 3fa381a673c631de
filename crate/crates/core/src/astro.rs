//! Circular-orbit mechanics under secular J2.
//!
//! Every orbit here is circular. The J2 zonal term enters only through its
//! secular rates: a linear drift of the ascending node and a small change of
//! the argument-of-latitude rate. Propagation is analytic: position at any
//! instant follows from the epoch elements and those rates.
//!
//! Frames: the inertial frame is anchored so that the mean Sun sits at right
//! ascension 0 at `epoch_s = 0`, which is midnight UTC at Greenwich. The
//! Greenwich hour angle at that instant is therefore 180 deg, and local mean
//! solar time of any inertial direction is `12 h + (ra - ra_sun) / 15`.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::constants::{EARTH, SOLAR_DAY_S};
use crate::error::{invalid, Error, Result};
use crate::sphere::{wrap_360, wrap_hours, wrap_lon};

/// Describes the repeat condition used by [`find_rgt_orbits`]; written into
/// output metadata.
pub const REPEAT_CONDITION_NOTE: &str = "q * nodal_period = p * nodal_day; nodal_period = 2pi/(dM/dt + dw/dt) with secular J2, nodal_day = 2pi/(w_earth - dRAAN/dt)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    /// Argument of latitude at epoch.
    pub phase_deg: f64,
    /// Seconds from reference midnight UTC.
    pub epoch_s: f64,
}

impl OrbitSpec {
    pub fn new(
        altitude_km: f64,
        inclination_deg: f64,
        raan_deg: f64,
        phase_deg: f64,
        epoch_s: f64,
    ) -> Result<Self> {
        check_altitude(altitude_km)?;
        check_inclination(inclination_deg)?;
        if !raan_deg.is_finite() || !phase_deg.is_finite() || !epoch_s.is_finite() {
            return Err(invalid("orbit angles and epoch must be finite"));
        }
        Ok(Self {
            altitude_km,
            inclination_deg,
            raan_deg: wrap_360(raan_deg),
            phase_deg: wrap_360(phase_deg),
            epoch_s,
        })
    }

    pub fn circular(altitude_km: f64, inclination_deg: f64) -> Result<Self> {
        Self::new(altitude_km, inclination_deg, 0.0, 0.0, 0.0)
    }

    pub fn is_retrograde(&self) -> bool {
        self.inclination_deg > 90.0
    }

    /// Orbit whose ascending node sits at the given local solar time at epoch.
    pub fn from_ltan(
        altitude_km: f64,
        inclination_deg: f64,
        ltan_h: f64,
        phase_deg: f64,
        epoch_s: f64,
    ) -> Result<Self> {
        let raan = sun_right_ascension_deg(epoch_s) + 15.0 * (ltan_h - 12.0);
        Self::new(altitude_km, inclination_deg, raan, phase_deg, epoch_s)
    }

    /// Local solar time of the ascending node at epoch.
    pub fn ltan_h(&self) -> f64 {
        wrap_hours(12.0 + (self.raan_deg - sun_right_ascension_deg(self.epoch_s)) / 15.0)
    }
}

/// Secular angular rates of a circular orbit, rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularRates {
    pub mean_motion: f64,
    pub raan_rate: f64,
    /// Rate of the argument of latitude (mean anomaly plus perigee drift).
    pub arg_lat_rate: f64,
}

pub fn secular_rates(altitude_km: f64, inclination_deg: f64) -> Result<SecularRates> {
    check_altitude(altitude_km)?;
    check_inclination(inclination_deg)?;
    Ok(secular_rates_unchecked(altitude_km, inclination_deg))
}

pub(crate) fn secular_rates_unchecked(altitude_km: f64, inclination_deg: f64) -> SecularRates {
    let a = EARTH.semi_major_axis_km(altitude_km);
    let n = (EARTH.gravitational_parameter_km3_s2 / a.powi(3)).sqrt();
    let k = EARTH.j2 * (EARTH.equatorial_radius_km / a).powi(2);
    let c = inclination_deg.to_radians().cos();
    let raan_rate = -1.5 * k * n * c;
    let perigee_rate = 0.75 * k * n * (5.0 * c * c - 1.0);
    let mean_anomaly_rate = n * (1.0 + 0.75 * k * (3.0 * c * c - 1.0));
    SecularRates {
        mean_motion: n,
        raan_rate,
        arg_lat_rate: mean_anomaly_rate + perigee_rate,
    }
}

fn check_altitude(altitude_km: f64) -> Result<()> {
    if !(altitude_km.is_finite() && altitude_km > 0.0) {
        return Err(invalid(format!("altitude must be > 0 km, got {altitude_km}")));
    }
    Ok(())
}

fn check_inclination(inclination_deg: f64) -> Result<()> {
    if !(0.0..=180.0).contains(&inclination_deg) {
        return Err(invalid(format!(
            "inclination must lie in [0, 180] deg, got {inclination_deg}"
        )));
    }
    Ok(())
}

/// Keplerian period of a circular orbit, seconds.
pub fn orbital_period(altitude_km: f64) -> Result<f64> {
    check_altitude(altitude_km)?;
    Ok(kepler_period(EARTH.semi_major_axis_km(altitude_km)))
}

fn kepler_period(a_km: f64) -> f64 {
    2.0 * PI * (a_km.powi(3) / EARTH.gravitational_parameter_km3_s2).sqrt()
}

/// Secular J2 drift of the ascending node, deg/day (one day = 86400 s).
pub fn nodal_precession_rate(altitude_km: f64, inclination_deg: f64) -> Result<f64> {
    let r = secular_rates(altitude_km, inclination_deg)?;
    Ok(r.raan_rate.to_degrees() * SOLAR_DAY_S)
}

/// Inclination whose nodal drift equals the mean Sun's 360/365.2422 deg/day.
///
/// The drift is linear in cos(i), so the root is closed-form.
pub fn sun_synchronous_inclination(altitude_km: f64) -> Result<f64> {
    check_altitude(altitude_km)?;
    let per_cos = nodal_precession_rate(altitude_km, 0.0)?;
    let cos_i = EARTH.sun_mean_motion_deg_day() / per_cos;
    if !(-1.0..=1.0).contains(&cos_i) {
        return Err(Error::NoSunSyncSolution { altitude_km });
    }
    Ok(cos_i.acos().to_degrees())
}

/// Time between successive ascending-node crossings, seconds.
pub fn nodal_period(altitude_km: f64, inclination_deg: f64) -> Result<f64> {
    Ok(2.0 * PI / secular_rates(altitude_km, inclination_deg)?.arg_lat_rate)
}

/// Time for the Earth to turn once relative to the precessing orbit plane.
pub fn nodal_day(altitude_km: f64, inclination_deg: f64) -> Result<f64> {
    let r = secular_rates(altitude_km, inclination_deg)?;
    Ok(2.0 * PI / (EARTH.earth_rotation_rate_rad_s() - r.raan_rate))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RgtSolution {
    pub repeat_days_p: u32,
    pub orbits_q: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
}

impl RgtSolution {
    /// Length of one full repeat cycle (p nodal days), seconds.
    pub fn repeat_period_s(&self) -> f64 {
        self.repeat_days_p as f64 * nodal_day(self.altitude_km, self.inclination_deg).unwrap()
    }

    pub fn nodal_period_s(&self) -> f64 {
        nodal_period(self.altitude_km, self.inclination_deg).unwrap()
    }

    /// Orbit flying this track, ascending node over Greenwich at epoch 0.
    pub fn orbit(&self) -> OrbitSpec {
        OrbitSpec::new(self.altitude_km, self.inclination_deg, 180.0, 0.0, 0.0).unwrap()
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Repeat-condition residual: q nodal periods minus p nodal days, expressed
/// as `q * (w_earth - dRAAN/dt) - p * du/dt`. Increasing in altitude.
fn repeat_residual(altitude_km: f64, inclination_deg: f64, p: u32, q: u32) -> f64 {
    let r = secular_rates_unchecked(altitude_km, inclination_deg);
    q as f64 * (EARTH.earth_rotation_rate_rad_s() - r.raan_rate) - p as f64 * r.arg_lat_rate
}

/// Revolutions per nodal day at an altitude.
fn revs_per_nodal_day(altitude_km: f64, inclination_deg: f64) -> f64 {
    let r = secular_rates_unchecked(altitude_km, inclination_deg);
    r.arg_lat_rate / (EARTH.earth_rotation_rate_rad_s() - r.raan_rate)
}

const ALTITUDE_TOL_KM: f64 = 1e-3;

/// Every coprime (p, q) with p <= `max_repeat_days` whose repeat altitude
/// falls in the band, sorted by altitude.
///
/// The repeat condition is `q * T_node = p * T_nodal_day` where
/// `T_node = 2pi / (dM/dt + dw/dt)` carries the secular J2 correction and
/// `T_nodal_day = 2pi / (w_earth - dRAAN/dt)`. Altitude is found by
/// bisection to 1 m.
pub fn find_rgt_orbits(
    alt_min_km: f64,
    alt_max_km: f64,
    inclination_deg: f64,
    max_repeat_days: u32,
) -> Result<Vec<RgtSolution>> {
    check_altitude(alt_min_km)?;
    check_altitude(alt_max_km)?;
    check_inclination(inclination_deg)?;
    if alt_min_km >= alt_max_km {
        return Err(invalid("alt_min must be below alt_max"));
    }
    if max_repeat_days == 0 {
        return Err(invalid("max_repeat_days must be >= 1"));
    }
    let revs_hi = revs_per_nodal_day(alt_min_km, inclination_deg);
    let revs_lo = revs_per_nodal_day(alt_max_km, inclination_deg);
    let mut out = Vec::new();
    for p in 1..=max_repeat_days {
        let q_lo = (revs_lo * p as f64).floor().max(1.0) as u32;
        let q_hi = (revs_hi * p as f64).ceil() as u32;
        for q in q_lo..=q_hi {
            if gcd(p, q) != 1 {
                continue;
            }
            let f_lo = repeat_residual(alt_min_km, inclination_deg, p, q);
            let f_hi = repeat_residual(alt_max_km, inclination_deg, p, q);
            if f_lo > 0.0 || f_hi < 0.0 {
                continue;
            }
            let (mut lo, mut hi) = (alt_min_km, alt_max_km);
            while hi - lo > ALTITUDE_TOL_KM {
                let mid = 0.5 * (lo + hi);
                if repeat_residual(mid, inclination_deg, p, q) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push(RgtSolution {
                repeat_days_p: p,
                orbits_q: q,
                altitude_km: 0.5 * (lo + hi),
                inclination_deg,
            });
        }
    }
    out.sort_by(|a, b| a.altitude_km.total_cmp(&b.altitude_km));
    Ok(out)
}

/// Mean Sun right ascension, deg, at seconds from reference midnight.
pub fn sun_right_ascension_deg(t_s: f64) -> f64 {
    EARTH.sun_mean_motion_deg_day() * t_s / SOLAR_DAY_S
}

/// Greenwich hour angle, deg, at seconds from reference midnight.
pub fn greenwich_angle_deg(t_s: f64) -> f64 {
    sun_right_ascension_deg(t_s) + 180.0 + 360.0 * (t_s / SOLAR_DAY_S).fract()
}

/// Mean local solar time in hours, wrapped to [0, 24).
pub fn local_solar_time(lon_deg: f64, utc_s: f64) -> f64 {
    let utc_h = (utc_s / 3600.0).rem_euclid(24.0);
    wrap_hours(utc_h + lon_deg / 15.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Earth,
    Solar,
}

impl std::str::FromStr for Frame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "earth" => Ok(Frame::Earth),
            "solar" | "sun" => Ok(Frame::Solar),
            _ => Err(invalid(format!("unknown frame '{s}'"))),
        }
    }
}

/// One sub-satellite point. Both the earth-fixed longitude and the local
/// solar time are populated; the frame decides which one is exported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundTrackSample {
    pub time_s: f64,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub local_solar_time_h: f64,
    pub alt_km: f64,
}

/// Analytic propagator for one orbit. Cheap to construct and to evaluate.
#[derive(Debug, Clone, Copy)]
pub struct Propagator {
    orbit: OrbitSpec,
    rates: SecularRates,
    sin_i: f64,
    cos_i: f64,
}

impl Propagator {
    pub fn new(orbit: &OrbitSpec) -> Self {
        let (sin_i, cos_i) = orbit.inclination_deg.to_radians().sin_cos();
        Self {
            orbit: *orbit,
            rates: secular_rates_unchecked(orbit.altitude_km, orbit.inclination_deg),
            sin_i,
            cos_i,
        }
    }

    pub fn rates(&self) -> &SecularRates {
        &self.rates
    }

    /// Inertial unit vector at `dt_s` after epoch.
    #[inline]
    pub fn inertial_unit(&self, dt_s: f64) -> [f64; 3] {
        let u = self.orbit.phase_deg.to_radians() + self.rates.arg_lat_rate * dt_s;
        let raan = self.orbit.raan_deg.to_radians() + self.rates.raan_rate * dt_s;
        let (su, cu) = u.sin_cos();
        let (so, co) = raan.sin_cos();
        [
            co * cu - so * su * self.cos_i,
            so * cu + co * su * self.cos_i,
            su * self.sin_i,
        ]
    }

    /// Earth-fixed unit vector at `dt_s` after epoch.
    #[inline]
    pub fn earth_fixed_unit(&self, dt_s: f64) -> [f64; 3] {
        let v = self.inertial_unit(dt_s);
        let g = greenwich_angle_deg(self.orbit.epoch_s + dt_s).to_radians();
        let (sg, cg) = g.sin_cos();
        [cg * v[0] + sg * v[1], -sg * v[0] + cg * v[1], v[2]]
    }

    pub fn sample(&self, dt_s: f64) -> GroundTrackSample {
        let v = self.inertial_unit(dt_s);
        let lat = v[2].clamp(-1.0, 1.0).asin().to_degrees();
        let ra = v[1].atan2(v[0]).to_degrees();
        let t_abs = self.orbit.epoch_s + dt_s;
        GroundTrackSample {
            time_s: dt_s,
            lat_deg: lat,
            lon_deg: wrap_lon(ra - greenwich_angle_deg(t_abs)),
            local_solar_time_h: wrap_hours(12.0 + (ra - sun_right_ascension_deg(t_abs)) / 15.0),
            alt_km: self.orbit.altitude_km,
        }
    }
}

/// Samples at `0, step, 2*step, ...` up to and including `duration_s`.
pub fn propagate_ground_track(
    orbit: &OrbitSpec,
    duration_s: f64,
    step_s: f64,
) -> Result<Vec<GroundTrackSample>> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(invalid("duration must be > 0"));
    }
    if !(step_s.is_finite() && step_s > 0.0 && step_s <= duration_s) {
        return Err(invalid("step must satisfy 0 < step <= duration"));
    }
    let prop = Propagator::new(orbit);
    let n = (duration_s / step_s + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| prop.sample(k as f64 * step_s)).collect())
}

pub fn write_ground_track_csv<W: Write>(
    out: W,
    samples: &[GroundTrackSample],
    frame: Frame,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match frame {
        Frame::Earth => w.write_record(["time_s", "lat_deg", "lon_deg", "alt_km"])?,
        Frame::Solar => w.write_record(["time_s", "lat_deg", "lst_h", "alt_km"])?,
    }
    for s in samples {
        let horiz = match frame {
            Frame::Earth => s.lon_deg,
            Frame::Solar => s.local_solar_time_h,
        };
        w.write_record([
            format!("{:.3}", s.time_s),
            format!("{:.6}", s.lat_deg),
            format!("{:.6}", horiz),
            format!("{:.3}", s.alt_km),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::central_angle_deg;

    #[test]
    fn period_examples() {
        assert!((orbital_period(550.0).unwrap() - 5738.8).abs() < 1.0);
        let surface = kepler_period(EARTH.equatorial_radius_km);
        assert!((surface - 5069.3).abs() < 1.0);
        assert!(matches!(orbital_period(-10.0), Err(Error::InvalidInput(_))));
        assert!(orbital_period(0.0).is_err());
    }

    #[test]
    fn precession_examples() {
        assert!(nodal_precession_rate(560.0, 90.0).unwrap().abs() < 1e-12);
        // -1.5 J2 (Re/a)^2 n cos(i), evaluated by hand: -5.248 deg/day
        let west = nodal_precession_rate(560.0, 45.0).unwrap();
        assert!((west + 5.248).abs() < 0.001, "{west}");
        let east = nodal_precession_rate(560.0, 135.0).unwrap();
        assert!((east + west).abs() < 1e-12);
        assert!(nodal_precession_rate(560.0, 181.0).is_err());
        assert!(nodal_precession_rate(-1.0, 45.0).is_err());
    }

    #[test]
    fn sun_sync_examples() {
        let i560 = sun_synchronous_inclination(560.0).unwrap();
        assert!((i560 - 97.6).abs() < 0.2, "{i560}");
        let i800 = sun_synchronous_inclination(800.0).unwrap();
        assert!((i800 - 98.6).abs() < 0.2, "{i800}");
        assert!(matches!(
            sun_synchronous_inclination(6000.0),
            Err(Error::NoSunSyncSolution { .. })
        ));
        let rate = nodal_precession_rate(560.0, i560).unwrap();
        assert!((rate - 360.0 / 365.2422).abs() < 1e-6);
    }

    #[test]
    fn local_solar_time_examples() {
        assert!((local_solar_time(0.0, 43200.0) - 12.0).abs() < 1e-12);
        assert!((local_solar_time(15.0, 43200.0) - 13.0).abs() < 1e-12);
        assert!((local_solar_time(-180.0, 0.0) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn sample_lst_agrees_with_earth_longitude() {
        let o = OrbitSpec::new(700.0, 53.0, 33.0, 71.0, 5000.0).unwrap();
        for s in propagate_ground_track(&o, 20000.0, 777.0).unwrap() {
            let lst = local_solar_time(s.lon_deg, o.epoch_s + s.time_s);
            let d = (lst - s.local_solar_time_h).abs();
            assert!(d < 1e-9 || (24.0 - d) < 1e-9, "{lst} vs {}", s.local_solar_time_h);
        }
    }

    #[test]
    fn ltan_roundtrip() {
        let o = OrbitSpec::from_ltan(560.0, 97.6, 10.5, 0.0, 3600.0).unwrap();
        assert!((o.ltan_h() - 10.5).abs() < 1e-9);
        // ascending node at epoch: LST of the sub-point equals the LTAN
        let s = Propagator::new(&o).sample(0.0);
        assert!(s.lat_deg.abs() < 1e-12);
        assert!((s.local_solar_time_h - 10.5).abs() < 1e-9);
    }

    #[test]
    fn equatorial_track_stays_on_equator() {
        let o = OrbitSpec::circular(560.0, 0.0).unwrap();
        for s in propagate_ground_track(&o, 20000.0, 60.0).unwrap() {
            assert!(s.lat_deg.abs() < 1e-12);
        }
    }

    #[test]
    fn inclination_bounds_latitude() {
        let o = OrbitSpec::circular(560.0, 65.0).unwrap();
        let t = nodal_period(560.0, 65.0).unwrap();
        let track = propagate_ground_track(&o, t, 1.0).unwrap();
        let max = track.iter().map(|s| s.lat_deg.abs()).fold(0.0, f64::max);
        assert!((max - 65.0).abs() < 0.1, "{max}");
        let retro = OrbitSpec::circular(560.0, 97.6).unwrap();
        let track = propagate_ground_track(&retro, t, 10.0).unwrap();
        assert!(track.iter().all(|s| s.lat_deg.abs() <= 82.4 + 1e-9));
    }

    #[test]
    fn propagation_rejects_bad_steps() {
        let o = OrbitSpec::circular(560.0, 65.0).unwrap();
        assert!(propagate_ground_track(&o, 100.0, 0.0).is_err());
        assert!(propagate_ground_track(&o, 100.0, 200.0).is_err());
        assert!(propagate_ground_track(&o, 0.0, 1.0).is_err());
        let s = propagate_ground_track(&o, 100.0, 30.0).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s[3].time_s - 90.0).abs() < 1e-12);
    }

    #[test]
    fn rgt_one_day_family() {
        let sols = find_rgt_orbits(500.0, 1500.0, 65.0, 1).unwrap();
        let q14 = sols.iter().find(|s| s.orbits_q == 14).unwrap();
        let q13 = sols.iter().find(|s| s.orbits_q == 13).unwrap();
        // values from an independent Python bisection of the same residual
        assert!((q14.altitude_km - 842.47).abs() < 0.05, "{}", q14.altitude_km);
        assert!((q13.altitude_km - 1214.46).abs() < 0.05, "{}", q13.altitude_km);
        assert!(sols.windows(2).all(|w| w[0].altitude_km <= w[1].altitude_km));
        for s in &sols {
            assert_eq!(gcd(s.repeat_days_p, s.orbits_q), 1);
            let lhs = s.orbits_q as f64 * s.nodal_period_s();
            assert!((lhs - s.repeat_period_s()).abs() < 0.5, "{lhs}");
        }
    }

    #[test]
    fn rgt_band_edges() {
        // 15 rev/day sits at ~511.6 km; nothing else with p = 1 below 600 km
        let sols = find_rgt_orbits(500.0, 600.0, 65.0, 1).unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].orbits_q, 15);
        assert!(find_rgt_orbits(520.0, 600.0, 65.0, 1).unwrap().is_empty());
        assert!(find_rgt_orbits(600.0, 500.0, 65.0, 1).is_err());
        assert!(find_rgt_orbits(500.0, 600.0, 65.0, 0).is_err());
    }

    #[test]
    fn rgt_near_560_needs_longer_cycle() {
        let short = find_rgt_orbits(540.0, 580.0, 65.0, 3).unwrap();
        assert!(short.is_empty());
        let long = find_rgt_orbits(540.0, 580.0, 65.0, 7).unwrap();
        assert!(long.iter().any(|s| (s.altitude_km - 560.0).abs() < 10.0), "{long:?}");
    }

    #[test]
    fn rgt_track_closes() {
        for s in find_rgt_orbits(500.0, 1500.0, 65.0, 3).unwrap() {
            let prop = Propagator::new(&s.orbit());
            let a = prop.sample(0.0);
            let b = prop.sample(s.repeat_period_s());
            let d = central_angle_deg(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg);
            assert!(d < 0.01, "{s:?} misses by {d}");
        }
    }
}
