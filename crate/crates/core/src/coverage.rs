//! Footprint geometry and minimum-satellite sizing.
//!
//! Two sizing problems live here:
//!
//! * how many satellites, equally spaced in time along one repeat ground
//!   track, keep every point of that track inside some footprint at every
//!   sampled instant ([`min_sats_single_rgt`]);
//! * the smallest Walker-delta shell `i:T/P/F` that keeps a latitude band
//!   covered at every sampled instant ([`min_walker_total`]).
//!
//! Both are answered by search against a sampled verification oracle, so a
//! reported minimum always passes its oracle and (for the track) fails at
//! one satellite fewer.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::astro::{secular_rates_unchecked, Propagator, RgtSolution};
use crate::constants::EARTH;
use crate::error::{invalid, Error, Result};
use crate::sphere::{central_angle_deg, dot, unit_vector};

pub const DEFAULT_MIN_ELEVATION_DEG: f64 = 25.0;

/// Minimum elevation angle and the earth central angle it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootprintSpec {
    /// `None` when the footprint was given directly as a central angle.
    pub min_elevation_deg: Option<f64>,
    pub altitude_km: Option<f64>,
    lambda_deg: f64,
}

impl FootprintSpec {
    pub fn new(altitude_km: f64, min_elevation_deg: f64) -> Result<Self> {
        let lambda_deg = earth_central_angle(altitude_km, min_elevation_deg)?;
        if lambda_deg <= 0.0 {
            return Err(invalid("footprint central angle must be positive"));
        }
        Ok(Self {
            min_elevation_deg: Some(min_elevation_deg),
            altitude_km: Some(altitude_km),
            lambda_deg,
        })
    }

    /// Footprint given directly by its central angle, in (0, 180].
    pub fn from_central_angle(lambda_deg: f64) -> Result<Self> {
        if !(lambda_deg > 0.0 && lambda_deg <= 180.0) {
            return Err(invalid(format!("central angle must be in (0, 180], got {lambda_deg}")));
        }
        Ok(Self {
            min_elevation_deg: None,
            altitude_km: None,
            lambda_deg,
        })
    }

    pub fn lambda_deg(&self) -> f64 {
        self.lambda_deg
    }

    /// Same elevation mask re-evaluated at another altitude. Footprints given
    /// as a raw central angle are returned unchanged.
    pub fn at_altitude(&self, altitude_km: f64) -> Result<Self> {
        match self.min_elevation_deg {
            Some(e) => Self::new(altitude_km, e),
            None => Ok(*self),
        }
    }
}

/// Earth central angle of the coverage circle, degrees:
/// `acos(Re / (Re + h) * cos(eps)) - eps`.
pub fn earth_central_angle(altitude_km: f64, min_elevation_deg: f64) -> Result<f64> {
    if !(altitude_km.is_finite() && altitude_km > 0.0) {
        return Err(invalid(format!("altitude must be > 0 km, got {altitude_km}")));
    }
    if !(0.0..90.0).contains(&min_elevation_deg) {
        return Err(invalid(format!(
            "minimum elevation must lie in [0, 90) deg, got {min_elevation_deg}"
        )));
    }
    let rho = EARTH.equatorial_radius_km / (EARTH.equatorial_radius_km + altitude_km);
    let eps = min_elevation_deg.to_radians();
    Ok(((rho * eps.cos()).clamp(-1.0, 1.0).acos() - eps).to_degrees())
}

/// True iff the target lies within `lambda_deg` of the sub-satellite point.
pub fn is_covered(sat_lat: f64, sat_lon: f64, tgt_lat: f64, tgt_lon: f64, lambda_deg: f64) -> bool {
    central_angle_deg(sat_lat, sat_lon, tgt_lat, tgt_lon) <= lambda_deg
}

/// Sampling resolution and search caps shared by the sizing operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageOptions {
    pub time_step_s: f64,
    pub grid_step_deg: f64,
    pub max_rgt_sats: u32,
    pub max_walker_total: u32,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        Self {
            time_step_s: 60.0,
            grid_step_deg: 1.0,
            max_rgt_sats: 100_000,
            max_walker_total: 20_000,
        }
    }
}

impl CoverageOptions {
    fn validate(&self) -> Result<()> {
        if !(self.time_step_s > 0.0 && self.grid_step_deg > 0.0 && self.grid_step_deg <= 90.0) {
            return Err(invalid("time step and grid step must be positive"));
        }
        Ok(())
    }
}

/// Latitude/longitude grid restricted to a band, with one coverage flag per
/// cell. Cells are addressed by their centers.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub lat_step_deg: f64,
    pub lon_step_deg: f64,
    pub band_limit_deg: f64,
    n_lat: usize,
    n_lon: usize,
    rows: Vec<usize>,
    covered: Vec<bool>,
}

impl CoverageGrid {
    pub fn new(lat_step_deg: f64, lon_step_deg: f64, band_limit_deg: f64) -> Result<Self> {
        if !(lat_step_deg > 0.0 && lon_step_deg > 0.0) {
            return Err(invalid("grid steps must be positive"));
        }
        if !(0.0..=90.0).contains(&band_limit_deg) {
            return Err(invalid("band limit must lie in [0, 90]"));
        }
        let n_lat = (180.0 / lat_step_deg - 1e-9).ceil() as usize;
        let n_lon = (360.0 / lon_step_deg - 1e-9).ceil() as usize;
        let rows: Vec<usize> = (0..n_lat)
            .filter(|&r| {
                let lat = -90.0 + (r as f64 + 0.5) * lat_step_deg;
                lat.abs() <= band_limit_deg + 1e-9
            })
            .collect();
        let covered = vec![false; rows.len() * n_lon];
        Ok(Self {
            lat_step_deg,
            lon_step_deg,
            band_limit_deg,
            n_lat,
            n_lon,
            rows,
            covered,
        })
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    /// Number of cells inside the band.
    pub fn len(&self) -> usize {
        self.covered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covered.is_empty()
    }

    /// Centers `(lat, lon)` of the in-band cells, row-major.
    pub fn cell_centers(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for &r in &self.rows {
            let lat = -90.0 + (r as f64 + 0.5) * self.lat_step_deg;
            for c in 0..self.n_lon {
                out.push((lat, -180.0 + (c as f64 + 0.5) * self.lon_step_deg));
            }
        }
        out
    }

    /// Recompute every flag against a set of sub-satellite unit vectors.
    pub fn fill(&mut self, sats: &[[f64; 3]], lambda_deg: f64) {
        let index = SatIndex::new(sats, lambda_deg);
        let centers = self.cell_centers();
        for (flag, (lat, lon)) in self.covered.iter_mut().zip(centers) {
            *flag = index.covers(&unit_vector(lat, lon), lat, lon);
        }
    }

    pub fn covered_count(&self) -> usize {
        self.covered.iter().filter(|&&c| c).count()
    }

    pub fn all_covered(&self) -> bool {
        self.covered.iter().all(|&c| c)
    }
}

/// Spatial hash of sub-satellite points for footprint membership queries.
struct SatIndex {
    lambda_deg: f64,
    cos_lambda: f64,
    sin_lambda: f64,
    bin_deg: f64,
    n_lat: usize,
    n_lon: usize,
    bins: Vec<Vec<[f64; 3]>>,
}

impl SatIndex {
    fn new(sats: &[[f64; 3]], lambda_deg: f64) -> Self {
        let bin_deg = lambda_deg.clamp(1.0, 45.0);
        let n_lat = (180.0 / bin_deg).ceil() as usize;
        let n_lon = (360.0 / bin_deg).ceil() as usize;
        let mut index = Self {
            lambda_deg,
            cos_lambda: lambda_deg.to_radians().cos(),
            sin_lambda: lambda_deg.to_radians().sin(),
            bin_deg,
            n_lat,
            n_lon,
            bins: vec![Vec::new(); n_lat * n_lon],
        };
        index.rebuild(sats);
        index
    }

    fn rebuild(&mut self, sats: &[[f64; 3]]) {
        for b in &mut self.bins {
            b.clear();
        }
        for s in sats {
            let lat = s[2].clamp(-1.0, 1.0).asin().to_degrees();
            let lon = s[1].atan2(s[0]).to_degrees();
            let r = self.lat_bin(lat);
            let c = self.lon_bin(lon);
            self.bins[r * self.n_lon + c].push(*s);
        }
    }

    fn lat_bin(&self, lat: f64) -> usize {
        (((lat + 90.0) / self.bin_deg) as usize).min(self.n_lat - 1)
    }

    fn lon_bin(&self, lon: f64) -> usize {
        (((lon + 180.0).rem_euclid(360.0) / self.bin_deg) as usize).min(self.n_lon - 1)
    }

    #[inline]
    fn covers(&self, p: &[f64; 3], lat: f64, lon: f64) -> bool {
        if self.lambda_deg >= 180.0 {
            return self.bins.iter().any(|b| !b.is_empty());
        }
        let r0 = self.lat_bin((lat - self.lambda_deg).max(-90.0));
        let r1 = self.lat_bin((lat + self.lambda_deg).min(90.0));
        let cos_lat = lat.to_radians().cos();
        // longitude half-width of the cap; the whole circle when it holds a pole
        let all_lon = lat.abs() + self.lambda_deg >= 89.999 || self.sin_lambda >= cos_lat;
        let (c0, span) = if all_lon {
            (0, self.n_lon)
        } else {
            let half = (self.sin_lambda / cos_lat).asin().to_degrees();
            let first = ((lon - half + 180.0).rem_euclid(360.0) / self.bin_deg) as usize;
            let last = ((lon + half + 180.0).rem_euclid(360.0) / self.bin_deg) as usize;
            let first = first.min(self.n_lon - 1);
            let last = last.min(self.n_lon - 1);
            let span = if last >= first {
                last - first + 1
            } else {
                last + self.n_lon - first + 1
            };
            (first, span.min(self.n_lon))
        };
        for r in r0..=r1 {
            let row = r * self.n_lon;
            for k in 0..span {
                let c = (c0 + k) % self.n_lon;
                for s in &self.bins[row + c] {
                    if dot(s, p) >= self.cos_lambda {
                        return true;
                    }
                }
            }
        }
        false
    }
}

fn lat_of(v: &[f64; 3]) -> f64 {
    v[2].clamp(-1.0, 1.0).asin().to_degrees()
}

fn lon_of(v: &[f64; 3]) -> f64 {
    v[1].atan2(v[0]).to_degrees()
}

// ---------------------------------------------------------------------------
// single repeat ground track
// ---------------------------------------------------------------------------

/// Sampled geometry of one repeat cycle: track points every `grid_step` of
/// orbital arc and the analytic propagator that flies the track.
struct RgtSampler {
    prop: Propagator,
    repeat_period_s: f64,
    points: Vec<([f64; 3], f64, f64)>,
}

impl RgtSampler {
    fn new(rgt: &RgtSolution, grid_step_deg: f64) -> Self {
        let prop = Propagator::new(&rgt.orbit());
        let repeat_period_s = rgt.repeat_period_s();
        let n_points = ((rgt.orbits_q as f64 * 360.0) / grid_step_deg).ceil().max(1.0) as usize;
        let points = (0..n_points)
            .map(|m| {
                let v = prop.earth_fixed_unit(m as f64 * repeat_period_s / n_points as f64);
                (v, lat_of(&v), lon_of(&v))
            })
            .collect();
        Self {
            prop,
            repeat_period_s,
            points,
        }
    }

    /// Positions of `n` satellites, satellite k trailing the reference by
    /// `k * repeat_period / n`.
    fn satellites(&self, n: u32, t: f64) -> Vec<[f64; 3]> {
        let spacing = self.repeat_period_s / n as f64;
        (0..n)
            .map(|k| self.prop.earth_fixed_unit(t - k as f64 * spacing))
            .collect()
    }

    /// Time samples over one full repeat cycle.
    fn times(&self, dt: f64) -> Vec<f64> {
        let count = (self.repeat_period_s / dt - 1e-9).ceil().max(1.0) as usize;
        (0..count).map(|j| j as f64 * dt).collect()
    }

    fn uncovered(&self, n: u32, lambda_deg: f64, dt: f64, stop_at_first: bool) -> u64 {
        if n == 0 {
            return (self.points.len() * self.times(dt).len()) as u64;
        }
        let mut misses = 0u64;
        let mut index: Option<SatIndex> = None;
        for t in self.times(dt) {
            let sats = self.satellites(n, t);
            let idx = match index.as_mut() {
                Some(i) => {
                    i.rebuild(&sats);
                    i
                }
                None => index.insert(SatIndex::new(&sats, lambda_deg)),
            };
            for (v, lat, lon) in &self.points {
                if !idx.covers(v, *lat, *lon) {
                    misses += 1;
                    if stop_at_first {
                        return misses;
                    }
                }
            }
        }
        misses
    }
}

/// Count of (track point, time) samples left uncovered when `n` satellites
/// share the repeat track. Visits every time step of one full repeat cycle.
pub fn rgt_uncovered_samples(
    rgt: &RgtSolution,
    fp: &FootprintSpec,
    n: u32,
    opts: &CoverageOptions,
) -> Result<u64> {
    opts.validate()?;
    let sampler = RgtSampler::new(rgt, opts.grid_step_deg);
    Ok(sampler.uncovered(n, fp.lambda_deg(), opts.time_step_s, false))
}

/// True when `n` satellites on the track leave no sample uncovered. Stops at
/// the first miss.
pub fn rgt_covers(rgt: &RgtSolution, fp: &FootprintSpec, n: u32, opts: &CoverageOptions) -> Result<bool> {
    opts.validate()?;
    let sampler = RgtSampler::new(rgt, opts.grid_step_deg);
    Ok(sampler.uncovered(n, fp.lambda_deg(), opts.time_step_s, true) == 0)
}

/// Smallest number of satellites, equally spaced in time along the repeat
/// track, that keeps every sampled track point covered at every sampled
/// instant. Found by doubling then bisection; the result passes the oracle
/// and `n - 1` fails it.
pub fn min_sats_single_rgt(rgt: &RgtSolution, fp: &FootprintSpec, opts: &CoverageOptions) -> Result<u32> {
    opts.validate()?;
    let sampler = RgtSampler::new(rgt, opts.grid_step_deg);
    let lambda = fp.lambda_deg();
    let dt = opts.time_step_s;
    let passes = |n: u32| sampler.uncovered(n, lambda, dt, true) == 0;

    let mut lo = 0u32;
    let mut hi = 1u32;
    while !passes(hi) {
        lo = hi;
        if hi >= opts.max_rgt_sats {
            return Err(Error::Infeasible(format!(
                "single-track coverage needs more than {} satellites (lambda {lambda:.3} deg)",
                opts.max_rgt_sats
            )));
        }
        hi = (hi * 2).min(opts.max_rgt_sats);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// Walker delta
// ---------------------------------------------------------------------------

/// Walker-delta shell `i:T/P/F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkerConfig {
    pub inclination_deg: f64,
    pub total_sats_t: u32,
    pub planes_p: u32,
    pub phasing_f: u32,
    pub altitude_km: f64,
}

impl WalkerConfig {
    pub fn new(inclination_deg: f64, total: u32, planes: u32, phasing: u32, altitude_km: f64) -> Result<Self> {
        if planes == 0 || total == 0 || total % planes != 0 {
            return Err(invalid(format!("P = {planes} must divide T = {total}")));
        }
        if phasing >= planes {
            return Err(invalid(format!("F = {phasing} must be below P = {planes}")));
        }
        if !(0.0..=180.0).contains(&inclination_deg) || !(altitude_km > 0.0) {
            return Err(invalid("bad inclination or altitude"));
        }
        Ok(Self {
            inclination_deg,
            total_sats_t: total,
            planes_p: planes,
            phasing_f: phasing,
            altitude_km,
        })
    }

    pub fn sats_per_plane(&self) -> u32 {
        self.total_sats_t / self.planes_p
    }

    /// Epoch elements of every satellite, plane-major.
    pub fn orbits(&self) -> Vec<crate::astro::OrbitSpec> {
        self.slots()
            .map(|(raan, phase)| {
                crate::astro::OrbitSpec::new(self.altitude_km, self.inclination_deg, raan, phase, 0.0).unwrap()
            })
            .collect()
    }

    /// (RAAN, argument of latitude) of each satellite at epoch, degrees.
    fn slots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let p = self.planes_p;
        let s = self.sats_per_plane();
        let t = self.total_sats_t as f64;
        (0..p).flat_map(move |j| {
            (0..s).map(move |k| {
                (
                    360.0 * j as f64 / p as f64,
                    360.0 * k as f64 / s as f64 + 360.0 * (self.phasing_f * j) as f64 / t,
                )
            })
        })
    }

    /// Inertial sub-satellite unit vectors after `t` seconds.
    fn inertial_positions(&self, arg_lat_rate: f64, t: f64) -> Vec<[f64; 3]> {
        let (si, ci) = self.inclination_deg.to_radians().sin_cos();
        let du = arg_lat_rate * t;
        self.slots()
            .map(|(raan, phase)| {
                let (so, co) = raan.to_radians().sin_cos();
                let (su, cu) = (phase.to_radians() + du).sin_cos();
                [co * cu - so * su * ci, so * cu + co * su * ci, su * si]
            })
            .collect()
    }

    fn nodal_period_s(&self) -> f64 {
        2.0 * std::f64::consts::PI / secular_rates_unchecked(self.altitude_km, self.inclination_deg).arg_lat_rate
    }
}

/// Precomputed band cells for Walker checks, ordered equator-first since
/// gaps in a delta pattern open at low latitude first.
struct BandCells {
    cells: Vec<([f64; 3], f64, f64)>,
    lats: Vec<f64>,
}

impl BandCells {
    fn new(grid_step_deg: f64, band_limit_deg: f64) -> Result<Self> {
        let grid = CoverageGrid::new(grid_step_deg, grid_step_deg, band_limit_deg)?;
        let mut cells: Vec<_> = grid
            .cell_centers()
            .into_iter()
            .map(|(lat, lon)| (unit_vector(lat, lon), lat, lon))
            .collect();
        cells.sort_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
        let mut lats: Vec<f64> = grid
            .cell_centers()
            .iter()
            .map(|c| c.0)
            .collect();
        lats.dedup();
        lats.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        Ok(Self { cells, lats })
    }
}

/// Full sampled oracle: every band cell of an inertial longitude grid at
/// every time step over one nodal period. Returns the miss count, stopping
/// at the first miss when asked.
fn walker_misses(cfg: &WalkerConfig, lambda_deg: f64, cells: &BandCells, dt: f64, stop_at_first: bool) -> u64 {
    let rate = secular_rates_unchecked(cfg.altitude_km, cfg.inclination_deg).arg_lat_rate;
    let period = cfg.nodal_period_s();
    let steps = (period / dt - 1e-9).ceil().max(1.0) as usize;
    let mut misses = 0;
    let mut index: Option<SatIndex> = None;
    for j in 0..steps {
        let sats = cfg.inertial_positions(rate, j as f64 * dt);
        let idx = match index.as_mut() {
            Some(i) => {
                i.rebuild(&sats);
                i
            }
            None => index.insert(SatIndex::new(&sats, lambda_deg)),
        };
        for (v, lat, lon) in &cells.cells {
            if !idx.covers(v, *lat, *lon) {
                misses += 1;
                if stop_at_first {
                    return misses;
                }
            }
        }
    }
    misses
}

/// Quick rejection over one fundamental domain of the pattern's symmetry.
///
/// A delta pattern maps onto itself after a time shift of one in-plane
/// spacing (`period / S`), and a rotation of `360/P` in longitude equals a
/// time shift of `F * period / T`. A sector of width `360/P` over a window
/// of `period / S` therefore represents the whole (longitude, time) domain.
/// Any miss found here is a genuine hole somewhere in the full domain.
fn walker_hole_in_fundamental_domain(cfg: &WalkerConfig, lambda_deg: f64, cells: &BandCells, grid_step: f64, dt: f64) -> bool {
    let rate = secular_rates_unchecked(cfg.altitude_km, cfg.inclination_deg).arg_lat_rate;
    let window = cfg.nodal_period_s() / cfg.sats_per_plane() as f64;
    let sector = 360.0 / cfg.planes_p as f64;
    let n_lon = (sector / grid_step - 1e-9).ceil().max(1.0) as usize;
    let dlon = sector / n_lon as f64;
    let n_t = (window / dt - 1e-9).ceil().max(1.0) as usize;
    let dtt = window / n_t as f64;
    let mut index: Option<SatIndex> = None;
    for j in 0..n_t {
        let sats = cfg.inertial_positions(rate, (j as f64 + 0.5) * dtt);
        let idx = match index.as_mut() {
            Some(i) => {
                i.rebuild(&sats);
                i
            }
            None => index.insert(SatIndex::new(&sats, lambda_deg)),
        };
        for &lat in &cells.lats {
            for m in 0..n_lon {
                let lon = (m as f64 + 0.5) * dlon;
                let lon = if lon >= 180.0 { lon - 360.0 } else { lon };
                if !idx.covers(&unit_vector(lat, lon), lat, lon) {
                    return true;
                }
            }
        }
    }
    false
}

/// Number of (cell, time) samples a Walker shell leaves uncovered over one
/// nodal period on the inertial band grid.
pub fn walker_uncovered_samples(
    cfg: &WalkerConfig,
    fp: &FootprintSpec,
    band_limit_deg: f64,
    opts: &CoverageOptions,
) -> Result<u64> {
    opts.validate()?;
    let cells = BandCells::new(opts.grid_step_deg, band_limit_deg)?;
    Ok(walker_misses(cfg, fp.lambda_deg(), &cells, opts.time_step_s, false))
}

/// True when the shell leaves no band sample uncovered over one nodal
/// period. Stops at the first miss.
pub fn walker_covers(cfg: &WalkerConfig, fp: &FootprintSpec, band_limit_deg: f64, opts: &CoverageOptions) -> Result<bool> {
    opts.validate()?;
    let cells = BandCells::new(opts.grid_step_deg, band_limit_deg)?;
    Ok(walker_misses(cfg, fp.lambda_deg(), &cells, opts.time_step_s, true) == 0)
}

/// Smallest Walker-delta shell covering `|lat| <= band_limit_deg`.
///
/// T ascends from the cap-area lower bound (T caps must at least tile the
/// band's area); for each T every divisor P and every F in [0, P) is tried in
/// order and the first config passing both the fundamental-domain check and
/// the full sampled oracle wins.
pub fn min_walker_total(
    altitude_km: f64,
    inclination_deg: f64,
    fp: &FootprintSpec,
    band_limit_deg: f64,
    opts: &CoverageOptions,
) -> Result<WalkerConfig> {
    opts.validate()?;
    let lambda = fp.lambda_deg();
    if band_limit_deg > inclination_deg.min(180.0 - inclination_deg) + lambda + 1e-9 {
        return Err(invalid(format!(
            "band {band_limit_deg} deg exceeds reach of inclination {inclination_deg} deg plus footprint {lambda:.3} deg"
        )));
    }
    WalkerConfig::new(inclination_deg, 1, 1, 0, altitude_km)?;
    let cells = BandCells::new(opts.grid_step_deg, band_limit_deg)?;
    let cap_area = 2.0 * std::f64::consts::PI * (1.0 - lambda.min(180.0).to_radians().cos());
    let band_area = 4.0 * std::f64::consts::PI * band_limit_deg.to_radians().sin();
    let t_min = ((band_area / cap_area) * (1.0 - 1e-9)).ceil().max(1.0) as u32;

    for total in t_min..=opts.max_walker_total {
        let configs: Vec<WalkerConfig> = (1..=total)
            .filter(|p| total % p == 0)
            .flat_map(|p| (0..p).map(move |f| (p, f)))
            .map(|(p, f)| WalkerConfig {
                inclination_deg,
                total_sats_t: total,
                planes_p: p,
                phasing_f: f,
                altitude_km,
            })
            .collect();
        let found = configs.par_iter().find_first(|cfg| {
            !walker_hole_in_fundamental_domain(cfg, lambda, &cells, opts.grid_step_deg, opts.time_step_s)
                && walker_misses(cfg, lambda, &cells, opts.time_step_s, true) == 0
        });
        if let Some(cfg) = found {
            return Ok(*cfg);
        }
    }
    Err(Error::Infeasible(format!(
        "no Walker shell with T <= {} covers band {band_limit_deg} deg",
        opts.max_walker_total
    )))
}

// ---------------------------------------------------------------------------
// uniform-coverage survey
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RgtSurveyFlag {
    pub uniform: bool,
    /// Twice the largest distance from a band cell to the repeat track.
    pub max_gap_deg: f64,
}

/// For each track: is every band cell within the footprint of some point of
/// the track? The band is `|lat| <= min(i, 180 - i)` on a `grid_step` grid.
pub fn rgt_uniform_coverage_survey(
    rgts: &[RgtSolution],
    fp: &FootprintSpec,
    opts: &CoverageOptions,
) -> Result<Vec<RgtSurveyFlag>> {
    if rgts.is_empty() {
        return Err(invalid("survey needs at least one repeat ground track"));
    }
    opts.validate()?;
    rgts.par_iter()
        .map(|rgt| {
            let gap = max_distance_to_track(rgt, opts.grid_step_deg)?;
            let lambda = fp.lambda_deg();
            Ok(RgtSurveyFlag {
                uniform: gap <= lambda,
                max_gap_deg: 2.0 * gap,
            })
        })
        .collect()
}

/// Largest great-circle distance from any band cell center to the track.
fn max_distance_to_track(rgt: &RgtSolution, grid_step_deg: f64) -> Result<f64> {
    let band = rgt.inclination_deg.min(180.0 - rgt.inclination_deg);
    let grid = CoverageGrid::new(grid_step_deg, grid_step_deg, band)?;
    let prop = Propagator::new(&rgt.orbit());
    let period = rgt.repeat_period_s();
    // track sampled four times finer than the grid
    let n = ((rgt.orbits_q as f64 * 360.0) / (grid_step_deg / 4.0)).ceil() as usize;
    let bin = grid_step_deg;
    let n_bins = (180.0 / bin).ceil() as usize;
    let mut by_lat: Vec<Vec<[f64; 3]>> = vec![Vec::new(); n_bins];
    for m in 0..n {
        let v = prop.earth_fixed_unit(m as f64 * period / n as f64);
        let b = (((lat_of(&v) + 90.0) / bin) as usize).min(n_bins - 1);
        by_lat[b].push(v);
    }
    let worst = grid
        .cell_centers()
        .par_iter()
        .map(|&(lat, lon)| {
            let p = unit_vector(lat, lon);
            let home = (((lat + 90.0) / bin) as usize).min(n_bins - 1);
            let mut best = f64::INFINITY;
            // widen the latitude window until no unseen bin can be closer
            for ring in 0..n_bins {
                let lat_gap = (ring as f64 - 1.0).max(0.0) * bin;
                if lat_gap > best {
                    break;
                }
                let mut visit = |b: usize| {
                    for v in &by_lat[b] {
                        let d = crate::sphere::central_angle_vec_deg(&p, v);
                        if d < best {
                            best = d;
                        }
                    }
                };
                if ring == 0 {
                    visit(home);
                } else {
                    if home >= ring {
                        visit(home - ring);
                    }
                    if home + ring < n_bins {
                        visit(home + ring);
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// One row of the repeat-track sizing table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub rgt: RgtSolution,
    pub min_sats_rgt: Option<u32>,
    pub min_walker_total: Option<u32>,
    pub walker: Option<WalkerConfig>,
    pub uniform: bool,
    pub max_gap_deg: f64,
}

/// Size every track and its same-altitude Walker shell (band = inclination).
pub fn survey_table(rgts: &[RgtSolution], fp: &FootprintSpec, opts: &CoverageOptions) -> Result<Vec<SurveyRow>> {
    let mut rows = Vec::with_capacity(rgts.len());
    for rgt in rgts {
        let fp_here = fp.at_altitude(rgt.altitude_km)?;
        let flag = rgt_uniform_coverage_survey(std::slice::from_ref(rgt), &fp_here, opts)?[0];
        let n = min_sats_single_rgt(rgt, &fp_here, opts).ok();
        let band = rgt.inclination_deg.min(180.0 - rgt.inclination_deg);
        let walker = min_walker_total(rgt.altitude_km, rgt.inclination_deg, &fp_here, band, opts).ok();
        rows.push(SurveyRow {
            rgt: *rgt,
            min_sats_rgt: n,
            min_walker_total: walker.map(|w| w.total_sats_t),
            walker,
            uniform: flag.uniform,
            max_gap_deg: flag.max_gap_deg,
        });
    }
    Ok(rows)
}

pub fn write_survey_csv<W: Write>(out: W, rows: &[SurveyRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "q", "altitude_km", "min_sats_rgt", "min_walker_total", "uniform_flag", "max_gap_deg"])?;
    let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.rgt.repeat_days_p.to_string(),
            r.rgt.orbits_q.to_string(),
            format!("{:.3}", r.rgt.altitude_km),
            opt(r.min_sats_rgt),
            opt(r.min_walker_total),
            (r.uniform as u8).to_string(),
            format!("{:.3}", r.max_gap_deg),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::astro::find_rgt_orbits;

    #[test]
    fn central_angle_examples() {
        // acos(Re / (Re + h)) with Re = 6378.137 km
        assert!((earth_central_angle(550.0, 0.0).unwrap() - 22.984).abs() < 0.001);
        assert!((earth_central_angle(550.0, 25.0).unwrap() - 8.45).abs() < 0.02);
        assert!(earth_central_angle(1e-9, 0.0).unwrap() < 1e-2);
        assert!(earth_central_angle(550.0, 90.0).is_err());
        assert!(earth_central_angle(550.0, -1.0).is_err());
        assert!(earth_central_angle(0.0, 10.0).is_err());
    }

    #[test]
    fn central_angle_monotone() {
        let mut prev = 0.0;
        for h in [300.0, 500.0, 800.0, 1200.0, 2000.0] {
            let l = earth_central_angle(h, 25.0).unwrap();
            assert!(l > prev);
            prev = l;
        }
        let mut prev = f64::INFINITY;
        for e in [0.0, 10.0, 25.0, 40.0, 60.0, 89.0] {
            let l = earth_central_angle(550.0, e).unwrap();
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn is_covered_examples() {
        assert!(is_covered(12.0, 34.0, 12.0, 34.0, 1e-6));
        assert!(!is_covered(0.0, 0.0, 0.0, 10.0, 8.45));
        assert!(is_covered(0.0, 0.0, 5.0, 5.0, 8.45));
    }

    #[test]
    fn footprint_validation() {
        assert!(FootprintSpec::from_central_angle(0.0).is_err());
        assert!(FootprintSpec::from_central_angle(181.0).is_err());
        let fp = FootprintSpec::new(550.0, 25.0).unwrap();
        let higher = fp.at_altitude(1200.0).unwrap();
        assert!(higher.lambda_deg() > fp.lambda_deg());
        let raw = FootprintSpec::from_central_angle(10.0).unwrap();
        assert_eq!(raw.at_altitude(900.0).unwrap(), raw);
    }

    #[test]
    fn coverage_grid_shape() {
        let g = CoverageGrid::new(1.0, 1.0, 65.0).unwrap();
        assert_eq!(g.n_lat(), 180);
        assert_eq!(g.n_lon(), 360);
        assert_eq!(g.len(), 130 * 360);
        let g = CoverageGrid::new(0.7, 0.7, 90.0).unwrap();
        assert_eq!(g.n_lat(), (180.0f64 / 0.7).ceil() as usize);
        assert!(CoverageGrid::new(1.0, 1.0, 91.0).is_err());
    }

    #[test]
    fn sat_index_agrees_with_brute_force() {
        let sats: Vec<[f64; 3]> = (0..200)
            .map(|k| {
                let lat = ((k * 37) % 170) as f64 - 85.0;
                let lon = ((k * 91) % 360) as f64 - 180.0;
                unit_vector(lat, lon)
            })
            .collect();
        for lambda in [2.0, 8.45, 30.0] {
            let idx = SatIndex::new(&sats, lambda);
            for lat in (-89..=89).step_by(7) {
                for lon in (-180..180).step_by(11) {
                    let p = unit_vector(lat as f64, lon as f64);
                    let brute = sats.iter().any(|s| dot(s, &p) >= lambda.to_radians().cos());
                    assert_eq!(idx.covers(&p, lat as f64, lon as f64), brute, "{lat} {lon} {lambda}");
                }
            }
        }
    }

    #[test]
    fn walker_validation() {
        assert!(WalkerConfig::new(65.0, 10, 3, 0, 550.0).is_err());
        assert!(WalkerConfig::new(65.0, 12, 3, 3, 550.0).is_err());
        let w = WalkerConfig::new(65.0, 12, 3, 1, 550.0).unwrap();
        assert_eq!(w.sats_per_plane(), 4);
        assert_eq!(w.orbits().len(), 12);
    }

    #[test]
    fn hemispheric_footprint_degenerates() {
        let fp = FootprintSpec::from_central_angle(100.0).unwrap();
        let w = min_walker_total(550.0, 65.0, &fp, 65.0, &CoverageOptions::default()).unwrap();
        assert_eq!(w.planes_p, 1);
        assert!(w.total_sats_t <= 2);
    }

    #[test]
    fn walker_band_precondition() {
        let fp = FootprintSpec::from_central_angle(5.0).unwrap();
        assert!(min_walker_total(550.0, 40.0, &fp, 50.0, &CoverageOptions::default()).is_err());
    }

    #[test]
    fn one_day_track_is_uniform_at_wide_footprint() {
        let rgt = find_rgt_orbits(800.0, 900.0, 65.0, 1).unwrap()[0];
        assert_eq!(rgt.orbits_q, 14);
        let fp = FootprintSpec::from_central_angle(22.96).unwrap();
        let flags = rgt_uniform_coverage_survey(&[rgt], &fp, &CoverageOptions::default()).unwrap();
        assert!(flags[0].uniform);
        assert!(flags[0].max_gap_deg < 2.0 * 22.96);
        let tiny = FootprintSpec::from_central_angle(1e-6).unwrap();
        let flags = rgt_uniform_coverage_survey(&[rgt], &tiny, &CoverageOptions::default()).unwrap();
        assert!(!flags[0].uniform);
        assert!(rgt_uniform_coverage_survey(&[], &fp, &CoverageOptions::default()).is_err());
    }
}
