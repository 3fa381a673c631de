//! Trapped-particle flux maps and along-orbit exposure.
//!
//! Two map variants sit behind [`RadiationMap`]: a gridded loader for
//! exported model tables, and a closed-form synthetic stand-in with a South
//! Atlantic Anomaly blob plus outer-belt bands organized by tilted-dipole
//! latitude. Synthetic parameters are defaults of this tool, not geophysical
//! data.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::astro::{OrbitSpec, Propagator};
use crate::error::{invalid, Error, Result};
use crate::sphere::wrap_lon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Electron,
    Proton,
}

impl Species {
    pub const ALL: [Species; 2] = [Species::Electron, Species::Proton];

    pub fn as_str(self) -> &'static str {
        match self {
            Species::Electron => "electron",
            Species::Proton => "proton",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Species {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "electron" | "e" => Ok(Species::Electron),
            "proton" | "p" => Ok(Species::Proton),
            _ => Err(invalid(format!("unknown species '{s}'"))),
        }
    }
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Flux lookup in particles / cm^2 / s.
pub trait RadiationMap: Sync {
    fn flux(&self, lat_deg: f64, lon_deg: f64, alt_km: f64, species: Species) -> Result<f64>;

    /// Electron and proton flux at one point.
    fn flux_pair(&self, lat_deg: f64, lon_deg: f64, alt_km: f64) -> Result<[f64; 2]> {
        Ok([
            self.flux(lat_deg, lon_deg, alt_km, Species::Electron)?,
            self.flux(lat_deg, lon_deg, alt_km, Species::Proton)?,
        ])
    }

    /// Parameters recorded in output metadata.
    fn describe(&self) -> serde_json::Value;
}

pub fn flux_at(map: &dyn RadiationMap, lat_deg: f64, lon_deg: f64, alt_km: f64, species: Species) -> Result<f64> {
    if !(-90.0..=90.0).contains(&lat_deg) || !lon_deg.is_finite() || !alt_km.is_finite() {
        return Err(invalid(format!("bad coordinate ({lat_deg}, {lon_deg}, {alt_km})")));
    }
    map.flux(lat_deg, lon_deg, alt_km, species)
}

// ---------------------------------------------------------------------------
// synthetic map
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMapParams {
    pub saa_center_lat_deg: f64,
    pub saa_center_lon_deg: f64,
    pub saa_sigma_deg: f64,
    pub saa_amplitude_electron: f64,
    pub saa_amplitude_proton: f64,
    pub outer_belt_center_maglat_deg: f64,
    pub belt_sigma_deg: f64,
    pub belt_amplitude_electron: f64,
    pub belt_amplitude_proton: f64,
    pub dipole_pole_lat_deg: f64,
    pub dipole_pole_lon_deg: f64,
}

impl Default for SyntheticMapParams {
    fn default() -> Self {
        Self {
            saa_center_lat_deg: -30.0,
            saa_center_lon_deg: -50.0,
            saa_sigma_deg: 20.0,
            saa_amplitude_electron: 5.0e5,
            saa_amplitude_proton: 2.0e3,
            outer_belt_center_maglat_deg: 62.0,
            belt_sigma_deg: 5.0,
            belt_amplitude_electron: 5.0e4,
            belt_amplitude_proton: 10.0,
            dipole_pole_lat_deg: 80.65,
            dipole_pole_lon_deg: -72.68,
        }
    }
}

/// Closed-form map: Gaussian in great-circle distance from the SAA center
/// plus Gaussian in `|dipole latitude| - belt center`. Altitude-independent.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMap {
    params: SyntheticMapParams,
    pole: [f64; 3],
    saa: [f64; 3],
}

impl SyntheticMap {
    pub fn new(params: SyntheticMapParams) -> Result<Self> {
        let amps = [
            params.saa_amplitude_electron,
            params.saa_amplitude_proton,
            params.belt_amplitude_electron,
            params.belt_amplitude_proton,
        ];
        if amps.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(invalid("synthetic amplitudes must be finite and >= 0"));
        }
        if !(params.saa_sigma_deg > 0.0 && params.belt_sigma_deg > 0.0) {
            return Err(invalid("synthetic sigmas must be > 0"));
        }
        Ok(Self {
            pole: crate::sphere::unit_vector(params.dipole_pole_lat_deg, params.dipole_pole_lon_deg),
            saa: crate::sphere::unit_vector(params.saa_center_lat_deg, params.saa_center_lon_deg),
            params,
        })
    }

    pub fn params(&self) -> &SyntheticMapParams {
        &self.params
    }

    /// Latitude relative to the tilted dipole axis.
    pub fn dipole_latitude_deg(&self, lat_deg: f64, lon_deg: f64) -> f64 {
        let v = crate::sphere::unit_vector(lat_deg, lon_deg);
        crate::sphere::dot(&v, &self.pole).clamp(-1.0, 1.0).asin().to_degrees()
    }

    /// Both species at an earth-fixed unit vector.
    fn pair_at_unit(&self, v: &[f64; 3]) -> [f64; 2] {
        let p = &self.params;
        let d = crate::sphere::central_angle_vec_deg(v, &self.saa);
        let saa = (-0.5 * (d / p.saa_sigma_deg).powi(2)).exp();
        let mlat = crate::sphere::dot(v, &self.pole).clamp(-1.0, 1.0).asin().to_degrees();
        let belt = (-0.5 * ((mlat.abs() - p.outer_belt_center_maglat_deg) / p.belt_sigma_deg).powi(2)).exp();
        [
            p.saa_amplitude_electron * saa + p.belt_amplitude_electron * belt,
            p.saa_amplitude_proton * saa + p.belt_amplitude_proton * belt,
        ]
    }
}

impl Default for SyntheticMap {
    fn default() -> Self {
        Self::new(SyntheticMapParams::default()).expect("default parameters are valid")
    }
}

impl RadiationMap for SyntheticMap {
    fn flux(&self, lat_deg: f64, lon_deg: f64, alt_km: f64, species: Species) -> Result<f64> {
        Ok(self.flux_pair(lat_deg, lon_deg, alt_km)?[species.index()])
    }

    fn flux_pair(&self, lat_deg: f64, lon_deg: f64, _alt_km: f64) -> Result<[f64; 2]> {
        Ok(self.pair_at_unit(&crate::sphere::unit_vector(lat_deg, lon_deg)))
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "kind": "synthetic", "params": self.params })
    }
}

/// Same value everywhere; handy for integration checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformMap {
    pub electron: f64,
    pub proton: f64,
}

impl RadiationMap for UniformMap {
    fn flux(&self, _: f64, _: f64, _: f64, species: Species) -> Result<f64> {
        Ok(match species {
            Species::Electron => self.electron,
            Species::Proton => self.proton,
        })
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "kind": "uniform", "electron": self.electron, "proton": self.proton })
    }
}

// ---------------------------------------------------------------------------
// gridded map
// ---------------------------------------------------------------------------

/// Axes declared in the JSON sidecar of a gridded map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxes {
    pub lat_deg: Vec<f64>,
    pub lon_deg: Vec<f64>,
    pub alt_km: Vec<f64>,
    pub species: Vec<Species>,
}

/// Tabulated flux, trilinear in (lat, lon, alt). Longitude wraps when the
/// axis closes the circle; every other axis refuses to extrapolate.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedMap {
    axes: GridAxes,
    lon_periodic: bool,
    /// Per species, `[lat][lon][alt]` row-major.
    flux: BTreeMap<Species, Vec<f64>>,
}

fn check_axis(name: &str, xs: &[f64]) -> Result<()> {
    if xs.len() < 2 {
        return Err(invalid(format!("axis {name} needs at least two nodes")));
    }
    if xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(format!("axis {name} must be finite and strictly increasing")));
    }
    Ok(())
}

/// Bracketing index and weight of `x` on a bounded axis.
fn bracket(xs: &[f64], x: f64) -> Option<(usize, f64)> {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
    Some((i, (x - xs[i]) / (xs[i + 1] - xs[i])))
}

impl GriddedMap {
    pub fn new(axes: GridAxes, flux: BTreeMap<Species, Vec<f64>>) -> Result<Self> {
        check_axis("lat_deg", &axes.lat_deg)?;
        check_axis("lon_deg", &axes.lon_deg)?;
        check_axis("alt_km", &axes.alt_km)?;
        if axes.lat_deg[0] < -90.0 || axes.lat_deg[axes.lat_deg.len() - 1] > 90.0 {
            return Err(invalid("latitude axis outside [-90, 90]"));
        }
        let lon = &axes.lon_deg;
        let span = lon[lon.len() - 1] - lon[0];
        if span >= 360.0 {
            return Err(invalid("longitude axis must span less than 360 deg"));
        }
        let closing_gap = 360.0 - span;
        let max_gap = lon.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let lon_periodic = closing_gap <= max_gap + 1e-9;
        let n = axes.lat_deg.len() * axes.lon_deg.len() * axes.alt_km.len();
        for s in &axes.species {
            let v = flux.get(s).ok_or_else(|| invalid(format!("no flux for declared species {s}")))?;
            if v.len() != n {
                return Err(invalid(format!("species {s}: expected {n} values, got {}", v.len())));
            }
            if v.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
                return Err(Error::Validation(format!("species {s}: flux must be finite and >= 0")));
            }
        }
        if flux.keys().any(|s| !axes.species.contains(s)) {
            return Err(invalid("flux given for an undeclared species"));
        }
        Ok(Self {
            axes,
            lon_periodic,
            flux,
        })
    }

    /// Every node set to the same per-species value.
    pub fn uniform(axes: GridAxes, value: f64) -> Result<Self> {
        let n = axes.lat_deg.len() * axes.lon_deg.len() * axes.alt_km.len();
        let flux = axes.species.iter().map(|s| (*s, vec![value; n])).collect();
        Self::new(axes, flux)
    }

    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn lon_periodic(&self) -> bool {
        self.lon_periodic
    }

    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.axes.lon_deg.len() + j) * self.axes.alt_km.len() + k
    }

    pub fn node(&self, species: Species, i: usize, j: usize, k: usize) -> Option<f64> {
        self.flux.get(&species).map(|v| v[self.idx(i, j, k)])
    }

    fn lon_bracket(&self, lon_deg: f64) -> Option<(usize, usize, f64)> {
        let xs = &self.axes.lon_deg;
        let n = xs.len();
        if !self.lon_periodic {
            let lon = if lon_deg >= xs[0] && lon_deg <= xs[n - 1] {
                lon_deg
            } else {
                // accept the same meridian written with a different wrap
                let w = xs[0] + (lon_deg - xs[0]).rem_euclid(360.0);
                if w > xs[n - 1] {
                    return None;
                }
                w
            };
            let (j, t) = bracket(xs, lon)?;
            return Some((j, j + 1, t));
        }
        let x = xs[0] + (lon_deg - xs[0]).rem_euclid(360.0);
        if x <= xs[n - 1] {
            let (j, t) = bracket(xs, x)?;
            Some((j, j + 1, t))
        } else {
            let gap = xs[0] + 360.0 - xs[n - 1];
            Some((n - 1, 0, (x - xs[n - 1]) / gap))
        }
    }
}

impl RadiationMap for GriddedMap {
    fn flux(&self, lat_deg: f64, lon_deg: f64, alt_km: f64, species: Species) -> Result<f64> {
        let v = self
            .flux
            .get(&species)
            .ok_or_else(|| Error::OutOfRange(format!("map has no {species} table")))?;
        let (i, ti) = bracket(&self.axes.lat_deg, lat_deg)
            .ok_or_else(|| Error::OutOfRange(format!("latitude {lat_deg} outside map")))?;
        let (j0, j1, tj) = self
            .lon_bracket(lon_deg)
            .ok_or_else(|| Error::OutOfRange(format!("longitude {lon_deg} outside map")))?;
        let (k, tk) = bracket(&self.axes.alt_km, alt_km)
            .ok_or_else(|| Error::OutOfRange(format!("altitude {alt_km} km outside map")))?;
        let mut acc = 0.0;
        for (ii, wi) in [(i, 1.0 - ti), (i + 1, ti)] {
            for (jj, wj) in [(j0, 1.0 - tj), (j1, tj)] {
                for (kk, wk) in [(k, 1.0 - tk), (k + 1, tk)] {
                    let w = wi * wj * wk;
                    if w != 0.0 {
                        acc += w * v[self.idx(ii, jj, kk)];
                    }
                }
            }
        }
        Ok(acc.max(0.0))
    }

    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": "gridded",
            "n_lat": self.axes.lat_deg.len(),
            "n_lon": self.axes.lon_deg.len(),
            "n_alt": self.axes.alt_km.len(),
            "species": self.axes.species,
            "lon_periodic": self.lon_periodic,
        })
    }
}

fn axis_index(xs: &[f64], x: f64) -> Option<usize> {
    let tol = 1e-6 * (xs[xs.len() - 1] - xs[0]).abs().max(1.0);
    let i = xs.partition_point(|&v| v < x - tol);
    (i < xs.len() && (xs[i] - x).abs() <= tol).then_some(i)
}

/// Read CSV rows `lat_deg,lon_deg,alt_km,species,flux` against the declared
/// axes. Every node of every declared species must appear exactly once.
pub fn read_gridded_map<R: Read>(reader: R, axes: GridAxes) -> Result<GriddedMap> {
    let n = axes.lat_deg.len() * axes.lon_deg.len() * axes.alt_km.len();
    let mut flux: BTreeMap<Species, Vec<f64>> = axes.species.iter().map(|s| (*s, vec![f64::NAN; n])).collect();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let n_lon = axes.lon_deg.len();
    let n_alt = axes.alt_km.len();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(r + 1);
        if r == 0 && rec.get(0).map(|f| f.eq_ignore_ascii_case("lat_deg")).unwrap_or(false) {
            continue;
        }
        let num = |k: usize, name: &str| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("bad or missing '{name}'"),
                })
        };
        let (lat, lon, alt) = (num(0, "lat_deg")?, num(1, "lon_deg")?, num(2, "alt_km")?);
        let species: Species = rec
            .get(3)
            .ok_or_else(|| Error::Parse {
                line,
                message: "missing 'species'".into(),
            })?
            .parse()
            .map_err(|_| Error::Parse {
                line,
                message: "unknown species".into(),
            })?;
        let f = num(4, "flux")?;
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::Validation(format!("line {line}: flux must be finite and >= 0")));
        }
        let off_axis = || Error::Validation(format!("line {line}: ({lat}, {lon}, {alt}) is not a grid node"));
        let i = axis_index(&axes.lat_deg, lat).ok_or_else(off_axis)?;
        let j = axis_index(&axes.lon_deg, lon).ok_or_else(off_axis)?;
        let k = axis_index(&axes.alt_km, alt).ok_or_else(off_axis)?;
        let table = flux
            .get_mut(&species)
            .ok_or_else(|| Error::Validation(format!("line {line}: species {species} not declared")))?;
        let slot = &mut table[(i * n_lon + j) * n_alt + k];
        if !slot.is_nan() {
            return Err(Error::Validation(format!("line {line}: duplicate node")));
        }
        *slot = f;
    }
    for (s, v) in &flux {
        if let Some(missing) = v.iter().position(|x| x.is_nan()) {
            return Err(Error::Validation(format!("species {s}: node {missing} missing from file")));
        }
    }
    GriddedMap::new(axes, flux)
}

/// Load `<path>` with axes from `<path>.json` (or an explicit sidecar).
pub fn load_gridded_map(path: impl AsRef<Path>, sidecar: Option<&Path>) -> Result<GriddedMap> {
    let path = path.as_ref();
    let side = match sidecar {
        Some(p) => p.to_path_buf(),
        None => {
            let mut s = path.as_os_str().to_owned();
            s.push(".json");
            s.into()
        }
    };
    let axes: GridAxes = serde_json::from_reader(File::open(side)?)?;
    read_gridded_map(File::open(path)?, axes)
}

pub fn write_gridded_map<W: Write>(out: W, map: &GriddedMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lat_deg", "lon_deg", "alt_km", "species", "flux"])?;
    for s in &map.axes.species {
        for (i, lat) in map.axes.lat_deg.iter().enumerate() {
            for (j, lon) in map.axes.lon_deg.iter().enumerate() {
                for (k, alt) in map.axes.alt_km.iter().enumerate() {
                    let f = map.node(*s, i, j, k).unwrap_or(0.0);
                    w.write_record([
                        lat.to_string(),
                        lon.to_string(),
                        alt.to_string(),
                        s.to_string(),
                        format!("{f:e}"),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Tabulate any map on the given axes.
pub fn tabulate(map: &dyn RadiationMap, axes: GridAxes) -> Result<GriddedMap> {
    let mut flux = BTreeMap::new();
    for s in &axes.species {
        let mut v = Vec::with_capacity(axes.lat_deg.len() * axes.lon_deg.len() * axes.alt_km.len());
        for lat in &axes.lat_deg {
            for lon in &axes.lon_deg {
                for alt in &axes.alt_km {
                    v.push(map.flux(*lat, wrap_lon(*lon), *alt, *s)?);
                }
            }
        }
        flux.insert(*s, v);
    }
    GriddedMap::new(axes, flux)
}

// ---------------------------------------------------------------------------
// exposure
// ---------------------------------------------------------------------------

/// Default integration step, s.
pub const DEFAULT_EXPOSURE_STEP_S: f64 = 30.0;
/// Default RAAN-averaging count.
pub const DEFAULT_RAAN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExposureResult {
    /// Electron fluence, particles / cm^2.
    pub electron: f64,
    pub proton: f64,
    pub window_s: f64,
}

impl ExposureResult {
    pub fn get(&self, species: Species) -> f64 {
        match species {
            Species::Electron => self.electron,
            Species::Proton => self.proton,
        }
    }
}

/// Trapezoidal fluence over `[0, duration_s]` after the orbit epoch.
pub fn accumulate_exposure(
    orbit: &OrbitSpec,
    map: &dyn RadiationMap,
    duration_s: f64,
    step_s: f64,
) -> Result<ExposureResult> {
    accumulate_exposure_window(orbit, map, 0.0, duration_s, step_s)
}

/// Trapezoidal fluence over `[start_s, start_s + duration_s]`. Nodes sit at
/// `start_s + k * step_s`; a shorter last interval closes the window.
pub fn accumulate_exposure_window(
    orbit: &OrbitSpec,
    map: &dyn RadiationMap,
    start_s: f64,
    duration_s: f64,
    step_s: f64,
) -> Result<ExposureResult> {
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(invalid("duration must be > 0"));
    }
    if !(step_s.is_finite() && step_s > 0.0) || !start_s.is_finite() {
        return Err(invalid("step must be > 0"));
    }
    let prop = Propagator::new(orbit);
    let alt = orbit.altitude_km;
    let eval = |t: f64| -> Result<[f64; 2]> {
        let s = prop.sample(t);
        map.flux_pair(s.lat_deg, s.lon_deg, alt)
    };
    let n_full = (duration_s / step_s * (1.0 + 1e-12)).floor() as usize;
    let mut acc = [0.0f64; 2];
    let mut prev = eval(start_s)?;
    for k in 1..=n_full {
        let cur = eval(start_s + k as f64 * step_s)?;
        acc[0] += 0.5 * step_s * (prev[0] + cur[0]);
        acc[1] += 0.5 * step_s * (prev[1] + cur[1]);
        prev = cur;
    }
    let rest = duration_s - n_full as f64 * step_s;
    if rest > 1e-9 * step_s {
        let cur = eval(start_s + duration_s)?;
        acc[0] += 0.5 * rest * (prev[0] + cur[0]);
        acc[1] += 0.5 * rest * (prev[1] + cur[1]);
    }
    Ok(ExposureResult {
        electron: acc[0],
        proton: acc[1],
        window_s: duration_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExposureOptions {
    pub step_s: f64,
    pub n_raan: usize,
}

impl Default for ExposureOptions {
    fn default() -> Self {
        Self {
            step_s: DEFAULT_EXPOSURE_STEP_S,
            n_raan: DEFAULT_RAAN_SAMPLES,
        }
    }
}

/// Fluence averaged over `n_raan` copies of the orbit with RAAN offsets
/// `k * 360 / n_raan`.
pub fn raan_averaged_exposure(
    orbit: &OrbitSpec,
    map: &dyn RadiationMap,
    duration_s: f64,
    opts: &ExposureOptions,
) -> Result<ExposureResult> {
    if opts.n_raan == 0 {
        return Err(invalid("RAAN-averaging count must be >= 1"));
    }
    let mut sum = [0.0; 2];
    for k in 0..opts.n_raan {
        let mut o = *orbit;
        o.raan_deg = crate::sphere::wrap_360(orbit.raan_deg + 360.0 * k as f64 / opts.n_raan as f64);
        let e = accumulate_exposure(&o, map, duration_s, opts.step_s)?;
        sum[0] += e.electron;
        sum[1] += e.proton;
    }
    let n = opts.n_raan as f64;
    Ok(ExposureResult {
        electron: sum[0] / n,
        proton: sum[1] / n,
        window_s: duration_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclinationExposure {
    pub inclination_deg: f64,
    pub electron: f64,
    pub proton: f64,
}

pub fn exposure_vs_inclination(
    alt_km: f64,
    inclinations: &[f64],
    map: &dyn RadiationMap,
    duration_s: f64,
    opts: &ExposureOptions,
) -> Result<Vec<InclinationExposure>> {
    if inclinations.is_empty() {
        return Err(invalid("inclination list is empty"));
    }
    inclinations
        .par_iter()
        .map(|&inc| {
            let orbit = OrbitSpec::circular(alt_km, inc)?;
            let e = raan_averaged_exposure(&orbit, map, duration_s, opts)?;
            Ok(InclinationExposure {
                inclination_deg: inc,
                electron: e.electron,
                proton: e.proton,
            })
        })
        .collect()
}

pub fn write_inclination_csv<W: Write>(out: W, rows: &[InclinationExposure]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["inclination_deg", "electron_fluence", "proton_fluence"])?;
    for r in rows {
        w.write_record([
            format!("{}", r.inclination_deg),
            format!("{:.9e}", r.electron),
            format!("{:.9e}", r.proton),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Median of a slice, averaging the middle pair for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Per-satellite RAAN-averaged exposure, in input order.
pub fn per_satellite_exposure(
    orbits: &[OrbitSpec],
    map: &dyn RadiationMap,
    duration_s: f64,
    opts: &ExposureOptions,
) -> Result<Vec<ExposureResult>> {
    orbits
        .par_iter()
        .map(|o| raan_averaged_exposure(o, map, duration_s, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MedianExposure {
    pub electron: f64,
    pub proton: f64,
    pub n_sats: usize,
}

/// Median per-satellite fluence over a set of orbits.
pub fn median_exposure(
    orbits: &[OrbitSpec],
    map: &dyn RadiationMap,
    duration_s: f64,
    opts: &ExposureOptions,
) -> Result<MedianExposure> {
    if orbits.is_empty() {
        return Err(invalid("constellation has no satellites"));
    }
    let per = per_satellite_exposure(orbits, map, duration_s, opts)?;
    let e: Vec<f64> = per.iter().map(|x| x.electron).collect();
    let p: Vec<f64> = per.iter().map(|x| x.proton).collect();
    Ok(MedianExposure {
        electron: median(&e).unwrap_or(0.0),
        proton: median(&p).unwrap_or(0.0),
        n_sats: orbits.len(),
    })
}

pub fn write_exposure_csv<W: Write>(out: W, per_sat: &[ExposureResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sat_id", "species", "fluence"])?;
    for (id, e) in per_sat.iter().enumerate() {
        for s in Species::ALL {
            w.write_record([id.to_string(), s.to_string(), format!("{:.9e}", e.get(s))])?;
        }
    }
    w.flush()?;
    Ok(())
}
