//! Sun-fixed spatiotemporal demand.
//!
//! Spatial structure comes from a gridded population density reduced to its
//! per-latitude maximum; temporal structure comes from throughput series
//! normalized per site and grouped by time of day. Their normalized product
//! on a latitude x local-solar-time grid is the demand the design greedy
//! consumes, in units of one satellite's capacity.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::astro::local_solar_time;
use crate::error::{invalid, Error, Result};
use crate::sphere::wrap_lon;

fn bins_for(span: f64, step: f64, what: &str) -> Result<usize> {
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid(format!("{what} step must be positive")));
    }
    let n = span / step;
    let rounded = n.round();
    if rounded < 1.0 || (n - rounded).abs() > 1e-6 {
        return Err(invalid(format!("{what} step {step} must divide {span}")));
    }
    Ok(rounded as usize)
}

/// Population density on a regular grid spanning [-90, 90] x [-180, 180).
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGrid {
    pub lat_step_deg: f64,
    pub lon_step_deg: f64,
    n_lat: usize,
    n_lon: usize,
    density: Vec<f64>,
}

impl PopulationGrid {
    pub fn zeros(lat_step_deg: f64, lon_step_deg: f64) -> Result<Self> {
        let n_lat = bins_for(180.0, lat_step_deg, "latitude")?;
        let n_lon = bins_for(360.0, lon_step_deg, "longitude")?;
        Ok(Self {
            lat_step_deg,
            lon_step_deg,
            n_lat,
            n_lon,
            density: vec![0.0; n_lat * n_lon],
        })
    }

    /// Grid filled from a function of the cell center `(lat, lon)`.
    pub fn from_fn(lat_step_deg: f64, lon_step_deg: f64, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut g = Self::zeros(lat_step_deg, lon_step_deg)?;
        for r in 0..g.n_lat {
            for c in 0..g.n_lon {
                let v = f(g.lat_center(r), g.lon_center(c));
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Validation(format!("density {v} at row {r} col {c}")));
                }
                g.density[r * g.n_lon + c] = v;
            }
        }
        Ok(g)
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lon(&self) -> usize {
        self.n_lon
    }

    pub fn lat_center(&self, row: usize) -> f64 {
        -90.0 + (row as f64 + 0.5) * self.lat_step_deg
    }

    pub fn lon_center(&self, col: usize) -> f64 {
        -180.0 + (col as f64 + 0.5) * self.lon_step_deg
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.density[row * self.n_lon + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.density[row * self.n_lon..(row + 1) * self.n_lon]
    }

    /// Cell holding a point; latitude 90 folds into the top row.
    pub fn cell_of(&self, lat_deg: f64, lon_deg: f64) -> Option<(usize, usize)> {
        if !(-90.0..=90.0).contains(&lat_deg) || !lon_deg.is_finite() {
            return None;
        }
        let r = (((lat_deg + 90.0) / self.lat_step_deg) as usize).min(self.n_lat - 1);
        let c = (((wrap_lon(lon_deg) + 180.0) / self.lon_step_deg) as usize).min(self.n_lon - 1);
        Some((r, c))
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Validation(format!("density must be finite and >= 0, got {value}")));
        }
        self.density[row * self.n_lon + col] = value;
        Ok(())
    }

    pub fn nonzero_cells(&self) -> usize {
        self.density.iter().filter(|&&d| d > 0.0).count()
    }

    /// Copy with longitude columns reordered: column `c` of the result is
    /// column `perm[c]` of `self`.
    pub fn permute_longitudes(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_lon {
            return Err(invalid("permutation length must equal longitude count"));
        }
        let mut out = self.clone();
        for r in 0..self.n_lat {
            for (c, &src) in perm.iter().enumerate() {
                out.density[r * self.n_lon + c] = self.density[r * self.n_lon + src];
            }
        }
        Ok(out)
    }
}

fn parse_field(rec: &csv::StringRecord, idx: usize, name: &str, line: usize) -> Result<f64> {
    let raw = rec.get(idx).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column '{name}'"),
    })?;
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("column '{name}' is not a number: '{raw}'"),
    })
}

fn is_header(rec: &csv::StringRecord, first: &str) -> bool {
    rec.get(0).map(|f| f.trim().eq_ignore_ascii_case(first)).unwrap_or(false)
}

/// Read `lat_deg,lon_deg,density` rows (cell centers). A header row is
/// optional; cells without a row stay at zero.
pub fn read_population_grid<R: Read>(reader: R, lat_step_deg: f64, lon_step_deg: f64) -> Result<PopulationGrid> {
    let mut grid = PopulationGrid::zeros(lat_step_deg, lon_step_deg)?;
    let mut seen = vec![false; grid.density.len()];
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if i == 0 && is_header(&rec, "lat_deg") {
            continue;
        }
        if rec.len() == 1 && rec.get(0).map(str::is_empty).unwrap_or(true) {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 columns, found {}", rec.len()),
            });
        }
        let lat = parse_field(&rec, 0, "lat_deg", line)?;
        let lon = parse_field(&rec, 1, "lon_deg", line)?;
        let d = parse_field(&rec, 2, "density", line)?;
        if d.is_nan() || d < 0.0 || d.is_infinite() {
            return Err(Error::Validation(format!("line {line}: density must be finite and >= 0, got {d}")));
        }
        let (r, c) = grid
            .cell_of(lat, lon)
            .ok_or_else(|| Error::Validation(format!("line {line}: coordinate ({lat}, {lon}) outside the globe")))?;
        let k = r * grid.n_lon + c;
        if seen[k] {
            return Err(Error::Validation(format!("line {line}: duplicate cell ({lat}, {lon})")));
        }
        seen[k] = true;
        grid.density[k] = d;
    }
    Ok(grid)
}

pub fn load_population_grid(path: impl AsRef<Path>, lat_step_deg: f64, lon_step_deg: f64) -> Result<PopulationGrid> {
    read_population_grid(File::open(path)?, lat_step_deg, lon_step_deg)
}

pub fn write_population_csv<W: Write>(out: W, grid: &PopulationGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lat_deg", "lon_deg", "density"])?;
    for r in 0..grid.n_lat {
        for c in 0..grid.n_lon {
            let d = grid.get(r, c);
            if d > 0.0 {
                w.write_record([
                    format!("{}", grid.lat_center(r)),
                    format!("{}", grid.lon_center(c)),
                    format!("{d}"),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-latitude maximum over longitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatitudeProfile {
    pub lat_step_deg: f64,
    pub values: Vec<f64>,
}

impl LatitudeProfile {
    pub fn new(lat_step_deg: f64, values: Vec<f64>) -> Result<Self> {
        let n = bins_for(180.0, lat_step_deg, "latitude")?;
        if values.len() != n {
            return Err(invalid(format!("expected {n} latitude bins, got {}", values.len())));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation("profile values must be finite and >= 0".into()));
        }
        Ok(Self { lat_step_deg, values })
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.values.len())
            .map(|i| -90.0 + (i as f64 + 0.5) * self.lat_step_deg)
            .collect()
    }
}

pub fn latitude_max_profile(grid: &PopulationGrid) -> LatitudeProfile {
    let values = (0..grid.n_lat)
        .map(|r| grid.row(r).iter().copied().fold(0.0, f64::max))
        .collect();
    LatitudeProfile {
        lat_step_deg: grid.lat_step_deg,
        values,
    }
}

/// Which diurnal statistic drives the demand grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiurnalStatistic {
    Median,
    P95,
}

impl std::str::FromStr for DiurnalStatistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "median" => Ok(Self::Median),
            "p95" => Ok(Self::P95),
            _ => Err(invalid(format!("unknown diurnal statistic '{s}'"))),
        }
    }
}

/// Site-median-normalized throughput by time-of-day bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiurnalProfile {
    pub bin_h: f64,
    pub median: Vec<f64>,
    pub p95: Vec<f64>,
    pub sites_used: usize,
    pub sites_skipped: Vec<String>,
}

impl DiurnalProfile {
    /// Profile from explicit curves; p95 defaults to the median.
    pub fn from_curves(bin_h: f64, median: Vec<f64>, p95: Option<Vec<f64>>) -> Result<Self> {
        let n = bins_for(24.0, bin_h, "time-of-day")?;
        let p95 = p95.unwrap_or_else(|| median.clone());
        if median.len() != n || p95.len() != n {
            return Err(invalid(format!("expected {n} time-of-day bins")));
        }
        for (m, p) in median.iter().zip(&p95) {
            if !(m.is_finite() && *m >= 0.0 && p.is_finite() && m <= p) {
                return Err(Error::Validation("need 0 <= median <= p95 per bin".into()));
            }
        }
        Ok(Self {
            bin_h,
            median,
            p95,
            sites_used: 0,
            sites_skipped: Vec::new(),
        })
    }

    pub fn n_bins(&self) -> usize {
        self.median.len()
    }

    pub fn curve(&self, stat: DiurnalStatistic) -> &[f64] {
        match stat {
            DiurnalStatistic::Median => &self.median,
            DiurnalStatistic::P95 => &self.p95,
        }
    }

    /// Value of a curve at a local time of day.
    pub fn at(&self, stat: DiurnalStatistic, local_h: f64) -> f64 {
        let b = ((local_h.rem_euclid(24.0) / self.bin_h) as usize).min(self.n_bins() - 1);
        self.curve(stat)[b]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiurnalOptions {
    pub bin_h: f64,
    /// Added to UTC timestamps to get local time of the measurement region.
    pub tz_offset_h: f64,
}

impl Default for DiurnalOptions {
    fn default() -> Self {
        Self {
            bin_h: 0.5,
            tz_offset_h: 0.0,
        }
    }
}

/// Median with the two middle values averaged. `xs` must be sorted.
fn sorted_median(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Linear-interpolation percentile (`q` in [0, 1]) of sorted data.
fn sorted_quantile(xs: &[f64], q: f64) -> f64 {
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    xs[lo] + (xs[hi] - xs[lo]) * (pos - lo as f64)
}

/// Read `site_id,timestamp_s,bytes` rows into a diurnal profile.
///
/// Each site's samples are divided by that site's median; normalized
/// samples of all sites are then pooled per time-of-day bin and summarized
/// by their median and 95th percentile. Sites whose median is zero are
/// skipped with a warning.
pub fn read_diurnal_series<R: Read>(reader: R, opts: &DiurnalOptions) -> Result<DiurnalProfile> {
    let n_bins = bins_for(24.0, opts.bin_h, "time-of-day")?;
    let mut sites: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if i == 0 && is_header(&rec, "site_id") {
            continue;
        }
        if rec.len() == 1 && rec.get(0).map(str::is_empty).unwrap_or(true) {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 columns, found {}", rec.len()),
            });
        }
        let site = rec.get(0).unwrap_or_default().to_string();
        let ts = parse_field(&rec, 1, "timestamp_s", line)?;
        let bytes = parse_field(&rec, 2, "bytes", line)?;
        if !ts.is_finite() || !(bytes.is_finite() && bytes >= 0.0) {
            return Err(Error::Validation(format!("line {line}: bad timestamp or negative throughput")));
        }
        sites.entry(site).or_default().push((ts, bytes));
    }
    if sites.is_empty() {
        return Err(Error::Validation("throughput series is empty".into()));
    }

    let mut per_bin: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    let mut skipped = Vec::new();
    let mut used = 0;
    for (site, samples) in &sites {
        let mut values: Vec<f64> = samples.iter().map(|s| s.1).collect();
        values.sort_by(f64::total_cmp);
        let med = sorted_median(&values);
        if med <= 0.0 {
            log::warn!("site '{site}' has zero median throughput; skipped");
            skipped.push(site.clone());
            continue;
        }
        used += 1;
        for &(ts, bytes) in samples {
            let local_h = (ts / 3600.0 + opts.tz_offset_h).rem_euclid(24.0);
            let b = ((local_h / opts.bin_h) as usize).min(n_bins - 1);
            per_bin[b].push(bytes / med);
        }
    }
    if used == 0 {
        return Err(Error::Validation("every site has zero median throughput".into()));
    }
    let mut median = Vec::with_capacity(n_bins);
    let mut p95 = Vec::with_capacity(n_bins);
    for (b, xs) in per_bin.iter_mut().enumerate() {
        if xs.is_empty() {
            log::warn!("time-of-day bin {b} has no samples; set to 0");
            median.push(0.0);
            p95.push(0.0);
            continue;
        }
        xs.sort_by(f64::total_cmp);
        median.push(sorted_median(xs));
        p95.push(sorted_quantile(xs, 0.95).max(sorted_median(xs)));
    }
    Ok(DiurnalProfile {
        bin_h: opts.bin_h,
        median,
        p95,
        sites_used: used,
        sites_skipped: skipped,
    })
}

pub fn diurnal_profile_from_series(path: impl AsRef<Path>, opts: &DiurnalOptions) -> Result<DiurnalProfile> {
    read_diurnal_series(File::open(path)?, opts)
}

pub fn write_diurnal_csv<W: Write>(out: W, profile: &DiurnalProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tod_h", "median", "p95"])?;
    for (i, (m, p)) in profile.median.iter().zip(&profile.p95).enumerate() {
        w.write_record([
            format!("{}", (i as f64 + 0.5) * profile.bin_h),
            format!("{m}"),
            format!("{p}"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a `tod_h,median,p95` profile as written by [`write_diurnal_csv`].
/// Rows must be the consecutive bins of a uniform grid over one day.
pub fn read_diurnal_csv<R: Read>(reader: R) -> Result<DiurnalProfile> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let mut tod = Vec::new();
    let mut median = Vec::new();
    let mut p95 = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|x| x.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("expected 3 numeric fields, got '{}'", rec.iter().collect::<Vec<_>>().join(",")),
                })
        };
        tod.push(field(0)?);
        median.push(field(1)?);
        p95.push(field(2)?);
    }
    if tod.is_empty() {
        return Err(Error::Validation("diurnal profile file has no rows".into()));
    }
    let bin_h = 24.0 / tod.len() as f64;
    for (i, t) in tod.iter().enumerate() {
        if (t - (i as f64 + 0.5) * bin_h).abs() > 1e-6 {
            return Err(Error::Validation(format!("row {} is not the center of bin {i} of {bin_h} h", i + 1)));
        }
    }
    DiurnalProfile::from_curves(bin_h, median, Some(p95))
}

/// Resample bin values onto a new uniform grid over `[0, span)`. Coarser
/// target bins take the max of the source bins centered inside them; finer
/// ones take the source bin holding their center.
fn resample_max(src: &[f64], src_step: f64, span: f64, dst_step: f64) -> Result<Vec<f64>> {
    let n = bins_for(span, dst_step, "target")?;
    Ok((0..n)
        .map(|i| {
            let a = i as f64 * dst_step;
            let b = a + dst_step;
            let mut best: Option<f64> = None;
            for (j, v) in src.iter().enumerate() {
                let c = (j as f64 + 0.5) * src_step;
                if c >= a - 1e-9 && c < b - 1e-9 {
                    best = Some(best.map_or(*v, |x: f64| x.max(*v)));
                }
            }
            best.unwrap_or_else(|| {
                let mid = a + 0.5 * dst_step;
                src[((mid / src_step) as usize).min(src.len() - 1)]
            })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandMeta {
    /// Peak single-cell demand, in single-satellite capacity units.
    pub multiplier_m: f64,
    pub statistic: DiurnalStatistic,
    pub lat_step_deg: f64,
    pub lst_step_h: f64,
    pub aggregate_demand: f64,
    pub provenance: BTreeMap<String, String>,
}

/// Demand on a latitude x local-solar-time grid, row-major by latitude.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandGrid {
    n_lat: usize,
    n_lst: usize,
    values: Vec<f64>,
    pub meta: DemandMeta,
}

impl DemandGrid {
    /// Grid from raw cell values (`n_lat` rows of `n_lst`).
    pub fn from_values(lat_step_deg: f64, lst_step_h: f64, values: Vec<f64>) -> Result<Self> {
        let n_lat = bins_for(180.0, lat_step_deg, "latitude")?;
        let n_lst = bins_for(24.0, lst_step_h, "local time")?;
        if values.len() != n_lat * n_lst {
            return Err(invalid(format!("expected {} cells, got {}", n_lat * n_lst, values.len())));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation("demand must be finite and >= 0".into()));
        }
        let peak = values.iter().copied().fold(0.0, f64::max);
        let sum = values.iter().sum();
        Ok(Self {
            n_lat,
            n_lst,
            values,
            meta: DemandMeta {
                multiplier_m: peak,
                statistic: DiurnalStatistic::Median,
                lat_step_deg,
                lst_step_h,
                aggregate_demand: sum,
                provenance: BTreeMap::new(),
            },
        })
    }

    pub fn zeros(lat_step_deg: f64, lst_step_h: f64) -> Result<Self> {
        let n = bins_for(180.0, lat_step_deg, "latitude")? * bins_for(24.0, lst_step_h, "local time")?;
        Self::from_values(lat_step_deg, lst_step_h, vec![0.0; n])
    }

    pub fn n_lat(&self) -> usize {
        self.n_lat
    }

    pub fn n_lst(&self) -> usize {
        self.n_lst
    }

    pub fn lat_step_deg(&self) -> f64 {
        self.meta.lat_step_deg
    }

    pub fn lst_step_h(&self) -> f64 {
        self.meta.lst_step_h
    }

    pub fn lat_center(&self, row: usize) -> f64 {
        -90.0 + (row as f64 + 0.5) * self.meta.lat_step_deg
    }

    pub fn lst_center(&self, col: usize) -> f64 {
        (col as f64 + 0.5) * self.meta.lst_step_h
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_lst + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Same grid rotated by `shift` local-time bins: the value at column `c`
    /// moves to column `c + shift`.
    pub fn rotate_lst(&self, shift: usize) -> Self {
        let mut out = self.clone();
        for r in 0..self.n_lat {
            for c in 0..self.n_lst {
                out.values[r * self.n_lst + (c + shift) % self.n_lst] = self.values[r * self.n_lst + c];
            }
        }
        out
    }
}

/// `D(lat, t) = M * (P(lat) / max P) * (s(t) / max s)` with `s` the diurnal
/// median; the peak cell equals `M`.
pub fn build_demand_grid(
    lat_profile: &LatitudeProfile,
    diurnal: &DiurnalProfile,
    multiplier_m: f64,
    lat_step_deg: f64,
    lst_step_h: f64,
) -> Result<DemandGrid> {
    build_demand_grid_with(lat_profile, diurnal, multiplier_m, lat_step_deg, lst_step_h, DiurnalStatistic::Median)
}

pub fn build_demand_grid_with(
    lat_profile: &LatitudeProfile,
    diurnal: &DiurnalProfile,
    multiplier_m: f64,
    lat_step_deg: f64,
    lst_step_h: f64,
    statistic: DiurnalStatistic,
) -> Result<DemandGrid> {
    if !(multiplier_m.is_finite() && multiplier_m > 0.0) {
        return Err(invalid(format!("bandwidth multiplier must be > 0, got {multiplier_m}")));
    }
    let lat = resample_max(&lat_profile.values, lat_profile.lat_step_deg, 180.0, lat_step_deg)?;
    let tod = resample_max(diurnal.curve(statistic), diurnal.bin_h, 24.0, lst_step_h)?;
    let lat_max = lat.iter().copied().fold(0.0, f64::max);
    let tod_max = tod.iter().copied().fold(0.0, f64::max);
    if lat_max <= 0.0 {
        return Err(Error::Validation("latitude profile is identically zero".into()));
    }
    if tod_max <= 0.0 {
        return Err(Error::Validation("diurnal profile is identically zero".into()));
    }
    let mut values = Vec::with_capacity(lat.len() * tod.len());
    for p in &lat {
        for s in &tod {
            values.push(multiplier_m * (p / lat_max) * (s / tod_max));
        }
    }
    let mut grid = DemandGrid::from_values(lat_step_deg, lst_step_h, values)?;
    grid.meta.multiplier_m = multiplier_m;
    grid.meta.statistic = statistic;
    Ok(grid)
}

pub fn write_demand_csv<W: Write>(out: W, grid: &DemandGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lat_deg", "lst_h", "demand"])?;
    for r in 0..grid.n_lat {
        for c in 0..grid.n_lst {
            w.write_record([
                format!("{}", grid.lat_center(r)),
                format!("{}", grid.lst_center(c)),
                format!("{}", grid.get(r, c)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a grid written by [`write_demand_csv`]. Steps come from the caller
/// (normally the JSON sidecar).
pub fn read_demand_csv<R: Read>(reader: R, lat_step_deg: f64, lst_step_h: f64) -> Result<DemandGrid> {
    let mut grid = DemandGrid::zeros(lat_step_deg, lst_step_h)?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        if i == 0 && is_header(&rec, "lat_deg") {
            continue;
        }
        let lat = parse_field(&rec, 0, "lat_deg", line)?;
        let lst = parse_field(&rec, 1, "lst_h", line)?;
        let d = parse_field(&rec, 2, "demand", line)?;
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::Validation(format!("line {line}: demand must be >= 0")));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::Validation(format!("line {line}: latitude {lat} out of range")));
        }
        let r = (((lat + 90.0) / lat_step_deg) as usize).min(grid.n_lat - 1);
        let c = ((lst.rem_euclid(24.0) / lst_step_h) as usize).min(grid.n_lst - 1);
        grid.values[r * grid.n_lst + c] = d;
    }
    let peak = grid.peak();
    grid.meta.multiplier_m = peak;
    grid.meta.aggregate_demand = grid.total();
    Ok(grid)
}

/// Earth-fixed demand field at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EarthSnapshot {
    pub utc_hour: f64,
    pub lat_step_deg: f64,
    pub lon_step_deg: f64,
    pub n_lat: usize,
    pub n_lon: usize,
    pub values: Vec<f64>,
}

impl EarthSnapshot {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_lon + col]
    }
}

/// `field(lat, lon) = density(lat, lon) * s(local_solar_time(lon, utc))`.
pub fn demand_snapshot_earth_frame(grid: &PopulationGrid, diurnal: &DiurnalProfile, utc_hour: f64) -> EarthSnapshot {
    demand_snapshot_with(grid, diurnal, utc_hour, DiurnalStatistic::Median)
}

pub fn demand_snapshot_with(
    grid: &PopulationGrid,
    diurnal: &DiurnalProfile,
    utc_hour: f64,
    statistic: DiurnalStatistic,
) -> EarthSnapshot {
    let col_factor: Vec<f64> = (0..grid.n_lon)
        .map(|c| diurnal.at(statistic, local_solar_time(grid.lon_center(c), utc_hour * 3600.0)))
        .collect();
    let mut values = Vec::with_capacity(grid.density.len());
    for r in 0..grid.n_lat {
        for (d, f) in grid.row(r).iter().zip(&col_factor) {
            values.push(d * f);
        }
    }
    EarthSnapshot {
        utc_hour,
        lat_step_deg: grid.lat_step_deg,
        lon_step_deg: grid.lon_step_deg,
        n_lat: grid.n_lat,
        n_lon: grid.n_lon,
        values,
    }
}

pub fn write_snapshot_csv<W: Write>(out: W, snap: &EarthSnapshot) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lat_deg", "lon_deg", "demand"])?;
    for r in 0..snap.n_lat {
        for c in 0..snap.n_lon {
            let v = snap.get(r, c);
            if v > 0.0 {
                w.write_record([
                    format!("{}", -90.0 + (r as f64 + 0.5) * snap.lat_step_deg),
                    format!("{}", -180.0 + (c as f64 + 0.5) * snap.lon_step_deg),
                    format!("{v}"),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(csv_text: &str) -> Result<PopulationGrid> {
        read_population_grid(csv_text.as_bytes(), 0.5, 0.5)
    }

    #[test]
    fn single_row_ingest() {
        let g = grid_from("lat_deg,lon_deg,density\n10.25,20.25,5.0\n").unwrap();
        assert_eq!(g.nonzero_cells(), 1);
        let (r, c) = g.cell_of(10.25, 20.25).unwrap();
        assert_eq!(g.get(r, c), 5.0);
        assert!((g.lat_center(r) - 10.25).abs() < 1e-12);
        assert!((g.lon_center(c) - 20.25).abs() < 1e-12);
    }

    #[test]
    fn empty_file_is_all_zero() {
        let g = grid_from("").unwrap();
        assert_eq!(g.nonzero_cells(), 0);
        assert_eq!(g.n_lat(), 360);
        assert_eq!(g.n_lon(), 720);
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(grid_from("10.25,20.25,-1\n"), Err(Error::Validation(_))));
        assert!(matches!(grid_from("10.25,20.25,NaN\n"), Err(Error::Validation(_))));
        match grid_from("lat_deg,lon_deg,density\n1,2,3\n1,oops,3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(grid_from("1,2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(grid_from("1,2,3\n1.1,2.1,4\n").is_err());
    }

    #[test]
    fn uniform_grid_profile() {
        let g = PopulationGrid::from_fn(1.0, 1.0, |_, _| 3.5).unwrap();
        let p = latitude_max_profile(&g);
        assert_eq!(p.values.len(), 180);
        assert!(p.values.iter().all(|&v| v == 3.5));
    }

    #[test]
    fn single_cell_profile() {
        let g = grid_from("10.25,20.25,5.0\n").unwrap();
        let p = latitude_max_profile(&g);
        let centers = p.centers();
        for (c, v) in centers.iter().zip(&p.values) {
            if (c - 10.25).abs() < 1e-9 {
                assert_eq!(*v, 5.0);
            } else {
                assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn constant_series_gives_unit_median() {
        let mut text = String::from("site_id,timestamp_s,bytes\n");
        for k in 0..96 {
            text += &format!("a,{},{}\n", k * 900, 1234.0);
        }
        let p = read_diurnal_series(text.as_bytes(), &DiurnalOptions::default()).unwrap();
        assert_eq!(p.n_bins(), 48);
        assert!(p.median.iter().all(|&m| (m - 1.0).abs() < 1e-15));
        assert_eq!(p.sites_used, 1);
    }

    #[test]
    fn zero_site_skipped_and_empty_rejected() {
        let mut text = String::new();
        for k in 0..48 {
            text += &format!("dead,{},0\n", k * 1800);
            text += &format!("live,{},{}\n", k * 1800, 10 + k);
        }
        let p = read_diurnal_series(text.as_bytes(), &DiurnalOptions::default()).unwrap();
        assert_eq!(p.sites_skipped, vec!["dead".to_string()]);
        assert_eq!(p.sites_used, 1);
        assert!(matches!(
            read_diurnal_series("site_id,timestamp_s,bytes\n".as_bytes(), &DiurnalOptions::default()),
            Err(Error::Validation(_))
        ));
        assert!(read_diurnal_series("a,1,-5\n".as_bytes(), &DiurnalOptions::default()).is_err());
    }

    #[test]
    fn timezone_offset_shifts_bins() {
        let text = "a,0,1\na,3600,3\na,7200,2\n";
        let opts = DiurnalOptions {
            bin_h: 1.0,
            tz_offset_h: 2.0,
        };
        let p = read_diurnal_series(text.as_bytes(), &opts).unwrap();
        // median 2: bins 2,3,4 hold 0.5, 1.5, 1.0
        assert_eq!(&p.median[2..5], &[0.5, 1.5, 1.0]);
    }

    #[test]
    fn percentile_matches_linear_interpolation() {
        let xs: Vec<f64> = (1..=11).map(|x| x as f64).collect();
        assert!((sorted_quantile(&xs, 0.95) - 10.5).abs() < 1e-12);
        assert_eq!(sorted_median(&[1.0, 2.0, 3.0, 4.0]), 2.5);
    }

    #[test]
    fn constant_profiles_fill_with_m() {
        let lat = LatitudeProfile::new(0.5, vec![2.0; 360]).unwrap();
        let tod = DiurnalProfile::from_curves(0.5, vec![0.7; 48], None).unwrap();
        let d = build_demand_grid(&lat, &tod, 4.0, 0.5, 0.5).unwrap();
        assert_eq!(d.n_lat(), 360);
        assert_eq!(d.n_lst(), 48);
        assert!(d.values().iter().all(|&v| v == 4.0));
        assert!(build_demand_grid(&lat, &tod, 0.0, 0.5, 0.5).is_err());
        let zero = LatitudeProfile::new(0.5, vec![0.0; 360]).unwrap();
        assert!(matches!(build_demand_grid(&zero, &tod, 1.0, 0.5, 0.5), Err(Error::Validation(_))));
    }

    #[test]
    fn planted_peak_is_unique() {
        let mut lat = vec![0.1; 360];
        lat[250] = 1.0;
        let mut tod = vec![0.2; 48];
        tod[40] = 0.9;
        let lp = LatitudeProfile::new(0.5, lat).unwrap();
        let dp = DiurnalProfile::from_curves(0.5, tod, None).unwrap();
        let d = build_demand_grid(&lp, &dp, 1.0, 0.5, 0.5).unwrap();
        let ones: Vec<_> = d.values().iter().enumerate().filter(|(_, &v)| v == 1.0).collect();
        assert_eq!(ones.len(), 1);
        assert_eq!(ones[0].0, 250 * 48 + 40);
    }

    #[test]
    fn coarsening_takes_bin_max() {
        let mut lat = vec![0.0; 360];
        lat[181] = 5.0; // center 0.75 deg
        lat[10] = 1.0;
        let lp = LatitudeProfile::new(0.5, lat).unwrap();
        let dp = DiurnalProfile::from_curves(0.5, vec![1.0; 48], None).unwrap();
        let d = build_demand_grid(&lp, &dp, 2.0, 15.0, 3.0).unwrap();
        assert_eq!(d.n_lat(), 12);
        assert_eq!(d.n_lst(), 8);
        assert_eq!(d.get(6, 0), 2.0);
        assert!((d.get(0, 3) - 0.4).abs() < 1e-12);
        assert_eq!(d.get(3, 3), 0.0);
    }

    #[test]
    fn snapshot_constant_diurnal_and_periodicity() {
        let g = PopulationGrid::from_fn(5.0, 5.0, |lat, lon| (lat.abs() + lon.abs()) / 10.0).unwrap();
        let flat = DiurnalProfile::from_curves(0.5, vec![0.8; 48], None).unwrap();
        let s = demand_snapshot_earth_frame(&g, &flat, 7.3);
        for r in 0..g.n_lat() {
            for c in 0..g.n_lon() {
                assert!((s.get(r, c) - 0.8 * g.get(r, c)).abs() < 1e-12);
            }
        }
        let tod: Vec<f64> = (0..48).map(|i| 1.0 + (i as f64 / 7.0).sin()).collect();
        let dp = DiurnalProfile::from_curves(0.5, tod, None).unwrap();
        let a = demand_snapshot_earth_frame(&g, &dp, 3.25);
        let b = demand_snapshot_earth_frame(&g, &dp, 27.25);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn demand_csv_roundtrip() {
        let lat = LatitudeProfile::new(15.0, (0..12).map(|i| i as f64).collect()).unwrap();
        let tod = DiurnalProfile::from_curves(3.0, (0..8).map(|i| 1.0 + i as f64).collect(), None).unwrap();
        let d = build_demand_grid(&lat, &tod, 3.0, 15.0, 3.0).unwrap();
        let mut buf = Vec::new();
        write_demand_csv(&mut buf, &d).unwrap();
        let back = read_demand_csv(buf.as_slice(), 15.0, 3.0).unwrap();
        for (a, b) in d.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
