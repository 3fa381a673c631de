//! Constellation design on the sun-fixed demand grid.
//!
//! Two greedy covers consume a [`DemandGrid`] one unit of capacity at a time:
//! sun-synchronous planes, which are fixed in the (latitude, local time)
//! frame and so remove demand only along their trace, and Walker-delta
//! shells, which cover a latitude band at every local time at once.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::astro::{nodal_period, sun_synchronous_inclination, OrbitSpec, Propagator};
use crate::coverage::{min_walker_total, CoverageOptions, FootprintSpec, WalkerConfig};
use crate::demand::{build_demand_grid, DemandGrid, DiurnalProfile, LatitudeProfile};
use crate::error::{invalid, Error, Result};
use crate::radiation::{median_exposure, ExposureOptions, RadiationMap};
use crate::sphere::{central_angle_vec_deg, unit_vector};

/// Satellites per SS plane: the fewest equally spaced satellites whose
/// footprints overlap along the orbit, `ceil(180 / lambda)`.
pub fn sats_per_ss_plane(fp: &FootprintSpec) -> u32 {
    let n = 180.0 / fp.lambda_deg();
    // guard exact divisors against rounding noise
    let r = n.round();
    if (n - r).abs() < 1e-9 {
        r.max(1.0) as u32
    } else {
        n.ceil().max(1.0) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SSPlane {
    pub ltan_h: f64,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub n_sats: u32,
}

impl SSPlane {
    pub fn new(ltan_h: f64, altitude_km: f64, fp: &FootprintSpec) -> Result<Self> {
        if !ltan_h.is_finite() {
            return Err(invalid("LTAN must be finite"));
        }
        let inclination_deg = sun_synchronous_inclination(altitude_km)?;
        Ok(Self {
            ltan_h: crate::sphere::wrap_hours(ltan_h),
            altitude_km,
            inclination_deg,
            n_sats: sats_per_ss_plane(fp),
        })
    }

    /// Satellites equally spaced in argument of latitude, epoch 0.
    pub fn orbits(&self) -> Result<Vec<OrbitSpec>> {
        (0..self.n_sats)
            .map(|k| {
                OrbitSpec::from_ltan(
                    self.altitude_km,
                    self.inclination_deg,
                    self.ltan_h,
                    360.0 * k as f64 / self.n_sats as f64,
                    0.0,
                )
            })
            .collect()
    }
}

/// Shape of a latitude x local-time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub lat_step_deg: f64,
    pub lst_step_h: f64,
}

impl GridShape {
    pub fn of(grid: &DemandGrid) -> Self {
        Self {
            lat_step_deg: grid.lat_step_deg(),
            lst_step_h: grid.lst_step_h(),
        }
    }

    fn dims(&self) -> Result<(usize, usize)> {
        let g = DemandGrid::zeros(self.lat_step_deg, self.lst_step_h)?;
        Ok((g.n_lat(), g.n_lst()))
    }
}

/// Trace points of an SS plane with LTAN `ltan_h` over one nodal period, as
/// (lat, local time) pairs.
fn trace_points(ltan_h: f64, altitude_km: f64, inclination_deg: f64) -> Result<Vec<(f64, f64)>> {
    let orbit = OrbitSpec::from_ltan(altitude_km, inclination_deg, ltan_h, 0.0, 0.0)?;
    let prop = Propagator::new(&orbit);
    let period = nodal_period(altitude_km, inclination_deg)?;
    // keep consecutive samples within ~0.03 deg of arc
    let dt = 0.03_f64.to_radians() / prop.rates().arg_lat_rate.abs();
    let n = (period / dt).ceil() as usize;
    Ok((0..=n)
        .map(|k| {
            let s = prop.sample(period * k as f64 / n as f64);
            (s.lat_deg, s.local_solar_time_h)
        })
        .collect())
}

/// Cells touched by a trace: every cell the trace passes through, plus every
/// cell whose center lies within `lambda` of the trace. Local time maps to
/// longitude at 15 deg/h.
fn cells_near_trace(points: &[(f64, f64)], shape: &GridShape, lambda_deg: f64) -> Result<BTreeSet<(usize, usize)>> {
    let (n_lat, n_lst) = shape.dims()?;
    let lat_c = |r: usize| -90.0 + (r as f64 + 0.5) * shape.lat_step_deg;
    let lon_c = |c: usize| 15.0 * (c as f64 + 0.5) * shape.lst_step_h;
    let centers: Vec<Vec<[f64; 3]>> = (0..n_lat)
        .map(|r| (0..n_lst).map(|c| unit_vector(lat_c(r), lon_c(c))).collect())
        .collect();
    let col_width_deg = 15.0 * shape.lst_step_h;
    let mut out = BTreeSet::new();
    for &(lat, lst) in points {
        let r0 = (((lat + 90.0) / shape.lat_step_deg) as usize).min(n_lat - 1);
        let c0 = ((lst.rem_euclid(24.0) / shape.lst_step_h) as usize).min(n_lst - 1);
        out.insert((r0, c0));
        let v = unit_vector(lat, 15.0 * lst);
        for r in 0..n_lat {
            let lc = lat_c(r);
            if (lc - lat).abs() > lambda_deg {
                continue;
            }
            let cos_lat = lc.to_radians().cos();
            let s = lambda_deg.to_radians().sin();
            let half = if cos_lat <= s || lambda_deg >= 90.0 {
                180.0
            } else {
                (s / cos_lat).asin().to_degrees()
            };
            if half >= 180.0 || 2.0 * half + col_width_deg >= 360.0 {
                for c in 0..n_lst {
                    if central_angle_vec_deg(&v, &centers[r][c]) <= lambda_deg {
                        out.insert((r, c));
                    }
                }
                continue;
            }
            let lon = 15.0 * lst;
            let lo = ((lon - half) / col_width_deg - 0.5).floor() as i64;
            let hi = ((lon + half) / col_width_deg - 0.5).ceil() as i64;
            for ci in lo..=hi {
                let c = ci.rem_euclid(n_lst as i64) as usize;
                if central_angle_vec_deg(&v, &centers[r][c]) <= lambda_deg {
                    out.insert((r, c));
                }
            }
        }
    }
    Ok(out)
}

/// Demand-grid cells served by an SS plane: cells within `lambda` of its
/// solar-frame trace over one nodal period, both branches included.
///
/// The trace is computed for the LTAN's offset within its local-time bin
/// and then shifted by whole bins, so shifting the LTAN by a multiple of the
/// bin width shifts the set by exactly that many columns.
pub fn ss_plane_trace_cells(plane: &SSPlane, shape: &GridShape, fp: &FootprintSpec) -> Result<BTreeSet<(usize, usize)>> {
    let (_, n_lst) = shape.dims()?;
    let ltan = crate::sphere::wrap_hours(plane.ltan_h);
    let k = (ltan / shape.lst_step_h + 1e-9).floor();
    let offset = ((ltan - k * shape.lst_step_h).max(0.0) * 1e9).round() / 1e9;
    let base = cells_near_trace(
        &trace_points(offset, plane.altitude_km, plane.inclination_deg)?,
        shape,
        fp.lambda_deg(),
    )?;
    let k = k as usize;
    Ok(base.into_iter().map(|(r, c)| (r, (c + k) % n_lst)).collect())
}

/// One greedy iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditStep {
    pub iteration: usize,
    pub cell_row: usize,
    pub cell_col: usize,
    pub cell_lat_deg: f64,
    pub cell_lst_h: f64,
    pub cell_residual_before: f64,
    /// Index into the design's planes or shells.
    pub component: usize,
    /// Demand removed by this step, summed over cells.
    pub removed: f64,
    pub residual_total_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerShell {
    pub config: WalkerConfig,
    /// Latitude band the shell is credited with covering.
    pub band_limit_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
pub enum DesignVariant {
    Ss { planes: Vec<SSPlane> },
    Walker { shells: Vec<WalkerShell> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstellationDesign {
    #[serde(flatten)]
    pub variant: DesignVariant,
    pub total_sats: u64,
    pub audit_log: Vec<AuditStep>,
}

impl ConstellationDesign {
    /// SS planes, or orbital planes summed over Walker shells.
    pub fn n_planes(&self) -> u64 {
        match &self.variant {
            DesignVariant::Ss { planes } => planes.len() as u64,
            DesignVariant::Walker { shells } => shells.iter().map(|s| s.config.planes_p as u64).sum(),
        }
    }

    pub fn n_components(&self) -> usize {
        match &self.variant {
            DesignVariant::Ss { planes } => planes.len(),
            DesignVariant::Walker { shells } => shells.len(),
        }
    }

    pub fn method(&self) -> &'static str {
        match self.variant {
            DesignVariant::Ss { .. } => "ss",
            DesignVariant::Walker { .. } => "wd",
        }
    }

    /// Every satellite's elements at epoch.
    pub fn satellites(&self) -> Result<Vec<OrbitSpec>> {
        let mut out = Vec::with_capacity(self.total_sats as usize);
        match &self.variant {
            DesignVariant::Ss { planes } => {
                for p in planes {
                    out.extend(p.orbits()?);
                }
            }
            DesignVariant::Walker { shells } => {
                for s in shells {
                    out.extend(s.config.orbits());
                }
            }
        }
        Ok(out)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

/// Residual demand, same shape as the demand grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGrid {
    pub n_lat: usize,
    pub n_lst: usize,
    pub values: Vec<f64>,
}

impl ResidualGrid {
    pub fn from_demand(d: &DemandGrid) -> Self {
        Self {
            n_lat: d.n_lat(),
            n_lst: d.n_lst(),
            values: d.values().to_vec(),
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Take up to one unit from each listed cell; returns the amount taken.
    fn subtract_unit<'a>(&mut self, cells: impl IntoIterator<Item = &'a (usize, usize)>) -> f64 {
        let mut removed = 0.0;
        for &(r, c) in cells {
            let v = &mut self.values[r * self.n_lst + c];
            let take = v.min(1.0);
            *v -= take;
            removed += take;
        }
        removed
    }

    fn removable<'a>(&self, cells: impl IntoIterator<Item = &'a (usize, usize)>) -> f64 {
        cells.into_iter().map(|&(r, c)| self.values[r * self.n_lst + c].min(1.0)).sum()
    }

    /// Max-residual cell; ties go to larger |lat|, then smaller local time,
    /// then the northern cell.
    fn argmax(&self, lat_center: impl Fn(usize) -> f64) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for r in 0..self.n_lat {
            for c in 0..self.n_lst {
                let v = self.values[r * self.n_lst + c];
                if v <= 0.0 {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((br, bc, bv)) => {
                        if v != bv {
                            v > bv
                        } else {
                            let (a, b) = (lat_center(r).abs(), lat_center(br).abs());
                            if a != b {
                                a > b
                            } else if c != bc {
                                c < bc
                            } else {
                                r > br
                            }
                        }
                    }
                };
                if better {
                    best = Some((r, c, v));
                }
            }
        }
        best.map(|(r, c, _)| (r, c))
    }
}

/// Candidate SS planes at the grid's local-time resolution: one per column,
/// ascending node through the column center.
pub fn ss_candidates(
    shape: &GridShape,
    altitude_km: f64,
    fp: &FootprintSpec,
) -> Result<Vec<(SSPlane, BTreeSet<(usize, usize)>)>> {
    let (_, n_lst) = shape.dims()?;
    let base = SSPlane::new(0.5 * shape.lst_step_h, altitude_km, fp)?;
    let cells0 = ss_plane_trace_cells(&base, shape, fp)?;
    (0..n_lst)
        .map(|k| {
            let plane = SSPlane::new((k as f64 + 0.5) * shape.lst_step_h, altitude_km, fp)?;
            let cells = cells0.iter().map(|&(r, c)| (r, (c + k) % n_lst)).collect();
            Ok((plane, cells))
        })
        .collect()
}

/// Greedy SS-plane cover.
///
/// Each iteration takes the max-residual cell, tries every candidate plane
/// whose trace contains it, keeps the one removing the most residual
/// (ties: smaller LTAN), and takes one unit from every cell on its trace.
pub fn greedy_ss_cover(demand: &DemandGrid, altitude_km: f64, fp: &FootprintSpec) -> Result<ConstellationDesign> {
    let shape = GridShape::of(demand);
    let candidates = ss_candidates(&shape, altitude_km, fp)?;
    let n_sats = sats_per_ss_plane(fp);
    let mut residual = ResidualGrid::from_demand(demand);
    let mut planes: Vec<SSPlane> = Vec::new();
    let mut audit = Vec::new();
    while let Some((r, c)) = residual.argmax(|r| demand.lat_center(r)) {
        let before = residual.values[r * residual.n_lst + c];
        let scored: Vec<(usize, f64)> = candidates
            .par_iter()
            .enumerate()
            .filter(|(_, (_, cells))| cells.contains(&(r, c)))
            .map(|(k, (_, cells))| (k, residual.removable(cells)))
            .collect();
        let Some(&(k, _)) = scored
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        else {
            return Err(Error::UncoverableDemand {
                lat_deg: demand.lat_center(r),
                lst_h: demand.lst_center(c),
                reason: "no sun-synchronous trace reaches this cell".into(),
            });
        };
        let removed = residual.subtract_unit(&candidates[k].1);
        // planes may repeat at one LTAN; every pick is its own plane
        planes.push(candidates[k].0);
        let component = planes.len() - 1;
        audit.push(AuditStep {
            iteration: audit.len(),
            cell_row: r,
            cell_col: c,
            cell_lat_deg: demand.lat_center(r),
            cell_lst_h: demand.lst_center(c),
            cell_residual_before: before,
            component,
            removed,
            residual_total_after: residual.total(),
        });
    }
    let total_sats = planes.len() as u64 * n_sats as u64;
    Ok(ConstellationDesign {
        variant: DesignVariant::Ss { planes },
        total_sats,
        audit_log: audit,
    })
}

/// Settings of the Walker-delta baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkerDesignOptions {
    pub inclination_step_deg: f64,
    pub min_inclination_deg: f64,
    pub max_inclination_deg: f64,
    pub coverage: CoverageOptions,
}

impl Default for WalkerDesignOptions {
    fn default() -> Self {
        Self {
            inclination_step_deg: 5.0,
            min_inclination_deg: 30.0,
            max_inclination_deg: 90.0,
            coverage: CoverageOptions::default(),
        }
    }
}

/// Memo of `min_walker_total` results keyed by (altitude, inclination, band).
#[derive(Debug, Default)]
pub struct WalkerCache {
    inner: Mutex<BTreeMap<(u64, u64, u64), WalkerConfig>>,
}

impl WalkerCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_search(
        &self,
        altitude_km: f64,
        inclination_deg: f64,
        band_deg: f64,
        fp: &FootprintSpec,
        opts: &CoverageOptions,
    ) -> Result<WalkerConfig> {
        let key = (altitude_km.to_bits(), inclination_deg.to_bits(), band_deg.to_bits());
        if let Some(cfg) = self.inner.lock().ok().and_then(|m| m.get(&key).copied()) {
            return Ok(cfg);
        }
        let cfg = min_walker_total(altitude_km, inclination_deg, fp, band_deg, opts)?;
        if let Ok(mut m) = self.inner.lock() {
            m.insert(key, cfg);
        }
        Ok(cfg)
    }
}

/// Default shell altitudes, alternating 10 km below and above the base.
pub fn default_shell_altitudes(base_km: f64) -> Vec<f64> {
    vec![base_km - 10.0, base_km + 10.0]
}

/// Inclination of the shell serving a latitude: `|lat|` rounded up to the
/// next step, at least the configured minimum.
pub fn shell_inclination(lat_deg: f64, opts: &WalkerDesignOptions) -> f64 {
    let step = opts.inclination_step_deg;
    let up = (lat_deg.abs() / step - 1e-9).ceil() * step;
    up.max(opts.min_inclination_deg)
}

/// Greedy multi-shell Walker-delta cover.
///
/// Each iteration takes the max-residual cell, adds the smallest Walker
/// shell covering `|lat| <= i` with `i` from [`shell_inclination`] at the
/// next altitude in the cycle, and takes one unit from every cell in that
/// band at every local time.
pub fn greedy_walker_cover(
    demand: &DemandGrid,
    shell_altitudes: &[f64],
    fp: &FootprintSpec,
    opts: &WalkerDesignOptions,
    cache: &WalkerCache,
) -> Result<ConstellationDesign> {
    if shell_altitudes.is_empty() {
        return Err(invalid("need at least one shell altitude"));
    }
    if !(opts.inclination_step_deg > 0.0) {
        return Err(invalid("inclination step must be > 0"));
    }
    let mut residual = ResidualGrid::from_demand(demand);
    let mut shells: Vec<WalkerShell> = Vec::new();
    let mut audit = Vec::new();
    while let Some((r, c)) = residual.argmax(|r| demand.lat_center(r)) {
        let lat = demand.lat_center(r);
        let before = residual.values[r * residual.n_lst + c];
        let altitude = shell_altitudes[shells.len() % shell_altitudes.len()];
        let shell_fp = fp.at_altitude(altitude)?;
        if lat.abs() > opts.max_inclination_deg + shell_fp.lambda_deg() {
            return Err(Error::UncoverableDemand {
                lat_deg: lat,
                lst_h: demand.lst_center(c),
                reason: format!("beyond inclination {} plus footprint", opts.max_inclination_deg),
            });
        }
        let incl = shell_inclination(lat, opts).min(opts.max_inclination_deg);
        let credited = incl.max(lat.abs());
        let cfg = cache.get_or_search(altitude, incl, credited, &shell_fp, &opts.coverage)?;
        let band: Vec<(usize, usize)> = (0..demand.n_lat())
            .filter(|&rr| demand.lat_center(rr).abs() <= credited)
            .flat_map(|rr| (0..demand.n_lst()).map(move |cc| (rr, cc)))
            .collect();
        let removed = residual.subtract_unit(&band);
        shells.push(WalkerShell {
            config: cfg,
            band_limit_deg: credited,
        });
        audit.push(AuditStep {
            iteration: audit.len(),
            cell_row: r,
            cell_col: c,
            cell_lat_deg: lat,
            cell_lst_h: demand.lst_center(c),
            cell_residual_before: before,
            component: shells.len() - 1,
            removed,
            residual_total_after: residual.total(),
        });
    }
    let total_sats = shells.iter().map(|s| s.config.total_sats_t as u64).sum();
    Ok(ConstellationDesign {
        variant: DesignVariant::Walker { shells },
        total_sats,
        audit_log: audit,
    })
}

/// Replay a design's audit log against the initial demand. Every step's
/// claimed removal must match the recomputed one exactly; returns the final
/// residual.
pub fn replay_audit(demand: &DemandGrid, design: &ConstellationDesign, fp: &FootprintSpec) -> Result<ResidualGrid> {
    let shape = GridShape::of(demand);
    let mut residual = ResidualGrid::from_demand(demand);
    let mut trace_cache: BTreeMap<u64, BTreeSet<(usize, usize)>> = BTreeMap::new();
    for (i, step) in design.audit_log.iter().enumerate() {
        if step.iteration != i {
            return Err(Error::Validation(format!("audit step {i} is out of order")));
        }
        let cells: Vec<(usize, usize)> = match &design.variant {
            DesignVariant::Ss { planes } => {
                let p = planes
                    .get(step.component)
                    .ok_or_else(|| Error::Validation(format!("audit step {i}: no plane {}", step.component)))?;
                let cells = match trace_cache.get(&p.ltan_h.to_bits()) {
                    Some(c) => c.clone(),
                    None => {
                        let c = ss_plane_trace_cells(p, &shape, fp)?;
                        trace_cache.insert(p.ltan_h.to_bits(), c.clone());
                        c
                    }
                };
                cells.into_iter().collect()
            }
            DesignVariant::Walker { shells } => {
                let s = shells
                    .get(step.component)
                    .ok_or_else(|| Error::Validation(format!("audit step {i}: no shell {}", step.component)))?;
                (0..demand.n_lat())
                    .filter(|&r| demand.lat_center(r).abs() <= s.band_limit_deg)
                    .flat_map(|r| (0..demand.n_lst()).map(move |c| (r, c)))
                    .collect()
            }
        };
        let removed = residual.subtract_unit(&cells);
        if removed != step.removed || residual.total() != step.residual_total_after {
            return Err(Error::Validation(format!(
                "audit step {i}: claimed removal {} but replay removed {removed}",
                step.removed
            )));
        }
    }
    Ok(residual)
}

/// Inputs shared by every row of a sweep.
#[derive(Debug, Clone)]
pub struct SweepInputs {
    pub lat_profile: LatitudeProfile,
    pub diurnal: DiurnalProfile,
    pub lat_step_deg: f64,
    pub lst_step_h: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub altitude_km: f64,
    pub shell_altitudes: Vec<f64>,
    pub walker: WalkerDesignOptions,
    pub exposure: ExposureOptions,
    pub exposure_duration_s: f64,
}

impl SweepOptions {
    pub fn new(altitude_km: f64) -> Self {
        Self {
            altitude_km,
            shell_altitudes: default_shell_altitudes(altitude_km),
            walker: WalkerDesignOptions::default(),
            exposure: ExposureOptions::default(),
            exposure_duration_s: crate::constants::SOLAR_DAY_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: f64,
    pub method: String,
    pub total_sats: Option<u64>,
    pub n_planes: Option<u64>,
    pub median_electron_fluence: Option<f64>,
    pub median_proton_fluence: Option<f64>,
    pub aggregate_demand: f64,
    pub error: Option<String>,
}

fn sweep_row(
    m: f64,
    aggregate: f64,
    method: &str,
    design: Result<ConstellationDesign>,
    map: &dyn RadiationMap,
    opts: &SweepOptions,
) -> SweepRow {
    let mut row = SweepRow {
        m,
        method: method.to_string(),
        total_sats: None,
        n_planes: None,
        median_electron_fluence: None,
        median_proton_fluence: None,
        aggregate_demand: aggregate,
        error: None,
    };
    let result = design.and_then(|d| {
        row.total_sats = Some(d.total_sats);
        row.n_planes = Some(d.n_planes());
        let sats = d.satellites()?;
        if sats.is_empty() {
            return Ok(None);
        }
        median_exposure(&sats, map, opts.exposure_duration_s, &opts.exposure).map(Some)
    });
    match result {
        Ok(Some(med)) => {
            row.median_electron_fluence = Some(med.electron);
            row.median_proton_fluence = Some(med.proton);
        }
        Ok(None) => {}
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// For each M build the demand grid, run both covers and record counts and
/// median exposure. Failures stay in their row; the sweep continues.
pub fn design_sweep(
    m_values: &[f64],
    inputs: &SweepInputs,
    fp: &FootprintSpec,
    map: &dyn RadiationMap,
    opts: &SweepOptions,
    cache: &WalkerCache,
) -> Result<Vec<SweepRow>> {
    if m_values.is_empty() {
        return Err(invalid("no bandwidth multipliers given"));
    }
    if m_values.iter().any(|m| !(m.is_finite() && *m > 0.0)) || m_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("bandwidth multipliers must be positive and ascending"));
    }
    let ss_fp = fp.at_altitude(opts.altitude_km)?;
    let mut rows = Vec::with_capacity(2 * m_values.len());
    for &m in m_values {
        let grid = build_demand_grid(&inputs.lat_profile, &inputs.diurnal, m, inputs.lat_step_deg, inputs.lst_step_h);
        let grid = match grid {
            Ok(g) => g,
            Err(e) => {
                for method in ["ss", "wd"] {
                    rows.push(SweepRow {
                        m,
                        method: method.into(),
                        total_sats: None,
                        n_planes: None,
                        median_electron_fluence: None,
                        median_proton_fluence: None,
                        aggregate_demand: f64::NAN,
                        error: Some(e.to_string()),
                    });
                }
                continue;
            }
        };
        let agg = grid.total();
        let ss = greedy_ss_cover(&grid, opts.altitude_km, &ss_fp);
        rows.push(sweep_row(m, agg, "ss", ss, map, opts));
        let wd = greedy_walker_cover(&grid, &opts.shell_altitudes, fp, &opts.walker, cache);
        rows.push(sweep_row(m, agg, "wd", wd, map, opts));
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let opt_u = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_else(|| "NA".into());
    let opt_f = |v: Option<f64>| v.map(|x| format!("{x:.9e}")).unwrap_or_else(|| "NA".into());
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "M",
        "method",
        "total_sats",
        "n_planes",
        "median_electron_fluence",
        "median_proton_fluence",
    ])?;
    for r in rows {
        w.write_record([
            format!("{}", r.m),
            r.method.clone(),
            opt_u(r.total_sats),
            opt_u(r.n_planes),
            opt_f(r.median_electron_fluence),
            opt_f(r.median_proton_fluence),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp() -> FootprintSpec {
        FootprintSpec::new(560.0, 25.0).unwrap()
    }

    #[test]
    fn plane_sizes() {
        let n = |l: f64| sats_per_ss_plane(&FootprintSpec::from_central_angle(l).unwrap());
        assert_eq!(n(22.96), 8);
        assert_eq!(n(90.0), 2);
        assert_eq!(n(8.45), 22);
    }

    #[test]
    fn trace_contains_both_nodes() {
        let shape = GridShape {
            lat_step_deg: 0.5,
            lst_step_h: 0.5,
        };
        for ltan in [0.25, 10.5, 13.75, 22.0] {
            let plane = SSPlane::new(ltan, 560.0, &fp()).unwrap();
            let cells = ss_plane_trace_cells(&plane, &shape, &fp()).unwrap();
            let eq = 180; // row holding latitude 0..0.5
            let col = |h: f64| ((h.rem_euclid(24.0)) / 0.5) as usize % 48;
            assert!(cells.contains(&(eq, col(ltan))), "ascending {ltan}");
            assert!(cells.contains(&(eq, col(ltan + 12.0))), "descending {ltan}");
        }
    }

    #[test]
    fn trace_shift_is_exact() {
        let shape = GridShape {
            lat_step_deg: 0.5,
            lst_step_h: 0.5,
        };
        let a = ss_plane_trace_cells(&SSPlane::new(3.2, 560.0, &fp()).unwrap(), &shape, &fp()).unwrap();
        let b = ss_plane_trace_cells(&SSPlane::new(3.2 + 2.5, 560.0, &fp()).unwrap(), &shape, &fp()).unwrap();
        let shifted: BTreeSet<_> = a.iter().map(|&(r, c)| (r, (c + 5) % 48)).collect();
        assert_eq!(shifted, b);
    }

    #[test]
    fn zero_demand_is_empty_design() {
        let d = DemandGrid::zeros(15.0, 3.0).unwrap();
        let ss = greedy_ss_cover(&d, 560.0, &fp()).unwrap();
        assert_eq!(ss.total_sats, 0);
        assert!(ss.audit_log.is_empty());
        let wd = greedy_walker_cover(&d, &[550.0, 570.0], &fp(), &WalkerDesignOptions::default(), &WalkerCache::new()).unwrap();
        assert_eq!(wd.total_sats, 0);
    }

    #[test]
    fn single_cell_of_three() {
        let mut v = vec![0.0; 12 * 8];
        v[7 * 8 + 2] = 3.0;
        let d = DemandGrid::from_values(15.0, 3.0, v).unwrap();
        let ss = greedy_ss_cover(&d, 560.0, &fp()).unwrap();
        assert_eq!(ss.n_components(), 3);
        assert_eq!(ss.total_sats, 3 * sats_per_ss_plane(&fp()) as u64);
        assert!(replay_audit(&d, &ss, &fp()).unwrap().is_zero());
    }

    #[test]
    fn shell_inclination_rounding() {
        let o = WalkerDesignOptions::default();
        assert_eq!(shell_inclination(12.0, &o), 30.0);
        assert_eq!(shell_inclination(-40.25, &o), 45.0);
        assert_eq!(shell_inclination(40.0, &o), 40.0);
    }

    #[test]
    fn tampered_audit_is_rejected() {
        let mut v = vec![0.0; 12 * 8];
        v[5 * 8 + 1] = 1.5;
        let d = DemandGrid::from_values(15.0, 3.0, v).unwrap();
        let mut ss = greedy_ss_cover(&d, 560.0, &fp()).unwrap();
        ss.audit_log[0].removed += 0.25;
        assert!(replay_audit(&d, &ss, &fp()).is_err());
    }
}
