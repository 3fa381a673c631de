use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde_json::{json, Value};

use heliocover::astro::{
    find_rgt_orbits, nodal_day, nodal_period, nodal_precession_rate, orbital_period, sun_synchronous_inclination,
};
use heliocover::constants::SOLAR_DAY_S;
use heliocover::coverage::{
    min_sats_single_rgt, min_walker_total, survey_table, write_survey_csv, CoverageOptions, FootprintSpec,
    DEFAULT_MIN_ELEVATION_DEG,
};
use heliocover::demand::{
    build_demand_grid_with, diurnal_profile_from_series, latitude_max_profile, load_population_grid, read_demand_csv,
    read_diurnal_csv, write_demand_csv, write_diurnal_csv, write_population_csv, write_snapshot_csv, DemandGrid,
    DiurnalOptions, DiurnalProfile, DiurnalStatistic, demand_snapshot_with,
};
use heliocover::design::{
    default_shell_altitudes, design_sweep, greedy_ss_cover, greedy_walker_cover, sats_per_ss_plane, write_sweep_csv,
    SweepInputs, SweepOptions, WalkerCache, WalkerDesignOptions,
};
use heliocover::fixtures;
use heliocover::radiation::{
    exposure_vs_inclination, load_gridded_map, tabulate, write_gridded_map, write_inclination_csv, ExposureOptions,
    GridAxes, RadiationMap, Species, SyntheticMap, DEFAULT_EXPOSURE_STEP_S, DEFAULT_RAAN_SAMPLES,
};
use heliocover::Error;

use crate::output::Emitter;
use crate::{file_sha256, CliError};

const WALKER_NOTE: &str = "walker-delta baseline is a reconstruction: one shell per greedy step, time-blind band coverage";

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orbital period, nodal period and nodal precession at one altitude.
    Period(PeriodArgs),
    /// Sun-synchronous inclination at an altitude.
    Ssinc(SsincArgs),
    /// Enumerate repeat ground tracks and size each against a Walker shell.
    RgtSurvey(SurveyArgs),
    /// Smallest Walker shell (and optionally single repeat track) covering a band.
    CoverageMin(CoverageMinArgs),
    /// Build the latitude x local-time demand grid from population and throughput.
    DemandBuild(DemandBuildArgs),
    /// Earth-frame demand at one UTC hour.
    DemandSnapshot(SnapshotArgs),
    /// Fluence against inclination at one altitude.
    RadiationSweep(RadiationArgs),
    /// Greedy sun-synchronous plane cover of a demand grid.
    DesignSs(DesignSsArgs),
    /// Greedy multi-shell Walker-delta cover of a demand grid.
    DesignWalker(DesignWalkerArgs),
    /// Satellite counts and median fluence of both covers across demand multipliers.
    Sweep(SweepArgs),
    /// Write the seeded synthetic inputs used by the tests.
    Fixtures(FixturesArgs),
}

// ---------------------------------------------------------------------------
// shared argument groups
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct FootprintArgs {
    /// Minimum elevation angle at the footprint edge, degrees.
    #[arg(long, default_value_t = DEFAULT_MIN_ELEVATION_DEG)]
    pub min_elevation: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SamplingArgs {
    /// Verification time step, seconds.
    #[arg(long, default_value_t = CoverageOptions::default().time_step_s)]
    pub time_step: f64,
    /// Verification grid step, degrees.
    #[arg(long, default_value_t = CoverageOptions::default().grid_step_deg)]
    pub grid_step: f64,
    /// Search cap for single repeat-track sizing.
    #[arg(long, default_value_t = CoverageOptions::default().max_rgt_sats)]
    pub max_rgt_sats: u32,
    /// Search cap for Walker sizing.
    #[arg(long, default_value_t = CoverageOptions::default().max_walker_total)]
    pub max_walker_total: u32,
}

impl SamplingArgs {
    fn options(&self) -> CoverageOptions {
        CoverageOptions {
            time_step_s: self.time_step,
            grid_step_deg: self.grid_step,
            max_rgt_sats: self.max_rgt_sats,
            max_walker_total: self.max_walker_total,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DemandInputArgs {
    /// Population CSV `lat_deg,lon_deg,density`.
    #[arg(long, value_name = "FILE")]
    pub population: PathBuf,
    /// Throughput CSV `site_id,timestamp_s,bytes`.
    #[arg(long, value_name = "FILE", conflicts_with = "diurnal", required_unless_present = "diurnal")]
    pub series: Option<PathBuf>,
    /// Precomputed profile CSV `tod_h,median,p95`, instead of --series.
    #[arg(long, value_name = "FILE")]
    pub diurnal: Option<PathBuf>,
    /// Latitude step of the population file, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub pop_lat_step: f64,
    /// Longitude step of the population file, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub pop_lon_step: f64,
    /// Time-of-day bin for the throughput series, hours.
    #[arg(long, default_value_t = DiurnalOptions::default().bin_h)]
    pub bin: f64,
    /// Hours added to series timestamps to get local time.
    #[arg(long, default_value_t = DiurnalOptions::default().tz_offset_h, allow_hyphen_values = true)]
    pub tz_offset: f64,
}

impl DemandInputArgs {
    fn load(&self) -> Result<(heliocover::demand::PopulationGrid, DiurnalProfile, Vec<(String, String)>), CliError> {
        require_file(&self.population)?;
        let pop = load_population_grid(&self.population, self.pop_lat_step, self.pop_lon_step)?;
        let mut prov = vec![("population_sha256".to_string(), file_sha256(&self.population)?)];
        let diurnal = match (&self.series, &self.diurnal) {
            (Some(s), _) => {
                require_file(s)?;
                prov.push(("series_sha256".into(), file_sha256(s)?));
                let opts = DiurnalOptions {
                    bin_h: self.bin,
                    tz_offset_h: self.tz_offset,
                };
                let p = diurnal_profile_from_series(s, &opts)?;
                for site in &p.sites_skipped {
                    log::warn!("site {site} has zero median throughput and was skipped");
                }
                p
            }
            (None, Some(d)) => {
                require_file(d)?;
                prov.push(("diurnal_sha256".into(), file_sha256(d)?));
                read_diurnal_csv(File::open(d)?)?
            }
            (None, None) => unreachable!("clap requires one of --series or --diurnal"),
        };
        Ok((pop, diurnal, prov))
    }
}

#[derive(Debug, Clone, Args)]
pub struct DemandFileArgs {
    /// Demand grid CSV `lat_deg,lst_h,demand`.
    #[arg(long, value_name = "FILE")]
    pub demand: PathBuf,
    /// Latitude step of the grid, degrees [default: from the JSON sidecar].
    #[arg(long)]
    pub lat_step: Option<f64>,
    /// Local-time step of the grid, hours [default: from the JSON sidecar].
    #[arg(long)]
    pub lst_step: Option<f64>,
}

impl DemandFileArgs {
    fn load(&self) -> Result<DemandGrid, CliError> {
        require_file(&self.demand)?;
        let (lat, lst) = match (self.lat_step, self.lst_step) {
            (Some(a), Some(b)) => (a, b),
            (a, b) => {
                let side = self.demand.with_extension("json");
                let meta: Value = std::fs::read(&side)
                    .ok()
                    .and_then(|b| serde_json::from_slice(&b).ok())
                    .ok_or_else(|| {
                        Error::Validation(format!(
                            "grid steps not given and no readable sidecar {}",
                            side.display()
                        ))
                    })?;
                let get = |k: &str| meta.get(k).and_then(Value::as_f64);
                let lat = a.or_else(|| get("lat_step_deg"));
                let lst = b.or_else(|| get("lst_step_h"));
                match (lat, lst) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return Err(Error::Validation(format!("sidecar {} lacks grid steps", side.display())).into()),
                }
            }
        };
        Ok(read_demand_csv(File::open(&self.demand)?, lat, lst)?)
    }
}

#[derive(Debug, Clone, Args)]
pub struct WalkerArgs {
    /// Comma-separated shell altitudes in km [default: altitude - 10, altitude + 10].
    #[arg(long, value_delimiter = ',')]
    pub shell_alts: Vec<f64>,
    /// Shell inclinations are rounded up to this step, degrees.
    #[arg(long, default_value_t = WalkerDesignOptions::default().inclination_step_deg)]
    pub inclination_step: f64,
    /// Lowest shell inclination, degrees.
    #[arg(long, default_value_t = WalkerDesignOptions::default().min_inclination_deg)]
    pub min_inclination: f64,
    /// Highest shell inclination, degrees.
    #[arg(long, default_value_t = WalkerDesignOptions::default().max_inclination_deg)]
    pub max_inclination: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

impl WalkerArgs {
    fn options(&self) -> WalkerDesignOptions {
        WalkerDesignOptions {
            inclination_step_deg: self.inclination_step,
            min_inclination_deg: self.min_inclination,
            max_inclination_deg: self.max_inclination,
            coverage: self.sampling.options(),
        }
    }

    fn altitudes(&self, base_km: f64) -> Vec<f64> {
        if self.shell_alts.is_empty() {
            default_shell_altitudes(base_km)
        } else {
            self.shell_alts.clone()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ExposureArgs {
    /// Integration step along the orbit, seconds.
    #[arg(long, default_value_t = DEFAULT_EXPOSURE_STEP_S)]
    pub exposure_step: f64,
    /// RAAN copies averaged per orbit.
    #[arg(long, default_value_t = DEFAULT_RAAN_SAMPLES)]
    pub n_raan: usize,
    /// Integration window, seconds.
    #[arg(long, default_value_t = SOLAR_DAY_S)]
    pub duration: f64,
    /// Gridded map CSV `lat_deg,lon_deg,alt_km,species,flux` [default: built-in synthetic map].
    #[arg(long, value_name = "FILE")]
    pub map: Option<PathBuf>,
    /// Axes sidecar of --map [default: the map path with a .json extension].
    #[arg(long, value_name = "FILE")]
    pub map_axes: Option<PathBuf>,
}

impl ExposureArgs {
    fn options(&self) -> ExposureOptions {
        ExposureOptions {
            step_s: self.exposure_step,
            n_raan: self.n_raan,
        }
    }

    fn map(&self) -> Result<Box<dyn RadiationMap>, CliError> {
        match &self.map {
            Some(p) => {
                require_file(p)?;
                let axes = self.map_axes.clone().unwrap_or_else(|| p.with_extension("json"));
                require_file(&axes)?;
                Ok(Box::new(load_gridded_map(p, Some(&axes))?))
            }
            None => Ok(Box::new(SyntheticMap::default())),
        }
    }
}

// ---------------------------------------------------------------------------
// subcommand arguments
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Args)]
pub struct PeriodArgs {
    /// Altitude above the equatorial radius, km.
    #[arg(long)]
    pub alt: f64,
    /// Inclination, degrees.
    #[arg(long, default_value_t = 0.0)]
    pub incl: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SsincArgs {
    /// Altitude above the equatorial radius, km.
    #[arg(long)]
    pub alt: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SurveyArgs {
    #[arg(long, default_value_t = 500.0)]
    pub alt_min: f64,
    #[arg(long, default_value_t = 1500.0)]
    pub alt_max: f64,
    /// Inclination, degrees.
    #[arg(long, default_value_t = 65.0)]
    pub incl: f64,
    /// Longest repeat cycle, days.
    #[arg(long, default_value_t = 3)]
    pub max_days: u32,
    #[command(flatten)]
    pub footprint: FootprintArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageMinArgs {
    /// Altitude, km.
    #[arg(long)]
    pub alt: f64,
    /// Inclination, degrees.
    #[arg(long)]
    pub incl: f64,
    /// Latitude band to cover, degrees [default: min(incl, 180 - incl)].
    #[arg(long)]
    pub band: Option<f64>,
    /// Also size a single repeat track with this `p:q` (days:revolutions)
    /// at --incl; its altitude is solved, not taken from --alt.
    #[arg(long, value_name = "P:Q")]
    pub repeat: Option<String>,
    #[command(flatten)]
    pub footprint: FootprintArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DemandBuildArgs {
    #[command(flatten)]
    pub input: DemandInputArgs,
    /// Bandwidth multiplier: peak cell demand in single-satellite capacities.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Output latitude step, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub lat_step: f64,
    /// Output local-time step, hours.
    #[arg(long, default_value_t = 0.5)]
    pub lst_step: f64,
    /// Diurnal curve driving the grid: median or p95.
    #[arg(long, default_value = "median")]
    pub statistic: DiurnalStatistic,
}

#[derive(Debug, Clone, Args)]
pub struct SnapshotArgs {
    #[command(flatten)]
    pub input: DemandInputArgs,
    /// UTC hour of the snapshot.
    #[arg(long, default_value_t = 0.0)]
    pub utc_hour: f64,
    /// Diurnal curve: median or p95.
    #[arg(long, default_value = "median")]
    pub statistic: DiurnalStatistic,
}

#[derive(Debug, Clone, Args)]
pub struct RadiationArgs {
    /// Altitude, km.
    #[arg(long, default_value_t = 560.0)]
    pub alt: f64,
    #[arg(long, default_value_t = 0.0)]
    pub incl_min: f64,
    #[arg(long, default_value_t = 180.0)]
    pub incl_max: f64,
    #[arg(long, default_value_t = 5.0)]
    pub incl_step: f64,
    #[command(flatten)]
    pub exposure: ExposureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DesignSsArgs {
    #[command(flatten)]
    pub demand: DemandFileArgs,
    /// Plane altitude, km.
    #[arg(long, default_value_t = 560.0)]
    pub alt: f64,
    #[command(flatten)]
    pub footprint: FootprintArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DesignWalkerArgs {
    #[command(flatten)]
    pub demand: DemandFileArgs,
    /// Base altitude, km.
    #[arg(long, default_value_t = 560.0)]
    pub alt: f64,
    #[command(flatten)]
    pub footprint: FootprintArgs,
    #[command(flatten)]
    pub walker: WalkerArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: DemandInputArgs,
    /// Comma-separated bandwidth multipliers, ascending.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub m: Vec<f64>,
    /// SS plane altitude and Walker base altitude, km.
    #[arg(long, default_value_t = 560.0)]
    pub alt: f64,
    /// Demand grid latitude step, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub lat_step: f64,
    /// Demand grid local-time step, hours.
    #[arg(long, default_value_t = 0.5)]
    pub lst_step: f64,
    #[command(flatten)]
    pub footprint: FootprintArgs,
    #[command(flatten)]
    pub walker: WalkerArgs,
    #[command(flatten)]
    pub exposure: ExposureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FixturesArgs {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Population grid step, degrees.
    #[arg(long, default_value_t = 0.5)]
    pub pop_step: f64,
    /// Sites in the synthetic throughput series.
    #[arg(long, default_value_t = 20)]
    pub n_sites: usize,
    /// Days per site.
    #[arg(long, default_value_t = 7)]
    pub days: usize,
    /// Sample cadence, seconds.
    #[arg(long, default_value_t = 900.0)]
    pub cadence: f64,
    /// Node spacing of the tabulated synthetic map, degrees.
    #[arg(long, default_value_t = 5.0)]
    pub map_step: f64,
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

pub fn notes(cmd: &Command) -> Vec<&'static str> {
    match cmd {
        Command::DesignWalker(_) | Command::Sweep(_) => vec![WALKER_NOTE],
        _ => Vec::new(),
    }
}

pub fn dispatch(cmd: &Command, out: &Emitter) -> Result<(), CliError> {
    match cmd {
        Command::Period(a) => period(a, out),
        Command::Ssinc(a) => ssinc(a, out),
        Command::RgtSurvey(a) => rgt_survey(a, out),
        Command::CoverageMin(a) => coverage_min(a, out),
        Command::DemandBuild(a) => demand_build(a, out),
        Command::DemandSnapshot(a) => demand_snapshot(a, out),
        Command::RadiationSweep(a) => radiation_sweep(a, out),
        Command::DesignSs(a) => design_ss(a, out),
        Command::DesignWalker(a) => design_walker(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Fixtures(a) => fixtures_cmd(a, out),
    }
}

fn require_file(p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Validation(format!("input file {} does not exist", p.display())).into())
    }
}

fn csv_rows(buf: &mut Vec<u8>, header: &[&str], rows: &[Vec<String>]) -> heliocover::Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn period(a: &PeriodArgs, out: &Emitter) -> Result<(), CliError> {
    let row = vec![
        a.alt.to_string(),
        a.incl.to_string(),
        orbital_period(a.alt)?.to_string(),
        nodal_period(a.alt, a.incl)?.to_string(),
        nodal_day(a.alt, a.incl)?.to_string(),
        nodal_precession_rate(a.alt, a.incl)?.to_string(),
    ];
    out.csv("period.csv", true, |b| {
        csv_rows(
            b,
            &["altitude_km", "inclination_deg", "orbital_period_s", "nodal_period_s", "nodal_day_s", "raan_rate_deg_day"],
            &[row],
        )
    })
}

fn ssinc(a: &SsincArgs, out: &Emitter) -> Result<(), CliError> {
    let i = sun_synchronous_inclination(a.alt)?;
    out.csv("ssinc.csv", true, |b| {
        csv_rows(b, &["altitude_km", "inclination_deg"], &[vec![a.alt.to_string(), i.to_string()]])
    })
}

fn rgt_survey(a: &SurveyArgs, out: &Emitter) -> Result<(), CliError> {
    let rgts = find_rgt_orbits(a.alt_min, a.alt_max, a.incl, a.max_days)?;
    let fp = FootprintSpec::new(a.alt_min, a.footprint.min_elevation)?;
    let rows = if rgts.is_empty() {
        Vec::new()
    } else {
        survey_table(&rgts, &fp, &a.sampling.options())?
    };
    out.csv("rgt_survey.csv", true, |b| write_survey_csv(b, &rows))?;
    out.json(
        "rgt_survey.json",
        false,
        json!({ "rows": rows, "min_elevation_deg": a.footprint.min_elevation }),
    )
}

fn parse_repeat(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Core(heliocover::Error::InvalidInput(format!("--repeat expects P:Q, got '{s}'")));
    let (p, q) = s.split_once(':').ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
}

fn coverage_min(a: &CoverageMinArgs, out: &Emitter) -> Result<(), CliError> {
    let opts = a.sampling.options();
    let band = a.band.unwrap_or(a.incl.min(180.0 - a.incl));
    let fp = FootprintSpec::new(a.alt, a.footprint.min_elevation)?;
    let w = min_walker_total(a.alt, a.incl, &fp, band, &opts)?;
    let mut rows = vec![vec![
        "walker".to_string(),
        String::new(),
        String::new(),
        a.alt.to_string(),
        a.incl.to_string(),
        band.to_string(),
        fp.lambda_deg().to_string(),
        w.total_sats_t.to_string(),
        w.planes_p.to_string(),
        w.phasing_f.to_string(),
    ]];
    if let Some(r) = &a.repeat {
        let (p, q) = parse_repeat(r)?;
        let rgt = find_rgt_orbits(200.0, 2000.0, a.incl, p)?
            .into_iter()
            .find(|s| s.repeat_days_p == p && s.orbits_q == q)
            .ok_or_else(|| {
                heliocover::Error::Infeasible(format!("no {p}:{q} repeat track between 200 and 2000 km at {} deg", a.incl))
            })?;
        let fp_r = fp.at_altitude(rgt.altitude_km)?;
        let n = min_sats_single_rgt(&rgt, &fp_r, &opts)?;
        rows.push(vec![
            "rgt".to_string(),
            p.to_string(),
            q.to_string(),
            rgt.altitude_km.to_string(),
            a.incl.to_string(),
            band.to_string(),
            fp_r.lambda_deg().to_string(),
            n.to_string(),
            "1".to_string(),
            String::new(),
        ]);
    }
    out.csv("coverage_min.csv", true, |b| {
        csv_rows(
            b,
            &[
                "kind",
                "p",
                "q",
                "altitude_km",
                "inclination_deg",
                "band_deg",
                "lambda_deg",
                "total_sats",
                "planes",
                "phasing",
            ],
            &rows,
        )
    })
}

fn demand_build(a: &DemandBuildArgs, out: &Emitter) -> Result<(), CliError> {
    let (pop, diurnal, prov) = a.input.load()?;
    let profile = latitude_max_profile(&pop);
    let mut grid = build_demand_grid_with(&profile, &diurnal, a.m, a.lat_step, a.lst_step, a.statistic)?;
    grid.meta.provenance.extend(prov);
    out.csv("demand.csv", true, |b| write_demand_csv(b, &grid))?;
    out.csv("diurnal.csv", false, |b| write_diurnal_csv(b, &diurnal))?;
    let mut side = serde_json::to_value(&grid.meta).map_err(Error::from)?;
    side["sites_used"] = json!(diurnal.sites_used);
    side["sites_skipped"] = json!(diurnal.sites_skipped);
    out.json("demand.json", false, side)
}

fn demand_snapshot(a: &SnapshotArgs, out: &Emitter) -> Result<(), CliError> {
    let (pop, diurnal, prov) = a.input.load()?;
    let snap = demand_snapshot_with(&pop, &diurnal, a.utc_hour, a.statistic);
    out.csv("snapshot.csv", true, |b| write_snapshot_csv(b, &snap))?;
    let prov: serde_json::Map<String, Value> = prov.into_iter().map(|(k, v)| (k, json!(v))).collect();
    out.json(
        "snapshot.json",
        false,
        json!({ "utc_hour": a.utc_hour, "statistic": a.statistic, "provenance": prov }),
    )
}

fn inclination_grid(a: &RadiationArgs) -> Result<Vec<f64>, CliError> {
    if !(a.incl_step > 0.0 && a.incl_min >= 0.0 && a.incl_max <= 180.0 && a.incl_min <= a.incl_max) {
        return Err(Error::InvalidInput("need 0 <= incl-min <= incl-max <= 180 and incl-step > 0".into()).into());
    }
    let n = ((a.incl_max - a.incl_min) / a.incl_step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a.incl_min + k as f64 * a.incl_step).collect())
}

fn radiation_sweep(a: &RadiationArgs, out: &Emitter) -> Result<(), CliError> {
    let incl = inclination_grid(a)?;
    let map = a.exposure.map()?;
    let rows = exposure_vs_inclination(a.alt, &incl, map.as_ref(), a.exposure.duration, &a.exposure.options())?;
    out.csv("radiation_sweep.csv", true, |b| write_inclination_csv(b, &rows))?;
    out.json(
        "radiation_sweep.json",
        false,
        json!({
            "altitude_km": a.alt,
            "duration_s": a.exposure.duration,
            "step_s": a.exposure.exposure_step,
            "n_raan": a.exposure.n_raan,
            "map": map.describe(),
            "ss_inclination_deg": sun_synchronous_inclination(a.alt).ok(),
        }),
    )
}

fn design_json(design: &heliocover::design::ConstellationDesign, extra: Value) -> Result<Value, CliError> {
    let mut v = serde_json::to_value(design).map_err(Error::from)?;
    v["n_planes"] = json!(design.n_planes());
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    Ok(v)
}

fn design_ss(a: &DesignSsArgs, out: &Emitter) -> Result<(), CliError> {
    let grid = a.demand.load()?;
    let fp = FootprintSpec::new(a.alt, a.footprint.min_elevation)?;
    let d = greedy_ss_cover(&grid, a.alt, &fp)?;
    let v = design_json(
        &d,
        json!({
            "altitude_km": a.alt,
            "lambda_deg": fp.lambda_deg(),
            "sats_per_plane": sats_per_ss_plane(&fp),
            "demand_sha256": file_sha256(&a.demand.demand)?,
        }),
    )?;
    out.json("design_ss.json", true, v)
}

fn design_walker(a: &DesignWalkerArgs, out: &Emitter) -> Result<(), CliError> {
    let grid = a.demand.load()?;
    let fp = FootprintSpec::new(a.alt, a.footprint.min_elevation)?;
    let alts = a.walker.altitudes(a.alt);
    let d = greedy_walker_cover(&grid, &alts, &fp, &a.walker.options(), &WalkerCache::new())?;
    let v = design_json(
        &d,
        json!({
            "shell_altitudes_km": alts,
            "min_elevation_deg": a.footprint.min_elevation,
            "demand_sha256": file_sha256(&a.demand.demand)?,
        }),
    )?;
    out.json("design_walker.json", true, v)
}

fn sweep(a: &SweepArgs, out: &Emitter) -> Result<(), CliError> {
    let (pop, diurnal, prov) = a.input.load()?;
    let inputs = SweepInputs {
        lat_profile: latitude_max_profile(&pop),
        diurnal,
        lat_step_deg: a.lat_step,
        lst_step_h: a.lst_step,
    };
    let fp = FootprintSpec::new(a.alt, a.footprint.min_elevation)?;
    let map = a.exposure.map()?;
    let mut opts = SweepOptions::new(a.alt);
    opts.shell_altitudes = a.walker.altitudes(a.alt);
    opts.walker = a.walker.options();
    opts.exposure = a.exposure.options();
    opts.exposure_duration_s = a.exposure.duration;
    let rows = design_sweep(&a.m, &inputs, &fp, map.as_ref(), &opts, &WalkerCache::new())?;
    for r in &rows {
        if let Some(e) = &r.error {
            log::warn!("M={} {}: {e}", r.m, r.method);
        }
    }
    out.csv("sweep.csv", true, |b| write_sweep_csv(b, &rows))?;
    let prov: serde_json::Map<String, Value> = prov.into_iter().map(|(k, v)| (k, json!(v))).collect();
    out.json(
        "sweep.json",
        false,
        json!({ "rows": rows, "map": map.describe(), "provenance": prov }),
    )
}

fn fixtures_cmd(a: &FixturesArgs, out: &Emitter) -> Result<(), CliError> {
    if out.dir().is_none() {
        return Err(Error::InvalidInput("fixtures writes several files; pass --out DIR".into()).into());
    }
    let pop = fixtures::synthetic_population(a.seed, &fixtures::default_clusters(), a.pop_step)?;
    out.csv("population.csv", true, |b| write_population_csv(b, &pop))?;
    let series = fixtures::synthetic_series(a.seed, a.n_sites, a.days, a.cadence);
    out.csv("series.csv", true, |b| fixtures::write_series_csv(b, &series))?;
    let sine = fixtures::sinusoid_series(DiurnalOptions::default().bin_h);
    out.csv("sinusoid_series.csv", true, |b| fixtures::write_series_csv(b, &sine))?;
    let diurnal = fixtures::synthetic_diurnal(DiurnalOptions::default().bin_h)?;
    out.csv("diurnal.csv", true, |b| write_diurnal_csv(b, &diurnal))?;
    for (name, grid) in [("demand_zero", fixtures::zero_demand()?), ("demand_toy", fixtures::toy_demand()?)] {
        out.csv(&format!("{name}.csv"), true, |b| write_demand_csv(b, &grid))?;
        out.json(&format!("{name}.json"), true, serde_json::to_value(&grid.meta).map_err(Error::from)?)?;
    }
    let step = a.map_step;
    if !(step > 0.0 && step <= 90.0) {
        return Err(Error::InvalidInput("map step must be in (0, 90]".into()).into());
    }
    let n_lat = (180.0 / step).round() as usize;
    let n_lon = (360.0 / step).round() as usize;
    let axes = GridAxes {
        lat_deg: (0..=n_lat).map(|k| -90.0 + k as f64 * step).collect(),
        lon_deg: (0..n_lon).map(|k| -180.0 + k as f64 * step).collect(),
        alt_km: vec![300.0, 2000.0],
        species: Species::ALL.to_vec(),
    };
    let map = tabulate(&SyntheticMap::default(), axes.clone())?;
    out.csv("synthetic_map.csv", true, |b| write_gridded_map(b, &map))?;
    out.json("synthetic_map.json", true, serde_json::to_value(&axes).map_err(Error::from)?)?;
    out.json(
        "fixtures.json",
        true,
        json!({
            "seed": a.seed,
            "clusters": fixtures::default_clusters().iter().map(|c| json!({
                "lat_deg": c.lat_deg, "lat_sigma_deg": c.lat_sigma_deg,
                "amplitude": c.amplitude, "lon_sigma_deg": c.lon_sigma_deg,
            })).collect::<Vec<_>>(),
        }),
    )
}
