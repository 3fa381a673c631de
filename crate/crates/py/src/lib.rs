//! Python bindings for the orbit, coverage, demand, design and radiation
//! operations.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use heliocover::astro::{self, OrbitSpec, RgtSolution};
use heliocover::coverage::{self, CoverageOptions, FootprintSpec};
use heliocover::demand::{self, DemandGrid, DiurnalProfile, LatitudeProfile};
use heliocover::design::{self, ConstellationDesign, WalkerCache, WalkerDesignOptions};
use heliocover::radiation::{self, ExposureOptions, SyntheticMap};
use heliocover::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::InvalidInput(_) | Error::Validation(_) | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Orbit", frozen, from_py_object)]
#[derive(Clone)]
struct PyOrbit(OrbitSpec);

#[pymethods]
impl PyOrbit {
    #[new]
    #[pyo3(signature = (altitude_km, inclination_deg, raan_deg=0.0, phase_deg=0.0, epoch_s=0.0))]
    fn new(altitude_km: f64, inclination_deg: f64, raan_deg: f64, phase_deg: f64, epoch_s: f64) -> PyResult<Self> {
        OrbitSpec::new(altitude_km, inclination_deg, raan_deg, phase_deg, epoch_s)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn altitude_km(&self) -> f64 {
        self.0.altitude_km
    }

    #[getter]
    fn inclination_deg(&self) -> f64 {
        self.0.inclination_deg
    }

    #[getter]
    fn raan_deg(&self) -> f64 {
        self.0.raan_deg
    }

    #[getter]
    fn ltan_h(&self) -> f64 {
        self.0.ltan_h()
    }

    /// (time_s, lat_deg, lon_deg, local_solar_time_h) every `step_s` seconds.
    fn ground_track(&self, duration_s: f64, step_s: f64) -> PyResult<Vec<(f64, f64, f64, f64)>> {
        let samples = astro::propagate_ground_track(&self.0, duration_s, step_s).map_err(py_err)?;
        Ok(samples
            .iter()
            .map(|s| (s.time_s, s.lat_deg, s.lon_deg, s.local_solar_time_h))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Orbit(altitude_km={}, inclination_deg={}, raan_deg={})",
            self.0.altitude_km, self.0.inclination_deg, self.0.raan_deg
        )
    }
}

#[pyclass(name = "RepeatTrack", frozen, from_py_object)]
#[derive(Clone)]
struct PyRepeatTrack(RgtSolution);

#[pymethods]
impl PyRepeatTrack {
    #[getter]
    fn days(&self) -> u32 {
        self.0.repeat_days_p
    }

    #[getter]
    fn revolutions(&self) -> u32 {
        self.0.orbits_q
    }

    #[getter]
    fn altitude_km(&self) -> f64 {
        self.0.altitude_km
    }

    #[getter]
    fn inclination_deg(&self) -> f64 {
        self.0.inclination_deg
    }

    fn orbit(&self) -> PyOrbit {
        PyOrbit(self.0.orbit())
    }

    /// Fewest satellites spaced along this track that keep its band covered.
    #[pyo3(signature = (min_elevation_deg=25.0, time_step_s=60.0, grid_step_deg=1.0))]
    fn min_sats(&self, min_elevation_deg: f64, time_step_s: f64, grid_step_deg: f64) -> PyResult<u32> {
        let fp = FootprintSpec::new(self.0.altitude_km, min_elevation_deg).map_err(py_err)?;
        coverage::min_sats_single_rgt(&self.0, &fp, &options(time_step_s, grid_step_deg)).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("RepeatTrack({}:{} at {:.3} km)", self.0.repeat_days_p, self.0.orbits_q, self.0.altitude_km)
    }
}

#[pyclass(name = "DemandGrid", frozen)]
struct PyDemandGrid(DemandGrid);

#[pymethods]
impl PyDemandGrid {
    /// Build from a row-major list (latitude rows, local-time columns).
    #[staticmethod]
    fn from_values(lat_step_deg: f64, lst_step_h: f64, values: Vec<f64>) -> PyResult<Self> {
        DemandGrid::from_values(lat_step_deg, lst_step_h, values).map(Self).map_err(py_err)
    }

    /// Separable grid from a latitude profile and a diurnal curve.
    #[staticmethod]
    fn build(
        lat_profile: Vec<f64>,
        profile_lat_step_deg: f64,
        diurnal: Vec<f64>,
        diurnal_bin_h: f64,
        m: f64,
        lat_step_deg: f64,
        lst_step_h: f64,
    ) -> PyResult<Self> {
        let lat = LatitudeProfile::new(profile_lat_step_deg, lat_profile).map_err(py_err)?;
        let d = DiurnalProfile::from_curves(diurnal_bin_h, diurnal, None).map_err(py_err)?;
        demand::build_demand_grid(&lat, &d, m, lat_step_deg, lst_step_h).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn read_csv(path: &str, lat_step_deg: f64, lst_step_h: f64) -> PyResult<Self> {
        let f = std::fs::File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        demand::read_demand_csv(f, lat_step_deg, lst_step_h).map(Self).map_err(py_err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.n_lat(), self.0.n_lst())
    }

    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    fn peak(&self) -> f64 {
        self.0.peak()
    }
}

#[pyclass(name = "Design", frozen)]
struct PyDesign(ConstellationDesign);

#[pymethods]
impl PyDesign {
    #[getter]
    fn method(&self) -> &'static str {
        self.0.method()
    }

    #[getter]
    fn total_sats(&self) -> u64 {
        self.0.total_sats
    }

    #[getter]
    fn n_planes(&self) -> u64 {
        self.0.n_planes()
    }

    fn satellites(&self) -> PyResult<Vec<PyOrbit>> {
        Ok(self.0.satellites().map_err(py_err)?.into_iter().map(PyOrbit).collect())
    }

    /// Residual demand left after replaying the audit log, summed.
    fn replay_residual(&self, demand: &PyDemandGrid, altitude_km: f64, min_elevation_deg: f64) -> PyResult<f64> {
        let fp = FootprintSpec::new(altitude_km, min_elevation_deg).map_err(py_err)?;
        Ok(design::replay_audit(&demand.0, &self.0, &fp).map_err(py_err)?.total())
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

fn options(time_step_s: f64, grid_step_deg: f64) -> CoverageOptions {
    CoverageOptions {
        time_step_s,
        grid_step_deg,
        ..CoverageOptions::default()
    }
}

#[pyfunction]
fn orbital_period(altitude_km: f64) -> PyResult<f64> {
    astro::orbital_period(altitude_km).map_err(py_err)
}

#[pyfunction]
fn nodal_precession_rate(altitude_km: f64, inclination_deg: f64) -> PyResult<f64> {
    astro::nodal_precession_rate(altitude_km, inclination_deg).map_err(py_err)
}

#[pyfunction]
fn sun_synchronous_inclination(altitude_km: f64) -> PyResult<f64> {
    astro::sun_synchronous_inclination(altitude_km).map_err(py_err)
}

#[pyfunction]
fn earth_central_angle(altitude_km: f64, min_elevation_deg: f64) -> PyResult<f64> {
    coverage::earth_central_angle(altitude_km, min_elevation_deg).map_err(py_err)
}

#[pyfunction]
fn find_rgt_orbits(alt_min_km: f64, alt_max_km: f64, inclination_deg: f64, max_days: u32) -> PyResult<Vec<PyRepeatTrack>> {
    Ok(astro::find_rgt_orbits(alt_min_km, alt_max_km, inclination_deg, max_days)
        .map_err(py_err)?
        .into_iter()
        .map(PyRepeatTrack)
        .collect())
}

/// Smallest Walker-delta shell covering `|lat| <= band_deg`, as (T, P, F).
#[pyfunction]
#[pyo3(signature = (altitude_km, inclination_deg, band_deg, min_elevation_deg=25.0, time_step_s=60.0, grid_step_deg=1.0))]
fn min_walker_total(
    py: Python<'_>,
    altitude_km: f64,
    inclination_deg: f64,
    band_deg: f64,
    min_elevation_deg: f64,
    time_step_s: f64,
    grid_step_deg: f64,
) -> PyResult<(u32, u32, u32)> {
    let fp = FootprintSpec::new(altitude_km, min_elevation_deg).map_err(py_err)?;
    let opts = options(time_step_s, grid_step_deg);
    let w = py
        .detach(|| coverage::min_walker_total(altitude_km, inclination_deg, &fp, band_deg, &opts))
        .map_err(py_err)?;
    Ok((w.total_sats_t, w.planes_p, w.phasing_f))
}

#[pyfunction]
#[pyo3(signature = (demand, altitude_km=560.0, min_elevation_deg=25.0))]
fn design_ss(demand: &PyDemandGrid, altitude_km: f64, min_elevation_deg: f64) -> PyResult<PyDesign> {
    let fp = FootprintSpec::new(altitude_km, min_elevation_deg).map_err(py_err)?;
    design::greedy_ss_cover(&demand.0, altitude_km, &fp).map(PyDesign).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (demand, altitude_km=560.0, min_elevation_deg=25.0, time_step_s=60.0, grid_step_deg=1.0))]
fn design_walker(
    py: Python<'_>,
    demand: &PyDemandGrid,
    altitude_km: f64,
    min_elevation_deg: f64,
    time_step_s: f64,
    grid_step_deg: f64,
) -> PyResult<PyDesign> {
    let fp = FootprintSpec::new(altitude_km, min_elevation_deg).map_err(py_err)?;
    let opts = WalkerDesignOptions {
        coverage: options(time_step_s, grid_step_deg),
        ..WalkerDesignOptions::default()
    };
    let alts = design::default_shell_altitudes(altitude_km);
    py.detach(|| design::greedy_walker_cover(&demand.0, &alts, &fp, &opts, &WalkerCache::new()))
        .map(PyDesign)
        .map_err(py_err)
}

/// RAAN-averaged (electron, proton) fluence under the synthetic map.
#[pyfunction]
#[pyo3(signature = (orbit, duration_s=86400.0, step_s=30.0, n_raan=8))]
fn synthetic_exposure(orbit: &PyOrbit, duration_s: f64, step_s: f64, n_raan: usize) -> PyResult<(f64, f64)> {
    let e = radiation::raan_averaged_exposure(&orbit.0, &SyntheticMap::default(), duration_s, &ExposureOptions { step_s, n_raan })
        .map_err(py_err)?;
    Ok((e.electron, e.proton))
}

#[pymodule]
fn heliocover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyOrbit>()?;
    m.add_class::<PyRepeatTrack>()?;
    m.add_class::<PyDemandGrid>()?;
    m.add_class::<PyDesign>()?;
    m.add_function(wrap_pyfunction!(orbital_period, m)?)?;
    m.add_function(wrap_pyfunction!(nodal_precession_rate, m)?)?;
    m.add_function(wrap_pyfunction!(sun_synchronous_inclination, m)?)?;
    m.add_function(wrap_pyfunction!(earth_central_angle, m)?)?;
    m.add_function(wrap_pyfunction!(find_rgt_orbits, m)?)?;
    m.add_function(wrap_pyfunction!(min_walker_total, m)?)?;
    m.add_function(wrap_pyfunction!(design_ss, m)?)?;
    m.add_function(wrap_pyfunction!(design_walker, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_exposure, m)?)?;
    Ok(())
}
