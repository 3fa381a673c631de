//! Synthetic inputs for tests and the `fixtures` command. All randomness in
//! the crate lives here and is driven by an explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::demand::{DemandGrid, DiurnalProfile, PopulationGrid};
use crate::error::Result;

/// One population cluster: a truncated Gaussian in latitude times a
/// truncated Gaussian in longitude around a seeded center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub lat_deg: f64,
    pub lat_sigma_deg: f64,
    pub amplitude: f64,
    pub lon_sigma_deg: f64,
}

/// Clusters cut off at this many sigmas so demand has compact support.
pub const CLUSTER_CUTOFF_SIGMAS: f64 = 3.0;

pub fn default_clusters() -> Vec<Cluster> {
    vec![
        Cluster {
            lat_deg: 30.25,
            lat_sigma_deg: 6.0,
            amplitude: 1.0,
            lon_sigma_deg: 25.0,
        },
        Cluster {
            lat_deg: 50.25,
            lat_sigma_deg: 4.0,
            amplitude: 0.5,
            lon_sigma_deg: 20.0,
        },
        Cluster {
            lat_deg: -24.75,
            lat_sigma_deg: 5.0,
            amplitude: 0.3,
            lon_sigma_deg: 30.0,
        },
    ]
}

fn truncated_gauss(x: f64, sigma: f64) -> f64 {
    if x.abs() > CLUSTER_CUTOFF_SIGMAS * sigma {
        0.0
    } else {
        (-0.5 * (x / sigma).powi(2)).exp()
    }
}

/// Population grid built from clusters. Longitude centers are drawn from the
/// seed and snapped to cell centers, so each cluster's per-latitude maximum
/// is exactly `amplitude * g(lat)`.
pub fn synthetic_population(seed: u64, clusters: &[Cluster], step_deg: f64) -> Result<PopulationGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<f64> = clusters
        .iter()
        .map(|_| {
            let k = rng.random_range(0..(360.0 / step_deg) as usize);
            -180.0 + (k as f64 + 0.5) * step_deg
        })
        .collect();
    PopulationGrid::from_fn(step_deg, step_deg, |lat, lon| {
        clusters
            .iter()
            .zip(&centers)
            .map(|(c, lon0)| {
                let dlon = crate::sphere::wrap_lon(lon - lon0);
                c.amplitude * truncated_gauss(lat - c.lat_deg, c.lat_sigma_deg) * truncated_gauss(dlon, c.lon_sigma_deg)
            })
            .fold(0.0, f64::max)
    })
}

/// Smooth daily shape: trough in the morning, peak in the evening.
pub fn diurnal_shape(local_h: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI / 24.0;
    1.0 + 0.45 * (w * (local_h - 21.0)).cos() + 0.1 * (2.0 * w * (local_h - 19.0)).cos()
}

/// Diurnal profile sampled from [`diurnal_shape`] at bin centers.
pub fn synthetic_diurnal(bin_h: f64) -> Result<DiurnalProfile> {
    let n = (24.0 / bin_h).round() as usize;
    let median: Vec<f64> = (0..n).map(|i| diurnal_shape((i as f64 + 0.5) * bin_h)).collect();
    let p95 = median.iter().map(|m| 1.35 * m).collect();
    DiurnalProfile::from_curves(bin_h, median, Some(p95))
}

/// Throughput series `site_id,timestamp_s,bytes` for `n_sites` sites over
/// `days` days at `cadence_s`, each site with its own scale and lognormal
/// noise around [`diurnal_shape`].
pub fn synthetic_series(seed: u64, n_sites: usize, days: usize, cadence_s: f64) -> Vec<(String, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = LogNormal::new(0.0, 0.15).expect("valid lognormal");
    let mut rows = Vec::new();
    for s in 0..n_sites {
        let scale = 10f64.powf(rng.random_range(3.0..7.0));
        let steps = (days as f64 * 86400.0 / cadence_s) as usize;
        for k in 0..steps {
            let t = k as f64 * cadence_s;
            let v = scale * diurnal_shape((t / 3600.0).rem_euclid(24.0)) * noise.sample(&mut rng);
            rows.push((format!("site{s:03}"), t, v.round()));
        }
    }
    rows
}

/// One site whose throughput is `2 + sin(2 pi t / 24h)`, sampled three
/// times per bin at the center and `bin/4` either side. Bin medians after
/// site normalization are `(2 + sin(2 pi c / 24)) / 2` at bin center `c`.
pub fn sinusoid_series(bin_h: f64) -> Vec<(String, f64, f64)> {
    let n = (24.0 / bin_h).round() as usize;
    let delta = bin_h / 4.0;
    let mut rows = Vec::with_capacity(3 * n);
    for i in 0..n {
        let c = (i as f64 + 0.5) * bin_h;
        for t in [c - delta, c, c + delta] {
            let v = 2.0 + (2.0 * std::f64::consts::PI * t / 24.0).sin();
            rows.push(("sine".to_string(), t * 3600.0, v));
        }
    }
    rows
}

pub fn sinusoid_expected_medians(bin_h: f64) -> Vec<f64> {
    let n = (24.0 / bin_h).round() as usize;
    (0..n)
        .map(|i| {
            let c = (i as f64 + 0.5) * bin_h;
            (2.0 + (2.0 * std::f64::consts::PI * c / 24.0).sin()) / 2.0
        })
        .collect()
}

pub fn write_series_csv<W: std::io::Write>(out: W, rows: &[(String, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["site_id", "timestamp_s", "bytes"])?;
    for (site, t, b) in rows {
        w.write_record([site.clone(), format!("{t}"), format!("{b}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Demand identically zero on the default 0.5 deg x 0.5 h grid.
pub fn zero_demand() -> Result<DemandGrid> {
    DemandGrid::zeros(0.5, 0.5)
}

/// 12 latitude x 8 local-time grid (15 deg x 3 h) with a few planted cells.
pub fn toy_demand() -> Result<DemandGrid> {
    let mut v = vec![0.0; 12 * 8];
    // (row, col, demand); row 0 starts at -90, col 0 at 00h
    for (r, c, d) in [(8, 6, 2.0), (7, 3, 1.0), (4, 4, 1.0), (9, 0, 0.5), (6, 6, 1.5)] {
        v[r * 8 + c] = d;
    }
    DemandGrid::from_values(15.0, 3.0, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::latitude_max_profile;

    #[test]
    fn population_is_seeded() {
        let a = synthetic_population(7, &default_clusters(), 1.0).unwrap();
        let b = synthetic_population(7, &default_clusters(), 1.0).unwrap();
        let c = synthetic_population(8, &default_clusters(), 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn profile_peaks_at_planted_latitudes() {
        let g = synthetic_population(1, &default_clusters(), 0.5).unwrap();
        let p = latitude_max_profile(&g);
        let centers = p.centers();
        for c in default_clusters() {
            let i = centers.iter().position(|&x| (x - c.lat_deg).abs() < 1e-9).unwrap();
            assert!((p.values[i] - c.amplitude).abs() < 1e-12);
            assert!(p.values[i] >= p.values[i - 1] && p.values[i] >= p.values[i + 1]);
        }
    }

    #[test]
    fn toy_grid_shape() {
        let t = toy_demand().unwrap();
        assert_eq!((t.n_lat(), t.n_lst()), (12, 8));
        assert_eq!(t.peak(), 2.0);
    }
}
