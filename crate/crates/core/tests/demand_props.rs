use heliocover::demand::*;
use heliocover::fixtures;
use heliocover::Error;
use proptest::prelude::*;

fn series_csv(rows: &[(String, f64, f64)]) -> Vec<u8> {
    let mut buf = Vec::new();
    fixtures::write_series_csv(&mut buf, rows).unwrap();
    buf
}

fn profile_of(rows: &[(String, f64, f64)]) -> DiurnalProfile {
    read_diurnal_series(series_csv(rows).as_slice(), &DiurnalOptions::default()).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn sinusoid_medians_are_closed_form() {
    let p = profile_of(&fixtures::sinusoid_series(0.5));
    let want = fixtures::sinusoid_expected_medians(0.5);
    assert_eq!(p.n_bins(), want.len());
    for (g, w) in p.median.iter().zip(&want) {
        assert!((g - w).abs() < 1e-9, "{g} vs {w}");
    }
}

#[test]
fn zero_median_sites_are_skipped() {
    let mut rows = fixtures::sinusoid_series(0.5);
    rows.extend((0..48).map(|k| ("dead".to_string(), k as f64 * 1800.0, 0.0)));
    let p = profile_of(&rows);
    assert_eq!(p.sites_used, 1);
    assert_eq!(p.sites_skipped, vec!["dead".to_string()]);
}

#[test]
fn empty_series_is_a_validation_error() {
    let r = read_diurnal_series("site_id,timestamp_s,bytes\n".as_bytes(), &DiurnalOptions::default());
    assert!(matches!(r, Err(Error::Validation(_))));
}

#[test]
fn population_reader_reports_problems() {
    let ok = "lat_deg,lon_deg,density\n0.25,0.25,3\n";
    assert_eq!(read_population_grid(ok.as_bytes(), 0.5, 0.5).unwrap().nonzero_cells(), 1);
    let neg = "0.25,0.25,-1\n";
    assert!(matches!(read_population_grid(neg.as_bytes(), 0.5, 0.5), Err(Error::Validation(_))));
    let dup = "0.25,0.25,1\n0.3,0.3,1\n";
    assert!(matches!(read_population_grid(dup.as_bytes(), 0.5, 0.5), Err(Error::Validation(_))));
    let bad = "lat_deg,lon_deg,density\n0.25,0.25,1\n1.25,x,2\n";
    match read_population_grid(bad.as_bytes(), 0.5, 0.5) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_roundtrips_are_exact() {
    let pop = fixtures::synthetic_population(3, &fixtures::default_clusters(), 1.0).unwrap();
    let mut buf = Vec::new();
    write_population_csv(&mut buf, &pop).unwrap();
    assert_eq!(read_population_grid(buf.as_slice(), 1.0, 1.0).unwrap(), pop);

    let diurnal = fixtures::synthetic_diurnal(0.5).unwrap();
    let mut buf = Vec::new();
    write_diurnal_csv(&mut buf, &diurnal).unwrap();
    let back = read_diurnal_csv(buf.as_slice()).unwrap();
    assert_eq!((back.median.clone(), back.p95.clone()), (diurnal.median.clone(), diurnal.p95.clone()));

    let grid = build_demand_grid(&latitude_max_profile(&pop), &diurnal, 3.0, 2.0, 1.0).unwrap();
    let mut buf = Vec::new();
    write_demand_csv(&mut buf, &grid).unwrap();
    let back = read_demand_csv(buf.as_slice(), 2.0, 1.0).unwrap();
    assert_eq!(back.values(), grid.values());
}

#[test]
fn bad_multiplier_and_zero_profile() {
    let diurnal = fixtures::synthetic_diurnal(0.5).unwrap();
    let lat = LatitudeProfile::new(0.5, vec![1.0; 360]).unwrap();
    assert!(build_demand_grid(&lat, &diurnal, 0.0, 0.5, 0.5).is_err());
    assert!(build_demand_grid(&lat, &diurnal, -1.0, 0.5, 0.5).is_err());
    let zero = LatitudeProfile::new(0.5, vec![0.0; 360]).unwrap();
    assert!(matches!(build_demand_grid(&zero, &diurnal, 1.0, 0.5, 0.5), Err(Error::Validation(_))));
}

#[test]
fn peak_cell_equals_multiplier() {
    let pop = fixtures::synthetic_population(1, &fixtures::default_clusters(), 0.5).unwrap();
    let g = build_demand_grid(&latitude_max_profile(&pop), &fixtures::synthetic_diurnal(0.5).unwrap(), 4.0, 0.5, 0.5).unwrap();
    assert!((g.peak() - 4.0).abs() < 1e-12);
    assert_eq!((g.n_lat(), g.n_lst()), (360, 48));
}

#[test]
fn snapshot_follows_local_time() {
    let pop = PopulationGrid::from_fn(1.0, 15.0, |_, _| 1.0).unwrap();
    let diurnal = fixtures::synthetic_diurnal(1.0).unwrap();
    let snap = demand_snapshot_earth_frame(&pop, &diurnal, 6.0);
    // column centered on lon 7.5 sits at local time 6.5 h
    let c = ((7.5 + 180.0) / 15.0) as usize;
    assert!((snap.get(45, c) - diurnal.median[6]).abs() < 1e-12);
}

fn arb_profile() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0f64..10.0, 36),
        prop::collection::vec(0.01f64..5.0, 24),
    )
        .prop_filter("nonzero latitude profile", |(l, _)| l.iter().any(|v| *v > 0.1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_is_separable((lat, tod) in arb_profile(), m in 0.1f64..50.0) {
        let lat = LatitudeProfile::new(5.0, lat).unwrap();
        let d = DiurnalProfile::from_curves(1.0, tod, None).unwrap();
        let g = build_demand_grid(&lat, &d, m, 5.0, 1.0).unwrap();
        for (r1, r2) in [(0, 17), (5, 30), (12, 13)] {
            for (c1, c2) in [(0, 23), (4, 11)] {
                let lhs = g.get(r1, c1) * g.get(r2, c2);
                let rhs = g.get(r1, c2) * g.get(r2, c1);
                prop_assert!(close(lhs, rhs, 1e-12) || (lhs - rhs).abs() < 1e-300);
            }
        }
    }

    #[test]
    fn linear_in_multiplier((lat, tod) in arb_profile(), m in 0.1f64..50.0, k in 0.1f64..20.0) {
        let lat = LatitudeProfile::new(5.0, lat).unwrap();
        let d = DiurnalProfile::from_curves(1.0, tod, None).unwrap();
        let a = build_demand_grid(&lat, &d, m, 5.0, 1.0).unwrap();
        let b = build_demand_grid(&lat, &d, k * m, 5.0, 1.0).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(close(k * x, *y, 1e-12) || (*y == 0.0 && *x == 0.0));
        }
    }

    #[test]
    fn longitude_permutation_does_not_change_demand(seed in 0u64..1000, shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let pop = fixtures::synthetic_population(seed, &fixtures::default_clusters(), 2.0).unwrap();
        let mut perm: Vec<usize> = (0..pop.n_lon()).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        let moved = pop.permute_longitudes(&perm).unwrap();
        let d = fixtures::synthetic_diurnal(0.5).unwrap();
        let a = build_demand_grid(&latitude_max_profile(&pop), &d, 2.0, 2.0, 0.5).unwrap();
        let b = build_demand_grid(&latitude_max_profile(&moved), &d, 2.0, 2.0, 0.5).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn per_site_scale_does_not_change_profile(seed in 0u64..1000, scales in prop::collection::vec(1e-3f64..1e3, 4)) {
        let rows = fixtures::synthetic_series(seed, 4, 2, 1800.0);
        let scaled: Vec<_> = rows
            .iter()
            .map(|(s, t, b)| {
                let k: usize = s.trim_start_matches("site").parse().unwrap();
                (s.clone(), *t, b * scales[k])
            })
            .collect();
        let a = profile_of(&rows);
        let b = profile_of(&scaled);
        for (x, y) in a.median.iter().zip(&b.median).chain(a.p95.iter().zip(&b.p95)) {
            prop_assert!(close(*x, *y, 1e-9), "{} vs {}", x, y);
        }
    }
}
