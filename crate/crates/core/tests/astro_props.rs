use heliocover::astro::*;
use heliocover::constants::EARTH;
use proptest::prelude::*;

const DEG_PER_RAD: f64 = 180.0 / std::f64::consts::PI;

/// Textbook first-order J2 nodal regression, written out independently.
fn oracle_raan_rate_deg_day(alt: f64, incl: f64) -> f64 {
    let a = EARTH.equatorial_radius_km + alt;
    let n = (EARTH.gravitational_parameter_km3_s2 / a.powi(3)).sqrt();
    let p = EARTH.equatorial_radius_km / a;
    -1.5 * n * EARTH.j2 * p * p * incl.to_radians().cos() * DEG_PER_RAD * 86400.0
}

#[test]
fn period_matches_kepler() {
    for alt in [300.0, 550.0, 1200.0, 20000.0] {
        let a: f64 = EARTH.equatorial_radius_km + alt;
        let t = 2.0 * std::f64::consts::PI * (a.powi(3) / EARTH.gravitational_parameter_km3_s2).sqrt();
        assert!((orbital_period(alt).unwrap() - t).abs() < 1e-9 * t);
    }
    assert!((orbital_period(550.0).unwrap() - 5738.8).abs() < 1.0);
}

#[test]
fn precession_matches_oracle() {
    for (alt, incl) in [(560.0, 45.0), (800.0, 97.0), (400.0, 0.0), (1500.0, 130.0)] {
        let got = nodal_precession_rate(alt, incl).unwrap();
        let want = oracle_raan_rate_deg_day(alt, incl);
        assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "{alt} {incl}: {got} vs {want}");
    }
}

#[test]
fn sun_sync_rate_is_one_year_per_turn() {
    for alt in [400.0, 560.0, 800.0, 1200.0] {
        let i = sun_synchronous_inclination(alt).unwrap();
        let rate = oracle_raan_rate_deg_day(alt, i);
        assert!((rate - 360.0 / EARTH.tropical_year_days).abs() < 1e-9, "{alt}: {rate}");
    }
    let i = sun_synchronous_inclination(560.0).unwrap();
    assert!((i - 97.6).abs() < 0.2);
}

#[test]
fn invalid_orbits_are_rejected() {
    assert!(orbital_period(-10.0).is_err());
    assert!(orbital_period(f64::NAN).is_err());
    assert!(nodal_precession_rate(500.0, 181.0).is_err());
    assert!(sun_synchronous_inclination(20000.0).is_err());
}

#[test]
fn rgt_solutions_satisfy_repeat_condition() {
    let sols = find_rgt_orbits(500.0, 1500.0, 65.0, 3).unwrap();
    assert!(!sols.is_empty());
    for s in &sols {
        let tn = nodal_period(s.altitude_km, s.inclination_deg).unwrap();
        let dn = nodal_day(s.altitude_km, s.inclination_deg).unwrap();
        let lhs = s.orbits_q as f64 * tn;
        let rhs = s.repeat_days_p as f64 * dn;
        assert!((lhs - rhs).abs() < 1e-6 * rhs, "{s:?}");
        assert!((500.0..=1500.0).contains(&s.altitude_km));
    }
    let mut sorted = sols.clone();
    sorted.sort_by(|a, b| a.altitude_km.total_cmp(&b.altitude_km));
    assert_eq!(sorted, sols);
}

#[test]
fn rgt_track_closes_after_repeat() {
    let sols = find_rgt_orbits(500.0, 1500.0, 65.0, 2).unwrap();
    for s in sols {
        let prop = Propagator::new(&s.orbit());
        let a = prop.sample(0.0);
        let b = prop.sample(s.repeat_period_s());
        let d = heliocover::sphere::central_angle_deg(a.lat_deg, a.lon_deg, b.lat_deg, b.lon_deg);
        assert!(d < 0.01, "{s:?}: {d}");
    }
}

#[test]
fn solar_frame_track_of_ss_orbit_is_stationary() {
    let i = sun_synchronous_inclination(560.0).unwrap();
    let orbit = OrbitSpec::from_ltan(560.0, i, 10.5, 0.0, 0.0).unwrap();
    assert!((orbit.ltan_h() - 10.5).abs() < 1e-9);
    let prop = Propagator::new(&orbit);
    let tn = nodal_period(560.0, i).unwrap();
    // ascending node local time after many revolutions stays at the LTAN
    for k in [0u32, 15, 150] {
        let s = prop.sample(k as f64 * tn);
        assert!(s.lat_deg.abs() < 1e-6);
        assert!((s.local_solar_time_h - 10.5).abs() < 1e-6, "{k}: {}", s.local_solar_time_h);
    }
}

#[test]
fn ground_track_csv_headers() {
    let orbit = OrbitSpec::circular(560.0, 53.0).unwrap();
    let track = propagate_ground_track(&orbit, 600.0, 60.0).unwrap();
    assert_eq!(track.len(), 11);
    let mut buf = Vec::new();
    write_ground_track_csv(&mut buf, &track, Frame::Earth).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("time_s,lat_deg,lon_deg,alt_km\n"));
    let mut buf = Vec::new();
    write_ground_track_csv(&mut buf, &track, Frame::Solar).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("time_s,lat_deg,lst_h,alt_km\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn precession_is_antisymmetric(alt in 200.0f64..3000.0, incl in 0.0f64..=180.0) {
        let a = nodal_precession_rate(alt, incl).unwrap();
        let b = nodal_precession_rate(alt, 180.0 - incl).unwrap();
        prop_assert!((a + b).abs() <= 1e-9 * a.abs().max(1e-12));
    }

    #[test]
    fn period_grows_with_altitude(alt in 200.0f64..3000.0, dh in 1.0f64..500.0) {
        prop_assert!(orbital_period(alt + dh).unwrap() > orbital_period(alt).unwrap());
    }

    #[test]
    fn sun_sync_is_retrograde(alt in 200.0f64..5000.0) {
        let i = sun_synchronous_inclination(alt).unwrap();
        prop_assert!(i > 90.0 && i < 180.0);
    }

    #[test]
    fn ltan_roundtrip(ltan in 0.0f64..24.0, alt in 300.0f64..1500.0) {
        let i = sun_synchronous_inclination(alt).unwrap();
        let o = OrbitSpec::from_ltan(alt, i, ltan, 0.0, 0.0).unwrap();
        let d = (o.ltan_h() - ltan).rem_euclid(24.0);
        prop_assert!(d.min(24.0 - d) < 1e-9);
    }

    #[test]
    fn solar_time_at_subsolar_longitude_is_noon(t in 0.0f64..1e7) {
        // the sub-solar meridian is where hour angle of the sun is zero
        let lon = heliocover::sphere::wrap_lon(sun_right_ascension_deg(t) - greenwich_angle_deg(t));
        let lst = local_solar_time(lon, t);
        prop_assert!((lst - 12.0).abs() < 1e-6);
    }
}
