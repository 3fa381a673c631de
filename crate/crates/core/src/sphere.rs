//! Unit-sphere geometry helpers. All angles in degrees unless noted.

/// Cartesian unit vector for a (lat, lon) point.
#[inline]
pub fn unit_vector(lat_deg: f64, lon_deg: f64) -> [f64; 3] {
    let (slat, clat) = lat_deg.to_radians().sin_cos();
    let (slon, clon) = lon_deg.to_radians().sin_cos();
    [clat * clon, clat * slon, slat]
}

#[inline]
pub fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Great-circle central angle by the haversine formula.
pub fn central_angle_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let p1 = lat1.to_radians();
    let p2 = lat2.to_radians();
    let dlat = (p2 - p1) / 2.0;
    let dlon = (lon2 - lon1).to_radians() / 2.0;
    let h = dlat.sin().powi(2) + p1.cos() * p2.cos() * dlon.sin().powi(2);
    (2.0 * h.sqrt().min(1.0).asin()).to_degrees()
}

/// Central angle between two unit vectors.
#[inline]
pub fn central_angle_vec_deg(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    // atan2 form stays accurate for both tiny and near-antipodal separations
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    dot(&c, &c).sqrt().atan2(dot(a, b)).to_degrees()
}

/// Wrap a longitude into [-180, 180).
#[inline]
pub fn wrap_lon(lon_deg: f64) -> f64 {
    let w = (lon_deg + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Wrap an angle into [0, 360).
#[inline]
pub fn wrap_360(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Wrap hours into [0, 24).
#[inline]
pub fn wrap_hours(h: f64) -> f64 {
    let w = h.rem_euclid(24.0);
    if w >= 24.0 {
        0.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haversine_matches_vector_form() {
        let pairs = [
            (0.0, 0.0, 5.0, 5.0),
            (10.0, -170.0, -20.0, 175.0),
            (89.0, 0.0, -89.0, 180.0),
            (30.0, 30.0, 30.0, 30.0),
        ];
        for (a, b, c, d) in pairs {
            let h = central_angle_deg(a, b, c, d);
            let v = central_angle_vec_deg(&unit_vector(a, b), &unit_vector(c, d));
            assert!((h - v).abs() < 1e-9, "{h} vs {v}");
        }
    }

    #[test]
    fn five_five_offset() {
        // spherical law of cosines: acos(cos 5 * cos 5)
        let want = (5f64.to_radians().cos().powi(2)).acos().to_degrees();
        let d = central_angle_deg(0.0, 0.0, 5.0, 5.0);
        assert!((d - want).abs() < 1e-9, "{d}");
        assert!((d - 7.0666).abs() < 1e-3);
    }

    #[test]
    fn wraps() {
        assert_eq!(wrap_lon(180.0), -180.0);
        assert_eq!(wrap_lon(-180.0), -180.0);
        assert!((wrap_lon(540.5) - (-179.5)).abs() < 1e-12);
        assert_eq!(wrap_hours(24.0), 0.0);
        assert!((wrap_hours(-1.0) - 23.0).abs() < 1e-12);
        assert_eq!(wrap_360(-0.0), 0.0);
    }
}
