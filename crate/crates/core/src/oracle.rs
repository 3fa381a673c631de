//! Numerical two-body + J2 propagation, used to check the analytic rates
//! against an independent integration.

use crate::constants::EARTH;

/// Inertial position (km) and velocity (km/s).
pub type State = [f64; 6];

fn accel(r: &[f64; 3]) -> [f64; 3] {
    let mu = EARTH.gravitational_parameter_km3_s2;
    let re = EARTH.equatorial_radius_km;
    let j2 = EARTH.j2;
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let rn = r2.sqrt();
    let k = -mu / (r2 * rn);
    let zr2 = r[2] * r[2] / r2;
    let f = 1.5 * j2 * (re * re) / r2;
    [
        k * r[0] * (1.0 + f * (1.0 - 5.0 * zr2)),
        k * r[1] * (1.0 + f * (1.0 - 5.0 * zr2)),
        k * r[2] * (1.0 + f * (3.0 - 5.0 * zr2)),
    ]
}

fn deriv(s: &State) -> State {
    let a = accel(&[s[0], s[1], s[2]]);
    [s[3], s[4], s[5], a[0], a[1], a[2]]
}

/// One classical RK4 step.
pub fn rk4_step(s: &State, h: f64) -> State {
    let add = |a: &State, b: &State, w: f64| -> State {
        let mut o = *a;
        for i in 0..6 {
            o[i] += w * b[i];
        }
        o
    };
    let k1 = deriv(s);
    let k2 = deriv(&add(s, &k1, 0.5 * h));
    let k3 = deriv(&add(s, &k2, 0.5 * h));
    let k4 = deriv(&add(s, &k3, h));
    let mut o = *s;
    for i in 0..6 {
        o[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    o
}

/// Circular-speed state at the ascending node with the given RAAN.
pub fn circular_state(altitude_km: f64, inclination_deg: f64, raan_deg: f64) -> State {
    let r = EARTH.equatorial_radius_km + altitude_km;
    let v = (EARTH.gravitational_parameter_km3_s2 / r).sqrt();
    let (so, co) = raan_deg.to_radians().sin_cos();
    let (si, ci) = inclination_deg.to_radians().sin_cos();
    [r * co, r * so, 0.0, -v * so * ci, v * co * ci, v * si]
}

/// Right ascension of the ascending node from the angular momentum vector.
pub fn raan_deg(s: &State) -> f64 {
    let h = [
        s[1] * s[5] - s[2] * s[4],
        s[2] * s[3] - s[0] * s[5],
        s[0] * s[4] - s[1] * s[3],
    ];
    h[0].atan2(-h[1]).to_degrees()
}

/// Mean RAAN drift in deg/day, from a least-squares line through the RAAN
/// sampled at each ascending-node crossing over `days`.
pub fn measured_raan_drift(altitude_km: f64, inclination_deg: f64, days: f64, step_s: f64) -> f64 {
    let mut s = circular_state(altitude_km, inclination_deg, 0.0);
    let n = (days * 86400.0 / step_s).ceil() as usize;
    let mut samples: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    let mut unwrap = 0.0;
    let mut last_raan = 0.0;
    for k in 0..n {
        let next = rk4_step(&s, step_s);
        if s[2] < 0.0 && next[2] >= 0.0 {
            // interpolate the crossing
            let f = -s[2] / (next[2] - s[2]);
            let mut x = [0.0; 6];
            for i in 0..6 {
                x[i] = s[i] + f * (next[i] - s[i]);
            }
            let mut raan = raan_deg(&x) + unwrap;
            if raan - last_raan > 180.0 {
                unwrap -= 360.0;
                raan -= 360.0;
            } else if raan - last_raan < -180.0 {
                unwrap += 360.0;
                raan += 360.0;
            }
            last_raan = raan;
            samples.push(((k as f64 + f) * step_s / 86400.0, raan));
        }
        s = next;
    }
    let m = samples.len() as f64;
    let (sx, sy) = samples.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = samples
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_is_conserved() {
        let energy = |s: &State| {
            let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
            let r = r2.sqrt();
            let v2 = s[3] * s[3] + s[4] * s[4] + s[5] * s[5];
            let re = EARTH.equatorial_radius_km;
            let sin2 = s[2] * s[2] / r2;
            0.5 * v2 - EARTH.gravitational_parameter_km3_s2 / r * (1.0 - EARTH.j2 * (re / r).powi(2) * 0.5 * (3.0 * sin2 - 1.0))
        };
        let mut s = circular_state(700.0, 51.6, 20.0);
        let e0 = energy(&s);
        for _ in 0..6000 {
            s = rk4_step(&s, 10.0);
        }
        assert!(((energy(&s) - e0) / e0).abs() < 1e-9);
    }

    #[test]
    fn polar_orbit_does_not_precess() {
        let d = measured_raan_drift(560.0, 90.0, 2.0, 10.0);
        assert!(d.abs() < 1e-3, "{d}");
    }
}
