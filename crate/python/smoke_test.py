"""Smoke test for the heliocover_py extension module."""

import math

import heliocover_py as hc


def main():
    period = hc.orbital_period(550.0)
    assert abs(period - 5738.8) < 1.0, period

    incl = hc.sun_synchronous_inclination(560.0)
    assert abs(incl - 97.6) < 0.2, incl
    a = hc.nodal_precession_rate(700.0, 40.0)
    b = hc.nodal_precession_rate(700.0, 140.0)
    assert math.isclose(a, -b, rel_tol=1e-9)

    lam = hc.earth_central_angle(560.0, 25.0)
    assert 0.0 < lam < hc.earth_central_angle(560.0, 10.0)

    tracks = hc.find_rgt_orbits(1200.0, 1300.0, 65.0, 1)
    assert [(t.days, t.revolutions) for t in tracks] == [(1, 13)], tracks
    track = tracks[0].orbit().ground_track(600.0, 60.0)
    assert len(track) == 11 and len(track[0]) == 4

    values = [0.0] * (12 * 8)
    for row, col, d in [(8, 6, 2.0), (7, 3, 1.0), (4, 4, 1.0)]:
        values[row * 8 + col] = d
    grid = hc.DemandGrid.from_values(15.0, 3.0, values)
    assert grid.shape == (12, 8)
    design = hc.design_ss(grid, altitude_km=560.0, min_elevation_deg=25.0)
    assert design.method == "ss" and design.total_sats > 0
    assert design.replay_residual(grid, 560.0, 25.0) == 0.0
    assert len(design.satellites()) == design.total_sats
    assert '"variant":"ss"' in design.to_json()

    orbit = hc.Orbit(560.0, incl)
    electron, proton = hc.synthetic_exposure(orbit, duration_s=6000.0, step_s=60.0, n_raan=2)
    assert electron > 0.0 and proton >= 0.0

    try:
        hc.orbital_period(-10.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative altitude accepted")

    print(f"heliocover_py {hc.__version__}: ok (T={period:.1f} s, i_ss={incl:.3f} deg, {design.total_sats} sats)")


if __name__ == "__main__":
    main()
