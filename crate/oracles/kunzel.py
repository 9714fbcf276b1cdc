"""Kuenzel coefficients of the demo brick, evaluated independently.

Curves use scipy's PCHIP and surfaces scipy's bilinear grid interpolator.
"""

import os

import numpy as np
from scipy.interpolate import PchipInterpolator, RegularGridInterpolator

from common import DATA, DEMO, read_curve, read_surface

BRICK = dict(rho0=1650.0, c0=850.0, rho_w=1000.0, c_w=4190.0, latent_heat=2.45e6, mu=10.0)


def curve(name):
    x, y = read_curve(os.path.join(DEMO, "materials", name + ".csv"))
    p = PchipInterpolator(x, y)
    return p, p.derivative()


def surface(name):
    m, theta, v = read_surface(os.path.join(DEMO, "materials", name + ".csv"))
    return RegularGridInterpolator((m, theta), v, method="linear")


def main():
    h, dh = curve("brick_storage")
    ps, dps = curve("saturation_pressure")
    delta, _ = curve("vapour_diffusion")
    lam = surface("brick_lambda")
    liq = surface("brick_liquid")
    p = BRICK
    rcw = p["rho_w"] * p["c_w"]
    rows = []
    for theta in np.linspace(263.15, 313.15, 6):
        for phi in np.linspace(0.05, 0.95, 7):
            w, dw = float(h(phi)), float(dh(phi))
            vap = float(delta(theta)) / p["mu"]
            s, ds = float(ps(theta)), float(dps(theta))
            lv = p["latent_heat"]
            b = [
                [p["rho0"] * p["c0"] + rcw * w, 0.0],
                [rcw * theta * dw, p["rho_w"] * dw],
            ]
            a = [
                [float(lam([w, theta])[0]) + lv * vap * phi * ds, lv * vap * s],
                [vap * phi * ds, float(liq([phi, theta])[0]) + vap * s],
            ]
            rows.append([theta, phi] + b[0] + b[1] + a[0] + a[1])
    with open(os.path.join(DATA, "kunzel_brick_golden.csv"), "w") as f:
        f.write("theta,phi,b00,b01,b10,b11,a00,a01,a10,a11\n")
        for r in rows:
            f.write(",".join(repr(float(v)) for v in r) + "\n")


if __name__ == "__main__":
    main()
