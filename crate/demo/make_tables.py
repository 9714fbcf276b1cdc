"""Writes the demo material tables and climate series.

Brick and lime plaster follow the usual Kuenzel approximations (storage
function from free saturation and w80, liquid transport from the water
absorption coefficient). The Kiessl material is a synthetic mineral
material with the required potential normalisation.

Run from the repository root: python3 demo/make_tables.py
"""

import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
MAT = os.path.join(HERE, "materials")
CLIMATE = os.path.join(HERE, "climate")

RHO_W = 1000.0
R_V = 461.5
P_N = 101325.0
THETA = np.array([253.15, 273.15, 293.15, 313.15, 333.15])


def fmt(v):
    return repr(float(v))


def write_curve(name, xs, ys):
    with open(os.path.join(MAT, name), "w") as f:
        f.write("x,y\n")
        for x, y in zip(xs, ys):
            f.write(f"{fmt(x)},{fmt(y)}\n")


def write_surface(name, m_axis, theta_axis, values):
    with open(os.path.join(MAT, name), "w") as f:
        f.write("m\\theta," + ",".join(fmt(t) for t in theta_axis) + "\n")
        for m, row in zip(m_axis, values):
            f.write(fmt(m) + "," + ",".join(fmt(v) for v in row) + "\n")


def saturation_pressure(theta):
    t = theta - 273.15
    return np.where(
        t >= 0.0,
        611.0 * np.exp(17.08 * t / (234.18 + t)),
        611.0 * np.exp(22.44 * t / (272.44 + t)),
    )


def vapour_diffusion(theta):
    return 2.0e-7 * theta**0.81 / P_N


def phi_axis():
    coarse = np.linspace(0.0, 0.9, 19)
    fine = np.linspace(0.91, 1.0, 10)
    return np.concatenate([coarse, fine])


def kunzel_material(prefix, w_f, w_80, a_abs, lambda_0, rho0):
    """Tables for one Kuenzel material; water content is volumetric."""
    # w(phi) = w_f (b - 1) phi / (b - phi) through (0.8, w_80)
    b = solve_b(w_f, w_80)
    phi = phi_axis()
    w = w_f * (b - 1.0) * phi / (b - phi)
    dw = w_f * (b - 1.0) * b / (b - phi) ** 2
    write_curve(f"{prefix}_storage.csv", phi, w)

    # liquid transport: D_w(w) = 3.8 (A / W_f)^2 1000^(w/w_f - 1), W in kg/m3
    big_wf = w_f * RHO_W
    d_w = 3.8 * (a_abs / big_wf) ** 2 * 1000.0 ** (w / w_f - 1.0)
    liquid = RHO_W * d_w * dw
    write_surface(
        f"{prefix}_liquid.csv",
        phi,
        THETA[[0, -1]],
        np.repeat(liquid[:, None], 2, axis=1),
    )

    w_axis = np.linspace(0.0, w_f, 6)
    lam = lambda_0 * (1.0 + 8.0 * w_axis * RHO_W / rho0)
    temp = 1.0 + 0.002 * (THETA - 283.15)
    write_surface(f"{prefix}_lambda.csv", w_axis, THETA, np.outer(lam, temp))


def solve_b(w_f, w_80):
    # w_80 = w_f (b - 1) 0.8 / (b - 0.8)  =>  b = 0.8 (w_f - w_80) / (0.8 w_f - w_80)
    return 0.8 * (w_f - w_80) / (0.8 * w_f - w_80)


def kiessl_material():
    pot = np.concatenate([np.linspace(0.0, 0.8, 9), np.linspace(0.9, 2.0, 12)])
    g = np.where(pot <= 0.8, pot, 1.0 - 0.2 * np.exp(-(pot - 0.8) / 0.2))
    f = 0.01 * pot + 0.24 * (pot / 2.0) ** 3
    write_curve("kiessl_f.csv", pot, f)
    write_curve("kiessl_g.csv", pot, g)

    theta = np.linspace(253.15, 333.15, 9)
    write_curve("kiessl_rho_ps.csv", theta, saturation_pressure(theta) / (R_V * theta))

    w_axis = np.linspace(0.0, 0.3, 7)
    lam = 0.8 * (1.0 + 4.0 * w_axis)
    write_surface("kiessl_lambda.csv", w_axis, THETA, np.repeat(lam[:, None], len(THETA), axis=1))
    d_w = 1.0e-6 * np.exp(20.0 * w_axis / 0.26)
    write_surface("kiessl_dw.csv", w_axis, THETA, np.repeat(d_w[:, None], len(THETA), axis=1))
    d_phi = np.outer(np.ones_like(w_axis), saturation_pressure(THETA) * 2.0e-11)
    write_surface("kiessl_dphi.csv", w_axis, THETA, d_phi)


def climate():
    hours = np.arange(0, 25)
    t = hours * 3600.0
    theta = 278.15 + 5.0 * np.sin(2.0 * np.pi * (hours - 9.0) / 24.0)
    # driving rain during the first four hours wets the facade
    phi = np.where(hours <= 4, 1.0, 0.75)
    with open(os.path.join(CLIMATE, "exterior.csv"), "w") as f:
        f.write("t_s,sigma1,sigma2\n")
        for a, b, c in zip(t, theta, phi):
            f.write(f"{fmt(a)},{fmt(b)},{fmt(c)}\n")


def main():
    os.makedirs(MAT, exist_ok=True)
    os.makedirs(CLIMATE, exist_ok=True)
    theta = np.linspace(243.15, 343.15, 21)
    write_curve("saturation_pressure.csv", theta, saturation_pressure(theta))
    write_curve("vapour_diffusion.csv", theta, vapour_diffusion(theta))
    kunzel_material("brick", w_f=0.19, w_80=0.009, a_abs=0.3, lambda_0=0.6, rho0=1650.0)
    kunzel_material("plaster", w_f=0.25, w_80=0.03, a_abs=0.047, lambda_0=0.7, rho0=1600.0)
    kiessl_material()
    climate()


if __name__ == "__main__":
    main()
