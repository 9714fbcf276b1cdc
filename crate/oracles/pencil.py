"""Roots of the corner determinant on the negative imaginary axis, by
high-precision root finding (mpmath).

With lambda = -i y the argument i*lambda = y is real, so D is real on
the axis; sign changes and minima of |D| bracket the roots.
"""

import os

import mpmath as mp

from common import DATA

mp.mp.dps = 40

PROBLEMS = [
    # omega_l, omega_total, eps_l, eps_next
    (1.0, 2.6, [[2.0, 0.5], [0.3, 1.0]], [[1.0, 0.2], [0.4, 3.0]]),
    (mp.pi / 3, mp.pi, [[1.0, 0.1], [0.1, 1.0]], [[5.0, 0.3], [0.2, 0.5]]),
    (mp.pi, 3 * mp.pi / 2, [[2.0, 1.0], [1.0, 2.0]], [[2.0, 1.0], [1.0, 2.0]]),
]


def det(wl, wt, e, f, y):
    p = mp.sin(y * wl) * mp.cos(y * (wt - wl))
    q = mp.cos(y * wl) * mp.sin(y * (wt - wl))
    d = lambda j, k: p * e[j][k] + q * f[j][k]
    return d(0, 0) * d(1, 1) - d(0, 1) * d(1, 0)


def roots(wl, wt, e, f, ymax=3.0, n=6000):
    g = lambda y: det(wl, wt, e, f, y)
    found = []
    ys = [mp.mpf(ymax) * k / n for k in range(1, n)]
    vals = [g(y) for y in ys]
    for k in range(len(ys) - 1):
        if vals[k] == 0 or vals[k] * vals[k + 1] < 0:
            found.append((mp.findroot(g, (ys[k], ys[k + 1]), solver="anderson"), 1))
    for k in range(1, len(ys) - 1):
        # touching zeros (even multiplicity) show up as |D| minima with no sign change
        if abs(vals[k]) < abs(vals[k - 1]) and abs(vals[k]) < abs(vals[k + 1]) and vals[k - 1] * vals[k + 1] > 0:
            dg = lambda y: mp.diff(g, y)
            y0 = mp.findroot(dg, ys[k])
            if abs(g(y0)) < mp.mpf(10) ** -30:
                found.append((y0, 2))
    return sorted(found, key=lambda r: r[0])


def main():
    with open(os.path.join(DATA, "pencil_roots_golden.csv"), "w") as f:
        f.write("problem,omega_l,omega_total,e00,e01,e10,e11,f00,f01,f10,f11,im,multiplicity\n")
        for k, (wl, wt, e, fm) in enumerate(PROBLEMS):
            head = [float(wl), float(wt)] + [v for r in e for v in r] + [v for r in fm for v in r]
            rs = roots(wl, wt, e, fm)
            if not rs:
                f.write(f"{k}," + ",".join(repr(float(v)) for v in head) + ",,0\n")
            for y, mult in rs:
                f.write(f"{k}," + ",".join(repr(float(v)) for v in head) + f",{float(-y)!r},{mult}\n")


if __name__ == "__main__":
    main()
