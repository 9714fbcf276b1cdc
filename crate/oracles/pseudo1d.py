"""Reference for one decoupled component on a strip: the scalar problem

    beta u_t = kappa u_xx  on (0, 1),
    kappa u_x n + alpha (u - sigma) = 0  at x = 0 and x = 1,

solved with fine P1 elements in x and Crank-Nicolson in t.
"""

import os

import numpy as np
from scipy.linalg import solve_banded

from common import DATA

CASES = {
    # component: beta, kappa, alpha_west, sigma_west, alpha_east, sigma_east
    "theta": (1.0, 1.0, 2.0, 1.0, 1.0, 0.0),
    "moisture": (2.0, 0.5, 1.0, 0.5, 1.0, 0.0),
}
TIMES = [0.05, 0.1, 0.2, 0.5]
XS = [0.0, 0.25, 0.5, 0.75, 1.0]


def solve(beta, kappa, aw, sw, ae, se, n=2000, dt=1e-5):
    h = 1.0 / n
    m = np.zeros((3, n + 1))
    k = np.zeros((3, n + 1))
    for e in range(n):
        for a in range(2):
            for b in range(2):
                i, j = e + a, e + b
                m[1 + i - j, j] += beta * h / 6.0 * (2.0 if a == b else 1.0)
                k[1 + i - j, j] += kappa / h * (1.0 if a == b else -1.0)
    k[1, 0] += aw
    k[1, n] += ae
    f = np.zeros(n + 1)
    f[0] = aw * sw
    f[n] = ae * se
    lhs = m + 0.5 * dt * k
    u = np.zeros(n + 1)

    def apply(band, v):
        out = band[1] * v
        out[:-1] += band[0, 1:] * v[1:]
        out[1:] += band[2, :-1] * v[:-1]
        return out

    out = {}
    t = 0.0
    steps = int(round(TIMES[-1] / dt))
    marks = {int(round(tt / dt)): tt for tt in TIMES}
    for s in range(1, steps + 1):
        rhs = apply(m - 0.5 * dt * k, u) + dt * f
        u = solve_banded((1, 1), lhs, rhs)
        t += dt
        if s in marks:
            out[marks[s]] = np.interp(XS, np.linspace(0, 1, n + 1), u)
    return out


def main():
    with open(os.path.join(DATA, "pseudo1d_reference.csv"), "w") as f:
        f.write("component,t,x,u\n")
        for name, params in CASES.items():
            res = solve(*params)
            for t in TIMES:
                for x, v in zip(XS, res[t]):
                    f.write(f"{name},{t!r},{x!r},{float(v)!r}\n")


if __name__ == "__main__":
    main()
