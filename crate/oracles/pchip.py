"""Golden values of the monotone cubic interpolant (scipy PCHIP) on demo curves."""

import os

import numpy as np
from scipy.interpolate import PchipInterpolator

from common import DATA, DEMO, read_curve

CURVES = ["brick_storage", "plaster_storage", "kiessl_f", "kiessl_g", "saturation_pressure"]


def main():
    rows = []
    for name in CURVES:
        x, y = read_curve(os.path.join(DEMO, "materials", name + ".csv"))
        p = PchipInterpolator(x, y)
        dp = p.derivative()
        # a deterministic spread including breakpoints and both ends
        xs = np.unique(np.concatenate([x, np.linspace(x[0], x[-1], 41)]))
        for v in xs:
            rows.append((name, float(v), float(p(v)), float(dp(v))))
    with open(os.path.join(DATA, "pchip_golden.csv"), "w") as f:
        f.write("curve,x,y,dy\n")
        for name, v, y, d in rows:
            f.write(f"{name},{v!r},{y!r},{d!r}\n")


if __name__ == "__main__":
    main()
