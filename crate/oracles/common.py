import os

import numpy as np

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEMO = os.path.join(ROOT, "demo")
DATA = os.path.join(ROOT, "crates", "core", "tests", "data")


def read_curve(path):
    a = np.loadtxt(path, delimiter=",", skiprows=1)
    return a[:, 0], a[:, 1]


def read_surface(path):
    with open(path) as f:
        header = f.readline().strip().split(",")
    theta = np.array([float(v) for v in header[1:]])
    body = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return body[:, 0], theta, body[:, 1:]
