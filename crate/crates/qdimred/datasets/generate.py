#!/usr/bin/env python3
"""Regenerate the vendored dataset snapshots.

iris / wines / mnist_binary_8x8 are exported from scikit-learn's bundled
copies. The wheat-seeds file is a synthetic snapshot: 210 samples, 7
features, 3 balanced classes, drawn from class-conditional geometric
models matching the published summary statistics of the UCI Seeds data
(area ~ ellipse of kernel length x width, compactness = 4*pi*A/P^2,
groove length tracking kernel length). It mirrors the real dataset's
shape, scale and correlation structure but is not the original data.

Run from this directory: python3 generate.py
"""

import numpy as np
from sklearn import datasets


def write_csv(path, names, X, y):
    with open(path, "w") as f:
        f.write(",".join(names) + ",label\n")
        for row, label in zip(X, y):
            f.write(",".join(repr(float(v)) for v in row) + f",{int(label)}\n")


def export_iris():
    d = datasets.load_iris()
    names = [n.replace(" (cm)", "").replace(" ", "_") for n in d.feature_names]
    write_csv("iris.csv", names, d.data, d.target)


def export_wines():
    d = datasets.load_wine()
    names = [n.replace("/", "_") for n in d.feature_names]
    write_csv("wines.csv", names, d.data, d.target)


def export_mnist_binary():
    d = datasets.load_digits()
    mask = (d.target == 0) | (d.target == 1)
    names = [f"px_{r}_{c}" for r in range(8) for c in range(8)]
    write_csv("mnist_binary_8x8.csv", names, d.data[mask], d.target[mask])


def export_seed():
    rng = np.random.default_rng(20240917)
    # class rows: kernel length mean/sd, width-to-length ratio mean/sd,
    # asymmetry mean/sd -- Kama / Rosa / Canadian wheat varieties
    classes = [
        (5.51, 0.12, 0.590, 0.018, 2.70, 1.10),
        (6.15, 0.15, 0.600, 0.016, 3.60, 1.20),
        (5.23, 0.11, 0.545, 0.015, 4.80, 1.30),
    ]
    rows, labels = [], []
    for label, (ml, sl, mr, sr, ma, sa) in enumerate(classes):
        for _ in range(70):
            length = rng.normal(ml, sl)
            width = length * rng.normal(mr, sr)
            area = np.pi / 4.0 * length * width * rng.normal(1.0, 0.012)
            # perimeter via Ramanujan's ellipse approximation plus jitter
            a, b = length / 2.0, width / 2.0
            h = ((a - b) / (a + b)) ** 2
            perim = np.pi * (a + b) * (1 + 3 * h / (10 + np.sqrt(4 - 3 * h)))
            perim *= rng.normal(1.018, 0.006)
            compact = 4.0 * np.pi * area / perim**2
            asym = max(0.75, rng.normal(ma, sa))
            groove = 0.92 * length + rng.normal(0.0, 0.045)
            rows.append([area, perim, compact, length, width, asym, groove])
            labels.append(label)
    names = [
        "area",
        "perimeter",
        "compactness",
        "kernel_length",
        "kernel_width",
        "asymmetry",
        "groove_length",
    ]
    write_csv("seed.csv", names, np.array(rows), np.array(labels))


if __name__ == "__main__":
    export_iris()
    export_wines()
    export_mnist_binary()
    export_seed()
    print("wrote iris.csv wines.csv mnist_binary_8x8.csv seed.csv")
