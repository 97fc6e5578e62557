"""Regenerates the bundled domain datasets: 4 features, 3 classes, 150 rows each."""
import numpy as np

def blobs(rng, centers, spread, n_per_class):
    rows = []
    for label, c in enumerate(centers):
        pts = rng.normal(c, spread, size=(n_per_class, len(c)))
        rows += [(p, label) for p in pts]
    order = rng.permutation(len(rows))
    return [rows[i] for i in order]

def write(path, rows):
    with open(path, "w") as f:
        for p, label in rows:
            f.write(",".join(f"{v:.6f}" for v in p) + f",{label}\n")

rng = np.random.default_rng(20240607)
write("domain_a.csv", blobs(rng, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]], 0.6, 50))
write("domain_b.csv", blobs(rng, [[0, 0, 0, 1], [-1, 0, 1, 0], [0.5, -1, 0, -0.5]], 0.9, 50))
