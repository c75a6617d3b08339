"""Crossover between a dense distance matrix and cKDTree for the k-NN
queries used by the graph builders (build + all-points query, k = 17)."""
import timeit

import numpy as np
from scipy.spatial import cKDTree


def brute(p, k):
    dm = np.linalg.norm(p[:, None] - p[None], axis=2)
    return np.argsort(dm, axis=1)[:, :k]


def tree(p, k):
    return cKDTree(p).query(p, k=k)[1]


if __name__ == "__main__":
    rng = np.random.default_rng(0)
    for d in (2, 3):
        for n in (16, 24, 32, 48, 64, 96, 128, 256):
            p = rng.random((n, d))
            k = min(17, n)
            tb = min(timeit.repeat(lambda: brute(p, k), number=50, repeat=5)) / 50
            tt = min(timeit.repeat(lambda: tree(p, k), number=50, repeat=5)) / 50
            print(f"d={d} n={n:4d} brute={tb * 1e6:8.1f}us kdtree={tt * 1e6:8.1f}us")

    # MST candidate sets: complete graph vs Delaunay edges
    from stabgeom.graphs.mst import build_mst_kruskal
    from stabgeom.point_process import PointConfiguration

    for d in (2, 3):
        for n in (16, 32, 64, 128, 256):
            c = PointConfiguration(rng.random((n, d)))
            tc = min(timeit.repeat(lambda: build_mst_kruskal(c, complete_below=10**9), number=10, repeat=3)) / 10
            td = min(timeit.repeat(lambda: build_mst_kruskal(c, complete_below=0), number=10, repeat=3)) / 10
            print(f"mst d={d} n={n:4d} complete={tc * 1e6:9.1f}us delaunay={td * 1e6:9.1f}us")
