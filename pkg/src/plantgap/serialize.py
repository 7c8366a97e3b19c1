"""Textual graph formats: edge list and dense 0/1 CSV.

Edge list layout: a header line "n m", then m lines "u v" (0-indexed,
u < v), then an optional final line holding the planted support as
space-separated indices. The CSV format is the bare adjacency matrix.
"""

from __future__ import annotations

import numpy as np

from .models import Graph


def write_edge_list(graph: Graph, path) -> None:
    iu, iv = np.nonzero(np.triu(graph.adj, 1))
    lines = [f"{graph.n} {iu.size}"]
    lines.extend(f"{u} {v}" for u, v in zip(iu.tolist(), iv.tolist()))
    if graph.planted is not None:
        lines.append(" ".join(str(int(x)) for x in graph.planted))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    with open(path) as fh:
        tokens = fh.read().split("\n")
    header = tokens[0].split()
    n, m = int(header[0]), int(header[1])
    adj = np.zeros((n, n), dtype=bool)
    for line in tokens[1 : 1 + m]:
        u, v = map(int, line.split())
        adj[u, v] = adj[v, u] = True
    planted = None
    rest = [line for line in tokens[1 + m :] if line.strip()]
    if rest:
        planted = np.sort(np.array([int(x) for x in rest[0].split()], dtype=np.int64))
    return Graph(n, adj, planted)


def write_dense_csv(graph: Graph, path) -> None:
    np.savetxt(path, graph.adj.astype(np.int8), fmt="%d", delimiter=",")


def read_dense_csv(path) -> Graph:
    adj = np.loadtxt(path, delimiter=",", dtype=np.int64).astype(bool)
    if adj.ndim == 0:
        adj = adj.reshape(1, 1)
    elif adj.ndim == 1:
        adj = adj.reshape(1, -1) if adj.size > 1 else adj.reshape(1, 1)
    return Graph(adj.shape[0], adj)
