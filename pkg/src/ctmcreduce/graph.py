"""Support-digraph queries built on strongly connected components."""
from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


def scc_labels(adj):
    """Component index for every node of the digraph with boolean adjacency ``adj``."""
    adj = np.asarray(adj, dtype=bool)
    n = adj.shape[0]
    if n == 0:
        return 0, np.zeros(0, dtype=int)
    return connected_components(csr_matrix(adj), directed=True, connection="strong")


def strongly_connected(adj) -> bool:
    adj = np.asarray(adj, dtype=bool)
    if adj.shape[0] <= 1:
        return True
    ncomp, _ = scc_labels(adj)
    return ncomp == 1


def closed_components(adj):
    """Components of the condensation with no edge leaving them.

    Returns a list of index arrays, one per closed component.
    """
    adj = np.asarray(adj, dtype=bool)
    ncomp, labels = scc_labels(adj)
    leaves = np.zeros(ncomp, dtype=bool)
    src, dst = np.nonzero(adj)
    cross = labels[src] != labels[dst]
    leaves[labels[src[cross]]] = True
    return [np.flatnonzero(labels == c) for c in range(ncomp) if not leaves[c]]


def every_node_reaches(adj, targets) -> bool:
    """True iff each node can reach some node flagged in ``targets``.

    Equivalent to: no closed component of the condensation avoids ``targets``.
    """
    targets = np.asarray(targets, dtype=bool)
    for comp in closed_components(adj):
        if not targets[comp].any():
            return False
    return True
