"""Graph data model, normalized propagation, multi-hop aggregation, and structural edits.

All values are immutable after construction: structural edits (edge/node removal,
feature zeroing) return new :class:`GraphDataset` instances, and the propagation
operator is re-derived from scratch after every edit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

SGC = "sgc"
GPR = "gpr"


@dataclass(frozen=True)
class GraphDataset:
    """An attributed graph with a binary sensitive attribute and binary labels.

    The adjacency matrix is symmetric CSR with zero diagonal (self-loops are
    added only when building the propagation operator) and strictly positive
    stored values. Masks select disjoint train/validation/test node sets.
    """

    adjacency: sp.csr_matrix
    features: np.ndarray
    sensitive: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray

    def __post_init__(self):
        n = self.adjacency.shape[0]
        if self.adjacency.shape != (n, n):
            raise ValueError("adjacency must be square")
        if self.features.shape[0] != n:
            raise ValueError(f"features have {self.features.shape[0]} rows, expected {n}")
        for name in ("sensitive", "labels", "train_mask", "val_mask", "test_mask"):
            v = getattr(self, name)
            if v.shape != (n,):
                raise ValueError(f"{name} must have length {n}")
        if self.adjacency.diagonal().any():
            raise ValueError("adjacency must have zero diagonal (no stored self-loops)")
        if self.adjacency.nnz and self.adjacency.data.min() <= 0:
            raise ValueError("adjacency entries must be positive")
        if (self.adjacency != self.adjacency.T).nnz != 0:
            raise ValueError("adjacency must be symmetric")
        for name in ("sensitive", "labels"):
            v = np.asarray(getattr(self, name))
            if not np.isin(v, (0, 1)).all():
                raise ValueError(f"{name} must be binary 0/1")
        overlap = (
            (self.train_mask & self.val_mask)
            | (self.train_mask & self.test_mask)
            | (self.val_mask & self.test_mask)
        )
        if overlap.any():
            raise ValueError("train/val/test masks must be pairwise disjoint")

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_edges(self) -> int:
        """Number of undirected edges (each counted once)."""
        return self.adjacency.nnz // 2

    def edge_pairs(self) -> np.ndarray:
        """All undirected edges as an (n_edges, 2) array of pairs with i < j."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        pairs = np.column_stack([coo.row, coo.col])
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]


@dataclass(frozen=True)
class PropagationOperator:
    """Row-stochastic propagation matrix with self-loops, plus the hop count."""

    matrix: sp.csr_matrix
    hops: int

    def __post_init__(self):
        if self.hops < 0:
            raise ValueError("hops must be >= 0")


@dataclass(frozen=True)
class AggregatedFeatures:
    """Multi-hop aggregated node representations.

    ``values`` has shape N x F for single-branch aggregation and N x F(L+1)
    for the concatenated multi-hop variant. ``source_dims`` records (N, F, L).
    """

    values: np.ndarray
    scheme: str
    source_dims: tuple[int, int, int]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class DegreeStats:
    """Per-node degree decomposition by sensitive group, plus global counts.

    Degrees are edge counts on the raw adjacency (no self-loops);
    ``inter_degree[i] + intra_degree[i] == degree[i]`` for every node.
    """

    degree: np.ndarray
    inter_degree: np.ndarray
    intra_degree: np.ndarray
    group_sizes: tuple[int, int]
    boundary_sizes: tuple[int, int]
    inter_edges: int
    intra_edges: int

    @property
    def total_edges(self) -> int:
        return self.inter_edges + self.intra_edges


def build_propagation(dataset: GraphDataset, hops: int) -> PropagationOperator:
    """Left-normalize the adjacency with self-loops: every row of the result sums to 1."""
    n = dataset.n_nodes
    a_bar = (dataset.adjacency + sp.identity(n, format="csr")).tocsr()
    inv_deg = 1.0 / np.asarray(a_bar.sum(axis=1)).ravel()
    p = sp.diags(inv_deg).dot(a_bar).tocsr()
    return PropagationOperator(matrix=p, hops=hops)


def aggregate(dataset: GraphDataset, prop: PropagationOperator, scheme: str = SGC) -> AggregatedFeatures:
    """Propagate features over ``prop.hops`` hops.

    ``sgc`` returns the L-fold propagated features; ``gpr`` returns the
    1/(L+1)-scaled horizontal concatenation of all hop powers from 0 to L.
    """
    x = dataset.features
    p = prop.matrix
    if p.shape[1] != x.shape[0]:
        raise ValueError(f"propagation is {p.shape[0]}x{p.shape[1]} but features have {x.shape[0]} rows")
    n, f = x.shape
    hops = prop.hops
    if scheme == SGC:
        z = x
        for _ in range(hops):
            z = p.dot(z)
        values = np.asarray(z)
    elif scheme == GPR:
        blocks = [x]
        z = x
        for _ in range(hops):
            z = p.dot(z)
            blocks.append(np.asarray(z))
        values = np.hstack(blocks) / (hops + 1)
    else:
        raise ValueError(f"unknown aggregation scheme: {scheme!r}")
    return AggregatedFeatures(values=values, scheme=scheme, source_dims=(n, f, hops))


def _canonical_pairs(edges) -> np.ndarray:
    pairs = np.atleast_2d(np.asarray(sorted((min(i, j), max(i, j)) for i, j in edges), dtype=np.int64))
    if pairs.size and (pairs[:, 0] == pairs[:, 1]).any():
        raise ValueError("self-loops are not valid edges")
    return pairs


def remove_edges(dataset: GraphDataset, edges) -> GraphDataset:
    """Delete both directed entries of each undirected pair; everything else is unchanged.

    The request is atomic: if any listed edge is absent, nothing is removed.
    """
    edges = list(edges)
    if not edges:
        return dataset
    pairs = _canonical_pairs(edges)
    adj = dataset.adjacency
    present = np.asarray(adj[pairs[:, 0], pairs[:, 1]]).ravel()
    if (present == 0).any():
        missing = pairs[present == 0][0]
        raise ValueError(f"edge {tuple(missing)} not present; rejecting the whole request")
    n = dataset.n_nodes
    coo = adj.tocoo()
    lo = np.minimum(coo.row, coo.col).astype(np.int64)
    hi = np.maximum(coo.row, coo.col).astype(np.int64)
    doomed = np.isin(lo * n + hi, pairs[:, 0] * n + pairs[:, 1])
    keep = ~doomed
    new_adj = sp.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=(n, n))
    return GraphDataset(
        adjacency=new_adj,
        features=dataset.features,
        sensitive=dataset.sensitive,
        labels=dataset.labels,
        train_mask=dataset.train_mask,
        val_mask=dataset.val_mask,
        test_mask=dataset.test_mask,
    )


def remove_nodes(dataset: GraphDataset, nodes) -> GraphDataset:
    """Detach nodes in place: drop incident edges, zero the feature rows, clear masks.

    Indices are kept stable (no compaction) so weight dimensionality and row
    alignment survive a sequence of removals.
    """
    nodes = np.asarray(sorted(set(int(v) for v in nodes)), dtype=np.int64)
    if nodes.size == 0:
        return dataset
    n = dataset.n_nodes
    if nodes.min() < 0 or nodes.max() >= n:
        raise ValueError(f"node index out of range [0, {n})")
    keep = np.ones(n, dtype=bool)
    keep[nodes] = False
    coo = dataset.adjacency.tocoo()
    alive = keep[coo.row] & keep[coo.col]
    new_adj = sp.csr_matrix((coo.data[alive], (coo.row[alive], coo.col[alive])), shape=(n, n))
    new_x = dataset.features.copy()
    new_x[nodes, :] = 0.0
    masks = []
    for mask in (dataset.train_mask, dataset.val_mask, dataset.test_mask):
        m = mask.copy()
        m[nodes] = False
        masks.append(m)
    return GraphDataset(
        adjacency=new_adj,
        features=new_x,
        sensitive=dataset.sensitive,
        labels=dataset.labels,
        train_mask=masks[0],
        val_mask=masks[1],
        test_mask=masks[2],
    )


def zero_feature_columns(dataset: GraphDataset, columns) -> GraphDataset:
    """Zero the listed feature columns for all nodes (graph structure unchanged)."""
    cols = np.asarray(sorted(set(int(c) for c in columns)), dtype=np.int64)
    if cols.size == 0:
        return dataset
    f = dataset.n_features
    if cols.min() < 0 or cols.max() >= f:
        raise ValueError(f"feature index out of range [0, {f})")
    new_x = dataset.features.copy()
    new_x[:, cols] = 0.0
    return GraphDataset(
        adjacency=dataset.adjacency,
        features=new_x,
        sensitive=dataset.sensitive,
        labels=dataset.labels,
        train_mask=dataset.train_mask,
        val_mask=dataset.val_mask,
        test_mask=dataset.test_mask,
    )


def degree_stats(dataset: GraphDataset) -> DegreeStats:
    """Count total/inter/intra degrees per node and group/boundary/edge totals.

    An inter-edge joins nodes with different sensitive values, an intra-edge
    joins nodes within the same group. Each undirected edge counts once in the
    edge totals.
    """
    s = np.asarray(dataset.sensitive, dtype=np.int64)
    adj = dataset.adjacency
    coo = adj.tocoo()
    degree = np.bincount(coo.row, minlength=dataset.n_nodes)
    inter_degree = np.bincount(
        coo.row, weights=(s[coo.row] != s[coo.col]), minlength=dataset.n_nodes
    ).astype(np.int64)
    intra_degree = degree - inter_degree
    n_inter = int(inter_degree.sum()) // 2
    n_intra = int(intra_degree.sum()) // 2
    g0 = int((s == 0).sum())
    g1 = int((s == 1).sum())
    b0 = int(((s == 0) & (inter_degree > 0)).sum())
    b1 = int(((s == 1) & (inter_degree > 0)).sum())
    return DegreeStats(
        degree=degree.astype(np.int64),
        inter_degree=inter_degree,
        intra_degree=intra_degree.astype(np.int64),
        group_sizes=(g0, g1),
        boundary_sizes=(b0, b1),
        inter_edges=n_inter,
        intra_edges=n_intra,
    )
