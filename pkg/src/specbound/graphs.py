"""Weighted graphs, Laplacian null spaces, and cluster-coupling bounds.

A graph with q mutually disconnected clusters has a q-dimensional Laplacian
null space spanned by the normalized cluster indicators. When inter-cluster
edges are added, the movement of that null space is controlled by three
per-cluster quantities computed from the crossing edge weights alone: the
external degree of a vertex (total weight leaving its cluster), the coupling
of a cluster (size-normalized sum of squared directed external degrees, which
equals the squared Laplacian-difference residual on the cluster indicator
exactly), and the maximum external degree (which bounds the 2-norm of the
Laplacian difference by a factor of two).

Vertices are 0-based contiguous integers; cluster labels are 0-based as well.
Laplacian eigenvalues are sorted ascending throughout this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCluster,
    MedConditionViolated,
    NotAnEdgeSuperset,
    SearchSpaceTooLarge,
    ZeroGap,
)
from .bounds import BoundReport, IndexPartition, _digest, _entry
from .subspace import OrthonormalFrame, dsp_projector


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph with strictly positive edge weights.

    Edges are normalized to (u, v, w) with u < v, sorted, and validated:
    no self-loops, no duplicates, all endpoints in range.
    """

    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        normalized = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), float(w)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            if w <= 0:
                raise ValueError(f"edge ({u},{v}) has non-positive weight {w}")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise ValueError(f"duplicate edge ({u},{v})")
            seen.add((u, v))
            normalized.append((u, v, w))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n_vertices, self.n_vertices))
        for u, v, w in self.edges:
            adj[u, v] = w
            adj[v, u] = w
        return adj

    def edge_weight_map(self) -> dict[tuple[int, int], float]:
        return {(u, v): w for u, v, w in self.edges}


@dataclass(frozen=True)
class QCut:
    """Assignment of every vertex to one of q non-empty clusters."""

    labels: tuple[int, ...]
    q: int

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        if self.q < 1:
            raise ValueError("need at least one cluster")
        present = set(labels)
        if not present <= set(range(self.q)):
            raise ValueError(f"labels must lie in [0, {self.q})")
        if len(present) != self.q:
            raise ValueError("every cluster must be non-empty")
        object.__setattr__(self, "labels", labels)

    def members(self, cluster: int) -> np.ndarray:
        return np.nonzero(np.asarray(self.labels) == cluster)[0]

    def sizes(self) -> np.ndarray:
        return np.bincount(np.asarray(self.labels), minlength=self.q)


def laplacian(graph: WeightedGraph) -> np.ndarray:
    """L = D - A: symmetric, zero row sums, weighted degrees on the diagonal."""
    adj = graph.adjacency()
    return np.diag(adj.sum(axis=1)) - adj


def laplacian_spectrum(graph: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and matching eigenvectors of the Laplacian."""
    vals, vecs = np.linalg.eigh(laplacian(graph))
    return vals, vecs


def null_multiplicity(eigenvalues: np.ndarray, tol: float = 1e-10) -> int:
    """Count of (near-)zero Laplacian eigenvalues, clamped at ``tol``."""
    return int(np.sum(np.abs(eigenvalues) <= tol))


def components(graph: WeightedGraph) -> QCut:
    """Connected components as a cut, labeled by smallest contained vertex."""
    parent = list(range(graph.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in graph.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    roots = [find(i) for i in range(graph.n_vertices)]
    order = sorted(set(roots))
    relabel = {root: k for k, root in enumerate(order)}
    return QCut(labels=tuple(relabel[r] for r in roots), q=len(order))


def null_basis(cut: QCut) -> OrthonormalFrame:
    """Normalized cluster-indicator columns (exactly orthonormal)."""
    n = len(cut.labels)
    cols = np.zeros((n, cut.q))
    for j in range(cut.q):
        members = cut.members(j)
        cols[members, j] = 1.0 / np.sqrt(len(members))
    return OrthonormalFrame(cols)


def _check_cluster(cut: QCut, cluster: int):
    if not 0 <= cluster < cut.q or len(cut.members(cluster)) == 0:
        raise EmptyCluster(f"cluster {cluster} is empty or out of range")


def external_degree(vertex: int, cluster: int, cut: QCut, graph: WeightedGraph) -> float:
    """Total weight crossing the cluster boundary at ``vertex``.

    For a vertex inside the cluster this is the weight of its edges leaving
    the cluster; for a vertex outside, the weight of its edges entering it
    (its external degree relative to the complement subgraph).
    """
    _check_cluster(cut, cluster)
    if len(cut.labels) != graph.n_vertices:
        raise DimensionMismatch("cut and graph disagree on vertex count")
    adj = graph.adjacency()
    labels = np.asarray(cut.labels)
    inside = labels == cluster
    if inside[vertex]:
        return float(adj[vertex, ~inside].sum())
    return float(adj[vertex, inside].sum())


def _cross_block(cluster: int, cut: QCut, graph: WeightedGraph) -> np.ndarray:
    labels = np.asarray(cut.labels)
    inside = labels == cluster
    adj = graph.adjacency()
    return adj[np.ix_(inside, ~inside)]


def coupling(cluster: int, cut: QCut, graph: WeightedGraph) -> float:
    """Size-normalized sum of squared directed external degrees of the cluster."""
    _check_cluster(cut, cluster)
    block = _cross_block(cluster, cut, graph)
    size = block.shape[0]
    out_sums = block.sum(axis=1)
    in_sums = block.sum(axis=0)
    return float(((out_sums**2).sum() + (in_sums**2).sum()) / size)


def max_external_degree(cluster: int, cut: QCut, graph: WeightedGraph) -> float:
    """Largest external degree over the cluster's own vertices."""
    _check_cluster(cut, cluster)
    block = _cross_block(cluster, cut, graph)
    return float(block.sum(axis=1).max())


def coupling_sandwich(cluster: int, cut: QCut, graph: WeightedGraph) -> dict:
    """The coupling value with its elementary lower and upper envelope.

    lower = (2/|V|) sum of squared crossing weights, upper = (2/|V|) times
    the squared sum of crossing weights.
    """
    _check_cluster(cut, cluster)
    block = _cross_block(cluster, cut, graph)
    size = block.shape[0]
    total = float(block.sum())
    return {
        "lower": float(2.0 * (block**2).sum() / size),
        "value": coupling(cluster, cut, graph),
        "upper": float(2.0 * total**2 / size),
    }


def _validate_extension(base: WeightedGraph, perturbed: WeightedGraph, cut: QCut):
    """The perturbed graph must equal the base plus inter-cluster edges only."""
    if base.n_vertices != perturbed.n_vertices or len(cut.labels) != base.n_vertices:
        raise DimensionMismatch("graphs and cut disagree on vertex count")
    labels = cut.labels
    base_map = base.edge_weight_map()
    pert_map = perturbed.edge_weight_map()
    for (u, v), w in base_map.items():
        if labels[u] != labels[v]:
            raise NotAnEdgeSuperset(
                f"base graph has inter-cluster edge ({u},{v})"
            )
        if (u, v) not in pert_map:
            raise NotAnEdgeSuperset(f"perturbed graph lacks base edge ({u},{v})")
        if pert_map[(u, v)] != w:
            raise NotAnEdgeSuperset(
                f"edge ({u},{v}) changed weight {w} -> {pert_map[(u, v)]}"
            )
    for (u, v), _ in pert_map.items():
        if labels[u] == labels[v] and (u, v) not in base_map:
            raise NotAnEdgeSuperset(
                f"perturbed graph adds intra-cluster edge ({u},{v})"
            )


def residual_identity_check(
    base: WeightedGraph, perturbed: WeightedGraph, cut: QCut
) -> list[dict]:
    """Per cluster: ||(Ltilde - L) u_j||_2^2 against the coupling (exact identity)."""
    _validate_extension(base, perturbed, cut)
    ldiff = laplacian(perturbed) - laplacian(base)
    frame = null_basis(cut)
    out = []
    for j in range(cut.q):
        lhs = float(np.linalg.norm(ldiff @ frame.columns[:, j]) ** 2)
        rhs = coupling(j, cut, perturbed)
        out.append(
            {"cluster": j, "lhs": lhs, "rhs": rhs,
             "ok": abs(lhs - rhs) <= 1e-9 * max(1.0, rhs)}
        )
    return out


def laplacian_diff_bound_check(
    base: WeightedGraph, perturbed: WeightedGraph, cut: QCut
) -> dict:
    """||Ltilde - L||_2 against twice the largest maximum external degree."""
    _validate_extension(base, perturbed, cut)
    ldiff = laplacian(perturbed) - laplacian(base)
    op_norm = float(np.max(np.abs(np.linalg.eigvalsh(ldiff))))
    bound = 2.0 * max(max_external_degree(j, cut, perturbed) for j in range(cut.q))
    return {"op_norm": op_norm, "bound": bound, "ok": op_norm <= bound + 1e-10}


def _nullspace_lhs(perturbed: WeightedGraph, cut: QCut) -> tuple[float, np.ndarray]:
    vals, vecs = laplacian_spectrum(perturbed)
    low = OrthonormalFrame(vecs[:, : cut.q])
    return dsp_projector(null_basis(cut), low), vals


def nullspace_bound_known_perturbed(
    base: WeightedGraph, perturbed: WeightedGraph, cut: QCut
) -> BoundReport:
    """Null-space movement bound using the perturbed Laplacian's spectral gap.

    Bounds d_sp(cluster indicators, span of the q lowest perturbed
    eigenvectors) by sqrt(mean coupling) / lambda'_{q+1}. Raises ZeroGap when
    that eigenvalue vanishes (within 1e-10).
    """
    _validate_extension(base, perturbed, cut)
    q = cut.q
    lhs, vals = _nullspace_lhs(perturbed, cut)
    gap = float(vals[q])
    if gap <= 1e-10:
        raise ZeroGap(f"perturbed Laplacian eigenvalue {q + 1} is {gap:.3e}")
    couplings = [coupling(j, cut, perturbed) for j in range(q)]
    value = float(np.sqrt(np.mean(couplings)) / gap)
    digest = _digest(np.asarray(perturbed.edges, dtype=float), cut.labels)
    entry = _entry(
        "nullspace_known_perturbed",
        value,
        ok=True,
        digest=digest,
        perturbed_gap=gap,
        mean_coupling=float(np.mean(couplings)),
    )
    a_tilde = IndexPartition(len(cut.labels), tuple(range(q)))
    return BoundReport(lhs_dsp=lhs, bounds=(entry,), chosen_a_tilde=a_tilde)


def nullspace_bound_known_base(
    base: WeightedGraph, perturbed: WeightedGraph, cut: QCut
) -> BoundReport:
    """Null-space movement bounds using only the base Laplacian's spectral gap.

    Requires max MED < lambda_{q+1} / 4 (raises MedConditionViolated with the
    margin otherwise); then the q lowest perturbed eigenvectors are the
    nearest-group identification, and both the coupling form and the coarser
    pure-MED form bound the movement.
    """
    _validate_extension(base, perturbed, cut)
    q = cut.q
    base_vals, _ = laplacian_spectrum(base)
    gap = float(base_vals[q])
    max_med = max(max_external_degree(j, cut, perturbed) for j in range(q))
    if not max_med < gap / 4.0:
        raise MedConditionViolated(
            f"max MED {max_med:.6g} not below lambda_(q+1)/4 = {gap / 4.0:.6g}",
            margin=gap / 4.0 - max_med,
        )
    lhs, _ = _nullspace_lhs(perturbed, cut)
    couplings = [coupling(j, cut, perturbed) for j in range(q)]
    denom = gap - 2.0 * max_med
    fine = float(np.sqrt(np.mean(couplings)) / denom)
    coarse = float(2.0 * max_med / denom)
    digest = _digest(np.asarray(perturbed.edges, dtype=float), cut.labels)
    detail = {"base_gap": gap, "max_med": max_med,
              "mean_coupling": float(np.mean(couplings))}
    entries = (
        _entry("nullspace_known_base_fine", fine, ok=True, digest=digest, **detail),
        _entry("nullspace_known_base_coarse", coarse, ok=True, digest=digest, **detail),
    )
    a_tilde = IndexPartition(len(cut.labels), tuple(range(q)))
    return BoundReport(lhs_dsp=lhs, bounds=entries, chosen_a_tilde=a_tilde)


def total_coupling(cut: QCut, graph: WeightedGraph) -> float:
    return float(sum(coupling(j, cut, graph) for j in range(cut.q)))


def _stirling2(n: int, q: int) -> int:
    table = [[0] * (q + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for i in range(1, n + 1):
        for k in range(1, min(i, q) + 1):
            table[i][k] = k * table[i - 1][k] + table[i - 1][k - 1]
    return table[n][q]


def _iter_q_partitions(n: int, q: int):
    """Restricted-growth label vectors with exactly q blocks, lexicographic."""
    labels = [0] * n

    def rec(i: int, used: int):
        if n - i < q - used:
            return
        if i == n:
            if used == q:
                yield tuple(labels)
            return
        top = min(used + 1, q)
        for v in range(top):
            labels[i] = v
            yield from rec(i + 1, used + (1 if v == used else 0))

    yield from rec(0, 0)


def _canonical_labels(labels) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    out = []
    for x in labels:
        if x not in relabel:
            relabel[x] = len(relabel)
        out.append(relabel[x])
    return tuple(out)


def _kmeans(points: np.ndarray, q: int, rng: np.random.Generator,
            iters: int = 60) -> np.ndarray:
    """Small deterministic Lloyd's loop with k-means++ style seeding."""
    n = points.shape[0]
    centers = np.empty((q, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    for k in range(1, q):
        d2 = np.min(
            ((points[:, None, :] - centers[None, :k, :]) ** 2).sum(axis=2), axis=1
        )
        total = d2.sum()
        if total <= 0:
            centers[k] = points[int(rng.integers(n))]
            continue
        centers[k] = points[int(rng.choice(n, p=d2 / total))]
    labels = np.zeros(n, dtype=int)
    for _ in range(iters):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        for k in range(q):  # keep every cluster populated
            if not np.any(new_labels == k):
                counts = np.bincount(new_labels, minlength=q)
                eligible = np.nonzero(counts[new_labels] > 1)[0]
                far = int(eligible[np.argmax(d2[eligible, new_labels[eligible]])])
                new_labels[far] = k
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for k in range(q):
            centers[k] = points[labels == k].mean(axis=0)
    return labels


def best_q_cut(
    graph: WeightedGraph,
    q: int,
    mode: str = "exact",
    limit: int = 100_000,
    seed: int = 0,
) -> tuple[QCut, float]:
    """Cut the graph into q clusters minimizing the total coupling.

    ``exact`` enumerates every q-block set partition (count bounded by
    ``limit``; ties broken by the canonical label vector, so the result is
    deterministic). ``heuristic`` embeds vertices with the q lowest Laplacian
    eigenvectors and runs a seeded k-means; its output is reproducible for a
    fixed seed but carries no optimality guarantee.
    """
    n = graph.n_vertices
    if not 1 <= q <= n:
        raise ValueError(f"need 1 <= q <= {n}")
    if mode == "exact":
        count = _stirling2(n, q)
        if count > limit:
            raise SearchSpaceTooLarge(
                f"S({n},{q}) = {count} q-partitions exceeds the limit {limit}"
            )
        best_cut, best_value = None, math.inf
        for labels in _iter_q_partitions(n, q):
            cut = QCut(labels=labels, q=q)
            value = total_coupling(cut, graph)
            if value < best_value:  # first hit in lex order wins ties
                best_cut, best_value = cut, value
        return best_cut, best_value
    if mode != "heuristic":
        raise ValueError(f"unknown mode {mode!r}")
    _, vecs = laplacian_spectrum(graph)
    rng = np.random.Generator(np.random.PCG64(seed))
    labels = _kmeans(vecs[:, :q], q, rng)
    cut = QCut(labels=_canonical_labels(labels), q=q)
    return cut, total_coupling(cut, graph)


def align_basis(base_frame: OrthonormalFrame, target_frame: OrthonormalFrame) -> OrthonormalFrame:
    """Rotate a basis of one subspace to best match another frame (Procrustes).

    Computes R = base^+ target (the pseudoinverse of a column-orthonormal
    frame is its conjugate transpose), replaces it by the nearest unitary
    via SVD, and returns base @ R'. The output spans exactly the same
    subspace as ``base_frame``.
    """
    if base_frame.n != target_frame.n or base_frame.q != target_frame.q:
        raise DimensionMismatch(
            f"frames must share (n, q); got ({base_frame.n}, {base_frame.q}) "
            f"and ({target_frame.n}, {target_frame.q})"
        )
    r = base_frame.columns.conj().T @ target_frame.columns
    v, _, wh = np.linalg.svd(r)
    return OrthonormalFrame(base_frame.columns @ (v @ wh))
