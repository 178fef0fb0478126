"""Upper bounds on the distance between invariant subspaces of two normal matrices.

All bounds control d_sp(span(u_A), span(v_T)) where u_A collects the base
eigenvectors indexed by A and v_T the perturbed eigenvectors indexed by a
size-q set T. Four families are implemented, from sharpest to cheapest:

* the kappa-parameterized per-index bound (with its complement-interchanged
  twin; the reported value is the smaller of the two),
* its summed relaxation with a single kappa per side,
* the separation-only form using both mixed eigenvalue-group gaps (a
  Davis-Kahan style statement), and
* the "tilde-free" family, which needs only the base spectrum and norms of
  the perturbation, valid when the perturbation is below half the spectral
  gap between the two base eigenvalue groups; it comes with the canonical
  nearest-group identification of the perturbed indices.

Degenerate denominators are reported as +inf entries with condition_ok False
rather than raised; a value above 1 is additionally flagged vacuous since the
distance itself never exceeds 1.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    GapConditionViolated,
    KappaOutOfRange,
    SearchSpaceTooLarge,
    SizeMismatch,
)
from .setdist import sep
from .spectral import NormalEigenSystem, decompose_normal, two_norm

KAPPA_EDGE = 1.0 - 1e-12  # realizes the strictly-below-the-ratio endpoint


@dataclass(frozen=True)
class IndexPartition:
    """A size-q subset of {0..n-1} together with its implicit complement."""

    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices in partition")
        if not idx or idx[0] < 0 or idx[-1] >= self.n:
            raise ValueError(f"indices must lie in [0, {self.n}) and be non-empty")
        if len(idx) >= self.n:
            raise ValueError("partition must leave a non-empty complement")
        object.__setattr__(self, "indices", idx)

    @property
    def q(self) -> int:
        return len(self.indices)

    @property
    def complement(self) -> tuple[int, ...]:
        members = set(self.indices)
        return tuple(i for i in range(self.n) if i not in members)


@dataclass(frozen=True)
class KappaPolicy:
    """How the free kappa parameters of the main bound are chosen.

    ``zero`` fixes every kappa at 0. ``tightest`` applies the optimal rule:
    1 when the residual is strictly below the cross-group gap (then 1 is
    admissible), 0 otherwise; a small relative margin on the gap ratio keeps
    the choice away from noise-dominated denominators. ``fixed`` takes user
    values indexed by eigenvalue position (length n; only the entries of the
    summed side are read), validated against each index's admissible
    interval.
    """

    mode: str = "zero"
    fixed_values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("zero", "tightest", "fixed"):
            raise ValueError(f"unknown kappa mode {self.mode!r}")
        if self.mode == "fixed":
            if self.fixed_values is None:
                raise ValueError("fixed mode needs fixed_values")
            object.__setattr__(
                self, "fixed_values", tuple(float(v) for v in self.fixed_values)
            )


@dataclass(frozen=True)
class BoundEntry:
    name: str
    value: float
    condition_ok: bool
    inputs_digest: str
    vacuous: bool
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BoundReport:
    """One left-hand side together with every bound evaluated against it."""

    lhs_dsp: float
    bounds: tuple[BoundEntry, ...]
    chosen_a_tilde: IndexPartition | None = None


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(np.ascontiguousarray(p).tobytes())
        else:
            h.update(repr(p).encode())
    return h.hexdigest()[:12]


def _entry(name: str, value: float, ok: bool, digest: str, **detail) -> BoundEntry:
    finite = math.isfinite(value)
    return BoundEntry(
        name=name,
        value=value,
        condition_ok=ok and finite,
        inputs_digest=digest,
        vacuous=(not finite) or value > 1.0,
        detail=detail,
    )


def dsp_between(
    base: NormalEigenSystem,
    perturbed: NormalEigenSystem,
    a: IndexPartition,
    a_tilde: IndexPartition,
) -> float:
    """d_sp between span(u_A) and span(v_T), via the complement-overlap form.

    Cheapest evaluation given full eigensystems: uses the base complement
    eigenvectors directly instead of forming projectors.
    """
    if a.q != a_tilde.q:
        raise SizeMismatch(f"|A| = {a.q} but |A~| = {a_tilde.q}")
    if not (base.n == perturbed.n == a.n == a_tilde.n):
        raise DimensionMismatch("eigensystems and index sets disagree on n")
    u_comp = base.eigenvectors.columns[:, list(a.complement)]
    v_sel = perturbed.eigenvectors.columns[:, list(a_tilde.indices)]
    cross = np.linalg.norm(u_comp.conj().T @ v_sel) ** 2 / a.q
    return float(np.sqrt(max(0.0, cross)))


def _min_gaps(lam_from: np.ndarray, lam_to: np.ndarray) -> np.ndarray:
    """For each value in lam_from, the distance to the nearest value in lam_to."""
    return np.abs(lam_to[None, :] - lam_from[:, None]).min(axis=1)


def _kappa_cap(own: float, other: float) -> float:
    if own == 0.0:
        return 1.0
    return min(1.0, (other / own) ** 2 * KAPPA_EDGE)


def _one_sided_full(
    residuals: np.ndarray,
    own_gap: np.ndarray,
    other_gap: np.ndarray,
    q: int,
    policy: KappaPolicy,
    sum_indices: list[int],
) -> tuple[float, list[float]]:
    """Evaluate one side of the kappa-parameterized bound; returns (value, kappas)."""
    kappas: list[float] = []
    total = 0.0
    degenerate = False
    for pos, j in enumerate(sum_indices):
        r2 = residuals[pos] ** 2
        own2 = own_gap[pos] ** 2
        other2 = other_gap[pos] ** 2
        cap = _kappa_cap(own_gap[pos], other_gap[pos])
        if policy.mode == "zero":
            k = 0.0
        elif policy.mode == "tightest":
            # The optimal choice is 1 exactly when the residual is below the
            # cross-group gap (which forces the gap ratio above 1, making 1
            # admissible). Demand the ratio clear 1 by a floating-point
            # margin: near-tied gaps would otherwise evaluate the bound with
            # a noise-dominated denominator, and 0 is always sound there.
            take_one = (
                residuals[pos] < other_gap[pos]
                and own_gap[pos] ** 2 <= other_gap[pos] ** 2 * (1.0 - 1e-6)
            )
            k = 1.0 if take_one else 0.0
        else:
            k = policy.fixed_values[j]
            if not 0.0 <= k <= cap:
                raise KappaOutOfRange(
                    f"kappa[{j}] = {k:g} outside [0, {cap:g}]"
                )
        kappas.append(k)
        denom = other2 - k * own2
        if denom <= 0.0:
            degenerate = True
            continue
        total += max(0.0, r2 - k * own2) / denom
    if degenerate:
        return math.inf, kappas
    return float(np.sqrt(total / q)), kappas


def bound_full_main(
    base: NormalEigenSystem,
    perturbed: NormalEigenSystem,
    mdiff,
    a: IndexPartition,
    a_tilde: IndexPartition,
    policy: KappaPolicy = KappaPolicy(),
) -> BoundEntry:
    """Per-index kappa-parameterized bound; the smaller of its two forms.

    The direct form sums over A against the perturbed split (T, complement);
    the interchanged form sums over the complement of A with the roles of the
    two perturbed groups swapped (the complement-scaling identity folds its
    prefactor into a single 1/q). Per-index kappas actually used are recorded
    in the entry detail.
    """
    if a.q != a_tilde.q:
        raise SizeMismatch(f"|A| = {a.q} but |A~| = {a_tilde.q}")
    if policy.mode == "fixed" and len(policy.fixed_values) != base.n:
        raise KappaOutOfRange(
            f"fixed_values must have length n = {base.n}, "
            f"got {len(policy.fixed_values)}"
        )
    diff = np.asarray(mdiff, dtype=complex)
    lam = base.eigenvalues
    lam_t = perturbed.eigenvalues
    u = base.eigenvectors.columns
    a_idx, b_idx = list(a.indices), list(a.complement)
    at_idx, bt_idx = list(a_tilde.indices), list(a_tilde.complement)

    res_a = np.linalg.norm(diff @ u[:, a_idx], axis=0)
    res_b = np.linalg.norm(diff @ u[:, b_idx], axis=0)
    gap_a_to_at = _min_gaps(lam[a_idx], lam_t[at_idx])
    gap_a_to_bt = _min_gaps(lam[a_idx], lam_t[bt_idx])
    gap_b_to_at = _min_gaps(lam[b_idx], lam_t[at_idx])
    gap_b_to_bt = _min_gaps(lam[b_idx], lam_t[bt_idx])

    direct, kap_d = _one_sided_full(res_a, gap_a_to_at, gap_a_to_bt, a.q, policy, a_idx)
    inter, kap_i = _one_sided_full(res_b, gap_b_to_bt, gap_b_to_at, a.q, policy, b_idx)
    value = min(direct, inter)
    digest = _digest(lam, lam_t, a.indices, a_tilde.indices, diff, policy.mode)
    return _entry(
        f"full_main_kappa_{policy.mode}",
        value,
        ok=True,
        digest=digest,
        direct_value=direct,
        interchanged_value=inter,
        kappa_direct=kap_d,
        kappa_interchanged=kap_i,
    )


def _admissible_scalar_kappa(kappa: float, own_max: float, other_min: float, label: str):
    cap = _kappa_cap(own_max, other_min)
    if not 0.0 <= kappa <= cap:
        raise KappaOutOfRange(f"{label} = {kappa:g} outside [0, {cap:g}]")


def bound_simplified(
    base: NormalEigenSystem,
    perturbed: NormalEigenSystem,
    mdiff,
    a: IndexPartition,
    a_tilde: IndexPartition,
    kappa_a: float = 0.0,
    kappa_b: float = 0.0,
) -> tuple[BoundEntry, BoundEntry]:
    """Summed relaxation with one kappa per side.

    Part 1 relaxes each side's denominators to their worst index and takes
    the smaller side; part 2 combines both sides into a single Frobenius-norm
    quotient.
    """
    if a.q != a_tilde.q:
        raise SizeMismatch(f"|A| = {a.q} but |A~| = {a_tilde.q}")
    diff = np.asarray(mdiff, dtype=complex)
    lam, lam_t = base.eigenvalues, perturbed.eigenvalues
    u = base.eigenvectors.columns
    a_idx, b_idx = list(a.indices), list(a.complement)
    at_idx, bt_idx = list(a_tilde.indices), list(a_tilde.complement)
    q = a.q

    res_a_sq = np.linalg.norm(diff @ u[:, a_idx], axis=0) ** 2
    res_b_sq = np.linalg.norm(diff @ u[:, b_idx], axis=0) ** 2
    own_a = _min_gaps(lam[a_idx], lam_t[at_idx])  # toward the matched group
    other_a = _min_gaps(lam[a_idx], lam_t[bt_idx])
    own_b = _min_gaps(lam[b_idx], lam_t[bt_idx])
    other_b = _min_gaps(lam[b_idx], lam_t[at_idx])

    own_a_max = float(own_a.max())
    own_b_max = float(own_b.max())
    other_a_min = float(other_a.min())
    other_b_min = float(other_b.min())
    _admissible_scalar_kappa(kappa_a, own_a_max, other_a_min, "kappa_a")
    _admissible_scalar_kappa(kappa_b, own_b_max, other_b_min, "kappa_b")

    def side(res_sq, own, k, other_min, own_max):
        num = max(0.0, float(res_sq.sum()) - k * float((own**2).sum()))
        den = other_min**2 - k * own_max**2
        if den <= 0.0:
            return math.inf
        return float(np.sqrt(num / (q * den)))

    part1 = min(
        side(res_a_sq, own_a, kappa_a, other_a_min, own_a_max),
        side(res_b_sq, own_b, kappa_b, other_b_min, own_b_max),
    )

    frob_sq = float(np.linalg.norm(diff) ** 2)
    num2 = max(
        0.0,
        frob_sq - kappa_a * float((own_a**2).sum()) - kappa_b * float((own_b**2).sum()),
    )
    den2 = (
        other_a_min**2
        + other_b_min**2
        - kappa_a * own_a_max**2
        - kappa_b * own_b_max**2
    )
    part2 = math.inf if den2 <= 0.0 else float(np.sqrt(num2 / (q * den2)))

    digest = _digest(lam, lam_t, a.indices, a_tilde.indices, diff, kappa_a, kappa_b)
    return (
        _entry("simplified_part1", part1, ok=True, digest=digest,
               kappa_a=kappa_a, kappa_b=kappa_b),
        _entry("simplified_part2", part2, ok=True, digest=digest,
               kappa_a=kappa_a, kappa_b=kappa_b),
    )


def bound_davis_kahan(
    base: NormalEigenSystem,
    perturbed: NormalEigenSystem,
    mdiff,
    a: IndexPartition,
    a_tilde: IndexPartition,
) -> tuple[BoundEntry, BoundEntry]:
    """Separation-only bounds from the two mixed eigenvalue-group gaps.

    Part 1 divides the perturbation 2-norm by the larger of sep(lam_A,
    lam'_Bt) and sep(lam_B, lam'_At); part 2 divides the Frobenius norm by
    the root-sum-square of both. When both separations vanish the entries
    come back as +inf with condition_ok False.
    """
    if a.q != a_tilde.q:
        raise SizeMismatch(f"|A| = {a.q} but |A~| = {a_tilde.q}")
    diff = np.asarray(mdiff, dtype=complex)
    lam, lam_t = base.eigenvalues, perturbed.eigenvalues
    n, q = a.n, a.q
    sep_a_bt = sep(lam[list(a.indices)], lam_t[list(a_tilde.complement)])
    sep_b_at = sep(lam[list(a.complement)], lam_t[list(a_tilde.indices)])
    op = two_norm(diff)
    frob = float(np.linalg.norm(diff))
    denom1 = max(sep_a_bt, sep_b_at)
    denom2 = math.hypot(sep_a_bt, sep_b_at)
    prefactor = min(1.0, np.sqrt((n - q) / q))
    part1 = float(prefactor * op / denom1) if denom1 > 0.0 else math.inf
    part2 = float(frob / (np.sqrt(q) * denom2)) if denom2 > 0.0 else math.inf
    digest = _digest(lam, lam_t, a.indices, a_tilde.indices, diff)
    detail = {"sep_a_btilde": sep_a_bt, "sep_b_atilde": sep_b_at}
    return (
        _entry("davis_kahan_part1", part1, ok=denom1 > 0.0, digest=digest, **detail),
        _entry("davis_kahan_part2", part2, ok=denom2 > 0.0, digest=digest, **detail),
    )


def hat_partition(
    base: NormalEigenSystem,
    perturbed: NormalEigenSystem,
    mdiff,
    a: IndexPartition,
) -> IndexPartition:
    """Indices of the perturbed eigenvalues nearest to the A group.

    Valid when ||Mtilde - M||_2 < sep(lam_A, lam_B) / 2; then exactly q
    perturbed eigenvalues classify to the A side (an internal assertion, not
    a user-facing error). Ties go to the A side, matching the set-distance
    module's convention.
    """
    lam, lam_t = base.eigenvalues, perturbed.eigenvalues
    gap = sep(lam[list(a.indices)], lam[list(a.complement)])
    op = two_norm(np.asarray(mdiff, dtype=complex))
    if not op < 0.5 * gap:
        raise GapConditionViolated(
            f"||Mtilde - M||_2 = {op:.6g} not below half the spectral gap "
            f"{0.5 * gap:.6g}",
            margin=0.5 * gap - op,
        )
    d_to_a = _min_gaps(lam_t, lam[list(a.indices)])
    d_to_b = _min_gaps(lam_t, lam[list(a.complement)])
    hat = tuple(int(j) for j in np.nonzero(d_to_a <= d_to_b)[0])
    assert len(hat) == a.q, "nearest-group classification lost cardinality"
    return IndexPartition(a.n, hat)


def bound_tilde_free(
    base: NormalEigenSystem, mdiff, a: IndexPartition
) -> BoundReport:
    """Bounds that read only the base spectrum plus norms of the perturbation.

    Requires ||Mtilde - M||_2 < sep(lam_A, lam_B) / 2. Produces the fine
    per-index form (smaller of the A-sum and complement-sum), the coarse
    separation-only form, and the Frobenius form; the left-hand side is
    evaluated against the nearest-group identification of the perturbed
    indices, obtained by decomposing base + mdiff internally.
    """
    diff = np.asarray(mdiff, dtype=complex)
    lam = base.eigenvalues
    a_idx, b_idx = list(a.indices), list(a.complement)
    gap = sep(lam[a_idx], lam[b_idx])
    op = two_norm(diff)
    if not op < 0.5 * gap:
        raise GapConditionViolated(
            f"||Mtilde - M||_2 = {op:.6g} not below half the spectral gap "
            f"{0.5 * gap:.6g}",
            margin=0.5 * gap - op,
        )
    u = base.eigenvectors.columns
    q, n = a.q, a.n
    res_a = np.linalg.norm(diff @ u[:, a_idx], axis=0)
    res_b = np.linalg.norm(diff @ u[:, b_idx], axis=0)
    gap_a = _min_gaps(lam[a_idx], lam[b_idx]) - op  # > 0 under the gap condition
    gap_b = _min_gaps(lam[b_idx], lam[a_idx]) - op
    fine = min(
        float(np.sqrt(((res_a / gap_a) ** 2).sum() / q)),
        float(np.sqrt(((res_b / gap_b) ** 2).sum() / q)),
    )
    coarse = float(min(1.0, np.sqrt((n - q) / q)) * op / (gap - op))
    frob = float(np.linalg.norm(diff))
    part2 = float(frob / (np.sqrt(2 * q) * (gap - op)))

    perturbed = decompose_normal(base.reconstruct() + diff)
    a_hat = hat_partition(base, perturbed, diff, a)
    lhs = dsp_between(base, perturbed, a, a_hat)
    digest = _digest(lam, a.indices, diff)
    entries = (
        _entry("tilde_free_part1_fine", fine, ok=True, digest=digest),
        _entry("tilde_free_part1_coarse", float(coarse), ok=True, digest=digest),
        _entry("tilde_free_part2", part2, ok=True, digest=digest),
    )
    return BoundReport(lhs_dsp=lhs, bounds=entries, chosen_a_tilde=a_hat)


def search_closest_invariant(
    perturbed: NormalEigenSystem,
    target,
    q: int,
    mode: str = "exact",
    limit: int = 200_000,
    base: NormalEigenSystem | None = None,
    base_a: IndexPartition | None = None,
) -> tuple[IndexPartition, float]:
    """Find the q-dimensional invariant subspace of ``perturbed`` nearest to a target.

    ``exact`` enumerates all size-q index sets (requires the count to stay
    within ``limit``), breaking distance ties toward the lexicographically
    smallest set. ``heuristic`` avoids enumeration: with base context (the
    unperturbed system and its A set) it assigns the q perturbed eigenvalues
    most attracted to the A group, which reproduces the nearest-group
    identification whenever the half-gap condition holds; without context it
    greedily keeps the q eigenvectors with the largest overlap onto the
    target subspace.
    """
    cols = target.columns if hasattr(target, "columns") else np.asarray(target, complex)
    if cols.shape[0] != perturbed.n or cols.shape[1] != q:
        raise DimensionMismatch(
            f"target must be {perturbed.n}x{q}, got {cols.shape}"
        )
    scores = np.linalg.norm(cols.conj().T @ perturbed.eigenvectors.columns, axis=0) ** 2

    def dist(subset) -> float:
        return float(np.sqrt(max(0.0, 1.0 - scores[list(subset)].sum() / q)))

    n = perturbed.n
    if mode == "exact":
        count = math.comb(n, q)
        if count > limit:
            raise SearchSpaceTooLarge(
                f"C({n},{q}) = {count} exceeds the limit {limit}"
            )
        best_subset, best_d = None, math.inf
        for subset in itertools.combinations(range(n), q):
            d = dist(subset)
            if d < best_d:  # ties keep the earlier, lexicographically smaller set
                best_subset, best_d = subset, d
        return IndexPartition(n, best_subset), best_d
    if mode != "heuristic":
        raise ValueError(f"unknown search mode {mode!r}")
    if base is not None and base_a is not None:
        lam_t = perturbed.eigenvalues
        d_to_a = _min_gaps(lam_t, base.eigenvalues[list(base_a.indices)])
        d_to_b = _min_gaps(lam_t, base.eigenvalues[list(base_a.complement)])
        ranking = sorted(range(n), key=lambda j: (d_to_a[j] - d_to_b[j], j))
    else:
        ranking = sorted(range(n), key=lambda j: (-scores[j], j))
    chosen = tuple(sorted(ranking[:q]))
    return IndexPartition(n, chosen), dist(chosen)


def evaluate_bounds(
    base: NormalEigenSystem,
    perturbed: NormalEigenSystem,
    mdiff,
    a: IndexPartition,
    a_tilde: IndexPartition,
    families: tuple[str, ...] = ("full", "simplified", "dk"),
    policy: KappaPolicy = KappaPolicy(),
    kappa_a: float = 0.0,
    kappa_b: float = 0.0,
) -> BoundReport:
    """Bundle the tilde-aware bound families against one left-hand side."""
    entries: list[BoundEntry] = []
    if "full" in families:
        entries.append(bound_full_main(base, perturbed, mdiff, a, a_tilde, policy))
    if "simplified" in families:
        entries.extend(
            bound_simplified(base, perturbed, mdiff, a, a_tilde, kappa_a, kappa_b)
        )
    if "dk" in families:
        entries.extend(bound_davis_kahan(base, perturbed, mdiff, a, a_tilde))
    lhs = dsp_between(base, perturbed, a, a_tilde)
    return BoundReport(lhs_dsp=lhs, bounds=tuple(entries), chosen_a_tilde=a_tilde)
