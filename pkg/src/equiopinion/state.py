"""Opinion states on the product of simplices, deviations from the neutral point,
consensus/dissensus projections and threshold-based opinion classification.

Arrays are laid out agents x options: ``z[i, j]`` is agent ``i``'s deviation for
option ``j``. Option indices are 0-based throughout the Python API; the
human-facing CSV labels add one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import connected_components

from .constants import SIMPLEX_TOL
from .errors import DimensionMismatch, InvalidState, OutOfSimplex

# floor used when comparing norms/sizes that are exactly equal in exact arithmetic
_ATOL = 1e-9


def _as_matrix(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d agents x options array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 2:
        raise DimensionMismatch(f"need at least 1 agent and 2 options, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidState("non-finite entries")
    return arr


@dataclass(frozen=True)
class OpinionState:
    """Point of the state space: nonnegative rows summing to one."""

    values: np.ndarray
    tol: float = field(default=SIMPLEX_TOL, repr=False, compare=False)

    def __post_init__(self):
        arr = _as_matrix(self.values)
        if np.any(arr < -self.tol):
            raise OutOfSimplex(f"negative opinion weight {arr.min():.3g}")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > self.tol * max(1, arr.shape[1])):
            raise InvalidState(f"row sums deviate from 1 by {np.abs(sums - 1).max():.3g}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def num_agents(self) -> int:
        return self.values.shape[0]

    @property
    def num_options(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class DeviationState:
    """Tangent vector at the neutral point: rows summing to zero."""

    values: np.ndarray
    tol: float = field(default=SIMPLEX_TOL, repr=False, compare=False)

    def __post_init__(self):
        arr = _as_matrix(self.values)
        scale = max(1.0, float(np.abs(arr).max()))
        if np.any(np.abs(arr.sum(axis=1)) > self.tol * scale * arr.shape[1]):
            raise InvalidState(f"row sums deviate from 0 by {np.abs(arr.sum(axis=1)).max():.3g}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def num_agents(self) -> int:
        return self.values.shape[0]

    @property
    def num_options(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def neutral_point(na: int, no: int) -> OpinionState:
    return OpinionState(np.full((na, no), 1.0 / no))


def to_deviation(x, tol: float = SIMPLEX_TOL) -> DeviationState:
    """Subtract the neutral point. Rejects rows that are not on the simplex."""
    x = x if isinstance(x, OpinionState) else OpinionState(x, tol=tol)
    z = x.values - 1.0 / x.num_options
    # remove the O(eps) row-sum residue left by the subtraction
    return DeviationState(z - z.mean(axis=1, keepdims=True))


def to_simplex(z, tol: float = SIMPLEX_TOL) -> OpinionState:
    z = z if isinstance(z, DeviationState) else DeviationState(z, tol=tol)
    x = z.values + 1.0 / z.num_options
    if np.any(x < -tol):
        i, j = np.unravel_index(np.argmin(x), x.shape)
        raise OutOfSimplex(f"entry ({i}, {j}) would be {x[i, j]:.6g}")
    return OpinionState(np.clip(x, 0.0, None) if np.any(x < 0) else x, tol=tol)


def project_consensus(z) -> np.ndarray:
    """Replace each agent row by the across-agent mean row (projection onto W_c)."""
    z = np.asarray(z, dtype=float)
    return np.broadcast_to(z.mean(axis=0, keepdims=True), z.shape).copy()


def project_dissensus(z) -> np.ndarray:
    """Remove the across-agent mean (projection onto W_d)."""
    z = np.asarray(z, dtype=float)
    return z - z.mean(axis=0, keepdims=True)


def project_tangent(z) -> np.ndarray:
    """Remove row means, mapping any agents x options array into V."""
    z = np.asarray(z, dtype=float)
    return z - z.mean(axis=1, keepdims=True)


# --------------------------------------------------------------------------- classification


class AgentKind(str, enum.Enum):
    UNOPINIONATED = "unopinionated"
    FAVORS = "favors"
    CONFLICTED = "conflicted"


class GroupKind(str, enum.Enum):
    UNOPINIONATED = "unopinionated"
    CONSENSUS = "consensus"
    AGREEMENT = "agreement"
    DISSENSUS = "dissensus"
    DISAGREEMENT = "disagreement"


class DissensusKind(str, enum.Enum):
    UNIFORM = "uniform"
    MODERATE_EXTREMIST = "moderate_extremist"
    OTHER = "other"


@dataclass(frozen=True)
class AgentClass:
    kind: AgentKind
    options: frozenset = frozenset()

    @property
    def label(self) -> str:
        if self.kind is AgentKind.UNOPINIONATED:
            return self.kind.value
        return f"{self.kind.value}:" + "+".join(str(j + 1) for j in sorted(self.options))


@dataclass(frozen=True)
class GroupClass:
    kind: GroupKind
    subtype: Optional[DissensusKind] = None

    @property
    def label(self) -> str:
        if self.subtype is None:
            return self.kind.value
        return f"{self.kind.value}:{self.subtype.value}"


def classify_agent(x_row, theta: float) -> AgentClass:
    """Classify one agent's simplex row with opinion threshold ``theta``.

    The favored set is every option within ``theta`` of the largest weight.
    """
    x_row = np.asarray(x_row, dtype=float)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    dev = x_row - 1.0 / x_row.size
    if np.linalg.norm(dev) <= theta:
        return AgentClass(AgentKind.UNOPINIONATED)
    slack = theta if theta > 0 else _ATOL
    favored = frozenset(int(j) for j in np.flatnonzero(x_row >= x_row.max() - slack))
    if len(favored) == 1:
        return AgentClass(AgentKind.FAVORS, favored)
    return AgentClass(AgentKind.CONFLICTED, favored)


def _clusters(z: np.ndarray, theta: float) -> list[np.ndarray]:
    dist = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=2)
    n, labels = connected_components(dist <= max(theta, _ATOL), directed=False)
    return [np.flatnonzero(labels == c) for c in range(n)]


def dissensus_subtype(z, theta: float) -> DissensusKind:
    """Single-linkage clustering of agent deviations at link distance ``theta``.

    Clusters whose centroid is within ``theta`` of neutral are ignored. Uniform:
    at least two opinionated clusters whose sizes differ by at most one and whose
    centroid norms agree within ``theta``. Moderate/extremist: exactly two
    opinionated clusters of different sizes, the smaller one farther from neutral.
    """
    z = np.asarray(z, dtype=float)
    tol = max(theta, _ATOL)
    groups = []
    for members in _clusters(z, theta):
        norm = float(np.linalg.norm(z[members].mean(axis=0)))
        if norm > tol:
            groups.append((len(members), norm))
    if len(groups) >= 2:
        sizes = [s for s, _ in groups]
        norms = [r for _, r in groups]
        if max(sizes) - min(sizes) <= 1 and max(norms) - min(norms) <= tol:
            return DissensusKind.UNIFORM
        if len(groups) == 2:
            (s1, r1), (s2, r2) = sorted(groups)
            if s1 < s2 and r1 > r2 + _ATOL:
                return DissensusKind.MODERATE_EXTREMIST
    return DissensusKind.OTHER


def classify_group(x, theta: float) -> GroupClass:
    """Group-level opinion class of a state (simplex or deviation array).

    ``x`` may be an :class:`OpinionState`, a :class:`DeviationState`, or a raw array;
    raw arrays whose rows sum to one are read as simplex points, otherwise as
    deviations.
    """
    if isinstance(x, OpinionState):
        z = x.values - 1.0 / x.num_options
    elif isinstance(x, DeviationState):
        z = np.array(x.values)
    else:
        arr = _as_matrix(x)
        z = arr - 1.0 / arr.shape[1] if np.allclose(arr.sum(axis=1), 1.0) else arr
    no = z.shape[1]
    agents = [classify_agent(row + 1.0 / no, theta) for row in z]
    if all(a.kind is AgentKind.UNOPINIONATED for a in agents):
        return GroupClass(GroupKind.UNOPINIONATED)
    if len(set(agents)) == 1:
        spread = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=2).max()
        if spread <= theta + _ATOL:
            return GroupClass(GroupKind.CONSENSUS)
        return GroupClass(GroupKind.AGREEMENT)
    if np.linalg.norm(z.mean(axis=0)) <= theta + _ATOL:
        return GroupClass(GroupKind.DISSENSUS, dissensus_subtype(z, theta))
    return GroupClass(GroupKind.DISAGREEMENT)


def group_mean_norm(z) -> float:
    """Norm of the average agent's deviation."""
    return float(np.linalg.norm(np.asarray(z, dtype=float).mean(axis=0)))


def max_agent_norm(z) -> float:
    return float(np.linalg.norm(np.asarray(z, dtype=float), axis=1).max())
