"""Agent/option permutation pairs, their action on deviation states, and
fixed-point subspaces of subgroups.

Permutations are stored as 0-based image tuples: ``sigma[i]`` is where agent
``i`` is sent. The action moves entries, ``act(g, z)[sigma[i], tau[j]] = z[i, j]``,
so ``act(g * h, z) == act(g, act(h, z))``. On disk permutations are written as
1-based image arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import null_space

from .constants import GRAM_SCHMIDT_TOL, GROUP_ELEMENT_CAP
from .dynamics import HomogeneousModel, Model, TensorModel, drift, index_class_masks
from .errors import DimensionMismatch, GroupTooLarge
from .state import project_tangent


def _check_perm(p: Sequence[int], n: int, what: str) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if len(p) != n or sorted(p) != list(range(n)):
        raise ValueError(f"{what} is not a permutation of 0..{n - 1}: {p}")
    return p


@dataclass(frozen=True, order=True)
class GroupElement:
    sigma: tuple[int, ...]
    tau: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_perm(self.sigma, len(self.sigma), "sigma"))
        object.__setattr__(self, "tau", _check_perm(self.tau, len(self.tau), "tau"))

    @classmethod
    def identity(cls, na: int, no: int) -> "GroupElement":
        return cls(tuple(range(na)), tuple(range(no)))

    @classmethod
    def from_cycles(cls, na: int, no: int, agent_cycles: Iterable[Sequence[int]] = (),
                    option_cycles: Iterable[Sequence[int]] = ()) -> "GroupElement":
        """Build from 0-based cycles, e.g. ``agent_cycles=[(0, 1)]`` swaps agents 0 and 1."""
        return cls(_perm_from_cycles(na, agent_cycles), _perm_from_cycles(no, option_cycles))

    @property
    def na(self) -> int:
        return len(self.sigma)

    @property
    def no(self) -> int:
        return len(self.tau)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        """Composition: apply ``other`` first, then ``self``."""
        if (self.na, self.no) != (other.na, other.no):
            raise DimensionMismatch("composing elements of different groups")
        return _unchecked(tuple(self.sigma[i] for i in other.sigma),
                          tuple(self.tau[j] for j in other.tau))

    def inverse(self) -> "GroupElement":
        return GroupElement(tuple(np.argsort(self.sigma)), tuple(np.argsort(self.tau)))

    def is_identity(self) -> bool:
        return self.sigma == tuple(range(self.na)) and self.tau == tuple(range(self.no))

    def flat_image(self) -> np.ndarray:
        """Index map on row-major flattened states: entry ``i*no + j`` moves to the returned index."""
        s = np.asarray(self.sigma)[:, None] * self.no + np.asarray(self.tau)[None, :]
        return s.ravel()

    def matrix(self) -> np.ndarray:
        n = self.na * self.no
        P = np.zeros((n, n))
        P[self.flat_image(), np.arange(n)] = 1.0
        return P

    def to_json(self) -> dict:
        return {"sigma": [s + 1 for s in self.sigma], "tau": [t + 1 for t in self.tau]}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupElement":
        return cls(tuple(s - 1 for s in obj["sigma"]), tuple(t - 1 for t in obj["tau"]))


def _perm_from_cycles(n: int, cycles: Iterable[Sequence[int]]) -> tuple[int, ...]:
    p = list(range(n))
    seen: set[int] = set()
    for cyc in cycles:
        cyc = [int(c) for c in cyc]
        if seen.intersection(cyc) or len(set(cyc)) != len(cyc):
            raise ValueError("cycles must be disjoint")
        seen.update(cyc)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            p[a] = b
    return tuple(p)


def _unchecked(sigma: tuple[int, ...], tau: tuple[int, ...]) -> GroupElement:
    g = object.__new__(GroupElement)
    object.__setattr__(g, "sigma", sigma)
    object.__setattr__(g, "tau", tau)
    return g


def act(g: GroupElement, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.shape != (g.na, g.no):
        raise DimensionMismatch(f"element acts on ({g.na}, {g.no}) states, got {z.shape}")
    out = np.empty_like(z)
    out[np.ix_(g.sigma, g.tau)] = z
    return out


# --------------------------------------------------------------------------- subgroups


@dataclass(frozen=True)
class SubgroupSpec:
    """Subgroup given by generators; elements are enumerated lazily up to ``cap``."""

    generators: tuple[GroupElement, ...]
    na: int
    no: int
    cap: int = GROUP_ELEMENT_CAP
    _elements: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            if (g.na, g.no) != (self.na, self.no):
                raise DimensionMismatch("generator acts on the wrong state shape")
        object.__setattr__(self, "generators", gens)

    def elements(self) -> list[GroupElement]:
        """All elements by breadth-first closure. Raises GroupTooLarge past ``cap``."""
        if not self._elements:
            images = self._enumerate_images()
            na = self.na
            self._elements.extend(
                _unchecked(tuple(int(x) for x in row[:na]), tuple(int(x) - na for x in row[na:]))
                for row in images
            )
        return list(self._elements)

    def flat_images(self) -> np.ndarray:
        """Row-major flattened index maps of all elements, one row per element."""
        images = self._enumerate_images()
        sig, tau = images[:, :self.na], images[:, self.na:] - self.na
        return (sig[:, :, None] * self.no + tau[:, None, :]).reshape(len(images), -1)

    def _enumerate_images(self) -> np.ndarray:
        # elements as permutations of na + no points, composed in batches
        na = self.na
        gens = [np.array(list(g.sigma) + [na + t for t in g.tau])
                for g in self.generators if not g.is_identity()]
        ident = np.arange(na + self.no)
        seen = {ident.tobytes()}
        found = [ident]
        frontier = ident[None, :]
        while len(frontier):
            fresh = []
            for g in gens:
                for row in g[frontier]:
                    key = row.tobytes()
                    if key not in seen:
                        seen.add(key)
                        fresh.append(row)
                        if len(seen) > self.cap:
                            raise GroupTooLarge(f"subgroup has more than {self.cap} elements")
            found.extend(fresh)
            frontier = np.array(fresh) if fresh else np.zeros((0, na + self.no), dtype=int)
        images = np.array(found)
        return images[np.lexsort(images.T[::-1])]

    def order(self) -> int:
        """Group order without enumeration (Schreier-Sims via sympy)."""
        from sympy.combinatorics import Permutation, PermutationGroup

        n = self.na + self.no
        perms = [Permutation(list(g.sigma) + [self.na + t for t in g.tau], size=n)
                 for g in self.generators]
        if not perms:
            return 1
        return int(PermutationGroup(perms).order())

    def to_json(self) -> list[dict]:
        return [g.to_json() for g in self.generators]


def full_group_generators(na: int, no: int) -> list[GroupElement]:
    """Transposition + long cycle for each factor of S_na x S_no."""
    gens = []
    if na >= 2:
        gens.append(GroupElement.from_cycles(na, no, [(0, 1)]))
        if na >= 3:
            gens.append(GroupElement.from_cycles(na, no, [tuple(range(na))]))
    if no >= 2:
        gens.append(GroupElement.from_cycles(na, no, (), [(0, 1)]))
        if no >= 3:
            gens.append(GroupElement.from_cycles(na, no, (), [tuple(range(no))]))
    return gens


def symmetric_on(block: Sequence[int], na: int, no: int, options: bool = False) -> list[GroupElement]:
    """Generators of the symmetric group on ``block`` (agents, or options if ``options``)."""
    block = list(block)
    if len(block) < 2:
        return []
    cycles = [[(block[0], block[1])]]
    if len(block) >= 3:
        cycles.append([tuple(block)])
    if options:
        return [GroupElement.from_cycles(na, no, (), c) for c in cycles]
    return [GroupElement.from_cycles(na, no, c) for c in cycles]


# --------------------------------------------------------------------------- named elements


def kappa(na: int, no: int, on_options: bool = True) -> GroupElement:
    """The transposition (1 2), of options by default or of agents."""
    if on_options:
        return GroupElement.from_cycles(na, no, (), [(0, 1)])
    return GroupElement.from_cycles(na, no, [(0, 1)])


def theta(na: int, no: int) -> GroupElement:
    """The option 3-cycle (1 2 3)."""
    return GroupElement.from_cycles(na, no, (), [(0, 1, 2)])


def block_swap(m: int, n: int) -> tuple[int, ...]:
    """Permutation of n points swapping the first two blocks of size m."""
    if 2 * m > n:
        raise ValueError("two blocks of size m do not fit")
    return _perm_from_cycles(n, [(a, m + a) for a in range(m)])


def block_cycle(m: int, s: int, n: int) -> tuple[int, ...]:
    """Permutation of n points cycling the first s blocks of size m forward."""
    if s * m > n:
        raise ValueError("s blocks of size m do not fit")
    return _perm_from_cycles(n, [tuple(a + b * m for b in range(s)) for a in range(m)] if s >= 2 else [])


def sigma_m(m: int, na: int, no: int) -> GroupElement:
    """Agent block swap of two size-m blocks, options fixed."""
    return GroupElement(block_swap(m, na), tuple(range(no)))


def rho_m(m: int, na: int, no: int) -> GroupElement:
    """Agent block swap together with the option swap (1 2)."""
    return GroupElement(block_swap(m, na), _perm_from_cycles(no, [(0, 1)]))


def mu_m(m: int, na: int, no: int) -> GroupElement:
    """Agent three-block cycle, options fixed."""
    return GroupElement(block_cycle(m, 3, na), tuple(range(no)))


def nu_m(m: int, na: int, no: int, s: int = 3) -> GroupElement:
    """Agent s-block cycle paired with the option cycle (1 2 ... s). ``s=3`` is the
    three-option element; other ``s`` give the graph-subgroup generator."""
    return GroupElement(block_cycle(m, s, na), _perm_from_cycles(no, [tuple(range(s))] if s >= 2 else []))


# --------------------------------------------------------------------------- equivariance


@dataclass(frozen=True)
class EquivarianceReport:
    max_violation: float
    passed: bool
    tol: float

    def to_json(self) -> dict:
        return {"max_violation": self.max_violation, "pass": self.passed, "tol": self.tol}


def check_equivariance(model: Model, generators: Sequence[GroupElement], n_samples: int = 20,
                       tol: float = 1e-10, seed: int = 0, scale: float = 1.0) -> EquivarianceReport:
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        z = project_tangent(rng.normal(scale=scale, size=(model.na, model.no)))
        fz = drift(z, model)
        for g in generators:
            diff = act(g, fz) - drift(act(g, z), model)
            worst = max(worst, float(np.abs(diff).max()))
    return EquivarianceReport(worst, worst <= tol, tol)


@dataclass(frozen=True)
class Homogeneous:
    alpha: float
    beta: float
    gamma: float
    delta: float
    bias: float


@dataclass(frozen=True)
class NotHomogeneous:
    witness: tuple[int, ...]
    reason: str


def check_tensor_homogeneity(tensor, bias=None, tol: float = 0.0) -> Union[Homogeneous, NotHomogeneous]:
    """Check the four index-class constancy conditions and a constant bias.

    The witness is the first index tuple (``(i, k, j, l)`` for the tensor,
    ``(i, j)`` for the bias) whose value differs from the class reference by more
    than ``tol``; the reference is the entry with the smallest index in its class.
    """
    A = np.asarray(tensor, dtype=float)
    na, no = A.shape[0], A.shape[2]
    values = []
    for name, mask in zip(("alpha", "beta", "gamma", "delta"), index_class_masks(na, no)):
        idx = np.argwhere(mask)
        if idx.size == 0:       # e.g. gamma/delta with a single agent
            values.append(0.0)
            continue
        ref = A[tuple(idx[0])]
        bad = np.abs(A[mask] - ref) > tol
        if bad.any():
            return NotHomogeneous(tuple(int(x) for x in idx[np.argmax(bad)]), f"{name} class not constant")
        values.append(float(ref))
    b = np.zeros((na, no)) if bias is None else np.broadcast_to(np.asarray(bias, dtype=float), (na, no))
    bad = np.abs(b - b.flat[0]) > tol
    if bad.any():
        return NotHomogeneous(tuple(int(x) for x in np.unravel_index(np.argmax(bad), b.shape)),
                              "bias not constant")
    return Homogeneous(*values, bias=float(b.flat[0]))


def model_homogeneity(model: Model, tol: float = 0.0) -> Union[Homogeneous, NotHomogeneous]:
    if isinstance(model, HomogeneousModel):
        model = model.to_tensor()
    assert isinstance(model, TensorModel)
    return check_tensor_homogeneity(model.tensor, model.bias, tol)


# --------------------------------------------------------------------------- fixed subspaces


def modified_gram_schmidt(vectors: np.ndarray, tol: float = GRAM_SCHMIDT_TOL) -> np.ndarray:
    """Orthonormalize the columns of ``vectors``; columns whose residual norm is
    below ``tol`` are dropped. Two passes keep the result orthogonal to ~1e-15."""
    basis: list[np.ndarray] = []
    for v in np.asarray(vectors, dtype=float).T:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm > tol:
            basis.append(w / norm)
    n = np.asarray(vectors).shape[0]
    return np.array(basis).T if basis else np.zeros((n, 0))


def subspace_basis(na: int, no: int, subspace: str = "V") -> np.ndarray:
    """Orthonormal basis (columns, row-major flattening) of V, W_c or W_d."""
    ea = np.eye(na) - 1.0 / na
    eo = np.eye(no) - 1.0 / no
    if subspace == "V":
        P = np.kron(np.eye(na), eo)
    elif subspace == "Wc":
        P = np.kron(np.full((na, na), 1.0 / na), eo)
    elif subspace == "Wd":
        P = np.kron(ea, eo)
    else:
        raise ValueError(f"unknown subspace {subspace!r}")
    return modified_gram_schmidt(P)


def reynolds_projector(s: SubgroupSpec) -> np.ndarray:
    """Average of the action matrices over every element of the subgroup."""
    images = s.flat_images()
    n = s.na * s.no
    P = np.zeros((n, n))
    cols = np.broadcast_to(np.arange(n), images.shape)
    np.add.at(P, (images, cols), 1.0)
    return P / len(images)


@dataclass(frozen=True)
class FixedSubspace:
    basis: np.ndarray        # columns, flattened row-major, orthonormal
    trace: Optional[float]   # trace of the averaged action on the chosen subspace

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def vectors(self, na: int, no: int) -> list[np.ndarray]:
        return [self.basis[:, c].reshape(na, no) for c in range(self.dim)]


def reynolds_fixed_subspace(s: SubgroupSpec, na: Optional[int] = None, no: Optional[int] = None,
                            subspace: str = "V", tol: float = GRAM_SCHMIDT_TOL) -> FixedSubspace:
    """Fix(s) inside V, W_c or W_d as the image of the group-averaging projector."""
    na = s.na if na is None else na
    no = s.no if no is None else no
    if (na, no) != (s.na, s.no):
        raise DimensionMismatch("subgroup acts on a different state shape")
    Q = subspace_basis(na, no, subspace)
    R = reynolds_projector(s)
    image = modified_gram_schmidt(R @ Q, tol)
    trace = float(np.trace(Q.T @ R @ Q))
    return FixedSubspace(image, trace)


def fixed_subspace(generators: Sequence[GroupElement], na: int, no: int,
                   subspace: str = "V") -> FixedSubspace:
    """Fix of the generated subgroup as the common kernel of ``g - I`` over the
    generators; needs no enumeration, so it works for subgroups of any order."""
    Q = subspace_basis(na, no, subspace)
    if Q.shape[1] == 0:
        return FixedSubspace(Q, None)
    blocks = [(g.matrix() - np.eye(na * no)) @ Q for g in generators if not g.is_identity()]
    if not blocks:
        return FixedSubspace(Q, None)
    K = null_space(np.vstack(blocks), rcond=1e-10)
    return FixedSubspace(modified_gram_schmidt(Q @ K), None)
