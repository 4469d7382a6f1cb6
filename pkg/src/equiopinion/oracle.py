"""Exhaustive search for axial subgroups at small sizes, used to cross-check
the constructive catalogs.

Every fixed-point subspace of a subgroup is an intersection of the fixed
spaces Fix(g) of single elements, so closing the set {Fix(g)} under
intersection reaches every one of them. The one-dimensional members are the
axial lines; each is confirmed by averaging over its full isotropy subgroup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .axials import CONSENSUS, DISSENSUS, AxialRecord, canonical_class_key, normalize_fix
from .constants import GROUP_ELEMENT_CAP
from .errors import SizeExceeded
from .symmetry import SubgroupSpec, full_group_generators, subspace_basis

_KEY_DECIMALS = 8


@dataclass(frozen=True)
class OracleClass:
    key: tuple
    fix: np.ndarray
    isotropy_order: int


def _subspace_key(B: np.ndarray) -> bytes:
    P = np.round(B @ B.T, _KEY_DECIMALS) + 0.0
    return P.tobytes()


def _kernel(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    # absolute threshold: a relative one misreads round-off-sized matrices as full rank
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > tol))
    return vt[rank:].T.copy()


def _intersect(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(A) & span(B) (columns, both orthonormal)."""
    d = A.shape[0]
    return _kernel(np.vstack([np.eye(d) - A @ A.T, np.eye(d) - B @ B.T]))


def brute_force_axials(n: int, k: int, mode: str = DISSENSUS,
                       cap: int = GROUP_ELEMENT_CAP) -> list[OracleClass]:
    """Conjugacy classes of axial subgroups of S_n x S_k on W_c or W_d."""
    if math.factorial(n) * math.factorial(k) > cap:
        raise SizeExceeded(f"|S_{n} x S_{k}| = {math.factorial(n) * math.factorial(k)} exceeds {cap}")
    space = {CONSENSUS: "Wc", DISSENSUS: "Wd"}[mode]
    Q = subspace_basis(n, k, space)
    d = Q.shape[1]
    if d == 0:
        return []
    group = SubgroupSpec(tuple(full_group_generators(n, k)), n, k, cap)
    images = group.flat_images()
    # action of each element on coordinates of the chosen subspace
    reps = np.empty((len(images), d, d))
    for e, img in enumerate(images):
        moved = np.zeros_like(Q)
        moved[img] = Q
        reps[e] = Q.T @ moved

    base: dict[bytes, np.ndarray] = {}
    for R in reps:
        F = _kernel(R - np.eye(d))
        if F.shape[1]:
            base.setdefault(_subspace_key(F), F)
    found = dict(base)
    frontier = list(base.values())
    while frontier:
        nxt = []
        for A in frontier:
            if A.shape[1] <= 1:
                continue
            for B in base.values():
                C = _intersect(A, B)
                if C.shape[1] == 0:
                    continue
                key = _subspace_key(C)
                if key not in found:
                    found[key] = C
                    nxt.append(C)
        frontier = nxt

    classes: dict[tuple, OracleClass] = {}
    for L in found.values():
        if L.shape[1] != 1:
            continue
        v = L[:, 0]
        fixing = np.flatnonzero(np.abs(reps @ v - v).max(axis=1) <= 1e-9)
        averaged = reps[fixing].mean(axis=0)
        if abs(np.trace(averaged) - 1.0) > 1e-9:
            continue
        z = (Q @ v).reshape(n, k)
        key = canonical_class_key(z)
        if key not in classes:
            classes[key] = OracleClass(key, normalize_fix(z), len(fixing))
    return [classes[key] for key in sorted(classes)]


@dataclass(frozen=True)
class OracleComparison:
    oracle_classes: int
    catalog_classes: int
    missing_from_catalog: list
    extra_in_catalog: list

    @property
    def match(self) -> bool:
        return not self.missing_from_catalog and not self.extra_in_catalog

    @property
    def verdict(self) -> str:
        return "MATCH" if self.match else "MISMATCH"

    def to_json(self) -> dict:
        return {
            "oracle_classes": self.oracle_classes,
            "catalog_classes": self.catalog_classes,
            "missing_from_catalog": self.missing_from_catalog,
            "extra_in_catalog": self.extra_in_catalog,
            "verdict": self.verdict,
        }


def compare_with_catalog(oracle: list[OracleClass], records: list[AxialRecord]) -> OracleComparison:
    cat = {r.class_key(): r for r in records}
    orc = {c.key: c for c in oracle}
    missing = [orc[key].fix.tolist() for key in sorted(set(orc) - set(cat))]
    extra = [cat[key].label for key in sorted(set(cat) - set(orc))]
    return OracleComparison(len(orc), len(cat), missing, extra)
