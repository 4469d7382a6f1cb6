"""Axial subgroups of S_Na x S_No on the consensus and dissensus spaces.

Each :class:`AxialRecord` carries generators of the full isotropy subgroup of
its fixed vector (factors acting on all-zero agent rows or option columns are
included), so the record can be checked both for a one-dimensional fixed space
and for maximality.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import GROUP_ELEMENT_CAP
from .state import project_consensus, project_dissensus
from .symmetry import (GroupElement, SubgroupSpec, act, block_cycle, block_swap,
                       fixed_subspace, reynolds_fixed_subspace, symmetric_on)

CONSENSUS = "consensus"
DISSENSUS = "dissensus"
PROVEN = "proven"
POSSIBLY_INCOMPLETE = "possibly_incomplete"
UNSTABLE = "unstable"
POTENTIALLY_STABLE = "potentially_stable"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class AxialRecord:
    name: str
    mode: str
    params: dict
    generators: tuple[GroupElement, ...]
    fix: np.ndarray
    completeness: str = PROVEN
    stable_hint: str = UNKNOWN

    def __post_init__(self):
        fix = np.array(self.fix, dtype=float)
        fix.setflags(write=False)
        object.__setattr__(self, "fix", fix)
        object.__setattr__(self, "generators", tuple(self.generators))

    @property
    def na(self) -> int:
        return self.fix.shape[0]

    @property
    def no(self) -> int:
        return self.fix.shape[1]

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return self.name + "(" + ",".join(f"{k}={v}" for k, v in self.params.items()) + ")"

    def subgroup(self, cap: int = GROUP_ELEMENT_CAP) -> SubgroupSpec:
        return SubgroupSpec(self.generators, self.na, self.no, cap)

    def class_key(self) -> tuple:
        return canonical_class_key(self.fix)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "params": dict(self.params),
            "generators": [g.to_json() for g in self.generators],
            "fix_vector": self.fix.tolist(),
            "stable_hint": self.stable_hint,
            "completeness": self.completeness,
        }


def normalize_fix(v) -> np.ndarray:
    """Unit Euclidean norm, first nonzero entry (row-major) positive."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    nz = np.flatnonzero(np.abs(v.ravel()) > 1e-12)
    if nz.size and v.ravel()[nz[0]] < 0:
        v = -v
    return v + 0.0


def canonical_class_key(z, decimals: int = 8) -> tuple:
    """Key shared by every vector in the Gamma-orbit of the line through ``z``.

    Rows are sorted (removing the agent permutation); the option permutation and
    the sign are removed by taking the minimum over all of them.
    """
    z = np.asarray(z, dtype=float)
    z = z / np.linalg.norm(z)
    best = None
    for tau in itertools.permutations(range(z.shape[1])):
        zt = z[:, tau]
        for sign in (1.0, -1.0):
            rows = np.round(sign * zt, decimals) + 0.0
            key = tuple(sorted(map(tuple, rows.tolist())))
            if best is None or key < best:
                best = key
    return best


def _element(n_perm, k_perm, transpose: bool) -> GroupElement:
    """Element acting by ``n_perm`` on the 'n' index and ``k_perm`` on the other."""
    return GroupElement(k_perm, n_perm) if transpose else GroupElement(n_perm, k_perm)


def _sym(block, n: int, k: int, on_k: bool, transpose: bool) -> list[GroupElement]:
    """Symmetric group on ``block`` of the 'n' index (or 'k' index if ``on_k``)."""
    na, no = (k, n) if transpose else (n, k)
    acts_on_options = on_k != transpose
    return symmetric_on(block, na, no, options=acts_on_options)


def _ident(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def _cycle_first(s: int, k: int) -> tuple[int, ...]:
    """Forward cycle of the first s of k points."""
    p = list(range(k))
    for j in range(s):
        p[j] = (j + 1) % s
    return tuple(p)


def _swap01(k: int) -> tuple[int, ...]:
    p = list(range(k))
    p[0], p[1] = 1, 0
    return tuple(p)


def _record(name, mode, params, gens, fix, transpose, completeness=PROVEN, stable=UNKNOWN):
    fix = np.asarray(fix, dtype=float)
    if transpose:
        fix = fix.T
    return AxialRecord(name, mode, params, tuple(gens), normalize_fix(fix), completeness, stable)


# --------------------------------------------------------------------------- consensus


def consensus_axials(na: int, no: int) -> list[AxialRecord]:
    """One record per split of the options into p favored and No-p disfavored."""
    if no < 2 or na < 1:
        raise ValueError("need na >= 1 and no >= 2")
    out = []
    for p in range(1, no // 2 + 1):
        v = np.array([(no - p) / p] * p + [-1.0] * (no - p))
        gens = (symmetric_on(range(na), na, no)
                + symmetric_on(range(p), na, no, options=True)
                + symmetric_on(range(p, no), na, no, options=True))
        out.append(_record("Sigma_p", CONSENSUS, {"p": p}, gens, np.tile(v, (na, 1)), False))
    return out


# --------------------------------------------------------------------------- dissensus, 2 x n


def _orientation(orientation: str) -> bool:
    if orientation not in ("agents", "options"):
        raise ValueError("orientation must be 'agents' or 'options'")
    return orientation == "options"


def dissensus_axials_two(n: int, orientation: str = "agents") -> list[AxialRecord]:
    """Axials of S_n x Z_2 on V_n.

    ``orientation='agents'`` lays the n-index along agents (Na=n, No=2);
    ``'options'`` along options (Na=2, No=n).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    tr = _orientation(orientation)
    swap2 = (1, 0)

    def embed(y):
        y = np.asarray(y, dtype=float)
        return np.stack([y, -y], axis=1)

    out = []
    for k in range(1, n):
        if 2 * k >= n:
            break
        y = [1.0] * k + [k / (k - n)] * (n - k)
        gens = _sym(range(k), n, 2, False, tr) + _sym(range(k, n), n, 2, False, tr)
        stable = POTENTIALLY_STABLE if n / 3 < k < n / 2 else UNSTABLE
        out.append(_record("Sigma_k", DISSENSUS, {"k": k}, gens, embed(y), tr, stable=stable))
    for l in range(1, n // 2 + 1):
        y = [1.0] * l + [-1.0] * l + [0.0] * (n - 2 * l)
        gens = (_sym(range(l), n, 2, False, tr) + _sym(range(l, 2 * l), n, 2, False, tr)
                + _sym(range(2 * l, n), n, 2, False, tr)
                + [_element(block_swap(l, n), swap2, tr)])
        out.append(_record("T_l", DISSENSUS, {"l": l}, gens, embed(y), tr, stable=UNSTABLE))
    return out


# --------------------------------------------------------------------------- dissensus, 3 x n

_V0 = np.array([1.0, -1.0, 0.0])
_V1 = np.array([1.0, -0.5, -0.5])
_V2 = np.array([-0.5, 1.0, -0.5])
_V3 = np.array([-0.5, -0.5, 1.0])


def dissensus_axials_three(n: int, orientation: str = "agents") -> list[AxialRecord]:
    """Axials of S_n x S_3 on V_n (x) V_3. The paired-block record needs even n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    tr = _orientation(orientation)
    kap = _swap01(3)
    out = []
    for m in range(1, n // 2 + 1):
        fix = np.array([_V3] * m + [m / (m - n) * _V3] * (n - m))
        gens = (_sym(range(m), n, 3, False, tr) + _sym(range(m, n), n, 3, False, tr)
                + [_element(_ident(n), kap, tr)])
        out.append(_record("Sigma_x_m", DISSENSUS, {"m": m}, gens, fix, tr, stable=UNSTABLE))
    if n % 2 == 0:
        h = n // 2
        fix = np.array([_V0] * h + [-_V0] * h)
        gens = (_sym(range(h), n, 3, False, tr) + _sym(range(h, n), n, 3, False, tr)
                + [_element(block_swap(h, n), kap, tr)])
        out.append(_record("Sigma_Z2", DISSENSUS, {}, gens, fix, tr, stable=UNSTABLE))
    for m in range(1, n // 3 + 1):
        fix = np.array([_V1] * m + [_V2] * m + [_V3] * m + [np.zeros(3)] * (n - 3 * m))
        gens = (_sym(range(m), n, 3, False, tr) + _sym(range(m, 2 * m), n, 3, False, tr)
                + _sym(range(2 * m, 3 * m), n, 3, False, tr) + _sym(range(3 * m, n), n, 3, False, tr)
                + [_element(block_swap(m, n), kap, tr),
                   _element(block_cycle(m, 3, n), _cycle_first(3, 3), tr)])
        out.append(_record("Sigma_S3_m", DISSENSUS, {"m": m}, gens, fix, tr, stable=UNSTABLE))
    return out


# --------------------------------------------------------------------------- dissensus, general


def _cycled_blocks(v: np.ndarray, m: int, s: int, n: int) -> np.ndarray:
    """Rows: m copies of v, then m copies of v cycled forward on its first s
    entries, and so on for s blocks, then zero rows up to n."""
    k = v.size
    perm = _cycle_first(s, k)
    rows, w = [], v.copy()
    for _ in range(s):
        rows.extend([w] * m)
        nxt = np.empty_like(w)
        nxt[list(perm)] = w
        w = nxt
    rows.extend([np.zeros(k)] * (n - s * m))
    return np.array(rows)


def product_axials(n: int, k: int, completeness: str = POSSIBLY_INCOMPLETE) -> list[AxialRecord]:
    """A x. B records: agent split (m, n-m) paired with option split (l, k-l)."""
    out = []
    stable = UNSTABLE if min(n, k) >= 3 else UNKNOWN
    for m in range(1, n // 2 + 1):
        for l in range(1, k // 2 + 1):
            v = np.array([1.0] * l + [l / (l - k)] * (k - l))
            fix = np.array([v] * m + [m / (m - n) * v] * (n - m))
            gens = (symmetric_on(range(m), n, k) + symmetric_on(range(m, n), n, k)
                    + symmetric_on(range(l), n, k, options=True)
                    + symmetric_on(range(l, k), n, k, options=True))
            if 2 * m == n and 2 * l == k:
                gens.append(GroupElement(block_swap(m, n), block_swap(l, k)))
            out.append(_record("AxB", DISSENSUS, {"m": m, "l": l}, gens, fix, False,
                               completeness, stable))
    return out


def graph_axials(n: int, k: int, transpose: bool = False,
                 completeness: str = POSSIBLY_INCOMPLETE) -> list[AxialRecord]:
    """Graph-of-homomorphism records built on an n x k layout.

    With ``transpose`` the same construction is applied with the roles of agents
    and options exchanged, giving records for a k x n state.
    """
    out = []
    stable = UNSTABLE if min(n, k) >= 3 else UNKNOWN
    extra = {"transposed": True} if transpose else {}
    for m in range(1, n + 1):
        s = n // m
        if n % m or not 2 <= s < k:
            continue
        v0 = np.array([-(s - 1.0)] + [1.0] * (s - 1) + [0.0] * (k - s))
        gens = [g for b in range(s) for g in _sym(range(b * m, (b + 1) * m), n, k, False, transpose)]
        gens += _sym(range(s, k), n, k, True, transpose)
        gens += [_element(block_swap(m, n), _swap01(k), transpose),
                 _element(block_cycle(m, s, n), _cycle_first(s, k), transpose)]
        out.append(_record("Sigma_Ss", DISSENSUS, {"s": s, "m": m, **extra}, gens,
                           _cycled_blocks(v0, m, s, n), transpose, completeness, stable))
    for m in range(1, n // k + 1):
        v1 = np.array([-(k - 1.0)] + [1.0] * (k - 1))
        gens = [g for b in range(k) for g in _sym(range(b * m, (b + 1) * m), n, k, False, transpose)]
        gens += _sym(range(k * m, n), n, k, False, transpose)
        gens += [_element(block_swap(m, n), _swap01(k), transpose),
                 _element(block_cycle(m, k, n), _cycle_first(k, k), transpose)]
        out.append(_record("Sigma_Sk_m", DISSENSUS, {"m": m, **extra}, gens,
                           _cycled_blocks(v1, m, k, n), transpose, completeness, stable))
    return out


def dedupe_by_class(records: Sequence[AxialRecord]) -> list[AxialRecord]:
    seen, out = set(), []
    for r in records:
        key = r.class_key()
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


def constructive_axials(n: int, k: int) -> list[AxialRecord]:
    """Product and graph records for an n-agent, k-option layout, plus the graph
    records of the transposed layout; one record per conjugacy class."""
    return dedupe_by_class(product_axials(n, k) + graph_axials(n, k)
                           + graph_axials(k, n, transpose=True))


def dissensus_axials_general(n: int, k: int) -> list[AxialRecord]:
    """Dissensus axials for Na=n, No=k.

    When either size is 2 or 3 the specialized catalogs (whose lists are
    complete) are used; otherwise :func:`constructive_axials`, flagged
    possibly incomplete.
    """
    if n < 2 or k < 2:
        raise ValueError("need n >= 2 and k >= 2")
    if k == 2:
        return dissensus_axials_two(n, "agents")
    if n == 2:
        return dissensus_axials_two(k, "options")
    if k == 3:
        return dissensus_axials_three(n, "agents")
    if n == 3:
        return dissensus_axials_three(k, "options")
    return constructive_axials(n, k)


def catalog(na: int, no: int, mode: str) -> list[AxialRecord]:
    if mode == CONSENSUS:
        return consensus_axials(na, no)
    if mode == DISSENSUS:
        return dissensus_axials_general(na, no)
    raise ValueError(f"unknown mode {mode!r}")


def catalog_notes(na: int, no: int, mode: str) -> list[str]:
    notes = []
    if mode == DISSENSUS and 3 in (na, no):
        other = no if na == 3 else na
        if other % 2 == 1 and other != 3 or (na == no == 3):
            notes.append("Sigma_Z2 omitted: the paired-block record needs an even size")
    if mode == DISSENSUS and min(na, no) >= 4:
        notes.append("list may be incomplete for these sizes")
    return notes


# --------------------------------------------------------------------------- checks


def quadratic_equivariant(z) -> np.ndarray:
    """Degree-two equivariant map into W_d: per agent ``No z_ij^2 - sum_l z_il^2``,
    then ``Na F_i - sum_k F_k`` across agents."""
    z = np.asarray(z, dtype=float)
    na, no = z.shape
    F = no * z ** 2 - (z ** 2).sum(axis=1, keepdims=True)
    return na * F - F.sum(axis=0, keepdims=True)


def isotropy_order(z, decimals: int = 9) -> int:
    """Number of (sigma, tau) fixing z, counted per option permutation by
    matching row multisets."""
    z = np.round(np.asarray(z, dtype=float), decimals) + 0.0
    rows = sorted(map(tuple, z.tolist()))
    mult = math.prod(math.factorial(c) for c in _run_lengths(rows))
    total = 0
    for tau in itertools.permutations(range(z.shape[1])):
        zt = np.empty_like(z)
        zt[:, list(tau)] = z
        if sorted(map(tuple, zt.tolist())) == rows:
            total += mult
    return total


def _run_lengths(sorted_items) -> list[int]:
    return [len(list(g)) for _, g in itertools.groupby(sorted_items)]


@dataclass
class RecordCheck:
    label: str
    generator_residual: float
    subspace_residual: float
    fix_dim: int
    fix_method: str
    isotropy_order: int
    generated_order: int

    @property
    def maximal(self) -> bool:
        return self.isotropy_order == self.generated_order

    @property
    def ok(self) -> bool:
        return (self.generator_residual <= 1e-12 and self.subspace_residual <= 1e-12
                and self.fix_dim == 1 and self.maximal)


def verify_record(rec: AxialRecord, cap: int = GROUP_ELEMENT_CAP) -> RecordCheck:
    """Generator residual, W_c/W_d membership, fixed-space dimension and maximality.

    The fixed space is the image of the averaging projector when the subgroup
    has at most ``cap`` elements, otherwise the common kernel of ``g - I`` over
    the generators (the same subspace, without enumeration).
    """
    z = rec.fix
    gen_res = max((float(np.abs(act(g, z) - z).max()) for g in rec.generators), default=0.0)
    other = project_dissensus(z) if rec.mode == CONSENSUS else project_consensus(z)
    space = "Wc" if rec.mode == CONSENSUS else "Wd"
    spec = rec.subgroup(cap)
    order = spec.order()
    if order <= cap:
        fs = reynolds_fixed_subspace(spec, subspace=space)
        method = "reynolds"
    else:
        fs = fixed_subspace(rec.generators, rec.na, rec.no, space)
        method = "generator_kernel"
    return RecordCheck(rec.label, gen_res, float(np.abs(other).max()), fs.dim, method,
                       isotropy_order(z), order)
