"""Linearization at the neutral point: balance terms, Jacobians, consensus and
dissensus eigenvalues, and critical values of the bifurcation parameter."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .constants import FD_STEP, MODE_INTERACTION_TOL
from .dynamics import Model, drift, unprojected_field
from .errors import DegenerateDenominator, DimensionMismatch, IndexInconsistency
from .symmetry import subspace_basis


@dataclass(frozen=True)
class BalanceTerms:
    """Index-class partial derivatives of F at the neutral point. ``abar`` carries
    the +1 offset so that it vanishes when the model has no self-coupling."""

    abar: float
    bbar: float
    gbar: float
    dbar: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.abar, self.bbar, self.gbar, self.dbar)


def _partial(model: Model, lam: float, h: float, out: tuple[int, int], wrt: tuple[int, int]) -> float:
    e = np.zeros((model.na, model.no))
    e[wrt] = h
    plus = unprojected_field(e, model, lam)[out]
    minus = unprojected_field(-e, model, lam)[out]
    return float((plus - minus) / (2.0 * h))


def balance_terms(model: Model, lam: Optional[float] = None, h: float = FD_STEP,
                  check: bool = True) -> BalanceTerms:
    """Central differences of F at z=0 for the four index classes.

    Each term is evaluated at two different index choices; if they disagree by
    more than ``10 h^2`` (relative to the term's scale) the model is not
    equivariant and :class:`IndexInconsistency` is raised.
    """
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    na, no = model.na, model.no
    if na < 2 or no < 2:
        raise DimensionMismatch("balance terms need at least two agents and two options")
    lam = model.lam if lam is None else lam
    a, o = na - 1, no - 1
    choices = {
        "abar": (((0, 0), (0, 0)), ((a, o), (a, o))),
        "bbar": (((0, 0), (0, 1)), ((a, o), (a, 0))),
        "gbar": (((0, 0), (1, 0)), ((a, o), (0, o))),
        "dbar": (((0, 0), (1, 1)), ((a, o), (0, 0))),
    }
    values = {}
    for name, (first, second) in choices.items():
        v1 = _partial(model, lam, h, *first)
        v2 = _partial(model, lam, h, *second)
        if check and abs(v1 - v2) > 10 * h * h * max(1.0, abs(v1)):
            raise IndexInconsistency(f"{name}: {v1:.12g} vs {v2:.12g}")
        values[name] = 0.5 * (v1 + v2)
    values["abar"] += 1.0
    return BalanceTerms(**values)


def eigenvalues_cd(bt: BalanceTerms, na: int, no: int) -> tuple[float, float]:
    """The two bifurcation-governing quantities (c1 for consensus, c2 for dissensus).

    These carry the positive prefactors (No-1) and (No-1)(Na-1); the actual
    Jacobian eigenvalues on W_c and W_d are :func:`true_eigenvalues_cd`. Signs and
    zeros agree.
    """
    if na < 2 or no < 2:
        raise DimensionMismatch("need na >= 2 and no >= 2")
    a, b, g, d = bt.as_tuple()
    c1 = (no - 1) * (-1 + a - b + (na - 1) * (g - d))
    c2 = (no - 1) * (na - 1) * (-1 + a - b - g + d)
    return c1, c2


def true_eigenvalues_cd(bt: BalanceTerms, na: int) -> tuple[float, float]:
    """Exact Jacobian eigenvalues on W_c and W_d for an equivariant model."""
    a, b, g, d = bt.as_tuple()
    return -1 + a - b + (na - 1) * (g - d), -1 + a - b - g + d


def jacobian_at_neutral(model: Model, lam: Optional[float] = None, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the projected drift at z=0, in row-major
    flattened coordinates of the full Na*No space."""
    na, no = model.na, model.no
    n = na * no
    J = np.empty((n, n))
    e = np.zeros(n)
    for c in range(n):
        e[c] = h
        plus = drift(e.reshape(na, no), model, lam)
        minus = drift(-e.reshape(na, no), model, lam)
        J[:, c] = ((plus - minus) / (2.0 * h)).ravel()
        e[c] = 0.0
    return J


def analytic_jacobian(bt: BalanceTerms, na: int, no: int) -> np.ndarray:
    """Block form: diagonal agent blocks B0 (entries a, b), off-diagonal blocks B1 (c, d)."""
    abar, bbar, gbar, dbar = bt.as_tuple()
    a = (no - 1) / no * (-1 + abar - bbar)
    b = -a / (no - 1)
    c = (no - 1) / no * (gbar - dbar)
    d = -c / (no - 1)
    B0 = np.full((no, no), b) + (a - b) * np.eye(no)
    B1 = np.full((no, no), d) + (c - d) * np.eye(no)
    return np.kron(np.eye(na), B0) + np.kron(np.ones((na, na)) - np.eye(na), B1)


@dataclass(frozen=True)
class RestrictedSpectrum:
    eig_consensus: float     # largest real part on W_c
    eig_dissensus: float     # largest real part on W_d
    block_residual: float    # max |entry| of the W_c <-> W_d coupling blocks


def restricted_spectrum(J: np.ndarray, na: int, no: int) -> RestrictedSpectrum:
    Qc = subspace_basis(na, no, "Wc")
    Qd = subspace_basis(na, no, "Wd")
    ec = np.linalg.eigvals(Qc.T @ J @ Qc).real.max()
    ed = np.linalg.eigvals(Qd.T @ J @ Qd).real.max() if Qd.shape[1] else -np.inf
    resid = 0.0
    if Qd.shape[1]:
        resid = max(np.abs(Qc.T @ J @ Qd).max(), np.abs(Qd.T @ J @ Qc).max())
    return RestrictedSpectrum(float(ec), float(ed), float(resid))


class BifurcationKind(str, enum.Enum):
    CONSENSUS = "consensus"
    DISSENSUS = "dissensus"
    MODE_INTERACTION = "mode_interaction"


@dataclass(frozen=True)
class BifurcationPrediction:
    kind: BifurcationKind
    critical_lambda: Optional[float]
    c1: Optional[float] = None
    c2: Optional[float] = None
    lambda_consensus: Optional[float] = None
    lambda_dissensus: Optional[float] = None


def critical_lambdas(alpha: float, beta: float, gamma: float, delta: float, na: int,
                     no: int = 2, tol: float = MODE_INTERACTION_TOL) -> BifurcationPrediction:
    """Predicted first instability of the neutral point as lambda grows from 0.

    ``c1`` and ``c2`` are evaluated at the predicted critical value (one of them
    is then zero). ``no`` only scales c1/c2.
    """
    den_c = alpha - beta + (na - 1) * (gamma - delta)
    den_d = alpha - beta - gamma + delta
    lam_c = 1.0 / den_c if den_c > 0 else None
    lam_d = 1.0 / den_d if den_d > 0 else None
    if abs(gamma - delta) <= tol:
        return BifurcationPrediction(BifurcationKind.MODE_INTERACTION, None,
                                     lambda_consensus=lam_c, lambda_dissensus=lam_d)
    if gamma > delta:
        kind, den = BifurcationKind.CONSENSUS, den_c
    else:
        kind, den = BifurcationKind.DISSENSUS, den_d
    if den <= 0:
        raise DegenerateDenominator(f"{kind.value} denominator is {den:.6g} (must be > 0)")
    lam = 1.0 / den
    bt = BalanceTerms(lam * alpha, lam * beta, lam * gamma, lam * delta)
    c1, c2 = eigenvalues_cd(bt, max(na, 2), no)
    return BifurcationPrediction(kind, lam, c1, c2, lam_c, lam_d)


def numeric_critical_lambda(model: Model, subspace: str, h: float = FD_STEP,
                            rtol: float = 1e-12, lam_max: float = 1e6) -> float:
    """Bisection for the smallest lambda > 0 where the leading eigenvalue of the
    finite-difference Jacobian restricted to ``subspace`` ('Wc' or 'Wd') crosses 0.

    The bracket starts at [0, 1] and doubles until the eigenvalue is positive.
    """
    Q = subspace_basis(model.na, model.no, subspace)

    def lead(lam: float) -> float:
        J = jacobian_at_neutral(model, lam, h)
        return float(np.linalg.eigvals(Q.T @ J @ Q).real.max())

    lo, hi = 0.0, 1.0
    if lead(lo) >= 0:
        raise ValueError("neutral point is not stable at lambda = 0")
    while lead(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > lam_max:
            raise DegenerateDenominator(f"no crossing on {subspace} below lambda={lam_max:g}")
    return _bisect(lead, lo, hi, rtol)


def _bisect(f: Callable[[float], float], lo: float, hi: float, rtol: float) -> float:
    while hi - lo > rtol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def analysis_report(model: Model, lam: Optional[float] = None, h: float = FD_STEP,
                    prediction: Optional[BifurcationPrediction] = None) -> dict:
    """Linear-analysis summary at the model's lambda (or ``lam``)."""
    lam = model.lam if lam is None else lam
    J = jacobian_at_neutral(model, lam, h)
    spec = restricted_spectrum(J, model.na, model.no)
    try:
        bt = balance_terms(model, lam, h)
        consistent = True
    except IndexInconsistency:
        bt = balance_terms(model, lam, h, check=False)
        consistent = False
    c1, c2 = eigenvalues_cd(bt, model.na, model.no)
    report = {
        "lambda": lam,
        "balance_terms": dict(zip(("abar", "bbar", "gbar", "dbar"), bt.as_tuple())),
        "balance_index_consistent": consistent,
        "c1": c1,
        "c2": c2,
        "eig_consensus": spec.eig_consensus,
        "eig_dissensus": spec.eig_dissensus,
        "block_residual": spec.block_residual,
    }
    if prediction is not None:
        report["kind"] = prediction.kind.value
        report["lambda_crit"] = prediction.critical_lambda
    return report
