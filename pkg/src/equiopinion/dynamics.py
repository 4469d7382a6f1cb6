"""Analytical opinion-formation vector field on the tangent space at the neutral point.

Two model flavours share one drift:

* :class:`HomogeneousModel` -- all-to-all homogeneous coupling described by four
  gains (alpha: self/same option, beta: self/other option, gamma: other agent/same
  option, delta: other agent/other option) and a bias matrix. Uses the reduced
  sums, O(Na*No) per evaluation.
* :class:`TensorModel` -- arbitrary dense coupling tensor ``A[i, k, j, l]`` (agent
  ``i`` option ``j`` influenced by agent ``k`` option ``l``).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .constants import K_HTO
from .errors import DimensionMismatch


def sigmoid_s1(x, k_hto: float = K_HTO):
    """Same-option saturation ``tanh(x + k tanh(x^2))``; S1(0)=0, S1'(0)=1, |S1|<1."""
    return np.tanh(x + k_hto * np.tanh(np.square(x)))


def sigmoid_s2(x, k_hto: float = K_HTO):
    """Cross-option saturation ``0.5 tanh(2x + 2k tanh(x^2))``; S2'(0)=1, |S2|<0.5."""
    return 0.5 * np.tanh(2.0 * x + 2.0 * k_hto * np.tanh(np.square(x)))


@dataclass(frozen=True)
class ModelParams:
    alpha: float
    beta: float
    gamma: float
    delta: float
    lam: float = 0.0
    k_hto: float = K_HTO

    def __post_init__(self):
        if self.k_hto == 0:
            raise ValueError("k_hto must be nonzero")


def _bias_array(bias, na: int, no: int) -> np.ndarray:
    if bias is None:
        arr = np.zeros((na, no))
    else:
        arr = np.array(np.broadcast_to(np.asarray(bias, dtype=float), (na, no)))
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HomogeneousModel:
    na: int
    no: int
    params: ModelParams
    bias: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.na < 1 or self.no < 2:
            raise DimensionMismatch("need na >= 1 and no >= 2")
        object.__setattr__(self, "bias", _bias_array(self.bias, self.na, self.no))

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def k_hto(self) -> float:
        return self.params.k_hto

    def with_lambda(self, lam: float) -> "HomogeneousModel":
        return replace(self, params=replace(self.params, lam=float(lam)))

    def with_delta(self, delta: float) -> "HomogeneousModel":
        return replace(self, params=replace(self.params, delta=float(delta)))

    def to_tensor(self) -> "TensorModel":
        p = self.params
        return TensorModel(
            homogeneous_tensor(self.na, self.no, p.alpha, p.beta, p.gamma, p.delta),
            self.bias, p.lam, p.k_hto, nominal=p,
        )


@dataclass(frozen=True, eq=False)
class TensorModel:
    """General coupling tensor model.

    ``nominal`` optionally records the homogeneous gains the tensor was built
    from; :meth:`with_delta` uses it to shift the other-agent/other-option entries.
    """

    tensor: np.ndarray
    bias: Optional[np.ndarray]
    lam: float = 0.0
    k_hto: float = K_HTO
    nominal: Optional[ModelParams] = field(default=None, compare=False)

    def __post_init__(self):
        A = np.array(self.tensor, dtype=float)
        if A.ndim != 4 or A.shape[0] != A.shape[1] or A.shape[2] != A.shape[3]:
            raise DimensionMismatch(f"tensor must be Na x Na x No x No, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("tensor has non-finite entries")
        if self.k_hto == 0:
            raise ValueError("k_hto must be nonzero")
        A.setflags(write=False)
        object.__setattr__(self, "tensor", A)
        object.__setattr__(self, "bias", _bias_array(self.bias, A.shape[0], A.shape[2]))
        object.__setattr__(self, "_coupling", _coupling_matrix(A))

    @property
    def na(self) -> int:
        return self.tensor.shape[0]

    @property
    def no(self) -> int:
        return self.tensor.shape[2]

    def with_lambda(self, lam: float) -> "TensorModel":
        return replace(self, lam=float(lam))

    def with_delta(self, delta: float) -> "TensorModel":
        if self.nominal is None:
            raise ValueError("with_delta needs the nominal homogeneous gains")
        shift = float(delta) - self.nominal.delta
        return replace(
            self,
            tensor=self.tensor + shift * index_class_masks(self.na, self.no)[3],
            nominal=replace(self.nominal, delta=float(delta)),
        )


Model = Union[HomogeneousModel, TensorModel]


def _coupling_matrix(A: np.ndarray) -> np.ndarray:
    """Flatten the tensor so that ``u.ravel() = M @ z.ravel()`` with ``u`` indexed (i, j, l)."""
    na, no = A.shape[0], A.shape[2]
    M = np.zeros((na, no, no, na, no))
    for l in range(no):
        M[:, :, l, :, l] = np.transpose(A[:, :, :, l], (0, 2, 1))
    M = M.reshape(na * no * no, na * no)
    M.setflags(write=False)
    return M


def index_class_masks(na: int, no: int) -> tuple[np.ndarray, ...]:
    """Boolean masks over ``A[i, k, j, l]`` for the alpha, beta, gamma, delta classes."""
    same_agent = np.eye(na, dtype=bool)[:, :, None, None]
    same_option = np.eye(no, dtype=bool)[None, None, :, :]
    return (
        same_agent & same_option,
        same_agent & ~same_option,
        ~same_agent & same_option,
        ~same_agent & ~same_option,
    )


def homogeneous_tensor(na: int, no: int, alpha: float, beta: float, gamma: float,
                       delta: float) -> np.ndarray:
    if na < 1 or no < 2:
        raise DimensionMismatch("need na >= 1 and no >= 2")
    A = np.zeros((na, na, no, no))
    for mask, value in zip(index_class_masks(na, no), (alpha, beta, gamma, delta)):
        A[mask] = value
    return A


def unprojected_field(z: np.ndarray, model: Model, lam: Optional[float] = None,
                      delta: Optional[float] = None) -> np.ndarray:
    """The per-option drift F before the option-average subtraction.

    ``lam`` and ``delta`` override the model's values without building a new
    model, which keeps parameter ramps cheap. A ``delta`` override on a tensor
    model shifts every other-agent/other-option entry by ``delta - nominal.delta``.
    """
    z = np.asarray(z, dtype=float)
    if z.shape != (model.na, model.no):
        raise DimensionMismatch(f"state shape {z.shape} does not match model ({model.na}, {model.no})")
    lam = model.lam if lam is None else lam
    k = model.k_hto
    others = z.sum(axis=0, keepdims=True) - z   # sum over k != i
    if isinstance(model, HomogeneousModel):
        p = model.params
        d = p.delta if delta is None else delta
        s1 = sigmoid_s1(p.alpha * z + p.gamma * others, k)
        s2 = sigmoid_s2(p.beta * z + d * others, k)
        cross = s2.sum(axis=1, keepdims=True) - s2  # sum over l != j
        return -z + lam * (s1 + cross) + model.bias
    # u[i, j, l] = sum_k A[i, k, j, l] z[k, l]
    u = (model._coupling @ z.ravel()).reshape(model.na, model.no, model.no)
    if delta is not None:
        if model.nominal is None:
            raise ValueError("a delta override needs the nominal homogeneous gains")
        shift = delta - model.nominal.delta
        if shift:
            off = ~np.eye(model.no, dtype=bool)
            u = u + shift * off[None, :, :] * others[:, None, :]
    diag = np.diagonal(u, axis1=1, axis2=2)
    s2 = sigmoid_s2(u, k)
    cross = s2.sum(axis=2) - np.diagonal(s2, axis1=1, axis2=2)
    return -z + lam * (sigmoid_s1(diag, k) + cross) + model.bias


def drift(z, model: Model, lam: Optional[float] = None,
          delta: Optional[float] = None) -> np.ndarray:
    """Tangent-space vector field: F minus its option average, row by row."""
    F = unprojected_field(z, model, lam, delta)
    return F - F.sum(axis=1, keepdims=True) / F.shape[1]


def perturb(model: Model, epsilon: float, seed: int) -> TensorModel:
    """Add independent uniform[-eps, eps] noise to every coupling and bias entry."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    base = model.to_tensor() if isinstance(model, HomogeneousModel) else model
    if epsilon == 0:
        return base
    rng = np.random.default_rng(seed)
    noise_A = rng.uniform(-epsilon, epsilon, size=base.tensor.shape)
    noise_b = rng.uniform(-epsilon, epsilon, size=base.bias.shape)
    return replace(base, tensor=base.tensor + noise_A, bias=base.bias + noise_b)
