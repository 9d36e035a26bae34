"""Quasi-probability representations built from a frame and one of its duals.

States map to ``(T rho)_j = Tr(rho F_j)`` and effects to ``(S E)_j = Tr(E D_j)``.
The Born rule then reads ``Tr(rho E) = sum_j (T rho)_j (S E)_j``. Since no
representation of this kind can be classical, at least one of the two
families must have a negative eigenvalue; :func:`certify_negativity`
checks that and produces explicit rank-1 witnesses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .duals import DualFrame, check_dual
from .frames import Frame
from .operators import HermitianOperator, as_operator, eig_hermitian, psd_check

STATE_TOL = 1e-10
ZERO_TOL = 1e-10


class NegativityTheoremViolation(RuntimeError):
    """Raised when neither the frame nor the dual shows a negative eigenvalue."""


@dataclass(frozen=True)
class QuasiProbState:
    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        total = float(v.sum())
        if abs(total - 1.0) > STATE_TOL:
            raise ValueError(f"quasi-probabilities must sum to 1, got {total!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))


@dataclass(frozen=True)
class QuasiProbEffect:
    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))


class BornCheck(NamedTuple):
    lhs: float
    rhs: float
    residual: float


def check_state(rho, tol: float = STATE_TOL) -> HermitianOperator:
    rho = as_operator(rho)
    tr = rho.trace()
    if abs(tr - 1.0) > tol:
        raise ValueError(f"not a state: trace {tr!r} differs from 1")
    psd = psd_check(rho, tol)
    if not psd.verdict:
        raise ValueError(f"not a state: not positive semidefinite (lambda_min = {psd.lambda_min:.3e})")
    return rho


def check_effect(e, tol: float = STATE_TOL) -> HermitianOperator:
    e = as_operator(e)
    low = psd_check(e, tol)
    if not low.verdict:
        raise ValueError(f"not an effect: not positive semidefinite (lambda_min = {low.lambda_min:.3e})")
    high = psd_check(np.eye(e.dim) - e.entries, tol)
    if not high.verdict:
        raise ValueError(f"not an effect: exceeds the identity (lambda_max = {1 - high.lambda_min:.6g})")
    return e


def _pair(stack: np.ndarray, a: HermitianOperator) -> np.ndarray:
    if stack.shape[1] != a.dim:
        raise ValueError(f"dimension mismatch: representation dim {stack.shape[1]}, operator dim {a.dim}")
    return np.einsum("jxy,yx->j", stack, a.entries).real


def rep_state(frame: Frame, rho) -> QuasiProbState:
    rho = check_state(rho)
    return QuasiProbState(_pair(frame.stack, rho), frame.labels)


def rep_effect(dual: DualFrame, e) -> QuasiProbEffect:
    e = check_effect(e)
    return QuasiProbEffect(_pair(dual.stack, e), dual.labels)


def rep_observable(dual: DualFrame, a) -> np.ndarray:
    """Random variable r_j = Tr(A D_j) with ``Tr(rho A) = sum_j r_j (T rho)_j``."""
    return _pair(dual.stack, as_operator(a))


def born_check(frame: Frame, dual: DualFrame, rho, e) -> BornCheck:
    rho, e = as_operator(rho), as_operator(e)
    lhs = float(np.vdot(e.entries, rho.entries).real)
    rhs = float(rep_state(frame, rho).values @ rep_effect(dual, e).values)
    return BornCheck(lhs, rhs, abs(lhs - rhs))


def _values(q) -> np.ndarray:
    return np.asarray(getattr(q, "values", q), dtype=float)


def negativity_state(q) -> float:
    """Total negative mass: sum_j max(0, -q_j)."""
    return float(np.sum(np.maximum(0.0, -_values(q))))


def negativity_effect(f) -> float:
    """Largest distance of any value from the interval [0, 1]."""
    v = _values(f)
    if v.size == 0:
        return 0.0
    return float(np.max(np.maximum(0.0, np.maximum(-v, v - 1.0))))


class Verdict(str, enum.Enum):
    FRAME_NEGATIVE = "FRAME_NEGATIVE"
    DUAL_NEGATIVE = "DUAL_NEGATIVE"
    BOTH_NEGATIVE = "BOTH_NEGATIVE"


@dataclass(frozen=True)
class Witness:
    index: int
    label: str
    operator: HermitianOperator
    value: float

    def to_json(self) -> dict:
        return {"index": self.index, "label": self.label, "value": self.value, "operator": self.operator.to_json()}


@dataclass(frozen=True)
class NegativityReport:
    frame_lambda_min: float
    dual_lambda_min: float
    verdict: Verdict
    state_witness: Witness | None
    effect_witness: Witness | None

    def to_json(self) -> dict:
        return {
            "frame_lambda_min": self.frame_lambda_min,
            "dual_lambda_min": self.dual_lambda_min,
            "verdict": self.verdict.value,
            "witnesses": {
                "state": self.state_witness.to_json() if self.state_witness else None,
                "effect": self.effect_witness.to_json() if self.effect_witness else None,
            },
        }

    def summary(self) -> str:
        return (
            f"{self.verdict.value}: frame lambda_min={self.frame_lambda_min:.6g}, "
            f"dual lambda_min={self.dual_lambda_min:.6g}"
        )


def _lowest(elements: Sequence[HermitianOperator]) -> tuple[float, int, np.ndarray]:
    lam, idx, vec = np.inf, -1, None
    for j, op in enumerate(elements):
        sp = eig_hermitian(op)
        if sp.eigenvalues[0] < lam:
            lam, idx, vec = float(sp.eigenvalues[0]), j, sp.eigenvectors[:, 0]
    return lam, idx, vec


def certify_negativity(frame: Frame, dual: DualFrame) -> NegativityReport:
    """Locate the negativity that every frame/dual pair must carry.

    A negative eigenvalue of some F_j is witnessed by the pure state onto its
    eigenvector (whose quasi-probability at j is that eigenvalue); a negative
    eigenvalue of some D_j is witnessed by the matching projector effect.
    Eigenvalues within 1e-10 of zero count as nonnegative.

    Raises
    ------
    ValueError
        If ``dual`` does not reconstruct with ``frame``.
    NegativityTheoremViolation
        If both families are positive semidefinite, which a valid pair cannot be.
    """
    check_dual(frame, dual)
    f_lam, f_idx, f_vec = _lowest(frame.elements)
    d_lam, d_idx, d_vec = _lowest(dual.elements)
    f_neg = f_lam < -ZERO_TOL
    d_neg = d_lam < -ZERO_TOL
    if not (f_neg or d_neg):
        raise NegativityTheoremViolation(
            f"no negativity found: frame lambda_min={f_lam:.3e}, dual lambda_min={d_lam:.3e}"
        )
    state_w = effect_w = None
    if f_neg:
        rho = HermitianOperator.projector(f_vec)
        state_w = Witness(f_idx, frame.labels[f_idx], rho, float(rep_state(frame, rho).values[f_idx]))
    if d_neg:
        e = HermitianOperator.projector(d_vec)
        effect_w = Witness(d_idx, dual.labels[d_idx], e, float(rep_effect(dual, e).values[d_idx]))
    if f_neg and d_neg:
        verdict = Verdict.BOTH_NEGATIVE
    elif f_neg:
        verdict = Verdict.FRAME_NEGATIVE
    else:
        verdict = Verdict.DUAL_NEGATIVE
    return NegativityReport(f_lam, d_lam, verdict, state_w, effect_w)
