"""Dual frames: canonical dual, the affine space of duals, and negativity search.

In coordinates a dual is a d^2 x n real matrix Delta with ``Delta @ G = I``
(G the synthesis matrix of the frame); column j holds the coordinates of
D_j. Row 0 of Delta is the identity component, so ``Tr(D_j) = 1`` for all
j is the single extra condition ``Delta[0] = 1 / sqrt(d)``. That row is
always compatible with ``Delta @ G = I`` because the frame sums to I.

The canonical dual is the minimum-Frobenius-norm Delta under both
conditions: the Moore-Penrose pseudoinverse of G with row 0 replaced by
the constant 1/sqrt(d). Whenever the all-ones vector lies in the column
space of G (equal-trace frames, or n = d^2) this is exactly the
pseudoinverse dual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .frames import Frame, NotInformationallyComplete, gram_rank
from .operators import (
    HermitianOperator,
    as_operator,
    devectorize_array,
    eig_hermitian,
    hermitian_basis,
    make_rng,
    random_hermitian,
)

TRACE_TOL = 1e-10
RECON_TOL = 1e-9


class DualFrame:
    """Family of Hermitian operators D_j aligned with a parent frame's labels.

    ``unit_trace=True`` enforces Tr(D_j) = 1 within 1e-10. The reconstruction
    property needs the parent frame and is checked by :func:`check_dual`.
    """

    def __init__(
        self,
        elements: Sequence,
        labels: Sequence[str] | None = None,
        *,
        unit_trace: bool = True,
        parent_hash: str | None = None,
    ):
        ops = tuple(as_operator(e) for e in elements)
        if not ops:
            raise ValueError("a dual frame needs at least one element")
        d = ops[0].dim
        if any(op.dim != d for op in ops):
            raise ValueError("dual elements have mixed dimensions")
        if labels is None:
            labels = [str(j) for j in range(len(ops))]
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(ops):
            raise ValueError(f"{len(labels)} labels for {len(ops)} elements")
        stack = np.array([op.entries for op in ops])
        if unit_trace:
            traces = np.trace(stack, axis1=1, axis2=2).real
            dev = float(np.max(np.abs(traces - 1.0)))
            if dev > TRACE_TOL:
                raise ValueError(f"dual elements must have unit trace: max |Tr(D_j) - 1| = {dev:.3e}")
        stack.setflags(write=False)
        self.dim = d
        self.elements = ops
        self.labels = labels
        self.stack = stack
        self.unit_trace = unit_trace
        self.parent_hash = parent_hash

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"DualFrame(dim={self.dim}, n={len(self)})"

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "labels": list(self.labels),
            "elements": [op.to_json() for op in self.elements],
            "parent_frame_hash": self.parent_hash,
        }

    @classmethod
    def from_json(cls, obj: dict) -> DualFrame:
        try:
            d = int(obj["dim"])
            elements = [HermitianOperator.from_json(e) for e in obj["elements"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed dual frame JSON: {exc}") from exc
        if any(e.dim != d for e in elements):
            raise ValueError(f"dual JSON declares dim {d} but an element disagrees")
        traces = np.array([e.trace() for e in elements])
        return cls(
            elements,
            obj.get("labels"),
            unit_trace=bool(np.all(np.abs(traces - 1.0) <= TRACE_TOL)),
            parent_hash=obj.get("parent_frame_hash"),
        )


class ReconstructionCheck(NamedTuple):
    max_residual: float


def _check_aligned(frame: Frame, dual: DualFrame) -> None:
    if frame.dim != dual.dim or len(frame) != len(dual):
        raise ValueError(
            f"frame (dim {frame.dim}, n={len(frame)}) and dual (dim {dual.dim}, n={len(dual)}) are not aligned"
        )


def probe_residual(frame: Frame, dual: DualFrame) -> float:
    """max_a |B_a - sum_j Tr(F_j B_a) D_j|_max over the fixed orthonormal basis B_a."""
    _check_aligned(frame, dual)
    recon = np.einsum("ja,jxy->axy", frame.synthesis, dual.stack)
    return float(np.max(np.abs(recon - hermitian_basis(frame.dim))))


def swapped_probe_residual(frame: Frame, dual: DualFrame) -> float:
    """Same as :func:`probe_residual` with the roles of frame and dual exchanged."""
    _check_aligned(frame, dual)
    basis = hermitian_basis(frame.dim)
    coeffs = np.einsum("jxy,ayx->ja", dual.stack, basis).real
    recon = np.einsum("ja,jxy->axy", coeffs, frame.stack)
    return float(np.max(np.abs(recon - basis)))


def check_dual(frame: Frame, dual: DualFrame, tol: float = RECON_TOL) -> None:
    res = probe_residual(frame, dual)
    if res > tol:
        raise ValueError(f"not a dual of this frame: probe reconstruction residual {res:.3e} > {tol:.1e}")


def verify_reconstruction(frame: Frame, dual: DualFrame, trials: int = 100, seed: int = 0) -> ReconstructionCheck:
    """Worst ``|A - sum_j Tr(F_j A) D_j|_max`` over random Hermitian A. Never raises on a bad pair."""
    _check_aligned(frame, dual)
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(trials):
        a = random_hermitian(rng, frame.dim)
        coeffs = np.einsum("jxy,yx->j", frame.stack, a).real
        recon = np.tensordot(coeffs, dual.stack, axes=1)
        worst = max(worst, float(np.max(np.abs(recon - a))))
    return ReconstructionCheck(worst)


def _require_ic(frame: Frame) -> None:
    rank = gram_rank(frame)
    if rank != frame.dim**2:
        raise NotInformationallyComplete(
            f"frame is not informationally complete: synthesis rank {rank} < d^2 = {frame.dim ** 2}"
        )


def _canonical_coefficients(frame: Frame) -> np.ndarray:
    _require_ic(frame)
    delta = np.linalg.pinv(frame.synthesis)
    delta[0, :] = 1.0 / math.sqrt(frame.dim)
    return delta


def canonical_dual(frame: Frame) -> DualFrame:
    delta = _canonical_coefficients(frame)
    dual = DualFrame(devectorize_array(delta.T, frame.dim), frame.labels, parent_hash=frame.content_hash())
    check_dual(frame, dual)
    return dual


@dataclass(frozen=True)
class DualSpace:
    """Affine space ``canonical + span(directions)`` of duals of ``frame``.

    ``directions`` has shape (k, n, d, d); each direction is an n-tuple of
    Hermitian operators N_j with ``sum_j Tr(F_j A) N_j = 0`` for every A,
    and the k directions are orthonormal in the summed trace inner product.
    With ``unit_trace`` every N_j is also traceless.
    """

    frame: Frame
    canonical: DualFrame
    directions: np.ndarray
    unit_trace: bool
    dimension: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dimension", int(self.directions.shape[0]))

    @property
    def kernel_basis(self) -> list[np.ndarray]:
        return list(self.directions)

    def stack_at(self, coeffs: np.ndarray) -> np.ndarray:
        return self.canonical.stack + np.tensordot(coeffs, self.directions, axes=1)


def dual_space(frame: Frame, *, unit_trace: bool = True) -> DualSpace:
    """Parameterize all duals of an informationally complete frame.

    The full solution set of ``Delta G = I`` has dimension d^2 (n - d^2);
    fixing unit traces removes the identity row and leaves
    (d^2 - 1)(n - d^2).
    """
    canonical = canonical_dual(frame)
    d, n = frame.dim, len(frame)
    u, _, _ = np.linalg.svd(frame.synthesis, full_matrices=True)
    null = u[:, d * d :].T  # orthonormal rows spanning null(G^T)
    basis = hermitian_basis(d)
    rows = range(1, d * d) if unit_trace else range(d * d)
    dirs = [null[b][:, None, None] * basis[a] for a in rows for b in range(null.shape[0])]
    directions = np.array(dirs) if dirs else np.zeros((0, n, d, d), dtype=complex)
    directions.setflags(write=False)
    return DualSpace(frame, canonical, directions, unit_trace)


def perturb_dual(space: DualSpace, coeffs) -> DualFrame:
    coeffs = np.asarray(coeffs, dtype=float).ravel()
    if coeffs.size != space.dimension:
        raise ValueError(f"expected {space.dimension} coefficients, got {coeffs.size}")
    dual = DualFrame(
        space.stack_at(coeffs),
        space.frame.labels,
        unit_trace=space.unit_trace,
        parent_hash=space.canonical.parent_hash,
    )
    check_dual(space.frame, dual)
    return dual


def min_eigen_objective(stack: np.ndarray) -> tuple[float, int, np.ndarray]:
    """min_j lambda_min(D_j) with the attaining index (lowest on ties) and eigenvector."""
    best = (math.inf, -1, None)
    for j, m in enumerate(stack):
        sp = eig_hermitian(m)
        lam = float(sp.eigenvalues[0])
        if lam < best[0]:
            best = (lam, j, sp.eigenvectors[:, 0])
    return best


@dataclass
class DualOptimization:
    best: DualFrame
    value: float
    trace: list[float]
    iters: int
    coeffs: np.ndarray

    def to_json(self) -> dict:
        return {"value": self.value, "iters": self.iters, "trace": list(self.trace)}


def optimize_dual_negativity(
    frame: Frame,
    iters: int = 2000,
    step0: float = 0.5,
    seed: int = 0,
    *,
    unit_trace: bool = True,
    init_scale: float = 0.0,
) -> DualOptimization:
    """Maximize ``min_j lambda_min(D_j)`` over the duals of ``frame``.

    Projected subgradient ascent on the coefficients of :func:`dual_space`.
    At iterate t the element j* and unit eigenvector v attaining the minimum
    give the supergradient v v^H in slot j*; its projection onto the
    orthonormal directions is ``g_k = v^H N_k[j*] v``, and the step is
    ``step0 / sqrt(t) * g``. The objective is concave, so a negative
    returned value is the best dual found, not merely a local one.

    ``seed`` and ``init_scale`` control an optional Gaussian start offset
    from the canonical dual; with the default ``init_scale=0`` the run
    starts at the canonical dual and ``seed`` has no effect.

    Returns the best iterate; ``trace[t]`` is the best value seen through
    iteration t and is non-decreasing.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    space = dual_space(frame, unit_trace=unit_trace)
    k = space.dimension
    if k == 0:
        value, _, _ = min_eigen_objective(space.canonical.stack)
        return DualOptimization(space.canonical, value, [value], 0, np.zeros(0))
    c = np.zeros(k)
    if init_scale:
        c = init_scale * make_rng(seed).standard_normal(k)
    dirs = space.directions
    best_val, best_c = -math.inf, c.copy()
    trace = []
    for t in range(1, iters + 1):
        val, j, v = min_eigen_objective(space.stack_at(c))
        if val > best_val:
            best_val, best_c = val, c.copy()
        trace.append(best_val)
        g = np.einsum("x,kxy,y->k", v.conj(), dirs[:, j], v).real
        c = c + (step0 / math.sqrt(t)) * g
    return DualOptimization(perturb_dual(space, best_c), best_val, trace, iters, best_c)
