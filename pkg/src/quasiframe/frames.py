"""Operator frames for Herm(d): constructions and analysis.

A frame here is a finite ordered family of Hermitian operators F_j that
sum to the identity. Its synthesis matrix G has row j equal to the real
coordinates of F_j (see :mod:`quasiframe.operators`), so the frame
coefficients of A are ``G @ vectorize(A)`` and the frame operator is
``G.T @ G``.

Phase-point operators (prime d)
-------------------------------
With X|k> = |k+1 mod d>, Z|k> = w^k |k>, w = exp(2 pi i / d):

* d = 2:  A_(q,p) = (I + (-1)^q Z + (-1)^p X + (-1)^(q+p) Y) / 2
* d odd:  A_(q,p) = X^q Z^p P Z^-p X^-q,  P|k> = |-k mod d>

Both satisfy Tr(A_u A_v) = d delta_uv, Tr(A_u) = 1 and sum_u A_u = d I,
so the frame elements are F_(q,p) = A_(q,p) / d.

Mutually unbiased bases (prime d)
---------------------------------
The computational basis followed by, for a = 0..d-1, the bases
|e^a_b> = d^-1/2 sum_k w^(a k^2 + b k) |k>  (odd d). For d = 2 the
three bases are the eigenbases of Z, X and Y in that order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .operators import (
    HermitianOperator,
    as_operator,
    eig_hermitian,
    ginibre,
    make_rng,
    psd_check,
    random_hermitian,
    vectorize_array,
)

SUM_TOL = 1e-10
LOAD_SUM_TOL = 1e-8
RANK_TOL = 1e-10
MAX_PRIME = 31
MAX_RETRIES = 100

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NotInformationallyComplete(ValueError):
    """The frame does not span Herm(d)."""


class Frame:
    """Ordered family of Hermitian operators summing to the identity.

    Parameters
    ----------
    elements : sequence of HermitianOperator or array_like
        The operators F_j, all of the same dimension.
    labels : sequence of str, optional
        Names for the index set; defaults to ``"0", "1", ...``.
    sum_tol : float
        Allowed max-entry deviation of ``sum_j F_j`` from the identity.
    """

    def __init__(self, elements: Sequence, labels: Sequence[str] | None = None, *, sum_tol: float = SUM_TOL):
        ops = tuple(as_operator(e) for e in elements)
        if not ops:
            raise ValueError("a frame needs at least one element")
        d = ops[0].dim
        if any(op.dim != d for op in ops):
            raise ValueError("frame elements have mixed dimensions")
        if labels is None:
            labels = [str(j) for j in range(len(ops))]
        labels = tuple(str(x) for x in labels)
        if len(labels) != len(ops):
            raise ValueError(f"{len(labels)} labels for {len(ops)} elements")
        if len(set(labels)) != len(labels):
            raise ValueError("frame labels must be unique")
        stack = np.array([op.entries for op in ops])
        dev = float(np.max(np.abs(stack.sum(axis=0) - np.eye(d))))
        if dev > sum_tol:
            raise ValueError(f"frame elements must sum to the identity: max deviation {dev:.3e} > {sum_tol:.1e}")
        stack.setflags(write=False)
        self.dim = d
        self.elements = ops
        self.labels = labels
        self.stack = stack
        self._synthesis: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"Frame(dim={self.dim}, n={len(self)})"

    @property
    def synthesis(self) -> np.ndarray:
        """n x d^2 real matrix whose rows are the coordinates of the F_j."""
        if self._synthesis is None:
            g = vectorize_array(self.stack)
            g.setflags(write=False)
            self._synthesis = g
        return self._synthesis

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "labels": list(self.labels),
            "elements": [op.to_json() for op in self.elements],
        }

    @classmethod
    def from_json(cls, obj: dict) -> Frame:
        try:
            d = int(obj["dim"])
            elements = [HermitianOperator.from_json(e) for e in obj["elements"]]
            labels = obj.get("labels")
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed frame JSON: {exc}") from exc
        if any(e.dim != d for e in elements):
            raise ValueError(f"frame JSON declares dim {d} but an element disagrees")
        return cls(elements, labels, sum_tol=LOAD_SUM_TOL)

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON serialization."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


class FrameBounds(NamedTuple):
    a: float
    b: float


@dataclass(frozen=True)
class FrameReport:
    bounds: FrameBounds
    informationally_complete: bool
    is_povm: bool
    is_tight: bool
    gram_rank: int

    def summary(self) -> str:
        a, b = self.bounds
        if not self.informationally_complete:
            kind = "not informationally complete"
        elif self.is_povm:
            kind = "IC-POVM"
        else:
            kind = "IC frame"
        if self.is_tight:
            return f"tight {kind}, a=b={a:.4g}"
        return f"{kind}, bounds ({a:.4g}, {b:.4g})"

    def to_json(self) -> dict:
        return {
            "a": self.bounds.a,
            "b": self.bounds.b,
            "informationally_complete": self.informationally_complete,
            "is_povm": self.is_povm,
            "is_tight": self.is_tight,
            "gram_rank": self.gram_rank,
        }


def frame_bounds(frame: Frame) -> FrameBounds:
    """Extreme eigenvalues of the frame operator G^T G.

    For every Hermitian A, ``a Tr(A^2) <= sum_j Tr(F_j A)^2 <= b Tr(A^2)``.
    A non-informationally-complete frame gives ``a`` near zero.
    """
    g = frame.synthesis
    w = np.linalg.eigvalsh(g.T @ g)
    return FrameBounds(float(max(w[0], 0.0)), float(w[-1]))


def gram_rank(frame: Frame, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(frame.synthesis, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def is_informationally_complete(frame: Frame, tol: float = RANK_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return gram_rank(frame, tol) == frame.dim**2


def is_povm(frame: Frame, tol: float = 1e-10) -> bool:
    return all(psd_check(op, tol).verdict for op in frame.elements)


def is_tight(frame: Frame, tol: float = 1e-9) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    a, b = frame_bounds(frame)
    return b > 0 and (b - a) / b <= tol


def frame_report(frame: Frame, tol: float = RANK_TOL) -> FrameReport:
    bounds = frame_bounds(frame)
    rank = gram_rank(frame, tol)
    return FrameReport(
        bounds=bounds,
        informationally_complete=rank == frame.dim**2,
        is_povm=is_povm(frame),
        is_tight=is_tight(frame),
        gram_rank=rank,
    )


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, math.isqrt(n) + 1))


def _check_prime(d: int) -> int:
    if int(d) != d or not is_prime(int(d)):
        raise ValueError(f"d must be prime, got {d}")
    if d > MAX_PRIME:
        raise ValueError(f"d must be at most {MAX_PRIME}, got {d}")
    return int(d)


def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return x, z


def phase_point_operators(d: int) -> dict[tuple[int, int], np.ndarray]:
    """Wootters phase-point operators A_(q,p) for prime d, keyed by (q, p)."""
    d = _check_prime(d)
    if d == 2:
        eye = np.eye(2, dtype=complex)
        return {
            (q, p): (eye + (-1) ** q * PAULI_Z + (-1) ** p * PAULI_X + (-1) ** (q + p) * PAULI_Y) / 2
            for q in range(2)
            for p in range(2)
        }
    x, z = shift_clock(d)
    parity = np.zeros((d, d), dtype=complex)
    parity[(-np.arange(d)) % d, np.arange(d)] = 1.0
    out = {}
    for q in range(d):
        xq = np.linalg.matrix_power(x, q)
        for p in range(d):
            disp = xq @ np.linalg.matrix_power(z, p)
            out[(q, p)] = disp @ parity @ disp.conj().T
    return out


def wootters_frame(d: int) -> Frame:
    ops = phase_point_operators(d)
    keys = sorted(ops)
    return Frame([ops[k] / d for k in keys], [f"({q},{p})" for q, p in keys])


SIC_BLOCH = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)


def sic_projectors_qubit() -> list[np.ndarray]:
    eye = np.eye(2, dtype=complex)
    return [(eye + b[0] * PAULI_X + b[1] * PAULI_Y + b[2] * PAULI_Z) / 2 for b in SIC_BLOCH]


def sic_frame_qubit() -> Frame:
    return Frame([p / 2 for p in sic_projectors_qubit()], [f"sic{j}" for j in range(4)])


def mub_bases(d: int) -> list[np.ndarray]:
    """The d + 1 mutually unbiased bases as unitary matrices (columns are vectors)."""
    d = _check_prime(d)
    if d == 2:
        s = 1 / math.sqrt(2)
        return [
            np.eye(2, dtype=complex),
            np.array([[s, s], [s, -s]], dtype=complex),
            np.array([[s, s], [1j * s, -1j * s]], dtype=complex),
        ]
    k = np.arange(d)
    bases = [np.eye(d, dtype=complex)]
    for a in range(d):
        cols = [np.exp(2j * np.pi * ((a * k * k + b * k) % d) / d) / math.sqrt(d) for b in range(d)]
        bases.append(np.column_stack(cols))
    return bases


def mub_frame(d: int) -> Frame:
    bases = mub_bases(d)
    elements, labels = [], []
    for a, u in enumerate(bases):
        for b in range(d):
            v = u[:, b]
            elements.append(np.outer(v, v.conj()) / (d + 1))
            labels.append(f"mub{a}.{b}")
    return Frame(elements, labels)


def _check_size(d: int, n: int) -> None:
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    if n < d * d:
        raise ValueError(f"need n >= d^2 = {d * d} elements, got {n}")


def _inv_sqrt(s: np.ndarray) -> np.ndarray:
    w, v = eig_hermitian(s)
    return (v / np.sqrt(w)) @ v.conj().T


def random_ic_povm(d: int, n: int, seed: int) -> Frame:
    """Random IC-POVM: Wishart elements G_j rescaled by S^-1/2 on both sides."""
    _check_size(d, n)
    for attempt in range(MAX_RETRIES):
        rng = make_rng(seed, attempt)
        gs = []
        for _ in range(n):
            m = ginibre(rng, d)
            gs.append(m @ m.conj().T)
        gs = np.array(gs)
        r = _inv_sqrt(gs.sum(axis=0))
        elements = np.array([r @ g @ r for g in gs])
        elements = 0.5 * (elements + elements.conj().transpose(0, 2, 1))
        frame = Frame(elements, [f"e{j}" for j in range(n)])
        if is_informationally_complete(frame):
            return frame
    raise RuntimeError(f"no informationally complete POVM after {MAX_RETRIES} attempts")


def random_frame(d: int, n: int, seed: int) -> Frame:
    """Random frame with Gaussian elements shifted so they sum to I; generally not positive."""
    _check_size(d, n)
    eye = np.eye(d)
    for attempt in range(MAX_RETRIES):
        rng = make_rng(seed, attempt)
        gs = np.array([random_hermitian(rng, d) for _ in range(n)])
        elements = gs + (eye - gs.sum(axis=0)) / n
        frame = Frame(elements, [f"f{j}" for j in range(n)])
        if is_informationally_complete(frame):
            return frame
    raise RuntimeError(f"no informationally complete frame after {MAX_RETRIES} attempts")


def builtin_frames() -> dict[str, Frame]:
    """The named frames used throughout the test and acceptance suites."""
    return {
        "wootters2": wootters_frame(2),
        "wootters3": wootters_frame(3),
        "wootters5": wootters_frame(5),
        "sic2": sic_frame_qubit(),
        "mub2": mub_frame(2),
        "mub3": mub_frame(3),
    }
