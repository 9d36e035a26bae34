"""Wigner functions of Fock-truncated single-mode states on a phase-space grid.

Conventions: hbar = 1, Q = (a + a^H)/sqrt(2), P = (a - a^H)/(i sqrt(2)),

    W(q, p) = (2 pi)^-2 iint Tr(exp(i(s P + m Q)) rho) exp(-i(s p + m q)) ds dm
            = (2 pi)^-1 int <q + y/2| rho |q - y/2> exp(-i p y) dy,

so that iint W dq dp = 1 and Tr(A B) = 2 pi iint W_A W_B dq dp. The matrix
elements of |m><n| (m = n + k, k >= 0) have the closed form

    W_mn(q, p) = (-1)^n / pi * sqrt(n!/m!) * (sqrt(2) (q - i p))^k
                 * exp(-(q^2 + p^2)) * L_n^(k)(2 (q^2 + p^2)),

with W_nm = conj(W_mn). The inverse map uses the same kernel,
rho_mn = 2 pi iint W(q, p) W_nm(q, p) dq dp, which is the tight-frame
reconstruction with constant 2 pi.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .operators import HermitianOperator, as_operator, psd_check

MAX_CUTOFF = 40
STATE_TOL = 1e-10
IMAG_TOL = 1e-8
MIN_POINTS = 8


class FockState:
    """Density matrix in the number basis |0>, ..., |cutoff>."""

    def __init__(self, matrix, *, tol: float = STATE_TOL):
        op = as_operator(matrix)
        if op.dim - 1 > MAX_CUTOFF:
            raise ValueError(f"cutoff {op.dim - 1} exceeds the maximum {MAX_CUTOFF}")
        tr = op.trace()
        if abs(tr - 1.0) > tol:
            raise ValueError(f"Fock state must have unit trace, got {tr!r}")
        psd = psd_check(op, tol)
        if not psd.verdict:
            raise ValueError(f"Fock state must be positive semidefinite (lambda_min = {psd.lambda_min:.3e})")
        self.operator = op

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.entries

    @property
    def cutoff(self) -> int:
        return self.operator.dim - 1

    @classmethod
    def number(cls, n: int, cutoff: int | None = None) -> FockState:
        cutoff = n if cutoff is None else cutoff
        m = np.zeros((cutoff + 1, cutoff + 1))
        m[n, n] = 1.0
        return cls(m)

    @classmethod
    def pure(cls, amplitudes) -> FockState:
        psi = np.asarray(amplitudes, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def to_json(self) -> dict:
        return self.operator.to_json()

    @classmethod
    def from_json(cls, obj: dict) -> FockState:
        return cls(HermitianOperator.from_json(obj))


@dataclass(frozen=True)
class PhaseGrid:
    q_min: float
    q_max: float
    p_min: float
    p_max: float
    n_q: int
    n_p: int

    def __post_init__(self):
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise ValueError("grid bounds must satisfy q_max > q_min and p_max > p_min")
        if self.n_q < MIN_POINTS or self.n_p < MIN_POINTS:
            raise ValueError(f"grids need at least {MIN_POINTS} points per axis")

    @classmethod
    def parse(cls, text: str) -> PhaseGrid:
        """Build from ``"qmin,qmax,pmin,pmax,nq,np"``."""
        parts = [s.strip() for s in text.split(",")]
        if len(parts) != 6:
            raise ValueError(f"grid needs 6 comma-separated fields, got {text!r}")
        qmin, qmax, pmin, pmax = (float(x) for x in parts[:4])
        return cls(qmin, qmax, pmin, pmax, int(parts[4]), int(parts[5]))

    @classmethod
    def square(cls, half_width: float, n: int) -> PhaseGrid:
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @property
    def q(self) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / (self.n_q - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    def to_json(self) -> dict:
        return {
            "q_min": self.q_min,
            "q_max": self.q_max,
            "p_min": self.p_min,
            "p_max": self.p_max,
            "n_q": self.n_q,
            "n_p": self.n_p,
        }


DEFAULT_GRID = PhaseGrid.square(6.0, 201)


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class WignerGrid:
    grid: PhaseGrid
    values: np.ndarray  # shape (n_q, n_p)

    def integral(self) -> float:
        wq = trapezoid_weights(self.grid.n_q, self.grid.dq)
        wp = trapezoid_weights(self.grid.n_p, self.grid.dp)
        return float(wq @ self.values @ wp)

    def to_json(self) -> dict:
        return {"grid": self.grid.to_json(), "values": self.values.ravel().tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> WignerGrid:
        grid = PhaseGrid(**obj["grid"])
        values = np.asarray(obj["values"], dtype=float).reshape(grid.n_q, grid.n_p)
        return cls(grid, values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["q", "p", "W"])
        for i, q in enumerate(self.grid.q):
            for k, p in enumerate(self.grid.p):
                writer.writerow([repr(float(q)), repr(float(p)), repr(float(self.values[i, k]))])
        return buf.getvalue()


def _laguerre_columns(kmax: int, nmax: int, x: np.ndarray) -> Iterator[list[np.ndarray]]:
    # yields [L_0^(k)(x), ..., L_{nmax-k}^(k)(x)] for k = 0..kmax
    for k in range(kmax + 1):
        cols = [np.ones_like(x)]
        if nmax - k >= 1:
            cols.append(1.0 + k - x)
        for n in range(1, nmax - k):
            cols.append(((2 * n + 1 + k - x) * cols[n] - (n + k) * cols[n - 1]) / (n + 1))
        yield cols


def _kernel_terms(cutoff: int, q: np.ndarray, p: np.ndarray) -> Iterator[tuple[int, int, np.ndarray]]:
    """Yield (m, n, W_mn) for all m >= n <= cutoff, W_mn evaluated on broadcast (q, p)."""
    r2 = q * q + p * p
    gauss = np.exp(-r2) / math.pi
    z = math.sqrt(2.0) * (q - 1j * p)
    zk = np.ones_like(z)
    for k, cols in enumerate(_laguerre_columns(cutoff, cutoff, 2.0 * r2)):
        for n, lag in enumerate(cols):
            norm = math.exp(0.5 * (math.lgamma(n + 1) - math.lgamma(n + k + 1)))
            sign = -1.0 if n % 2 else 1.0
            yield n + k, n, (sign * norm) * gauss * lag * zk
        zk = zk * z


def fock_wigner_kernel(m: int, n: int, q, p):
    """Cross-Wigner function W_mn(q, p) of |m><n|; real when m == n."""
    if min(m, n) < 0 or max(m, n) > MAX_CUTOFF:
        raise ValueError(f"Fock indices must lie in [0, {MAX_CUTOFF}]")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    hi, lo = max(m, n), min(m, n)
    k = hi - lo
    r2 = q * q + p * p
    x = 2.0 * r2
    lag_prev, lag = np.zeros_like(x), np.ones_like(x)
    for j in range(lo):
        lag_prev, lag = lag, ((2 * j + 1 + k - x) * lag - (j + k) * lag_prev) / (j + 1)
    norm = math.exp(0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)))
    val = (-1) ** lo * norm / math.pi * np.exp(-r2) * lag * (math.sqrt(2.0) * (q - 1j * p)) ** k
    if m < n:
        val = np.conj(val)
    if m == n:
        val = val.real
    return val[()] if np.ndim(val) == 0 else val


def wigner_values(rho, q, p) -> np.ndarray:
    """W_rho at arbitrary broadcastable points; raises if the result is not real."""
    if isinstance(rho, FockState):
        mat = rho.matrix
    elif isinstance(rho, HermitianOperator):
        mat = rho.entries
    else:
        mat = np.asarray(rho, dtype=complex)
    q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    acc = np.zeros(q.shape, dtype=complex)
    for m, n, w in _kernel_terms(mat.shape[0] - 1, q, p):
        acc += mat[m, n] * w
        if m != n:
            acc += mat[n, m] * np.conj(w)
    resid = float(np.max(np.abs(acc.imag))) if acc.size else 0.0
    if resid > IMAG_TOL:
        raise ValueError(f"Wigner function has imaginary residue {resid:.3e}; input is not Hermitian")
    return acc.real


def wigner_transform(rho, grid: PhaseGrid = DEFAULT_GRID) -> WignerGrid:
    if not isinstance(rho, FockState):
        rho = FockState(rho)
    values = wigner_values(rho, grid.q[:, None], grid.p[None, :])
    values.setflags(write=False)
    return WignerGrid(grid, values)


class Marginals(NamedTuple):
    q_density: np.ndarray
    p_density: np.ndarray


def marginals(w: WignerGrid) -> Marginals:
    """Position density (integrate over p) and momentum density (integrate over q)."""
    wq = trapezoid_weights(w.grid.n_q, w.grid.dq)
    wp = trapezoid_weights(w.grid.n_p, w.grid.dp)
    return Marginals(w.values @ wp, wq @ w.values)


def density_integral(density: np.ndarray, axis: np.ndarray) -> float:
    return float(trapezoid_weights(axis.size, axis[1] - axis[0]) @ density)


class Reconstruction(NamedTuple):
    matrix: HermitianOperator
    max_error: float | None


def reconstruct_from_wigner(w: WignerGrid, cutoff: int, source=None) -> Reconstruction:
    """Invert the transform: rho_mn = 2 pi iint W(q, p) W_nm(q, p) dq dp.

    The grid has to cover the state's support; |q|, |p| <= sqrt(2 cutoff) + 4
    is a safe rule for states confined to the first ``cutoff`` levels.
    Accuracy is reported against ``source`` when given, never enforced.
    """
    if cutoff < 0 or cutoff > MAX_CUTOFF:
        raise ValueError(f"cutoff must lie in [0, {MAX_CUTOFF}]")
    g = w.grid
    wq = trapezoid_weights(g.n_q, g.dq)
    wp = trapezoid_weights(g.n_p, g.dp)
    weighted = (2.0 * math.pi) * wq[:, None] * w.values * wp[None, :]
    q, p = g.q[:, None], g.p[None, :]
    rho = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    for m, n, kern in _kernel_terms(cutoff, q, p):
        # integrand for rho_mn uses W_nm = conj(W_mn)
        val = np.sum(weighted * np.conj(kern))
        rho[m, n] = val
        rho[n, m] = np.conj(val)
    op = HermitianOperator(rho, tol=1e-10)
    err = None
    if source is not None:
        src = source.matrix if isinstance(source, FockState) else as_operator(source).entries
        size = max(src.shape[0], cutoff + 1)
        a = np.zeros((size, size), dtype=complex)
        b = np.zeros((size, size), dtype=complex)
        a[: cutoff + 1, : cutoff + 1] = rho
        b[: src.shape[0], : src.shape[0]] = src
        err = float(np.max(np.abs(a - b)))
    return Reconstruction(op, err)
