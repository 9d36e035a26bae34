"""Dense Hermitian linear algebra on C^d.

Everything here works on small (d <= 64) dense complex matrices. The
eigensolver is a cyclic complex Jacobi iteration so results are exactly
reproducible across platforms, and random sampling uses numpy's Philox
counter-based generator keyed directly by the integer seed.

The real coordinate system for Herm(d) is fixed as follows (all basis
elements are orthonormal in the trace inner product):

    index 0                  I / sqrt(d)
    then, for j < k          (E_jk + E_kj) / sqrt(2)          symmetric
    then, for j < k          (-i E_jk + i E_kj) / sqrt(2)     antisymmetric
    then, for l = 1..d-1     (sum_{m<l} E_mm - l E_ll) / sqrt(l (l + 1))

with the (j, k) pairs enumerated in lexicographic order.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TOL_HERM = 1e-12
MAX_DIM = 64
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100
TIE_DECIMALS = 9


class HermitianOperator:
    """Immutable d x d complex Hermitian matrix.

    The stored entries are symmetrized, ``(M + M^H) / 2``, after the
    Hermiticity check so that downstream arithmetic sees an exactly
    Hermitian array.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, *, tol: float = TOL_HERM):
        m = np.array(entries, dtype=complex)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        d = m.shape[0]
        if d < 1:
            raise ValueError("operator dimension must be at least 1")
        if d > MAX_DIM:
            raise ValueError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        dev = float(np.max(np.abs(m - m.conj().T)))
        if dev > tol:
            raise ValueError(f"operator is not Hermitian: max |A - A^H| = {dev:.3e} > {tol:.1e}")
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        self._entries = m

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries.copy()
        return self._entries.astype(dtype)

    def __repr__(self) -> str:
        return f"HermitianOperator(dim={self.dim})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._entries, other._entries))

    __hash__ = None

    def __add__(self, other: HermitianOperator) -> HermitianOperator:
        return HermitianOperator(self._entries + as_operator(other).entries)

    def __sub__(self, other: HermitianOperator) -> HermitianOperator:
        return HermitianOperator(self._entries - as_operator(other).entries)

    def __neg__(self) -> HermitianOperator:
        return HermitianOperator(-self._entries)

    def __mul__(self, scalar: float) -> HermitianOperator:
        if isinstance(scalar, complex) or np.iscomplexobj(scalar):
            raise TypeError("Hermitian operators only scale by real numbers")
        return HermitianOperator(float(scalar) * self._entries)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> HermitianOperator:
        return self * (1.0 / float(scalar))

    def trace(self) -> float:
        return float(np.trace(self._entries).real)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "re": self._entries.real.tolist(),
            "im": self._entries.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict, *, tol: float = TOL_HERM) -> HermitianOperator:
        try:
            d = int(obj["dim"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed operator JSON: {exc}") from exc
        if re.shape != (d, d) or im.shape != (d, d):
            raise ValueError(f"operator JSON declares dim {d} but carries shapes {re.shape}, {im.shape}")
        return cls(re + 1j * im, tol=tol)

    @classmethod
    def identity(cls, d: int) -> HermitianOperator:
        return cls(np.eye(d))

    @classmethod
    def projector(cls, vector) -> HermitianOperator:
        """Rank-1 projector onto the normalized ``vector``."""
        v = np.asarray(vector, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


def as_operator(a) -> HermitianOperator:
    if isinstance(a, HermitianOperator):
        return a
    return HermitianOperator(a)


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class PsdResult(NamedTuple):
    verdict: bool
    lambda_min: float
    witness: np.ndarray


@dataclass(frozen=True)
class RealCoordinates:
    dim: int
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).ravel()
        if c.size != self.dim**2:
            raise ValueError(f"expected {self.dim ** 2} coordinates for dim {self.dim}, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)


def trace_inner(a, b) -> float:
    """Hilbert-Schmidt pairing Tr(AB) of two Hermitian operators (always real)."""
    a, b = as_operator(a), as_operator(b)
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    # Tr(AB) = sum_ik A_ik B_ki = sum_ik A_ik conj(B_ik) for Hermitian B
    return float(np.vdot(b.entries, a.entries).real)


def _jacobi(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array(m, dtype=complex)
    d = a.shape[0]
    v = np.eye(d, dtype=complex)
    scale = float(np.linalg.norm(a))
    if d == 1 or scale == 0.0:
        return a.diagonal().real.copy(), v
    target = JACOBI_TOL * scale
    tiny = 1e-300
    for _ in range(JACOBI_MAX_SWEEPS):
        off = float(np.linalg.norm(a - np.diag(a.diagonal())))
        if off < target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                r = abs(apq)
                if r < tiny:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                theta = 0.5 * math.atan2(2.0 * r, app - aqq)
                c, s = math.cos(theta), math.sin(theta)
                ph = apq / r
                # U = diag(1, conj(ph)) @ [[c, -s], [s, c]] acting on the (p, q) plane
                cp = a[:, p].copy()
                cq = a[:, q].copy()
                a[:, p] = c * cp + (ph.conjugate() * s) * cq
                a[:, q] = -s * cp + (ph.conjugate() * c) * cq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp + (ph * s) * rq
                a[q, :] = -s * rp + (ph * c) * rq
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp + (ph.conjugate() * s) * vq
                v[:, q] = -s * vp + (ph.conjugate() * c) * vq
    else:
        raise RuntimeError("Jacobi eigensolver failed to converge")
    return a.diagonal().real.copy(), v


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    mags = np.abs(vec)
    k = int(np.argmax(mags > 10.0 ** (-TIE_DECIMALS)))
    return vec * (abs(vec[k]) / vec[k])


def _tie_key(vec: np.ndarray) -> tuple:
    r = np.round(vec, TIE_DECIMALS)
    return tuple(x for z in r for x in (z.real, z.imag))


def eig_hermitian(a) -> Spectrum:
    """Eigendecomposition by cyclic complex Jacobi rotations.

    Eigenvalues come back ascending. Each eigenvector is rephased so its
    first non-negligible entry is real positive; eigenvalues that agree to
    within 1e-9 (relative to max(1, |A|_max)) are ordered by the
    lexicographic order of their rounded eigenvector entries.
    """
    op = as_operator(a)
    w, v = _jacobi(op.entries)
    v = np.column_stack([_fix_phase(v[:, k]) for k in range(v.shape[1])])
    order = list(np.argsort(w, kind="stable"))
    gap = 10.0 ** (-TIE_DECIMALS) * max(1.0, float(np.max(np.abs(op.entries))))
    out: list[int] = []
    i = 0
    while i < len(order):
        j = i + 1
        while j < len(order) and w[order[j]] - w[order[j - 1]] <= gap:
            j += 1
        cluster = order[i:j]
        if len(cluster) > 1:
            cluster = sorted(cluster, key=lambda k: _tie_key(v[:, k]))
        out.extend(cluster)
        i = j
    w = w[out]
    v = v[:, out]
    w.setflags(write=False)
    v.setflags(write=False)
    return Spectrum(w, v)


def lambda_min(a) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and its (deterministically chosen) eigenvector."""
    sp = eig_hermitian(a)
    return float(sp.eigenvalues[0]), sp.eigenvectors[:, 0].copy()


def psd_check(a, tol: float = 0.0) -> PsdResult:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    lam, vec = lambda_min(a)
    return PsdResult(lam >= -tol, lam, vec)


@functools.lru_cache(maxsize=None)
def hermitian_basis(d: int) -> np.ndarray:
    """The fixed orthonormal Hermitian basis as a read-only (d^2, d, d) array."""
    if d < 1 or d > MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {d}")
    mats = [np.eye(d, dtype=complex) / math.sqrt(d)]
    pairs = [(j, k) for j in range(d) for k in range(j + 1, d)]
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = m[k, j] = 1 / math.sqrt(2)
        mats.append(m)
    for j, k in pairs:
        m = np.zeros((d, d), dtype=complex)
        m[j, k] = -1j / math.sqrt(2)
        m[k, j] = 1j / math.sqrt(2)
        mats.append(m)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        mats.append(np.diag(diag / math.sqrt(l * (l + 1))).astype(complex))
    basis = np.array(mats)
    basis.setflags(write=False)
    return basis


@functools.lru_cache(maxsize=None)
def _coord_matrix(d: int) -> np.ndarray:
    m = hermitian_basis(d).conj().reshape(d * d, d * d)
    m.setflags(write=False)
    return m


def vectorize_array(stack: np.ndarray) -> np.ndarray:
    """Coordinates of a (..., d, d) stack of Hermitian matrices, shape (..., d^2)."""
    stack = np.asarray(stack)
    d = stack.shape[-1]
    flat = stack.reshape(stack.shape[:-2] + (d * d,))
    return (flat @ _coord_matrix(d).T).real


def devectorize_array(coords: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vectorize_array`: (..., d^2) -> (..., d, d)."""
    coords = np.asarray(coords, dtype=float)
    if coords.shape[-1] != d * d:
        raise ValueError(f"expected trailing length {d * d}, got {coords.shape[-1]}")
    return np.tensordot(coords, hermitian_basis(d), axes=(-1, 0))


def vectorize(a) -> RealCoordinates:
    op = as_operator(a)
    return RealCoordinates(op.dim, vectorize_array(op.entries))


def devectorize(c) -> HermitianOperator:
    if isinstance(c, RealCoordinates):
        return HermitianOperator(devectorize_array(c.coords, c.dim))
    arr = np.asarray(c, dtype=float).ravel()
    d = math.isqrt(arr.size)
    if d * d != arr.size or d == 0:
        raise ValueError(f"coordinate length {arr.size} is not a perfect square")
    return HermitianOperator(devectorize_array(arr, d))


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by ``seed``; ``stream`` jumps to an independent substream."""
    bitgen = np.random.Philox(key=int(seed))
    if stream:
        bitgen = bitgen.jumped(int(stream))
    return np.random.Generator(bitgen)


def _check_dim(d: int) -> int:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    if d > MAX_DIM:
        raise ValueError(f"dimension {d} exceeds the supported maximum {MAX_DIM}")
    return int(d)


def ginibre(rng: np.random.Generator, d: int) -> np.ndarray:
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_state(d: int, seed: int) -> HermitianOperator:
    """Density matrix G G^H / Tr(G G^H) with G complex Gaussian."""
    d = _check_dim(d)
    g = ginibre(make_rng(seed), d)
    rho = g @ g.conj().T
    return HermitianOperator(rho / np.trace(rho).real)


def random_effect(d: int, seed: int) -> HermitianOperator:
    """Effect U diag(u) U^H with u uniform on [0, 1] and U Haar-distributed."""
    d = _check_dim(d)
    rng = make_rng(seed)
    u = haar_unitary(rng, d)
    vals = rng.uniform(0.0, 1.0, size=d)
    return HermitianOperator((u * vals) @ u.conj().T)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    return devectorize_array(rng.standard_normal(d * d), d)
