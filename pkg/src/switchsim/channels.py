"""Kraus-operator quantum channels.

A :class:`KrausChannel` is an immutable ordered list of Kraus matrices.
Channel identity is judged through the Choi matrix, never through the
particular Kraus list, since the same channel has many decompositions.

Choi convention: input factor first,
``J = sum_ij |i><j| (x) Lambda(|i><j|)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .linalg import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, as_matrix, partial_trace

CPTP_TOL = 1e-9
PROB_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Quantum channel ``rho -> sum_i K_i rho K_i^dagger``.

    Construction checks shapes and finiteness only. Trace preservation is
    checked by :func:`validate_cptp`, because trace-decreasing conditional
    maps are built from the same machinery.
    """

    kraus: tuple[np.ndarray, ...]
    label: str = ""
    dim_in: int = field(init=False)
    dim_out: int = field(init=False)

    def __post_init__(self):
        ops = tuple(as_matrix(k).copy() for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise ValueError("Kraus operators must share one shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "dim_out", shape[0])
        object.__setattr__(self, "dim_in", shape[1])

    def __len__(self) -> int:
        return len(self.kraus)

    def __call__(self, rho) -> np.ndarray:
        return apply(self, rho)

    @cached_property
    def stacked(self) -> np.ndarray:
        """Kraus operators as one read-only ``(n, dim_out, dim_in)`` array."""
        k = np.stack(self.kraus)
        k.setflags(write=False)
        return k

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "dim_in": self.dim_in,
            "dim_out": self.dim_out,
            "kraus": [matrix_to_pairs(k) for k in self.kraus],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KrausChannel":
        dim_in, dim_out = int(data["dim_in"]), int(data["dim_out"])
        ops = [pairs_to_matrix(k, dim_out, dim_in) for k in data["kraus"]]
        return cls(tuple(ops), label=data.get("label", ""))


def matrix_to_pairs(m: np.ndarray) -> list[list[float]]:
    """Row-major ``[[re, im], ...]`` list, the wire format for matrices."""
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def pairs_to_matrix(pairs, rows: int, cols: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape != (rows * cols, 2):
        raise ValueError(f"expected {rows * cols} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def apply(ch: KrausChannel, rho) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise ValueError(f"channel expects a {ch.dim_in}x{ch.dim_in} input, got {rho.shape}")
    k = ch.stacked
    return np.einsum("nab,bc,ndc->ad", k, rho, k.conj())


def compose(after: KrausChannel, before: KrausChannel) -> KrausChannel:
    """Sequential composition ``after o before`` with Kraus set ``{F_j E_i}``.

    The ordering of the result is ``after``-index major, so element
    ``j * len(before) + i`` is ``after.kraus[j] @ before.kraus[i]``.
    """
    if before.dim_out != after.dim_in:
        raise ValueError(
            f"cannot compose: inner output dim {before.dim_out} != outer input dim {after.dim_in}"
        )
    ops = tuple(f @ e for f in after.kraus for e in before.kraus)
    return KrausChannel(ops, label=f"{after.label or 'F'}*{before.label or 'E'}")


@dataclass(frozen=True)
class CPTPReport:
    max_completeness_residual: float
    tol: float = CPTP_TOL

    @property
    def passed(self) -> bool:
        return self.max_completeness_residual < self.tol


def completeness_residual(ch: KrausChannel) -> float:
    k = ch.stacked
    total = np.einsum("nba,nbc->ac", k.conj(), k)
    return float(np.max(np.abs(total - np.eye(ch.dim_in))))


def validate_cptp(ch: KrausChannel, tol: float = CPTP_TOL) -> CPTPReport:
    return CPTPReport(completeness_residual(ch), tol)


def kraus_choi(kraus) -> np.ndarray:
    """Choi matrix (input factor first) of ``rho -> sum_K K rho K^dagger``.

    Works for any stack of Kraus operators, including the non-trace-
    preserving conditional maps of a heralded measurement.
    """
    k = np.asarray(kraus, dtype=complex)
    if k.ndim == 2:
        k = k[None]
    n, d_out, d_in = k.shape
    # column vector sum_i |i> (x) K|i>  ==  K^T flattened row-major
    vecs = np.transpose(k, (0, 2, 1)).reshape(n, d_in * d_out)
    return vecs.T @ vecs.conj()


def choi(ch: KrausChannel) -> np.ndarray:
    return kraus_choi(ch.stacked)


def choi_trace_residual(j: np.ndarray, dim_in: int, dim_out: int) -> float:
    """Distance of the output-traced Choi matrix from the identity."""
    reduced = partial_trace(j, [dim_in, dim_out], keep=[0])
    return float(np.max(np.abs(reduced - np.eye(dim_in))))


def choi_distance(a: KrausChannel, b: KrausChannel) -> float:
    ja, jb = choi(a), choi(b)
    if ja.shape != jb.shape:
        raise ValueError("channels act on different spaces")
    return float(np.max(np.abs(ja - jb)))


def _check_prob(name: str, x: float) -> float:
    x = float(x)
    if not np.isfinite(x) or x < 0.0 or x > 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),), label="identity")


def pauli_channel(p0: float, p1: float, p2: float) -> KrausChannel:
    """Pauli channel with Kraus set ``sqrt(p0) I, sqrt(p1) Y, sqrt(p2) Z``."""
    p0, p1, p2 = (_check_prob(n, p) for n, p in (("p0", p0), ("p1", p1), ("p2", p2)))
    if abs(p0 + p1 + p2 - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"probabilities must sum to 1, got {p0 + p1 + p2!r}")
    ops = (np.sqrt(p0) * I2, np.sqrt(p1) * SIGMA_Y, np.sqrt(p2) * SIGMA_Z)
    return KrausChannel(ops, label=f"pauli({p0:.6g},{p1:.6g},{p2:.6g})")


def bit_flip(r: float) -> KrausChannel:
    r = _check_prob("r", r)
    return KrausChannel((np.sqrt(1 - r) * I2, np.sqrt(r) * SIGMA_X), label=f"bitflip({r:.6g})")


def phase_flip(s: float) -> KrausChannel:
    s = _check_prob("s", s)
    return KrausChannel((np.sqrt(1 - s) * I2, np.sqrt(s) * SIGMA_Z), label=f"phaseflip({s:.6g})")


def remix_kraus(ch: KrausChannel, isometry, tol: float = 1e-9) -> KrausChannel:
    """Re-express ``ch`` with Kraus operators ``K'_a = sum_i V[a, i] K_i``.

    ``isometry`` must be ``m' x m`` with ``V^dagger V = I_m`` (``m`` the
    Kraus count), which leaves the channel unchanged.
    """
    v = as_matrix(isometry)
    m = len(ch)
    if v.shape[1] != m or v.shape[0] < m:
        raise ValueError(f"mixing matrix must be m' x {m} with m' >= {m}, got {v.shape}")
    if float(np.max(np.abs(v.conj().T @ v - np.eye(m)))) > tol:
        raise ValueError("mixing matrix is not an isometry")
    ops = np.einsum("ai,ibc->abc", v, ch.stacked)
    return KrausChannel(tuple(ops), label=ch.label)

