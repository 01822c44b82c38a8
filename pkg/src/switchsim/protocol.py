"""One-shot heralded qubit transmission through a switch.

The receiver prepares the order register in ``omega``, the target goes
through the switch, and each order qubit is measured in a chosen basis.
Every outcome defines a (trace-decreasing) conditional map on the target.
An outcome heralds perfect transfer when that map is proportional to a
unitary conjugation, which the receiver then undoes.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import KrausChannel, kraus_choi, matrix_to_pairs
from .linalg import (
    KET_0,
    KET_1,
    KET_MINUS,
    KET_PLUS,
    PAULIS,
    as_matrix,
    density_matrix,
    ket_to_dm,
    tensor,
)
from .switch import SwitchChannel

RANK_TOL = 1e-9
UNITARY_TOL = 1e-8
PROB_FLOOR = 1e-12
PAULI_MATCH_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Per-order-qubit orthonormal measurement bases, ``omega`` first."""

    vectors: tuple[tuple[np.ndarray, np.ndarray], ...]
    symbols: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if len(self.vectors) != len(self.symbols):
            raise ValueError("need one symbol pair per qubit")
        for a, b in self.vectors:
            a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
            gram = np.array([[np.vdot(a, a), np.vdot(a, b)], [np.vdot(b, a), np.vdot(b, b)]])
            if a.shape != (2,) or b.shape != (2,) or np.max(np.abs(gram - np.eye(2))) > 1e-10:
                raise ValueError("each qubit needs an orthonormal pair of 2-vectors")

    @classmethod
    def plus_minus(cls, n_qubits: int) -> "MeasurementBasis":
        return cls(((KET_PLUS, KET_MINUS),) * n_qubits, (("+", "-"),) * n_qubits)

    @classmethod
    def computational(cls, n_qubits: int) -> "MeasurementBasis":
        return cls(((KET_0, KET_1),) * n_qubits, (("0", "1"),) * n_qubits)

    @classmethod
    def from_vectors(cls, pairs: Sequence[tuple]) -> "MeasurementBasis":
        pairs = tuple((np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in pairs)
        return cls(pairs, (("0", "1"),) * len(pairs))

    @property
    def n_qubits(self) -> int:
        return len(self.vectors)

    def outcomes(self) -> list[tuple[str, np.ndarray]]:
        """All ``(label, joint basis vector)`` pairs in lexicographic order."""
        result = []
        for idx in itertools.product((0, 1), repeat=self.n_qubits):
            label = "".join(self.symbols[q][i] for q, i in enumerate(idx))
            vec = tensor(*(self.vectors[q][i] for q, i in enumerate(idx)))
            result.append((label, vec))
        return result


@dataclass(eq=False)
class HeraldOutcome:
    label: str
    probability: float
    perfect: bool
    correction: np.ndarray | None
    conditional_choi: np.ndarray
    conditional_kraus: np.ndarray = field(repr=False)

    @property
    def classification(self) -> str:
        return "perfect" if self.perfect else "noisy"

    @property
    def correction_label(self) -> str | None:
        if self.correction is None:
            return None
        return pauli_label(self.correction) or "generic unitary"

    def conditional_state(self, rho, normalize: bool = True) -> np.ndarray:
        """Target state left by this outcome for input ``rho``."""
        k = self.conditional_kraus
        out = np.einsum("nab,bc,ndc->ad", k, as_matrix(rho), k.conj())
        if normalize:
            out = out / np.trace(out).real
        return out

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "probability": self.probability,
            "class": self.classification,
            "correction": self.correction_label,
            "correction_matrix": None if self.correction is None else matrix_to_pairs(self.correction),
        }


@dataclass(eq=False)
class ProtocolReport:
    outcomes: list[HeraldOutcome]
    success_probability: float
    control_state: np.ndarray
    provenance: dict

    def outcome(self, label: str) -> HeraldOutcome:
        for o in self.outcomes:
            if o.label == label:
                return o
        raise KeyError(label)

    @property
    def perfect_labels(self) -> list[str]:
        return [o.label for o in self.outcomes if o.perfect]

    def to_dict(self) -> dict:
        return {
            "success_probability": self.success_probability,
            "outcomes": [o.to_dict() for o in self.outcomes],
        }


def pauli_label(u: np.ndarray, tol: float = PAULI_MATCH_TOL) -> str | None:
    """Name of the Pauli matrix equal to ``u`` up to a global phase, if any."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        return None
    for name, p in PAULIS.items():
        overlap = np.trace(p.conj().T @ u) / 2
        if abs(overlap) < 1e-12:
            continue
        if np.max(np.abs(u - overlap / abs(overlap) * p)) < tol:
            return name
    return None


def _fix_phase(u: np.ndarray) -> np.ndarray:
    flat = u.reshape(-1)
    k = int(np.argmax(np.abs(flat) > 1e-8))
    return u * (abs(flat[k]) / flat[k])


def classify_outcome(
    conditional_choi, rank_tol: float = RANK_TOL, unitary_tol: float = UNITARY_TOL
) -> np.ndarray | None:
    """Recovery unitary if the conditional map is a scaled unitary conjugation, else ``None``.

    The map ``rho -> q M rho M^dagger`` has a rank-1 Choi matrix whose top
    eigenvector reshapes to ``M``. The test requires the second eigenvalue
    to be below ``rank_tol`` relative to the first and ``M^dagger M`` to be
    proportional to the identity within ``unitary_tol``. The returned
    matrix is ``U^dagger`` for ``U = M / |det M|**(1/d)``, with the global
    phase fixed so that its first nonzero entry is real and positive.
    """
    j = np.asarray(conditional_choi, dtype=complex)
    w, v = np.linalg.eigh((j + j.conj().T) / 2)
    top = w[-1]
    if top <= 0:
        return None
    if len(w) > 1 and w[-2] / top >= rank_tol:
        return None
    d = int(round(np.sqrt(j.shape[0])))
    m = v[:, -1].reshape(d, d).T
    gram = m.conj().T @ m
    gram = gram / (np.trace(gram).real / d)
    if np.max(np.abs(gram - np.eye(d))) >= unitary_tol:
        return None
    u = m / abs(np.linalg.det(m)) ** (1.0 / d)
    return _fix_phase(u.conj().T)


def default_control(n_qubits: int) -> np.ndarray:
    return tensor(*([KET_PLUS] * n_qubits))


def _control_components(omega, dim: int) -> np.ndarray:
    """Rows ``sqrt(lambda_c) |phi_c>`` of a pure-state decomposition of ``omega``."""
    omega = np.asarray(omega, dtype=complex)
    if omega.ndim == 1:
        if omega.shape[0] != dim:
            raise ValueError(f"control state must have dimension {dim}, got {omega.shape[0]}")
        norm = np.linalg.norm(omega)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError("control state vector is not normalised")
        return omega[None, :]
    rho = density_matrix(omega)
    if rho.shape[0] != dim:
        raise ValueError(f"control state must have dimension {dim}, got {rho.shape[0]}")
    w, v = np.linalg.eigh(rho)
    keep = w > 1e-15
    return (v[:, keep] * np.sqrt(w[keep])).T


def conditional_kraus(sw: SwitchChannel, omega, outcome_vectors: np.ndarray) -> np.ndarray:
    """Kraus operators of every outcome's conditional target map.

    Returns shape ``(L, n_kraus * n_components, d, d)``: for outcome ``l``
    the operators ``(I (x) <b_l|) K (I (x) |phi_c>)``.
    """
    d, c = sw.target_dim, 2**sw.order_qubits
    comps = _control_components(omega, c)
    k = sw.channel.stacked.reshape(-1, d, c, d, c)
    a = np.einsum("nxcyz,lc,pz->lnpxy", k, np.conj(outcome_vectors), comps)
    return a.reshape(outcome_vectors.shape[0], -1, d, d)


def run_protocol(
    sw: SwitchChannel,
    omega=None,
    basis: MeasurementBasis | None = None,
    rank_tol: float = RANK_TOL,
    unitary_tol: float = UNITARY_TOL,
    prob_floor: float = PROB_FLOOR,
) -> ProtocolReport:
    """Feed ``rho (x) omega`` through ``sw``, measure the order register, classify outcomes.

    ``omega`` may be a state vector or a density matrix on the order
    register; it defaults to ``|+...+>``. ``basis`` defaults to the
    ``{|+>, |->}`` basis on every order qubit. Outcome probabilities are
    those for a maximally mixed target (trace of the conditional Choi
    matrix over ``d``); for perfect-transfer outcomes they do not depend
    on the target input at all.
    """
    if basis is None:
        basis = MeasurementBasis.plus_minus(sw.order_qubits)
    if basis.n_qubits != sw.order_qubits:
        raise ValueError(f"basis covers {basis.n_qubits} qubits, switch has {sw.order_qubits}")
    if omega is None:
        omega = default_control(sw.order_qubits)
    labelled = basis.outcomes()
    vectors = np.array([v for _, v in labelled])
    kraus = conditional_kraus(sw, omega, vectors)
    d = sw.target_dim

    outcomes = []
    success = 0.0
    for (label, _), ops in zip(labelled, kraus):
        j = kraus_choi(ops)
        prob = float(np.trace(j).real / d)
        correction = None
        if prob >= prob_floor:
            correction = classify_outcome(j, rank_tol, unitary_tol)
        perfect = correction is not None
        if perfect:
            success += prob
        outcomes.append(HeraldOutcome(label, prob, perfect, correction, j, ops))

    omega = np.asarray(omega, dtype=complex)
    control = ket_to_dm(omega) if omega.ndim == 1 else omega
    return ProtocolReport(outcomes, success, control, sw.provenance)


def success_probability(sw: SwitchChannel, omega=None, basis: MeasurementBasis | None = None, **tols) -> float:
    return run_protocol(sw, omega, basis, **tols).success_probability


def target_channel(sw: SwitchChannel, omega) -> KrausChannel:
    """Channel on the target alone: ``rho -> Tr_order[sw(rho (x) omega)]``."""
    c = 2**sw.order_qubits
    kraus = conditional_kraus(sw, omega, np.eye(c, dtype=complex))
    d = sw.target_dim
    return KrausChannel(tuple(kraus.reshape(-1, d, d)), label=f"{sw.channel.label}|control")


def verify_input_independence(
    sw: SwitchChannel, omega, basis: MeasurementBasis | None, sample_states: Sequence
) -> float:
    """Largest gap between per-input and reported probabilities of perfect outcomes.

    Each sample is pushed through the full switch channel and the order
    register is projected directly, independently of the Choi route used
    by :func:`run_protocol`.
    """
    if basis is None:
        basis = MeasurementBasis.plus_minus(sw.order_qubits)
    if omega is None:
        omega = default_control(sw.order_qubits)
    report = run_protocol(sw, omega, basis)
    omega_dm = density_matrix(omega)
    d = sw.target_dim
    vecs = dict(basis.outcomes())
    worst = 0.0
    for rho in sample_states:
        full = sw.channel(tensor(density_matrix(rho), omega_dm))
        for o in report.outcomes:
            if not o.perfect:
                continue
            proj = tensor(np.eye(d), vecs[o.label].conj()[None, :])
            p = np.trace(proj @ full @ proj.conj().T).real
            worst = max(worst, abs(p - o.probability))
    return float(worst)
