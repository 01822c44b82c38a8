"""Quantum switch, switch of switches, and nested higher-order switches.

Every switch is returned as an ordinary :class:`KrausChannel` acting on
``target (x) omega (x) omega' (x) ...``; the new order qubit of each
construction is appended as the last tensor factor. The control state is
not part of the object; it is supplied when the protocol is run.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel

MAX_NESTING = 3

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class SwitchChannel:
    channel: KrausChannel
    order_qubits: int
    target_dim: int
    provenance: dict

    def __post_init__(self):
        if self.channel.dim_in != self.target_dim * 2**self.order_qubits:
            raise ValueError("channel dimension does not match target_dim * 2**order_qubits")

    @property
    def kraus_count(self) -> int:
        return len(self.channel)

    @property
    def dims(self) -> list[int]:
        """Subsystem dimensions, target first."""
        return [self.target_dim] + [2] * self.order_qubits

    def to_dict(self) -> dict:
        out = self.channel.to_dict()
        out["order_qubits"] = self.order_qubits
        out["target_dim"] = self.target_dim
        out["provenance"] = self.provenance
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SwitchChannel":
        return cls(
            KrausChannel.from_dict(data),
            order_qubits=int(data["order_qubits"]),
            target_dim=int(data["target_dim"]),
            provenance=data["provenance"],
        )


def _leaf(ch: KrausChannel) -> dict:
    return {"kind": "channel", "label": ch.label, "kraus_count": len(ch)}


def superpose_orders(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Kraus stack ``A_i B_j (x) |0><0| + B_j A_i (x) |1><1|`` over all ``(i, j)``.

    With the new control in ``|0>`` the ``second`` operation acts first.
    Output index ``i * len(second) + j``.
    """
    if first.shape[1:] != second.shape[1:]:
        raise ValueError(f"operator shapes differ: {first.shape[1:]} vs {second.shape[1:]}")
    ab = np.einsum("iab,jbc->ijac", first, second)
    ba = np.einsum("jab,ibc->ijac", second, first)
    n = first.shape[0] * second.shape[0]
    d = first.shape[1]
    ab = ab.reshape(n, d, d)
    ba = ba.reshape(n, d, d)
    return np.einsum("nab,cd->nacbd", ab, _P0).reshape(n, 2 * d, 2 * d) + np.einsum(
        "nab,cd->nacbd", ba, _P1
    ).reshape(n, 2 * d, 2 * d)


def _check_qubit_channel(ch: KrausChannel, name: str):
    if ch.dim_in != 2 or ch.dim_out != 2:
        raise ValueError(f"{name} must be a qubit channel, got {ch.dim_out}x{ch.dim_in} Kraus operators")


def quantum_switch(e: KrausChannel, f: KrausChannel) -> SwitchChannel:
    """Switch of two qubit channels; control ``|0>`` applies ``f`` then ``e``."""
    _check_qubit_channel(e, "e")
    _check_qubit_channel(f, "f")
    ops = superpose_orders(e.stacked, f.stacked)
    ch = KrausChannel(tuple(ops), label=f"S({e.label},{f.label})")
    return SwitchChannel(ch, 1, 2, {"kind": "switch", "children": [_leaf(e), _leaf(f)]})


def _superpose_switches(s1: SwitchChannel, s2: SwitchChannel, provenance: dict) -> SwitchChannel:
    if s1.target_dim != s2.target_dim or s1.order_qubits != s2.order_qubits:
        raise ValueError("switches must share target dimension and order register")
    ops = superpose_orders(s1.channel.stacked, s2.channel.stacked)
    ch = KrausChannel(tuple(ops), label=f"S[{s1.channel.label},{s2.channel.label}]")
    return SwitchChannel(ch, s1.order_qubits + 1, s1.target_dim, provenance)


def higher_order_switch(s1: SwitchChannel, s2: SwitchChannel) -> SwitchChannel:
    """Switch of two one-control switches sharing the order qubit ``omega``.

    Kraus operators ``K1_ij K2_kl (x) |0><0| + K2_kl K1_ij (x) |1><1|`` on
    ``target (x) omega (x) omega'``.
    """
    if s1.order_qubits != 1 or s2.order_qubits != 1:
        raise ValueError("higher_order_switch takes switches with exactly one order qubit")
    return _superpose_switches(s1, s2, {"kind": "higher", "children": [s1.provenance, s2.provenance]})


def nested_switch(n: int, e: KrausChannel, f: KrausChannel) -> SwitchChannel:
    """n-th order switch built by repeatedly switching two copies of the previous level.

    Level ``n`` reuses the order qubits of level ``n - 1`` and adds one, so
    it has ``n`` order qubits and ``(m*m)**(2**(n-1))`` Kraus operators when
    both channels have ``m``.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_NESTING:
        raise ValueError(f"nesting depth must be an integer in [1, {MAX_NESTING}], got {n!r}")
    sw = quantum_switch(e, f)
    for _ in range(n - 1):
        sw = _superpose_switches(sw, sw, {})
    return SwitchChannel(
        sw.channel, sw.order_qubits, sw.target_dim,
        {"kind": "nested", "n": int(n), "children": [_leaf(e), _leaf(f)]},
    )


def expected_kraus_count(n: int, m: int) -> int:
    return (m * m) ** (2 ** (n - 1))

