"""Heralded noise-free transfer through quantum switches and higher-order switches."""
from .channels import (
    KrausChannel,
    bit_flip,
    choi,
    compose,
    identity_channel,
    pauli_channel,
    phase_flip,
    validate_cptp,
)
from .closed_forms import (
    FlipParams,
    PauliParams,
    scan_region,
    verify_example_table,
)
from .optimize import compare_product_vs_entangled, optimize_control
from .protocol import (
    HeraldOutcome,
    MeasurementBasis,
    ProtocolReport,
    run_protocol,
    success_probability,
)
from .switch import SwitchChannel, higher_order_switch, nested_switch, quantum_switch

__all__ = [
    "KrausChannel", "bit_flip", "choi", "compose", "identity_channel", "pauli_channel",
    "phase_flip", "validate_cptp", "FlipParams", "PauliParams", "scan_region",
    "verify_example_table", "compare_product_vs_entangled", "optimize_control",
    "HeraldOutcome", "MeasurementBasis", "ProtocolReport", "run_protocol",
    "success_probability", "SwitchChannel", "higher_order_switch", "nested_switch",
    "quantum_switch",
]
__version__ = "0.1.0"
