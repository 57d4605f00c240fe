"""Concrete processes: random evolutions, commuting circuits, order finding,
partial-SWAP extraction and the dephasing two-time demo."""

from .dephasing import dephasing_demo
from .iqp import (
    DiagonalDecomposition,
    IqpCircuit,
    iqp_classical_sample,
    iqp_classical_sample_batch,
    iqp_decompose,
    iqp_exact_probability,
    iqp_process,
    partition_gates,
    random_iqp_circuit,
)
from .pswap import (
    Gate,
    PswapExperiment,
    PswapResult,
    pswap_decompose,
    pswap_extraction,
    pswap_gate,
    recompose,
)
from .random_evolution import gue_process, haar_process
from .shor import (
    ShorSpec,
    controlled_mod_mult_process,
    measured_phase_integer,
    mod_mult_unitary,
    order_from_phase,
    shor_comp_basis_schedule,
    shor_factor,
    shor_factor_attempt,
    shor_feedforward_schedule,
    shor_process,
)

__all__ = [
    "DiagonalDecomposition",
    "Gate",
    "IqpCircuit",
    "PswapExperiment",
    "PswapResult",
    "ShorSpec",
    "controlled_mod_mult_process",
    "dephasing_demo",
    "gue_process",
    "haar_process",
    "iqp_classical_sample",
    "iqp_classical_sample_batch",
    "iqp_decompose",
    "iqp_exact_probability",
    "iqp_process",
    "measured_phase_integer",
    "mod_mult_unitary",
    "order_from_phase",
    "partition_gates",
    "pswap_decompose",
    "pswap_extraction",
    "pswap_gate",
    "random_iqp_circuit",
    "recompose",
    "shor_comp_basis_schedule",
    "shor_factor",
    "shor_factor_attempt",
    "shor_feedforward_schedule",
    "shor_process",
]
