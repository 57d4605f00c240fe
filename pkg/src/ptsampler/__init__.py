"""Simulator for multi-time sampling of open quantum systems.

A process is specified by an initial system-environment state and the
unitaries between probing times; this package samples outcome trajectories
under arbitrary instrument schedules, builds the equivalent many-body Choi
state, extracts two-time stochastic maps, and runs the output-statistics
experiments (Porter-Thomas convergence, commuting-circuit sampling, order
finding, partial-SWAP extraction, dephasing) behind the ``ptsampler`` CLI.
"""

from ._version import __version__
from .ensembles import RngStream, gue_hamiltonian, haar_unitary, random_timestep
from .instruments import (
    CpMap,
    Instrument,
    apply,
    choi_apply,
    choi_of,
    comp_basis,
    comp_basis_prepare_plus,
    driven_identity,
    identity_instrument,
    instrument_by_name,
    instrument_chois,
    kraus_from_choi,
    measure_and_prepare,
    shor_rotation,
    unitary_instrument,
    x_basis_prepare_plus,
)
from .linalg import (
    DensityOperator,
    StateVector,
    basis_state,
    expm_hermitian,
    kron,
    partial_trace,
    permute_qubits,
)
from .mps import MatrixProductState, mps_sample, random_mps, sample_mps_bitstrings
from .process import (
    ChoiState,
    ExtractedMap,
    ProcessSpec,
    TrajectoryRecord,
    born_rule_contract,
    build_choi,
    embed_state_sampling,
    enumerate_comp_basis,
    extract_stochastic_map,
    sample_comp_basis,
    sample_trajectory,
    trajectory_probability,
)
from .stats import (
    EmpiricalDistribution,
    KlReport,
    build_distribution,
    default_edges,
    enumerate_distribution,
    k_sweep,
    kl_divergence,
    porter_thomas_mass,
    porter_thomas_reference,
    sample_np_distribution,
)

__all__ = [
    "ChoiState",
    "CpMap",
    "DensityOperator",
    "EmpiricalDistribution",
    "ExtractedMap",
    "Instrument",
    "KlReport",
    "MatrixProductState",
    "ProcessSpec",
    "RngStream",
    "StateVector",
    "TrajectoryRecord",
    "__version__",
    "apply",
    "basis_state",
    "born_rule_contract",
    "build_choi",
    "build_distribution",
    "choi_apply",
    "choi_of",
    "comp_basis",
    "comp_basis_prepare_plus",
    "default_edges",
    "driven_identity",
    "embed_state_sampling",
    "enumerate_comp_basis",
    "enumerate_distribution",
    "expm_hermitian",
    "extract_stochastic_map",
    "gue_hamiltonian",
    "haar_unitary",
    "identity_instrument",
    "instrument_by_name",
    "instrument_chois",
    "k_sweep",
    "kl_divergence",
    "kraus_from_choi",
    "kron",
    "measure_and_prepare",
    "mps_sample",
    "partial_trace",
    "permute_qubits",
    "porter_thomas_mass",
    "porter_thomas_reference",
    "random_mps",
    "random_timestep",
    "sample_comp_basis",
    "sample_mps_bitstrings",
    "sample_np_distribution",
    "sample_trajectory",
    "shor_rotation",
    "trajectory_probability",
    "unitary_instrument",
    "x_basis_prepare_plus",
]
