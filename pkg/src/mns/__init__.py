"""Tensor-network simulation of lossy boson sampling and noisy IQP circuits.

The package decomposes noisy inputs into a few pure product states,
evolves one randomly drawn branch per shot as a bond-truncated matrix
product state, and samples outcomes from the result.  Closed-form
entanglement spectra, simulability bounds, and an exact bond-dimension
estimator quantify when that is cheap; small dense oracles cross-check
the whole pipeline.
"""

from .errors import CircuitParseError, CutoffError, ResourceLimitError
from .linalg import haar_unitary, is_unitary, permanent, renyi_entropy, rng_from, svd
from .mps import (
    Gate,
    GateList,
    MPS,
    diagonal_gate,
    load_mps,
    one_site_gate,
    product_mps,
    sample_many,
    sample_outcome,
    save_mps,
    two_site_gate,
)
from .photonic import (
    DecompositionBranch,
    LossyInputSpec,
    SampleRecord,
    beamsplitter_gate,
    brickwall_gatelist,
    fold_loss,
    lossy_single_photon,
    run_lossy_boson_sampling,
    sample_cat_branch,
    sample_fock_branch,
    sample_single_photon_branch,
    theta_profile,
    transfer_matrix,
    ustc_like_gatelist,
    worst_case_gatelist,
    write_jsonl,
)
from .iqp import (
    IQPCircuit,
    NoiseSpec,
    depolarizing_to_pauli,
    fold_dephasing,
    parse_iqp_circuit,
    random_iqp_circuit,
    run_noisy_iqp,
    sample_iqp_input_branch,
    sample_pauli_frame,
    serialize_iqp_circuit,
)
from .analysis import (
    EstimatorResult,
    cat_site_spectrum,
    commutation_statistics,
    ere_lower_bound,
    ere_single_photon,
    ere_upper_bound,
    fock_site_spectrum,
    iqp_ere_bound,
    memory_estimate,
    required_bond_dimension,
    scaling_diagnostic,
    single_photon_site_spectrum,
)
from .oracle import (
    exact_bs_probability,
    exact_lossy_bs_distribution,
    exact_noisy_iqp_distribution,
    total_variation_distance,
)

__version__ = "0.1.0"

__all__ = [
    "CircuitParseError",
    "CutoffError",
    "ResourceLimitError",
    "haar_unitary",
    "is_unitary",
    "permanent",
    "renyi_entropy",
    "rng_from",
    "svd",
    "Gate",
    "GateList",
    "MPS",
    "diagonal_gate",
    "load_mps",
    "one_site_gate",
    "product_mps",
    "sample_many",
    "sample_outcome",
    "save_mps",
    "two_site_gate",
    "DecompositionBranch",
    "LossyInputSpec",
    "SampleRecord",
    "beamsplitter_gate",
    "brickwall_gatelist",
    "fold_loss",
    "lossy_single_photon",
    "run_lossy_boson_sampling",
    "sample_cat_branch",
    "sample_fock_branch",
    "sample_single_photon_branch",
    "theta_profile",
    "transfer_matrix",
    "ustc_like_gatelist",
    "worst_case_gatelist",
    "write_jsonl",
    "IQPCircuit",
    "NoiseSpec",
    "depolarizing_to_pauli",
    "fold_dephasing",
    "parse_iqp_circuit",
    "random_iqp_circuit",
    "run_noisy_iqp",
    "sample_iqp_input_branch",
    "sample_pauli_frame",
    "serialize_iqp_circuit",
    "EstimatorResult",
    "cat_site_spectrum",
    "commutation_statistics",
    "ere_lower_bound",
    "ere_single_photon",
    "ere_upper_bound",
    "fock_site_spectrum",
    "iqp_ere_bound",
    "memory_estimate",
    "required_bond_dimension",
    "scaling_diagnostic",
    "single_photon_site_spectrum",
    "exact_bs_probability",
    "exact_lossy_bs_distribution",
    "exact_noisy_iqp_distribution",
    "total_variation_distance",
]
