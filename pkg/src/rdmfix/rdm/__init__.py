"""Density-matrix containers, condition maps and their inverses."""
from .doci import (
    DOCI_KINDS,
    Doci2RDM,
    doci_conditions,
    doci_energy,
    doci_invert,
    doci_reduced_hamiltonian,
    embed,
    extract,
    g2x2_blocks,
    g_pi,
    q_d,
    q_pi,
    seniority_off_block_sum,
)
from .spin import (
    ConditionMatrix,
    Spin2RDM,
    condition_matrices,
    contract_one_rdm,
    energy,
    g_from_p,
    p_from_g,
    p_from_q,
    p_matrix,
    q_from_p,
    reduced_hamiltonian,
    trace_target,
)
from .validate import ValidationReport, validate

__all__ = [
    "ConditionMatrix",
    "DOCI_KINDS",
    "Doci2RDM",
    "Spin2RDM",
    "ValidationReport",
    "condition_matrices",
    "contract_one_rdm",
    "doci_conditions",
    "doci_energy",
    "doci_invert",
    "doci_reduced_hamiltonian",
    "embed",
    "energy",
    "extract",
    "g2x2_blocks",
    "g_from_p",
    "g_pi",
    "p_from_g",
    "p_from_q",
    "p_matrix",
    "q_d",
    "q_from_p",
    "q_pi",
    "reduced_hamiltonian",
    "seniority_off_block_sum",
    "trace_target",
    "validate",
]
