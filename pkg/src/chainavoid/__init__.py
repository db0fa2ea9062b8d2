"""Colored chain avoidance in the Boolean lattice: critical exponents, exact
counts, supersaturation checks and hypergraph containers."""

from .critical import CriticalResult, omega_crit, omega_crit_oracle
from .enumeration import CountResult, expected_valid_count, mu_valid, mu_valid_bruteforce
from .errors import (
    BudgetExceeded,
    ChainAvoidError,
    InvariantViolation,
    NotSparseError,
    ParameterError,
    StateSpaceTooLarge,
)
from .patterns import (
    ForbiddenFamily,
    augment_with_all_chains,
    big_L,
    four_color_example,
    is_violating_chain,
    longest_valid_length,
    monochromatic_chain,
    sparsity_report,
)
from .templates import Template, omega, template_is_valid

__all__ = [
    "BudgetExceeded", "ChainAvoidError", "CountResult", "CriticalResult", "ForbiddenFamily",
    "InvariantViolation", "NotSparseError", "ParameterError", "StateSpaceTooLarge", "Template",
    "augment_with_all_chains", "big_L", "expected_valid_count", "four_color_example",
    "is_violating_chain", "longest_valid_length", "monochromatic_chain", "mu_valid",
    "mu_valid_bruteforce", "omega", "omega_crit", "omega_crit_oracle", "sparsity_report",
    "template_is_valid",
]
