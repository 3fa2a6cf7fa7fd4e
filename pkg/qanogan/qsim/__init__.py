"""Statevector simulation of the latent encoding and parameterized circuits."""
from .ansatz import (
    AnsatzLayout,
    BasisAssignment,
    GateOp,
    build_ansatz,
    identity_block_init,
    random_init,
)
from .gradients import (
    DEFAULT_FD_STEP,
    grad_g_q_forward_diff,
    grad_g_q_param_shift,
    jacobian_forward_diff,
    jacobian_param_shift,
)
from .state import (
    QubitState,
    ShotSample,
    apply_circuit,
    circuit_expectations,
    expect_z_analytic,
    expect_z_from_sample,
    prepare_latent_state,
    sample_bitstrings,
)

__all__ = [
    'AnsatzLayout',
    'BasisAssignment',
    'GateOp',
    'QubitState',
    'ShotSample',
    'DEFAULT_FD_STEP',
    'apply_circuit',
    'build_ansatz',
    'circuit_expectations',
    'expect_z_analytic',
    'expect_z_from_sample',
    'grad_g_q_forward_diff',
    'grad_g_q_param_shift',
    'identity_block_init',
    'jacobian_forward_diff',
    'jacobian_param_shift',
    'prepare_latent_state',
    'random_init',
    'sample_bitstrings',
]
