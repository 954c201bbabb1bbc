"""Relative-phase theory on phase space: kernels, symbols, W_{n,m}, dynamics."""

from .functional import (
    W_MAX_ENTRIES,
    MultiTimeSymbol,
    WCapExceeded,
    build_W,
    phase_space_coherence,
    reproduce,
)
from .kernels import KernelFamily, build_kernels, solid_angle_factor, spin_coherent_state
from .spaces import PhaseSpace, qudit_torus, sphere
from .symbols import (
    FlowCheckError,
    PhaseSpaceFunction,
    SharpnessReport,
    classical_filter,
    hemisphere,
    heisenberg_flow,
    history_symbol,
    moyal_bracket,
    multitime_symbol,
    p_symbol,
    q_symbol,
    reconstruct,
    sharpness_report,
    symbol_at,
    to_solid_angle_normalization,
    wigner_symbol,
)
