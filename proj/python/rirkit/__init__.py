"""Robust instability radius toolkit."""

from ._rirkit import (
    InvalidInput,
    NumericalError,
    PreconditionError,
    RirkitError,
    TransferFunction,
    VerificationError,
    analyze,
    closed_loop_poles,
    fhn_search_eo,
    fhn_simulate,
    linf_norm,
    logderiv,
    maglev_upper_bound,
    maglev_zoh,
    pcr_max_search,
    synth,
    unstable_pole_count,
)

__all__ = [name for name in dir() if not name.startswith("_")]
