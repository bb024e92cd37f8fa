"""Generalised SVI implied-variance surfaces with arbitrage checks and densities."""

from .bs import call_bs, convexity_oracle, d_pm, dupire_local_var, monotonicity_oracle, op_L, put_bs
from .butterfly import (
    A_func,
    A_star,
    Y_func,
    butterfly_bound,
    check_butterfly,
    classify_regions,
    easy_necessary,
    gj_sufficient,
    psi_upper_bound,
    sym_svi_closed_forms,
)
from .calendar import check_calendar, compact_calendar
from .density import DensitySlice, Smile, critical_moment, critical_moment_from_slice, sample
from .errors import (
    ArbitrageError,
    ConfigError,
    DomainError,
    GSVIError,
    KnotError,
    ParameterError,
    PreconditionError,
    TailError,
)
from .surface import GenSurface, SurfaceConfig, build_surface, catalog, eval_w, eval_w_partials

__version__ = "0.1.0"
