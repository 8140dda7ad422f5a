"""Self-interference canceler design for single-frequency full-duplex relays.

The toolkit assembles a lifted symbol-rate model of the relay loop
(pulse shaping, multipath coupling, anti-alias filtering), synthesizes a
canceler by discrete-time H-infinity optimization, and validates it in a
sample-exact closed-loop baseband simulation.
"""

from ._accel import BACKEND
from .hinf import (
    Controller,
    DareError,
    GammaInfeasibleError,
    close_loop,
    gamma_iterate,
    hinf_norm,
    lft,
    solve_dare,
    synthesize,
)
from .lifting import (
    LiftedSystem,
    block_sequence,
    lift,
    select_first_subchannel,
    unblock_sequence,
)
from .plant import (
    GeneralizedPlant,
    PlantError,
    RelayParams,
    build_coupling_channel,
    build_generalized_plant,
    rotation_matrix,
)
from .pulse import (
    FirPulse,
    exact_project,
    generate_ofdm_bpsk,
    matched_sample,
    srrc_taps,
    synthesize_baseband,
)
from .sim import (
    ErrorMetrics,
    SimTrace,
    baseline_controller,
    error_metrics,
    simulate,
)
from .sysmat import (
    ContinuousStateSpace,
    DiscreteStateSpace,
    c2d_zoh,
    delay_ss,
    fir_to_ss,
    first_order_lowpass,
    impulse_response,
    series,
    simulate_dss,
    static_gain,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ContinuousStateSpace",
    "Controller",
    "DareError",
    "DiscreteStateSpace",
    "ErrorMetrics",
    "FirPulse",
    "GammaInfeasibleError",
    "GeneralizedPlant",
    "LiftedSystem",
    "PlantError",
    "RelayParams",
    "SimTrace",
    "baseline_controller",
    "block_sequence",
    "build_coupling_channel",
    "build_generalized_plant",
    "c2d_zoh",
    "close_loop",
    "delay_ss",
    "error_metrics",
    "exact_project",
    "fir_to_ss",
    "first_order_lowpass",
    "gamma_iterate",
    "generate_ofdm_bpsk",
    "hinf_norm",
    "impulse_response",
    "lft",
    "lift",
    "matched_sample",
    "rotation_matrix",
    "select_first_subchannel",
    "series",
    "simulate",
    "simulate_dss",
    "solve_dare",
    "srrc_taps",
    "static_gain",
    "synthesize",
    "synthesize_baseband",
    "unblock_sequence",
]
