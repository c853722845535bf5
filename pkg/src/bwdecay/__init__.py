"""Half-line Breit-Wigner decay amplitudes, their real-line (exponential)
extension and the complex-delta amplitude, with the machinery to compare them."""
from .amplitudes import (
    background,
    bw_fullline_amp,
    bw_halfline_amp,
    complex_delta_amp,
    decompose,
)
from .core import (
    AmplitudeSeries,
    EngineError,
    Resonance,
    TimeGrid,
    make_resonance,
    make_time_grid,
)
from .quadrature import QuadratureConfig
from .specfun import bw_halfline_kernel, exp_integral_e1

__version__ = "0.1.0"

__all__ = [
    "AmplitudeSeries",
    "EngineError",
    "QuadratureConfig",
    "Resonance",
    "TimeGrid",
    "background",
    "bw_fullline_amp",
    "bw_halfline_amp",
    "bw_halfline_kernel",
    "complex_delta_amp",
    "decompose",
    "exp_integral_e1",
    "make_resonance",
    "make_time_grid",
]
