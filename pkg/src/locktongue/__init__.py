"""Arnold tongues of an injection-locked frequency divider.

Perturbative prediction of p:q locking intervals for the driven Lienard
oscillator u' = alpha v + Phi u (1 - u^2), v' = -u - v, Phi = beta + mu sin(omega t),
and direct numerical measurement of the same intervals.
"""
from .core import (CircuitParams, CompatibilityError, ConvergenceError, DecompositionError,
                   DimensionlessParams, FourierSeries, IntegrationError, LockTongueError,
                   MeasurementError, NumericalError, ParameterError, ResonanceRatio)
from .limit_cycle import LimitCycle, find_limit_cycle, rescale_cycle
from .linearized import WronskianData, build_wronskian
from .compatibility import FirstOrderConstants, compute_B_constants, resonance_frame
from .perturbation import TonguePrediction, predict_tongue
from .locking import TongueMeasurement, is_locked, measure_tongue, staircase_scan

__version__ = "0.1.0"
