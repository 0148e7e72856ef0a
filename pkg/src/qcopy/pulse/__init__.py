from .schedule import (
    GaussianEnvelope,
    PulseInstruction,
    PulseSchedule,
    calibrate_peak,
    gaussian_shape,
    parse_schedule,
    pulse_area,
    serialize_schedule,
)
from .backends import (
    StepAccuracyWarning,
    StepTooLarge,
    UnknownCarrier,
    ideal_probabilities,
    lindblad_populations,
    run_ideal,
    run_lindblad,
    run_timedomain,
    timedomain_probabilities,
)

__all__ = [
    "GaussianEnvelope",
    "PulseInstruction",
    "PulseSchedule",
    "StepAccuracyWarning",
    "StepTooLarge",
    "UnknownCarrier",
    "calibrate_peak",
    "gaussian_shape",
    "ideal_probabilities",
    "lindblad_populations",
    "parse_schedule",
    "pulse_area",
    "run_ideal",
    "run_lindblad",
    "run_timedomain",
    "serialize_schedule",
    "timedomain_probabilities",
]
