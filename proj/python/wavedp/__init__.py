"""Differentiable 2-D wave solver and sound field reconstruction toolkit."""

from wavedp._core import (
    CourantReport,
    LossRow,
    Siren,
    TrainResult,
    bessel_j0,
    courant_check,
    gaussian_pulse_pressure,
    nmse,
    read_field,
    rollout,
    sample_sensors,
    simulate,
    sobol,
    train_dp,
    write_field,
)

__all__ = [
    "CourantReport",
    "LossRow",
    "Siren",
    "TrainResult",
    "bessel_j0",
    "courant_check",
    "gaussian_pulse_pressure",
    "nmse",
    "read_field",
    "rollout",
    "sample_sensors",
    "simulate",
    "sobol",
    "train_dp",
    "write_field",
]
