"""Downlink simulator for a transmissive metasurface transmitter.

A single feed antenna illuminates an M-element transmissive metasurface
whose per-element complex coefficients (|f_m| <= 1) form one shared beam
toward K single-antenna users.  The package provides channel synthesis,
link math, the alternating beam/power optimizer, baseline schemes, and a
CLI for running sweep experiments to CSV.
"""

from rmsbeam.channel import ArrayGeometry, PathParams, UserChannel
from rmsbeam.linkmath import (
    LinkBudget,
    LiftedBeamMatrix,
    PowerAllocation,
    TransmissionCoefficients,
)

__all__ = [
    "ArrayGeometry",
    "PathParams",
    "UserChannel",
    "LinkBudget",
    "LiftedBeamMatrix",
    "PowerAllocation",
    "TransmissionCoefficients",
]
