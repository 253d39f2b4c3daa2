import math

from conversion import ConversionMethods

OPTIMAL_BETA = {
    ConversionMethods.FILTER_CARRIER: 3.574,
    ConversionMethods.FILTER_MZ_INTERFEROMETER: 1.664,
    ConversionMethods.MZ_MODULATOR_HALF_TRANSMISSION: 1.841,
    ConversionMethods.MZ_MODULATOR_MIN_TRANSMISSION: 2.718,
    ConversionMethods.DISPERSIVE: 1.336,
}

COHERENCE = {
    ConversionMethods.FILTER_CARRIER: 0.144,
    ConversionMethods.FILTER_MZ_INTERFEROMETER: 0.174,
    ConversionMethods.MZ_MODULATOR_HALF_TRANSMISSION: 0.169,
    ConversionMethods.MZ_MODULATOR_MIN_TRANSMISSION: 0.097,
    ConversionMethods.DISPERSIVE: 0.339,
}

DISPERSIVE_ALPHA = 0.76
DISPERSIVE_AM_EFFICIENCY = 0.582
J1_FIRST_MAXIMUM = 1.8412

RABI_FREQUENCY = 2.0 * math.pi * 1.95e6
CPMG_PULSES = 7852
CPMG_PULSES_UNCERTAINTY = 76
PI_PULSE_FIDELITY = 0.999873
RAMSEY_T2_STAR = 1.17e-3
XY16_T2 = 303e-3
IDLE_T1 = 0.45
BACKGROUND_LIFETIME = 10.0

ARRAY_ROWS = 20
ARRAY_COLS = 30
ARRAY_EXTENT = (100e-6, 200e-6)
BEAM_WAISTS = (40e-6, 560e-6)

__all__ = [
    "ARRAY_COLS",
    "ARRAY_EXTENT",
    "ARRAY_ROWS",
    "BACKGROUND_LIFETIME",
    "BEAM_WAISTS",
    "COHERENCE",
    "CPMG_PULSES",
    "CPMG_PULSES_UNCERTAINTY",
    "DISPERSIVE_ALPHA",
    "DISPERSIVE_AM_EFFICIENCY",
    "IDLE_T1",
    "J1_FIRST_MAXIMUM",
    "OPTIMAL_BETA",
    "PI_PULSE_FIDELITY",
    "RABI_FREQUENCY",
    "RAMSEY_T2_STAR",
    "XY16_T2",
]
