"""Toolkit for the higher-order Stokes phenomenon in singularly perturbed linear ODEs.

Modules:

* ``coeffkernel``: exact Gaussian-rational polynomials, rational functions, LogComplex
* ``recurrences``: exact coefficient tables and Pearcey leading-order objects
* ``borel``: exact Borel transform, Padé continuation, Laplace integrals
* ``singulants``: case definitions (singulants, lines, higher-order lines)
* ``stokesgeo``: curve tracing, activity masks, component bookkeeping
* ``latefit``: factorial-over-power fits, optimal truncation, smoothing scans
* ``odeoracle``: high-precision Taylor integration of the ODEs
* ``cli``: command-line entry point
"""
from .coeffkernel import GaussianRational, LogComplex, Polynomial, RationalFunction
from .recurrences import (
    CoeffTable,
    model_amplitude_Bp,
    model_base_coefficients,
    trinh_amplitude_coefficients,
    trinh_base_coefficients,
)
from .singulants import CaseDefinition, get_case

__version__ = "0.1.0"

__all__ = [
    "GaussianRational",
    "LogComplex",
    "Polynomial",
    "RationalFunction",
    "CoeffTable",
    "model_base_coefficients",
    "model_amplitude_Bp",
    "trinh_base_coefficients",
    "trinh_amplitude_coefficients",
    "CaseDefinition",
    "get_case",
]
