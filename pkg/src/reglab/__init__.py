"""Boundary-point regularity lab for higher-order evolution equations.

Numerical machinery for the blow-up analysis of a boundary point of a
shrinking space-time domain: rescaled fundamental kernels and their
oscillatory asymptotics, Hermitian spectral theory of the associated
non-self-adjoint operator pairs, interval eigenvalue branches,
boundary-layer profiles, Petrovskii-type criterion integrals with
oscillatory cut-off, and a direct rescaled-PDE simulator.
"""

import importlib

__version__ = "0.1.0"

__all__ = ["numcore", "kernels", "spectral", "blayer", "criteria", "pdesim", "cli"]


def __getattr__(name):
    if name in __all__:
        return importlib.import_module(f"reglab.{name}")
    raise AttributeError(f"module 'reglab' has no attribute {name!r}")
