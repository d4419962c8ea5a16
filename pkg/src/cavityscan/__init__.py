"""Gaussian-channel models of microwave-cavity detectors and the scan-rate
optimization toolkit built on them: single cavities, squeezed and two-mode
squeezed readout, entangled cavity networks, grid-state-assisted detection,
and the laboratory-unit dictionary."""

from . import cavity, gaussian, gkp, jpa, network, radiometry, units
from .cavity import CavityParams
from .gaussian import GaussianChannel, GaussianState, SymplecticMap
from .gkp import GkpParams, ModularNoise
from .jpa import JpaParams
from .network import NetworkConfig
from .radiometry import ScanResult, VisibilityCurve
from .units import PhysicalParams

__version__ = "0.1.0"

__all__ = [
    "cavity", "gaussian", "gkp", "jpa", "network", "radiometry", "units",
    "CavityParams", "GaussianChannel", "GaussianState", "SymplecticMap",
    "GkpParams", "ModularNoise", "JpaParams", "NetworkConfig",
    "ScanResult", "VisibilityCurve", "PhysicalParams", "__version__",
]
