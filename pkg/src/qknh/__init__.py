"""
Quantum separatrix crossing in slowly swept double wells.
"""

from qknh.__version__ import __version__
from qknh.config import RunConfig
from qknh.errors import QknhError
from qknh.knh import prediction_report
from qknh.potential import HarmonicWell, QuarticDoubleWell, Sweep
from qknh.runner import run, validate
from qknh.spectrum import LatticeParams, crossing_lattice, local_params
from qknh.utils import Branch, Subspace
