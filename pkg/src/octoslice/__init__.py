"""Numerical calculus of slice Fueter-regular functions over the octonions.

Modules
-------
octonion     Cayley-Dickson arithmetic on ``(..., 8)`` arrays, imaginary units, slices.
slices       Stem functions, slice functions, slice products, the example family.
operators    Gradients, spherical Dirac operator, slice Fueter operator, restricted CRF.
regularity   Vekua-type residual checkers and the predicate battery.
quadrature   Product rules on the 3-sphere and 4-ball.
cauchy       Cauchy and Borel-Pompeiu integrals on quaternionic slices.
series       Fueter polynomials, coefficient tables, Taylor and Laurent expansions.
extremum     Camshaft annihilation, sphere reparametrization, maximum modulus probe.
cli          The ``octoslice`` command line harness.
"""

__version__ = "0.1.0"

from . import octonion, slices  # noqa: E402,F401
from .octonion import OrthoUnitPair, mul  # noqa: E402,F401
from .slices import SliceFunction, StemFunction, example_family, induce  # noqa: E402,F401
