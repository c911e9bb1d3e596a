"""Green functions, equilibrium measures and Berkovich disk dynamics for
rational maps over C and over Q inside Q_p."""

from .archimedean import GreenEvaluator, escape_rate, green, green_grid, preimage_measure
from .berkdyn import detect_reduction, map_point, pullback_point_mass
from .berkovich import BerkPoint, Disk, NewtonPolygon, gauss, gauss_norm, hsia, hsia_can, hsia_infty
from .fields import INF, Absolute, ComplexField, PAdicField, chordal, make_field, valuation
from .lifts import HomogeneousLift, RationalMap, compose, fixed_point_divisor, normalize_lift, parse_map, res_f
from .measures import DiscreteMeasure
from .poly import Poly, sylvester_resultant
from .potential import energy, equilibrium_of_disks, potential, weighted_energy

__version__ = "0.1.0"
