"""galres: invariants and classification of pro-p Galois groups with
restricted ramification and prescribed splitting.

The package is organized around seven pieces:

* ``magnus``     -- exact computation in the free pro-p group modulo its
                    Zassenhaus filtration (truncated power series algebra).
* ``abgroup``    -- exact integer / mod-p linear algebra (Smith normal form,
                    finite abelian groups with discrete logarithms, LLL).
* ``numfield``   -- number fields, integral bases, prime ideals, valuations.
* ``classfield`` -- class groups, units, ray class groups, Selmer groups,
                    p-rationality and Frobenius classes.
* ``galois``     -- the pure formula layer (rank formulas, Euler
                    characteristic bounds, the trichotomy classifier).
* ``chebotarev`` -- constructive search for splitting sets and the density
                    statistics report.
* ``cli``        -- the ``galres`` command line front end.
"""

__version__ = "0.1.0"


class GalresError(Exception):
    """Base class for every error raised by this package."""


class EffortExceeded(GalresError):
    """A configured effort bound was hit before the answer was certain."""


class StabilizationFailed(EffortExceeded):
    """A modulus tower hit its cap without the tracked quantity stabilizing."""
