import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fanokit.geometry import RationalPolytope


@pytest.fixture
def rng():
    return random.Random(20240811)


def random_rational(rng, span=3, den=4):
    return Fraction(rng.randint(-span * den, span * den), rng.choice([1, 2, den]))


def random_point(rng, n, span=3, den=4):
    return tuple(random_rational(rng, span, den) for _ in range(n))


def random_full_polytope(rng, n, npts=None):
    """Random full-dimensional polytope as a hull of rational points."""
    npts = npts or (n + 3 + rng.randint(0, 3))
    while True:
        pts = [random_point(rng, n) for _ in range(npts)]
        try:
            poly = RationalPolytope.from_vertices(pts)
        except Exception:
            continue
        if poly.full_dimensional:
            return poly


def p1_filtration(degrees):
    """The product one-parameter degeneration of the projective line.

    Degree-m sections s0^(m-i) s1^i carry torus weight -i; the filtration is
    the corresponding twist of the trivial filtration, so its level-m values
    are {0, -1, ..., -m}.
    """
    from fanokit.filtration import FiltrationLevel, GradedFiltration, twist

    levels = {
        m: FiltrationLevel.from_values(m, [0] * (m + 1), weights=[(-i,) for i in range(m + 1)])
        for m in degrees
    }
    return twist(GradedFiltration(levels, label="p1-product"), (1,))


def p1_limit_measure():
    """The limiting spectral measure of the fixture: uniform mass on [-1, 0]."""
    from fanokit.expint import PLConcaveFunction
    from fanokit.measure import DHMeasure

    dom = RationalPolytope.interval(-1, 0)
    return DHMeasure.pushforward(PLConcaveFunction.linear(dom, [1], 0))


def random_level(rng, dim, m=1, with_weights=False, rank=1):
    """Random filtration level with an invertible rational basis."""
    from fanokit.filtration import FiltrationLevel
    from fanokit.rational import matrix_rank

    while True:
        rows = [[Fraction(rng.randint(-4, 4)) for _ in range(dim)] for _ in range(dim)]
        if matrix_rank(rows) == dim:
            break
    values = [Fraction(rng.randint(-6, 6), rng.choice([1, 2])) for _ in range(dim)]
    weights = None
    if with_weights:
        weights = [tuple(Fraction(rng.randint(-3, 3)) for _ in range(rank)) for _ in range(dim)]
    return FiltrationLevel(m, tuple(tuple(r) for r in rows), tuple(values),
                           tuple(weights) if weights else None)
