"""Exponential-of-affine integrals over simplices and piecewise-linear transforms.

This is the computational layer behind every entropy/energy functional in the
package: values of int w(y)^k e^{-l(y)} dy over exact rational simplices, and
their sums over the cells of a piecewise-linear concave transform.

Geometry stays rational until the last moment: vertex values of the affine
forms are evaluated in Q and rounded once to double before entering the
divided-difference kernel.  Cell sums use a deterministic double-double tree
reduction so results do not depend on the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from ._kernel import compensated_tree_sum, dd_exp, dd_exp_series, dd_exp_weighted
from .errors import InputError, UnsupportedOrder
from .geometry import (
    AffineForm,
    RationalPolytope,
    Simplex,
    halfspace_slice,
    pairing_form,
)
from .rational import format_rat, rat, rat_vector

#: relative vertex-value spread below which the series fallback is used
CLUSTER_RELATIVE_SPREAD = 1e-4

MAX_MOMENT_ORDER = 4

#: worker threads used by cell sums when the caller does not pass `threads`
DEFAULT_THREADS = 1


def set_default_threads(n: int) -> None:
    global DEFAULT_THREADS
    DEFAULT_THREADS = max(1, int(n))


@dataclass(frozen=True)
class ExpIntegralResult:
    value: float
    est_rel_error: float
    method: str  # "divided_difference" | "series_fallback" | "subdivision"


def _factorial_volume(s: Simplex) -> float:
    # n! * vol(s) = |det of edge matrix|, exact before rounding
    return float(abs(s.edge_determinant()))


def _vertex_values(s: Simplex, form: AffineForm) -> list[float]:
    return [float(form(v)) for v in s.vertices]


def simplex_exp_integral(s: Simplex, l: AffineForm) -> ExpIntegralResult:
    """int_s e^{-l(y)} dy = n! vol(s) * (divided difference of exp at -l(vertices))."""
    z = [-v for v in _vertex_values(s, l)]
    scale = _factorial_volume(s)
    spread = max(z) - min(z)
    mean = math.fsum(z) / len(z)
    if spread < CLUSTER_RELATIVE_SPREAD * max(1.0, abs(mean)):
        dd, err = dd_exp_series(z)
        method = "series_fallback"
    else:
        dd, err = dd_exp(z)
        method = "divided_difference"
    return ExpIntegralResult(scale * dd, err, method)


def simplex_weighted_exp_integral(s: Simplex, l: AffineForm, w: AffineForm, k: int) -> ExpIntegralResult:
    """int_s w(y)^k e^{-l(y)} dy for k <= 4.

    Realized as the k-th derivative of the divided-difference representation
    along the deformation l -> l - t*w, so the clustering safeguards of the
    plain kernel carry over.
    """
    if k < 0 or k > MAX_MOMENT_ORDER:
        raise UnsupportedOrder(f"moment order {k} not in 0..{MAX_MOMENT_ORDER}")
    if k == 0:
        return simplex_exp_integral(s, l)
    z = [-v for v in _vertex_values(s, l)]
    b = _vertex_values(s, w)
    corner, err = dd_exp_weighted(z, b, k)
    scale = _factorial_volume(s) * math.factorial(k)
    value = scale * corner[k]
    # error relative to the cancellation-free magnitude bound |w|_max^k * I_0
    bound = (max(abs(x) for x in b) ** k) * abs(corner[0]) * _factorial_volume(s)
    abs_err = err * max(bound, abs(value))
    rel = abs_err / abs(value) if value != 0.0 else abs_err
    return ExpIntegralResult(value, rel, "divided_difference")


@dataclass(frozen=True)
class PLConcaveFunction:
    """Piecewise-affine function given by affine pieces over a triangulated domain."""

    domain: RationalPolytope
    cells: tuple[tuple[Simplex, AffineForm], ...]
    concavity_certified: bool = False

    @classmethod
    def make(cls, domain: RationalPolytope, cells, certify_concave: bool = False) -> "PLConcaveFunction":
        ordered = tuple(sorted(((s, f) for s, f in cells), key=lambda c: c[0].vertices))
        obj = cls(domain, ordered, certify_concave)
        obj._validate()
        return obj

    @classmethod
    def constant(cls, domain: RationalPolytope, value=0) -> "PLConcaveFunction":
        form = AffineForm(tuple(Fraction(0) for _ in range(domain.dim)), rat(value))
        return cls.make(domain, [(s, form) for s in domain.triangulate()])

    @classmethod
    def linear(cls, domain: RationalPolytope, gradient, constant=0) -> "PLConcaveFunction":
        form = AffineForm.make(gradient, constant)
        return cls.make(domain, [(s, form) for s in domain.triangulate()])

    def _validate(self):
        if not self.cells:
            raise InputError("piecewise function needs at least one cell")
        total = sum((s.volume() for s, _ in self.cells), Fraction(0))
        if total != self.domain.volume():
            raise InputError("cells do not triangulate the domain (volume mismatch)")
        for s, _ in self.cells:
            for v in s.vertices:
                if not self.domain.contains(v):
                    raise InputError("cell vertex outside the domain")
        values = {}
        for s, f in self.cells:
            for v in s.vertices:
                val = f(v)
                if values.setdefault(v, val) != val:
                    raise InputError(f"adjacent pieces disagree at shared vertex {v}")
        if self.concavity_certified:
            for s, f in self.cells:
                for v in s.vertices:
                    for _, g in self.cells:
                        if g(v) < f(v):
                            raise InputError(
                                "concavity certificate fails: piece exceeds the minimum"
                            )

    @property
    def dim(self) -> int:
        return self.domain.dim

    def vertex_values(self) -> dict:
        out = {}
        for s, f in self.cells:
            for v in s.vertices:
                out[v] = f(v)
        return out

    def min_value(self) -> Fraction:
        return min(self.vertex_values().values())

    def max_value(self) -> Fraction:
        return max(self.vertex_values().values())

    def rescaled(self, a, b) -> "PLConcaveFunction":
        """a*G + b for a > 0 (cells unchanged)."""
        a = rat(a)
        cells = [(s, f.scaled(a).shifted(b)) for s, f in self.cells]
        return PLConcaveFunction(self.domain, tuple(cells), self.concavity_certified)

    def to_json(self) -> dict:
        return {
            "cells": [
                {
                    "simplex": [[format_rat(x) for x in v] for v in s.vertices],
                    "affine": {
                        "gradient": [format_rat(x) for x in f.gradient],
                        "constant": format_rat(f.constant),
                    },
                }
                for s, f in self.cells
            ]
        }

    @classmethod
    def from_json(cls, doc: dict, domain: RationalPolytope | None = None) -> "PLConcaveFunction":
        if not isinstance(doc, dict) or "cells" not in doc:
            raise InputError("piecewise-function document needs a 'cells' list")
        cells = []
        for cell in doc["cells"]:
            simplex = Simplex.make(cell["simplex"])
            aff = cell["affine"]
            cells.append((simplex, AffineForm(rat_vector(aff["gradient"]), rat(aff["constant"]))))
        if domain is None:
            domain = RationalPolytope.from_vertices(
                [v for s, _ in cells for v in s.vertices]
            )
        return cls.make(domain, cells, certify_concave=bool(doc.get("concave_certificate")))


def _cell_results(G: PLConcaveFunction, shift: AffineForm | None, threads: int) -> list[ExpIntegralResult]:
    forms = [f if shift is None else f.plus(shift) for _, f in G.cells]
    jobs = list(zip((s for s, _ in G.cells), forms))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: simplex_exp_integral(*job), jobs))
    return [simplex_exp_integral(s, f) for s, f in jobs]


def pl_exp_integral(G: PLConcaveFunction, shift: AffineForm | None = None,
                    threads: int | None = None) -> ExpIntegralResult:
    """int_domain e^{-(G(y) + shift(y))} dy, summed cell-wise.

    Cell integrals may run in parallel; the reduction is a fixed-order
    double-double tree over the canonical cell ordering, so the output is
    bit-stable across thread counts.
    """
    results = _cell_results(G, shift, threads if threads is not None else DEFAULT_THREADS)
    total = compensated_tree_sum([r.value for r in results])
    if total != 0.0:
        err = sum(r.est_rel_error * abs(r.value) for r in results) / abs(total)
    else:
        err = max((r.est_rel_error for r in results), default=0.0)
    method = results[0].method if len(results) == 1 else "subdivision"
    return ExpIntegralResult(total, err, method)


def superlevel_gvolume(G: PLConcaveFunction, x, xi=None, threads: int = 1) -> float:
    """n! * int_{G >= x} e^{-<y', xi>} dy (the weighted volume of a superlevel set)."""
    x = rat(x)
    n = G.dim
    ell = pairing_form(xi, n) if xi is not None else None
    values = []
    for s, f in G.cells:
        for piece in halfspace_slice(s, f, x):
            if ell is None:
                values.append(float(abs(piece.edge_determinant())))  # n! vol
            else:
                values.append(math.factorial(n) * simplex_exp_integral(piece, ell).value)
    return compensated_tree_sum(values) if values else 0.0
