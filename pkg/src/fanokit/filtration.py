"""Finite-level filtration calculus on graded vector spaces.

A level stores an adapted basis (rows in ambient coordinates) with one
rational value per basis vector and optional torus weights.  Flag-matrix
input is converted to this diagonal form by exact elimination.  Successive
minima, rescale/shift, twists, common adapted bases for two flags, level
distances, the Q_m/Psi_m approximants and initial-term degeneration all
operate on this representation, exactly over Q.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .errors import (
    DimensionMismatch,
    InputError,
    InvalidWeightFiltration,
    MissingLevel,
    MissingTorusWeights,
    NonpositiveScale,
    NotABasis,
)
from .measure import DHMeasure
from .rational import (
    Vector,
    format_rat,
    invert,
    matrix_rank,
    rat,
    rat_vector,
)


@dataclass(frozen=True)
class FiltrationLevel:
    """Degree-m piece: adapted basis rows, per-vector values, optional weights."""

    degree: int
    basis: tuple[Vector, ...]
    values: tuple[Fraction, ...]
    weights: tuple[Vector, ...] | None = None

    def __post_init__(self):
        n = len(self.values)
        if len(self.basis) != n or n == 0:
            raise InputError("level needs one value per basis vector")
        if any(len(row) != n for row in self.basis):
            raise InputError("adapted basis must be square over the level")
        if matrix_rank(self.basis) != n:
            raise NotABasis(f"adapted basis of level {self.degree} is singular")
        if self.weights is not None:
            if len(self.weights) != n:
                raise InputError("need one torus weight per basis vector")
            ranks = {len(w) for w in self.weights}
            if len(ranks) != 1:
                raise InputError("torus weights of mixed rank")

    @classmethod
    def from_values(cls, degree: int, values, weights=None) -> "FiltrationLevel":
        vals = tuple(rat(v) for v in values)
        n = len(vals)
        basis = tuple(
            tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)
        )
        wts = tuple(rat_vector(w) for w in weights) if weights is not None else None
        return cls(degree, basis, vals, wts)

    @classmethod
    def from_flags(cls, degree: int, dim: int, flags, ambient_weights=None) -> "FiltrationLevel":
        """Build the diagonal form from nested flag matrices.

        ``flags`` is a list of (value, rows); row spaces must be nested
        decreasingly in the value and the lowest one must span the level.
        With ``ambient_weights`` each flag must be weight-decomposable and the
        returned basis is weight-homogeneous.
        """
        items = sorted(((rat(v), [rat_vector(r) for r in rows]) for v, rows in flags),
                       key=lambda t: -t[0])
        if any(len(r) != dim for _, rows in items for r in rows):
            raise InputError("flag rows of wrong ambient dimension")
        wts = [rat_vector(w) for w in ambient_weights] if ambient_weights is not None else None
        echelon: list[tuple[int, Vector]] = []
        chosen: list[tuple[Vector, Fraction, Vector | None]] = []

        def reduce_row(row):
            row = list(row)
            for piv, base in echelon:
                if row[piv] != 0:
                    factor = row[piv] / base[piv]
                    row = [x - factor * y for x, y in zip(row, base)]
            return row

        def add_row(row, value, weight):
            red = reduce_row(row)
            piv = next((j for j, x in enumerate(red) if x != 0), None)
            if piv is None:
                return False
            echelon.append((piv, tuple(red)))
            chosen.append((tuple(row), value, weight))
            return True

        cumulative = 0
        for value, rows in items:
            space_rank = matrix_rank(rows)
            if wts is None:
                for row in rows:
                    if add_row(row, value, None):
                        cumulative += 1
            else:
                for alpha, part in _weight_decompose(rows, wts):
                    for row in part:
                        if add_row(row, value, alpha):
                            cumulative += 1
            if cumulative != space_rank:
                raise InputError(
                    f"flag at value {value} of level {degree} is not nested/decomposable"
                )
        if cumulative != dim:
            raise InputError(f"flags of level {degree} do not span the level")
        basis = tuple(r for r, _, _ in chosen)
        values = tuple(v for _, v, _ in chosen)
        weights = tuple(w for _, _, w in chosen) if wts is not None else None
        return cls(degree, basis, values, weights)

    @property
    def dim(self) -> int:
        return len(self.values)

    def value_of(self, vector) -> Fraction:
        """max{lambda : vector in F^lambda} = min basis value with nonzero coefficient."""
        inv = invert([list(r) for r in self.basis])
        coeffs = [sum(x * inv[i][j] for i, x in enumerate(vector)) for j in range(self.dim)]
        present = [self.values[j] for j, c in enumerate(coeffs) if c != 0]
        if not present:
            raise InputError("cannot evaluate the zero vector")
        return min(present)

    def subspace_rows(self, value) -> list[Vector]:
        value = rat(value)
        return [r for r, v in zip(self.basis, self.values) if v >= value]


def _weight_decompose(rows, ambient_weights):
    """Split a row space into weight-homogeneous pieces; raise if not decomposable."""
    dim_total = matrix_rank(rows)
    by_weight: dict[Vector, list[int]] = {}
    for j, w in enumerate(ambient_weights):
        by_weight.setdefault(w, []).append(j)
    pieces = []
    found = 0
    n = len(ambient_weights)
    for alpha in sorted(by_weight):
        cols = by_weight[alpha]
        comp = [j for j in range(n) if j not in cols]
        # v = x . rows with v|comp = 0 <=> x in the left nullspace of rows[:, comp]
        basis_x = _left_nullspace([[r[j] for j in comp] for r in rows])
        part = []
        for x in basis_x:
            vec = tuple(sum(x[i] * rows[i][j] for i in range(len(rows))) for j in range(n))
            if any(c != 0 for c in vec):
                part.append(vec)
        if part:
            pieces.append((alpha, part))
            found += matrix_rank(part)
    if found != dim_total:
        raise InputError("flag subspace is not spanned by torus-weight vectors")
    return pieces


def _left_nullspace(rows):
    """Basis of {x : x . rows = 0} over Q."""
    k = len(rows)
    if k == 0:
        return []
    cols = len(rows[0]) if rows[0] else 0
    a = [[rows[i][j] for i in range(k)] for j in range(cols)]  # transpose: a x = 0
    pivots = []
    row = 0
    for col in range(k):
        piv = next((r for r in range(row, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        pivot = a[row][col]
        for r in range(len(a)):
            if r != row and a[r][col] != 0:
                factor = a[r][col] / pivot
                a[r] = [x - factor * y for x, y in zip(a[r], a[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(k) if c not in pivots]
    basis = []
    for fc in free:
        x = [Fraction(0)] * k
        x[fc] = Fraction(1)
        for rr, pc in enumerate(pivots):
            if rr < len(a):
                x[pc] = -a[rr][fc] / a[rr][pc]
        basis.append(tuple(x))
    return basis


@dataclass(frozen=True)
class GradedFiltration:
    levels: dict
    label: str = ""

    def level(self, m: int) -> FiltrationLevel:
        if m not in self.levels:
            raise MissingLevel(f"degree {m} not stored (have {sorted(self.levels)})")
        return self.levels[m]

    def degrees(self) -> list[int]:
        return sorted(self.levels)

    def has_weights(self) -> bool:
        return all(lv.weights is not None for lv in self.levels.values())

    def map_levels(self, fn, label=None) -> "GradedFiltration":
        return GradedFiltration({m: fn(lv) for m, lv in self.levels.items()},
                                label if label is not None else self.label)

    def to_json(self) -> dict:
        doc = {"label": self.label, "levels": {}}
        for m in self.degrees():
            lv = self.levels[m]
            entry = {
                "dim": lv.dim,
                "values": [format_rat(v) for v in lv.values],
            }
            identity = all(
                lv.basis[i][j] == (1 if i == j else 0)
                for i in range(lv.dim) for j in range(lv.dim)
            )
            if not identity:
                entry["basis"] = [[format_rat(x) for x in row] for row in lv.basis]
            if lv.weights is not None:
                entry["weights"] = [[format_rat(x) for x in w] for w in lv.weights]
            doc["levels"][str(m)] = entry
        return doc


def filtration_from_json(doc: dict) -> GradedFiltration:
    if not isinstance(doc, dict) or "levels" not in doc:
        raise InputError("filtration document needs a 'levels' map")
    levels = {}
    for key, entry in doc["levels"].items():
        m = int(key)
        dim = int(entry["dim"])
        weights = entry.get("weights")
        if "values" in entry:
            values = entry["values"]
            if len(values) != dim:
                raise InputError(f"level {m}: {len(values)} values for dim {dim}")
            if "basis" in entry:
                basis = tuple(rat_vector(r) for r in entry["basis"])
                wts = tuple(rat_vector(w) for w in weights) if weights else None
                levels[m] = FiltrationLevel(m, basis, tuple(rat(v) for v in values), wts)
            else:
                levels[m] = FiltrationLevel.from_values(m, values, weights)
        elif "flags" in entry:
            flags = [(f["value"], f["rows"]) for f in entry["flags"]]
            levels[m] = FiltrationLevel.from_flags(m, dim, flags, ambient_weights=weights)
        else:
            raise InputError(f"level {m} needs 'values' or 'flags'")
    return GradedFiltration(levels, str(doc.get("label", "")))


# ---------------------------------------------------------------------------
# per-level operations


def successive_minima(lv: FiltrationLevel) -> list[Fraction]:
    """Jump values with multiplicity, in decreasing order."""
    return sorted(lv.values, reverse=True)


def rescale_shift(F: GradedFiltration, a, b) -> GradedFiltration:
    """Values transform mu -> a*mu + b*m per degree m."""
    a, b = rat(a), rat(b)
    if a <= 0:
        raise NonpositiveScale(f"rescaling factor must be positive, got {a}")

    def fn(lv):
        return FiltrationLevel(
            lv.degree, lv.basis,
            tuple(a * v + b * lv.degree for v in lv.values), lv.weights,
        )

    return F.map_levels(fn)


def twist(F: GradedFiltration, xi) -> GradedFiltration:
    """Value of a weight-alpha vector becomes mu + <alpha, xi>."""
    xi = rat_vector(xi)

    def fn(lv):
        if lv.weights is None:
            raise MissingTorusWeights(f"level {lv.degree} has no torus weights")
        if any(len(w) != len(xi) for w in lv.weights):
            raise DimensionMismatch("twist vector rank does not match torus weights")
        vals = tuple(v + sum(a * x for a, x in zip(w, xi))
                     for v, w in zip(lv.values, lv.weights))
        return FiltrationLevel(lv.degree, lv.basis, vals, lv.weights)

    return F.map_levels(fn)


def empirical_dh(F: GradedFiltration, m: int, ambient_dim: int) -> DHMeasure:
    """Atoms at lambda_i/m with mass n!/m^n; carries weights alpha/m when present."""
    lv = F.level(m)
    mass = Fraction(factorial(ambient_dim), m**ambient_dim)
    atoms = []
    for i in range(lv.dim):
        weight = None
        if lv.weights is not None:
            weight = tuple(a / m for a in lv.weights[i])
        atoms.append((lv.values[i] / m, mass, weight))
    return DHMeasure.atomic(atoms)


@dataclass(frozen=True)
class CommonBasis:
    rows: tuple[Vector, ...]
    pairs: tuple[tuple[Fraction, Fraction], ...]


def common_adapted_basis(lv0: FiltrationLevel, lv1: FiltrationLevel) -> CommonBasis:
    """A basis adapted to both levels, with value pairs (mu_0, mu_1) per vector.

    Coordinates are taken in an adapted basis of lv0 sorted by decreasing
    value; rows adapted to lv1 are then echelonized from the right, which can
    only raise their lv0-value.  Pivot columns end up a permutation, so both
    successive-minima multisets are reproduced exactly.
    """
    if lv0.dim != lv1.dim:
        raise DimensionMismatch(f"levels of dim {lv0.dim} and {lv1.dim}")
    order0 = sorted(range(lv0.dim), key=lambda i: (-lv0.values[i], i))
    e_rows = [lv0.basis[i] for i in order0]
    mu0_sorted = [lv0.values[i] for i in order0]
    e_inv = invert([list(r) for r in e_rows])
    if e_inv is None:
        raise NotABasis("first level basis is singular")

    order1 = sorted(range(lv1.dim), key=lambda i: (-lv1.values[i], i))
    n = lv0.dim
    pivots: dict[int, list] = {}
    out = []
    for idx in order1:
        f = lv1.basis[idx]
        c = [sum(f[i] * e_inv[i][j] for i in range(n)) for j in range(n)]
        while True:
            piv = next((j for j in range(n - 1, -1, -1) if c[j] != 0), None)
            if piv is None:
                raise NotABasis("second level basis is singular")
            if piv not in pivots:
                break
            other = pivots[piv]
            factor = c[piv] / other[piv]
            c = [x - factor * y for x, y in zip(c, other)]
        pivots[piv] = c
        ambient = tuple(sum(c[j] * e_rows[j][i] for j in range(n)) for i in range(n))
        out.append((ambient, mu0_sorted[piv], lv1.values[idx]))
    rows = tuple(r for r, _, _ in out)
    pairs = tuple((m0, m1) for _, m0, m1 in out)
    return CommonBasis(rows, pairs)


def relative_minima(F0: GradedFiltration, F1: GradedFiltration, m: int) -> list[Fraction]:
    """Multiset {mu_{k,1} - mu_{k,0}} over a common adapted basis, descending."""
    cb = common_adapted_basis(F0.level(m), F1.level(m))
    return sorted((m1 - m0 for m0, m1 in cb.pairs), reverse=True)


def d_p_level(F0: GradedFiltration, F1: GradedFiltration, m: int, p=2) -> float:
    """((1/N_m) sum |delta mu / m|^p)^(1/p) at the fixed degree m."""
    if p < 1:
        raise InputError(f"p must be >= 1, got {p}")
    diffs = relative_minima(F0, F1, m)
    n = len(diffs)
    if p == int(p):
        total = sum((abs(d) / m) ** int(p) for d in diffs) / n
        return float(total) ** (1.0 / p)
    total = sum(abs(float(d) / m) ** p for d in diffs) / n
    return total ** (1.0 / p)


def q_m(F: GradedFiltration, m: int) -> float:
    """(1/N_m) sum_i e^{-lambda_i/m}."""
    lv = F.level(m)
    import math

    return math.fsum(math.exp(-float(v) / m) for v in lv.values) / lv.dim


def psi_m(F: GradedFiltration, m: int) -> float:
    return 1.0 - q_m(F, m)


def q_of_basis(F: GradedFiltration, m: int, basis_rows) -> float:
    """(1/N_m) sum_j e^{-v_F(s_j)/m} for an arbitrary basis; >= q_m always."""
    lv = F.level(m)
    rows = [rat_vector(r) for r in basis_rows]
    if len(rows) != lv.dim or matrix_rank(rows) != lv.dim:
        raise NotABasis("supplied vectors do not form a basis of the level")
    import math

    return math.fsum(math.exp(-float(lv.value_of(r)) / m) for r in rows) / lv.dim


# ---------------------------------------------------------------------------
# monomial models and initial-term degeneration


@dataclass(frozen=True)
class MonomialModel:
    """Degree-m monomials in num_vars variables, enumerated in graded lex order."""

    num_vars: int

    def monomials(self, m: int) -> list[tuple[int, ...]]:
        def gen(remaining, slots):
            if slots == 1:
                yield (remaining,)
                return
            for head in range(remaining, -1, -1):
                for tail in gen(remaining - head, slots - 1):
                    yield (head,) + tail

        return list(gen(m, self.num_vars))

    def dim(self, m: int) -> int:
        v = self.num_vars
        num = 1
        for i in range(1, v):
            num = num * (m + i)
        return num // factorial(v - 1)

    def monomial_weights(self, w, m: int) -> list[Fraction]:
        w = rat_vector(w)
        if len(w) != self.num_vars:
            raise InvalidWeightFiltration(
                f"weight vector of length {len(w)} for {self.num_vars} variables"
            )
        return [sum((wi * e for wi, e in zip(w, expo)), Fraction(0))
                for expo in self.monomials(m)]


def weight_filtration(model: MonomialModel, w, m: int) -> GradedFiltration:
    """The filtration of minimal monomial w-weight on the degree-m monomial basis."""
    cw = model.monomial_weights(w, m)
    level = FiltrationLevel.from_values(m, cw, weights=[(c,) for c in cw])
    return GradedFiltration({m: level}, label="weight-filtration")


def initial_term_degeneration(model: MonomialModel, w, F1: GradedFiltration, m: int) -> GradedFiltration:
    """Induced filtration on the associated graded of the w-weight filtration.

    For each jump value of F1 the degenerate subspace is spanned by the
    minimal-weight components of a left-to-right echelon basis (columns
    sorted by increasing monomial weight).  Dimensions per jump are
    preserved, so the successive-minima multiset is unchanged; the relative
    minima against the weight filtration become plain minima after twisting
    by the negated grading.
    """
    lv = F1.level(m)
    cw = model.monomial_weights(w, m)
    if lv.dim != len(cw):
        raise InvalidWeightFiltration(
            f"level dim {lv.dim} does not match the monomial basis ({len(cw)})"
        )
    col_order = sorted(range(len(cw)), key=lambda j: (cw[j], j))
    jumps = sorted(set(lv.values), reverse=True)
    flags = []
    for lam in jumps:
        rows = [list(r) for r in lv.subspace_rows(lam)]
        reordered = [[row[j] for j in col_order] for row in rows]
        reduced = _row_echelon(reordered)
        initial_rows = []
        for row in reduced:
            piv = next(j for j, x in enumerate(row) if x != 0)
            block = cw[col_order[piv]]
            vec = [Fraction(0)] * len(cw)
            for j, x in enumerate(row):
                if x != 0 and cw[col_order[j]] == block:
                    vec[col_order[j]] = x
            initial_rows.append(tuple(vec))
        flags.append((lam, initial_rows))
    level = FiltrationLevel.from_flags(m, lv.dim, flags,
                                       ambient_weights=[(c,) for c in cw])
    return GradedFiltration({m: level}, label=f"in_w({F1.label or 'F'})")


def _row_echelon(rows):
    """Leftmost-pivot reduced echelon basis of the row space (exact)."""
    a = [list(r) for r in rows]
    out = []
    ncols = len(a[0]) if a else 0
    row = 0
    for col in range(ncols):
        piv = next((r for r in range(row, len(a)) if a[r][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        pivot = a[row][col]
        a[row] = [x / pivot for x in a[row]]
        for r in range(len(a)):
            if r != row and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[row])]
        out.append(tuple(a[row]))
        row += 1
        if row == len(a):
            break
    return out


def multiplicativity_warnings(F: GradedFiltration) -> list[str]:
    """Superadditivity check of the top minima on stored degrees.

    A multiplicative filtration has lambda_max(m1+m2) >= lambda_max(m1) +
    lambda_max(m2); finite-level data cannot certify multiplicativity, but a
    violation disproves it.
    """
    degs = F.degrees()
    tops = {m: max(F.level(m).values) for m in degs}
    out = []
    for m1, m2 in itertools.combinations_with_replacement(degs, 2):
        if m1 + m2 in tops and tops[m1 + m2] < tops[m1] + tops[m2]:
            out.append(
                f"lambda_max({m1 + m2}) = {tops[m1 + m2]} < "
                f"lambda_max({m1}) + lambda_max({m2}) = {tops[m1] + tops[m2]}"
            )
    return out
