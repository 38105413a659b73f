"""Restricted root systems with multiplicities, in exact rational coordinates.

Ambient conventions: A_l lives in the sum-zero hyperplane of Q^{l+1}; B_l, C_l
and BC_l use the standard basis e_1..e_l; G_2 is realized on the span of its
simple roots with the metric given by its Gram matrix.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations

import sympy

from .errors import RootDataError
from .polynomial import Poly

Vector = tuple[Fraction, ...]

FAMILIES = ("A", "B", "C", "BC", "G")


def _vec(values) -> Vector:
    return tuple(Fraction(v) for v in values)


def _e(n, *pairs) -> Vector:
    v = [Fraction(0)] * n
    for i, c in pairs:
        v[i] += c
    return tuple(v)


def format_fraction(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class LinearForm:
    """``lambda = sum c_alpha alpha``; evaluates to ``<lambda, x>`` on chamber coordinates."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _vec(self.coeffs))

    @property
    def rank(self):
        return len(self.coeffs)

    def __call__(self, x):
        return sum(c * xi for c, xi in zip(self.coeffs, x))

    def __add__(self, other):
        return LinearForm(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, k):
        return LinearForm(tuple(c * Fraction(k) for c in self.coeffs))

    __rmul__ = __mul__

    def support(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.coeffs) if c)

    def vanishes_on(self, delta) -> bool:
        """True iff the form is identically zero on the face C^delta."""
        return not (self.support() & frozenset(delta))

    def is_nonnegative(self):
        return all(c >= 0 for c in self.coeffs)

    def to_poly(self) -> Poly:
        return Poly.linear(self.coeffs)

    def label(self, names=None):
        names = names or [f"a{i + 1}" for i in range(self.rank)]
        parts = []
        for n, c in zip(names, self.coeffs):
            if not c:
                continue
            body = n if abs(c) == 1 else f"{format_fraction(abs(c))}{n}"
            parts.append(("-" if c < 0 else "+") + body)
        s = "".join(parts) or "0"
        return s[1:] if s[0] == "+" else s


@dataclass(frozen=True)
class Root:
    coeffs: tuple[int, ...]
    vector: Vector
    cls: str

    @property
    def form(self) -> LinearForm:
        return LinearForm(self.coeffs)

    @property
    def height(self):
        return sum(self.coeffs)


@dataclass(frozen=True)
class DualBasis:
    """``H[a]`` is the ambient vector with ``<H_a, beta> = delta_{a beta}``."""

    H: tuple[Vector, ...]

    def __getitem__(self, i):
        return self.H[i]

    def __len__(self):
        return len(self.H)


@dataclass(frozen=True)
class ChamberFace:
    """The face ``C^delta = {sum_{a in delta} x_a H_a : x_a > 0}``."""

    delta: frozenset[int]
    rank: int

    def in_closure_of(self, other: "ChamberFace") -> bool:
        return self.delta <= other.delta

    def form_vanishes(self, form: LinearForm) -> bool:
        return form.vanishes_on(self.delta)

    @property
    def label(self):
        return delta_label(self.delta)


def delta_label(delta) -> str:
    return ",".join(f"a{i + 1}" for i in sorted(delta)) or "{}"


def parse_delta(text: str, rank: int) -> frozenset[int]:
    out = set()
    for tok in re.split(r"[,\s]+", text.strip()):
        if not tok:
            continue
        m = re.fullmatch(r"(?:a|alpha)?_?(\d+)", tok.lower())
        if not m or not 1 <= int(m.group(1)) <= rank:
            raise RootDataError("BAD_DELTA", f"cannot parse simple root {tok!r} for rank {rank}")
        out.add(int(m.group(1)) - 1)
    if not out:
        raise RootDataError("BAD_DELTA", "empty subset of simple roots")
    return frozenset(out)


def _to_expr(value):
    if isinstance(value, sympy.Expr):
        return value
    if isinstance(value, str):
        return sympy.sympify(value.replace("^", "**"))
    return sympy.Integer(value)


@dataclass(frozen=True)
class RootSystem:
    family: str
    rank: int
    metric: tuple[Vector, ...]
    simple_roots: tuple[Vector, ...]
    positive_roots: tuple[Root, ...]
    multiplicities: tuple[tuple[str, sympy.Expr], ...]

    @property
    def label(self):
        return f"{self.family}{self.rank}"

    @property
    def mult(self) -> dict[str, sympy.Expr]:
        return dict(self.multiplicities)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.multiplicities)

    def multiplicity(self, root: Root):
        return self.mult[root.cls]

    def inner(self, u, v):
        return sum(u[i] * self.metric[i][j] * v[j] for i in range(len(u)) for j in range(len(v)))

    @cached_property
    def gram(self) -> tuple[Vector, ...]:
        F = self.simple_roots
        return tuple(tuple(self.inner(a, b) for b in F) for a in F)

    @cached_property
    def gram_inverse(self) -> tuple[Vector, ...]:
        M = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in self.gram])
        if M.det() == 0:
            raise RootDataError("SINGULAR_GRAM", f"Gram matrix of {self.label} is singular")
        inv = M.inv()
        return tuple(
            tuple(Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(self.rank))
            for i in range(self.rank)
        )

    def form_inner(self, u: LinearForm, v: LinearForm) -> Fraction:
        """``<lambda, mu>`` for forms given in simple-root coefficients."""
        G = self.gram
        return sum(
            u.coeffs[i] * G[i][j] * v.coeffs[j] for i in range(self.rank) for j in range(self.rank)
        )

    def chamber_inner(self, x, y):
        """Inner product of ``sum x_a H_a`` and ``sum y_a H_a``."""
        Gi = self.gram_inverse
        return sum(x[i] * Gi[i][j] * y[j] for i in range(self.rank) for j in range(self.rank))

    def ambient(self, x) -> tuple:
        """Ambient vector of the chamber point ``sum x_a H_a``."""
        H = dual_basis(self).H
        dim = len(self.metric)
        return tuple(sum(x[a] * H[a][k] for a in range(self.rank)) for k in range(dim))

    @property
    def symbols(self) -> set:
        out = set()
        for _, m in self.multiplicities:
            out |= m.free_symbols
        return out

    def is_concrete(self):
        return not self.symbols

    def substitute(self, values) -> "RootSystem":
        """Replace symbols (by name) with values; returns a new system."""
        subs = {sympy.Symbol(k): _to_expr(v) for k, v in values.items()}
        mult = tuple((c, sympy.expand(m.subs(subs))) for c, m in self.multiplicities)
        return RootSystem(
            self.family, self.rank, self.metric, self.simple_roots, self.positive_roots, mult
        )

    def int_multiplicities(self) -> dict[str, int]:
        if not self.is_concrete():
            raise RootDataError("SYMBOLIC_MULTIPLICITY", f"{self.mult} is not concrete")
        return {c: int(m) for c, m in self.multiplicities}

    def contributing_roots(self, delta) -> list[Root]:
        """Roots not vanishing on C^delta, i.e. ``R_+ minus R_+^delta``."""
        return [r for r in self.positive_roots if not r.form.vanishes_on(delta)]


# -- family tables ------------------------------------------------------------

_CLASS_KEYS = {
    "A": ("m",),
    "B": ("m1", "m2"),
    "C": ("m1", "m2"),
    "BC": ("m1", "m2", "m3"),
    "G": ("m1", "m2"),
}

G2_GRAM = ((Fraction(1), Fraction(-3, 2)), (Fraction(-3, 2), Fraction(3)))
_G2_ROOTS = (
    ((1, 0), "m1"),
    ((0, 1), "m2"),
    ((1, 1), "m1"),
    ((2, 1), "m1"),
    ((3, 1), "m2"),
    ((3, 2), "m2"),
)


def _family_data(family, l):
    """(metric, simple roots, [(ambient vector, class)]) for a supported family."""
    if family == "A":
        n = l + 1
        simple = [_e(n, (i, 1), (i + 1, -1)) for i in range(l)]
        roots = [(_e(n, (i, 1), (j, -1)), "m") for i in range(n) for j in range(i + 1, n)]
    elif family in ("B", "C", "BC"):
        n = l
        simple = [_e(n, (i, 1), (i + 1, -1)) for i in range(l - 1)]
        simple.append(_e(n, (l - 1, 2 if family == "C" else 1)))
        pm = [_e(n, (i, 1), (j, s)) for i in range(n) for j in range(i + 1, n) for s in (-1, 1)]
        single = [_e(n, (i, 1)) for i in range(n)]
        double = [_e(n, (i, 2)) for i in range(n)]
        if family == "B":
            roots = [(v, "m1") for v in pm] + [(v, "m2") for v in single]
        elif family == "C":
            roots = [(v, "m1") for v in pm] + [(v, "m2") for v in double]
        else:
            roots = [(v, "m1") for v in pm] + [(v, "m2") for v in single] + [(v, "m3") for v in double]
    elif family == "G":
        if l != 2:
            raise RootDataError("UNSUPPORTED_FAMILY", "G exists only in rank 2")
        n = 2
        simple = [_e(2, (0, 1)), _e(2, (1, 1))]
        roots = [(_vec(c), cls) for c, cls in _G2_ROOTS]
        return G2_GRAM, simple, roots
    else:
        raise RootDataError("UNSUPPORTED_FAMILY", f"unknown family {family!r}")
    metric = tuple(_e(n, (i, 1)) for i in range(n))
    return metric, simple, roots


_EXPECTED_COUNT = {
    "A": lambda l: l * (l + 1) // 2,
    "B": lambda l: l * l,
    "C": lambda l: l * l,
    "BC": lambda l: l * l + l,
    "G": lambda l: 6,
}


def _normalize_multiplicities(family, assignment):
    keys = _CLASS_KEYS[family]
    if assignment is None:
        return family, {k: sympy.Symbol(k) for k in keys}
    if isinstance(assignment, (int, str, sympy.Expr)):
        assignment = {k: assignment for k in keys}
    elif isinstance(assignment, (list, tuple)):
        if len(assignment) == len(keys) + 1 and family == "B":
            assignment = dict(zip(("m1", "m2", "m3"), assignment))
        elif len(assignment) != len(keys):
            raise RootDataError(
                "MULTIPLICITY_KEYS", f"{family} expects {len(keys)} multiplicities, got {len(assignment)}"
            )
        else:
            assignment = dict(zip(keys, assignment))
    mult = {k: _to_expr(v) for k, v in assignment.items()}
    # BC with vanishing long-root multiplicity is B; B tolerates an explicit m3 = 0.
    if family in ("B", "BC") and "m3" in mult and mult["m3"] == 0:
        family = "B"
        del mult["m3"]
    if set(mult) != set(_CLASS_KEYS[family]):
        raise RootDataError(
            "MULTIPLICITY_KEYS",
            f"{family} expects keys {sorted(_CLASS_KEYS[family])}, got {sorted(mult)}",
        )
    for k, m in mult.items():
        if m.is_number and (not m.is_integer or m <= 0):
            raise RootDataError("NONPOSITIVE_MULTIPLICITY", f"{k} = {m}")
    return family, mult


def parse_type(label: str):
    """``'BC2'`` -> ``('BC', 2)``."""
    m = re.fullmatch(r"\s*(BC|A|B|C|G)_?(\d+)\s*", label.upper())
    if not m:
        raise RootDataError("UNSUPPORTED_FAMILY", f"cannot parse root system type {label!r}")
    return m.group(1), int(m.group(2))


def build_root_system(family: str, rank: int | None = None, multiplicities=None) -> RootSystem:
    """Build a restricted root system.

    ``multiplicities`` may be a mapping keyed by root class (``m`` for A_l;
    ``m1, m2`` for B_l, C_l, G_2; ``m1, m2, m3`` for BC_l), a sequence in that
    order, a single value used for every class, or ``None`` for one symbol per
    class. Values are positive integers or sympy expressions.
    """
    if rank is None:
        family, rank = parse_type(family)
    family = family.upper()
    if family not in FAMILIES:
        raise RootDataError("UNSUPPORTED_FAMILY", f"unknown family {family!r}")
    if rank < 1 or (family == "G" and rank != 2):
        raise RootDataError("UNSUPPORTED_FAMILY", f"{family}{rank} is not supported")
    family, mult = _normalize_multiplicities(family, multiplicities)

    metric, simple, roots = _family_data(family, rank)
    proto = RootSystem(family, rank, metric, tuple(simple), (), ())
    H = dual_basis(proto).H
    built = []
    for vec, cls in roots:
        coeffs = [proto.inner(vec, H[a]) for a in range(rank)]
        if any(c.denominator != 1 or c < 0 for c in coeffs):
            raise RootDataError("BAD_ROOT_TABLE", f"{vec} is not a nonnegative integral combination")
        built.append(Root(tuple(int(c) for c in coeffs), vec, cls))
    built.sort(key=lambda r: (r.height, tuple(-c for c in r.coeffs)))
    rs = RootSystem(family, rank, metric, tuple(simple), tuple(built), tuple((k, mult[k]) for k in _CLASS_KEYS[family]))
    _validate(rs)
    return rs


def _validate(rs: RootSystem):
    if len(rs.positive_roots) != _EXPECTED_COUNT[rs.family](rs.rank):
        raise RootDataError("BAD_ROOT_TABLE", f"wrong number of positive roots for {rs.label}")
    G = rs.gram
    for i in range(rs.rank):
        if G[i][i] <= 0:
            raise RootDataError("BAD_ROOT_TABLE", "Gram matrix not positive definite")
    M = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in G])
    if not M.is_positive_definite:
        raise RootDataError("BAD_ROOT_TABLE", "Gram matrix not positive definite")
    # closure under simple reflections, using the Cartan integers
    cartan = [[2 * G[i][j] / G[j][j] for j in range(rs.rank)] for i in range(rs.rank)]
    coeff_set = {r.coeffs for r in rs.positive_roots}
    for r in rs.positive_roots:
        for j in range(rs.rank):
            pairing = sum(r.coeffs[i] * cartan[i][j] for i in range(rs.rank))
            if pairing.denominator != 1:
                raise RootDataError("BAD_ROOT_TABLE", f"non-integral Cartan pairing for {r.coeffs}")
            image = list(r.coeffs)
            image[j] -= int(pairing)
            image = tuple(image)
            if image in coeff_set:
                continue
            neg = tuple(-c for c in image)
            if neg in coeff_set and sum(1 for c in neg if c) == 1:
                continue  # s_j sends a multiple of alpha_j to its negative
            raise RootDataError("BAD_ROOT_TABLE", f"{rs.label}: s_{j + 1}{r.coeffs} = {image} missing")
    for cls in rs.classes:
        if not any(r.cls == cls for r in rs.positive_roots):
            raise RootDataError("BAD_ROOT_TABLE", f"empty root class {cls}")


def dual_basis(rs: RootSystem) -> DualBasis:
    """Solve ``<H_a, beta> = delta_{a beta}`` exactly through the inverse Gram matrix."""
    Gi = rs.gram_inverse
    dim = len(rs.metric)
    H = tuple(
        tuple(sum(Gi[a][b] * rs.simple_roots[b][k] for b in range(rs.rank)) for k in range(dim))
        for a in range(rs.rank)
    )
    for a in range(rs.rank):
        for b in range(rs.rank):
            if rs.inner(H[a], rs.simple_roots[b]) != (1 if a == b else 0):
                raise RootDataError("SINGULAR_GRAM", "dual basis failed exact check")
    return DualBasis(H)


def to_chamber_coords(rs: RootSystem, vector) -> LinearForm:
    """Simple-root expansion of a root or ambient vector (pairing with the dual basis)."""
    if isinstance(vector, Root):
        vector = vector.vector
    vector = _vec(vector)
    H = dual_basis(rs).H
    coeffs = tuple(rs.inner(vector, H[a]) for a in range(rs.rank))
    back = tuple(sum(coeffs[a] * rs.simple_roots[a][k] for a in range(rs.rank)) for k in range(len(vector)))
    if back != vector:
        raise RootDataError("OUTSIDE_SPAN", f"{vector} is not in the span of the simple roots")
    return LinearForm(coeffs)


def face_lattice(rs: RootSystem) -> list[ChamberFace]:
    """All ``2**rank`` faces, ordered by size then lexicographically."""
    idx = range(rs.rank)
    return [
        ChamberFace(frozenset(c), rs.rank)
        for k in range(rs.rank + 1)
        for c in combinations(idx, k)
    ]


def orbit_dimension(rs: RootSystem, delta0):
    """``(dim orbit, dim sphere)`` for the orbit through the face ``C^delta0``.

    Values are sympy expressions (plain integers when the multiplicities are).
    """
    delta0 = frozenset(delta0)
    if not delta0:
        raise RootDataError("BAD_DELTA", "delta0 must be nonempty")
    k = sum((rs.multiplicity(r) for r in rs.contributing_roots(delta0)), sympy.Integer(0))
    total = sum((rs.multiplicity(r) for r in rs.positive_roots), sympy.Integer(0))
    return sympy.expand(k), sympy.expand(rs.rank + total - 1)
