"""Built-in ansatz catalog, type aliases and the rank-two table rows."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import sympy

from .errors import ConeCertError
from .rootdata import _CLASS_KEYS, parse_delta, parse_type


@dataclass(frozen=True)
class BuiltinAnsatz:
    key: str
    type: str
    delta: str
    factors: tuple[tuple[tuple[Fraction, ...], Fraction], ...]
    vary: tuple[str, ...]
    t: int
    mult: dict = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class Alias:
    """A type served by another type's data path under relabeling."""

    name: str
    target: str
    delta: dict
    mult: dict

    def translate_delta(self, text: str, rank: int) -> str:
        idx = parse_delta(text, rank)
        return ",".join(sorted(self.delta[f"a{i + 1}"] for i in idx))

    def translate_mult(self, values: dict | None) -> dict | None:
        """Target-keyed multiplicities from source-keyed ones."""
        if values is None:
            return None
        return {tk: values[sk] for tk, sk in self.mult.items() if sk in values}

    def translate_names(self, names) -> tuple[str, ...]:
        inverse = {sk: tk for tk, sk in self.mult.items()}
        return tuple(inverse.get(n, n) for n in names)


@lru_cache(maxsize=1)
def load_catalog() -> dict:
    text = resources.files("conecert").joinpath("data/catalog.json").read_text()
    return json.loads(text)


def _factors(entries):
    return tuple(
        (tuple(Fraction(c) for c in e["coeffs"]), Fraction(e["exponent"])) for e in entries
    )


@lru_cache(maxsize=1)
def builtin_ansatze() -> dict[str, BuiltinAnsatz]:
    out = {}
    for e in load_catalog()["ansatze"]:
        th = e.get("threshold", {})
        out[e["key"]] = BuiltinAnsatz(
            e["key"], e["type"], e["delta"], _factors(e["factors"]),
            tuple(th.get("vary", ())), int(th.get("t", 0)), dict(e.get("mult", {})),
        )
    return out


def aliases() -> dict[str, Alias]:
    return {k: Alias(k, v["target"], v["delta"], v["mult"]) for k, v in load_catalog()["aliases"].items()}


def builtin_key(type_label: str, delta) -> str:
    family, rank = parse_type(type_label)
    idx = parse_delta(delta, rank) if isinstance(delta, str) else frozenset(delta)
    return f"{family}{rank}/" + ",".join(f"a{i + 1}" for i in sorted(idx))


def find_builtin(type_label: str, delta) -> BuiltinAnsatz | None:
    return builtin_ansatze().get(builtin_key(type_label, delta))


def class_keys(type_label: str) -> tuple[str, ...]:
    family, _ = parse_type(type_label)
    return _CLASS_KEYS[family]


def parse_mult(text: str | None, type_label: str) -> dict[str, str] | None:
    """Multiplicities from ``"2"``, ``"1,2"`` or ``"m1=1,m2=n"``."""
    if text is None or not text.strip():
        return None
    keys = class_keys(type_label)
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if all("=" in p for p in parts):
        out = {}
        for p in parts:
            k, v = (s.strip() for s in p.split("=", 1))
            out[k] = v
        return out
    if any("=" in p for p in parts):
        raise ConeCertError("BAD_MULT", f"cannot mix keyed and positional multiplicities: {text!r}")
    if len(parts) == 1:
        return {k: parts[0] for k in keys}
    if len(parts) != len(keys):
        raise ConeCertError("BAD_MULT", f"{type_label} expects {len(keys)} multiplicities {keys}, got {text!r}")
    return dict(zip(keys, parts))


def table_rows() -> list[dict]:
    return load_catalog()["rows"]


def parse_dims(text: str):
    """``"(n+2,2n+3)"`` to a pair of sympy expressions."""
    a, b = text.strip()[1:-1].split(",")
    return _expr(a), _expr(b)


def _expr(text: str):
    return sympy.sympify(re.sub(r"(\d)([a-z])", r"\1*\2", text.strip()))
