"""JSON run configurations: schema, validation with JSON-pointer diagnostics, and object builders.

Rationals are strings "p/q" (or "p"); complex numbers are [re, im]; field elements are arrays of
rationals on the integral basis. A lattice is either given by an explicit Gram matrix or by the
name of a catalogued example.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Any

import jsonschema

from . import catalog
from .field import FieldElement, FieldSpec, make_field
from .lattice import OFLattice, lattice_from_gram

RATIONAL = {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}
COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
ELEMENT = {"type": "array", "items": RATIONAL, "minItems": 1}

CATALOG_LATTICES = {
    "a1": catalog.a1,
    "hyperbolic_plane": catalog.hyperbolic_plane,
    "d1_signature_12": catalog.d1_signature_12,
    "d1_signature_12_alt": catalog.d1_signature_12_alt,
    "d2_mixed": catalog.d2_mixed,
    "sqrt3_L0": catalog.sqrt3_L0,
    "sqrt3_L1": catalog.sqrt3_L1,
    "sqrt3_L": catalog.sqrt3_L,
}

LETTER = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["S", "T", "N", "Z", "M"]},
        "b": ELEMENT,
        "eps": ELEMENT,
    },
    "required": ["kind"],
    "additionalProperties": False,
}

TERM = {
    "type": "object",
    "properties": {"m": ELEMENT, "mu": {"type": "integer", "minimum": 0}, "c": COMPLEX},
    "required": ["m", "mu", "c"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "field": {
            "type": "object",
            "properties": {
                "poly": {"type": "array", "items": {"type": "integer"}, "minItems": 2},
                "integral_basis": {"type": "array", "items": {"type": "array", "items": RATIONAL}},
                "sigma1_root_index": {"type": "integer", "minimum": 0},
                "precision_digits": {"type": "integer", "minimum": 20, "default": 50},
            },
            "required": ["poly"],
            "additionalProperties": False,
        },
        "lattice": {
            "type": "object",
            "properties": {
                "catalog": {"enum": sorted(CATALOG_LATTICES)},
                "gram": {"type": "array", "items": {"type": "array", "items": ELEMENT}, "minItems": 1},
                "zbasis": {"type": "array", "items": {"type": "array", "items": RATIONAL}},
                "admissible": {"type": "boolean"},
            },
            "oneOf": [{"required": ["catalog"]}, {"required": ["gram"]}],
            "additionalProperties": False,
        },
        "point": {"type": "array", "items": COMPLEX, "minItems": 1},
        "tau": {"type": "array", "items": COMPLEX, "minItems": 1},
        "word": {"type": "array", "items": LETTER},
        "words": {"type": "array", "items": {"type": "array", "items": LETTER}},
        "specfun": {
            "type": "object",
            "properties": {
                "function": {"enum": ["whittaker_m", "whittaker_w", "upper_gamma", "gauss_2f1", "m_cal", "w_cal",
                                      "m_special", "w_special", "reglift_g"]},
                "args": {"type": "object"},
            },
            "required": ["function", "args"],
            "additionalProperties": False,
        },
        "whittaker": {
            "type": "object",
            "properties": {
                "form": {
                    "type": "object",
                    "properties": {
                        "weight": {"type": "array", "items": RATIONAL, "minItems": 1},
                        "terms": {"type": "array", "items": TERM},
                    },
                    "required": ["weight", "terms"],
                    "additionalProperties": False,
                },
                "s": {"type": "number"},
                "cusp_basis": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "weight": {"type": "array", "items": RATIONAL, "minItems": 1},
                            "coeffs": {"type": "array", "items": TERM},
                        },
                        "required": ["weight", "coeffs"],
                        "additionalProperties": False,
                    },
                },
                "eisenstein": {"type": "array", "items": TERM},
                "residues": {"type": "array", "items": TERM},
            },
            "required": ["form"],
            "additionalProperties": False,
        },
        "green": {
            "type": "object",
            "properties": {
                "m": ELEMENT,
                "mu": {"type": "integer", "minimum": 0},
                "s": {"type": "number"},
                "truncation_radius": {"type": "number", "exclusiveMinimum": 0},
                "singular_threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.01},
                "pole_steps": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
                "path": {
                    "type": "object",
                    "properties": {
                        "start": {"type": "array", "items": COMPLEX, "minItems": 1},
                        "divisor_vector": {"type": "array", "items": RATIONAL, "minItems": 1},
                        "direction": {"type": "array", "items": COMPLEX, "minItems": 1},
                        "t": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                    },
                    "required": ["direction", "t"],
                    "oneOf": [{"required": ["start"]}, {"required": ["divisor_vector"]}],
                    "additionalProperties": False,
                },
            },
            "required": ["m"],
            "additionalProperties": False,
        },
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid configuration; ``pointer`` locates the offending value (RFC 6901)."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.message = message

    def payload(self) -> dict:
        return {"error": "config", "pointer": self.pointer, "message": self.message}


def _pointer(path) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def validate(raw: dict) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ConfigError(_pointer(err.absolute_path), err.message)


def parse_rational(text: str, pointer: str = "") -> Fraction:
    try:
        return Fraction(text.replace(" ", ""))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(pointer, f"not a rational: {text!r} ({exc})") from None


def config_hash(raw: dict) -> str:
    return hashlib.sha256(json.dumps(raw, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


@dataclass
class RunConfig:
    raw: dict
    tol: float = 1e-10
    threads: int = 1
    _cache: dict = dc_field(default_factory=dict, repr=False)

    @staticmethod
    def from_dict(raw: dict, tol: float | None = None, threads: int = 1) -> "RunConfig":
        validate(raw)
        t = tol if tol is not None else float(raw.get("tol", 1e-10))
        return RunConfig(raw, t, threads)

    @staticmethod
    def load(path: str | Path, tol: float | None = None, threads: int = 1) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError("", f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("", "top level must be an object")
        return RunConfig.from_dict(raw, tol, threads)

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    def require(self, key: str) -> Any:
        if key not in self.raw:
            raise ConfigError(f"/{key}", "required for this subcommand")
        return self.raw[key]

    # -- builders ----------------------------------------------------------------

    @property
    def field(self) -> FieldSpec:
        if "field" not in self._cache:
            if "field" in self.raw:
                f = self.raw["field"]
                basis = None
                if "integral_basis" in f:
                    basis = [[parse_rational(x, f"/field/integral_basis/{i}/{j}") for j, x in enumerate(row)]
                             for i, row in enumerate(f["integral_basis"])]
                try:
                    self._cache["field"] = make_field(f["poly"], basis, f.get("sigma1_root_index", 0),
                                                      f.get("precision_digits", 50))
                except ValueError as exc:
                    raise ConfigError("/field", str(exc)) from None
            elif "lattice" in self.raw and "catalog" in self.raw["lattice"]:
                self._cache["field"] = self.lattice.field
            else:
                raise ConfigError("/field", "required for this subcommand")
        return self._cache["field"]

    def element(self, coords, pointer: str) -> FieldElement:
        f = self.field
        if len(coords) != f.degree:
            raise ConfigError(pointer, f"expected {f.degree} coordinates, got {len(coords)}")
        return f.element([parse_rational(x, f"{pointer}/{i}") for i, x in enumerate(coords)])

    @property
    def lattice(self) -> OFLattice:
        if "lattice" not in self._cache:
            spec = self.require("lattice")
            if "catalog" in spec:
                self._cache["lattice"] = CATALOG_LATTICES[spec["catalog"]]()
            else:
                gram = [[self.element(x, f"/lattice/gram/{i}/{j}") for j, x in enumerate(row)]
                        for i, row in enumerate(spec["gram"])]
                zb = None
                if "zbasis" in spec:
                    zb = [[parse_rational(x, f"/lattice/zbasis/{i}/{j}") for j, x in enumerate(row)]
                          for i, row in enumerate(spec["zbasis"])]
                try:
                    self._cache["lattice"] = lattice_from_gram(self.field, gram, zb, spec.get("admissible", False))
                except ValueError as exc:
                    raise ConfigError("/lattice", str(exc)) from None
        return self._cache["lattice"]

    def complex_list(self, key_path: list) -> list[complex]:
        node = self.raw
        for k in key_path:
            node = node[k]
        return [complex(a, b) for a, b in node]
