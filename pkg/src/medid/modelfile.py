"""Model file parsing.

A model is a single UTF-8 TOML document (``schema = 1``) with sections
``variables``, ``noise``, ``mechanisms``, and optional ``cpt`` blocks that
are expanded through the inverse-CDF sugar at load time. Rationals are
written as strings like ``"3/4"``. Unknown keys are rejected.

Mechanism table keys encode ``parent states ; noise value``, e.g. ``"0,1;2"``
(empty parent part for root variables: ``";2"``). CPT row keys encode the
parent states only, e.g. ``"0,1"`` (empty string for root variables).
"""

from __future__ import annotations

import importlib.resources
from fractions import Fraction
from pathlib import Path
from typing import Union

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - python < 3.11
    import tomli as tomllib

from .errors import ModelError
from .scm import Mechanism, NoiseDecl, Scm, VariableDecl, expand_cpt_sugar

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema", "variables", "noise", "mechanisms", "cpt"}
_VARIABLE_KEYS = {"name", "role", "states", "values"}
_NOISE_KEYS = {"variable", "name", "support", "probs"}
_MECHANISM_KEYS = {"variable", "parents", "table"}
_CPT_KEYS = {"variable", "parents", "rows"}


def parse_rational(text) -> Fraction:
    """Parse an exact rational written as ``"n/d"`` or an integer string.

    Irrational or floating-point probabilities are rejected: the engine's
    exactness contract requires rational inputs.
    """
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ModelError(f"probability {text!r} must be an exact rational string like '3/4'")
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ModelError(f"bad rational {text!r}: {exc}") from None


def _check_keys(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ModelError(f"unknown keys in {where}: {sorted(unknown)}")


def load_model_text(text: str) -> Scm:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ModelError(f"model file is not valid TOML: {exc}") from None
    _check_keys(doc, _TOP_KEYS, "model file")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ModelError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA_VERSION}")

    variables: list[VariableDecl] = []
    for raw in doc.get("variables", []):
        _check_keys(raw, _VARIABLE_KEYS, f"variable {raw.get('name')!r}")
        values = None
        if "values" in raw:
            values = tuple(parse_rational(v) for v in raw["values"])
            if len(values) != len(raw["states"]):
                raise ModelError(f"variable {raw['name']}: values/states length mismatch")
        variables.append(
            VariableDecl(
                name=raw["name"],
                states=tuple(str(s) for s in raw["states"]),
                role=raw["role"],
                values=values,
            )
        )
    by_name = {v.name: v for v in variables}

    noises: dict[str, NoiseDecl] = {}
    for raw in doc.get("noise", []):
        _check_keys(raw, _NOISE_KEYS, f"noise for {raw.get('variable')!r}")
        var = raw["variable"]
        support = tuple(int(u) for u in raw["support"])
        probs = tuple(parse_rational(p) for p in raw["probs"])
        if len(support) != len(probs):
            raise ModelError(f"noise for {var}: support/probs length mismatch")
        # Zero-mass support points are deleted at load.
        kept = [(u, p) for u, p in zip(support, probs) if p != 0]
        noises[var] = NoiseDecl(
            name=raw.get("name", f"U_{var}"),
            support=tuple(u for u, _ in kept),
            probs=tuple(p for _, p in kept),
        )

    mechanisms: dict[str, Mechanism] = {}
    for raw in doc.get("mechanisms", []):
        _check_keys(raw, _MECHANISM_KEYS, f"mechanism for {raw.get('variable')!r}")
        var = raw["variable"]
        parents = tuple(raw.get("parents", []))
        table: dict[tuple[tuple[str, ...], int], str] = {}
        for key, state in raw["table"].items():
            parent_part, _, noise_part = key.partition(";")
            parent_states = tuple(parent_part.split(",")) if parent_part else ()
            table[(parent_states, int(noise_part))] = str(state)
        mechanisms[var] = Mechanism(variable=var, parents=parents, table=table)

    for raw in doc.get("cpt", []):
        _check_keys(raw, _CPT_KEYS, f"cpt for {raw.get('variable')!r}")
        var = raw["variable"]
        if var not in by_name:
            raise ModelError(f"cpt for unknown variable {var}")
        if var in mechanisms or var in noises:
            raise ModelError(f"variable {var} has both an explicit mechanism/noise and a cpt block")
        parents = tuple(raw.get("parents", []))
        rows: dict[tuple[str, ...], tuple[Fraction, ...]] = {}
        for key, row in raw["rows"].items():
            parent_states = tuple(key.split(",")) if key else ()
            if len(parent_states) != len(parents):
                raise ModelError(f"cpt row key {key!r} for {var} does not match parents {parents}")
            rows[parent_states] = tuple(parse_rational(p) for p in row)
        expected_rows = 1
        for p in parents:
            if p not in by_name:
                raise ModelError(f"cpt for {var} names unknown parent {p}")
            expected_rows *= len(by_name[p].states)
        if len(rows) != expected_rows:
            raise ModelError(f"cpt for {var} has {len(rows)} rows, expected {expected_rows}")
        noise, mech = expand_cpt_sugar(by_name[var], parents, rows)
        noises[var] = noise
        mechanisms[var] = mech

    return Scm(variables=tuple(variables), noises=noises, mechanisms=mechanisms)


def load_model(path: Union[str, Path]) -> Scm:
    return load_model_text(Path(path).read_text(encoding="utf-8"))


def builtin_model_path(name: str) -> Path:
    """Path of a shipped demo model (toy1, toy2, toy3, toy3_anti, toy4)."""
    resource = importlib.resources.files("medid") / "models" / f"{name}.model"
    if not resource.is_file():
        raise ModelError(f"no builtin model named {name!r}")
    return Path(str(resource))


def builtin_model(name: str) -> Scm:
    return load_model(builtin_model_path(name))


_ROLES_TOP_KEYS = {"schema", "variables"}


def load_roles_text(text: str) -> tuple[VariableDecl, ...]:
    """Roles file: the ``variables`` section of a model file, standalone.

    Used with CSV datasets, where the file supplies role tags, state order,
    and numeric values that raw data cannot carry.
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ModelError(f"roles file is not valid TOML: {exc}") from None
    _check_keys(doc, _ROLES_TOP_KEYS, "roles file")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ModelError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA_VERSION}")
    variables = []
    for raw in doc.get("variables", []):
        _check_keys(raw, _VARIABLE_KEYS, f"variable {raw.get('name')!r}")
        values = None
        if "values" in raw:
            values = tuple(parse_rational(v) for v in raw["values"])
        variables.append(
            VariableDecl(
                name=raw["name"],
                states=tuple(str(s) for s in raw["states"]),
                role=raw["role"],
                values=values,
            )
        )
    return tuple(variables)


def load_roles(path: Union[str, Path]) -> tuple[VariableDecl, ...]:
    return load_roles_text(Path(path).read_text(encoding="utf-8"))
