"""Finite discrete structural causal models with explicit exogenous noise.

A model fixes, for every endogenous variable, a finite-support noise term and
a deterministic mechanism, so every counterfactual quantity is well defined.
All probabilities are exact rationals (``fractions.Fraction``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .errors import EnumerationCapError, ModelError

ROLE_C = "C"
ROLE_A = "A"
ROLE_L = "L"
ROLE_M = "M"
ROLE_Y = "Y"
ROLES = (ROLE_C, ROLE_A, ROLE_L, ROLE_M, ROLE_Y)

DEFAULT_ENUMERATION_CAP = 10**8


@dataclass(frozen=True)
class VariableDecl:
    """An endogenous variable: name, ordered state labels, causal role.

    ``values`` optionally attaches a numeric value to each state (needed for
    expectations over Y, and over M when M enters numerically). When omitted,
    states whose labels parse as integers get their label value.
    """

    name: str
    states: tuple[str, ...]
    role: str
    values: Optional[tuple[Fraction, ...]] = None

    def numeric_value(self, state: str) -> Fraction:
        idx = self.states.index(state)
        if self.values is not None:
            return self.values[idx]
        try:
            return Fraction(int(state))
        except ValueError:
            raise ModelError(f"state {state!r} of {self.name} has no numeric value")

    @property
    def has_numeric_values(self) -> bool:
        if self.values is not None:
            return True
        return all(_is_int(s) for s in self.states)


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class NoiseDecl:
    """Exogenous noise: finite support with exact rational masses.

    Zero-mass support points must be dropped before construction; the
    validator flags them.
    """

    name: str
    support: tuple[int, ...]
    probs: tuple[Fraction, ...]


@dataclass(frozen=True)
class Mechanism:
    """Deterministic structural equation as a total lookup table.

    ``table`` maps ``(parent_states, noise_value) -> state`` where
    ``parent_states`` is a tuple aligned with ``parents``.
    """

    variable: str
    parents: tuple[str, ...]
    table: dict[tuple[tuple[str, ...], int], str]

    def evaluate(self, parent_states: tuple[str, ...], noise_value: int) -> str:
        return self.table[(parent_states, noise_value)]


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Scm:
    """A validated-or-not model container.

    ``noises`` maps each endogenous variable name to its noise term;
    ``mechanisms`` maps variable name to its mechanism. Variable order in
    ``variables`` is the declaration order, used to break ties among C and L
    variables; the topological order is role-driven: C..., A, L..., M, Y.
    """

    variables: tuple[VariableDecl, ...]
    noises: dict[str, NoiseDecl]
    mechanisms: dict[str, Mechanism]

    def variable(self, name: str) -> VariableDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def by_role(self, role: str) -> tuple[VariableDecl, ...]:
        return tuple(v for v in self.variables if v.role == role)

    @property
    def exposure(self) -> VariableDecl:
        return self.by_role(ROLE_A)[0]

    @property
    def mediator(self) -> VariableDecl:
        return self.by_role(ROLE_M)[0]

    @property
    def outcome(self) -> VariableDecl:
        return self.by_role(ROLE_Y)[0]

    @property
    def topological_order(self) -> tuple[str, ...]:
        order = [v.name for v in self.by_role(ROLE_C)]
        order.append(self.exposure.name)
        order.extend(v.name for v in self.by_role(ROLE_L))
        order.append(self.mediator.name)
        order.append(self.outcome.name)
        return tuple(order)

    @property
    def has_intermediate_confounders(self) -> bool:
        """True when any L variable has more than one state."""
        return any(len(v.states) > 1 for v in self.by_role(ROLE_L))

    def noise_configuration_count(self) -> int:
        n = 1
        for noise in self.noises.values():
            n *= len(noise.support)
        return n


def validate_scm(model: Scm) -> ValidationReport:
    """Check structural well-formedness; a passing model admits every
    downstream operation. Failures are collected, not raised."""
    violations: list[str] = []

    names = [v.name for v in model.variables]
    for name in {n for n in names if names.count(n) > 1}:
        violations.append(f"duplicate variable name: {name}")

    for role, lo, hi in ((ROLE_A, 1, 1), (ROLE_M, 1, 1), (ROLE_Y, 1, 1)):
        k = len(model.by_role(role))
        if not lo <= k <= hi:
            violations.append(f"expected exactly one variable with role {role}, found {k}")
    for v in model.variables:
        if v.role not in ROLES:
            violations.append(f"unknown role {v.role!r} on variable {v.name}")
        if len(v.states) < 1:
            violations.append(f"variable {v.name} has no states")
        if len(set(v.states)) != len(v.states):
            violations.append(f"variable {v.name} has duplicate state labels")
    exposures = model.by_role(ROLE_A)
    if len(exposures) == 1 and exposures[0].states != ("0", "1"):
        violations.append(
            f"exposure {exposures[0].name} must have states ('0', '1'), got {exposures[0].states}"
        )

    for name in names:
        if name not in model.noises:
            violations.append(f"variable {name} has no noise term")
        if name not in model.mechanisms:
            violations.append(f"variable {name} has no mechanism")
    for name, noise in model.noises.items():
        if name not in names:
            violations.append(f"noise declared for unknown variable {name}")
        if sum(noise.probs, Fraction(0)) != 1:
            violations.append(f"noise not normalized: {noise.name} sums to {sum(noise.probs, Fraction(0))}")
        if any(p <= 0 for p in noise.probs):
            violations.append(f"noise {noise.name} carries a non-positive mass")
        if len(noise.support) != len(noise.probs):
            violations.append(f"noise {noise.name} support/probs length mismatch")

    if violations:
        return ValidationReport(tuple(violations))

    # Role-ordering constraints on the parent relation. Acyclicity follows:
    # every allowed edge goes strictly forward in the role order.
    allowed = _allowed_parents(model)
    for name, mech in model.mechanisms.items():
        if name not in allowed:
            violations.append(f"mechanism declared for unknown variable {name}")
            continue
        for p in mech.parents:
            if p not in allowed[name]:
                violations.append(f"role-ordering breach: {p} cannot be a parent of {name}")
        if len(set(mech.parents)) != len(mech.parents):
            violations.append(f"mechanism of {name} lists a duplicate parent")

    if violations:
        return ValidationReport(tuple(violations))

    # Table totality.
    for name, mech in model.mechanisms.items():
        var = model.variable(name)
        noise = model.noises[name]
        parent_state_sets = [model.variable(p).states for p in mech.parents]
        for combo in itertools.product(*parent_state_sets):
            for u in noise.support:
                key = (combo, u)
                if key not in mech.table:
                    violations.append(f"missing table entry for {name} at parents={combo}, noise={u}")
                elif mech.table[key] not in var.states:
                    violations.append(
                        f"mechanism of {name} maps to unknown state {mech.table[key]!r}"
                    )

    return ValidationReport(tuple(violations))


def _allowed_parents(model: Scm) -> dict[str, set[str]]:
    c_names = [v.name for v in model.by_role(ROLE_C)]
    l_names = [v.name for v in model.by_role(ROLE_L)]
    a = model.exposure.name
    m = model.mediator.name
    y = model.outcome.name
    allowed: dict[str, set[str]] = {}
    for c in c_names:
        allowed[c] = set()
    allowed[a] = set(c_names)
    for i, l in enumerate(l_names):
        allowed[l] = set(c_names) | {a} | set(l_names[:i])
    allowed[m] = set(c_names) | {a} | set(l_names)
    allowed[y] = set(c_names) | {a} | set(l_names) | {m}
    return allowed


def expand_cpt_sugar(
    variable: VariableDecl,
    parents: tuple[str, ...],
    cpt: dict[tuple[str, ...], tuple[Fraction, ...]],
    noise_name: Optional[str] = None,
) -> tuple[NoiseDecl, Mechanism]:
    """Turn a conditional probability table into (noise, mechanism).

    The noise is uniform on {0, ..., D-1} with D the lcm of all row
    denominators. Each row is realized by inverse-CDF thresholding in the
    declared state order, which couples all rows comonotonically. The induced
    conditional distribution equals the CPT row exactly. The coupling across
    rows is a modeling choice the CPT does not determine; it only matters for
    cross-world quantities. Models needing a different coupling spell out
    explicit mechanism tables instead of using this sugar.
    """
    denoms: list[int] = []
    for key, row in cpt.items():
        if len(row) != len(variable.states):
            raise ModelError(
                f"cpt row {key} for {variable.name} has {len(row)} entries, expected {len(variable.states)}"
            )
        if any(p < 0 for p in row):
            raise ModelError(f"cpt row {key} for {variable.name} has a negative probability")
        if sum(row, Fraction(0)) != 1:
            raise ModelError(f"cpt row {key} for {variable.name} does not sum to 1")
        denoms.extend(p.denominator for p in row)
    D = math.lcm(*denoms) if denoms else 1

    table: dict[tuple[tuple[str, ...], int], str] = {}
    for key, row in cpt.items():
        cum = 0
        thresholds: list[tuple[int, str]] = []
        for s, p in zip(variable.states, row):
            cum += int(p * D)
            thresholds.append((cum, s))
        for u in range(D):
            for cut, s in thresholds:
                if u < cut:
                    table[(key, u)] = s
                    break

    noise = NoiseDecl(
        name=noise_name or f"U_{variable.name}",
        support=tuple(range(D)),
        probs=tuple(Fraction(1, D) for _ in range(D)),
    )
    mech = Mechanism(variable=variable.name, parents=parents, table=table)
    return noise, mech


def noise_configurations(
    model: Scm, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[dict[str, int], Fraction]]:
    """Enumerate the full product space of noise assignments exactly once.

    Yields ``(assignment, probability)`` with probabilities multiplying the
    per-noise masses; they sum to 1 over the full iteration.
    """
    count = model.noise_configuration_count()
    if count > cap:
        raise EnumerationCapError(count, cap)
    names = list(model.noises)
    supports = [model.noises[n].support for n in names]
    probs = [model.noises[n].probs for n in names]
    for idx in itertools.product(*(range(len(s)) for s in supports)):
        assignment = {n: supports[i][j] for i, (n, j) in enumerate(zip(names, idx))}
        p = Fraction(1)
        for i, j in enumerate(idx):
            p *= probs[i][j]
        yield assignment, p
