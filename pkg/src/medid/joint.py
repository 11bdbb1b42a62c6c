"""Exact probability-table algebra over discrete joints.

JointTable is the universal currency for observed, interventional, and
counterfactual distributions. Tables are sparse: zero cells are absent, so
support questions are set-membership queries. Entries are exact
``Fraction`` values on the exact path; the float path carries ``float``
entries through the same code.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ModelError, NullEventError

Assignment = tuple[str, ...]


@dataclass(frozen=True)
class JointTable:
    """A probability table over an ordered set of discrete variables.

    ``variables`` is an ordered tuple of ``(name, states)``; ``entries`` maps
    full assignments (state tuples aligned with ``variables``) to positive
    probabilities.
    """

    variables: tuple[tuple[str, tuple[str, ...]], ...]
    entries: dict[Assignment, Fraction]

    def __post_init__(self):
        names = [n for n, _ in self.variables]
        if len(set(names)) != len(names):
            raise ModelError(f"duplicate variable in table: {names}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    def states_of(self, name: str) -> tuple[str, ...]:
        for n, s in self.variables:
            if n == name:
                return s
        raise KeyError(name)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    @property
    def mass(self):
        return sum(self.entries.values())

    def prob(self, assignment: Mapping[str, str]):
        """Probability of a partial assignment (marginal event probability)."""
        idxs = [(self.index_of(k), v) for k, v in assignment.items()]
        total = Fraction(0)
        for key, p in self.entries.items():
            if all(key[i] == v for i, v in idxs):
                total = total + p
        return total

    def marginal(self, keep: Sequence[str]) -> "JointTable":
        """Sum out all variables not in ``keep``; mass is preserved."""
        keep = list(keep)
        for name in keep:
            if name not in self.names:
                raise KeyError(f"unknown variable {name}")
        idxs = [self.index_of(n) for n in keep]
        out: dict[Assignment, Fraction] = {}
        for key, p in self.entries.items():
            sub = tuple(key[i] for i in idxs)
            out[sub] = out.get(sub, 0) + p
        variables = tuple((n, self.states_of(n)) for n in keep)
        return JointTable(variables, out)

    def condition(self, evidence: Mapping[str, str]) -> "JointTable":
        """Renormalized table over the remaining variables given evidence.

        Raises NullEventError when the evidence has zero probability; this is
        the computational face of a positivity failure.
        """
        for name in evidence:
            if name not in self.names:
                raise KeyError(f"unknown variable {name}")
        ev_idx = {self.index_of(k): v for k, v in evidence.items()}
        rest = [i for i in range(len(self.names)) if i not in ev_idx]
        selected: dict[Assignment, Fraction] = {}
        total = Fraction(0)
        for key, p in self.entries.items():
            if all(key[i] == v for i, v in ev_idx.items()):
                sub = tuple(key[i] for i in rest)
                selected[sub] = selected.get(sub, 0) + p
                total = total + p
        if total == 0:
            ev = ", ".join(f"{k}={v}" for k, v in evidence.items())
            raise NullEventError(f"conditioning on null event: {ev}")
        variables = tuple((self.names[i], self.states_of(self.names[i])) for i in rest)
        return JointTable(variables, {k: p / total for k, p in selected.items()})

    def conditional_expectation(self, target: str, given: Mapping[str, str], values: Mapping[str, Fraction]):
        """E[target | given] where ``values`` maps target states to numbers."""
        cond = self.condition(given) if given else self
        marg = cond.marginal([target])
        total = 0
        for (state,), p in marg.entries.items():
            if state not in values:
                raise ModelError(f"state {state!r} of {target} has no numeric value")
            total = total + values[state] * p
        return total

    def support(self, target: str, given: Sequence[str]) -> dict[Assignment, frozenset[str]]:
        """For each positive-mass assignment of ``given``, the set of target
        states with positive conditional probability."""
        given = list(given)
        g_idx = [self.index_of(n) for n in given]
        t_idx = self.index_of(target)
        out: dict[Assignment, set[str]] = {}
        for key, p in self.entries.items():
            cell = tuple(key[i] for i in g_idx)
            out.setdefault(cell, set()).add(key[t_idx])
        return {cell: frozenset(states) for cell, states in out.items()}

    def map_entries(self, fn) -> "JointTable":
        return JointTable(self.variables, {k: fn(p) for k, p in self.entries.items()})

    def as_float(self) -> "JointTable":
        return self.map_entries(float)

    def reorder(self, names: Sequence[str]) -> "JointTable":
        if set(names) != set(self.names):
            raise ModelError("reorder must use exactly the table's variables")
        idxs = [self.index_of(n) for n in names]
        variables = tuple((n, self.states_of(n)) for n in names)
        entries = {tuple(k[i] for i in idxs): p for k, p in self.entries.items()}
        return JointTable(variables, entries)

    def to_tsv(self) -> str:
        """One assignment per line, probability last, header row of names.

        Probabilities are written as exact rationals when the table is exact,
        otherwise as repr() floats (both round-trip).
        """
        lines = ["\t".join(self.names + ("prob",))]
        for key in sorted(self.entries):
            p = self.entries[key]
            lines.append("\t".join(key + (format_number(p),)))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_tsv(text: str, variables: Sequence[tuple[str, tuple[str, ...]]]) -> "JointTable":
        rows = [line.split("\t") for line in text.strip().split("\n")]
        header = rows[0]
        names = [n for n, _ in variables]
        if header != names + ["prob"]:
            raise ModelError(f"tsv header {header} does not match variables {names}")
        entries: dict[Assignment, Fraction] = {}
        for row in rows[1:]:
            key = tuple(row[:-1])
            entries[key] = parse_number(row[-1])
        return JointTable(tuple((n, tuple(s)) for n, s in variables), entries)


def format_number(p) -> str:
    if isinstance(p, Fraction):
        return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)
    return repr(p)


def parse_number(text: str):
    if "/" in text or "." not in text and "e" not in text:
        return Fraction(text)
    return float(text)


def mixture(tables: Iterable[tuple[Fraction, JointTable]]) -> JointTable:
    """Pointwise convex combination of tables over identical variable sets."""
    tables = list(tables)
    if not tables:
        raise ModelError("mixture of no tables")
    weights = [w for w, _ in tables]
    if any(w < 0 for w in weights):
        raise ModelError("mixture weights must be nonnegative")
    if sum(weights) != 1:
        raise ModelError(f"mixture weights sum to {sum(weights)}, expected 1")
    base = tables[0][1]
    for _, t in tables[1:]:
        if t.variables != base.variables:
            raise ModelError("mixture over mismatched variable sets")
    entries: dict[Assignment, Fraction] = {}
    for w, t in tables:
        if w == 0:
            continue
        for k, p in t.entries.items():
            entries[k] = entries.get(k, 0) + w * p
    return JointTable(base.variables, entries)


@dataclass(frozen=True)
class CondTable:
    """Conditional distribution of ``target`` given ``given``.

    Rows exist exactly for given-assignments of positive mass in the source;
    every stored row sums to 1. ``target`` and ``given`` are ordered
    ``(name, states)`` tuples; row keys align with ``given``, inner keys with
    ``target``.
    """

    target: tuple[tuple[str, tuple[str, ...]], ...]
    given: tuple[tuple[str, tuple[str, ...]], ...]
    rows: dict[Assignment, dict[Assignment, Fraction]]

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.target)

    @property
    def given_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.given)

    @property
    def domain(self) -> frozenset[Assignment]:
        return frozenset(self.rows)

    def row(self, cell: Assignment) -> dict[Assignment, Fraction]:
        return self.rows[cell]

    @staticmethod
    def from_joint(joint: JointTable, target: Sequence[str], given: Sequence[str]) -> "CondTable":
        target = list(target)
        given = list(given)
        g_idx = [joint.index_of(n) for n in given]
        t_idx = [joint.index_of(n) for n in target]
        cells: dict[Assignment, dict[Assignment, Fraction]] = {}
        totals: dict[Assignment, Fraction] = {}
        for key, p in joint.entries.items():
            cell = tuple(key[i] for i in g_idx)
            tkey = tuple(key[i] for i in t_idx)
            row = cells.setdefault(cell, {})
            row[tkey] = row.get(tkey, 0) + p
            totals[cell] = totals.get(cell, 0) + p
        rows = {
            cell: {t: p / totals[cell] for t, p in row.items()} for cell, row in cells.items()
        }
        return CondTable(
            target=tuple((n, joint.states_of(n)) for n in target),
            given=tuple((n, joint.states_of(n)) for n in given),
            rows=rows,
        )

    def to_tsv(self) -> str:
        names = self.given_names + self.target_names + ("prob",)
        lines = ["\t".join(names)]
        for cell in sorted(self.rows):
            for tkey in sorted(self.rows[cell]):
                lines.append("\t".join(cell + tkey + (format_number(self.rows[cell][tkey]),)))
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_tsv(
        text: str,
        target: Sequence[tuple[str, tuple[str, ...]]],
        given: Sequence[tuple[str, tuple[str, ...]]],
    ) -> "CondTable":
        rows_raw = [line.split("\t") for line in text.strip().split("\n")]
        given_names = [n for n, _ in given]
        target_names = [n for n, _ in target]
        header = rows_raw[0]
        if header != given_names + target_names + ["prob"]:
            raise ModelError(f"policy tsv header {header} does not match {given_names + target_names}")
        ng = len(given_names)
        nt = len(target_names)
        rows: dict[Assignment, dict[Assignment, Fraction]] = {}
        for row in rows_raw[1:]:
            cell = tuple(row[:ng])
            tkey = tuple(row[ng : ng + nt])
            rows.setdefault(cell, {})[tkey] = parse_number(row[ng + nt])
        for cell, dist in rows.items():
            if sum(dist.values()) != 1:
                raise ModelError(f"policy row {cell} does not sum to 1")
        return CondTable(
            target=tuple((n, tuple(s)) for n, s in target),
            given=tuple((n, tuple(s)) for n, s in given),
            rows=rows,
        )
