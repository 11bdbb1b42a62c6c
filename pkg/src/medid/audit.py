"""Verdicts for assumption sets.

Positivity entries are checked directly on the observed joint — they are the
only entries testable from data alone. Conditional-independence entries are
untestable from data; when a full model is available they are verified
against its counterfactual joint distributions, and the resulting verdicts
are labeled with a ``model`` basis to keep that epistemic distinction
visible. Consistency entries hold by construction in a structural model and
are otherwise assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import ModelError, PolicyDomainError
from .estimand import (
    EstimandExpr,
    AssumptionEntry,
    AssumptionSet,
    K_AM,
    K_APOS,
    K_AY,
    K_MPOS,
    K_MY,
    K_XW_CI,
    FAMILY_CI,
    FAMILY_CONSISTENCY,
    FAMILY_POSITIVITY,
    RangeAtom,
    required_assumptions,
)
from .ident import RoleView
from .joint import JointTable
from .policy import COND_C, COND_CL, COND_MARGINAL, load_known_policy
from .scm import DEFAULT_ENUMERATION_CAP, Scm

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
ASSUMED = "ASSUMED"

BASIS_DATA = "data"
BASIS_MODEL = "model"
BASIS_ASSUMED = "assumed"


@dataclass(frozen=True)
class AuditedEntry:
    entry: AssumptionEntry
    verdict: str
    basis: str
    witnesses: tuple = ()
    deviation: Optional[Fraction] = None


@dataclass(frozen=True)
class AssumptionReport:
    entries: tuple[AuditedEntry, ...]

    @property
    def identified(self) -> bool:
        return not any(
            e.verdict == VIOLATED for e in self.entries if not e.entry.interpretive
        )


class Auditor:
    """Checks one assumption set against an observed joint and, optionally,
    the generating model."""

    def __init__(
        self,
        joint: JointTable,
        roles: RoleView,
        model: Optional[Scm] = None,
        eps: Fraction = Fraction(0),
        cap: int = DEFAULT_ENUMERATION_CAP,
    ):
        self.joint = joint
        self.roles = roles
        self.model = model
        self.eps = eps
        self.cap = cap
        self._policies: dict[tuple[str, str], object] = {}

    # -- range resolution ---------------------------------------------------

    def _policy_table(self, path: str, cond: str):
        key = (path, cond)
        if key not in self._policies:
            roles = self.roles
            mediator = (roles.mediator, roles.states_of(roles.mediator))
            c_vars = [(n, roles.states_of(n)) for n in roles.c_names]
            l_vars = [(n, roles.states_of(n)) for n in roles.l_names]
            self._policies[key] = load_known_policy(path, mediator, c_vars, l_vars, cond).table
        return self._policies[key]

    def _support(self, evidence: dict) -> Optional[frozenset[str]]:
        """Support of M given the evidence, or None when the evidence has
        zero mass (left for the relevant positivity entry to flag)."""
        if self.joint.prob(evidence) == 0:
            return None
        m_idx = self.joint.index_of(self.roles.mediator)
        idxs = [(self.joint.index_of(k), v) for k, v in evidence.items()]
        out = set()
        for key in self.joint.entries:
            if all(key[i] == v for i, v in idxs):
                out.add(key[m_idx])
        return frozenset(out)

    def resolve_atom(self, atom: RangeAtom, cell: dict) -> Optional[frozenset[str]]:
        """The mediator-value range an atom requires at an evaluation cell.

        ``cell`` maps covariate (and, where applicable, intermediate
        confounder) names to states."""
        roles = self.roles
        a_name = roles.exposure
        if atom.kind == "point":
            return frozenset([atom.value])
        if atom.kind == "cross":
            ev = {n: cell[n] for n in roles.c_names}
            ev[a_name] = atom.value
            return self._support(ev)
        if atom.kind == "known":
            table = self._policy_table(atom.value, atom.level)
            row_key = tuple(cell[n] for n in table.given_names)
            if row_key not in table.rows:
                ev = ", ".join(f"{n}={cell[n]}" for n in table.given_names)
                raise PolicyDomainError(f"policy has no row for {ev or 'the empty cell'}")
            return frozenset(m for (m,), p in table.row(row_key).items() if p > 0)
        # pot
        if atom.level == COND_MARGINAL:
            ev = {a_name: atom.value}
        elif atom.level == COND_C:
            ev = {n: cell[n] for n in roles.c_names}
            ev[a_name] = atom.value
        elif atom.level == COND_CL:
            ev = {n: cell[n] for n in roles.c_names + roles.l_names}
            ev[a_name] = atom.value
        else:
            raise ModelError(f"unknown conditioning level {atom.level!r}")
        return self._support(ev)

    def _range_union(self, atoms) -> list[str]:
        """All mediator values an entry's ranges can mention, across cells."""
        out: set[str] = set()
        for atom in atoms:
            for cell, _ in self._eval_cells(with_l=True):
                resolved = self.resolve_atom(atom, cell)
                if resolved:
                    out |= resolved
        m_states = self.roles.states_of(self.roles.mediator)
        return [m for m in m_states if m in out]

    def _eval_cells(self, with_l: bool):
        names = list(self.roles.c_names) + (list(self.roles.l_names) if with_l else [])
        if not names:
            return [({}, Fraction(1))]
        return [
            (dict(zip(names, cell)), p)
            for cell, p in sorted(self.joint.marginal(names).entries.items())
        ]

    # -- positivity ---------------------------------------------------------

    def check_positivity(self, entry: AssumptionEntry) -> AuditedEntry:
        a = entry.param("a")
        a_name = self.roles.exposure
        witnesses = []
        if entry.kind == K_APOS:
            with_l = entry.param("given") == "CL"
            for cell, _ in self._eval_cells(with_l):
                if self.joint.prob({**cell, a_name: a}) == 0:
                    witnesses.append(tuple(sorted(cell.items())))
        elif entry.kind == K_MPOS:
            with_l = entry.param("with_l") == "yes"
            for cell, _ in self._eval_cells(with_l):
                available = self._support({**cell, a_name: a})
                if available is None:
                    continue  # exposure-positivity failure, flagged separately
                for atom in sorted(entry.atoms, key=RangeAtom.sort_key):
                    required = self.resolve_atom(atom, cell)
                    if required is None:
                        continue
                    for m in sorted(required - available):
                        witnesses.append(tuple(sorted(cell.items())) + ((a_name, a), ("missing m", m)))
        else:
            raise ModelError(f"not a positivity entry: {entry.kind}")
        verdict = VIOLATED if witnesses else HOLDS
        return AuditedEntry(entry, verdict, BASIS_DATA, tuple(witnesses))

    # -- conditional independence -------------------------------------------

    def check_independence(self, entry: AssumptionEntry) -> AuditedEntry:
        if self.model is None:
            return AuditedEntry(entry, ASSUMED, BASIS_ASSUMED)
        from . import oracle

        roles = self.roles
        model = self.model
        a = entry.param("a")
        c = list(roles.c_names)
        worst_dev = Fraction(0)
        worst_witness = None

        def note(dev, witness):
            nonlocal worst_dev, worst_witness
            if dev > worst_dev:
                worst_dev = dev
                worst_witness = witness

        if entry.kind == K_AY and entry.atoms is None:
            pv = oracle.PotentialVar(roles.outcome, a)
            cj = oracle.counterfactual_joint(model, [pv], self.cap)
            _, dev = oracle.check_ci(cj, [roles.exposure], [pv.name], c)
            note(dev, (("statement", f"A _||_ {pv.name} | C"),))
        elif entry.kind == K_AY:
            for m in self._range_union(entry.atoms):
                pv = oracle.PotentialVar(roles.outcome, a, m)
                cj = oracle.counterfactual_joint(model, [pv], self.cap)
                _, dev = oracle.check_ci(cj, [roles.exposure], [pv.name], c)
                note(dev, (("m", m),))
        elif entry.kind == K_MY:
            with_l = entry.param("with_l") == "yes"
            given = c + (list(roles.l_names) if with_l else [])
            for m in self._range_union(entry.atoms):
                pv = oracle.PotentialVar(roles.outcome, a, m)
                cj = oracle.counterfactual_joint(model, [pv], self.cap)
                sliced = cj.condition({roles.exposure: a})
                _, dev = oracle.check_ci(sliced, [roles.mediator], [pv.name], given)
                note(dev, (("m", m),))
        elif entry.kind == K_AM:
            pv = oracle.PotentialVar(roles.mediator, entry.param("a_star"))
            cj = oracle.counterfactual_joint(model, [pv], self.cap)
            _, dev = oracle.check_ci(cj, [roles.exposure], [pv.name], c)
            note(dev, (("statement", f"A _||_ {pv.name} | C"),))
        elif entry.kind == K_XW_CI:
            mv = oracle.PotentialVar(roles.mediator, entry.param("a_prime"))
            for m in self._range_union(entry.atoms):
                yv = oracle.PotentialVar(roles.outcome, a, m)
                cj = oracle.counterfactual_joint(model, [mv, yv], self.cap)
                _, dev = oracle.check_ci(cj, [mv.name], [yv.name], c)
                note(dev, (("m", m),))
        else:
            raise ModelError(f"not an independence entry: {entry.kind}")

        if worst_dev > self.eps:
            return AuditedEntry(entry, VIOLATED, BASIS_MODEL, (worst_witness,), worst_dev)
        return AuditedEntry(entry, HOLDS, BASIS_MODEL, (), worst_dev)

    # -- dispatch -----------------------------------------------------------

    def check(self, entry: AssumptionEntry) -> AuditedEntry:
        if entry.family == FAMILY_POSITIVITY:
            return self.check_positivity(entry)
        if entry.family == FAMILY_CI:
            return self.check_independence(entry)
        # Consistency: by construction in a structural model, assumed on data.
        if self.model is not None:
            return AuditedEntry(entry, HOLDS, BASIS_MODEL)
        return AuditedEntry(entry, ASSUMED, BASIS_ASSUMED)

    def audit(self, assumptions: AssumptionSet) -> AssumptionReport:
        return AssumptionReport(tuple(self.check(e) for e in assumptions.entries))


def audit_estimand(
    source: Union[Scm, tuple[JointTable, RoleView]],
    expr: EstimandExpr,
    eps: Fraction = Fraction(0),
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> AssumptionReport:
    """Assemble and audit the assumption set of an estimand expression.

    ``source`` is either a model (full verification) or an observed joint
    with role labels (positivity only; everything else ASSUMED)."""
    if isinstance(source, Scm):
        from . import oracle

        model = source
        joint = oracle.observed_joint(model, cap)
        roles = RoleView(model.variables)
    else:
        joint, roles = source
        model = None
    auditor = Auditor(joint, roles, model, eps=eps, cap=cap)
    return auditor.audit(required_assumptions(expr))
