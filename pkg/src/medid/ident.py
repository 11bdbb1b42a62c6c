"""Nonparametric identification functionals on the observed law.

Each function here consumes only an observed joint distribution plus role
labels — never mechanisms or noises — and evaluates the standardization
formula that equals the corresponding counterfactual mean whenever the
required assumptions hold. The enumeration oracle provides the ground truth
these are validated against.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import ModelError, NotIdentifiedError, PolicyDomainError
from .joint import Assignment, CondTable, JointTable
from .policy import COND_C, COND_CL, COND_MARGINAL, KnownPolicy, PotentialPolicy
from .scm import ROLE_A, ROLE_C, ROLE_L, ROLE_M, ROLE_Y, VariableDecl

Policy = Union[KnownPolicy, PotentialPolicy]


@dataclass(frozen=True)
class RoleView:
    """Role labels and numeric values for the columns of an observed joint."""

    variables: tuple[VariableDecl, ...]

    def _by_role(self, role: str) -> tuple[VariableDecl, ...]:
        return tuple(v for v in self.variables if v.role == role)

    @property
    def c_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self._by_role(ROLE_C))

    @property
    def l_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self._by_role(ROLE_L))

    @property
    def exposure(self) -> str:
        return self._one(ROLE_A).name

    @property
    def mediator(self) -> str:
        return self._one(ROLE_M).name

    @property
    def outcome(self) -> str:
        return self._one(ROLE_Y).name

    def _one(self, role: str) -> VariableDecl:
        vs = self._by_role(role)
        if len(vs) != 1:
            raise ModelError(f"expected exactly one variable with role {role}, found {len(vs)}")
        return vs[0]

    @property
    def has_intermediate_confounders(self) -> bool:
        return any(len(v.states) > 1 for v in self._by_role(ROLE_L))

    def states_of(self, name: str) -> tuple[str, ...]:
        for v in self.variables:
            if v.name == name:
                return v.states
        raise KeyError(name)

    def y_values(self) -> dict[str, Fraction]:
        y = self._one(ROLE_Y)
        return {s: y.numeric_value(s) for s in y.states}


def _c_cells(joint: JointTable, roles: RoleView):
    """Positive-mass covariate cells with their weights."""
    c = list(roles.c_names)
    if not c:
        return [((), Fraction(1))]
    return list(joint.marginal(c).entries.items())


def ident_mean_a(joint: JointTable, roles: RoleView, a: str):
    """Standardized E[Y(a)]: average over C of E[Y | C, A=a]."""
    yv = roles.y_values()
    total = 0
    for cell, w in _c_cells(joint, roles):
        ev = dict(zip(roles.c_names, cell))
        ev[roles.exposure] = a
        total = total + w * joint.conditional_expectation(roles.outcome, ev, yv)
    return total


def ident_mean_am(joint: JointTable, roles: RoleView, a: str, m: str):
    """Standardized E[Y(a,m)]: average over C and over L given (C, A=a) of
    E[Y | C, L, A=a, M=m]."""
    yv = roles.y_values()
    l = list(roles.l_names)
    total = 0
    for cell, w in _c_cells(joint, roles):
        c_ev = dict(zip(roles.c_names, cell))
        a_ev = dict(c_ev, **{roles.exposure: a})
        l_cells = joint.condition(a_ev).marginal(l).entries.items() if l else [((), Fraction(1))]
        for l_cell, lw in l_cells:
            ev = dict(a_ev, **dict(zip(l, l_cell)), **{roles.mediator: m})
            total = total + w * lw * joint.conditional_expectation(roles.outcome, ev, yv)
    return total


def potential_mediator_dist(joint: JointTable, roles: RoleView, a_star: str, conditioning: str) -> CondTable:
    """Identified law of the potential mediator under exposure ``a_star``.

    marginal: the C-standardized mediator law sum_c P(c) P(M | c, A=a*);
    C:        P(M | C, A=a*);
    CL:       P(M | C, L, A=a*), rows indexed by (C, L).
    """
    m = roles.mediator
    a = roles.exposure
    c = list(roles.c_names)
    l = list(roles.l_names)
    if conditioning == COND_MARGINAL:
        dist: dict[Assignment, Fraction] = {}
        for cell, w in _c_cells(joint, roles):
            ev = dict(zip(c, cell))
            ev[a] = a_star
            for key, p in joint.condition(ev).marginal([m]).entries.items():
                dist[key] = dist.get(key, 0) + w * p
        return CondTable(target=((m, roles.states_of(m)),), given=(), rows={(): dist})
    if conditioning == COND_C:
        given = c
    elif conditioning == COND_CL:
        given = c + l
    else:
        raise ModelError(f"unknown conditioning level {conditioning!r}")
    cond = CondTable.from_joint(joint.condition({a: a_star}), [m], given)
    return cond


def resolve_policy(joint: JointTable, roles: RoleView, policy: Policy) -> KnownPolicy:
    """Turn a policy specification into a concrete conditional table."""
    if isinstance(policy, KnownPolicy):
        return policy
    return KnownPolicy(potential_mediator_dist(joint, roles, policy.a_star, policy.conditioning))


def ident_mean_policy(joint: JointTable, roles: RoleView, a: str, policy: Policy):
    """Standardized E[Y(a, G)] for mediator policy G: average over C, over L
    given (C, A=a), and over M drawn from the policy row, of
    E[Y | C, L, A=a, M]. Policy rows conditional on L are applied at the L
    value arising under exposure ``a``."""
    known = resolve_policy(joint, roles, policy)
    cond = known.table.given_names
    c = list(roles.c_names)
    l = list(roles.l_names)
    observable = set(c) | set(l)
    for n in cond:
        if n not in observable:
            raise ModelError(f"policy conditions on {n}, which is neither a covariate nor an intermediate confounder")
    yv = roles.y_values()
    total = 0
    for cell, w in _c_cells(joint, roles):
        c_ev = dict(zip(c, cell))
        a_ev = dict(c_ev, **{roles.exposure: a})
        l_cells = joint.condition(a_ev).marginal(l).entries.items() if l else [((), Fraction(1))]
        for l_cell, lw in l_cells:
            state = dict(c_ev, **dict(zip(l, l_cell)))
            pol_cell = tuple(state[n] for n in cond)
            if pol_cell not in known.table.rows:
                ev = ", ".join(f"{n}={s}" for n, s in zip(cond, pol_cell))
                raise PolicyDomainError(f"policy has no row for {ev or 'the empty cell'}")
            for (m,), pw in known.table.row(pol_cell).items():
                if pw == 0:
                    continue
                ev = dict(a_ev, **dict(zip(l, l_cell)), **{roles.mediator: m})
                total = total + w * lw * pw * joint.conditional_expectation(roles.outcome, ev, yv)
    return total


def ident_mean_crossworld(joint: JointTable, roles: RoleView, a: str, a_prime: str, force: bool = False):
    """Standardized E[Y(a, M(a'))]: average over C and over M given
    (C, A=a') of E[Y | C, M, A=a].

    This formula is only an identification result when no intermediate
    confounders are present; with a nondegenerate L it is not a valid
    identification and the call refuses unless ``force=True`` (useful for
    demonstrating the size of the resulting bias)."""
    if roles.has_intermediate_confounders and not force:
        raise NotIdentifiedError(
            "cross-world mean is not identified in the presence of intermediate confounders"
        )
    yv = roles.y_values()
    m = roles.mediator
    total = 0
    for cell, w in _c_cells(joint, roles):
        c_ev = dict(zip(roles.c_names, cell))
        donor = dict(c_ev, **{roles.exposure: a_prime})
        for (m_state,), mw in joint.condition(donor).marginal([m]).entries.items():
            ev = dict(c_ev, **{roles.exposure: a, m: m_state})
            total = total + w * mw * joint.conditional_expectation(roles.outcome, ev, yv)
    return total
