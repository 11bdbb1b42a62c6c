"""Ground truth by exhaustive counterfactual enumeration.

Every quantity here is computed by iterating the full product space of
exogenous noise configurations and running the structural equations, possibly
under interventions. This is the reference implementation everything else is
checked against: it sees the mechanisms and noises, not just the observed
law, so it can evaluate cross-world quantities that no observed-data
functional can.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import ModelError, PolicyDomainError
from .joint import Assignment, CondTable, JointTable
from .policy import COND_C, COND_CL, COND_MARGINAL, KnownPolicy
from .scm import DEFAULT_ENUMERATION_CAP, ROLE_C, ROLE_L, Scm, noise_configurations


@dataclass(frozen=True)
class PotentialVar:
    """A potential variable such as Y(a=1), Y(a=1,m=0), M(a=0), or L(a=1).

    ``base`` is the endogenous variable name; ``a`` the forced exposure state;
    ``m`` an optional forced mediator state (only meaningful for the
    outcome)."""

    base: str
    a: str
    m: Optional[str] = None

    @property
    def name(self) -> str:
        if self.m is None:
            return f"{self.base}(a={self.a})"
        return f"{self.base}(a={self.a},m={self.m})"


def _run(model: Scm, noise_cfg: Mapping[str, int], interventions: Optional[Mapping[str, str]] = None) -> dict[str, str]:
    """Evaluate all structural equations for one noise configuration.

    ``interventions`` replaces the listed variables' mechanisms with
    constants; everything downstream responds naturally."""
    interventions = interventions or {}
    world: dict[str, str] = {}
    for name in model.topological_order:
        if name in interventions:
            world[name] = interventions[name]
        else:
            mech = model.mechanisms[name]
            parent_states = tuple(world[p] for p in mech.parents)
            world[name] = mech.evaluate(parent_states, noise_cfg[name])
    return world


def _check_state(model: Scm, name: str, state: str) -> None:
    if state not in model.variable(name).states:
        raise ModelError(f"{state!r} is not a state of {name}")


def observed_joint(model: Scm, cap: int = DEFAULT_ENUMERATION_CAP) -> JointTable:
    """The observational law over all endogenous variables, exactly."""
    order = model.topological_order
    entries: dict[Assignment, Fraction] = {}
    for cfg, p in noise_configurations(model, cap):
        world = _run(model, cfg)
        key = tuple(world[n] for n in order)
        entries[key] = entries.get(key, 0) + p
    variables = tuple((n, model.variable(n).states) for n in order)
    return JointTable(variables, entries)


def po_mean_a(model: Scm, a: str, cap: int = DEFAULT_ENUMERATION_CAP) -> Fraction:
    """E[Y(a)]: mean outcome when exposure is set to ``a`` for everyone."""
    _check_state(model, model.exposure.name, a)
    y = model.outcome
    total = Fraction(0)
    for cfg, p in noise_configurations(model, cap):
        world = _run(model, cfg, {model.exposure.name: a})
        total += p * y.numeric_value(world[y.name])
    return total


def po_mean_am(model: Scm, a: str, m: str, cap: int = DEFAULT_ENUMERATION_CAP) -> Fraction:
    """E[Y(a,m)]: exposure and mediator both set by intervention."""
    _check_state(model, model.exposure.name, a)
    _check_state(model, model.mediator.name, m)
    y = model.outcome
    total = Fraction(0)
    for cfg, p in noise_configurations(model, cap):
        world = _run(model, cfg, {model.exposure.name: a, model.mediator.name: m})
        total += p * y.numeric_value(world[y.name])
    return total


def po_mean_policy(
    model: Scm, a: str, policy: KnownPolicy, cap: int = DEFAULT_ENUMERATION_CAP
) -> Fraction:
    """E[Y(a, G)]: exposure set to ``a``, mediator drawn from policy ``G``.

    The policy's draw is independent of the unit's own noises given the
    conditioning variables, which must be covariates or intermediate
    confounders; the latter are read in the exposure-``a`` world."""
    _check_state(model, model.exposure.name, a)
    a_name = model.exposure.name
    m_name = model.mediator.name
    y = model.outcome
    cond = policy.table.given_names
    observable = {v.name for v in model.by_role(ROLE_C)} | {v.name for v in model.by_role(ROLE_L)}
    for n in cond:
        if n not in observable:
            raise ModelError(f"policy conditions on {n}, which is neither a covariate nor an intermediate confounder")
    total = Fraction(0)
    for cfg, p in noise_configurations(model, cap):
        world = _run(model, cfg, {a_name: a})
        cell = tuple(world[n] for n in cond)
        if cell not in policy.table.rows:
            ev = ", ".join(f"{n}={s}" for n, s in zip(cond, cell))
            raise PolicyDomainError(f"policy has no row for {ev or 'the empty cell'}")
        for (m,), w in policy.table.row(cell).items():
            if w == 0:
                continue
            mworld = _run(model, cfg, {a_name: a, m_name: m})
            total += p * w * y.numeric_value(mworld[y.name])
    return total


def po_mean_crossworld(
    model: Scm, a: str, a_prime: str, cap: int = DEFAULT_ENUMERATION_CAP
) -> Fraction:
    """E[Y(a, M(a'))]: each unit receives its own mediator value from the
    exposure-``a'`` world while the outcome is evaluated under ``a``."""
    _check_state(model, model.exposure.name, a)
    _check_state(model, model.exposure.name, a_prime)
    a_name = model.exposure.name
    m_name = model.mediator.name
    y = model.outcome
    total = Fraction(0)
    for cfg, p in noise_configurations(model, cap):
        donor = _run(model, cfg, {a_name: a_prime})
        world = _run(model, cfg, {a_name: a, m_name: donor[m_name]})
        total += p * y.numeric_value(world[y.name])
    return total


def potential_mediator_dist(
    model: Scm, a_star: str, conditioning: str, cap: int = DEFAULT_ENUMERATION_CAP
) -> CondTable:
    """The law of M(a*), marginally or given C or given (C, L(a*)).

    Returned as a policy-shaped conditional table; for the (C, L) level the
    given-variables are the covariates followed by the intermediate
    confounders, whose values are those arising under exposure ``a*``."""
    _check_state(model, model.exposure.name, a_star)
    if conditioning == COND_MARGINAL:
        given: list[str] = []
    elif conditioning == COND_C:
        given = [v.name for v in model.by_role(ROLE_C)]
    elif conditioning == COND_CL:
        given = [v.name for v in model.by_role(ROLE_C)] + [v.name for v in model.by_role(ROLE_L)]
    else:
        raise ModelError(f"unknown conditioning level {conditioning!r}")
    m_name = model.mediator.name
    entries: dict[Assignment, Fraction] = {}
    for cfg, p in noise_configurations(model, cap):
        world = _run(model, cfg, {model.exposure.name: a_star})
        key = tuple(world[n] for n in given + [m_name])
        entries[key] = entries.get(key, 0) + p
    variables = tuple((n, model.variable(n).states) for n in given + [m_name])
    joint = JointTable(variables, entries)
    return CondTable.from_joint(joint, [m_name], given)


def counterfactual_joint(
    model: Scm, requests: Sequence[PotentialVar], cap: int = DEFAULT_ENUMERATION_CAP
) -> JointTable:
    """Joint law of the observed variables together with potential variables.

    All columns are evaluated on the same noise configuration, so the table
    encodes every cross-world dependence the model implies."""
    a_name = model.exposure.name
    m_name = model.mediator.name
    order = model.topological_order
    for req in requests:
        _check_state(model, a_name, req.a)
        if req.m is not None:
            _check_state(model, m_name, req.m)
        if req.base not in order:
            raise ModelError(f"unknown variable {req.base} in potential-variable request")
    names = list(order) + [req.name for req in requests]
    if len(set(names)) != len(names):
        raise ModelError("duplicate column in counterfactual joint request")
    entries: dict[Assignment, Fraction] = {}
    for cfg, p in noise_configurations(model, cap):
        worlds: dict[tuple[tuple[str, str], ...], dict[str, str]] = {}

        def world_for(interventions: dict[str, str]) -> dict[str, str]:
            key = tuple(sorted(interventions.items()))
            if key not in worlds:
                worlds[key] = _run(model, cfg, interventions)
            return worlds[key]

        row = [world_for({})[n] for n in order]
        for req in requests:
            iv = {a_name: req.a}
            if req.m is not None:
                iv[m_name] = req.m
            row.append(world_for(iv)[req.base])
        key = tuple(row)
        entries[key] = entries.get(key, 0) + p
    variables = tuple((n, model.variable(n).states) for n in order) + tuple(
        (req.name, model.variable(req.base).states) for req in requests
    )
    return JointTable(variables, entries)


def check_ci(
    joint: JointTable,
    x: Sequence[str],
    y: Sequence[str],
    z: Sequence[str],
    eps: Fraction = Fraction(0),
) -> tuple[bool, Fraction]:
    """Does X ⫫ Y | Z hold in ``joint``? Returns (holds, max deviation).

    The deviation is max over positive-mass z-cells and all (x, y) value
    pairs of |P(x,y|z) - P(x|z)P(y|z)|; with exact entries a zero deviation
    is an exact independence."""
    x = list(x)
    y = list(y)
    z = list(z)
    if set(x) & set(y) or set(x) & set(z) or set(y) & set(z):
        raise ModelError("independence query with overlapping variable groups")
    z_cells = joint.marginal(z).entries if z else {(): Fraction(1)}
    max_dev = Fraction(0) if isinstance(next(iter(joint.entries.values()), Fraction(0)), Fraction) else 0.0
    x_space = list(itertools.product(*(joint.states_of(n) for n in x)))
    y_space = list(itertools.product(*(joint.states_of(n) for n in y)))
    for cell in z_cells:
        cond = joint.condition(dict(zip(z, cell))) if z else joint
        pxy = cond.marginal(x + y).entries
        px = cond.marginal(x).entries
        py = cond.marginal(y).entries
        for xv in x_space:
            for yv in y_space:
                lhs = pxy.get(xv + yv, 0)
                rhs = px.get(xv, 0) * py.get(yv, 0)
                dev = abs(lhs - rhs)
                if dev > max_dev:
                    max_dev = dev
    return max_dev <= eps, max_dev
