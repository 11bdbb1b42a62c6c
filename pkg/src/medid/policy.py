"""Mediator policy types: how an interventional mediator distribution is
specified.

A policy is either a user-supplied known table (optionally conditional on C
or on (C, L)) or a reference to a potential-mediator distribution to be
resolved from a model (oracle side) or from the observed joint
(identification side).

Conditioning levels are named ``marginal``, ``C`` and ``CL``; the same-world
rule restricts the conditioning variables to the covariates C and the
post-exposure covariates as they arise in the evaluation world.
"""

from __future__ import annotations

from dataclasses import dataclass

from .joint import CondTable

COND_MARGINAL = "marginal"
COND_C = "C"
COND_CL = "CL"
CONDITIONING_LEVELS = (COND_MARGINAL, COND_C, COND_CL)


@dataclass(frozen=True)
class KnownPolicy:
    """A known interventional mediator distribution.

    ``table.given_names`` must consist of C variables, optionally followed by
    L variables (the ``CL`` level). An empty ``given`` is the marginal level.
    """

    table: CondTable

    @property
    def conditioning(self) -> str:
        return conditioning_of(self.table.given_names)


@dataclass(frozen=True)
class PotentialPolicy:
    """The mediator distribution under exposure ``a_star``.

    ``conditioning`` picks the form: marginal, given C, or given (C, L) with
    the cross-case pairing (the policy row at L=l applies where the
    evaluation world's intermediate confounders take value l).
    """

    a_star: str
    conditioning: str

    def __post_init__(self):
        if self.conditioning not in CONDITIONING_LEVELS:
            raise ValueError(f"unknown conditioning level {self.conditioning!r}")


def conditioning_of(given_names) -> str:
    """Classify a policy's given-variable list into a conditioning level.

    The caller is responsible for having ordered the names C-first; this
    helper only distinguishes empty / has-L."""
    if not given_names:
        return COND_MARGINAL
    return COND_C


def load_known_policy(
    path,
    mediator: tuple[str, tuple[str, ...]],
    c_vars: "list[tuple[str, tuple[str, ...]]]",
    l_vars: "list[tuple[str, tuple[str, ...]]]",
    cond: str,
) -> KnownPolicy:
    """Load a known mediator policy from a TSV file.

    The file's header must list the conditioning variables implied by
    ``cond`` (none, the C variables, or the C then L variables), then the
    mediator, then ``prob``."""
    from pathlib import Path

    if cond == COND_MARGINAL:
        given = []
    elif cond == COND_C:
        given = list(c_vars)
    elif cond == COND_CL:
        given = list(c_vars) + list(l_vars)
    else:
        raise ValueError(f"unknown conditioning level {cond!r}")
    text = Path(path).read_text(encoding="utf-8")
    table = CondTable.from_tsv(text, [mediator], given)
    return KnownPolicy(table)


def point_mass_policy(mediator: tuple[str, tuple[str, ...]], m: str) -> KnownPolicy:
    """Degenerate policy assigning mediator value ``m`` to everyone."""
    from fractions import Fraction

    name, states = mediator
    if m not in states:
        raise ValueError(f"{m!r} is not a state of {name}")
    table = CondTable(
        target=((name, tuple(states)),),
        given=(),
        rows={(): {(m,): Fraction(1)}},
    )
    return KnownPolicy(table)
