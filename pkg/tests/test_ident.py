from fractions import Fraction

import pytest

from medid import ident, oracle
from medid.errors import NotIdentifiedError, NullEventError
from medid.policy import (
    COND_C,
    COND_CL,
    COND_MARGINAL,
    KnownPolicy,
    PotentialPolicy,
    point_mass_policy,
)

from conftest import DATA, roles_of


@pytest.fixture(scope="module")
def j1(toy1):
    return oracle.observed_joint(toy1)


@pytest.fixture(scope="module")
def j3(toy3):
    return oracle.observed_joint(toy3)


def test_mean_a_matches_oracle(toy1, j1):
    roles = roles_of(toy1)
    for a in ("0", "1"):
        assert ident.ident_mean_a(j1, roles, a) == oracle.po_mean_a(toy1, a)


def test_mean_am_matches_oracle(toy3, j3):
    roles = roles_of(toy3)
    for a in ("0", "1"):
        for m in ("0", "1"):
            assert ident.ident_mean_am(j3, roles, a, m) == oracle.po_mean_am(toy3, a, m)


def test_potential_mediator_matches_oracle(toy3, j3):
    roles = roles_of(toy3)
    for a_star in ("0", "1"):
        for cond in (COND_MARGINAL, COND_C, COND_CL):
            got = ident.potential_mediator_dist(j3, roles, a_star, cond)
            want = oracle.potential_mediator_dist(toy3, a_star, cond)
            assert got.rows == want.rows, (a_star, cond)


def test_policy_mean_matches_oracle(toy3, j3):
    roles = roles_of(toy3)
    for a in ("0", "1"):
        for a_star in ("0", "1"):
            for cond in (COND_MARGINAL, COND_C, COND_CL):
                pol = PotentialPolicy(a_star=a_star, conditioning=cond)
                got = ident.ident_mean_policy(j3, roles, a, pol)
                dist = oracle.potential_mediator_dist(toy3, a_star, cond)
                want = oracle.po_mean_policy(toy3, a, KnownPolicy(dist))
                assert got == want, (a, a_star, cond)


def test_known_policy_matches_oracle(toy1, j1):
    from medid.policy import load_known_policy

    roles = roles_of(toy1)
    pol = load_known_policy(
        DATA / "pol_c.tsv",
        ("M", ("0", "1")),
        [("C", ("0", "1"))],
        [],
        COND_C,
    )
    got = ident.ident_mean_policy(j1, roles, "0", pol)
    want = oracle.po_mean_policy(toy1, "0", pol)
    assert got == want


def test_point_mass_policy_equals_am(toy1, j1):
    roles = roles_of(toy1)
    pol = point_mass_policy(("M", ("0", "1")), "1")
    assert ident.ident_mean_policy(j1, roles, "1", pol) == ident.ident_mean_am(j1, roles, "1", "1")


def test_crossworld_identified_without_confounder(toy1, toy2, j1):
    roles = roles_of(toy1)
    assert ident.ident_mean_crossworld(j1, roles, "1", "0") == Fraction(15, 32)
    j2 = oracle.observed_joint(toy2)
    got = ident.ident_mean_crossworld(j2, roles_of(toy2), "1", "0")
    assert got == oracle.po_mean_crossworld(toy2, "1", "0") == Fraction(13, 32)


def test_crossworld_refused_with_confounder(toy3, j3):
    roles = roles_of(toy3)
    with pytest.raises(NotIdentifiedError):
        ident.ident_mean_crossworld(j3, roles, "1", "0")


def test_crossworld_forced_value_is_biased(toy3, j3):
    roles = roles_of(toy3)
    forced = ident.ident_mean_crossworld(j3, roles, "1", "0", force=True)
    assert forced == Fraction(42899, 89600)
    truth = oracle.po_mean_crossworld(toy3, "1", "0")
    assert forced - truth == Fraction(-863, 44800)


def test_positivity_hole_raises(toy2):
    j2 = oracle.observed_joint(toy2)
    roles = roles_of(toy2)
    # P(M=1 | C=1, A=0) = 0, so the controlled mean at m=1 under a=0 needs a
    # conditional expectation on a null event.
    with pytest.raises(NullEventError):
        ident.ident_mean_am(j2, roles, "0", "1")
