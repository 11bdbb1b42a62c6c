from fractions import Fraction

import pytest

from medid import oracle
from medid.policy import COND_C, COND_MARGINAL, point_mass_policy


def test_observed_joint_mass(toy1):
    assert oracle.observed_joint(toy1).mass == 1


def test_frozen_means_toy1(toy1):
    assert oracle.po_mean_a(toy1, "1") == Fraction(17, 32)
    assert oracle.po_mean_a(toy1, "0") == Fraction(7, 32)
    assert oracle.po_mean_am(toy1, "1", "1") == Fraction(5, 8)
    assert oracle.po_mean_am(toy1, "1", "0") == Fraction(3, 8)
    assert oracle.po_mean_am(toy1, "0", "1") == Fraction(3, 8)
    assert oracle.po_mean_am(toy1, "0", "0") == Fraction(1, 8)
    assert oracle.po_mean_crossworld(toy1, "1", "0") == Fraction(15, 32)


def test_frozen_potential_mediator_toy1(toy1):
    by_c = oracle.potential_mediator_dist(toy1, "1", COND_C)
    assert by_c.row(("0",))[("1",)] == Fraction(1, 2)
    assert by_c.row(("1",))[("1",)] == Fraction(3, 4)
    marg = oracle.potential_mediator_dist(toy1, "0", COND_MARGINAL)
    assert marg.row(())[("1",)] == Fraction(3, 8)


def test_frozen_means_toy3(toy3):
    assert oracle.po_mean_a(toy3, "1") == Fraction(309, 512)
    assert oracle.po_mean_a(toy3, "0") == Fraction(169, 512)
    assert oracle.po_mean_crossworld(toy3, "1", "0") == Fraction(255, 512)


def test_point_mass_policy_equals_am(toy1):
    mediator = ("M", toy1.mediator.states)
    pol = point_mass_policy(mediator, "1")
    assert oracle.po_mean_policy(toy1, "1", pol) == oracle.po_mean_am(toy1, "1", "1")


def test_potential_policy_collapse(toy1):
    """Evaluating arm a under its own potential mediator law recovers E[Y(a)]."""
    from medid.policy import KnownPolicy

    for a in ("0", "1"):
        dist = oracle.potential_mediator_dist(toy1, a, COND_C)
        assert oracle.po_mean_policy(toy1, a, KnownPolicy(dist)) == oracle.po_mean_a(toy1, a)


def test_counterfactual_joint_and_ci(toy1):
    y1 = oracle.PotentialVar("Y", "1")
    cj = oracle.counterfactual_joint(toy1, [y1])
    assert cj.mass == 1
    # Exchangeability given C holds by construction of the canonical model.
    holds, dev = oracle.check_ci(cj, ["A"], [y1.name], ["C"])
    assert holds and dev == 0
    # Consistency: on A=1, Y equals Y(1).
    on_arm = cj.condition({"A": "1"})
    assert on_arm.prob({"Y": "1", y1.name: "0"}) == 0
    assert on_arm.prob({"Y": "0", y1.name: "1"}) == 0


def test_crossworld_ci_fails_with_confounder(toy3):
    m0 = oracle.PotentialVar("M", "0")
    worst = Fraction(0)
    for m in ("0", "1"):
        y1m = oracle.PotentialVar("Y", "1", m)
        cj = oracle.counterfactual_joint(toy3, [m0, y1m])
        _, dev = oracle.check_ci(cj, [m0.name], [y1m.name], ["C"])
        worst = max(worst, dev)
    assert worst == Fraction(9, 512)


def test_potential_var_names():
    assert oracle.PotentialVar("Y", "1").name == "Y(a=1)"
    assert oracle.PotentialVar("Y", "0", "1").name == "Y(a=0,m=1)"
    assert oracle.PotentialVar("M", "0").name == "M(a=0)"
