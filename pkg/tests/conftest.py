import random
from fractions import Fraction
from pathlib import Path

import pytest

from medid.ident import RoleView
from medid.modelfile import builtin_model
from medid.scm import (
    ROLE_A,
    ROLE_C,
    ROLE_L,
    ROLE_M,
    ROLE_Y,
    Scm,
    VariableDecl,
    expand_cpt_sugar,
)

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def toy1():
    return builtin_model("toy1")


@pytest.fixture(scope="session")
def toy2():
    return builtin_model("toy2")


@pytest.fixture(scope="session")
def toy3():
    return builtin_model("toy3")


@pytest.fixture(scope="session")
def toy3_anti():
    return builtin_model("toy3_anti")


@pytest.fixture(scope="session")
def toy4():
    return builtin_model("toy4")


def roles_of(model: Scm) -> RoleView:
    return RoleView(model.variables)


def _interior_row(rng: random.Random, k: int) -> tuple[Fraction, ...]:
    """A strictly positive probability row with denominator 4."""
    while True:
        parts = [rng.randint(1, 2) for _ in range(k)]
        if sum(parts) == 4:
            return tuple(Fraction(p, 4) for p in parts)
        if k == 2:
            a = rng.randint(1, 3)
            return (Fraction(a, 4), Fraction(4 - a, 4))


def random_model(seed: int) -> Scm:
    """A random strictly positive model: binary C, A, optional binary L,
    mediator with 2 or 3 states, binary numeric Y."""
    rng = random.Random(seed)
    with_l = rng.random() < 0.5
    m_states = ("0", "1") if rng.random() < 0.5 else ("0", "1", "2")

    variables = [
        VariableDecl("C", ("0", "1"), ROLE_C, None),
        VariableDecl("A", ("0", "1"), ROLE_A, None),
    ]
    if with_l:
        variables.append(VariableDecl("L", ("0", "1"), ROLE_L, None))
    variables += [
        VariableDecl("M", m_states, ROLE_M, None),
        VariableDecl("Y", ("0", "1"), ROLE_Y, (Fraction(0), Fraction(1))),
    ]
    by_name = {v.name: v for v in variables}

    parent_map = {"C": (), "A": ("C",)}
    if with_l:
        parent_map["L"] = ("C", "A")
        parent_map["M"] = ("C", "A", "L")
        parent_map["Y"] = ("C", "A", "L", "M")
    else:
        parent_map["M"] = ("C", "A")
        parent_map["Y"] = ("C", "A", "M")

    noises, mechanisms = {}, {}
    for name, parents in parent_map.items():
        var = by_name[name]
        cells = [()]
        for p in parents:
            cells = [c + (s,) for c in cells for s in by_name[p].states]
        cpt = {cell: _interior_row(rng, len(var.states)) for cell in cells}
        noise, mech = expand_cpt_sugar(var, parents, cpt)
        noises[name] = noise
        mechanisms[name] = mech
    return Scm(variables=tuple(variables), noises=noises, mechanisms=mechanisms)
