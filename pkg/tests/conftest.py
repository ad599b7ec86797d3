from __future__ import annotations

import pytest

from pva.diffalg import Alg, DiffPoly
from pva.bracket import BracketTable, LambdaPoly
from pva.models import euler_bracket, epdiff_bracket


@pytest.fixture(scope="session")
def alg2():
    return Alg(2, ("w",))


@pytest.fixture(scope="session")
def euler_table():
    return euler_bracket().table


@pytest.fixture(scope="session")
def epdiff1_table():
    return epdiff_bracket(1).table


@pytest.fixture(scope="session")
def epdiff2_table():
    return epdiff_bracket(2).table


@pytest.fixture(scope="session")
def virasoro_table():
    alg = Alg(1, ("u",))
    u = DiffPoly.gen(alg, 0)
    entry = LambdaPoly(
        alg,
        1,
        {
            ((1,),): 2 * u,
            ((0,),): DiffPoly.jet(alg, 0, (1,)),
            ((3,),): DiffPoly.const(alg, 1),
        },
    )
    return BracketTable(alg, {(0, 0): entry})


def jet(alg, gen, *index):
    return DiffPoly.jet(alg, gen, tuple(index))
