import pytest

from presforge.constructions import kill_finite_quotients, rips_wise
from presforge.presentations import higman_presentations, presentation


@pytest.fixture(scope="session")
def higman_J():
    return higman_presentations()[0]


@pytest.fixture(scope="session")
def higman_D():
    return higman_presentations()[1]


@pytest.fixture(scope="session")
def icosahedral():
    return presentation(["a", "b"], ["a^2", "b^3", "(a*b)^5"])


@pytest.fixture(scope="session")
def trivial_pres():
    return presentation(["x"], ["x"], aspherical="single-generator free killing")


@pytest.fixture(scope="session")
def rips_trivial(trivial_pres):
    return rips_wise(trivial_pres)


@pytest.fixture(scope="session")
def rips_higman(higman_J):
    return rips_wise(higman_J)


@pytest.fixture(scope="session")
def kill_trivial(trivial_pres):
    return kill_finite_quotients(trivial_pres)


def certified_perfect_two_generator():
    """A perfect C'(1/6) presentation on two generators: each generator is
    expressed by a long commutator word whose runs are globally distinct."""
    B = 14
    v1 = "*".join(f"[a^{2 + 8 * j}, b^{4 + 8 * j}]" for j in range(B))
    v2 = "*".join(f"[a^{6 + 8 * j}, b^{8 + 8 * j}]" for j in range(B))
    return presentation(["a", "b"], [f"a*{v1}", f"b*{v2}"])


@pytest.fixture(scope="session")
def perfect_certified():
    return certified_perfect_two_generator()
