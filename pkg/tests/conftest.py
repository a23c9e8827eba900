import pytest

from eonsurv.topology import Link, Topology

# criterion name -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def make_topology(edges, n_nodes=None, capacity=8, name="T"):
    n = n_nodes if n_nodes is not None else 1 + max(max(u, v) for u, v, _ in edges)
    links = tuple(Link(i, u, v, float(km)) for i, (u, v, km) in enumerate(edges))
    return Topology(name, n, links, capacity)


# kite node labels
A, B, C, D = 0, 1, 2, 3


@pytest.fixture
def triangle():
    # A=0, B=1, C=2, unit lengths
    return make_topology([(0, 1, 1), (0, 2, 1), (1, 2, 1)], capacity=4)


@pytest.fixture
def kite():
    """Four-node kite for dual-failure cases.

    C-B is long so C->A backs up over C-D-A and B->A over B-D-A.
    """
    return make_topology(
        [(C, A, 100), (B, A, 100), (C, D, 100), (D, A, 100), (B, D, 100), (C, B, 300)],
        capacity=8, name="KITE")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
