import pytest

from nanobt.traces import TraceSet, call, ret

# One context compartment C_C against three programs C_P.  The prefixes share
# the first call and diverge while C_P has control; m1 ends with 43.
M1 = (call("C_C", "C_P", "p", 40), call("C_P", "C_C", "p", 41),
      ret("C_C", "C_P", 42), ret("C_P", "C_C", 43))
M2 = (call("C_C", "C_P", "p", 40), ret("C_P", "C_C", 43))
M3 = (call("C_C", "C_P", "p", 40), ret("C_P", "C_C", 44))

# the standalone two-compartment prefix, ending in 42
SINGLE = (call("C1", "C2", "p", 40), call("C2", "C1", "main", 41),
          ret("C1", "C2", 42), ret("C2", "C1", 42))


def branching_set(*traces):
    return TraceSet(traces or (M1, M2, M3), {"C_C"}, {"C_P"}, "C_C",
                    {"C_C": ("p",), "C_P": ("p",)})


def single_set():
    return TraceSet((SINGLE,), {"C1"}, {"C2"}, "C1", {"C1": ("main",), "C2": ("p",)})


@pytest.fixture
def branching():
    return branching_set()


@pytest.fixture
def single():
    return single_set()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
