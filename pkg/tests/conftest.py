import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE: dict = {}

finite = dict(allow_nan=False, allow_infinity=False)


@st.composite
def interior_points(draw, n=None):
    """Interior points z with rho(z) between 1e-3 and 1e3."""
    n = draw(st.integers(1, 3)) if n is None else n
    zp = [complex(draw(st.floats(-3, 3, **finite)), draw(st.floats(-3, 3, **finite)))
          for _ in range(n - 1)]
    h = 10.0 ** draw(st.floats(-3, 3, **finite))
    x = draw(st.floats(-10, 10, **finite))
    z = np.array(zp + [0j], dtype=complex)
    z[-1] = x + 1j * (np.sum(np.abs(z[:-1]) ** 2) + h)
    return z


@st.composite
def ball_points(draw, n, radius=0.95):
    v = np.array([complex(draw(st.floats(-1, 1, **finite)), draw(st.floats(-1, 1, **finite)))
                  for _ in range(n)])
    norm = np.linalg.norm(v)
    if norm == 0:
        return v
    return v / norm * radius * draw(st.floats(0, 1, **finite))


@st.composite
def point_tuples(draw, count):
    n = draw(st.integers(1, 3))
    return tuple(draw(interior_points(n)) for _ in range(count))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, label, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {label}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
