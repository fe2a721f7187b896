from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

from deformwb.commpoly import Poly
from deformwb.exactcore import Alphabet, NcPoly

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

XYZ = Alphabet.of("xyz")

small_q = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))


def words(alphabet, max_len=4):
    return st.lists(st.integers(0, len(alphabet) - 1), max_size=max_len).map(tuple)


def ncpolys(alphabet=XYZ, max_len=3, max_terms=4):
    return st.dictionaries(words(alphabet, max_len), small_q, max_size=max_terms).map(
        lambda d: NcPoly(alphabet, d))


def polys(nvars, max_deg=3, max_terms=4):
    exps = st.lists(st.integers(0, max_deg), min_size=nvars, max_size=nvars).map(tuple)
    return st.dictionaries(exps, small_q, max_size=max_terms).map(lambda d: Poly(nvars, d))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
