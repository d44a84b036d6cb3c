"""Shared fixtures and a per-criterion result summary for the acceptance
module."""

import re

import pytest

from misstab import (
    IncompleteTable,
    Stratum,
    TableSchema,
    builtin_dataset,
    fit_all,
)

_CRITERION = re.compile(r"test_criterion_(\d+)")

_TITLES = {
    1: "exact odds screening on smoking-birthweight",
    2: "exact odds screening on bone-density",
    3: "bone-density fits for M4 and M5",
    4: "spo-y1 screening and C-family fits",
    5: "spo-y1y2 screening and D-family fits",
    6: "bootstrap percentages at 10000 replicates",
    7: "estimation property suite",
    8: "proportional-margins fixture, brute-force check",
}

_results = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call":
        _results[n] = report.passed
    elif report.failed:
        _results[n] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        status = "PASS" if _results[n] else "FAIL"
        terminalreporter.write_line(
            f"criterion {n}: {status}  ({_TITLES.get(n, '')})"
        )


@pytest.fixture(scope="session")
def smoking_table():
    return builtin_dataset("smoking-birthweight")


@pytest.fixture(scope="session")
def bone_table():
    return builtin_dataset("bone-density")


@pytest.fixture(scope="session")
def opinion_one_table():
    return builtin_dataset("spo-y1")


@pytest.fixture(scope="session")
def opinion_two_table():
    return builtin_dataset("spo-y1y2")


@pytest.fixture(scope="session")
def smoking_fits(smoking_table):
    return fit_all(smoking_table)


@pytest.fixture(scope="session")
def bone_fits(bone_table):
    return fit_all(bone_table)


@pytest.fixture(scope="session")
def opinion_one_fits(opinion_one_table):
    return fit_all(opinion_one_table)


@pytest.fixture(scope="session")
def opinion_two_fits(opinion_two_table):
    return fit_all(opinion_two_table)


@pytest.fixture(scope="session")
def proportional_table():
    # supplemental margins exactly proportional to the full-stratum sums
    schema = TableSchema((("first", 2), ("second", 2)), ("first", "second"))
    return IncompleteTable(
        schema,
        (
            Stratum(("first", "second"), [[3, 5], [7, 11]]),
            Stratum(("second",), [10, 16]),
            Stratum(("first",), [8, 18]),
            Stratum((), 26),
        ),
    )
