import numpy as np
import pytest

from csfsim.core import difference_win_pct, tullock_win_pct
from csfsim.io import bundled_teams
from csfsim.sim import (
    LeagueConfig,
    SimDataset,
    TeamSeasonLine,
    build_round_robin_schedule,
    run_experiment,
    synthetic_teams,
)

_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    marker = getattr(report, "_acceptance", None)
    if marker is None:
        return
    number, title = marker
    ok, _ = _acceptance.get(number, (True, title))
    _acceptance[number] = (ok and report.passed, title)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("acceptance")
    if m is not None:
        outcome.get_result()._acceptance = m.args


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        ok, title = _acceptance[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")


@pytest.fixture(scope="session")
def fixture_cfg():
    return LeagueConfig(teams=tuple(bundled_teams()))


@pytest.fixture(scope="session")
def fixture_schedule(fixture_cfg):
    return build_round_robin_schedule(30, 162, fixture_cfg.team_ids)


@pytest.fixture(scope="session")
def small_dataset():
    """20 teams x 50 seasons = 1,000 team-season rows."""
    cfg = LeagueConfig(teams=tuple(synthetic_teams(20)))
    sched = build_round_robin_schedule(20, 162, cfg.team_ids)
    return run_experiment(cfg, sched, 50, master_seed=99)


def noiseless_dataset(form, param, n=400, games=162, seed=0):
    """Lines whose win percentage is exactly the CSF value (fractional wins)."""
    rng = np.random.default_rng(seed)
    rs = rng.integers(500, 900, n)
    ra = rng.integers(500, 900, n)
    f = tullock_win_pct if form == "tullock" else difference_win_pct
    p = np.asarray(f(rs, ra, param))
    wins = p * games
    rows = [
        TeamSeasonLine(i // 30, i % 30 + 1, float(w), games - float(w), int(s), int(a))
        for i, (w, s, a) in enumerate(zip(wins, rs, ra))
    ]
    return SimDataset(tuple(rows))
