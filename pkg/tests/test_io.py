import json

import pytest

from csfsim.io import (
    DataError,
    ExperimentManifest,
    bundled_teams,
    load_schedule,
    load_team_params,
    manifest_path,
    read_dataset,
    write_dataset,
    write_schedule,
    write_team_params,
)
from csfsim.sim import LeagueConfig, TeamParams, build_round_robin_schedule, run_experiment, synthetic_teams


@pytest.fixture(scope="module")
def small_run():
    cfg = LeagueConfig(teams=tuple(synthetic_teams(6)), games_per_team=20)
    sched = build_round_robin_schedule(6, 20, cfg.team_ids)
    data = run_experiment(cfg, sched, 12, master_seed=8)
    return cfg, sched, data


def test_bundled_fixture():
    teams = bundled_teams()
    assert len(teams) == 30
    assert teams == synthetic_teams()


def test_team_params_round_trip(tmp_path):
    teams = [TeamParams(3, "Alpha, the first", 4.123456789012345, 3.9), TeamParams(9, "Béta", 5.0, 1e-3)]
    p = tmp_path / "teams.csv"
    write_team_params(p, teams)
    assert load_team_params(p) == teams


def test_team_params_validation(tmp_path):
    p = tmp_path / "teams.csv"
    p.write_text("team_id,name,off_rpg,def_rpg\n1,A,4.0,4.0\n2,B,-1,4.0\n")
    with pytest.raises(DataError) as info:
        load_team_params(p)
    assert "off_rpg" in str(info.value) and "line 3" in str(info.value)

    p.write_text("team_id,name,off_rpg,def_rpg\n1,A,4.0,4.0\n1,B,4.0,4.0\n")
    with pytest.raises(DataError, match="duplicates line 2"):
        load_team_params(p)

    p.write_text("team,name,off,def\n1,A,4.0,4.0\n")
    with pytest.raises(DataError, match="header"):
        load_team_params(p)

    p.write_text("team_id,name,off_rpg,def_rpg\n1,A,four,4.0\n")
    with pytest.raises(DataError, match="off_rpg.*line 2|line 2.*off_rpg"):
        load_team_params(p)


def test_dataset_round_trip(tmp_path, small_run):
    cfg, sched, data = small_run
    p = tmp_path / "dataset.csv"
    manifest = ExperimentManifest.build(cfg, sched, 12, 8)
    write_dataset(p, data, manifest)
    assert manifest_path(p).name == "dataset.manifest.json"
    back = read_dataset(p)
    assert back == data
    assert back.master_seed == 8 and back.config_digest == data.config_digest
    lines = p.read_text().splitlines()
    assert lines[0] == "iteration,team_id,wins,losses,rs,ra"
    assert len(lines) == 12 * 6 + 1


def test_dataset_without_manifest(tmp_path, small_run):
    _, _, data = small_run
    p = tmp_path / "plain.csv"
    write_dataset(p, data)
    back = read_dataset(p)
    assert back.rows == data.rows and back.master_seed is None


def test_tampered_row_rejected(tmp_path, small_run):
    cfg, sched, data = small_run
    p = tmp_path / "dataset.csv"
    write_dataset(p, data, ExperimentManifest.build(cfg, sched, 12, 8))
    lines = p.read_text().splitlines()
    it, tid, w, l, rs, ra = lines[5].split(",")
    lines[5] = ",".join([it, tid, str(int(w) + 1), l, rs, ra])
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError) as info:
        read_dataset(p)
    assert "line 6" in str(info.value)
    assert info.value.line == 6


def test_conservation_checked_with_manifest(tmp_path, small_run):
    cfg, sched, data = small_run
    p = tmp_path / "dataset.csv"
    write_dataset(p, data, ExperimentManifest.build(cfg, sched, 12, 8))
    lines = p.read_text().splitlines()
    # move one win to a loss and back on another team: wins+losses still G, but totals broken
    it, tid, w, l, rs, ra = lines[1].split(",")
    lines[1] = ",".join([it, tid, w, l, str(int(rs) + 1), ra])
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError, match="conservation"):
        read_dataset(p)


def test_manifest_digest_tamper(tmp_path, small_run):
    cfg, sched, data = small_run
    p = tmp_path / "dataset.csv"
    write_dataset(p, data, ExperimentManifest.build(cfg, sched, 12, 8))
    m = json.loads(manifest_path(p).read_text())
    m["league"]["dispersion"] = 5.0
    manifest_path(p).write_text(json.dumps(m))
    with pytest.raises(DataError, match="config_digest"):
        read_dataset(p)


def test_rows_out_of_order(tmp_path, small_run):
    _, _, data = small_run
    p = tmp_path / "dataset.csv"
    write_dataset(p, data)
    lines = p.read_text().splitlines()
    lines[1], lines[2] = lines[2], lines[1]
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(DataError, match="order"):
        read_dataset(p)


def test_schedule_file(tmp_path):
    p = tmp_path / "schedule.csv"
    matchups = [(1, 2, 2), (2, 1, 1), (3, 4, 3)]
    write_schedule(p, matchups)
    sched, back = load_schedule(p)
    assert back == matchups
    assert sched.games == [(1, 2), (1, 2), (2, 1), (3, 4), (3, 4), (3, 4)]
    p.write_text("home_id,away_id,count\n1,1,3\n")
    with pytest.raises(DataError, match="itself"):
        load_schedule(p)


def test_manifest_with_file_schedule(tmp_path):
    teams = synthetic_teams(4)
    cfg = LeagueConfig(teams=tuple(teams), games_per_team=3)
    matchups = [(1, 2, 1), (3, 4, 1), (1, 3, 1), (2, 4, 1), (4, 1, 1), (2, 3, 1)]
    from csfsim.io import schedule_from_matchups

    sched = schedule_from_matchups(matchups)
    m = ExperimentManifest.build(cfg, sched, 2, 1, matchups, "s.csv")
    back = ExperimentManifest.from_json(m.to_json())
    assert back.build_schedule() == sched
    assert back.recompute_digest() == m.config_digest


def test_missing_file():
    with pytest.raises(DataError, match="not found"):
        read_dataset("/nonexistent/data.csv")
