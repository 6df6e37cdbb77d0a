"""CSV and manifest file formats.

``teams.csv``     team_id,name,off_rpg,def_rpg
``schedule.csv``  home_id,away_id,count   (expanded row by row, in order)
``dataset.csv``   iteration,team_id,wins,losses,rs,ra
                  plus ``dataset.manifest.json`` next to it

Headers are matched exactly. Floats are written with ``repr`` (shortest
round trip), so write-then-read is lossless.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .sim import (
    COLUMNS,
    LeagueConfig,
    Schedule,
    SimDataset,
    TeamParams,
    build_round_robin_schedule,
    config_digest,
)

TEAMS_HEADER = ["team_id", "name", "off_rpg", "def_rpg"]
SCHEDULE_HEADER = ["home_id", "away_id", "count"]
DATASET_HEADER = list(COLUMNS)


class DataError(ValueError):
    """Malformed or invalid input file; names the file and line when known."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f", line {line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _read_rows(path, header):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError("file not found", path) from None
    except UnicodeDecodeError as exc:
        raise DataError(f"not valid UTF-8 ({exc.reason})", path) from None
    reader = csv.reader(text.splitlines())
    try:
        got = next(reader)
    except StopIteration:
        raise DataError("empty file", path, 1) from None
    if got != header:
        raise DataError(f"header must be exactly {','.join(header)!r}, got {','.join(got)!r}", path, 1)
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
        yield lineno, row


def _parse(kind, field, value, path, line):
    try:
        return kind(value)
    except ValueError:
        raise DataError(f"{field}: cannot parse {value!r} as {kind.__name__}", path, line) from None


def load_team_params(path):
    teams = []
    seen = {}
    for line, (tid, name, off, dfn) in _read_rows(path, TEAMS_HEADER):
        tid = _parse(int, "team_id", tid, path, line)
        off = _parse(float, "off_rpg", off, path, line)
        dfn = _parse(float, "def_rpg", dfn, path, line)
        for field, v in (("off_rpg", off), ("def_rpg", dfn)):
            if not (np.isfinite(v) and v > 0):
                raise DataError(f"{field} must be > 0, got {v!r}", path, line)
        if tid in seen:
            raise DataError(f"team_id {tid} duplicates line {seen[tid]}", path, line)
        seen[tid] = line
        teams.append(TeamParams(tid, name, off, dfn))
    if not teams:
        raise DataError("no teams", path)
    return teams


def write_team_params(path, teams):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TEAMS_HEADER)
        for t in teams:
            w.writerow([t.team_id, t.name, _fmt(t.off_rpg), _fmt(t.def_rpg)])


def bundled_teams():
    """The 30-team synthetic fixture shipped with the package."""
    ref = resources.files("csfsim") / "data" / "teams_synthetic.csv"
    with resources.as_file(ref) as p:
        return load_team_params(p)


def load_schedule(path):
    """Return ``(schedule, matchups)`` where matchups are the raw rows."""
    matchups = []
    for line, (h, a, c) in _read_rows(path, SCHEDULE_HEADER):
        h = _parse(int, "home_id", h, path, line)
        a = _parse(int, "away_id", a, path, line)
        c = _parse(int, "count", c, path, line)
        if c < 0:
            raise DataError(f"count must be >= 0, got {c}", path, line)
        if h == a:
            raise DataError(f"team {h} cannot play itself", path, line)
        matchups.append((h, a, c))
    return schedule_from_matchups(matchups), matchups


def schedule_from_matchups(matchups):
    games = [(h, a) for h, a, c in matchups for _ in range(c)]
    return Schedule.from_games(games)


def write_schedule(path, matchups):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCHEDULE_HEADER)
        w.writerows(matchups)


@dataclass(frozen=True)
class ExperimentManifest:
    master_seed: int
    iterations: int
    league: dict
    schedule: dict  # {"source": "builtin"} or {"source": path, "matchups": [...]}
    tool_version: str
    config_digest: str

    @classmethod
    def build(cls, cfg, schedule, iterations, master_seed, matchups=None, schedule_path=None):
        if matchups is None:
            sched = {"source": "builtin"}
        else:
            sched = {"source": str(schedule_path), "matchups": [list(m) for m in matchups]}
        return cls(
            master_seed=int(master_seed),
            iterations=int(iterations),
            league=cfg.as_dict(),
            schedule=sched,
            tool_version=__version__,
            config_digest=config_digest(cfg, schedule),
        )

    def league_config(self):
        lg = dict(self.league)
        teams = [TeamParams(**t) for t in lg.pop("teams")]
        return LeagueConfig(teams=tuple(teams), **lg)

    def build_schedule(self):
        cfg = self.league_config()
        if self.schedule.get("source") == "builtin":
            return build_round_robin_schedule(len(cfg.teams), cfg.games_per_team, cfg.team_ids)
        return schedule_from_matchups(tuple(m) for m in self.schedule["matchups"])

    def recompute_digest(self):
        return config_digest(self.league_config(), self.build_schedule())

    def to_json(self):
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


def manifest_path(dataset_path):
    p = Path(dataset_path)
    return p.with_name(p.stem + ".manifest.json")


def write_dataset(path, data, manifest=None):
    cols = data.columns
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DATASET_HEADER)
        w.writerows(zip(*(cols[c].tolist() for c in COLUMNS)))
    if manifest is not None:
        manifest_path(path).write_text(manifest.to_json(), encoding="utf-8")


def read_manifest(path):
    mpath = manifest_path(path)
    if not mpath.exists():
        return None
    try:
        manifest = ExperimentManifest.from_json(mpath.read_text(encoding="utf-8"))
    except (ValueError, TypeError, KeyError) as exc:
        raise DataError(f"malformed manifest ({exc})", mpath) from None
    try:
        digest = manifest.recompute_digest()
    except (ValueError, TypeError, KeyError) as exc:
        raise DataError(f"manifest does not describe a valid league ({exc})", mpath) from None
    if digest != manifest.config_digest:
        raise DataError("config_digest does not match the manifest contents", mpath)
    return manifest


def read_dataset(path):
    """Read and validate a dataset CSV (and its manifest sidecar, if present).

    Every line must satisfy ``wins + losses = G`` with one G for the whole
    file (taken from the manifest when there is one), and rows must be in
    (iteration, team_id) order. With a manifest, per-iteration conservation
    (total wins = total losses, total rs = total ra) is also checked.
    """
    manifest = read_manifest(path)
    G = manifest.league["games_per_team"] if manifest else None
    values = []
    prev = None
    for line, row in _read_rows(path, DATASET_HEADER):
        rec = [_parse(int, name, v, path, line) for name, v in zip(COLUMNS, row)]
        it, tid, wins, losses, rs, ra = rec
        if G is None:
            G = wins + losses
        if wins + losses != G:
            raise DataError(f"wins + losses = {wins + losses}, expected {G}", path, line)
        if wins < 0 or losses < 0:
            raise DataError("wins and losses must be >= 0", path, line)
        if rs < 0 or ra < 0:
            raise DataError("rs and ra must be >= 0", path, line)
        if it < 0:
            raise DataError("iteration must be >= 0", path, line)
        if prev is not None and (it, tid) <= prev:
            raise DataError(f"rows out of (iteration, team_id) order at {(it, tid)}", path, line)
        prev = (it, tid)
        values.append(rec)
    if not values:
        raise DataError("no data rows", path)
    mat = np.array(values, dtype=np.int64)
    if manifest is not None:
        _check_conservation(mat, manifest, path)
        return SimDataset.from_columns(
            {c: mat[:, i] for i, c in enumerate(COLUMNS)}, manifest.master_seed, manifest.config_digest
        )
    return SimDataset.from_columns({c: mat[:, i] for i, c in enumerate(COLUMNS)})


def _check_conservation(mat, manifest, path):
    T = len(manifest.league["teams"])
    if len(mat) != manifest.iterations * T:
        raise DataError(f"expected {manifest.iterations * T} rows from the manifest, got {len(mat)}", path)
    its, first = np.unique(mat[:, 0], return_index=True)
    sums = np.add.reduceat(mat[:, 2:], first, axis=0)
    for it, (w, l, rs, ra), start in zip(its.tolist(), sums.tolist(), first.tolist()):
        if w != l or rs != ra:
            # report the first data line of the offending iteration (line 1 is the header)
            raise DataError(
                f"iteration {it} breaks conservation (wins {w} vs losses {l}, rs {rs} vs ra {ra})",
                path,
                start + 2,
            )
