"""Team-level Monte Carlo season simulator.

Each game draws regulation run totals for both sides from a negative
binomial (a Poisson whose rate is Gamma distributed) with mean
``off * def / league_mean``. Ties go to extra innings, one Poisson inning per
side at a time, until an inning ends with the score separated. There is no
home advantage.

A season is simulated in one vectorized pass over the schedule. A single
game goes through the same code as a batch of one, so the per-game and
per-season paths share one definition of the random draw order:

1. one Gamma draw per side, interleaved ``home0, away0, home1, away1, ...``
2. one Poisson draw per side, same order
3. per extra inning, one Poisson draw per side of every still-tied game,
   same interleaving, games in schedule order

Iteration ``j`` of an experiment draws from
``numpy.random.Generator(PCG64(derive_stream_seed(master_seed, j)))`` and
nothing else, so results do not depend on how iterations are split across
workers.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MAX_EXTRA_INNINGS = 1000

DEFAULT_GAMES = 162
DEFAULT_LEAGUE_MEAN = 4.07
DEFAULT_DISPERSION = 4.0
DEFAULT_EXTRA_INNING_DIVISOR = 9.0


class SimulationError(RuntimeError):
    """A game or season could not be completed.

    ``iteration`` is set when the failure happened inside an experiment.
    """

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"iteration {iteration}: {message}"
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class TeamParams:
    team_id: int
    name: str
    off_rpg: float
    def_rpg: float

    def __post_init__(self):
        for attr in ("off_rpg", "def_rpg"):
            v = getattr(self, attr)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{attr} must be > 0 for team {self.team_id}, got {v!r}")


@dataclass(frozen=True)
class LeagueConfig:
    teams: tuple[TeamParams, ...]
    games_per_team: int = DEFAULT_GAMES
    league_mean_rpg: float = DEFAULT_LEAGUE_MEAN
    dispersion: float = DEFAULT_DISPERSION
    extra_inning_mean_divisor: float = DEFAULT_EXTRA_INNING_DIVISOR

    def __post_init__(self):
        object.__setattr__(self, "teams", tuple(sorted(self.teams, key=lambda t: t.team_id)))
        n = len(self.teams)
        if n < 2 or n % 2:
            raise ValueError(f"league needs an even number of teams >= 2, got {n}")
        ids = [t.team_id for t in self.teams]
        if len(set(ids)) != n:
            raise ValueError("team_id values must be unique")
        if self.games_per_team < 1:
            raise ValueError("games_per_team must be >= 1")
        for attr in ("league_mean_rpg", "dispersion", "extra_inning_mean_divisor"):
            if not getattr(self, attr) > 0:
                raise ValueError(f"{attr} must be > 0")

    @property
    def team_ids(self):
        return [t.team_id for t in self.teams]

    def team(self, team_id):
        for t in self.teams:
            if t.team_id == team_id:
                return t
        raise KeyError(team_id)

    def as_dict(self):
        return {
            "teams": [
                {"team_id": t.team_id, "name": t.name, "off_rpg": t.off_rpg, "def_rpg": t.def_rpg}
                for t in self.teams
            ],
            "games_per_team": self.games_per_team,
            "league_mean_rpg": self.league_mean_rpg,
            "dispersion": self.dispersion,
            "extra_inning_mean_divisor": self.extra_inning_mean_divisor,
        }


@dataclass(frozen=True, eq=False)
class Schedule:
    """Ordered list of (home, away) games, stored as two id arrays."""

    home: np.ndarray
    away: np.ndarray

    def __post_init__(self):
        home = np.asarray(self.home, dtype=np.int64)
        away = np.asarray(self.away, dtype=np.int64)
        if home.shape != away.shape or home.ndim != 1:
            raise ValueError("home and away must be 1-d arrays of equal length")
        if np.any(home == away):
            raise ValueError("a team cannot play itself")
        home.flags.writeable = False
        away.flags.writeable = False
        object.__setattr__(self, "home", home)
        object.__setattr__(self, "away", away)

    @classmethod
    def from_games(cls, games):
        games = list(games)
        if not games:
            return cls(np.empty(0, np.int64), np.empty(0, np.int64))
        home, away = zip(*games)
        return cls(np.array(home), np.array(away))

    @property
    def games(self):
        return list(zip(self.home.tolist(), self.away.tolist()))

    def __len__(self):
        return len(self.home)

    def __eq__(self, other):
        if not isinstance(other, Schedule):
            return NotImplemented
        return np.array_equal(self.home, other.home) and np.array_equal(self.away, other.away)

    def games_played(self):
        ids, counts = np.unique(np.concatenate([self.home, self.away]), return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def home_games(self):
        ids, counts = np.unique(self.home, return_counts=True)
        return dict(zip(ids.tolist(), counts.tolist()))

    def validate(self, cfg):
        """Raise ValueError unless every league team plays exactly G games."""
        played = self.games_played()
        ids = set(cfg.team_ids)
        unknown = set(played) - ids
        if unknown:
            raise ValueError(f"schedule references unknown team ids {sorted(unknown)}")
        G = cfg.games_per_team
        off = {t: played.get(t, 0) for t in ids if played.get(t, 0) != G}
        if off:
            raise ValueError(f"teams not playing exactly {G} games: {off}")


@dataclass(frozen=True)
class GameResult:
    home_runs: int
    away_runs: int

    @property
    def home_won(self):
        return self.home_runs > self.away_runs


@dataclass(frozen=True)
class TeamSeasonLine:
    iteration: int
    team_id: int
    wins: int
    losses: int
    rs: int
    ra: int

    @property
    def games(self):
        return self.wins + self.losses

    @property
    def win_pct(self):
        return self.wins / self.games


COLUMNS = ("iteration", "team_id", "wins", "losses", "rs", "ra")


@dataclass(frozen=True)
class SimDataset:
    rows: tuple[TeamSeasonLine, ...]
    master_seed: int | None = None
    config_digest: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self):
        return len(self.rows)

    @cached_property
    def columns(self):
        """Integer numpy column per field of TeamSeasonLine."""
        if not self.rows:
            return {c: np.empty(0, np.int64) for c in COLUMNS}
        mat = np.array([[getattr(r, c) for c in COLUMNS] for r in self.rows], dtype=float)
        out = {}
        for i, c in enumerate(COLUMNS):
            col = mat[:, i]
            # fractional wins are allowed for synthesized (noiseless) lines
            out[c] = col.astype(np.int64) if np.all(col == np.round(col)) else col
        return out

    @classmethod
    def from_columns(cls, columns, master_seed=None, config_digest=""):
        mat = np.column_stack([np.asarray(columns[c], dtype=np.int64) for c in COLUMNS])
        rows = tuple(TeamSeasonLine(*r) for r in mat.tolist())
        ds = cls(rows, master_seed, config_digest)
        ds.__dict__["columns"] = {c: mat[:, i] for i, c in enumerate(COLUMNS)}
        return ds

    @property
    def iterations(self):
        return sorted({r.iteration for r in self.rows})


def synthetic_teams(n_teams=30, low=3.3, high=5.0, shift=3):
    """Synthetic league with run rates spread evenly over ``[low, high]``.

    Offense and defense use the same evenly spaced values, so league totals
    of runs scored and allowed balance. Team ``i`` gets the ``i``-th offense
    value and the ``(i + shift) mod n``-th defense value, which correlates
    the two moderately (rank correlation about 0.46 for 30 teams).
    """
    vals = np.linspace(low, high, n_teams)
    return [
        TeamParams(i + 1, f"Synthetic {i + 1:02d}", float(vals[i]), float(vals[(i + shift) % n_teams]))
        for i in range(n_teams)
    ]


def _circle_rounds(n_teams):
    # Berger circle method; orientation alternates with round parity for the
    # fixed team and with pair index for the rest, which keeps home counts
    # balanced over any run of consecutive rounds.
    n = n_teams - 1
    rounds = []
    for r in range(n):
        pairs = [(n, r) if r % 2 else (r, n)]
        for k in range(1, n_teams // 2):
            x, y = (r + k) % n, (r - k) % n
            pairs.append((x, y) if k % 2 else (y, x))
        rounds.append(pairs)
    return rounds


def build_round_robin_schedule(n_teams, games_per_team, team_ids=None):
    """Repeated circle-method round robin, one round per game day.

    Full passes are repeated ``games_per_team // (n_teams - 1)`` times and the
    remainder is the first rounds of one more pass. Each meeting of a pair
    flips home and away relative to the previous meeting. ``team_ids`` maps
    slot ``i`` to a real id (default ``0..n_teams-1``).
    """
    if n_teams < 2 or n_teams % 2:
        raise ValueError(f"round robin needs an even number of teams >= 2, got {n_teams}")
    if games_per_team < 1:
        raise ValueError("games_per_team must be >= 1")
    ids = list(range(n_teams)) if team_ids is None else list(team_ids)
    if len(ids) != n_teams:
        raise ValueError("team_ids length must equal n_teams")
    rounds = _circle_rounds(n_teams)
    meetings = {}
    games = []
    for g in range(games_per_team):
        for h, a in rounds[g % (n_teams - 1)]:
            key = (min(h, a), max(h, a))
            m = meetings.get(key, 0)
            meetings[key] = m + 1
            if m % 2:
                h, a = a, h
            games.append((ids[h], ids[a]))
    return Schedule.from_games(games)


def expected_runs(off, def_, league_mean):
    """Mean runs per game for an offense of ``off`` facing a defense of ``def_``."""
    off, def_, league_mean = (np.asarray(v, dtype=float) for v in (off, def_, league_mean))
    if np.any(off <= 0) or np.any(def_ <= 0) or np.any(league_mean <= 0):
        raise ValueError("expected_runs arguments must all be > 0")
    mu = off * def_ / league_mean
    return float(mu) if mu.ndim == 0 else mu


def make_stream(seed):
    return np.random.Generator(np.random.PCG64(seed))


def sample_runs(mu, r, stream, size=None):
    """Negative binomial run count(s) with mean ``mu`` and variance ``mu + mu**2/r``."""
    if np.any(np.asarray(mu) <= 0) or r <= 0:
        raise ValueError("mu and r must be > 0")
    shape = np.shape(mu) if size is None else size
    rate = stream.gamma(r, np.broadcast_to(np.asarray(mu, dtype=float) / r, shape))
    out = stream.poisson(rate)
    return int(out) if np.ndim(out) == 0 else out


def _play_games(mu_home, mu_away, r, divisor, stream):
    n = len(mu_home)
    mu = np.empty(2 * n)
    mu[0::2] = mu_home
    mu[1::2] = mu_away
    runs = stream.poisson(stream.gamma(r, mu / r))
    home = runs[0::2].copy()
    away = runs[1::2].copy()
    tied = np.flatnonzero(home == away)
    inning_mu = mu.reshape(n, 2) / divisor
    for _ in range(MAX_EXTRA_INNINGS):
        if tied.size == 0:
            return home, away
        extra = stream.poisson(inning_mu[tied].ravel())
        home[tied] += extra[0::2]
        away[tied] += extra[1::2]
        tied = tied[home[tied] == away[tied]]
    if tied.size:
        raise SimulationError(f"{tied.size} game(s) still tied after {MAX_EXTRA_INNINGS} extra innings")
    return home, away


def simulate_game(home, away, cfg, stream):
    mu_h = expected_runs(home.off_rpg, away.def_rpg, cfg.league_mean_rpg)
    mu_a = expected_runs(away.off_rpg, home.def_rpg, cfg.league_mean_rpg)
    h, a = _play_games(
        np.array([mu_h]), np.array([mu_a]), cfg.dispersion, cfg.extra_inning_mean_divisor, stream
    )
    return GameResult(int(h[0]), int(a[0]))


class _SeasonKernel:
    """Schedule and team arrays prepared once, reused for every season."""

    def __init__(self, schedule, cfg):
        ids = cfg.team_ids
        index = {t: i for i, t in enumerate(ids)}
        self.n_teams = len(ids)
        self.team_ids = np.array(ids, dtype=np.int64)
        self.h = np.array([index[t] for t in schedule.home.tolist()], dtype=np.int64)
        self.a = np.array([index[t] for t in schedule.away.tolist()], dtype=np.int64)
        off = np.array([t.off_rpg for t in cfg.teams])
        dfn = np.array([t.def_rpg for t in cfg.teams])
        L = cfg.league_mean_rpg
        self.mu_home = off[self.h] * dfn[self.a] / L
        self.mu_away = off[self.a] * dfn[self.h] / L
        self.r = cfg.dispersion
        self.divisor = cfg.extra_inning_mean_divisor

    def play(self, stream):
        return _play_games(self.mu_home, self.mu_away, self.r, self.divisor, stream)

    def run(self, stream):
        """Return (wins, losses, rs, ra) arrays in team_id order."""
        home, away = self.play(stream)
        T = self.n_teams
        home_won = home > away
        wins = np.bincount(self.h, home_won, T) + np.bincount(self.a, ~home_won, T)
        played = np.bincount(self.h, minlength=T) + np.bincount(self.a, minlength=T)
        rs = np.bincount(self.h, home, T) + np.bincount(self.a, away, T)
        ra = np.bincount(self.h, away, T) + np.bincount(self.a, home, T)
        wins = wins.astype(np.int64)
        return wins, played - wins, rs.astype(np.int64), ra.astype(np.int64)


def simulate_schedule(schedule, cfg, stream):
    """Per-game (home_runs, away_runs) arrays, in schedule order.

    Consumes the stream exactly as :func:`simulate_season` does, so the same
    stream state gives the games behind that season's lines.
    """
    schedule.validate(cfg)
    return _SeasonKernel(schedule, cfg).play(stream)


def simulate_season(schedule, cfg, stream, iteration=0):
    schedule.validate(cfg)
    kernel = _SeasonKernel(schedule, cfg)
    wins, losses, rs, ra = kernel.run(stream)
    return [
        TeamSeasonLine(iteration, int(t), int(w), int(l), int(s), int(a))
        for t, w, l, s, a in zip(kernel.team_ids, wins, losses, rs, ra)
    ]


def _mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_stream_seed(master_seed, iteration):
    """Seed for iteration ``iteration``: SplitMix64 output at that position.

    ``mix64((master_seed + (iteration + 1) * 0x9E3779B97F4A7C15) mod 2**64)``
    where ``mix64`` is the SplitMix64 finalizer (xor-shift 30, multiply
    0xBF58476D1CE4E5B9, xor-shift 27, multiply 0x94D049BB133111EB, xor-shift
    31, all mod 2**64). The finalizer is a bijection, so distinct iterations
    never share a seed.
    """
    if iteration < 0:
        raise ValueError("iteration must be >= 0")
    return _mix64((int(master_seed) + (int(iteration) + 1) * GOLDEN_GAMMA) & MASK64)


def config_digest(cfg, schedule):
    """SHA-256 over the canonical JSON of the league config and game order."""
    payload = cfg.as_dict()
    payload["schedule"] = [list(g) for g in schedule.games]
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _run_block(cfg, schedule, start, stop, master_seed):
    kernel = _SeasonKernel(schedule, cfg)
    T = kernel.n_teams
    out = np.empty((stop - start, T, 4), dtype=np.int64)
    for j in range(start, stop):
        try:
            out[j - start] = np.column_stack(kernel.run(make_stream(derive_stream_seed(master_seed, j))))
        except SimulationError as exc:
            raise SimulationError(str(exc), iteration=j) from exc
    return start, out


def run_experiment(cfg, schedule, n_iterations, master_seed, workers=1):
    """Simulate ``n_iterations`` seasons and collect every team-season line.

    Rows are ordered by (iteration, team_id). With ``workers > 1`` the
    iterations are split into contiguous blocks across processes; output is
    identical to the single-worker run.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be >= 1")
    schedule.validate(cfg)
    T = len(cfg.teams)
    blocks = np.empty((n_iterations, T, 4), dtype=np.int64)
    if workers <= 1:
        _, blocks[:] = _run_block(cfg, schedule, 0, n_iterations, master_seed)
    else:
        n_chunks = min(n_iterations, workers * 4)
        bounds = np.linspace(0, n_iterations, n_chunks + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_block, cfg, schedule, int(lo), int(hi), master_seed)
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for fut in futures:
                start, out = fut.result()
                blocks[start:start + len(out)] = out
    log.debug("simulated %d seasons of %d games", n_iterations, len(schedule))
    columns = {
        "iteration": np.repeat(np.arange(n_iterations), T),
        "team_id": np.tile(cfg.team_ids, n_iterations),
        "wins": blocks[:, :, 0].ravel(),
        "losses": blocks[:, :, 1].ravel(),
        "rs": blocks[:, :, 2].ravel(),
        "ra": blocks[:, :, 3].ravel(),
    }
    return SimDataset.from_columns(columns, master_seed, config_digest(cfg, schedule))
