"""Command-line front end.

    csfsim simulate --iterations N --seed S --out dataset.csv [--teams teams.csv]
    csfsim fit      --data dataset.csv --model tullock --out fit.json
    csfsim compare  --data dataset.csv [--format text|json|csv] [--plot fig.svg]
    csfsim predict  --model difference --param 0.003 --rs 750 --ra 650

Exit status: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .core import DomainError, expected_wins, james_win_pct, luck, win_pct
from .estimate import EstimationError, FitOptions, compare_models, fit_model
from .io import (
    DataError,
    ExperimentManifest,
    bundled_teams,
    load_schedule,
    load_team_params,
    read_dataset,
    write_dataset,
)
from .report import FORMATS, fit_to_json, render_comparison, render_fit_text
from .sim import (
    DEFAULT_DISPERSION,
    DEFAULT_EXTRA_INNING_DIVISOR,
    DEFAULT_GAMES,
    DEFAULT_LEAGUE_MEAN,
    LeagueConfig,
    SimulationError,
    build_round_robin_schedule,
    run_experiment,
)

log = logging.getLogger("csfsim")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def build_parser():
    p = _Parser(prog="csfsim", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate N seasons and write the dataset CSV")
    s.add_argument("--teams", help="teams CSV (default: bundled 30-team synthetic fixture)")
    s.add_argument("--iterations", type=_positive_int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--schedule", help="matchup CSV (home_id,away_id,count); default round robin")
    s.add_argument("--games", type=_positive_int, default=DEFAULT_GAMES, help="games per team for the round robin")
    s.add_argument("--dispersion", type=_positive_float, default=DEFAULT_DISPERSION)
    s.add_argument("--league-mean", type=_positive_float, default=DEFAULT_LEAGUE_MEAN)
    s.add_argument("--extra-inning-divisor", type=_positive_float, default=DEFAULT_EXTRA_INNING_DIVISOR)
    s.add_argument("--workers", type=_positive_int, default=1)

    def fit_flags(sp):
        sp.add_argument("--data", required=True)
        sp.add_argument("--fixed-effects", action="store_true")
        sp.add_argument("--intercept", action="store_true")
        sp.add_argument("--drop-degenerate", action="store_true", help="drop 0-win/0-loss seasons instead of clamping")

    f = sub.add_parser("fit", help="fit one CSF and write the report as JSON")
    fit_flags(f)
    f.add_argument("--model", choices=("tullock", "difference"), required=True)
    f.add_argument("--out", required=True)

    c = sub.add_parser("compare", help="fit both CSFs and compare them by AIC")
    fit_flags(c)
    c.add_argument("--format", choices=FORMATS, default="text")
    c.add_argument("--out", help="write the report here instead of stdout")
    c.add_argument("--plot", help="SVG scatter of observed vs fitted win percentage (preferred model)")

    q = sub.add_parser("predict", help="evaluate a CSF at given run totals")
    q.add_argument("--model", choices=("tullock", "difference", "james"), required=True)
    q.add_argument("--param", type=_positive_float, help="alpha or beta (not used by james)")
    q.add_argument("--rs", type=_positive_float, required=True)
    q.add_argument("--ra", type=_positive_float, required=True)
    q.add_argument("--games", type=_positive_int, help="also print expected wins over this many games")
    q.add_argument("--wins", type=float, help="actual wins; with --games prints luck")
    return p


def _fit_options(args, form="tullock"):
    return FitOptions(
        form=form,
        fixed_effects=args.fixed_effects,
        intercept=args.intercept,
        degenerate_policy="drop" if args.drop_degenerate else "clamp-half-win",
    )


def cmd_simulate(args):
    teams = load_team_params(args.teams) if args.teams else bundled_teams()
    matchups = None
    if args.schedule:
        schedule, matchups = load_schedule(args.schedule)
        played = set(schedule.games_played().values())
        if len(played) != 1:
            raise DataError(f"every team must play the same number of games, got counts {sorted(played)}", args.schedule)
        games = played.pop()
    else:
        games = args.games
    try:
        cfg = LeagueConfig(
            teams=tuple(teams),
            games_per_team=games,
            league_mean_rpg=args.league_mean,
            dispersion=args.dispersion,
            extra_inning_mean_divisor=args.extra_inning_divisor,
        )
    except ValueError as exc:
        raise DataError(str(exc), args.teams or "bundled teams") from None
    if matchups is None:
        schedule = build_round_robin_schedule(len(cfg.teams), games, cfg.team_ids)
    else:
        try:
            schedule.validate(cfg)
        except ValueError as exc:
            raise DataError(str(exc), args.schedule) from None
    data = run_experiment(cfg, schedule, args.iterations, args.seed, workers=args.workers)
    manifest = ExperimentManifest.build(cfg, schedule, args.iterations, args.seed, matchups, args.schedule)
    write_dataset(args.out, data, manifest)
    print(f"wrote {len(data)} team-season rows ({args.iterations} iterations x {len(cfg.teams)} teams) to {args.out}")
    return EXIT_OK


def cmd_fit(args):
    data = read_dataset(args.data)
    fit = fit_model(data, _fit_options(args, args.model))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(fit_to_json(fit))
    sys.stdout.write(render_fit_text(fit))
    return EXIT_OK


def cmd_compare(args):
    data = read_dataset(args.data)
    report = compare_models(data, _fit_options(args))
    doc = render_comparison(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(doc)
    else:
        sys.stdout.write(doc)
    if args.plot:
        from .plotting import render_scatter_svg

        render_scatter_svg(data, getattr(report, report.preferred), args.plot)
    return EXIT_OK


def cmd_predict(args):
    if args.model == "james":
        p = james_win_pct(args.rs, args.ra)
    else:
        if args.param is None:
            raise UsageError(f"predict: --param is required for --model {args.model}")
        p = win_pct(args.model, args.rs, args.ra, args.param)
    print(f"{p:.6f}")
    if args.games:
        ew = expected_wins(p, args.games)
        print(f"expected wins: {ew:.2f}")
        if args.wins is not None:
            print(f"luck: {luck(args.wins, ew):+.2f}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "compare": cmd_compare, "predict": cmd_predict}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DataError, EstimationError, DomainError, SimulationError) as exc:
        print(f"csfsim: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"csfsim: error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
