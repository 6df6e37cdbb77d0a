"""Least-squares estimation of the two contest success functions.

Both forms become linear in their parameter after taking the log-odds of
win percentage::

    ln(w / (1 - w)) = alpha * ln(rs / ra)     # Tullock form
    ln(w / (1 - w)) = beta * (rs - ra)        # difference form

so each is fitted by OLS through the origin on team-season rows. Fits are
scored with a Gaussian log-likelihood on the transformed scale and compared
by AIC.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .core import DomainError, logistic
from .sim import SimDataset

FORMS = ("tullock", "difference")
DEGENERATE_POLICIES = ("clamp-half-win", "drop")

# Relative residual norm below which a fit counts as exact; AIC is then
# reported as -inf rather than as a number driven by rounding noise.
PERFECT_FIT_RTOL = 1e-12
RANK_RTOL = 1e-10


class EstimationError(ValueError):
    pass


class RankDeficientError(EstimationError):
    def __init__(self, column, name=None):
        label = f"{column} ({name})" if name else str(column)
        super().__init__(f"design matrix is rank deficient at column {label}")
        self.column = column


@dataclass(frozen=True)
class FitOptions:
    form: str = "tullock"
    fixed_effects: bool = False
    degenerate_policy: str = "clamp-half-win"
    intercept: bool = False

    def __post_init__(self):
        if self.form not in FORMS:
            raise ValueError(f"form must be one of {FORMS}, got {self.form!r}")
        if self.degenerate_policy not in DEGENERATE_POLICIES:
            raise ValueError(f"degenerate_policy must be one of {DEGENERATE_POLICIES}")


@dataclass(frozen=True)
class RegressionSample:
    x: tuple
    y: float
    iteration: int
    team_id: int


@dataclass(frozen=True, eq=False)
class Design:
    """Transformed regression data: one row per kept team-season line."""

    X: np.ndarray
    y: np.ndarray
    names: tuple
    iteration: np.ndarray
    team_id: np.ndarray
    win_pct: np.ndarray  # observed, before any degenerate-season clamping

    @property
    def n(self):
        return len(self.y)

    def samples(self):
        return [
            RegressionSample(tuple(x), float(y), int(i), int(t))
            for x, y, i, t in zip(self.X.tolist(), self.y, self.iteration, self.team_id)
        ]


def log_odds(w):
    w = np.asarray(w, dtype=float)
    if np.any((w <= 0) | (w >= 1)) or np.any(~np.isfinite(w)):
        raise DomainError("log-odds needs 0 < w < 1; apply a degenerate-season policy first")
    out = np.log(w / (1.0 - w))
    return float(out) if out.ndim == 0 else out


def _columns(data):
    if isinstance(data, SimDataset):
        return data.columns
    return SimDataset(tuple(data)).columns


def linearize(data, opts):
    """Build the log-odds design for ``opts.form``."""
    cols = _columns(data)
    if len(cols["wins"]) == 0:
        raise EstimationError("no team-season rows to fit")
    wins = cols["wins"].astype(float)
    games = wins + cols["losses"]
    rs = cols["rs"].astype(float)
    ra = cols["ra"].astype(float)
    if np.any(games <= 0):
        raise EstimationError("every row needs wins + losses > 0")
    if np.any(rs <= 0) or np.any(ra <= 0):
        bad = int(np.flatnonzero((rs <= 0) | (ra <= 0))[0])
        raise EstimationError(f"row {bad}: rs and ra must be > 0")

    observed = wins / games
    keep = np.ones(len(wins), dtype=bool)
    degenerate = (wins <= 0) | (wins >= games)
    if np.any(degenerate):
        if opts.degenerate_policy == "drop":
            keep = ~degenerate
            if not keep.any():
                raise EstimationError("every row is a winless or unbeaten season; nothing left to fit")
        else:
            wins = np.where(wins <= 0, 0.5, np.where(wins >= games, games - 0.5, wins))

    y = log_odds(wins[keep] / games[keep])
    if opts.form == "tullock":
        x = np.log(rs[keep] / ra[keep])
        names = ["alpha"]
    else:
        x = rs[keep] - ra[keep]
        names = ["beta"]
    blocks = [x[:, None]]
    if opts.intercept:
        blocks.append(np.ones((len(x), 1)))
        names.append("intercept")
    team_id = cols["team_id"][keep]
    if opts.fixed_effects:
        teams = np.unique(team_id)
        if len(teams) < 2:
            raise EstimationError("fixed effects need at least two distinct teams")
        blocks.append((team_id[:, None] == teams[None, 1:]).astype(float))
        names.extend(f"team_{t}" for t in teams[1:].tolist())
    return Design(
        X=np.hstack(blocks),
        y=y,
        names=tuple(names),
        iteration=cols["iteration"][keep],
        team_id=team_id,
        win_pct=observed[keep],
    )


def linearize_tullock(data, opts=None):
    return linearize(data, replace(opts or FitOptions(), form="tullock"))


def linearize_difference(data, opts=None):
    return linearize(data, replace(opts or FitOptions(), form="difference"))


@dataclass(frozen=True, eq=False)
class OLSResult:
    coefficients: np.ndarray
    rss: float
    standard_errors: np.ndarray
    residuals: np.ndarray


def ols(X, y, names=None):
    """Least squares via Householder QR.

    Standard errors use ``rss / (n - k)`` times the diagonal of the inverse
    Gram matrix; they are NaN when ``n == k``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if k < 1 or n < k:
        raise EstimationError(f"need n >= k >= 1, got n={n}, k={k}")
    if y.shape != (n,):
        raise EstimationError("y length must match the rows of X")
    Q, R = np.linalg.qr(X)
    # |R_jj| is the norm of column j after removing the span of columns < j.
    col_norms = np.linalg.norm(X, axis=0)
    for j in range(k):
        if col_norms[j] == 0 or abs(R[j, j]) <= RANK_RTOL * col_norms[j]:
            raise RankDeficientError(j, names[j] if names else None)
    coef = np.linalg.solve(R, Q.T @ y)
    resid = y - X @ coef
    rss = float(resid @ resid)
    R_inv = np.linalg.inv(R)
    unscaled = np.einsum("ij,ij->i", R_inv, R_inv)
    sigma2 = rss / (n - k) if n > k else math.nan
    return OLSResult(coef, rss, np.sqrt(sigma2 * unscaled), resid)


def gaussian_loglik(rss, n):
    """Maximized Gaussian log-likelihood of a least-squares fit.

    Uses the ML variance ``rss / n``.
    """
    if not rss > 0:
        raise DomainError("log-likelihood is unbounded at rss = 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    return -0.5 * n * (math.log(2 * math.pi) + math.log(rss / n) + 1.0)


def aic(loglik, k):
    return -2.0 * loglik + 2.0 * k


def log_evidence_ratio(aic_a, aic_b):
    """Natural log of the relative likelihood of model ``a`` versus ``b``."""
    if aic_a == aic_b:
        return 0.0
    return (aic_b - aic_a) / 2.0


def evidence_ratio(aic_a, aic_b):
    """``exp((aic_b - aic_a) / 2)``; saturates to 0 or inf instead of raising."""
    z = log_evidence_ratio(aic_a, aic_b)
    if z > 709.0:
        return math.inf
    return math.exp(z)


def decimal_exponent(ln_value):
    """Split ``exp(ln_value)`` into ``(mantissa, exponent)`` base 10.

    Works far beyond the double range, e.g. ``ln_value = -5000``.
    """
    if not math.isfinite(ln_value):
        return (0.0 if ln_value < 0 else math.inf), 0
    log10 = ln_value / math.log(10)
    exponent = math.floor(log10)
    return 10.0 ** (log10 - exponent), exponent


@dataclass(frozen=True)
class FitReport:
    form: str
    coefficients: tuple
    standard_errors: tuple
    names: tuple
    n: int
    k: int
    rss: float
    r2: float
    r2_uncentered: float
    rmse: float
    rmse_win_pct: float
    loglik: float
    aic: float
    perfect_fit: bool = False
    options: dict = field(default_factory=dict)

    @property
    def parameter(self):
        return self.coefficients[0]

    @property
    def parameter_se(self):
        return self.standard_errors[0]

    def predict(self, rs, ra):
        """Fitted CSF win percentage (intercept included, team effects not)."""
        rs = np.asarray(rs, dtype=float)
        ra = np.asarray(ra, dtype=float)
        x = np.log(rs / ra) if self.form == "tullock" else rs - ra
        z = self.parameter * x
        if "intercept" in self.names:
            z = z + self.coefficients[self.names.index("intercept")]
        return logistic(z)

    def as_dict(self):
        d = asdict(self)
        for key in ("coefficients", "standard_errors", "names"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for key in ("coefficients", "standard_errors", "names"):
            d[key] = tuple(d[key])
        return cls(**d)


def fit_model(data, opts=None):
    opts = opts or FitOptions()
    design = linearize(data, opts)
    res = ols(design.X, design.y, design.names)
    y = design.y
    n = design.n
    n_coef = design.X.shape[1]
    tss = float(((y - y.mean()) ** 2).sum())
    yy = float(y @ y)
    rss = res.rss
    perfect = rss <= (PERFECT_FIT_RTOL ** 2) * yy
    if perfect:
        loglik = math.inf
    else:
        loglik = gaussian_loglik(rss, n)
    k = n_coef + 1
    fitted = logistic(design.X @ res.coefficients)
    return FitReport(
        form=opts.form,
        coefficients=tuple(res.coefficients.tolist()),
        standard_errors=tuple(res.standard_errors.tolist()),
        names=design.names,
        n=n,
        k=k,
        rss=rss,
        r2=1.0 - rss / tss if tss > 0 else math.nan,
        r2_uncentered=1.0 - rss / yy if yy > 0 else math.nan,
        rmse=math.sqrt(rss / n),
        rmse_win_pct=float(np.sqrt(np.mean((design.win_pct - fitted) ** 2))),
        loglik=loglik,
        aic=aic(loglik, k),
        perfect_fit=bool(perfect),
        options={
            "fixed_effects": opts.fixed_effects,
            "intercept": opts.intercept,
            "degenerate_policy": opts.degenerate_policy,
        },
    )


@dataclass(frozen=True)
class ComparisonReport:
    tullock: FitReport
    difference: FitReport
    log_evidence_ratio: float
    evidence_ratio: float
    preferred: str

    @property
    def evidence_ratio_sci(self):
        return decimal_exponent(self.log_evidence_ratio)

    @property
    def delta_aic(self):
        """Tullock AIC minus difference-form AIC."""
        return self.tullock.aic - self.difference.aic

    def as_dict(self):
        mantissa, exponent = self.evidence_ratio_sci
        return {
            "tullock": self.tullock.as_dict(),
            "difference": self.difference.as_dict(),
            "log_evidence_ratio": self.log_evidence_ratio,
            "evidence_ratio": self.evidence_ratio,
            "evidence_ratio_mantissa": mantissa,
            "evidence_ratio_exponent": exponent,
            "preferred": self.preferred,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            tullock=FitReport.from_dict(d["tullock"]),
            difference=FitReport.from_dict(d["difference"]),
            log_evidence_ratio=d["log_evidence_ratio"],
            evidence_ratio=d["evidence_ratio"],
            preferred=d["preferred"],
        )


def compare(tullock, difference):
    """Combine two fits of the same rows into a comparison."""
    if tullock.n != difference.n:
        raise EstimationError(f"fits use different rows (n={tullock.n} vs n={difference.n})")
    z = log_evidence_ratio(tullock.aic, difference.aic)
    if math.isnan(z):
        z = 0.0  # both fits exact
    preferred = "tullock" if not difference.aic < tullock.aic else "difference"
    return ComparisonReport(
        tullock=tullock,
        difference=difference,
        log_evidence_ratio=z,
        evidence_ratio=math.exp(z) if z <= 709.0 else math.inf,
        preferred=preferred,
    )


def compare_models(data, opts=None):
    opts = opts or FitOptions()
    return compare(
        fit_model(data, replace(opts, form="tullock")),
        fit_model(data, replace(opts, form="difference")),
    )
