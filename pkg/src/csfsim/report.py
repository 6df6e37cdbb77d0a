"""Render fit and comparison reports as text, JSON or CSV.

JSON and CSV keep full double precision (``repr`` floats); JSON is canonical,
so ``render(parse(render(r)))`` reproduces the same bytes. Non-finite values
(an exact fit's ``-inf`` AIC, NaN standard errors) use JavaScript-style
``Infinity``/``NaN`` tokens as Python's json module does.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .estimate import ComparisonReport, FitReport

FORMATS = ("text", "json", "csv")
LABELS = {"tullock": "Tullock-form", "difference": "Difference-form"}


def _canonical_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def fit_to_json(report):
    return _canonical_json(report.as_dict())


def fit_from_json(text):
    return FitReport.from_dict(json.loads(text))


def comparison_from_json(text):
    return ComparisonReport.from_dict(json.loads(text))


def _num(v, spec):
    if isinstance(v, float) and not math.isfinite(v):
        return {math.inf: "inf", -math.inf: "-inf"}.get(v, "nan")
    return format(v, spec)


def format_evidence_ratio(ln_value, digits=2):
    """``'7.60e-100'`` style string for ``exp(ln_value)``; never underflows."""
    if ln_value == -math.inf:
        return "0"
    if ln_value == math.inf:
        return "inf"
    log10 = ln_value / math.log(10)
    exponent = math.floor(log10)
    mantissa = round(10.0 ** (log10 - exponent), digits)
    if mantissa >= 10.0:
        mantissa, exponent = mantissa / 10.0, exponent + 1
    return f"{mantissa:.{digits}f}e{exponent:+d}".replace("e+", "e")


def _param_cell(fit):
    est = _num(fit.parameter, ".4g")
    se = _num(fit.parameter_se, ".2g")
    return f"{est} ({se})"


def render_fit_text(fit):
    label = LABELS[fit.form]
    lines = [f"{label} CSF fit ({fit.names[0]})"]
    rows = [
        ("Estimated parameter", _param_cell(fit)),
        ("Number of observations", f"{fit.n:,}"),
        ("R^2", _num(fit.r2, ".3f")),
        ("AIC", _num(fit.aic, ",.2f")),
        ("Root mean squared error", _num(fit.rmse, ".3f")),
    ]
    lines += [f"  {name:<26}{value}" for name, value in rows]
    return "\n".join(lines) + "\n"


def render_comparison_text(report):
    t, d = report.tullock, report.difference
    rows = [
        ("Estimated parameter", _param_cell(t), _param_cell(d)),
        ("Number of observations", f"{t.n:,}", f"{d.n:,}"),
        ("R^2", _num(t.r2, ".3f"), _num(d.r2, ".3f")),
        ("Akaike Information Criterion", _num(t.aic, ",.2f"), _num(d.aic, ",.2f")),
        ("Root mean squared error", _num(t.rmse, ".3f"), _num(d.rmse, ".3f")),
    ]
    w0 = max(len(r[0]) for r in rows) + 2
    w1 = max(len(LABELS["tullock"]), *(len(r[1]) for r in rows)) + 3
    out = ["Expected win percentage models: Tullock-form vs difference-form CSF", ""]
    out.append(f"{'':<{w0}}{LABELS['tullock']:<{w1}}{LABELS['difference']}")
    out += [f"{a:<{w0}}{b:<{w1}}{c}" for a, b, c in rows]
    mantissa, exponent = report.evidence_ratio_sci
    out += [
        "",
        f"Evidence ratio P_T/P_D = exp({_num(report.log_evidence_ratio, '.2f')}) "
        f"= {format_evidence_ratio(report.log_evidence_ratio)} "
        f"(mantissa {mantissa:.2f}, exponent {exponent})",
        f"Preferred model (lower AIC): {report.preferred}",
    ]
    if t.perfect_fit or d.perfect_fit:
        exact = [f.form for f in (t, d) if f.perfect_fit]
        out.append(f"Exact fit (rss = 0, AIC = -inf): {', '.join(exact)}")
    return "\n".join(out) + "\n"


def _csv_rows(report):
    for form in ("tullock", "difference"):
        d = getattr(report, form).as_dict()
        for key, value in d.items():
            if key in ("coefficients", "standard_errors", "names", "options"):
                continue
            yield form, key, value
        for name, coef, se in zip(d["names"], d["coefficients"], d["standard_errors"]):
            yield form, f"coef.{name}", coef
            yield form, f"se.{name}", se
        for key, value in d["options"].items():
            yield form, f"option.{key}", value
    c = report.as_dict()
    for key in (
        "log_evidence_ratio",
        "evidence_ratio",
        "evidence_ratio_mantissa",
        "evidence_ratio_exponent",
        "preferred",
    ):
        yield "comparison", key, c[key]


def _cell(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_comparison(report, fmt="text"):
    if fmt == "text":
        return render_comparison_text(report)
    if fmt == "json":
        return _canonical_json(report.as_dict())
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "field", "value"])
        w.writerows((m, k, _cell(v)) for m, k, v in _csv_rows(report))
        return buf.getvalue()
    raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
