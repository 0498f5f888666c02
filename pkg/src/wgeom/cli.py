"""Command-line front end.

    wgeom pmf --q 0.5 --alpha 1 --max-y 10
    wgeom fit --method mle --dataset auto_claims --format json
    wgeom sample --q 0.5 --alpha 1 --n 1000 --seed 7 --sampler conv
    wgeom gof --dataset hospitalizations
    wgeom table --dataset auto_claims
    wgeom datasets [--name auto_claims]

Count files are CSV rows ``value,count`` with an optional header; a final
row ``k+,count`` or ``>=k,count`` marks an open tail.  Exit status is 0 on
success, 1 on usage or input-format errors, 2 on numerical/domain errors.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import sys
from typing import Optional, Sequence

from .core import WGParams, cdf_survival, pmf, reliability
from .errors import DataFormatError, WGError
from .estimate import FreqTable, fit
from .gof import builtin_datasets, cell_labels, expected_frequencies, goodness_of_fit
from .sampling import DEFAULT_SEED, Method, SamplerState, sample

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

SAMPLERS = {
    "conv": Method.CONVOLUTION,
    "cond": Method.CONDITIONAL,
    "hidden": Method.HIDDEN_TRUNCATION,
    "minconv": Method.MIN_CONVOLUTION,
    "invcdf": Method.INVERSE_CDF,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def read_freq_table(text: str) -> FreqTable:
    """Parse ``value,count`` rows; see the module docstring for the format."""
    rows = []
    tail = False
    seen_data = False
    for lineno, rec in enumerate(csv.reader(io.StringIO(text)), start=1):
        fields = [f.strip() for f in rec]
        if not fields or all(not f for f in fields) or fields[0].startswith("#"):
            continue
        if len(fields) != 2:
            raise DataFormatError(f"expected 2 fields, got {len(fields)}", line=lineno)
        raw_value, raw_count = fields
        is_tail = raw_value.endswith("+") or raw_value.startswith(">=")
        value_txt = raw_value.rstrip("+").removeprefix(">=").strip()
        try:
            value = int(value_txt)
            count = int(raw_count)
        except ValueError:
            if not seen_data and not rows:
                seen_data = True  # header line
                continue
            raise DataFormatError(f"cannot parse {raw_value!r},{raw_count!r} as integers", line=lineno)
        seen_data = True
        if tail:
            raise DataFormatError("open tail row must be the last row", line=lineno)
        if value < 0 or count < 0:
            raise DataFormatError("values and counts must be non-negative", line=lineno)
        if rows and value <= rows[-1][0]:
            raise DataFormatError("values must be strictly increasing", line=lineno)
        rows.append((value, count))
        tail = is_tail
    if not rows:
        raise DataFormatError("no data rows")
    return FreqTable(tuple(rows), tail_open=tail)


def freq_table_csv(data: FreqTable) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["value", "count"])
    for label, (_, c) in zip(cell_labels(data), data.rows):
        w.writerow([label, c])
    return out.getvalue()


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return f"{x:.6g}"


def _text_table(header, rows) -> str:
    cells = [list(map(str, header))] + [[_fmt(v) if not isinstance(v, str) else v for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _csv_table(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else repr(v) if isinstance(v, float) else v for v in r])
    return out.getvalue()


def _emit(fmt, header, rows, payload) -> str:
    if fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "csv":
        return _csv_table(header, rows)
    return _text_table(header, rows)


def _load_data(args, stdin) -> FreqTable:
    if getattr(args, "dataset", None) and getattr(args, "file", None):
        raise UsageError("give either FILE or --dataset, not both")
    if getattr(args, "dataset", None):
        sets = builtin_datasets()
        if args.dataset not in sets:
            raise UsageError(f"unknown dataset {args.dataset!r}; choose from {', '.join(sets)}")
        return sets[args.dataset]
    if not getattr(args, "file", None):
        raise UsageError("a count FILE or --dataset is required")
    if args.file == "-":
        text = stdin.read() if stdin is not None else sys.stdin.read()
    else:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from exc
    return read_freq_table(text)


def _params(args) -> WGParams:
    if args.q is None or args.alpha is None:
        raise UsageError("--q and --alpha are required")
    return WGParams(args.q, args.alpha)


def _cmd_pmf(args, stdin):
    p = _params(args)
    if args.max_y < 0:
        raise UsageError("--max-y must be non-negative")
    rows = []
    for y in range(args.max_y + 1):
        cdf, surv = cdf_survival(p, y)
        hz, _, _ = reliability(p, y)
        rows.append([y, pmf(p, y), cdf, surv, hz])
    header = ["y", "pmf", "cdf", "survival", "hazard"]
    payload = {"q": p.q, "alpha": p.alpha, "rows": [dict(zip(header, r)) for r in rows]}
    return _emit(args.format, header, rows, payload)


def _init_params(args):
    if args.init_q is None and args.init_alpha is None:
        return None
    if args.init_q is None or args.init_alpha is None:
        raise UsageError("--init-q and --init-alpha go together")
    return WGParams(args.init_q, args.init_alpha)


def _cmd_fit(args, stdin):
    data = _load_data(args, stdin)
    res = fit(data, args.method, _init_params(args))
    payload = res.to_dict()
    payload["n"] = data.n
    header = ["quantity", "value"]
    rows = [
        ["method", res.method],
        ["n", data.n],
        ["q", res.params.q],
        ["alpha", res.params.alpha],
        ["se_q", payload["se_q"]],
        ["se_alpha", payload["se_alpha"]],
        ["loglik", res.loglik],
    ]
    if res.covariance is not None:
        c = res.covariance
        rows += [["cov_qq", float(c[0, 0])], ["cov_qalpha", float(c[0, 1])], ["cov_alphaalpha", float(c[1, 1])]]
    if res.method == "MLE":
        rows += [["iterations", res.iterations], ["converged", str(res.converged).lower()]]
    return _emit(args.format, header, rows, payload)


def _cmd_sample(args, stdin):
    p = _params(args)
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    state = SamplerState(seed=args.seed, method=SAMPLERS[args.sampler], n_min=args.n_min)
    draws = sample(state, p, args.n)
    return "".join(f"{int(v)}\n" for v in draws)


def _gof_params(args, data):
    if args.q is not None or args.alpha is not None:
        return _params(args), None
    res = fit(data, args.method)
    return res.params, res


def _cmd_gof(args, stdin):
    data = _load_data(args, stdin)
    p, res = _gof_params(args, data)
    rep = goodness_of_fit(p, data, n_params=2, min_expected=args.min_expected)
    payload = rep.to_dict()
    payload.update({"q": p.q, "alpha": p.alpha})
    if args.format == "json":
        return _emit("json", None, None, payload)
    rows = [[lab, o, e] for lab, o, e in rep.cells]
    body = _emit(args.format, ["cell", "observed", "expected"], rows, payload)
    summary = [
        ["q", p.q],
        ["alpha", p.alpha],
        ["chi_square", rep.statistic],
        ["df_paper", rep.df_paper],
        ["p_paper", rep.p_paper],
        ["df_standard", rep.df_standard],
        ["p_standard", rep.p_standard],
    ]
    return body + "\n" + _emit(args.format, ["quantity", "value"], summary, None)


def _cmd_table(args, stdin):
    data = _load_data(args, stdin)
    res = fit(data, "mle")
    expected = expected_frequencies(res.params, data)
    rep = goodness_of_fit(res.params, data)
    labels = cell_labels(data)
    rows = [[lab, int(c), float(e)] for lab, c, e in zip(labels, data.counts, expected)]
    rows.append(["total", data.n, float(expected.sum())])
    payload = {
        "rows": [{"count": r[0], "observed": r[1], "expected": r[2]} for r in rows[:-1]],
        "n": data.n,
        "estimates": {"q": res.params.q, "alpha": res.params.alpha},
        "se": {"q": res.se[0], "alpha": res.se[1]} if res.se else None,
        "chi_square": rep.statistic,
        "df_paper": rep.df_paper,
        "p_paper": rep.p_paper,
        "df_standard": rep.df_standard,
        "p_standard": rep.p_standard,
    }
    if args.format == "json":
        return _emit("json", None, None, payload)
    body = _emit(args.format, ["count", "observed", "expected_WG"], rows, payload)
    se = res.se or (None, None)
    foot = [
        ["estimates (q, alpha)", f"({_fmt(res.params.q)}, {_fmt(res.params.alpha)})"],
        ["S.E. (q, alpha)", f"({_fmt(se[0])}, {_fmt(se[1])})"],
        ["(df, chi2) cells-params", f"({rep.df_paper}, {_fmt(rep.statistic)})"],
        ["p-value cells-params", _fmt(rep.p_paper)],
        ["(df, chi2) cells-1-params", f"({rep.df_standard}, {_fmt(rep.statistic)})"],
        ["p-value cells-1-params", _fmt(rep.p_standard)],
    ]
    return body + "\n" + _emit(args.format, ["quantity", "value"], foot, None)


def _cmd_datasets(args, stdin):
    sets = builtin_datasets()
    if args.name:
        if args.name not in sets:
            raise UsageError(f"unknown dataset {args.name!r}; choose from {', '.join(sets)}")
        return freq_table_csv(sets[args.name])
    return "".join(f"{name}\tn={d.n}\n" for name, d in sets.items())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wgeom", description="Weighted geometric WG(alpha, q) toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add_params(sp, required):
        sp.add_argument("--q", type=float, required=required)
        sp.add_argument("--alpha", type=float, required=required)

    def add_format(sp):
        sp.add_argument("--format", choices=["text", "json", "csv"], default="text")

    def add_data(sp):
        sp.add_argument("file", nargs="?", help="count CSV, or - for stdin")
        sp.add_argument("--dataset", help="built-in dataset name")

    sp = sub.add_parser("pmf", help="tabulate pmf, cdf, survival, hazard")
    add_params(sp, True)
    sp.add_argument("--max-y", type=int, default=10)
    add_format(sp)
    sp.set_defaults(func=_cmd_pmf)

    sp = sub.add_parser("fit", help="estimate (q, alpha)")
    add_data(sp)
    sp.add_argument("--method", choices=["mm", "mp", "mle"], default="mle")
    sp.add_argument("--init-q", type=float)
    sp.add_argument("--init-alpha", type=float)
    add_format(sp)
    sp.set_defaults(func=_cmd_fit)

    sp = sub.add_parser("sample", help="draw random variates, one per line")
    add_params(sp, True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--sampler", choices=list(SAMPLERS), default="conv")
    sp.add_argument("--n-min", type=int, default=4)
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("gof", help="chi-square goodness of fit")
    add_data(sp)
    add_params(sp, False)
    sp.add_argument("--method", choices=["mm", "mp", "mle"], default="mle")
    sp.add_argument("--min-expected", type=float, default=0.0)
    add_format(sp)
    sp.set_defaults(func=_cmd_gof)

    sp = sub.add_parser("table", help="observed vs expected table with MLE fit")
    add_data(sp)
    add_format(sp)
    sp.set_defaults(func=_cmd_table)

    sp = sub.add_parser("datasets", help="list built-in datasets or export one as CSV")
    sp.add_argument("--name")
    sp.set_defaults(func=_cmd_datasets)
    return parser


def run(argv: Sequence[str], stdin=None):
    """Execute one command; returns ``(exit_code, stdout_text, stderr_text)``."""
    parser = build_parser()
    out = io.StringIO()
    try:
        with contextlib.redirect_stdout(out):
            args = parser.parse_args(list(argv))
        text = args.func(args, stdin)
    except SystemExit as exc:  # --help
        return (EXIT_OK if not exc.code else EXIT_USAGE), out.getvalue(), ""
    except UsageError as exc:
        return EXIT_USAGE, "", f"{exc}\n"
    except DataFormatError as exc:
        return EXIT_USAGE, "", f"wgeom: input error: {exc}\n"
    except (WGError, ArithmeticError, ValueError) as exc:
        return EXIT_NUMERIC, "", f"wgeom: {exc}\n"
    return EXIT_OK, text, ""


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, text, err = run(sys.argv[1:] if argv is None else argv, sys.stdin)
    sys.stdout.write(text)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
