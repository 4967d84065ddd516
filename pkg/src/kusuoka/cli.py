"""Command-line front end.

One subcommand per capability, shared flags for system source, backend,
budget, seed, and output.  Exit codes: 0 success, 2 validation failure,
3 budget exceeded, 64 unknown subcommand, 65 malformed configuration or
unreadable input.  Every number printed from the exact backend is a
radical string; floats are printed with 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import gasket, matsys, measure, procspace, spectral, symbolic, systems
from .exactnum import Radical, format_exact, parse_exact
from .linalg import EXACT, FLOAT
from .measure import SystemInvalidError
from .symbolic import BudgetError

SUBCOMMANDS = (
    "validate",
    "theta1",
    "ck",
    "theta2",
    "measure",
    "gfun",
    "sample",
    "correlate",
    "mixing-bound",
    "gasket",
    "renormalize",
    "dilation",
    "qdecay",
    "report",
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_UNKNOWN = 64
EXIT_CONFIG = 65


@dataclass(frozen=True)
class RunConfig:
    """Shared run options, resolved from flags."""

    builtin: str | None
    infile: str | None
    backend: str
    out: str | None
    fmt: str
    seed: int
    budget_k: int


def _fmt_float(x: float) -> str:
    return f"{float(x):.17g}"


def _fmt_scalar(x) -> str:
    if isinstance(x, Radical):
        return format_exact(x)
    return _fmt_float(x)


def _threads() -> int:
    raw = os.environ.get("KUSUOKA_THREADS")
    if raw is None:
        return 1
    try:
        val = int(raw)
        if val < 1:
            raise ValueError
    except ValueError:
        print(f"warning: ignoring KUSUOKA_THREADS={raw!r} (need a positive integer)", file=sys.stderr)
        return 1
    return val


def _load_system(cfg: RunConfig) -> matsys.MatrixSystem:
    if cfg.builtin is not None and cfg.infile is not None:
        raise ValueError("give either --builtin or --in, not both")
    if cfg.builtin is not None:
        return systems.get_builtin(cfg.builtin, cfg.backend)
    if cfg.infile is not None:
        with open(cfg.infile, encoding="utf-8") as fh:
            data = json.load(fh)
        sys_ = matsys.system_from_json(data)
        if cfg.backend == FLOAT and sys_.backend == EXACT:
            sys_ = matsys.to_float_system(sys_)
        elif cfg.backend == EXACT and sys_.backend == FLOAT:
            raise ValueError("file holds a float system; it cannot be promoted to exact")
        return sys_
    raise ValueError("no system given; pass --builtin NAME or --in FILE")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        print(text)


def _json_dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _budget_for(cfg: RunConfig, system: matsys.MatrixSystem) -> int:
    if cfg.budget_k:
        return system.n_symbols ** cfg.budget_k
    return symbolic.DEFAULT_BUDGET


# -- subcommand bodies --------------------------------------------------------


def _cmd_validate(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    report = matsys.validate(sys_, args.tol)
    if cfg.fmt == "json":
        _emit(cfg, _json_dump({"ok": report.ok, "checks": report.lines()}))
    else:
        _emit(cfg, "\n".join(report.lines() + [f"overall: {'pass' if report.ok else 'FAIL'}"]))
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_theta1(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    res = spectral.theta1(sys_)
    print(res.describe())
    if cfg.out:
        body = {
            "value": _fmt_float(res.value),
            "exact": format_exact(res.exact) if res.exact is not None else None,
            "irreducible": res.irreducible,
            "parts": {p: _fmt_float(v) for p, v in res.part_radius.items()},
        }
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(_json_dump(body) + "\n")
    return EXIT_OK


def _cmd_ck(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    res = spectral.c_k(sys_, args.k, _budget_for(cfg, sys_))
    if not res.applicable:
        raise ValueError("c_k is undefined: no trace-free symmetric directions (dim 1)")
    shown = format_exact(res.exact) if res.exact is not None else _fmt_float(res.value)
    _emit(cfg, f"c_{args.k} = {shown}")
    return EXIT_OK


def _cmd_theta2(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    res = spectral.theta2(sys_, args.kmax, _budget_for(cfg, sys_))
    if not res.applicable:
        raise ValueError("theta2 is undefined: c_1 = 0 for this system")
    lemma = format_exact(res.lemma_exact) if res.lemma_exact is not None else _fmt_float(res.lemma_value)
    thm = format_exact(res.thm_exact) if res.thm_exact is not None else _fmt_float(res.thm_value)
    lines = [f"theta2_lemma = {lemma}", f"theta2_theorem = {thm}"]
    if not res.irreducibility_ok:
        lines.append("warning: some c_k vanished; rates may be vacuous")
    _emit(cfg, "\n".join(lines))
    return EXIT_OK


def _cmd_measure(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    m = measure.kusuoka_measure(sys_)
    budget = _budget_for(cfg, sys_)
    masses = m.level_nu(args.depth, budget)
    rows = ["word,nu"]
    for i, massval in enumerate(masses):
        w = symbolic.index_word(i, args.depth, sys_.n_symbols)
        rows.append(f"{symbolic.format_word(w, sys_.alphabet)},{_fmt_scalar(massval)}")
    _emit(cfg, "\n".join(rows))
    return EXIT_OK


def _cmd_gfun(cfg: RunConfig, args) -> int:
    if args.depth < 1:
        raise ValueError("gfun needs --depth >= 1")
    sys_ = _load_system(cfg)
    m = measure.kusuoka_measure(sys_)
    budget = _budget_for(cfg, sys_)
    symbolic.check_budget(sys_.n_symbols, args.depth, budget)
    rows = ["prefix,g"]
    for i in range(sys_.n_symbols**args.depth):
        w = symbolic.index_word(i, args.depth, sys_.n_symbols)
        rows.append(f"{symbolic.format_word(w, sys_.alphabet)},{_fmt_scalar(measure.g_approx(m, w))}")
    _emit(cfg, "\n".join(rows))
    return EXIT_OK


def _cmd_sample(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    m = measure.kusuoka_measure(sys_)
    words = measure.sample_many(m, args.length, args.count, cfg.seed, _budget_for(cfg, sys_))
    _emit(cfg, "\n".join(symbolic.format_word(w, sys_.alphabet) for w in words))
    return EXIT_OK


def _cmd_correlate(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    m = measure.kusuoka_measure(sys_)
    alpha = symbolic.parse_word(args.alpha, sys_.alphabet)
    beta = symbolic.parse_word(args.beta, sys_.alphabet)
    t1 = spectral.theta1(sys_)
    rows = ["n,alpha,beta,gap,bound"]
    for n in range(args.nmax + 1):
        gap = measure.correlation_gap(m, alpha, beta, n)
        if sys_.backend == EXACT and t1.exact is not None:
            bound = Radical(2) * t1.exact**n
        else:
            bound = 2.0 * t1.value**n
        rows.append(f"{n},{args.alpha},{args.beta},{_fmt_scalar(gap)},{_fmt_scalar(bound)}")
    _emit(cfg, "\n".join(rows))
    return EXIT_OK


def _cmd_mixing_bound(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    m = measure.kusuoka_measure(sys_)
    table = measure.mixing_bound_check(m, args.k, args.nmax, _budget_for(cfg, sys_))
    rows = ["n,max_gap,bound,gap_ok,pointwise_max,pointwise_bound,pointwise_ok"]
    for r in table:
        rows.append(
            f"{r.n},{_fmt_scalar(r.max_gap)},{_fmt_scalar(r.gap_bound)},{r.gap_ok},"
            f"{_fmt_scalar(r.pointwise_max)},{_fmt_scalar(r.pointwise_bound)},{r.pointwise_ok}"
        )
    _emit(cfg, "\n".join(rows))
    return EXIT_OK


def _cmd_gasket(cfg: RunConfig, args) -> int:
    sys_ = gasket.generate_system(args.n, cfg.backend)
    body = _json_dump(matsys.system_to_json(sys_))
    _emit(cfg, body)
    return EXIT_OK


def _cmd_renormalize(cfg: RunConfig, args) -> int:
    if cfg.infile is None:
        raise ValueError("renormalize needs --in FILE with raw maps")
    with open(cfg.infile, encoding="utf-8") as fh:
        data = json.load(fh)
    raw = data["maps"] if isinstance(data, dict) else data
    if isinstance(raw, dict):
        alphabet = sorted(raw)
        mats = [raw[k] for k in alphabet]
    else:
        alphabet = None
        mats = raw
    parsed = []
    for mat in mats:
        if cfg.backend == EXACT:
            parsed.append([[parse_exact(x) if isinstance(x, str) else Radical(Fraction(str(x))) for x in row] for row in mat])
        else:
            parsed.append([[float(x) if not isinstance(x, str) else float(parse_exact(x)) for x in row] for row in mat])
    sys_ = spectral.renormalize(parsed, backend=cfg.backend, alphabet=alphabet)
    _emit(cfg, _json_dump(matsys.system_to_json(sys_)))
    return EXIT_OK


def _cmd_dilation(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    m = measure.kusuoka_measure(sys_)
    if args.f:
        with open(args.f, encoding="utf-8") as fh:
            f = symbolic.cylinder_from_json(json.load(fh), sys_)
    else:
        f = symbolic.indicator(sys_, (0,))
    res = procspace.dilation_check(m, f, args.k, args.level, _budget_for(cfg, sys_))
    _emit(cfg, f"residual = {_fmt_scalar(res)}")
    return EXIT_OK


def _cmd_qdecay(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    table = procspace.q_decay_check(
        sys_, args.k, args.jmax, args.trials, cfg.seed,
        workers=_threads(), budget=_budget_for(cfg, sys_),
    )
    rows = ["j,max_ratio,bound,ok"]
    for r in table:
        rows.append(f"{r.j},{_fmt_float(r.max_ratio)},{_fmt_float(r.bound)},{r.ok}")
    _emit(cfg, "\n".join(rows))
    return EXIT_OK


def _cmd_report(cfg: RunConfig, args) -> int:
    sys_ = _load_system(cfg)
    budget = _budget_for(cfg, sys_)
    report = matsys.validate(sys_)
    if not report.ok:
        raise SystemInvalidError(report)
    m = measure.kusuoka_measure(sys_, check=False)

    t1 = spectral.theta1(sys_)
    body: dict = {
        "system": cfg.builtin or cfg.infile,
        "backend": sys_.backend,
        "seed": cfg.seed,
        "valid": True,
        "theta1": format_exact(t1.exact) if t1.exact is not None else _fmt_float(t1.value),
        "theta1_float": _fmt_float(t1.value),
        "theta1_irreducible": t1.irreducible,
        "theta1_parts": {p: _fmt_float(v) for p, v in t1.part_radius.items()},
    }
    if sys_.symmetric:
        body["theta1_schatten"] = {
            str(p): _fmt_scalar(spectral.theta1_schatten(sys_, p, trials=64, seed=cfg.seed))
            for p in (1, 2, "inf")
        }
    if sys_.dim > 1:
        cks = {}
        for k in (1, 2):
            res = spectral.c_k(sys_, k, budget)
            if res.applicable:
                cks[str(k)] = format_exact(res.exact) if res.exact is not None else _fmt_float(res.value)
        body["c"] = cks
        t2 = spectral.theta2(sys_, 2, budget)
        if t2.applicable:
            body["theta2_lemma"] = (
                format_exact(t2.lemma_exact) if t2.lemma_exact is not None else _fmt_float(t2.lemma_value)
            )
            body["theta2_theorem"] = (
                format_exact(t2.thm_exact) if t2.thm_exact is not None else _fmt_float(t2.thm_value)
            )

    for depth in (1, 2):
        masses = m.level_nu(depth, budget)
        body[f"nu_depth{depth}"] = {
            symbolic.format_word(symbolic.index_word(i, depth, sys_.n_symbols), sys_.alphabet): _fmt_scalar(x)
            for i, x in enumerate(masses)
        }
    mix = measure.mixing_bound_check(m, 1, 4, budget)
    body["mixing_k1"] = [
        {
            "n": r.n,
            "max_gap": _fmt_scalar(r.max_gap),
            "bound": _fmt_scalar(r.gap_bound),
            "ok": bool(r.gap_ok and r.pointwise_ok),
        }
        for r in mix
    ]
    body["samples_len5"] = [
        symbolic.format_word(w, sys_.alphabet) for w in measure.sample_many(m, 5, 5, cfg.seed, budget)
    ]
    _emit(cfg, _json_dump(body))
    return EXIT_OK


_HANDLERS = {
    "validate": _cmd_validate,
    "theta1": _cmd_theta1,
    "ck": _cmd_ck,
    "theta2": _cmd_theta2,
    "measure": _cmd_measure,
    "gfun": _cmd_gfun,
    "sample": _cmd_sample,
    "correlate": _cmd_correlate,
    "mixing-bound": _cmd_mixing_bound,
    "gasket": _cmd_gasket,
    "renormalize": _cmd_renormalize,
    "dilation": _cmd_dilation,
    "qdecay": _cmd_qdecay,
    "report": _cmd_report,
}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="kusuoka", description="Kusuoka measure toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, system_source: bool = True):
        if system_source:
            p.add_argument("--builtin", help="builtin system name (sg, sg3, sg4, sg5, bernoulli:p1,p2,...)")
            p.add_argument("--in", dest="infile", help="system JSON file")
        p.add_argument("--backend", choices=(EXACT, FLOAT), default=EXACT)
        p.add_argument("--out", help="write output to this file instead of stdout")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="csv")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget-k", dest="budget_k", type=int, default=0,
                       help="cap word enumeration at |S|^K words")

    p = sub.add_parser("validate", help="check the two fixed-point identities")
    common(p)
    p.add_argument("--tol", type=float, default=1e-12)

    p = sub.add_parser("theta1", help="certified contraction rate of the averaging map")
    common(p)

    p = sub.add_parser("ck", help="level-k irreducibility constant")
    common(p)
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("theta2", help="projection decay rates")
    common(p)
    p.add_argument("--kmax", type=int, default=2)

    p = sub.add_parser("measure", help="cylinder masses at one depth (CSV)")
    common(p)
    p.add_argument("--depth", type=int, default=2)

    p = sub.add_parser("gfun", help="finite backward-density approximants (CSV)")
    common(p)
    p.add_argument("--depth", type=int, default=2)

    p = sub.add_parser("sample", help="draw words from the measure")
    common(p)
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--count", type=int, default=10)

    p = sub.add_parser("correlate", help="correlation gaps for one cylinder pair (CSV)")
    common(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--nmax", type=int, default=8)

    p = sub.add_parser("mixing-bound", help="worst-case gap table vs geometric bound (CSV)")
    common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--nmax", type=int, default=6)

    p = sub.add_parser("gasket", help="generate a subdivision-gasket system (JSON)")
    common(p, system_source=False)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("renormalize", help="normalize raw restriction maps into a system (JSON)")
    common(p)

    p = sub.add_parser("dilation", help="dual-path transfer/projection residual")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--f", help="cylinder function JSON file")
    p.add_argument("--level", type=int, default=None)

    p = sub.add_parser("qdecay", help="Monte Carlo martingale decay table (CSV)")
    common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--jmax", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("report", help="single-system reproduction summary (JSON)")
    common(p)
    return top


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or (not argv[0].startswith("-") and argv[0] not in SUBCOMMANDS):
        given = argv[0] if argv else "(none)"
        print(f"unknown subcommand {given}; expected one of: {', '.join(SUBCOMMANDS)}", file=sys.stderr)
        return EXIT_UNKNOWN
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    budget_k = getattr(args, "budget_k", 0)
    if budget_k < 0:
        print("--budget-k must be positive", file=sys.stderr)
        return EXIT_CONFIG
    cfg = RunConfig(
        builtin=getattr(args, "builtin", None),
        infile=getattr(args, "infile", None),
        backend=getattr(args, "backend", EXACT),
        out=getattr(args, "out", None),
        fmt=getattr(args, "fmt", "csv"),
        seed=getattr(args, "seed", 0),
        budget_k=budget_k,
    )

    handler = _HANDLERS[args.command]
    try:
        return handler(cfg, args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SystemInvalidError as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
