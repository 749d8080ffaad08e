"""Batch command-line front end.

Every subcommand computes one report, prints its delimited table (or JSON
document) to stdout, and — when `--out PATH` is given — writes the table to
PATH together with a JSON mirror, a run manifest, and a rendered PNG figure
(suppressed by `--no-figures`).  Exit codes: 0 success, 2 when a verification
check fails, 1 for usage errors.
"""

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .amplifier import (
    PrimePairMeasure,
    choose_hmax,
    decompose_FO,
    scale_parameter,
)
from .bilinear import BilinearInstance, bilinear_form, bound_ratio
from .charsums import DIAGONAL_CONSTANT, default_grid, lemma_audit
from .errors import IdentityViolation, TracesumError, TruncationTooCoarse, VerificationError
from .heckecoef import HeckeSystem
from .periodic import PeriodicFunction, plancherel_defect
from .sums import (
    ScanConfig,
    SmoothWindow,
    eval_x_rule,
    exponent_scan,
    poisson_defect,
    theorem_window,
)
from .tracefn import build, hyper_kloosterman_table, parse_trace


@dataclass
class RunManifest:
    """Reproducibility record written next to every --out file."""

    command: str
    flags: dict
    seed: int
    version: str
    started: str
    finished: str

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "flags": {k: self.flags[k] for k in sorted(self.flags)},
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _now():
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _write_csv(stream, fieldnames, rows):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in fieldnames])


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here reserves 2 for failed
    verification, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _emit(args, manifest: RunManifest, result):
    """Write the primary stream, and the mirror/manifest/figure when --out."""
    kind = result["kind"]
    if args.out is None:
        if kind == "table":
            _write_csv(sys.stdout, result["fieldnames"], result["rows"])
        else:
            sys.stdout.write(json.dumps(result["report"], sort_keys=True, indent=2) + "\n")
        return

    path = args.out
    base = os.path.splitext(path)[0]
    if kind == "table":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            _write_csv(fh, result["fieldnames"], result["rows"])
        mirror = {"rows": result["rows"]}
        mirror.update(result.get("extras", {}))
        with open(base + ".json", "w", encoding="utf-8") as fh:
            json.dump(mirror, fh, sort_keys=True, indent=2, default=_fmt)
            fh.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(result["report"], sort_keys=True, indent=2) + "\n")
    with open(base + ".manifest.json", "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
    if result.get("figure") is not None and not args.no_figures:
        result["figure"](base + ".png")


# -- subcommand bodies --------------------------------------------------------


def _cmd_dft(args):
    K = build(parse_trace(args.trace, args.q))
    hat = K.dft_values()
    rows = [
        {
            "residue": n,
            "re": float(K.values[n].real),
            "im": float(K.values[n].imag),
            "hat_re": float(hat[n].real),
            "hat_im": float(hat[n].imag),
        }
        for n in range(K.q)
    ]

    def figure(path):
        from . import figures

        return figures.render_dft(K, path)

    return {
        "kind": "table",
        "fieldnames": ["residue", "re", "im", "hat_re", "hat_im"],
        "rows": rows,
        "extras": {"plancherel_defect": plancherel_defect(K)},
        "figure": figure,
    }


def _cmd_sum_scan(args):
    q_list = _ints(args.q_list)
    families = tuple(t.strip() for t in args.trace.split(",") if t.strip())
    cfg = ScanConfig(
        q_list=q_list, x_rule=args.x_rule, z=args.z, families=families, coeff=args.coeff
    )
    xmax = max(eval_x_rule(cfg.x_rule, q) for q in q_list)
    H = None
    if cfg.coeff != "unit":
        H = HeckeSystem(int(math.ceil(2 * xmax)) + 2)
    if args.threads > 1 and len(q_list) > 1:
        parts = [replace(cfg, q_list=(q,)) for q in q_list]
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            chunks = list(pool.map(lambda c: exponent_scan(c, H), parts))
        rows = [row for chunk in chunks for row in chunk]
    else:
        rows = exponent_scan(cfg, H)
    for row in rows:
        row["in_window"] = int(theorem_window(row["q"], row["X"], row["Z"]))

    def figure(path):
        from . import figures

        return figures.render_scan(rows, path)

    return {
        "kind": "table",
        "fieldnames": [
            "q",
            "X",
            "Z",
            "family",
            "S_re",
            "S_im",
            "khat_inf",
            "bound",
            "ratio",
            "trivial_ratio",
            "in_window",
        ],
        "rows": rows,
        "figure": figure,
    }


def _cmd_bilinear_check(args):
    rng = np.random.default_rng(args.seed)
    q = args.q
    rows = []
    ratios = []
    for trial in range(args.trials):
        alpha = rng.standard_normal(q) + 1j * rng.standard_normal(q)
        beta = rng.standard_normal(q) + 1j * rng.standard_normal(q)
        kernel = PeriodicFunction(
            q, rng.standard_normal(q) + 1j * rng.standard_normal(q)
        )
        inst = BilinearInstance(q, alpha, beta, kernel)
        value = bilinear_form(inst)
        ratio = bound_ratio(inst)
        if ratio > 1 + 1e-8:
            raise IdentityViolation(
                f"trial {trial}: ratio {ratio:.12f} exceeds 1 + 1e-8"
            )
        ratios.append(ratio)
        rows.append(
            {
                "trial": trial,
                "ratio": ratio,
                "b_re": value.real,
                "b_im": value.imag,
            }
        )

    def figure(path):
        from . import figures

        return figures.render_bilinear(ratios, path)

    return {
        "kind": "table",
        "fieldnames": ["trial", "ratio", "b_re", "b_im"],
        "rows": rows,
        "figure": figure,
    }


def _cmd_amplifier_check(args):
    q = args.q
    X = eval_x_rule(args.X, q)
    K = build(parse_trace(args.trace, q))
    H = HeckeSystem(int(math.ceil(2 * X)) + 2)
    M = PrimePairMeasure(args.P, args.L, q)
    Hparam = scale_parameter(q, X, args.P, args.L)
    W = SmoothWindow(1.0)
    V = SmoothWindow(1.0)
    hmax = choose_hmax(W, Hparam, 1.0)
    while True:
        try:
            F, O, S, defect = decompose_FO(K, H, V, X, M, Hparam, hmax, W=W)
            break
        except TruncationTooCoarse:
            hmax *= 2
            if hmax > 2**20:
                raise
    scale = abs(S) + 1
    report = {
        "q": q,
        "X": X,
        "P": args.P,
        "L": args.L,
        "H": Hparam,
        "hmax": hmax,
        "p_set": list(M.p_set),
        "l_set": list(M.l_set),
        "F": [F.real, F.imag],
        "O": [O.real, O.imag],
        "S": [S.real, S.imag],
        "defect": defect,
        "tol": args.tol,
        "pass": bool(defect <= args.tol * scale),
    }
    if defect > args.tol * scale:
        raise IdentityViolation(
            f"family-decomposition defect {defect:.3e} exceeds {args.tol:.1e} * {scale:.3e}"
        )

    def figure(path):
        from . import figures

        return figures.render_amplifier(F, O, S, defect, path)

    return {"kind": "report", "report": report, "figure": figure}


def _cmd_lemma_check(args):
    grid = default_grid(
        q_values=(args.q,),
        r_max=args.r_max,
        l_values=_ints(args.l_values),
        p_values=_ints(args.p_values),
        n_max=args.n_max,
    )
    audit = lemma_audit(grid, c4=args.c4, collect_all=args.collect_all)
    rows = [
        {
            "part": r.part,
            "n": r.instance.n,
            "p1": r.instance.p1,
            "p2": r.instance.p2,
            "l1": r.instance.l1,
            "l2": r.instance.l2,
            "r": r.instance.r,
            "m": r.instance.m,
            "q": r.instance.q,
            "value_re": r.value.real,
            "value_im": r.value.imag,
            "bound": r.bound,
            "ratio": r.ratio,
            "passed": int(r.passed),
        }
        for r in audit["rows"]
    ]
    sys.stderr.write(
        "checked=%d violations=%d max_diag_ratio=%.6f max_general_ratio=%.6f\n"
        % (
            audit["checked"],
            audit["violations"],
            audit["max_diag_ratio"],
            audit["max_general_ratio"],
        )
    )

    def figure(path):
        from . import figures

        return figures.render_lemma(audit, path)

    return {
        "kind": "table",
        "fieldnames": [
            "part",
            "n",
            "p1",
            "p2",
            "l1",
            "l2",
            "r",
            "m",
            "q",
            "value_re",
            "value_im",
            "bound",
            "ratio",
            "passed",
        ],
        "rows": rows,
        "extras": {
            "checked": audit["checked"],
            "violations": audit["violations"],
            "max_diag_ratio": audit["max_diag_ratio"],
            "max_general_ratio": audit["max_general_ratio"],
        },
        "figure": figure,
    }


def _cmd_hecke_table(args):
    H = HeckeSystem(max(args.limit, 2))
    sym2 = H.lambda_sym2_table(args.limit)
    ns = list(range(1, args.limit + 1))
    rows = [
        {
            "n": n,
            "tau": int(H.tau[n]),
            "lambda": float(H.lam[n]),
            "lambda13": float(sym2[n]),
        }
        for n in ns
    ]

    def figure(path):
        from . import figures

        return figures.render_hecke(
            ns, [r["lambda"] for r in rows], [r["lambda13"] for r in rows], path
        )

    return {
        "kind": "table",
        "fieldnames": ["n", "tau", "lambda", "lambda13"],
        "rows": rows,
        "figure": figure,
    }


def _cmd_poisson_check(args):
    q = args.q
    X = eval_x_rule(args.X, q)
    K = build(parse_trace(args.trace, q))
    W = SmoothWindow(args.z)
    defect = poisson_defect(K, W, X)
    report = {
        "q": q,
        "X": X,
        "Z": args.z,
        "trace": args.trace,
        "defect": defect,
        "tol": args.tol,
        "pass": bool(defect <= args.tol),
    }
    if defect > args.tol:
        raise IdentityViolation(
            f"complete-sum defect {defect:.3e} exceeds {args.tol:.1e}"
        )

    hat = K.dft_values()
    hs = list(range(-24, 25))
    terms = [(X / math.sqrt(q)) * hat[h % q] * W.fourier(h * X / q) for h in hs]

    def figure(path):
        from . import figures

        return figures.render_poisson(hs, terms, path)

    return {"kind": "report", "report": report, "figure": figure}


def _cmd_kl_stats(args):
    rows = []
    for q in _ints(args.q_list):
        for rank in _ints(args.ranks):
            table = hyper_kloosterman_table(q, rank)
            K = PeriodicFunction(q, table)
            rows.append(
                {
                    "q": q,
                    "rank": rank,
                    "sup_norm": float(np.max(np.abs(table))),
                    "dft_sup": float(np.max(np.abs(K.dft_values()))),
                }
            )

    def figure(path):
        from . import figures

        return figures.render_kl_stats(rows, path)

    return {
        "kind": "table",
        "fieldnames": ["q", "rank", "sup_norm", "dft_sup"],
        "rows": rows,
        "figure": figure,
    }


# -- wiring -------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="tracesum", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", default=None, help="write output files with this stem")
        p.add_argument("--no-figures", action="store_true")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("dft", help="table of a trace function and its transform")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trace", default="kl2")
    common(p)
    p.set_defaults(func=_cmd_dft)

    p = sub.add_parser("sum-scan", help="windowed coefficient sums across moduli")
    p.add_argument("--q-list", required=True)
    p.add_argument("--x-rule", default="q**1.5")
    p.add_argument("--z", type=float, default=2.0)
    p.add_argument("--trace", default="legendre,kl2,kl3")
    p.add_argument("--coeff", default="gl3")
    common(p)
    p.set_defaults(func=_cmd_sum_scan)

    p = sub.add_parser("bilinear-check", help="random bilinear forms against the bound")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=50)
    common(p)
    p.set_defaults(func=_cmd_bilinear_check)

    p = sub.add_parser("amplifier-check", help="family decomposition audit")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--X", default="q**1.5")
    p.add_argument("--P", type=int, default=2)
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--trace", default="legendre")
    p.add_argument("--tol", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=_cmd_amplifier_check)

    p = sub.add_parser("lemma-check", help="character-sum grid audit")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r-max", type=int, default=12)
    p.add_argument("--l-values", default="3,7,11")
    p.add_argument("--p-values", default="5,13")
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--c4", type=float, default=DIAGONAL_CONSTANT)
    p.add_argument("--collect-all", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_lemma_check)

    p = sub.add_parser("hecke-table", help="tau / eigenvalue table")
    p.add_argument("--limit", type=int, required=True)
    common(p)
    p.set_defaults(func=_cmd_hecke_table)

    p = sub.add_parser("poisson-check", help="complete-sum formula defect")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trace", default="kl2")
    p.add_argument("--X", default="q**1.5")
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=_cmd_poisson_check)

    p = sub.add_parser("kl-stats", help="sup norms of hyper-Kloosterman tables")
    p.add_argument("--q-list", required=True)
    p.add_argument("--ranks", default="2,3")
    common(p)
    p.set_defaults(func=_cmd_kl_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = _now()
    flags = {
        k: v for k, v in vars(args).items() if k not in ("func", "command") and v is not None
    }
    try:
        result = args.func(args)
    except VerificationError as exc:
        sys.stderr.write(f"verification failure: {exc}\n")
        return 2
    except (TracesumError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    manifest = RunManifest(
        command=args.command,
        flags=flags,
        seed=args.seed,
        version=__version__,
        started=started,
        finished=_now(),
    )
    _emit(args, manifest, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
