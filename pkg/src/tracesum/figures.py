"""Static PNG renderers for the CLI report types.

Each renderer takes the already-computed data plus an output path, draws one
figure with the Agg backend, and returns the path.  Nothing here recomputes
mathematics; plots are a faithful view of the delimited output."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_dft(K, path):
    """|K| and |hat K| side by side."""
    hat = K.dft_values()
    x = np.arange(K.q)
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax0.plot(x, np.abs(K.values), lw=0.9)
    ax0.set_title(f"|K|, q = {K.q}")
    ax0.set_xlabel("n")
    ax1.plot(x, np.abs(hat), lw=0.9, color="tab:orange")
    ax1.set_title("|transform|")
    ax1.set_xlabel("frequency")
    return _finish(fig, path)


def render_scan(rows, path):
    """Normalized ratio against q, one line per kernel family."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.6))
    families = sorted({r["family"] for r in rows})
    for fam in families:
        sub = [r for r in rows if r["family"] == fam]
        qs = [r["q"] for r in sub]
        ax0.plot(qs, [r["ratio"] for r in sub], "o-", label=fam)
        ax1.plot(qs, [r["trivial_ratio"] for r in sub], "s--", label=fam)
    ax0.set_xscale("log")
    ax0.set_xlabel("q")
    ax0.set_ylabel("|S| / bound")
    ax0.set_title("sum vs. scaling bound")
    ax0.legend(fontsize=8)
    ax1.set_xscale("log")
    ax1.set_yscale("log")
    ax1.set_xlabel("q")
    ax1.set_ylabel("|S| / X")
    ax1.set_title("trivial normalization")
    return _finish(fig, path)


def render_bilinear(ratios, path):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    ax.plot(ratios, ".", ms=4)
    ax.axhline(1.0, color="tab:red", lw=0.8)
    ax.set_xlabel("trial")
    ax.set_ylabel("|B| / bound")
    ax.set_title("bilinear form against its transform bound")
    return _finish(fig, path)


def render_lemma(report, path):
    """Histogram of the logged part-(3) ratios, diagonal vs. general."""
    diag = [r.ratio for r in report["rows"] if r.part == "degenerate_sqrt"]
    gen = [r.ratio for r in report["rows"] if r.part == "general_logged"]
    fig, ax = plt.subplots(figsize=(6, 3.4))
    if gen:
        ax.hist(gen, bins=40, alpha=0.6, label="general")
    if diag:
        ax.hist(diag, bins=40, alpha=0.6, label="diagonal")
    ax.set_xlabel("|C| / reference")
    ax.set_ylabel("count")
    ax.set_title("character-sum ratios across the grid")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def render_hecke(ns, lam, lam13, path):
    fig, ax = plt.subplots(figsize=(7, 3.4))
    ax.plot(ns, lam, lw=0.7, alpha=0.8, label="normalized cusp form")
    ax.plot(ns, lam13, lw=0.7, alpha=0.8, label="symmetric square")
    ax.set_xlabel("n")
    ax.set_ylabel("coefficient")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def render_poisson(hs, terms, path):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    ax.semilogy(hs, np.maximum(np.abs(terms), 1e-18), "o-", ms=3, lw=0.7)
    ax.set_xlabel("dual frequency h")
    ax.set_ylabel("|term|")
    ax.set_title("dual-side decay")
    return _finish(fig, path)


def render_amplifier(F, O, S, defect, path):
    fig, ax = plt.subplots(figsize=(5.5, 3.4))
    names = ["|F|", "|O|", "|S|", "defect"]
    vals = [abs(F), abs(O), abs(S), defect]
    ax.bar(names, vals, color=["tab:blue", "tab:orange", "tab:green", "tab:red"])
    ax.set_yscale("log")
    ax.set_ylim(bottom=max(min(v for v in vals if v > 0) / 10, 1e-18))
    ax.set_title("family decomposition")
    return _finish(fig, path)


def render_kl_stats(rows, path):
    fig, ax = plt.subplots(figsize=(6, 3.4))
    ranks = sorted({r["rank"] for r in rows})
    for rk in ranks:
        sub = [r for r in rows if r["rank"] == rk]
        ax.plot(
            [r["q"] for r in sub],
            [r["sup_norm"] for r in sub],
            "o-",
            label=f"rank {rk}",
        )
    ax.set_xlabel("q")
    ax.set_ylabel("max |value|")
    ax.set_title("hyper-Kloosterman sup norms")
    ax.legend(fontsize=8)
    return _finish(fig, path)
