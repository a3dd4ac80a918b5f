"""File artifacts for a full run: summary text, delimited curves, figures."""

import csv
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _fmt(x, digits=12):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "-"
    return f"{x:.{digits}g}"


def write_curve_csv(path, scat):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["R", "a_R"])
        for R, a_R in scat.curve:
            w.writerow([repr(R), repr(a_R)])


def write_sweep_csv(path, sweep):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "N", "B", "term_main", "term_kinetic", "term_threebody", "error_budget"])
        for ev in sweep:
            w.writerow(
                [
                    repr(ev.L),
                    ev.N,
                    repr(ev.B),
                    repr(ev.term_main),
                    repr(ev.term_kinetic),
                    repr(ev.term_threebody),
                    repr(ev.quadrature_error),
                ]
            )


def plot_a_r_curve(path, scat):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if scat.curve:
        Rs = [p[0] for p in scat.curve]
        vals = [p[1] for p in scat.curve]
        ax.semilogx(Rs, vals, "o-", label="ball value $a_R$")
    if math.isfinite(scat.a):
        ax.axhline(scat.a, color="tab:red", ls="--", lw=1.0, label="limit $a$")
    ax.set_xlabel("ball radius R")
    ax.set_ylabel("scattering length")
    ax.legend(loc="best")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_b_sweep(path, sweep, certificate=None):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    by_L = {}
    for ev in sweep:
        by_L.setdefault(ev.L, []).append(ev)
    for L, evs in sorted(by_L.items()):
        evs = sorted(evs, key=lambda e: e.N)
        ax.plot([e.N for e in evs], [e.B for e in evs], ".-", lw=0.8, ms=3, label=f"L={L:g}")
    ax.axhline(0.0, color="k", lw=0.8)
    if certificate is not None:
        ax.plot([certificate.N], [certificate.B], "r*", ms=14, label="certificate")
    ax.set_xscale("log")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.set_xlabel("particle number N")
    ax.set_ylabel("energy bound B(N, L)")
    if len(by_L) <= 16:
        ax.legend(loc="best", fontsize=7)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def write_summary(path, v, scat, twobody, certificate=None, failure=None):
    lines = []
    lines.append("pair potential        : " + repr(v.to_dict()))
    lines.append("scattering length a   : " + _fmt(scat.a))
    lines.append("  shooting route      : " + _fmt(scat.method_shooting))
    lines.append("  variational route   : " + _fmt(scat.method_variational))
    lines.append("  route discrepancy   : " + _fmt(scat.discrepancy, 3))
    lines.append("  bound-state node    : " + str(scat.node_flag))
    lines.append("  resonant (a = -inf) : " + str(scat.minus_infinity))
    if twobody is not None:
        lines.append("two-body energy E2    : " + _fmt(twobody.E2))
        lines.append("  bound state exists  : " + str(twobody.bound_state_exists))
    if certificate is not None:
        c = certificate
        lines.append("certificate           : B < 0 verified")
        lines.append("  N                   : " + str(c.N))
        lines.append("  L                   : " + _fmt(c.L))
        lines.append("  B                   : " + _fmt(c.B))
        lines.append("  error budget        : " + _fmt(c.error_budget, 3))
        lines.append("  ball radius R       : " + _fmt(c.R))
        lines.append("  b = 8 pi a_R + tail : " + _fmt(c.b))
        lines.append("  c = sup phi^2 - 1   : " + _fmt(c.c))
        lines.append("  profile             : " + c.profile_name)
        lines.append(
            "  terms (main/kin/3b) : "
            + ", ".join(_fmt(t, 6) for t in (c.term_main, c.term_kinetic, c.term_threebody))
        )
    if failure is not None:
        lines.append("certificate           : none (" + failure + ")")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def render_report(out_dir, v, scat, twobody=None, certificate=None, failure=None, sweep=None):
    """Write every artifact for one run; returns the list of created files."""
    os.makedirs(out_dir, exist_ok=True)
    created = []

    def add(name):
        created.append(os.path.join(out_dir, name))
        return created[-1]

    write_summary(add("summary.txt"), v, scat, twobody, certificate, failure)
    write_curve_csv(add("a_r_curve.csv"), scat)
    plot_a_r_curve(add("fig_a_r_curve.png"), scat)
    if sweep:
        write_sweep_csv(add("b_sweep.csv"), sweep)
        plot_b_sweep(add("fig_b_sweep.png"), sweep, certificate)
    return created
