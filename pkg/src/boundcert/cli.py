"""Command-line interface.

Subcommands:
    scatlen       scattering length by both routes, with the a_R curve
    twobody       lowest two-body eigenvalue and bound-state flag
    certify       search for a certified negative N-body energy bound
    validate-mc   Monte Carlo cross-check of the bound on an (N, L) lattice
    report        full run rendered to text, CSV, and figures in a directory

Exit codes: 0 success; 1 configuration or I/O failure; 2 the two scattering
routes disagree; 3 no certificate can exist (nonnegative scattering length or
an already-bound pair); 4 the certificate schedule was exhausted; 5 the Monte
Carlo estimate violated the bound.

JSON output is deterministic for fixed inputs: keys are sorted, floats are
repr-exact, and the only run-dependent field is `generated_at`.
"""

import argparse
import datetime
import json
import math
import sys

from . import certifier, mc_oracle, report, scattering, two_body
from .errors import (
    BoundcertError,
    ConfigError,
    Inconsistent,
    NotCertifiable,
    SearchExhausted,
)
from .potential import load_potential

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INCONSISTENT = 2
EXIT_NOT_CERTIFIABLE = 3
EXIT_SEARCH_EXHAUSTED = 4
EXIT_MC_VIOLATION = 5

DEFAULT_SEED = 20260818
DEFAULT_SAMPLES = 1_000_000


def _clean(obj):
    """Map non-finite floats to null and numpy scalars to built-ins."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if hasattr(obj, "item") and not isinstance(obj, (dict, list, tuple, str)):
        return _clean(obj.item())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(x) for x in obj]
    return obj


def _emit(payload, args):
    payload = _clean(payload)
    payload["generated_at"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(args, **extra):
    cfg = {
        "potential": args.potential,
        "seed": args.seed,
        "samples": args.samples,
        "l_max": args.l_max,
        "tol": args.tol,
    }
    cfg.update(extra)
    return cfg


def _add_common(sp):
    sp.add_argument("--potential", required=True, help="path to a potential description JSON")
    sp.add_argument("--out", default=None, help="output file (or directory for `report`)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="PRNG seed for sampling")
    sp.add_argument(
        "--samples", type=int, default=DEFAULT_SAMPLES, help="Monte Carlo samples per lattice point"
    )
    sp.add_argument("--l-max", type=float, default=None, help="cap on the bump width schedule")
    sp.add_argument("--tol", type=float, default=None, help="override the route-agreement tolerance")


def build_parser():
    p = argparse.ArgumentParser(
        prog="boundcert",
        description="scattering length of a radial pair potential and, when it is "
        "negative, a certified negative energy bound for N bosons",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("scatlen", "scattering length by the variational and shooting routes"),
        ("twobody", "lowest eigenvalue of the relative two-body operator"),
        ("certify", "search for a certified (N, L) with a negative energy bound"),
        ("validate-mc", "Monte Carlo sanity check of the energy bound"),
        ("report", "render a full run to text, CSV, and figures"),
    ):
        _add_common(sub.add_parser(name, help=helptext))
    return p


def _scatlen_payload(v, args):
    scat = scattering.limit_a(v, tol_a=args.tol)
    top = scat.solutions[-1] if scat.solutions else None
    return scat, {
        "a": scat.a,
        "a_R_curve": [[R, a_R] for R, a_R in scat.curve],
        "b": None if top is None else top.b,
        "c": None if top is None else top.c,
        "R": None if top is None else top.R,
        "discrepancy": scat.discrepancy,
        "node_flag": scat.node_flag,
        "minus_infinity": scat.minus_infinity,
        "method_variational": scat.method_variational,
        "method_shooting": scat.method_shooting,
    }


def cmd_scatlen(v, args):
    _, payload = _scatlen_payload(v, args)
    payload["config"] = _config_echo(args)
    _emit(payload, args)
    return EXIT_OK


def cmd_twobody(v, args):
    res = two_body.ground_state_energy(v)
    payload = {
        "E2": res.E2,
        "bound_state": res.bound_state_exists,
        "r_max": res.r_max,
        "n": res.n,
        "extrapolant_delta": res.metadata["extrapolant_delta"],
        "config": _config_echo(args),
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_certify(v, args):
    cfg = certifier.SearchConfig(tol_a=args.tol, l_max=args.l_max)
    try:
        cert = certifier.search_certificate(v, cfg)
    except NotCertifiable as exc:
        _emit(
            {
                "certifiable": False,
                "reason": str(exc),
                "diagnostics": dict(exc.diagnostics),
                "config": _config_echo(args),
            },
            args,
        )
        return EXIT_NOT_CERTIFIABLE
    except SearchExhausted as exc:
        diag = {k: v_ for k, v_ in exc.diagnostics.items() if k != "sweep"}
        _emit(
            {
                "certifiable": None,
                "reason": str(exc),
                "diagnostics": diag,
                "config": _config_echo(args),
            },
            args,
        )
        return EXIT_SEARCH_EXHAUSTED
    payload = {"certificate": cert.to_dict(), "config": _config_echo(args)}
    _emit(payload, args)
    return EXIT_OK


def cmd_validate_mc(v, args):
    rep = mc_oracle.run_chain_validation(v, samples=args.samples, seed=args.seed)
    payload = {
        "rows": rep["rows"],
        "passed": rep["passed"],
        "violations": rep["violations"],
        "config": _config_echo(args),
    }
    _emit(payload, args)
    return EXIT_OK if rep["passed"] else EXIT_MC_VIOLATION


def cmd_report(v, args):
    out_dir = args.out or "boundcert_report"
    scat = scattering.limit_a(v, tol_a=args.tol)
    twob = two_body.ground_state_energy(v)
    cert = None
    sweep = None
    failure = None
    if scat.node_flag:
        failure = "two-body bound state already present"
    elif not scat.a < 0:
        failure = "scattering length is nonnegative"
    else:
        cfg = certifier.SearchConfig(tol_a=args.tol, l_max=args.l_max, collect_sweep=True)
        try:
            cert = certifier.search_certificate(v, cfg)
            sweep = cert.metadata.get("sweep")
        except SearchExhausted as exc:
            failure = "schedule exhausted with the bound still positive"
            sweep = exc.diagnostics.get("sweep")
    files = report.render_report(out_dir, v, scat, twob, cert, failure, sweep)
    sys.stdout.write("\n".join(files) + "\n")
    return EXIT_OK


_COMMANDS = {
    "scatlen": cmd_scatlen,
    "twobody": cmd_twobody,
    "certify": cmd_certify,
    "validate-mc": cmd_validate_mc,
    "report": cmd_report,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        v = load_potential(args.potential)
        return _COMMANDS[args.command](v, args)
    except Inconsistent as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except NotCertifiable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CERTIFIABLE
    except SearchExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEARCH_EXHAUSTED
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BoundcertError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
