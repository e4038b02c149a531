"""Command-line driver: ``wtr {wgn, verify, qcurve, periods, free-energy}``.

Every command prints (or writes with ``--out``) one JSON document::

    {"command": ..., "config": {...}, "results": [{name, mode, inputs, lhs, rhs,
     abs_dev, rel_dev, pass}, ...], "wall_time": seconds}

Exit status: 0 when every ``pass`` is true, 1 on a failed check, 2 on a usage
error, 3 on an internal error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from wtr.algebra import CycOmega, GammaField, rational_str
from wtr.elliptic import curve_constants

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3
SUITES = ("identities", "operators", "all")
MIN_PRECISION = 16


@dataclass
class RunConfig:
    command: str
    curve: object  # "special" or [re, im] as decimal strings
    precision: int = 60
    backend: str = "numeric"
    g: int | None = None
    n: int | None = None
    level: int | None = None
    order: int | None = None
    samples: int = 5
    seed: int = 0
    out: str | None = None
    suite: str = "identities"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d


# ---------------------------------------------------------------------------
# Arguments
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    where = common.add_mutually_exclusive_group()
    where.add_argument("--curve", choices=["special"], help="the curve y^2 = 4(x^3 - 1)")
    where.add_argument("--tau", nargs=2, metavar=("RE", "IM"), help="modulus in the upper half-plane")
    common.add_argument("--precision", type=int, default=60, help="decimal digits (>= 16)")
    common.add_argument("--backend", choices=["exact", "numeric"], default="numeric")
    common.add_argument("--samples", type=int, default=5)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    p = argparse.ArgumentParser(prog="wtr", description="Topological recursion on the Weierstrass curve")
    sub = p.add_subparsers(dest="command", required=True)
    w = sub.add_parser("wgn", parents=[common], help="dump one correlator")
    w.add_argument("--g", type=int, required=True)
    w.add_argument("--n", type=int, required=True)
    v = sub.add_parser("verify", parents=[common], help="run a check suite")
    v.add_argument("--suite", choices=SUITES, default="identities")
    v.add_argument("--level", type=int, default=2)
    v.add_argument("--order", type=int, default=3)
    q = sub.add_parser("qcurve", parents=[common], help="extract the quantum curve on the special curve")
    q.add_argument("--order", type=int, default=5)
    sub.add_parser("periods", parents=[common], help="cycle integrals against closed forms")
    f = sub.add_parser("free-energy", parents=[common], help="free energy and its shift invariance")
    f.add_argument("--g", type=int, default=2)
    return p


def parse_args(argv) -> RunConfig:
    """Validated :class:`RunConfig`; usage errors exit with status 2."""
    parser = _build_parser()
    a = parser.parse_args(argv)
    if a.precision < MIN_PRECISION:
        parser.error(f"--precision must be at least {MIN_PRECISION}")
    if a.samples < 1:
        parser.error("--samples must be positive")
    if a.tau is not None:
        try:
            re_, im_ = (mpmath.mpf(x) for x in a.tau)
        except (ValueError, TypeError):
            parser.error("--tau expects two numbers")
        if im_ <= 0:
            parser.error("--tau must lie in the upper half-plane (Im tau > 0)")
        curve = [a.tau[0], a.tau[1]]
    else:
        curve = "special" if a.curve or a.command in ("qcurve", "wgn") else None
    if a.command == "qcurve":
        if a.tau is not None:
            parser.error("qcurve runs on the special curve only")
        if not 1 <= a.order <= 5:
            parser.error("--order must lie in 1..5")
    if curve is None:
        parser.error("give --curve special or --tau RE IM")
    if a.backend == "exact" and curve != "special":
        parser.error("the exact backend needs --curve special")
    if a.backend == "exact" and a.command in ("qcurve",):
        parser.error("qcurve is numeric only")
    cfg = RunConfig(a.command, curve, a.precision, a.backend, samples=a.samples, seed=a.seed, out=a.out)
    if a.command == "wgn":
        cfg.g, cfg.n = a.g, a.n
        from wtr.recursion import is_stable

        if not is_stable(a.g, a.n) or 2 * a.g - 2 + a.n > 4:
            parser.error("need a stable (g, n) with 2g - 2 + n <= 4")
    elif a.command == "verify":
        cfg.suite, cfg.level, cfg.order = a.suite, a.level, a.order
        if not 1 <= a.level <= 4 or not 0 <= a.order <= 5:
            parser.error("--level must lie in 1..4 and --order in 0..5")
    elif a.command == "qcurve":
        cfg.order = a.order
    elif a.command == "free-energy":
        cfg.g = a.g
        if not 2 <= a.g <= 2:
            parser.error("free energies are available for g = 2 (level 3)")
    return cfg


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def encode(v, digits: int):
    """JSON form: exact scalars as canonical strings, numbers as ``[re, im]`` decimal strings."""
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, int):
        return str(v)
    if isinstance(v, type(mpq(0))):
        return rational_str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (CycOmega, GammaField)):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [encode(x, digits) for x in v]
    with mpmath.workdps(digits + 10):
        c = mpmath.mpc(v)
        return [mpmath.nstr(c.real, digits) if c.real else "0", mpmath.nstr(c.imag, digits) if c.imag else "0"]


def decode_complex(pair, prec: int = 60):
    ctx = mpmath.mp.clone()
    ctx.dps = prec
    return ctx.mpc(ctx.mpf(pair[0]), ctx.mpf(pair[1]))


def _entry(name, mode, inputs, lhs, rhs, abs_dev, rel_dev, ok, digits):
    return {
        "name": name,
        "mode": mode,
        "inputs": inputs,
        "lhs": encode(lhs, digits),
        "rhs": encode(rhs, digits),
        "abs_dev": encode(abs_dev, 6),
        "rel_dev": encode(rel_dev, 6),
        "pass": bool(ok),
    }


def _from_report(r, digits):
    return _entry(r.name, r.mode, r.inputs, list(r.left), list(r.right), r.max_abs, r.max_rel, r.passed, digits)


def emit_report(report: dict, cfg: RunConfig) -> str:
    text = json.dumps(report, indent=2, sort_keys=False)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return text


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _curve(cfg: RunConfig):
    if cfg.curve == "special":
        return curve_constants("special", cfg.precision, mode=cfg.backend if cfg.backend == "exact" else "numeric")
    with mpmath.workdps(cfg.precision + 20):
        tau = mpmath.mpc(mpmath.mpf(cfg.curve[0]), mpmath.mpf(cfg.curve[1]))
    return curve_constants(tau, cfg.precision)


def _wgn(cfg: RunConfig) -> list:
    from wtr.recursion import level, run_to_level

    curve = _curve(cfg)
    table = run_to_level(level(cfg.g, cfg.n), curve)
    W = table.W[(cfg.g, cfg.n)]
    terms = [
        {"var_slots": [None if s is None else [s[0], s[1]] for s in key], "coeff": encode(c, cfg.precision)}
        for key, c in sorted(W.terms.items(), key=lambda kv: repr(kv[0]))
    ]
    # symmetry under every permutation of the slots
    worst = 0
    for perm in itertools.permutations(range(W.n)):
        other = W.permuted(perm).terms
        for key, c in W.terms.items():
            d = c - other.get(key, 0)
            worst = max(worst, abs(curve.to_num(d)) if d != 0 else 0)
    tol = curve.num.tol()
    entry = _entry(f"W_{{{cfg.g},{cfg.n}}}", curve.mode, {"g": cfg.g, "n": cfg.n, "orientation": table.orientation},
                   None, None, worst, worst, worst <= tol, cfg.precision)
    entry["terms"] = terms
    return [entry]


def _tower_pairs(top: int) -> list:
    """``(g, n)`` for every stable ``W_{g,n+1}`` up to level ``top``, lowest level first."""
    from wtr.recursion import is_stable, level

    pairs = [(g, m - 1) for m in range(1, top + 3) for g in range(0, top // 2 + 2)
             if is_stable(g, m) and level(g, m) <= top]
    return sorted(pairs, key=lambda gn: (level(gn[0], gn[1] + 1), gn))


def _verify_identities(cfg: RunConfig, table) -> list:
    from wtr.identities import check_identity_tower, check_loop_equation, check_pole_locations

    out = [check_loop_equation(0, 1, table, count=min(cfg.samples, 3), seed=cfg.seed + 1)]
    for g, n in _tower_pairs(table.top_level):
        out.append(check_identity_tower(g, n, table, count=cfg.samples, seed=cfg.seed))
        out.append(check_loop_equation(g, n, table, count=min(cfg.samples, 3), seed=cfg.seed + 1))
        out.append(check_pole_locations(g, n, table))
    return out


def _verify(cfg: RunConfig) -> list:
    from wtr.identities import check_basic_periods, check_ellint_period, sample_points
    from wtr.recursion import run_to_level

    curve = _curve(cfg)
    digits = cfg.precision
    results = []
    if cfg.suite in ("identities", "all"):
        table = run_to_level(cfg.level, curve)
        results += [_from_report(r, digits) for r in _verify_identities(cfg, table)]
        results.append(_from_report(check_ellint_period(curve), digits))
        results.append(_from_report(check_basic_periods(curve), digits))
    if cfg.suite in ("operators", "all"):
        from wtr.wavefunction import operator_check_A, operator_check_B

        if curve.exact:
            curve = curve.num
        order = cfg.order
        table = run_to_level(max(order - 1, 1), curve)
        zs = [s[0] for s in sample_points(curve, cfg.samples, 1, seed=cfg.seed)]
        ra = operator_check_A(order, zs, table)
        rb = operator_check_B(order, zs, table)
        ctx = curve.num.ctx
        tol = ctx.mpf(10) ** (25 - curve.prec)
        for m in range(order + 1):
            va = [r.value for r in ra if r.order == m]
            vb = [r.value for r in rb if r.order == m]
            inputs = {"order": m, "points": encode(zs, 20)}
            for nm, vals in (("operator_A", va), ("operator_B", vb)):
                dev = max(abs(v) for v in vals)
                results.append(_entry(nm, "numeric", inputs, vals, [0] * len(vals), dev, dev, dev < tol, digits))
            dev = max(abs(a - b) for a, b in zip(va, vb))
            results.append(_entry("operator_A_minus_B", "numeric", inputs, va, vb, dev, dev, dev < tol, digits))
    return results


def _qcurve(cfg: RunConfig) -> list:
    from wtr.identities import sample_points
    from wtr.nonperturbative import EXPECTED, closed_form_xderiv, quantum_curve_report, s_np_xderivs, special_setup

    table, theta = special_setup(cfg.precision, 3)
    curve = table.curve
    ctx = curve.num.ctx
    fit_n = max(cfg.samples, 7)
    pts = [s[0] for s in sample_points(curve, fit_n + 3, 1, seed=cfg.seed)]
    rep, system, rats = quantum_curve_report(cfg.order, table, theta, pts[:fit_n], pts[fit_n:])
    tol = rep.tol
    results = []
    for kind, polys in (("A", system.A), ("B", system.B)):
        for i, poly in sorted(polys.items()):
            for p, c in enumerate(poly):
                want = EXPECTED.get((kind, i, p), Fraction(0))
                wnum = ctx.mpf(want.numerator) / want.denominator
                dev = abs(c - wnum)
                rat = rats[(kind, i, p)]
                ok = dev < tol and rat == want
                results.append(_entry(f"{kind}{i}[x^{p}]", "numeric",
                                      {"reconstructed": None if rat is None else str(rat), "expected": str(want)},
                                      c, want, dev, dev, ok, cfg.precision))
    fr = system.max_residual()
    results.append(_entry("wkb_fit_residual", "numeric", {"orders": list(range(cfg.order))}, fr, 0, fr, fr, fr < tol, 8))
    kmax = min(cfg.order - 1, 4)
    for k in range(kmax + 1):
        vals, refs = [], []
        for z in pts[: cfg.samples]:
            vals.append(s_np_xderivs(k, z, table, theta)[0])
            refs.append(closed_form_xderiv(k, z, curve))
        dev = max(abs(a - b) for a, b in zip(vals, refs))
        results.append(_entry(f"S{k}_prime_closed_form", "numeric", {"k": k}, vals, refs, dev, dev, dev < tol, cfg.precision))
    return results


def _periods(cfg: RunConfig) -> list:
    from wtr.identities import _report, basic_period_closed_forms, basic_periods, check_ellint_period

    curve = _curve(cfg)
    got = basic_periods(curve)
    ref = basic_period_closed_forms(curve)
    results = []
    for key in ref:
        r = _report(f"period_{key}", curve, {"integrand": key, "curve": curve.describe()}, [got[key]], [ref[key]])
        results.append(_from_report(r, cfg.precision))
    results.append(_from_report(check_ellint_period(curve), cfg.precision))
    return results


def _free_energy(cfg: RunConfig) -> list:
    from wtr.identities import _report
    from wtr.recursion import free_energy, run_to_level

    curve = _curve(cfg)
    table = run_to_level(2 * cfg.g - 1, curve)
    shift = 17 if curve.exact else curve.num.ctx.mpc(17, -3)
    a = free_energy(cfg.g, table)
    b = free_energy(cfg.g, table, shift=shift)
    r = _report(f"F_{cfg.g}_shift_invariance", curve, {"g": cfg.g, "shift": encode(shift, 10)}, [a], [b])
    return [_from_report(r, cfg.precision)]


COMMANDS = {"wgn": _wgn, "verify": _verify, "qcurve": _qcurve, "periods": _periods, "free-energy": _free_energy}


def execute(cfg: RunConfig) -> dict:
    """Run one command; deterministic for a given config apart from ``wall_time``."""
    t0 = time.perf_counter()
    results = COMMANDS[cfg.command](cfg)
    return {
        "command": cfg.command,
        "config": cfg.to_dict(),
        "results": results,
        "wall_time": round(time.perf_counter() - t0, 3),
    }


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        report = execute(cfg)
    except Exception as exc:  # noqa: BLE001
        print(f"wtr: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    emit_report(report, cfg)
    return EXIT_PASS if all(r["pass"] for r in report["results"]) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
