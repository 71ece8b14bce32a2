"""sharpineq command line: constant tables, verification suites, optimisation,
transport demos and plot data.

Every output embeds a manifest (command, parameters, seed, tolerances,
version, wall time).  ``sharpineq replay FILE`` re-runs the manifest and
compares the records byte for byte.

Exit codes: 0 success, 1 a check failed (or replay mismatch), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from . import constants as C
from . import extremals as E
from . import suites as S
from . import transport as T
from .domain import WeightedDomain
from .errors import SharpIneqError
from .norms import format_norm, parse_norm
from .quadrature import DEFAULT_SEED

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
KINDS = ("sobolev", "gn", "logsob", "euclidean-gn")
PLOT_KINDS = ("extremal-profiles", "deficit-vs-perturbation", "tensorization-convergence",
              "transport-map")


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int
    tolerances: dict
    version: str = __version__
    wall_time: float = 0.0
    argv: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


# -- parsing --------------------------------------------------------------------------

def parse_grid(text: str, integer: bool = False) -> list:
    """``1..3`` (inclusive integer range), ``0,0.5,1``, fractions like ``3/2``."""
    values = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if not part:
                continue
            if ".." in part:
                lo, hi = part.split("..", 1)
                lo_i, hi_i = int(lo), int(hi)
                if hi_i < lo_i:
                    raise UsageError(f"empty range {part!r}")
                values.extend(range(lo_i, hi_i + 1))
            else:
                v = float(Fraction(part))
                if integer:
                    if v != int(v):
                        raise UsageError(f"{part!r} is not an integer")
                    v = int(v)
                values.append(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None
    if not values:
        raise UsageError(f"empty grid {text!r}")
    return values


def _norm_spec(text: str, n: int):
    try:
        return parse_norm(text, dim=n)
    except SharpIneqError as exc:
        raise UsageError(str(exc)) from None


def _threads() -> int:
    raw = os.environ.get("SHARPINEQ_THREADS", "")
    try:
        cap = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise UsageError(f"SHARPINEQ_THREADS must be an integer, got {raw!r}") from None
    return max(1, cap)


def pool_map(func, items):
    """Map over a thread pool; results come back in input order."""
    items = list(items)
    workers = min(_threads(), len(items)) or 1
    if workers == 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


# -- output ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _clean(v):
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render_records(records: list, fmt: str) -> str:
    """Records only; this is the part replay compares."""
    records = _clean(records)
    if fmt == "json":
        return json.dumps(records, sort_keys=True, indent=1)
    cols: list = []
    for r in records:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        w.writerow([_fmt(r.get(k)) for k in cols])
    return buf.getvalue()


def render(manifest: RunManifest, records: list, fmt: str) -> str:
    body = render_records(records, fmt)
    if fmt == "json":
        return json.dumps({"manifest": _clean(manifest.to_json()), "records": json.loads(body)},
                          sort_keys=True, indent=1) + "\n"
    head = "# manifest: " + json.dumps(_clean(manifest.to_json()), sort_keys=True) + "\n"
    return head + body


def read_output(path: str) -> tuple[dict, str, str]:
    """(manifest, records text, format) from a file written by this tool."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if text.startswith("# manifest: "):
        first, _, rest = text.partition("\n")
        return json.loads(first[len("# manifest: "):]), rest, "csv"
    data = json.loads(text)
    return data["manifest"], render_records(data["records"], "json"), "json"


# -- commands -------------------------------------------------------------------------

def _constant_row(point):
    kind, n, m, a, p, alpha, norm_text = point
    row = {"kind": kind, "n": n, "m": m, "a": a, "p": p, "alpha": alpha, "norm": norm_text}
    try:
        norm = _norm_spec(norm_text, n)
        if kind == "euclidean-gn":
            c = C.euclidean_gn_constant(n, p, a, norm)
        else:
            dom = WeightedDomain(n, (a,) * m, norm)
            if kind == "sobolev":
                c = C.sobolev_l1_constant(dom) if p == 1.0 else C.sobolev_constant(dom, p)
            elif kind == "gn":
                c = C.gn_constant(dom, p, alpha)
            else:
                c = C.logsob_constant(dom, p)
        row.update(value=c.value, log_value=c.log_value, theta=c.theta,
                   alpha_used=c.alpha, branch=c.branch, status="ok", message="")
    except (SharpIneqError, UsageError) as exc:
        row.update(value=None, log_value=None, theta=None, alpha_used=None, branch=None,
                   status="parameter-error", message=str(exc))
    return row


def cmd_constants(args) -> tuple[list, int]:
    kinds = KINDS if args.kind == "all" else [args.kind]
    ns = parse_grid(args.n, integer=True)
    as_ = parse_grid(args.a)
    ps = parse_grid(args.p)
    alphas = parse_grid(args.alpha) if args.alpha else [None]
    norms = [s for s in args.norm.split(";") if s]
    points = []
    for kind in kinds:
        for n in ns:
            for a in as_:
                for p in ps:
                    for al in (alphas if kind == "gn" else [None]):
                        for nt in norms:
                            points.append((kind, n, args.m, a, p, al, nt))
    points.sort(key=lambda t: (t[0], t[1], t[2], t[3], t[4], -1 if t[5] is None else t[5], t[6]))
    return pool_map(_constant_row, points), EXIT_OK


def cmd_verify(args) -> tuple[list, int]:
    names = [s for s in S.SUITES if s != "mc"] if args.suite == "all" else [args.suite]
    if args.suite == "all" or args.suite == "mc":
        names = names + (["mc"] if "mc" not in names else [])
    if args.suite == "gn" and args.alpha is not None:
        alphas = parse_grid(args.alpha)
        if any(al == 1.0 for al in alphas):
            raise UsageError("alpha = 1 is excluded from the GN family")
        if any(not al > 0 for al in alphas):
            raise UsageError("alpha must be positive")
        rows = _verify_gn_alphas(alphas, args)
    else:
        rows = []
        for name in names:
            rows.extend(S.run_suite(name, quick=args.quick, seed=args.seed,
                                    mc_samples=args.mc_samples))
    code = EXIT_OK if all(r.get("pass") for r in rows) else EXIT_FAIL
    return rows, code


def _verify_gn_alphas(alphas, args):
    from . import verify as V

    rows = []
    for dom, p in S.grid_domains(args.quick):
        crit = dom.n_a / (dom.n_a - p)
        for al in alphas:
            rec = S._case(dom, p=p, alpha=al, check="extremal", suite="gn")
            if not al <= crit + 1e-15:
                rec.update(status="parameter-error", message=f"alpha above {crit:g}",
                           **{"pass": True})
            else:
                rep = V.gn_quotients(dom, p, al, E.gn_extremal(dom, p, al))
                rec.update(status="ok", deficit=rep.deficit,
                           **{"pass": abs(rep.deficit) <= S.GN_TOL})
            rows.append(rec)
    return rows


def _domain_from_args(args):
    try:
        norm = parse_norm(args.norm, dim=args.n)
        return WeightedDomain(args.n, (args.a,) * args.m, norm)
    except SharpIneqError as exc:
        raise UsageError(str(exc)) from None


def cmd_optimize(args) -> tuple[list, int]:
    from .optimize import gaussian_init, minimize_quotient, smoothed_indicator

    dom = _domain_from_args(args)
    params = {"p": args.p}
    if args.objective == "gn":
        if args.alpha is None:
            raise UsageError("--alpha is required for the gn objective")
        alpha = float(Fraction(args.alpha))
        if alpha == 1.0:
            raise UsageError("alpha = 1 is excluded from the GN family")
        params["alpha"] = alpha
    inits = {"gaussian": gaussian_init(), "indicator": smoothed_indicator()}
    if args.init == "extremal":
        init = (E.sobolev_extremal(dom, args.p) if args.objective == "sobolev"
                else E.gn_extremal(dom, args.p, params["alpha"]))
    else:
        init = inits[args.init]
    run = minimize_quotient(dom, args.objective, params, init, budget=args.budget,
                            restarts=args.restarts, seed=args.seed)
    rec = run.to_record()
    rec["sound"] = run.relative_gap >= -1e-6
    rec["pass"] = rec["sound"]
    return [rec], EXIT_OK if rec["sound"] else EXIT_FAIL


def _profile(kind, dom, p, alpha, scale):
    if kind == "sobolev":
        return E.sobolev_extremal(dom, p)
    if kind == "gn":
        return E.gn_extremal(dom, p, alpha)
    if kind == "logsob":
        return E.logsob_extremal(dom, p, scale)
    raise UsageError(f"unknown profile kind {kind!r}")


def cmd_transport(args) -> tuple[list, int]:
    dom = _domain_from_args(args)
    rng = np.random.default_rng(args.seed)
    if args.source == "random":
        F = S.random_profile(dom, rng, 1.0, 0.0, compact=True)
    else:
        F = T.power_of(_profile(args.source, dom, args.p, args.alpha, 1.0),
                       dom.n_a * args.p / (dom.n_a - args.p)).with_constraint(dom, 1.0).normalized()
    G = S.random_profile(dom, rng, 1.0, 0.0, compact=True) if args.target == "random" else F
    gamma = float(Fraction(args.gamma)) if args.gamma else 1.0 - 1.0 / dom.n_a
    try:
        tm = T.radial_brenier(dom, F, G)
        out = T.transport_inequality_check(dom, gamma, F, G, tmap=tm)
    except SharpIneqError as exc:
        raise UsageError(str(exc)) from None
    levels, rf, rg, s = tm.quantiles(args.samples)
    rows = [{"record": "psi", "mass": float(m), "r": float(a), "psi": float(b),
             "target_quantile": float(c)} for m, a, b, c in zip(levels, rf, s, rg)]
    rows.append({"record": "inequality", "gamma": gamma, "lhs": out["lhs"], "rhs": out["rhs"],
                 "gap": out["gap"], "slack_integral": out["slack_integral"],
                 "boundary_term": out["boundary_term"], "mass_residual": out["mass_residual"],
                 "pass": out["gap"] >= -args.tol})
    return rows, EXIT_OK if out["gap"] >= -args.tol else EXIT_FAIL


def cmd_plotdata(args) -> tuple[list, int]:
    from . import verify as V

    dom = _domain_from_args(args)
    rows = []
    if args.kind == "extremal-profiles":
        r = np.geomspace(1e-3, 50.0, args.samples)
        profiles = [("sobolev", E.sobolev_extremal(dom, args.p))]
        if args.alpha is not None:
            profiles.append(("gn", E.gn_extremal(dom, args.p, args.alpha)))
        profiles.append(("logsob", E.logsob_extremal(dom, args.p)))
        for name, prof in profiles:
            h = np.atleast_1d(prof.f(r))
            rows.extend({"profile": name, "r": float(x), "h": float(y)} for x, y in zip(r, h))
    elif args.kind == "deficit-vs-perturbation":
        h = E.sobolev_extremal(dom, args.p)
        for amp in np.linspace(-0.5, 0.5, args.samples):
            prof = E.perturb(h, (1.0, 0.5, float(amp) * float(h.f(1.0))))
            rows.append({"amplitude": float(amp),
                         "deficit": V.sobolev_quotient(dom, args.p, prof).deficit})
    elif args.kind == "tensorization-convergence":
        ks = sorted(set(np.unique(np.geomspace(1, args.k_max, args.samples).astype(int))))
        out = V.tensorization_limit(dom.n, dom.a[0] if dom.a else None, args.p, 0,
                                    norm=dom.norm, ks=ks)
        rows = [{"k": row["k"], "c_k": row["c_k"], "limit": row["limit"],
                 "rel_gap": row["rel_gap"]} for row in out["rows"]]
    elif args.kind == "transport-map":
        rng = np.random.default_rng(args.seed)
        F = S.random_profile(dom, rng, 1.0, 0.0, compact=True)
        G = S.random_profile(dom, rng, 1.0, 0.0, compact=True)
        tm = T.radial_brenier(dom, F, G)
        r = np.linspace(0.0, F.support_radius, args.samples)
        rows = [{"r": float(a), "psi": float(b)} for a, b in zip(r, np.atleast_1d(tm.psi(r)))]
    else:
        raise UsageError(f"unknown plot kind {args.kind!r}")
    return rows, EXIT_OK


COMMANDS = {"constants": cmd_constants, "verify": cmd_verify, "optimize": cmd_optimize,
            "transport": cmd_transport, "plotdata": cmd_plotdata}


# -- parser ---------------------------------------------------------------------------

def _common(sp):
    sp.add_argument("--tol", type=float, default=1e-8, help="pass/fail tolerance")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--mc-samples", type=int, default=None, dest="mc_samples")
    sp.add_argument("--out", default="-", help="output file (default stdout)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")


def _domain_args(sp, p_default=2.0):
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--m", type=int, default=1, choices=(0, 1))
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--p", type=float, default=p_default)
    sp.add_argument("--norm", default="lq:2")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="sharpineq", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("constants", help="tables of sharp constants")
    sp.add_argument("--kind", choices=KINDS + ("all",), default="sobolev")
    sp.add_argument("--n", default="1..3")
    sp.add_argument("--m", type=int, default=1, choices=(0, 1))
    sp.add_argument("--a", default="0")
    sp.add_argument("--p", default="2")
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--norm", default="lq:2", help="one or more norms separated by ';'")
    _common(sp)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", choices=S.SUITES + ("all",))
    sp.add_argument("--quick", action="store_true")
    sp.add_argument("--alpha", default=None, help="gn suite only: alpha grid")
    _common(sp)

    sp = sub.add_parser("optimize", help="minimise a quotient over spline profiles")
    sp.add_argument("--objective", choices=("sobolev", "gn"), default="sobolev")
    sp.add_argument("--alpha", default=None)
    sp.add_argument("--init", choices=("gaussian", "indicator", "extremal"), default="gaussian")
    sp.add_argument("--budget", type=int, default=5000)
    sp.add_argument("--restarts", type=int, default=3)
    _domain_args(sp)
    _common(sp)

    sp = sub.add_parser("transport", help="radial transport map and the transport inequality")
    sp.add_argument("--source", choices=("random", "sobolev", "gn"), default="random")
    sp.add_argument("--target", choices=("random", "same"), default="random")
    sp.add_argument("--gamma", default=None)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--samples", type=int, default=20)
    _domain_args(sp)
    _common(sp)

    sp = sub.add_parser("plotdata", help="long-format CSV for plots")
    sp.add_argument("kind", choices=PLOT_KINDS)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--k-max", type=int, default=1000, dest="k_max")
    _domain_args(sp)
    _common(sp)

    sp = sub.add_parser("replay", help="re-run an output's manifest and compare")
    sp.add_argument("path")
    sp.add_argument("--out", default=None, help="write the regenerated output here")
    return ap


def _manifest_params(args) -> dict:
    skip = {"command", "out", "format", "seed", "tol", "func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def execute(args, argv) -> tuple[str, int, RunManifest]:
    t0 = time.perf_counter()
    rows, code = COMMANDS[args.command](args)
    man = RunManifest(args.command, _manifest_params(args), args.seed,
                      {"tol": args.tol}, wall_time=time.perf_counter() - t0, argv=list(argv))
    man.params["format"] = args.format
    return render(man, rows, args.format), code, man


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def replay(path: str, out: str | None) -> int:
    manifest, old_records, fmt = read_output(path)
    argv = manifest.get("argv") or []
    args = build_parser().parse_args(argv)
    text, _, _ = execute(args, argv)
    if out:
        _write(text, out)
    new_records = text.partition("\n")[2] if fmt == "csv" else \
        render_records(json.loads(text)["records"], "json")
    same = new_records == old_records
    sys.stderr.write(("identical" if same else "MISMATCH") + f": {path}\n")
    return EXIT_OK if same else EXIT_FAIL


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "replay":
            return replay(args.path, args.out)
        text, code, _ = execute(args, argv)
        _write(text, args.out)
        return code
    except (UsageError, SharpIneqError) as exc:
        sys.stderr.write(f"sharpineq: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:   # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
