"""Command-line entry point: ``epdkit <command> [options]``.

Every command writes its artifacts (JSON, CSV and, with --figures, PNG) into
--out and prints the JSON summary to stdout. Exit status: 0 success, 1 a
residual exceeded --tol or a solver failed, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import critical, darios, epd, hamiltonian, hydro
from .errors import ConfigError, EPDError
from .report import ResidualReport, dumps, empirical_order, fmt
from .spec import FlowLabel, gaussian_density, load_spec, spec_to_dict, with_coefficient

EXIT_OK, EXIT_TOL, EXIT_CONFIG = 0, 1, 2


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("EPD_THREADS", "1")))
    except ValueError:
        raise ConfigError("EPD_THREADS must be an integer") from None


def pmap(fn, items):
    """Ordered map, threaded up to EPD_THREADS workers."""
    n = _threads()
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def parse_complex(text: str) -> complex:
    try:
        if "," in text:
            re_, im = text.split(",")
            return complex(float(re_), float(im))
        return complex(text.replace("i", "j"))
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def parse_axis(text: str):
    """'lo:hi:n' -> numpy array."""
    try:
        lo, hi, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return np.linspace(float(lo), float(hi), n)
    except ValueError:
        raise ConfigError(f"axis must be lo:hi:n, got {text!r}") from None


def parse_grid(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError("grid must be 'lo:hi:n,lo:hi:n'")
    return parse_axis(parts[0]), parse_axis(parts[1])


def _jet_kw(args):
    return {"nodes": args.nodes} if args.nodes else {}


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _emit(args, name: str, payload: dict) -> None:
    text = dumps(payload)
    (_out(args) / f"{name}.json").write_text(text + "\n")
    print(text)


def _require_spec(args):
    if not args.spec:
        raise ConfigError("--spec is required for this command")
    return load_spec(args.spec)


def _complex_grid(args, default="-2:2:41,0.1:3:41"):
    xs, ys = parse_grid(args.grid or default)
    if ys.min() <= 0:
        raise ConfigError("the imaginary axis of the grid must stay above 0")
    return xs, ys


# --- commands -------------------------------------------------------------------


def cmd_evaluate(args) -> int:
    spec = _require_spec(args)
    xs, ys = _complex_grid(args, "-2:2:21,0.2:2:19")
    kw = _jet_kw(args)
    pts = [complex(x, y) for y in ys for x in xs]
    jets = pmap(lambda z: epd.eval_jet(spec, z, z.conjugate(), **kw), pts)
    rel = []
    with open(_out(args) / "evaluate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_z", "im_z", "re_w", "im_w", "re_wz", "im_wz", "epd_residual"])
        for z, J in zip(pts, jets):
            r = abs(epd.epd_residual(J, z, z.conjugate())) / max(J.grad_norm, 1e-300)
            rel.append(r)
            w.writerow([fmt(z.real), fmt(z.imag), fmt(J.w.real), fmt(J.w.imag),
                        fmt(J.wz.real), fmt(J.wz.imag), fmt(r)])
    rep = ResidualReport.from_values("epd", rel, (len(xs), len(ys)), float("nan"))
    if args.figures:
        from . import plotting
        X, Y = np.meshgrid(xs, ys)
        Z = np.array([J.w.real for J in jets]).reshape(len(ys), len(xs))
        plotting.field_map(X, Y, Z, _out(args) / "evaluate.png", "Re W", "Re W")
    _emit(args, "evaluate", {"spec": spec_to_dict(spec), "report": rep.to_dict()})
    return EXIT_OK if rep.ok(args.tol) else EXIT_TOL


def cmd_critical(args) -> int:
    spec = _require_spec(args)
    guess = parse_complex(args.guess)
    cp = critical.find_critical(spec, guess, allow_degenerate=True, **_jet_kw(args))
    out = {
        "beta": cp.beta, "betabar": cp.betabar, "wbb": cp.wbb, "wbbb": cp.wbbb,
        "wbmix": cp.wbmix, "order": cp.order, "iterations": cp.iterations,
        "residual": cp.residual, "mode": cp.mode,
        "clinants": list(critical.clinants(cp)),
        "tangent_angles": list(critical.tangent_angles(cp)),
    }
    if args.figures:
        from . import plotting
        r = max(0.5, 0.5 * cp.beta.imag)
        xs = np.linspace(cp.beta.real - r, cp.beta.real + r, 61)
        ys = np.linspace(max(cp.beta.imag - r, 0.05 * cp.beta.imag), cp.beta.imag + r, 61)
        X, Y = np.meshgrid(xs, ys)
        Z = np.array([[epd.eval_value(spec, complex(x, y), complex(x, -y), **_jet_kw(args)).real
                       for x in xs] for y in ys])
        plotting.field_map(X, Y, Z, _out(args) / "critical.png", "level curves of Re W", "Re W", cp.beta)
    _emit(args, "critical", out)
    return EXIT_OK


def cmd_evolve(args) -> int:
    spec = _require_spec(args)
    if args.flow == "dtoda":
        labels = [FlowLabel("monomial-x", 1), FlowLabel("monomial-y", 0)]
    else:
        if not args.labels:
            raise ConfigError("--labels k,l is required unless --flow dtoda")
        labels = [FlowLabel.parse(s) for s in args.labels.split(",")]
        if len(labels) != 2:
            raise ConfigError("--labels needs exactly two flow labels")
    if not args.grid:
        raise ConfigError("--grid lo:hi:n,lo:hi:n is required (one axis per label)")
    axes = parse_grid(args.grid)
    guess = parse_complex(args.guess)
    kw = _jet_kw(args)
    s0 = with_coefficient(with_coefficient(spec, labels[0], axes[0][0]), labels[1], axes[1][0])
    seed = critical.find_critical(s0, guess, **kw)
    field = hydro.hodograph_solve(spec, labels, axes, seed, **kw)
    field.to_csv(_out(args) / "field.csv")
    reports = [hydro.pde_residual(field, labels[1], labels[0], **kw)]
    if args.flow == "dtoda":
        reports.append(hydro.dtoda_phi_residual(field))
    elif args.flow == "delta":
        reports.append(hydro.delta_flow_residual(field))
    if args.figures:
        from . import plotting
        plotting.grid_map(axes[0], axes[1], np.where(field.converged, field.beta.imag, np.nan),
                          _out(args) / "field.png", str(labels[1]), str(labels[0]), "Im beta", "Im beta")
    status = EXIT_OK if field.converged.all() and all(r.ok(args.tol) for r in reports) else EXIT_TOL
    _emit(args, "evolve", {"converged": int(field.converged.sum()), "nodes": int(field.converged.size),
                           "reports": [r.to_dict() for r in reports]})
    return status


def cmd_verify(args) -> int:
    ident = args.identity
    kw = _jet_kw(args)
    if ident in ("epd", "dual"):
        spec = _require_spec(args)
        xs, ys = _complex_grid(args, "-2:2:21,0.2:2:21")
        pts = [complex(x, y) for y in ys for x in xs]

        def one(z):
            J = epd.eval_jet(spec, z, z.conjugate(), **kw)
            if ident == "epd":
                return abs(epd.epd_residual(J, z, z.conjugate())) / max(J.grad_norm, 1e-300)
            Js = epd.dual_jet(J, z, z.conjugate())
            return abs(epd.epd_residual(Js, z, z.conjugate(), k=-0.5)) / max(Js.grad_norm, 1e-300)

        rep = ResidualReport.from_values(ident, pmap(one, pts), (len(xs), len(ys)))
    elif ident == "exactness":
        spec = _require_spec(args)
        if not args.labels:
            raise ConfigError("--labels is required for exactness")
        cp = critical.find_critical(spec, parse_complex(args.guess), **kw)
        labs = args.labels.split(",")
        steps = [args.step, args.step / 2]
        reps = [critical.exactness_check(spec, labs, cp, h, **kw) for h in steps]
        rep = reps[-1]
        if reps[0].max > 0 and reps[1].max > 0:
            rep.extra["order"] = float(empirical_order([r.max for r in reps], steps)[0])
    elif ident == "skew":
        s = hamiltonian.random_state(args.n, seed=args.seed)
        reps = [hamiltonian.skew_check(op, s, eps=0.1 if op == "J1eps" else None, seed=args.seed)
                for op in ("J0", "J1", "J1eps")]
        rep = ResidualReport("skew", max(r.max for r in reps), float(np.mean([r.mean for r in reps])),
                             (args.n,), reps[0].step)
    else:
        raise ConfigError(f"unknown identity {ident!r}")
    _emit(args, f"verify_{ident}", rep.to_dict())
    return EXIT_OK if rep.ok(args.tol) else EXIT_TOL


def cmd_dual(args) -> int:
    spec = _require_spec(args)
    kw = _jet_kw(args)
    z = parse_complex(args.point)
    val = epd.dual_value(spec, z, **kw)
    res = epd.dual_residual(spec, z, z.conjugate(), **kw)
    if args.figures:
        from . import plotting
        xs, ys = _complex_grid(args, "-1.5:1.5:25,0.3:2.5:25")
        X, Y = np.meshgrid(xs, ys)
        G = np.array([[epd.eval_value(spec, complex(x, y), complex(x, -y), **kw).real for x in xs] for y in ys])
        Gs = np.array([[epd.dual_value(spec, complex(x, y), **kw).real for x in xs] for y in ys])
        plotting.level_families(X, Y, G, Gs, _out(args) / "dual.png")
    _emit(args, "dual", {"point": z, "dual_value": val, "dual_residual": abs(res)})
    return EXIT_OK if abs(res) <= args.tol * max(1.0, abs(val)) else EXIT_TOL


def cmd_ham(args) -> int:
    if args.state:
        s = hamiltonian.FieldState.from_csv(args.state)
    else:
        s = hamiltonian.random_state(args.n, seed=args.seed)
    s.to_csv(_out(args) / "state.csv")
    skew = {op: hamiltonian.skew_check(op, s, eps=0.1 if op == "J1eps" else None, seed=args.seed).max
            for op in ("J0", "J1", "J1eps")}
    cas = {op: float(np.max(np.abs(hamiltonian.apply(op, hamiltonian.grad(hamiltonian.CasimirU, s), s))))
           for op in ("J0", "J1")}
    eps = np.array([0.1, 0.05, 0.025, 0.0125])
    ref, errs, orders = hamiltonian.limit_flow(s, eps)
    f = hamiltonian.apply("J0", hamiltonian.grad(hamiltonian.H1Toda, s), s)
    toda = float(max(np.abs(f[0] - ref[0]).max(), np.abs(f[1] - ref[1]).max()))
    if args.figures:
        from . import plotting
        plotting.convergence(eps, errs, _out(args) / "limit_flow.png", "J1^eps limit", "eps", 1.0)
    ok = max(skew.values()) <= 1e-10 and max(cas.values()) <= 1e-12 and toda <= 1e-12 \
        and np.all(np.abs(orders - 1) <= 0.1)
    _emit(args, "ham", {"skew": skew, "casimir": cas, "limit_errors": errs, "limit_orders": orders,
                        "toda_flow_mismatch": toda})
    return EXIT_OK if ok else EXIT_TOL


def _density_arg(text):
    if not text:
        return None
    try:
        terms = json.loads(text)
    except json.JSONDecodeError:
        raise ConfigError(f"density must be a JSON list of [amp, center, width], got {text!r}") from None
    return gaussian_density(terms)


def cmd_darios(args) -> int:
    if args.densities:
        phi, psi, support = darios.read_densities(args.densities)
    else:
        phi, psi = _density_arg(args.phi), _density_arg(args.psi)
        if phi is None and psi is None:
            raise ConfigError("give --densities CSV or --phi/--psi gaussian terms")
        support = tuple(float(v) for v in args.support.split(":"))
    if not args.grid:
        raise ConfigError("--grid t_lo:t_hi:n,x_lo:x_hi:n is required")
    ts, xs = parse_grid(args.grid)
    seed = parse_complex(args.guess) if args.guess else None
    K, tau, ok = darios.solve_hodograph_darios(phi, psi, support, xs, ts, args.flow, seed, **_jet_kw(args))
    darios.write_history(_out(args) / "history.csv", ts, xs, K, tau)
    rep = darios.flow_residual(K, tau, xs, ts, args.flow, ok)
    if args.figures:
        from . import plotting
        plotting.filament(xs, ts, K, tau, _out(args) / "history.png")
    _emit(args, "darios", {"flow": args.flow, "converged": int(ok.sum()), "nodes": int(ok.size),
                           "report": rep.to_dict()})
    return EXIT_OK if ok.all() and rep.ok(args.tol) else EXIT_TOL


COMMANDS = {
    "evaluate": cmd_evaluate,
    "critical": cmd_critical,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
    "dual": cmd_dual,
    "ham": cmd_ham,
    "darios": cmd_darios,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="solution spec: inline JSON or a path to a JSON file")
    common.add_argument("--grid", help="two axes 'lo:hi:n,lo:hi:n' (meaning depends on the command)")
    common.add_argument("--tol", type=float, default=1e-9, help="residual tolerance for exit status 0")
    common.add_argument("--out", default="epd_out", help="directory for artifacts")
    common.add_argument("--nodes", type=int, default=None, help="quadrature nodes override")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--figures", action="store_true", help="also write PNG figures")

    p = argparse.ArgumentParser(prog="epdkit", description=__doc__.splitlines()[0],
                                epilog="EPD_THREADS caps worker threads for grid evaluations.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("evaluate", parents=[common], help="W and EPD residual on a grid of z")
    c = sub.add_parser("critical", parents=[common], help="locate a critical point")
    c.add_argument("--guess", default="0,1", help="starting point 're,im'")
    e = sub.add_parser("evolve", parents=[common], help="hodograph field over two coefficients")
    e.add_argument("--labels", help="two flow labels 'family:k,family:l' (grid axes in that order)")
    e.add_argument("--flow", choices=["pair", "dtoda", "delta"], default="pair")
    e.add_argument("--guess", default="0,1")
    v = sub.add_parser("verify", parents=[common], help="check an identity and report residuals")
    v.add_argument("--identity", choices=["epd", "dual", "exactness", "skew"], default="epd")
    v.add_argument("--labels")
    v.add_argument("--guess", default="0,1")
    v.add_argument("--step", type=float, default=1e-2)
    v.add_argument("--n", type=int, default=64)
    d = sub.add_parser("dual", parents=[common], help="dual function W* at a point")
    d.add_argument("--point", default="0.5,1")
    h = sub.add_parser("ham", parents=[common], help="Poisson-operator diagnostics")
    h.add_argument("--state", help="CSV with columns x, rho, u")
    h.add_argument("--n", type=int, default=64)
    r = sub.add_parser("darios", parents=[common], help="filament history from densities")
    r.add_argument("--densities", help="CSV with columns lam, phi, psi")
    r.add_argument("--phi", help="JSON list of gaussian terms [[amp, center, width], ...]")
    r.add_argument("--psi")
    r.add_argument("--support", default="-5:5")
    r.add_argument("--flow", choices=sorted(darios.FLOW_TIMES), default="DaRios")
    r.add_argument("--guess")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.tol <= 0:
            raise ConfigError("--tol must be positive")
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EPDError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TOL


if __name__ == "__main__":
    sys.exit(main())
