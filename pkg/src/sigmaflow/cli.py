"""Command-line orchestration: flat key-value config parsing and the
run / check-cone / selftest / functional commands.

Config format: one `key = value` per line, `#` comments.  Keys:

    n, k, N          problem dimensions and grid resolution
    mode             plain (default) | augmented
    b                comma list of positive reals (augmented eigenvalues)
    alpha            alternative to b: sets b = (1/alpha,)
    G, H             matrix rows separated by ';', entries by ','
                     (entries parsed as Python complex, e.g. 1+0.5j)
    psi0             trig-mode sum shaping chi_0 = H + dd(psi0)
    perturb          trig-mode sum used as the initial potential phi_0
    active_axes      comma list of active real-axis indices (default: all)
    dt0, t_max, tol, log_every, theta, seed
    csv_out, json_out, snapshot_out     output paths for cmd_run

Trig-mode grammar: terms joined by '+', each term
`amp:trig:axis:wav` with extra factors appended as `*trig:axis:wav`,
e.g. `0.2:sin:0:1*cos:3:1` for 0.2 sin(2 pi x_1) cos(2 pi y_2).

Exit codes: 0 ok, 1 usage/data error, 2 non-converged / not-in-cone /
selftest failures.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np


def _limit_threads():
    threads = os.environ.get("SIGMAFLOW_THREADS")
    if not threads:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, threads)
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(threads))
    except ImportError:
        pass


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 2
    k: int = 1
    N: int = 16
    mode: str = "plain"
    b: tuple = ()
    alpha: float = None
    G: list = None
    H: list = None
    psi0: list = field(default_factory=list)
    perturb: list = field(default_factory=list)
    active_axes: tuple = None
    dt0: float = None
    t_max: float = 50.0
    tol: float = 1e-6
    log_every: int = 10
    theta: float = 0.1
    seed: int = 0
    csv_out: str = "run.csv"
    json_out: str = "report.json"
    snapshot_out: str = "phi.txt"


def _parse_matrix(value, lineno):
    try:
        return [[complex(e.strip()) for e in row.split(",")] for row in value.split(";")]
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad matrix entry: {exc}") from exc


def _parse_modes(value, lineno):
    """amp:trig:axis:wav[*trig:axis:wav...] terms joined by '+'."""
    terms = []
    for term in value.split("+"):
        term = term.strip()
        if not term:
            continue
        chunks = term.split("*")
        head = chunks[0].split(":")
        try:
            amp = float(head[0])
            factors = []
            if len(head) > 1:
                if len(head) != 4:
                    raise ValueError("expected amp:trig:axis:wav")
                factors.append((head[1], int(head[2]), int(head[3])))
            for chunk in chunks[1:]:
                trig, axis, wav = chunk.split(":")
                factors.append((trig, int(axis), int(wav)))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad mode term {term!r}: {exc}") from exc
        for trig, _, _ in factors:
            if trig not in ("sin", "cos"):
                raise ConfigError(f"line {lineno}: unknown trig factor {trig!r}")
        terms.append((amp, factors))
    return terms


def parse_config(path) -> RunConfig:
    cfg = RunConfig()
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key in ("n", "k", "N", "log_every", "seed"):
                setattr(cfg, key, int(value))
            elif key in ("dt0", "t_max", "tol", "theta", "alpha"):
                setattr(cfg, key, float(value))
            elif key == "mode":
                if value not in ("plain", "augmented"):
                    raise ValueError(f"unknown mode {value!r}")
                cfg.mode = value
            elif key == "b":
                cfg.b = tuple(float(x) for x in value.split(",") if x.strip())
            elif key == "active_axes":
                cfg.active_axes = tuple(int(x) for x in value.split(",") if x.strip())
            elif key in ("G", "H"):
                setattr(cfg, key, _parse_matrix(value, lineno))
            elif key in ("psi0", "perturb"):
                setattr(cfg, key, _parse_modes(value, lineno))
            elif key in ("csv_out", "json_out", "snapshot_out"):
                setattr(cfg, key, value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    if cfg.mode == "augmented" and not cfg.b:
        if cfg.alpha is None:
            raise ConfigError("augmented mode needs b or alpha")
        if cfg.alpha <= 0:
            raise ConfigError("alpha must be positive")
        cfg.b = (1.0 / cfg.alpha,)
    if cfg.mode == "plain":
        cfg.b = ()
    return cfg


def _background(cfg: RunConfig):
    from .geometry import BackgroundData, TorusGrid, build_field

    grid = TorusGrid(n=cfg.n, N=cfg.N, active=cfg.active_axes)
    G = np.eye(cfg.n) if cfg.G is None else np.array(cfg.G, dtype=complex)
    H = np.eye(cfg.n) if cfg.H is None else np.array(cfg.H, dtype=complex)
    psi0 = build_field(grid, cfg.psi0) if cfg.psi0 else None
    return BackgroundData(grid=grid, G=G, H=H, k=cfg.k, psi0=psi0, augment=cfg.b)


def _cone_report(bg, c_prime, chi=None):
    from .cone import cone_margin, cone_margin_augmented
    from .geometry import chi0_field

    if chi is None:
        chi = chi0_field(bg)
    if bg.augment:
        rep = cone_margin_augmented(chi, bg, bg.k, c_prime)
    else:
        rep = cone_margin(chi, bg, bg.k, c_prime)
    d = rep.to_dict()
    if math.isinf(d["margin"]):
        d["margin"] = None
    return d


def _out_path(path, out_dir):
    return os.path.join(out_dir, path) if out_dir else path


def cmd_run(config_path, out_dir=None) -> int:
    from .flow import FlowSolver
    from .geometry import build_field, save_snapshot

    cfg = parse_config(config_path)
    bg = _background(cfg)
    solver = FlowSolver(bg, strict=False)
    phi0 = build_field(bg.grid, cfg.perturb).values if cfg.perturb else None
    runlog, state, report = solver.run(
        t_max=cfg.t_max, tol=cfg.tol, log_every=cfg.log_every,
        dt0=cfg.dt0, phi0_values=phi0,
    )
    report["cone"] = _cone_report(bg, solver.c_prime, chi=state.chi)
    runlog.to_csv(_out_path(cfg.csv_out, out_dir))
    save_snapshot(_out_path(cfg.snapshot_out, out_dir), state.phi)
    with open(_out_path(cfg.json_out, out_dir), "w") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"converged={report['converged']} steps={report['steps']} "
          f"final_residual={report['final_residual']:.3e}")
    return 0 if report["converged"] else 2


def cmd_check_cone(config_path) -> int:
    from .flow import FlowSolver

    cfg = parse_config(config_path)
    bg = _background(cfg)
    solver = FlowSolver(bg, strict=False)
    rep = _cone_report(bg, solver.c_prime)
    margin = "inf" if rep["margin"] is None else f"{rep['margin']:.17g}"
    print(f"in_cone={rep['in_cone']} margin={margin}")
    return 0 if rep["in_cone"] else 2


def cmd_selftest(seed: int, trials: int, out=None, debug_tolerance=None) -> int:
    from . import verify

    if debug_tolerance is not None:
        verify.TOL = float(debug_tolerance)
    report = verify.run_property_suite(seed=seed, trials=trials)
    text = report.to_json()
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    for chk in report.checks:
        status = "ok" if chk.failures == 0 else "FAIL"
        print(f"{status:4s} {chk.name:22s} trials={chk.trials} "
              f"failures={chk.failures} worst={chk.worst_violation:.3e}")
    print(f"total failures: {report.failures}")
    return 0 if report.failures == 0 else 2


def cmd_functional(config_path, snapshot_path) -> int:
    from . import functionals
    from .geometry import chi_field, load_snapshot

    cfg = parse_config(config_path)
    bg = _background(cfg)
    phi = load_snapshot(snapshot_path)
    if phi.grid != bg.grid:
        raise ConfigError("snapshot grid does not match the config grid")
    chi = chi_field(bg, phi)
    n = bg.grid.n
    alpha = cfg.alpha if cfg.alpha is not None else 1.0
    out = {
        "F_j": [functionals.F_j(phi, j, bg, chi).value for j in range(n + 1)],
        "F_tilde": functionals.F_tilde(phi, n - bg.k, bg, chi),
        "F_tilde_alpha": functionals.F_tilde_alpha(phi, bg.k, alpha, bg),
        "mu_mass": functionals.mu_mass(phi, bg.k, bg, chi),
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    _limit_threads()
    parser = argparse.ArgumentParser(
        prog="sigmaflow",
        description="sigma_k-quotient metric flow laboratory on flat complex tori",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate the flow from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="directory for output files")

    p_cone = sub.add_parser("check-cone", help="evaluate the cone criterion for chi_0")
    p_cone.add_argument("--config", required=True)

    p_self = sub.add_parser("selftest", help="run the randomized property suite")
    p_self.add_argument("--seed", type=int, default=42)
    p_self.add_argument("--trials", type=int, default=10000)
    p_self.add_argument("--out", default=None, help="JSON report path")
    p_self.add_argument("--debug-tolerance", type=float, default=None,
                        help="override the pass tolerance (debugging aid)")

    p_fn = sub.add_parser("functional", help="evaluate functionals on a stored potential")
    p_fn.add_argument("--config", required=True)
    p_fn.add_argument("--snapshot", required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args.config, args.out)
        if args.command == "check-cone":
            return cmd_check_cone(args.config)
        if args.command == "selftest":
            return cmd_selftest(args.seed, args.trials, args.out, args.debug_tolerance)
        if args.command == "functional":
            return cmd_functional(args.config, args.snapshot)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
