"""Command-line front end.

::

    bilintang gen --family msd --n 1000 --out runs/msd
    bilintang reduce --system runs/msd --framework SttInt --a -4 --b 4 --count 6 \\
        --side right --out runs/msd_stt
    bilintang verify --system runs/msd --reduced runs/msd_stt
    bilintang simulate --system runs/msd_stt --signal msd_paper --tf 1 --dt 1e-4 --out y.csv
    bilintang sweep --system runs/msd --reduced runs/msd_stt --out runs/sweep
    bilintang report --system runs/msd --reduced runs/msd_stt --signal msd_paper

Every subcommand accepts ``--config FILE`` with TOML key/value pairs named
like the long options (``t_f = 1.0``); explicit flags win over the file.

Exit codes: 0 success, 1 verification failures, 2 invalid input (for
example an unknown family), 3 singular ``K`` at an interpolation point,
4 mismatched ``m``/``p`` between bundles.
"""

from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

import numpy as np

from . import io
from .bench import FAMILIES, make_family
from .recipes import RECIPES, logspace_point_sets, recipe_spec
from .rom import ReducedModel, project
from .simulate import SIGNALS, SimulationError, named_signal, simulate
from .subspaces import FRAMEWORKS, SIDES, EmptyBasisError, InterpolationSpec, assemble_bases
from .transfer import SingularPointError
from .verify import check_conditions, error_metrics, grid_errors, reports_table, reports_to_json, summarize

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SINGULAR, EXIT_MISMATCH = 0, 1, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# parser

def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bilintang", description=__doc__.split("\n\n")[0])
    p.add_argument("--threads", type=int, default=None, help="cap BLAS/LAPACK threads")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, help="TOML file with default option values")
        return sp

    g = add("gen", "write a benchmark system bundle")
    g.add_argument("--family", help=f"one of {', '.join(FAMILIES)}")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--out", type=Path)

    r = add("reduce", "build bases and project a system bundle")
    r.add_argument("--system", type=Path)
    r.add_argument("--out", type=Path)
    r.add_argument("--framework", choices=FRAMEWORKS)
    r.add_argument("--recipe", choices=sorted(RECIPES),
                   help="use the experiment recipe of a family (overrides point options)")
    r.add_argument("--a", type=float, help="lower decade of logspace")
    r.add_argument("--b", type=float, help="upper decade of logspace")
    r.add_argument("--count", type=int, help="number of logspace frequencies")
    r.add_argument("--conjugate-pairs", dest="conjugate_pairs", action=argparse.BooleanOptionalAction,
                   default=None, help="add -i*w for every +i*w (default on)")
    r.add_argument("--levels", type=int, help="levels k (default 2)")
    r.add_argument("--orders", type=_ints, help="derivative orders per level, e.g. 1,0")
    r.add_argument("--scalings", type=_floats,
                   help="General framework: one scaling vector d, reused for every level")
    r.add_argument("--side", choices=SIDES, help="both (two-sided) or one-sided right/left")
    r.add_argument("--one-sided", dest="one_sided", action="store_true", default=None,
                   help="shorthand for --side right")
    r.add_argument("--seed", type=int)
    r.add_argument("--tol", type=float, help="rank truncation tolerance")
    r.add_argument("--max-order", dest="max_order", type=int)

    v = add("verify", "check interpolation conditions of a reduced bundle")
    v.add_argument("--system", type=Path)
    v.add_argument("--reduced", type=Path)
    v.add_argument("--tol", type=float)
    v.add_argument("--seed", type=int)
    v.add_argument("--json", type=Path, help="write the JSON report here")

    s = add("simulate", "simulate a bundle and write a trajectory CSV")
    s.add_argument("--system", type=Path)
    s.add_argument("--signal", help=f"one of {', '.join(SIGNALS)}")
    s.add_argument("--t_f", "--tf", dest="t_f", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--out", type=Path)

    w = add("sweep", "write G1/G2 relative error grids as CSV")
    w.add_argument("--system", type=Path)
    w.add_argument("--reduced", type=Path)
    w.add_argument("--out", type=Path)
    w.add_argument("--a", type=float)
    w.add_argument("--b", type=float)
    w.add_argument("--n1", type=int, help="G1 grid size")
    w.add_argument("--n2", type=int, help="G2 grid size per axis (0 skips G2)")

    e = add("report", "error summary of a reduced bundle")
    e.add_argument("--system", type=Path)
    e.add_argument("--reduced", type=Path)
    e.add_argument("--signal")
    e.add_argument("--t_f", "--tf", dest="t_f", type=float)
    e.add_argument("--dt", type=float)
    e.add_argument("--n1", type=int)
    e.add_argument("--n2", type=int)
    e.add_argument("--out", type=Path, help="write the JSON summary here")
    return p


DEFAULTS = {
    "gen": {"family": None, "n": None, "m": None, "p": None, "out": None},
    "reduce": {"framework": "SttInt", "recipe": None, "a": -4.0, "b": 4.0, "count": 6,
               "conjugate_pairs": True, "levels": 2, "orders": None, "scalings": None,
               "side": "right", "one_sided": False, "seed": 0, "tol": 1e-10, "max_order": None},
    "verify": {"tol": 1e-8, "seed": 0, "json": None},
    "simulate": {"signal": "step", "t_f": 1.0, "dt": 1e-3, "out": None},
    "sweep": {"a": -4.0, "b": 4.0, "n1": 100, "n2": 50},
    "report": {"signal": "step", "t_f": 1.0, "dt": 1e-3, "n1": 100, "n2": 0, "out": None},
}
_PATHS = {"out", "system", "reduced", "json", "config"}
_CONVERT = {"orders": _ints, "scalings": _floats}


def _resolve(args) -> argparse.Namespace:
    """Merge defaults < config file < explicit flags."""
    merged = dict(DEFAULTS.get(args.command, {}))
    if getattr(args, "config", None) is not None:
        try:
            data = tomllib.loads(Path(args.config).read_text())
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise CLIError(f"cannot read config {args.config}: {exc}") from None
        for key, val in data.items():
            key = key.replace("-", "_")
            if key not in vars(args):
                raise CLIError(f"unknown config key {key!r} for '{args.command}'")
            if key in _PATHS:
                val = Path(val)
            elif key in _CONVERT and not isinstance(val, (list, tuple)):
                val = _CONVERT[key](val)
            elif isinstance(val, list):
                val = tuple(val)
            merged[key] = val
    for key, val in vars(args).items():
        if val is not None:
            merged[key] = val
        else:
            merged.setdefault(key, None)
    return argparse.Namespace(**merged)


def _require(ns, *names):
    missing = [n for n in names if getattr(ns, n, None) is None]
    if missing:
        raise CLIError("missing required option(s): " + ", ".join("--" + n for n in missing))


# ---------------------------------------------------------------------------
# commands

def _load(path):
    try:
        return io.load_system(path)
    except FileNotFoundError:
        raise CLIError(f"no system bundle at {path}") from None


def _load_reduced(sys, path):
    """Reduced bundle as a ReducedModel when bases are stored, else a system."""
    red = _load(path)
    if red.m != sys.m or red.p != sys.p:
        raise CLIError(f"bundles disagree: full (m, p) = ({sys.m}, {sys.p}), "
                       f"reduced (m, p) = ({red.m}, {red.p})", EXIT_MISMATCH)
    bases_dir = Path(path) / "bases"
    if (bases_dir / "provenance.json").exists():
        return ReducedModel(red, io.load_bases(bases_dir), sys.dims)
    return red


def cmd_gen(ns) -> int:
    _require(ns, "family", "out")
    if ns.family not in FAMILIES:
        raise CLIError(f"unknown family {ns.family!r}; valid families: {', '.join(FAMILIES)}")
    try:
        sys = make_family(ns.family, ns.n, ns.m, ns.p)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    io.save_system(sys, ns.out)
    n, m, p = sys.dims
    print(f"family={ns.family} n={n} m={m} p={p} matrices={len(sys.coefficient_matrices())} out={ns.out}")
    return EXIT_OK


def build_spec(ns, m, p) -> InterpolationSpec:
    """Interpolation spec from resolved reduce options."""
    if ns.recipe is not None:
        return recipe_spec(ns.recipe, ns.framework, m, p, seed=ns.seed)
    if ns.count < 1:
        raise CLIError("count must be at least 1")
    if ns.a > ns.b:
        raise CLIError(f"interval endpoints must satisfy a <= b, got {ns.a} > {ns.b}")
    side = "right" if ns.one_sided else ns.side
    k = ns.levels
    orders = ns.orders
    if orders is not None and len(orders) != k:
        raise CLIError(f"--orders needs {k} entries")
    scalings = None
    if ns.framework == "General":
        d = np.ones(m) if ns.scalings is None else np.asarray(ns.scalings, dtype=float)
        if d.size != m:
            raise CLIError(f"--scalings needs {m} entries")
        scalings = (d,) * (k - 1)
    sets = logspace_point_sets(ns.a, ns.b, ns.count, m, p, k=k,
                               conjugate_pairs=ns.conjugate_pairs, seed=ns.seed,
                               orders=orders, scalings=scalings)
    return InterpolationSpec(sets, ns.framework, side, tol=ns.tol, max_order=ns.max_order)


def cmd_reduce(ns) -> int:
    _require(ns, "system", "out")
    sys = _load(ns.system)
    try:
        spec = build_spec(ns, sys.m, sys.p)
    except ValueError as exc:
        raise CLIError(str(exc)) from None
    try:
        bases = assemble_bases(sys, spec)
    except EmptyBasisError as exc:
        raise CLIError(str(exc)) from None
    rom = project(sys, bases)
    out = Path(ns.out)
    io.save_system(rom.system, out)
    io.save_bases(bases, out / "bases")
    io.write_json(out / "spec.json", spec.to_dict())
    info = bases.info
    widths = " ".join(f"{k}={info[k]}" for k in sorted(info) if k.startswith(("raw_width", "rank")))
    print(f"framework={spec.framework} side={spec.side} sets={len(spec.point_sets)} {widths} r={rom.r}")
    return EXIT_OK


def cmd_verify(ns) -> int:
    _require(ns, "system", "reduced")
    sys = _load(ns.system)
    rom = _load_reduced(sys, ns.reduced)
    spec_file = Path(ns.reduced) / "spec.json"
    if not spec_file.exists():
        raise CLIError(f"{spec_file} not found; verify needs a bundle written by 'reduce'")
    spec = InterpolationSpec.from_dict(io.read_json(spec_file))
    reports = check_conditions(sys, rom, spec, tol=ns.tol, seed=ns.seed)
    if ns.json is not None:
        Path(ns.json).write_text(reports_to_json(reports))
    print(reports_table(reports))
    counts = summarize(reports)
    print(" ".join(f"{k}={v}" for k, v in counts.items()))
    return EXIT_OK if counts["fail"] == 0 else EXIT_FAIL


def _signal(name, m):
    try:
        return named_signal(name, m)
    except ValueError as exc:
        raise CLIError(str(exc)) from None


def cmd_simulate(ns) -> int:
    _require(ns, "system", "out")
    sys = _load(ns.system)
    try:
        traj = simulate(sys, _signal(ns.signal, sys.m), ns.t_f, ns.dt)
    except SimulationError as exc:
        raise CLIError(str(exc)) from None
    io.write_trajectory_csv(ns.out, traj)
    print(f"signal={ns.signal} steps={traj.times.size - 1} dt={traj.times[1]:.6g} out={ns.out}")
    return EXIT_OK


def cmd_sweep(ns) -> int:
    _require(ns, "system", "reduced", "out")
    sys = _load(ns.system)
    rom = _load_reduced(sys, ns.reduced)
    w1 = np.logspace(ns.a, ns.b, ns.n1)
    w2 = np.logspace(ns.a, ns.b, ns.n2) if ns.n2 else None
    ge = grid_errors(sys, rom, w1, w2, second=bool(ns.n2))
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_grid_csv(out / "g1.csv", ge.w1, None, ge.err_g1)
    line = f"err_G1={ge.max_g1:.6e}"
    if ge.err_g2 is not None:
        io.write_grid_csv(out / "g2.csv", ge.w2, ge.w2, ge.err_g2)
        line += f" err_G2={ge.max_g2:.6e}"
    print(line)
    return EXIT_OK


def cmd_report(ns) -> int:
    _require(ns, "system", "reduced")
    sys = _load(ns.system)
    rom = _load_reduced(sys, ns.reduced)
    red_sys = getattr(rom, "system", rom)
    u = _signal(ns.signal, sys.m)
    try:
        full = simulate(sys, u, ns.t_f, ns.dt)
        red = simulate(red_sys, u, ns.t_f, ns.dt)
        err_sim = error_metrics(full, red)["err_sim"]
    except (SimulationError, ValueError) as exc:
        raise CLIError(str(exc)) from None
    w2 = np.logspace(-4, 4, ns.n2) if ns.n2 else None
    ge = grid_errors(sys, rom, np.logspace(-4, 4, ns.n1), w2, second=bool(ns.n2))
    summary = {"n": sys.n, "r": red_sys.n, "signal": ns.signal, "t_f": ns.t_f, "dt": ns.dt,
               "err_sim": err_sim, "err_G1": ge.max_g1,
               "err_G2": None if ge.err_g2 is None else ge.max_g2}
    if ns.out is not None:
        io.write_json(ns.out, summary)
    print(" ".join(f"{k}={v:.6e}" if isinstance(v, float) else f"{k}={v}" for k, v in summary.items()))
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "reduce": cmd_reduce, "verify": cmd_verify,
            "simulate": cmd_simulate, "sweep": cmd_sweep, "report": cmd_report}


def _limit_threads(n):
    # the compiled kernels are serial; BLAS/LAPACK pools are the only parallelism
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        ns = _resolve(args)
        if ns.threads is not None:
            if ns.threads < 1:
                raise CLIError("--threads must be positive")
            with _limit_threads(ns.threads):
                return COMMANDS[ns.command](ns)
        return COMMANDS[ns.command](ns)
    except CLIError as exc:
        print(f"bilintang: error: {exc}", file=_sys.stderr)
        return exc.code
    except SingularPointError as exc:
        print(f"bilintang: error: {exc}", file=_sys.stderr)
        return EXIT_SINGULAR


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
