"""Configuration parsing, on-disk artifact formats and the command line.

Artifacts:
  * snapshots: legacy-VTK-style structured-points text files holding the
    cell-centered scalars (rho, p, e), cell-averaged vectors (v, B) and the
    node divergence of B, written at full double precision;
  * diagnostics: comma-separated per-step series with a fixed header;
  * convergence tables: per-level, per-variable error norms and observed
    orders, also comma-separated;
  * Jacobian dumps: dense matrix text files for the stability probe.

The output directory is resolved as: SOLVER_OUT environment variable,
else the config's ``outdir``, else the current directory.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from . import driver
from .cases import CASE_NAMES, UnknownCaseError, get_spec, init_case, reference_state, stability_equilibrium
from .explicit import compute_dt
from .fields import EigenSet, Params, PositivityError, kinetic_energy_cell, magnetic_field_cell
from .grid import AXES, Location, StaggeredGrid
from .ops import div_e2n

__all__ = [
    "ConfigError",
    "RunConfig",
    "parse_config",
    "emit_config",
    "write_snapshot",
    "read_snapshot",
    "write_diag",
    "read_diag",
    "run_convergence",
    "write_convergence",
    "read_convergence",
    "main",
]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


class ConfigError(ValueError):
    pass


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_eigen(s: str) -> EigenSet:
    try:
        return EigenSet[s.strip().upper()]
    except KeyError:
        raise ConfigError(f"eigen_set must be one of v, vb, full (got {s!r})") from None


_PARAM_CONV = {}
for f in dc_fields(Params):
    if f.name == "eigen_set":
        _PARAM_CONV[f.name] = _parse_eigen
    elif f.name in ("limiter_on", "second_order"):
        _PARAM_CONV[f.name] = _parse_bool
    elif f.name in ("picard_r", "picard_s", "cg_maxit"):
        _PARAM_CONV[f.name] = int
    elif f.name == "dt_fixed":
        _PARAM_CONV[f.name] = float
    else:
        _PARAM_CONV[f.name] = float


def _triple(conv):
    def parse(s: str):
        parts = [p for p in s.replace(",", " ").split() if p]
        if len(parts) != 3:
            raise ConfigError(f"expected three values, got {s!r}")
        return tuple(conv(p) for p in parts)
    return parse


_RUN_KEYS = {
    "case": str,
    "n": _triple(int),
    "lo": _triple(float),
    "hi": _triple(float),
    "t_end": float,
    "output_every": float,
    "output_times": lambda s: tuple(float(p) for p in s.replace(",", " ").split() if p),
    "outdir": str,
    "raw": _parse_bool,
}


@dataclass
class RunConfig:
    case: str | None = None
    n: tuple | None = None
    lo: tuple | None = None
    hi: tuple | None = None
    t_end: float | None = None
    output_every: float | None = None
    output_times: tuple | None = None
    outdir: str | None = None
    raw: bool = False
    params: dict = field(default_factory=dict)


def parse_config(text: str, require_case: bool = True) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``[section]``
    lines are allowed and ignored.  Unknown keys are an error."""
    cfg = RunConfig()
    for lineno, rawline in enumerate(text.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {rawline!r}")
        key, _, val = line.partition("=")
        key, val = key.strip().lower(), val.strip()
        try:
            if key in _RUN_KEYS:
                setattr(cfg, key, _RUN_KEYS[key](val))
            elif key in _PARAM_CONV:
                cfg.params[key] = _PARAM_CONV[key](val)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    if require_case and not cfg.case:
        raise ConfigError("missing required key: case")
    if cfg.case and require_case and cfg.case not in CASE_NAMES:
        raise ConfigError(
            f"unknown case {cfg.case!r}; available: {', '.join(CASE_NAMES)}")
    if cfg.params:
        # Validate ranges eagerly so typos fail at parse time.
        try:
            base = get_spec(cfg.case).params if cfg.case in CASE_NAMES else Params()
            base.with_(**cfg.params)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def emit_config(cfg: RunConfig) -> str:
    lines = []
    if cfg.case is not None:
        lines.append(f"case = {cfg.case}")
    for key in ("n", "lo", "hi"):
        v = getattr(cfg, key)
        if v is not None:
            lines.append(f"{key} = " + ",".join(
                str(x) if key == "n" else _fmt(x) for x in v))
    if cfg.t_end is not None:
        lines.append(f"t_end = {_fmt(cfg.t_end)}")
    if cfg.output_every is not None:
        lines.append(f"output_every = {_fmt(cfg.output_every)}")
    if cfg.output_times is not None:
        lines.append("output_times = " + ",".join(_fmt(t) for t in cfg.output_times))
    if cfg.outdir is not None:
        lines.append(f"outdir = {cfg.outdir}")
    if cfg.raw:
        lines.append("raw = true")
    for key, val in cfg.params.items():
        if isinstance(val, EigenSet):
            val = val.name.lower()
        elif isinstance(val, bool):
            val = "true" if val else "false"
        elif isinstance(val, float):
            val = _fmt(val)
        lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------

def _cell_vectors(state):
    g = state.grid
    v = [g.avg_down(state.v_f.comps[a], a) for a in AXES]
    B = magnetic_field_cell(g, state.B_e)
    return np.stack(v), B


def write_snapshot(state, path, case: str = "", raw: bool = False):
    """Structured-points text snapshot of the cell-centered view of a state."""
    g = state.grid
    path = Path(path)
    nx, ny, nz = g.n
    npts = nx * ny * nz
    kin = kinetic_energy_cell(state.rho, state.mom)
    mag = state.magnetic_energy()
    e = (state.rhoE - kin - mag) / state.rho
    v_cell, B_cell = _cell_vectors(state)
    divB = div_e2n(g, state.B_e)
    cx = g.axis_coords(0, False)[0] if nx else 0.0
    cy = g.axis_coords(1, False)[0] if ny else 0.0
    cz = g.axis_coords(2, False)[0] if nz else 0.0

    out = []
    out.append("# vtk DataFile Version 3.0")
    out.append(f"snapshot case={case or 'none'} t={_fmt(state.t)}")
    out.append("ASCII")
    out.append("DATASET STRUCTURED_POINTS")
    out.append(f"DIMENSIONS {nx} {ny} {nz}")
    out.append(f"ORIGIN {_fmt(cx)} {_fmt(cy)} {_fmt(cz)}")
    out.append(f"SPACING {_fmt(g.dx[0])} {_fmt(g.dx[1])} {_fmt(g.dx[2])}")
    out.append(f"POINT_DATA {npts}")
    for name, arr in (("rho", state.rho), ("p", state.p), ("e", e)):
        out.append(f"SCALARS {name} double")
        out.append("LOOKUP_TABLE default")
        out.extend(_fmt(x) for x in arr.ravel(order="F"))
    for name, arr in (("v", v_cell), ("B", B_cell)):
        out.append(f"VECTORS {name} double")
        flat = [c.ravel(order="F") for c in arr]
        out.extend(f"{_fmt(a)} {_fmt(b)} {_fmt(c)}"
                   for a, b, c in zip(*flat))
    dd = divB.shape
    out.append("FIELD solver 2")
    out.append("divB_dims 3 1 int")
    out.append(f"{dd[0]} {dd[1]} {dd[2]}")
    out.append(f"divB 1 {divB.size} double")
    out.extend(_fmt(x) for x in divB.ravel(order="F"))
    try:
        path.write_text("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc
    if raw:
        write_raw(state, path.with_name(path.stem + "_raw.txt"))
    return path


def write_raw(state, path):
    """Debug dump of the raw staggered arrays, shape-tagged per field."""
    g = state.grid
    out = [f"RAW t={_fmt(state.t)}"]

    def emit(name, arr):
        out.append(f"ARRAY {name} " + " ".join(str(s) for s in arr.shape))
        out.extend(_fmt(x) for x in arr.ravel())

    emit("rho", state.rho)
    for a, nm in enumerate(("momx", "momy", "momz")):
        emit(nm, state.mom[a])
    emit("rhoE", state.rhoE)
    emit("p", state.p)
    for a, nm in enumerate(("vfx", "vfy", "vfz")):
        emit(nm, state.v_f.comps[a])
    for a, nm in enumerate(("Bex", "Bey", "Bez")):
        emit(nm, state.B_e.comps[a])
    Path(path).write_text("\n".join(out) + "\n")
    return path


def read_snapshot(path):
    """Parse a snapshot written by write_snapshot back into arrays."""
    path = Path(path)
    try:
        tokens = path.read_text().split("\n")
    except OSError as exc:
        raise OSError(f"cannot read snapshot {path}: {exc}") from exc
    it = iter(tokens)
    out = {}
    next(it)  # version comment
    title = next(it)
    for part in title.split():
        if part.startswith("case="):
            out["case"] = part[5:]
        elif part.startswith("t="):
            out["t"] = float(part[2:])
    next(it)  # ASCII
    next(it)  # DATASET
    dims = tuple(int(x) for x in next(it).split()[1:])
    out["dims"] = dims
    out["origin"] = tuple(float(x) for x in next(it).split()[1:])
    out["spacing"] = tuple(float(x) for x in next(it).split()[1:])
    npts = int(next(it).split()[1])

    def read_scalar():
        next(it)  # LOOKUP_TABLE
        vals = np.array([float(next(it)) for _ in range(npts)])
        return vals.reshape(dims, order="F")

    def read_vector():
        rows = [next(it).split() for _ in range(npts)]
        arr = np.array(rows, dtype=float)
        return np.stack([arr[:, k].reshape(dims, order="F") for k in range(3)])

    line = next(it, "")
    while line:
        parts = line.split()
        if parts[0] == "SCALARS":
            out[parts[1]] = read_scalar()
        elif parts[0] == "VECTORS":
            out[parts[1]] = read_vector()
        elif parts[0] == "FIELD":
            narr = int(parts[2])
            for _ in range(narr):
                head = next(it).split()
                name, ncomp, ntup = head[0], int(head[1]), int(head[2])
                count = ncomp * ntup
                vals = []
                while len(vals) < count:
                    vals.extend(next(it).split())
                if name == "divB_dims":
                    out[name] = tuple(int(v) for v in vals)
                else:
                    out[name] = np.array([float(v) for v in vals])
        line = next(it, None)
        if line is None or not line.strip():
            break
    if "divB" in out and "divB_dims" in out:
        out["divB"] = out["divB"].reshape(out["divB_dims"], order="F")
    return out


# ---------------------------------------------------------------------------
# diagnostics series
# ---------------------------------------------------------------------------

DIAG_HEADER = ",".join(driver.DiagnosticsRecord.COLUMNS)


def write_diag(records, path):
    lines = [DIAG_HEADER]
    for r in records:
        cells = []
        for col in driver.DiagnosticsRecord.COLUMNS:
            v = getattr(r, col)
            cells.append(str(v) if isinstance(v, int) else _fmt(v))
        lines.append(",".join(cells))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write diagnostics {path}: {exc}") from exc
    return path


def read_diag(path):
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    rows = []
    for line in text[1:]:
        vals = line.split(",")
        row = {}
        for k, v in zip(header, vals):
            row[k] = int(v) if k in ("step", "cg_iters_b", "cg_iters_p") else float(v)
        rows.append(row)
    return rows


class FileSink:
    """driver.run sink writing snapshots as they are reached and the
    diagnostics series at the end (stream kept in memory meanwhile)."""

    def __init__(self, outdir, case: str, raw: bool = False):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.case = case
        self.raw = raw
        self.records = []
        self.snapshot_paths = []

    def snapshot(self, state):
        name = f"{self.case}_t{state.t:.6f}.vtk"
        self.snapshot_paths.append(
            write_snapshot(state, self.outdir / name, case=self.case, raw=self.raw))

    def diagnostics(self, rec):
        self.records.append(rec)

    def finish(self):
        return write_diag(self.records, self.outdir / f"{self.case}_diag.csv")


# ---------------------------------------------------------------------------
# convergence ladders
# ---------------------------------------------------------------------------

_CONV_VARS = ("rho", "p", "vx", "vy", "vz", "Bx", "By", "Bz")


def _norms(grid: StaggeredGrid, diff: np.ndarray) -> tuple[float, float, float]:
    vol = grid.cell_volume
    return (
        float(np.sum(np.abs(diff)) * vol),
        float(math.sqrt(np.sum(diff * diff) * vol)),
        float(np.max(np.abs(diff))),
    )


def _var_diff(var, state, ref):
    if var == "rho":
        return state.rho - ref.rho
    if var == "p":
        return state.p - ref.p
    if var in ("vx", "vy", "vz"):
        a = "xyz".index(var[1])
        return state.v_f.comps[a] - ref.v_f.comps[a]
    a = "xyz".index(var[1])
    return state.B_e.comps[a] - ref.B_e.comps[a]


def run_convergence(case: str, levels: int = 3, variables=_CONV_VARS,
                    params: Params | None = None, t_end: float | None = None):
    """Refinement ladder halving the mesh size per level; errors are
    measured against the analytic reference, each variable on the grid
    where it lives. Returns a list of row dicts."""
    spec = get_spec(case)
    if not spec.has_reference:
        raise UnknownCaseError(f"case {case!r} has no analytic reference")
    t_stop = spec.t_end if t_end is None else t_end
    rows = []
    prev = {}
    for lev in range(levels):
        factor = 2 ** lev
        n = tuple(s * factor if s > 1 else 1 for s in spec.n)
        state, espec = init_case(case, n=n, params=params)
        p = espec.params
        result = driver.run(state, p, t_stop)
        ref = reference_state(case, state.grid, t_stop, params=p)
        dx = min(d for d, s in zip(state.grid.dx, n) if s > 1)
        for var in variables:
            diff = _var_diff(var, result.state, ref)
            l1, l2, linf = _norms(state.grid, diff)
            row = {"level": lev, "n": max(n), "dx": dx, "var": var,
                   "errL1": l1, "errL2": l2, "errLinf": linf,
                   "ordL1": math.nan, "ordL2": math.nan, "ordLinf": math.nan}
            if var in prev:
                pr = prev[var]
                rat = math.log(pr["dx"] / dx)
                for nk, ok in (("errL1", "ordL1"), ("errL2", "ordL2"), ("errLinf", "ordLinf")):
                    if row[nk] > 0 and pr[nk] > 0:
                        row[ok] = math.log(pr[nk] / row[nk]) / rat
            prev[var] = row
            rows.append(row)
    return rows


_CONV_HEADER = "level,n,dx,var,errL1,errL2,errLinf,ordL1,ordL2,ordLinf"


def write_convergence(rows, path):
    lines = [_CONV_HEADER]
    for r in rows:
        lines.append(",".join([
            str(r["level"]), str(r["n"]), _fmt(r["dx"]), r["var"],
            _fmt(r["errL1"]), _fmt(r["errL2"]), _fmt(r["errLinf"]),
            _fmt(r["ordL1"]), _fmt(r["ordL2"]), _fmt(r["ordLinf"]),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")
    return path


def read_convergence(path):
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    rows = []
    for line in text[1:]:
        vals = line.split(",")
        row = {}
        for k, v in zip(header, vals):
            if k in ("level", "n"):
                row[k] = int(v)
            elif k == "var":
                row[k] = v
            else:
                row[k] = float(v)
        rows.append(row)
    return rows


def format_convergence(rows) -> str:
    out = [f"{'lvl':>3} {'n':>5} {'dx':>12} {'var':>4} "
           f"{'L1':>12} {'L2':>12} {'Linf':>12} {'oL1':>6} {'oL2':>6} {'oLinf':>6}"]
    for r in rows:
        def o(v):
            return "   -- " if math.isnan(v) else f"{v:6.2f}"
        out.append(f"{r['level']:>3} {r['n']:>5} {r['dx']:>12.5g} {r['var']:>4} "
                   f"{r['errL1']:>12.5g} {r['errL2']:>12.5g} {r['errLinf']:>12.5g} "
                   f"{o(r['ordL1'])} {o(r['ordL2'])} {o(r['ordLinf'])}")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def _resolve_outdir(cfg_outdir) -> Path:
    env = os.environ.get("SOLVER_OUT")
    if env:
        return Path(env)
    if cfg_outdir:
        return Path(cfg_outdir)
    return Path(".")


def _cmd_run(args) -> int:
    try:
        cfg = parse_config(Path(args.config).read_text())
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    spec = get_spec(cfg.case)
    try:
        state, spec = init_case(cfg.case, n=cfg.n, lo=cfg.lo, hi=cfg.hi, **cfg.params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    t_end = cfg.t_end if cfg.t_end is not None else spec.t_end
    if cfg.output_times is not None:
        outputs = cfg.output_times
    elif cfg.output_every:
        k = int(math.floor(t_end / cfg.output_every + 1e-12))
        outputs = tuple(cfg.output_every * i for i in range(1, k + 1))
    else:
        outputs = spec.output_times
    outdir = _resolve_outdir(cfg.outdir)
    sink = FileSink(outdir, cfg.case, raw=cfg.raw or args.raw)
    try:
        result = driver.run(state, spec.params, t_end, output_times=outputs, sink=sink)
    except PositivityError as exc:
        sink.finish()
        print(f"error: {exc}", file=sys.stderr)
        return 1
    diag = sink.finish()
    print(f"finished t={result.state.t:g} ({len(result.records)} steps)")
    print(f"diagnostics: {diag}")
    for p in sink.snapshot_paths:
        print(f"snapshot: {p}")
    if not result.solver_ok:
        print("error: linear solver failed to converge at some step", file=sys.stderr)
        return 1
    return 0


def _cmd_convergence(args) -> int:
    try:
        rows = run_convergence(args.case, levels=args.levels)
    except (UnknownCaseError, PositivityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.order_var:
        if args.order_var not in _CONV_VARS:
            print(f"error: unknown variable {args.order_var!r}; "
                  f"available: {', '.join(_CONV_VARS)}", file=sys.stderr)
            return 1
        rows = [r for r in rows if r["var"] == args.order_var]
    outdir = _resolve_outdir(None)
    outdir.mkdir(parents=True, exist_ok=True)
    path = write_convergence(rows, outdir / f"{args.case}_convergence.csv")
    print(format_convergence(rows))
    print(f"table: {path}")
    return 0


def _cmd_stability(args) -> int:
    text = Path(args.config).read_text() if args.config else ""
    try:
        cfg = parse_config(text, require_case=False)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n = cfg.n or (20, 20, 1)
    theta_b = cfg.params.get("theta_b", 1.0)
    theta_p = cfg.params.get("theta_p", 1.0)
    cfl = cfg.params.get("cfl", 0.45)
    state, params = stability_equilibrium(n=n, theta_b=theta_b, theta_p=theta_p, cfl=cfl)
    dt = cfg.params.get("dt_fixed")
    if dt is None:
        dt = compute_dt(state.grid, state.rho, state.mom, state.rhoE, state.B_e, params)
    step_fn = driver.state_step_map(state, params, dt)
    report = driver.jacobian_spectral(step_fn, state.pack(), keep_matrix=args.dump)
    outdir = _resolve_outdir(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = [
        f"n_dof = {report.n_dof}",
        f"dt = {_fmt(dt)}",
        f"theta_b = {_fmt(theta_b)}",
        f"theta_p = {_fmt(theta_p)}",
        f"spectral_radius = {_fmt(report.spectral_radius)}",
        f"equilibrium_residual = {_fmt(report.equilibrium_residual)}",
        f"warn_not_equilibrium = {report.warn_not_equilibrium}",
    ]
    (outdir / "stability_report.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    if args.dump:
        driver.dump_jacobian(report.matrix, outdir / "jacobian.txt")
        print(f"jacobian: {outdir / 'jacobian.txt'}")
    return 0


def _cmd_list(args) -> int:
    for name in CASE_NAMES:
        print(name)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stagmhd",
        description="semi-implicit structure-preserving staggered-grid MHD solver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a case from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--raw", action="store_true",
                       help="also dump raw staggered arrays next to each snapshot")
    p_run.set_defaults(func=_cmd_run)

    p_conv = sub.add_parser("convergence", help="mesh-refinement error table")
    p_conv.add_argument("case")
    p_conv.add_argument("--levels", type=int, default=3)
    p_conv.add_argument("--order-var", default=None)
    p_conv.set_defaults(func=_cmd_convergence)

    p_stab = sub.add_parser("stability", help="discrete linear stability probe")
    p_stab.add_argument("config", nargs="?", default=None)
    p_stab.add_argument("--dump", action="store_true", help="dump the Jacobian matrix")
    p_stab.set_defaults(func=_cmd_stability)

    p_list = sub.add_parser("list-cases", help="list the case catalog")
    p_list.set_defaults(func=_cmd_list)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnknownCaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
