"""Command-line front end: configuration, orchestration, report emission.

Four commands share one flat INI configuration:

* eval: domain functionals and curvature summary of a single graph;
* verify: one deficit-report row per (case, direction, amplitude);
* expand: fitted-versus-closed-form expansion coefficient table;
* sweep: randomized direction/amplitude product sweeps per case.

Exit codes: 0 success, 1 at least one row failed its inequality,
2 configuration error (the offending key is named), 3 numerical failure.
Heavy numerical imports happen inside main() so that --help and config
errors stay fast and thread settings can take effect first.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys


class ConfigError(Exception):
    """Invalid configuration; the message names the offending key."""


# ---------------------------------------------------------------------------
# configuration schema

_LIST_INT = "list-of-int"
_LIST_FLOAT = "list-of-float"

SCHEMA = {
    "space": {"K": int, "n": int, "rho": float},
    "grid": {"basis_degree": int, "resolution": int},
    "weight": {"kind": str, "value": float, "alpha": float, "scale": float},
    "perturbation": {"mode": str, "degrees": _LIST_INT, "directions": int,
                     "seed": int, "epsilon": _LIST_FLOAT,
                     "coefficients": str},
    "case": {"theorem": str, "k": int, "j": int, "eta_frac": float},
    "output": {"path": str, "format": str},
    "eval": {"refine": bool, "tol": float},
}

REQUIRED = {"space": ("K", "n", "rho"), "weight": ("kind",),
            "case": ("theorem",)}

WEIGHT_KINDS = ("constant", "power", "affine", "shifted_power")
MODES = ("zero", "random", "coefficients")


def _convert(section, key, raw, typ):
    raw = raw.strip()
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if typ is str:
            return raw
        if typ == _LIST_INT:
            return tuple(int(t) for t in raw.split(",") if t.strip())
        if typ == _LIST_FLOAT:
            return tuple(float(t) for t in raw.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as "
                          f"{getattr(typ, '__name__', typ)}") from None
    raise ConfigError(f"{section}.{key}: unsupported type in schema")


def load_config(path):
    """Parse and type-check the INI file into plain dicts.

    Returns (sections, cases) where cases is the ordered list of
    (name, values) for each [case:<name>] section.
    """
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None

    sections, cases = {}, []
    for name in parser.sections():
        base = "case" if name == "case" or name.startswith("case:") else name
        if base not in SCHEMA:
            raise ConfigError(f"unknown config section {name!r}")
        schema = SCHEMA[base]
        values = {}
        for key, raw in parser.items(name):
            if key not in schema:
                raise ConfigError(f"unknown config key {name}.{key}")
            values[key] = _convert(name, key, raw, schema[key])
        for key in REQUIRED.get(base, ()):
            if key not in values:
                raise ConfigError(f"missing required config key "
                                  f"{name}.{key}")
        if base == "case":
            cases.append((name, values))
        else:
            sections[name] = values
    for name in REQUIRED:
        if name != "case" and name not in sections:
            raise ConfigError(f"missing required config section [{name}]")
    return sections, cases


# ---------------------------------------------------------------------------
# construction helpers (imports deferred to call time)

def build_weight(wcfg):
    from sfi.spaceform import WeightFunction

    kind = wcfg["kind"]
    if kind not in WEIGHT_KINDS:
        raise ConfigError(f"weight.kind: unknown kind {kind!r}; expected "
                          f"one of {WEIGHT_KINDS}")
    if kind == "constant":
        w = WeightFunction.constant(wcfg.get("value", 1.0))
    elif kind == "power":
        w = WeightFunction.power(wcfg.get("alpha", 1.0))
    elif kind == "affine":
        w = WeightFunction.affine()
    else:
        w = WeightFunction.shifted_power(wcfg.get("alpha", 2.0))
    scale = wcfg.get("scale", 1.0)
    if scale != 1.0:
        w = w.scaled(scale)
    return w


def build_space(scfg):
    from sfi.spaceform import SpaceForm

    try:
        return SpaceForm(K=scfg["K"], n=scfg["n"])
    except ValueError as exc:
        raise ConfigError(f"space: {exc}") from None


def build_basis_grid(gcfg, n, resolution_override=None):
    from sfi import spherebasis as sb

    d_max = gcfg.get("basis_degree", 8)
    res = resolution_override or gcfg.get("resolution") \
        or sb.default_resolution(d_max)
    if res < 2 * d_max:
        raise ConfigError(f"grid.resolution: {res} is below twice the "
                          f"basis degree {d_max}")
    return sb.build_basis(n, d_max), sb.build_grid(n, res)


def build_cases(cases_cfg, sf, w, rho):
    from sfi import lab

    out = []
    for name, c in cases_cfg:
        kwargs = {"k": c.get("k", 1), "rho": rho,
                  "eta_frac": c.get("eta_frac", 0.25)}
        if "j" in c:
            kwargs["j"] = c["j"]
        try:
            out.append((name, lab.TheoremCase(c["theorem"], sf, w,
                                              **kwargs)))
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from None
    return out


def parse_coefficient_triples(text, basis):
    """Parse "degree:offset:value, ..." into a coefficient vector."""
    import numpy as np

    coeffs = np.zeros(basis.size)
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"perturbation.coefficients: bad entry "
                              f"{item!r}; expected degree:offset:value")
        try:
            d, off, val = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigError(f"perturbation.coefficients: bad entry "
                              f"{item!r}") from None
        block = basis.degree_block(d)
        if not 0 <= off < len(block):
            raise ConfigError(f"perturbation.coefficients: offset {off} out "
                              f"of range for degree {d}")
        coeffs[block[off]] = val
    return coeffs


def build_directions(pcfg, basis, seed, *, unit=False):
    """Ordered (direction_id, SphericalFunction) list from the
    perturbation spec; unit forces L2 normalization."""
    import numpy as np

    from sfi import lab
    from sfi import spherebasis as sb

    mode = pcfg.get("mode", "zero")
    if mode not in MODES:
        raise ConfigError(f"perturbation.mode: unknown mode {mode!r}; "
                          f"expected one of {MODES}")
    if mode == "zero":
        if unit:
            raise ConfigError("perturbation.mode: zero direction cannot be "
                              "normalized for an expansion fit")
        return [("zero", sb.zero_function(basis))]
    if mode == "coefficients":
        text = pcfg.get("coefficients", "")
        coeffs = parse_coefficient_triples(text, basis)
        norm = float(np.linalg.norm(coeffs))
        if norm == 0:
            raise ConfigError("perturbation.coefficients: no nonzero "
                              "entries")
        if unit:
            coeffs = coeffs / norm
        return [("explicit", sb.from_coeffs(basis, coeffs))]
    degrees = pcfg.get("degrees", (2, 3, 4))
    count = pcfg.get("directions", 1)
    if count < 1:
        raise ConfigError("perturbation.directions: need at least 1")
    try:
        return [(f"d{i:03d}", lab.sample_direction(basis, seed, i,
                                                   degrees=degrees))
                for i in range(count)]
    except ValueError as exc:
        raise ConfigError(f"perturbation.degrees: {exc}") from None


def epsilon_schedule(pcfg, *, default=(0.01,)):
    eps = pcfg.get("epsilon", tuple(default))
    for e in eps:
        if e < 0:
            raise ConfigError(f"perturbation.epsilon: negative amplitude "
                              f"{e}")
    return eps


# ---------------------------------------------------------------------------
# output plumbing

def resolve_out_path(out):
    if out is None:
        return None
    base = os.environ.get("SFI_OUT_DIR")
    if base and not os.path.isabs(out):
        return os.path.join(base, out)
    return out


def emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def kv_lines(pairs):
    """Deterministic key = value text block."""
    lines = []
    for key, val in pairs:
        if isinstance(val, bool):
            sval = "true" if val else "false"
        elif isinstance(val, int):
            sval = str(val)
        elif isinstance(val, float):
            sval = format(val, ".17g")
        else:
            sval = str(val)
        lines.append(f"{key} = {sval}")
    return "\n".join(lines) + "\n"


def node_dump_csv(rows):
    header = list(rows[0])
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            v = row[key]
            cells.append(str(v) if isinstance(v, int)
                         else format(v, ".17g"))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands

def cmd_eval(sections, cases, args):
    import json

    import numpy as np

    from sfi import domains as dm
    from sfi import graphgeom as gg
    from sfi import model

    sf = build_space(sections["space"])
    w = build_weight(sections["weight"])
    rho = sections["space"]["rho"]
    basis, grid = build_basis_grid(sections.get("grid", {}), sf.n,
                                   args.resolution)
    seed = args.seed if args.seed is not None \
        else sections.get("perturbation", {}).get("seed", 2025)
    pcfg = sections.get("perturbation", {})
    directions = build_directions(pcfg, basis, seed)
    eps = epsilon_schedule(pcfg)[0] if directions[0][0] != "zero" else 0.0
    graph = gg.RadialGraph(sf=sf, rho=rho, u=directions[0][1].scaled(eps))

    ecfg = sections.get("eval", {})
    refine = ecfg.get("refine", True)
    tol = ecfg.get("tol", 1e-8)
    geo = gg.surface_geometry(graph, grid)
    fun = dm.domain_functionals(graph, grid, refine_check=refine)
    convex = geo.convex_flags()

    pairs = [("K", sf.K), ("n", sf.n), ("rho", rho),
             ("weight", w.label), ("direction", directions[0][0]),
             ("epsilon", eps), ("nodes", grid.node_count),
             ("volume", fun.vol), ("weighted_volume", fun.weighted_vol),
             ("area", fun.quermass[0])]
    for k in sorted(fun.quermass):
        pairs.append((f"W_{k}", fun.quermass[k]))
    for k in range(sf.n + 1):
        pairs.append((f"sigma_int_{k}",
                      grid.integrate(geo.sigma[:, k] * geo.area_factor)))
    for k in range(sf.n + 1):
        pairs.append((f"weighted_sigma_int_{k}",
                      gg.weighted_curvature_integral(graph, grid, w, k,
                                                     geo=geo)))
    pairs += [("min_radius", float(np.min(geo.r))),
              ("max_radius", float(np.max(geo.r))),
              ("mean_convex", bool(np.all(geo.H > 0))),
              ("convex_fraction", float(np.mean(convex))),
              ("barycenter_displacement",
               float(np.linalg.norm(model.model_vector(
                   sf, fun.barycenter_point)))),
              ("vol_err", fun.vol_err), ("area_err", fun.area_err),
              ("quad_tol", tol)]

    if args.format == "json":
        text = json.dumps(dict(pairs), indent=2) + "\n"
    else:
        text = kv_lines(pairs)
    emit(text, resolve_out_path(args.out))

    if args.dump_nodes:
        emit(node_dump_csv(gg.node_dump_rows(geo)),
             resolve_out_path(args.dump_nodes))
    if refine and max(fun.vol_err, fun.area_err) > tol:
        print(f"numerical failure: quadrature error "
              f"{max(fun.vol_err, fun.area_err):.3e} exceeds tolerance "
              f"{tol:g}", file=sys.stderr)
        return 3
    return 0


def _verify_tasks(sections, cases_cfg, args):
    from sfi import graphgeom as gg
    from sfi import lab

    sf = build_space(sections["space"])
    w = build_weight(sections["weight"])
    rho = sections["space"]["rho"]
    basis, grid = build_basis_grid(sections.get("grid", {}), sf.n,
                                   args.resolution)
    pcfg = sections.get("perturbation", {})
    seed = args.seed if args.seed is not None else pcfg.get("seed", 2025)
    cases = build_cases(cases_cfg, sf, w, rho)
    if not cases:
        raise ConfigError("missing required config section [case:<name>]")
    directions = build_directions(pcfg, basis, seed)
    eps_list = epsilon_schedule(pcfg)

    tasks = []
    for _, case in cases:
        for did, u0 in directions:
            if did == "zero":
                graph = gg.RadialGraph(sf=sf, rho=case.rho, u=u0)
                tasks.append((case, graph, grid, did, None))
            else:
                for eps in eps_list:
                    graph = gg.RadialGraph(sf=sf, rho=case.rho,
                                           u=u0.scaled(eps))
                    tasks.append((case, graph, grid, did, eps))
    return tasks, lab


def _run_tasks(tasks, runner, threads):
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(runner, tasks))
    return [runner(t) for t in tasks]


def cmd_verify(sections, cases_cfg, args):
    tasks, lab = _verify_tasks(sections, cases_cfg, args)

    def run(task):
        case, graph, grid, did, eps = task
        return lab.verify(case, graph, grid, direction_id=did, epsilon=eps)

    reports = _run_tasks(tasks, run, args.threads)
    text = lab.csv_text(reports) if args.format == "csv" \
        else lab.json_text(reports)
    emit(text, resolve_out_path(args.out))
    return 1 if any(r.status == "fail" for r in reports) else 0


def cmd_sweep(sections, cases_cfg, args):
    from sfi import lab

    sf = build_space(sections["space"])
    w = build_weight(sections["weight"])
    rho = sections["space"]["rho"]
    basis, grid = build_basis_grid(sections.get("grid", {}), sf.n,
                                   args.resolution)
    pcfg = sections.get("perturbation", {})
    seed = args.seed if args.seed is not None else pcfg.get("seed", 2025)
    degrees = pcfg.get("degrees", (2, 3, 4))
    count = pcfg.get("directions", 10)
    eps_list = epsilon_schedule(pcfg, default=(0.003, 0.01))
    cases = build_cases(cases_cfg, sf, w, rho)
    if not cases:
        raise ConfigError("missing required config section [case:<name>]")

    def run(named_case):
        name, case = named_case
        return name, lab.sweep(case, grid, basis, directions=count,
                               eps_schedule=eps_list, seed=seed,
                               degrees=degrees)

    results = _run_tasks(cases, run, args.threads)
    reports = []
    for name, sw in results:
        reports.extend(sw.reports)
        emp = "n/a" if sw.empirical_constant is None \
            else format(sw.empirical_constant, ".6g")
        print(f"{name}: rows={len(sw.reports)} failures={len(sw.failures)} "
              f"min_deficit_over_alpha_sq={emp}", file=sys.stderr)
        for did, eps, msg in sw.failures:
            print(f"{name}: {did} eps={eps:g} error: {msg}",
                  file=sys.stderr)
    text = lab.csv_text(reports) if args.format == "csv" \
        else lab.json_text(reports)
    emit(text, resolve_out_path(args.out))
    return 1 if any(r.status == "fail" for r in reports) else 0


EXPAND_COLUMNS = ("target", "weight_kind", "K", "n", "rho", "constraint",
                  "direction_id", "c0_fit", "c1_fit", "c2_fit", "c0_closed",
                  "c1_closed", "c2_closed", "rel_c0", "rel_c1", "rel_c2",
                  "residual_slope", "condition_number")


def cmd_expand(sections, cases_cfg, args):
    import json

    from sfi import lab

    sf = build_space(sections["space"])
    w = build_weight(sections["weight"])
    rho = sections["space"]["rho"]
    basis, grid = build_basis_grid(sections.get("grid", {}), sf.n,
                                   args.resolution)
    pcfg = sections.get("perturbation", {})
    seed = args.seed if args.seed is not None else pcfg.get("seed", 2025)
    eps_list = pcfg.get("epsilon")
    if eps_list is None or len(eps_list) < 6:
        raise ConfigError("perturbation.epsilon: expansion fits need at "
                          "least 6 amplitudes")
    cases = build_cases(cases_cfg, sf, w, rho)
    if not cases:
        raise ConfigError("missing required config section [case:<name>]")
    directions = build_directions(pcfg, basis, seed, unit=True)

    rows = []
    for _, case in cases:
        tag = case.constraint().label
        use_H = case.family.target == "H"
        for did, u0 in directions:
            rep = lab.expansion_oracle(sf, w, case.k, tag, u0, eps_list,
                                       grid, rho=case.rho,
                                       use_H_blocks=use_H)
            cells = [rep.target_id, rep.weight_kind, rep.K, rep.n, rep.rho,
                     rep.constraint, did, *rep.fitted, *rep.closed,
                     *rep.rel_errors, rep.residual_slope,
                     rep.condition_number]
            rows.append(dict(zip(EXPAND_COLUMNS, cells)))

    if args.format == "json":
        text = json.dumps(rows, indent=2, default=float) + "\n"
    else:
        lines = [",".join(EXPAND_COLUMNS)]
        for row in rows:
            cells = []
            for col in EXPAND_COLUMNS:
                v = row[col]
                if isinstance(v, str):
                    cells.append(v)
                elif isinstance(v, int):
                    cells.append(str(v))
                else:
                    cells.append(format(float(v), ".17g"))
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    emit(text, resolve_out_path(args.out))
    return 0


# ---------------------------------------------------------------------------
# entry point

def parse_args(argv):
    top = argparse.ArgumentParser(
        prog="sfi",
        description="curvature-integral comparisons for nearly spherical "
                    "hypersurfaces in space forms")
    sub = top.add_subparsers(dest="command", required=True)
    for name, doc in (("eval", "domain functionals of one graph"),
                      ("verify", "deficit-report rows per case"),
                      ("expand", "expansion-coefficient fit table"),
                      ("sweep", "randomized verification sweeps")):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="INI config path")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="override perturbation.seed")
        p.add_argument("--resolution", type=int, default=None,
                       help="override grid.resolution")
        if name == "eval":
            p.add_argument("--dump-nodes", metavar="PATH",
                           help="write per-node curvature CSV to PATH")
    return top.parse_args(argv)


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "expand": cmd_expand,
            "sweep": cmd_sweep}


def main(argv=None):
    args = parse_args(argv)
    if args.threads is None:
        try:
            args.threads = int(os.environ.get("SFI_THREADS", "1"))
        except ValueError:
            print("config error: SFI_THREADS must be an integer",
                  file=sys.stderr)
            return 2
    if args.threads < 1:
        print("config error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        sections, cases = load_config(args.config)
        return COMMANDS[args.command](sections, cases, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, FloatingPointError,
            ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
