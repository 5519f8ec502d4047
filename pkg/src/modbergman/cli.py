"""Command-line front end.

Every command writes one artifact (CSV or JSON) whose metadata records the
tool version, parameters, seed and tolerances, so identical invocations
produce byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from . import __version__
from .ball import SpaceParams, multi_indices, ln_monomial_norm_sq, monomial
from .errors import DomainError, HypothesisViolation, ModBergmanError, NonConvergenceError, ZeroOnContour
from .kernel import kernel_scalar
from .metric import distance_upper, hessian, lipschitz_check
from .operators import (
    berezin,
    berezin_mobius,
    classify_growth,
    growth_radii,
    i_s,
    j_s,
    mobius_rule,
)
from .quadrature import SeededSphereSample, build_rule, default_plan, inner_product
from .selfcheck import run_all
from .specfun import SeriesControl
from .zeros import (
    LemniscateSpec,
    RootReport,
    find_zeros_disk,
    lemniscate_points,
    poly_roots,
    q_poly_coeffs,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_SELFCHECK = 3

COMMANDS = ("kernel", "moments", "berezin", "growth", "metric", "zeros", "figure1", "figure2", "selfcheck")

FIGURE1_B = (-0.01, -1.9)
CIRCLE_POINTS = 512


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    params: SpaceParams
    output: str | None = None
    fmt: str = "json"
    seed: int = 0
    max_terms: int = 200_000
    rel_tol: float = 1e-15
    threads: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.fmt not in ("csv", "json"):
            raise DomainError("format must be csv or json")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise DomainError("threads must be >= 1")

    @property
    def ctrl(self) -> SeriesControl:
        return SeriesControl(max_terms=self.max_terms, rel_tol=self.rel_tol)

    def metadata(self, params: dict | None = None) -> dict:
        return {
            "tool": "modbergman",
            "version": __version__,
            "command": self.command,
            "params": self.params.as_dict() if params is None else params,
            "options": {k: _jsonable(v) for k, v in sorted(self.options.items())},
            "seed": self.seed,
            "threads": self.threads,
            "tolerances": {"max_terms": self.max_terms, "rel_tol": self.rel_tol},
        }


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


# ---------------------------------------------------------------- parsing helpers

def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise DomainError(f"cannot parse complex number {text!r}") from exc


def parse_point(text: str, n: int) -> np.ndarray:
    coords = [parse_complex(t) for t in text.split(",")]
    if len(coords) != n:
        raise DomainError(f"point {text!r} has {len(coords)} coordinates, expected n={n}")
    return np.array(coords, dtype=complex)


_MONOMIAL = re.compile(r"^monomial\(([\d,\s]+)\)$")


def builtin_function(name: str, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Built-in test functions: one, re_w1, abs_sq, monomial(k1,...,kn)."""
    if name == "one":
        return lambda w: np.ones(w.shape[:-1], dtype=complex)
    if name == "re_w1":
        return lambda w: w[..., 0].real.astype(complex)
    if name == "abs_sq":
        return lambda w: np.sum(np.abs(w) ** 2, axis=-1).astype(complex)
    m = _MONOMIAL.match(name.replace(" ", ""))
    if m:
        alpha = tuple(int(x) for x in m.group(1).split(",") if x)
        if len(alpha) != n:
            raise DomainError(f"monomial exponent {alpha} has wrong length for n={n}")
        return lambda w: monomial(w, alpha)
    raise DomainError(f"unknown test function {name!r}; use one, re_w1, abs_sq or monomial(k,...)")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _points_rows(label: str, pts) -> list[list[str]]:
    return [[label, _fmt(z.real), _fmt(z.imag)] for z in pts]


def _points_json(pts) -> list[dict]:
    return [{"re": float(z.real), "im": float(z.imag)} for z in pts]


# ---------------------------------------------------------------- commands

@dataclass
class Artifact:
    """Emitted data: a JSON object, and CSV columns plus rows."""

    data: dict
    columns: list[str]
    rows: list[list[str]]
    code: int = EXIT_OK
    # commands with fixed parameters report those instead of the flags
    params: dict | None = None


def _rule(cfg: RunConfig, radial: int = 64):
    mc = cfg.options.get("mc_samples", 0)
    plan = SeededSphereSample(mc, cfg.seed) if mc else default_plan(cfg.params.n)
    return build_rule(cfg.params, radial, plan)


def cmd_kernel(cfg: RunConfig) -> Artifact:
    xi = parse_complex(cfg.options.get("xi", "0"))
    ev = kernel_scalar(xi, cfg.params, cfg.ctrl)
    data = {
        "xi": _jsonable(xi),
        "value": _jsonable(ev.value),
        "via_series": _jsonable(ev.via_series) if ev.via_series is not None else None,
        "agreement": ev.agreement,
    }
    rows = [[_fmt(xi.real), _fmt(xi.imag), _fmt(ev.value.real), _fmt(ev.value.imag),
             "" if ev.agreement is None else _fmt(ev.agreement)]]
    return Artifact(data, ["xi_re", "xi_im", "re", "im", "agreement"], rows)


def cmd_moments(cfg: RunConfig) -> Artifact:
    p = cfg.params
    deg = int(cfg.options.get("max_degree", 3))
    rule = _rule(cfg)
    entries, rows = [], []
    for alpha in multi_indices(p.n, deg):
        exact = math.exp(ln_monomial_norm_sq(alpha, p))
        f = lambda w, alpha=alpha: monomial(w, alpha)
        quad = float(np.real(inner_product(f, f, p, rule)))
        entries.append({"alpha": list(alpha), "norm_sq": exact, "quadrature": quad})
        rows.append([" ".join(map(str, alpha)), _fmt(exact), _fmt(quad)])
    return Artifact({"moments": entries}, ["alpha", "norm_sq", "quadrature"], rows)


def cmd_berezin(cfg: RunConfig) -> Artifact:
    p = cfg.params
    z = parse_point(cfg.options.get("z", ",".join(["0"] * p.n)), p.n)
    f = builtin_function(cfg.options.get("f", "one"), p.n)
    method = cfg.options.get("method", "direct")
    if method == "mobius":
        rule = mobius_rule(p)
        val = berezin_mobius(f, z, p, rule)
    else:
        val = berezin(f, z, p, _rule(cfg))
    data = {"z": _jsonable(list(map(complex, z))), "value": _jsonable(val), "method": method}
    return Artifact(data, ["re", "im"], [[_fmt(val.real), _fmt(val.imag)]])


def cmd_growth(cfg: RunConfig) -> Artifact:
    p = cfg.params
    s = float(cfg.options.get("s", 0.0))
    radii = growth_radii()
    xi = np.eye(p.n, dtype=complex)[0]
    c, d = cfg.options.get("c"), cfg.options.get("d")
    if c is None and d is None:
        name = "I_s"
        vals = [i_s(r * xi, s, p, cfg.ctrl) for r in radii]
    else:
        name = "J_s"
        weight = (p.a if c is None else c, p.b if d is None else d)
        vals = [j_s(r * xi, s, p, weight) for r in radii]
    rep = classify_growth(radii, vals, s)
    data = {
        "integral": name,
        "s": s,
        "values": [{"radius": r, "value": v} for r, v in rep.values],
        "regime": rep.label(),
        "exponent": rep.exponent,
        "fit_quality": rep.fit_quality,
        "ambiguous": rep.ambiguous,
        "residuals": rep.residuals,
    }
    rows = [[_fmt(r), _fmt(v), rep.label()] for r, v in rep.values]
    code = EXIT_NUMERICAL if rep.fit_quality > 0.2 else EXIT_OK
    return Artifact(data, ["radius", "value", "regime"], rows, code)


def cmd_metric(cfg: RunConfig) -> Artifact:
    p = cfg.params
    z = parse_point(cfg.options.get("z", ",".join(["0"] * p.n)), p.n)
    h = hessian(z, p, cfg.ctrl)
    data: dict = {
        "z": _jsonable(list(map(complex, z))),
        "hessian": [[_jsonable(complex(x)) for x in row] for row in h.entries],
        "min_eigenvalue": float(h.eigenvalues().min()),
    }
    rows = [["hessian", str(j), str(k), _fmt(h.entries[j, k].real), _fmt(h.entries[j, k].imag)]
            for j in range(p.n) for k in range(p.n)]
    if "w" in cfg.options:
        w = parse_point(cfg.options["w"], p.n)
        k = int(cfg.options.get("k_control", 3))
        dist = distance_upper(z, w, p, k)
        data["w"] = _jsonable(list(map(complex, w)))
        data["distance_upper"] = dist
        rows.append(["distance_upper", "", "", _fmt(dist), "0"])
        if "f" in cfg.options:
            f = builtin_function(cfg.options["f"], p.n)
            gap, bound = lipschitz_check(f, z, w, p, _rule(cfg), k)
            data["lipschitz"] = {"gap": gap, "bound": bound, "holds": gap <= bound}
            rows.append(["lipschitz_gap", "", "", _fmt(gap), "0"])
            rows.append(["lipschitz_bound", "", "", _fmt(bound), "0"])
    return Artifact(data, ["quantity", "j", "k", "re", "im"], rows)


def _roots_for(p: SpaceParams, radius: float) -> RootReport:
    try:
        q = q_poly_coeffs(p, None)
    except DomainError:
        return find_zeros_disk(p, radius)
    return poly_roots(q) if q.degree >= 1 else RootReport([], [], 0, "PolynomialSolve", 1.0)


def _report_json(rep: RootReport) -> dict:
    return {
        "roots": _points_json(rep.roots),
        "residuals": rep.residuals,
        "disk_count": rep.disk_count,
        "disk_radius": rep.disk_radius,
        "method": rep.method,
        "flags": rep.flags,
    }


def cmd_zeros(cfg: RunConfig) -> Artifact:
    radius = float(cfg.options.get("radius") or 1.0)
    rep = _roots_for(cfg.params, radius)
    code = EXIT_OK if rep.ok else EXIT_NUMERICAL
    return Artifact({"root": _report_json(rep)}, ["set", "re", "im"], _points_rows("root", rep.roots), code)


def _circle(m: int = CIRCLE_POINTS):
    return np.exp(2j * math.pi * np.arange(m) / m)


def cmd_figure1(cfg: RunConfig) -> Artifact:
    n, a = 2, 10.0
    panels, rows, code = [], [], EXIT_OK
    for b in FIGURE1_B:
        rep = _roots_for(SpaceParams(a, b, n), 1.0)
        if not rep.ok:
            code = EXIT_NUMERICAL
        panels.append({"b": b, **_report_json(rep)})
        rows += [[_fmt(b)] + r for r in _points_rows("root", rep.roots)]
    circle = _circle()
    rows += [[""] + r for r in _points_rows("circle", circle)]
    data = {"panels": panels, "circle": _points_json(circle)}
    params = {"n": n, "a": a, "b": list(FIGURE1_B)}
    return Artifact(data, ["panel", "set", "re", "im"], rows, code, params)


def cmd_figure2(cfg: RunConfig) -> Artifact:
    m = int(cfg.options.get("m") or 50)
    tau = float(cfg.options.get("tau") or 2.0)
    p = SpaceParams(m - 1, tau * m + 1, 1)
    rep = poly_roots(q_poly_coeffs(p, None))
    spec = LemniscateSpec(tau)
    curve, skipped = lemniscate_points(spec, 1024)
    data = {
        "level": spec.level,
        "root": _report_json(rep),
        "curve": _points_json(curve),
        "skipped_rays": skipped,
    }
    rows = _points_rows("root", rep.roots) + _points_rows("curve", curve)
    code = EXIT_OK if rep.ok and not skipped else EXIT_NUMERICAL
    return Artifact(data, ["set", "re", "im"], rows, code, {"m": m, "tau": tau, **p.as_dict()})


def cmd_selfcheck(cfg: RunConfig) -> Artifact:
    results = run_all()
    data = {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]}
    rows = [[r.name, "pass" if r.passed else "FAIL", r.detail] for r in results]
    code = EXIT_OK if all(r.passed for r in results) else EXIT_SELFCHECK
    return Artifact(data, ["check", "status", "detail"], rows, code)


HANDLERS = {
    "kernel": cmd_kernel,
    "moments": cmd_moments,
    "berezin": cmd_berezin,
    "growth": cmd_growth,
    "metric": cmd_metric,
    "zeros": cmd_zeros,
    "figure1": cmd_figure1,
    "figure2": cmd_figure2,
    "selfcheck": cmd_selfcheck,
}


def render(cfg: RunConfig, art: Artifact) -> str:
    meta = cfg.metadata(art.params)
    if cfg.fmt == "json":
        return json.dumps({"metadata": meta, **art.data}, sort_keys=True, indent=2) + "\n"
    lines = ["# " + json.dumps(meta, sort_keys=True), ",".join(art.columns)]
    lines += [",".join(r) for r in art.rows]
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig, stdout: TextIO | None = None) -> int:
    """Execute one command and write its artifact; returns the exit status."""
    art = HANDLERS[cfg.command](cfg)
    text = render(cfg, art)
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        (stdout or sys.stdout).write(text)
    return art.code


# ---------------------------------------------------------------- argparse

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--a", type=float, default=0.0)
    common.add_argument("--b", type=float, default=0.0)
    common.add_argument("--c", type=float)
    common.add_argument("--d", type=float)
    common.add_argument("--p", type=float, default=2.0, help="integrability exponent (recorded)")
    common.add_argument("--s", type=float, default=0.0)
    common.add_argument("--tau", type=float)
    common.add_argument("--m", type=int)
    common.add_argument("--radius", type=float)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="json")
    common.add_argument("--output", default="-")
    common.add_argument("--threads", type=int, default=1, help="recorded; computations run single-threaded")
    common.add_argument("--max-terms", type=int, default=200_000)
    common.add_argument("--rel-tol", type=float, default=1e-15)
    common.add_argument("--xi", help="kernel argument, e.g. 0.3+0.1j")
    common.add_argument("--z", help="point, comma-separated complex coordinates")
    common.add_argument("--w", help="second point for metric")
    common.add_argument("--f", help="test function: one, re_w1, abs_sq, monomial(k,...)")
    common.add_argument("--method", choices=("direct", "mobius"), default="direct")
    common.add_argument("--max-degree", type=int, default=3)
    common.add_argument("--k-control", type=int, default=3)
    common.add_argument("--mc-samples", type=int, default=0, help="use a seeded Monte Carlo sphere rule")

    parser = _Parser(prog="modbergman", description="Numerics for modified Bergman spaces on the unit ball.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


_OPTION_KEYS = ("c", "d", "p", "s", "tau", "m", "radius", "xi", "z", "w", "f", "method",
                "max_degree", "k_control", "mc_samples")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = SpaceParams(ns.a, ns.b, ns.n)
    options = {k: getattr(ns, k) for k in _OPTION_KEYS if getattr(ns, k) is not None}
    return RunConfig(ns.command, params, ns.output, ns.fmt, ns.seed, ns.max_terms, ns.rel_tol,
                     ns.threads, options)


def main(argv: list[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        return run(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DomainError, HypothesisViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NonConvergenceError, ZeroOnContour, ModBergmanError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
