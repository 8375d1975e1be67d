"""Batch command line: every computation as a subcommand driven by a JSON config.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (or a
violated a-priori bound), 4 reflectionless gate failed, 5 a verification
step failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .asymptotics import m_asymptotics_probe
from .coefficients import PeriodicBackground, PiecewiseCoefficients, mollify_sequence
from .errors import ConfigError, NumericalError, PreconditionError
from .estimates import check_difference_bound, check_disc_bounds, check_growth_bound, check_local_l2_floor
from .floquet import StabilityInterval, band_edges
from .liouville import build_map, unitarity_battery, verify_f_zero_rigidity, verify_equivalence
from .scattering import ScatteringProblem, ScatteringSample, scattering_coefficients
from .weyl import m_convergence_experiment, weyl_limit

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_GATE, EXIT_VERIFY = 0, 2, 3, 4, 5


class Context:
    def __init__(self, args, config: dict, base: Path):
        self.args = args
        self.config = config
        self.base = base
        self.threads = args.threads
        self._problem = None

    def map(self, fn, items):
        items = list(items)
        if self.threads <= 1 or len(items) < 2:
            return [fn(it) for it in items]
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            return list(pool.map(fn, items))

    @property
    def problem(self):
        if self._problem is None:
            ref = self.config.get("problem")
            if isinstance(ref, str):
                self._problem = io.load_problem(self.base / ref)
            elif isinstance(ref, dict):
                self._problem = io.problem_from_dict(ref)
            else:
                self._problem = io.problem_from_dict(self.config)
        return self._problem

    @property
    def background(self) -> PeriodicBackground:
        p = self.problem
        return p.background if isinstance(p, ScatteringProblem) else p

    @property
    def coefficients(self):
        p = self.problem
        return p.coefficients if isinstance(p, ScatteringProblem) else p

    def scattering_problem(self) -> ScatteringProblem:
        p = self.problem
        if not isinstance(p, ScatteringProblem):
            raise ConfigError("this command needs a document with background and perturbation", "problem")
        return p

    def block(self, name: str) -> dict:
        blk = self.config.get(name, {})
        if not isinstance(blk, dict):
            raise ConfigError("expected an object", name)
        return blk

    def tol(self, blk: dict, where: str, default: float) -> float:
        val = self.args.tol if self.args.tol is not None else number(blk, "tol", where, default)
        if not val > 0:
            raise ConfigError("tolerance must be positive", f"{where}.tol")
        return val


def number(blk: dict, key: str, where: str, default=None, positive: bool = False) -> float:
    if key not in blk:
        if default is None:
            raise ConfigError("missing field", f"{where}.{key}")
        return default
    v = blk[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError("expected a finite number", f"{where}.{key}")
    if positive and not v > 0:
        raise ConfigError("must be positive", f"{where}.{key}")
    return float(v)


def integer(blk: dict, key: str, where: str, default: int, minimum: int = 1) -> int:
    v = blk.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigError(f"expected an integer >= {minimum}", f"{where}.{key}")
    return v


def numbers(blk: dict, key: str, where: str, default=None) -> list[float]:
    if key not in blk:
        if default is None:
            raise ConfigError("missing field", f"{where}.{key}")
        return list(default)
    v = blk[key]
    if not isinstance(v, list) or not v:
        raise ConfigError("expected a nonempty list", f"{where}.{key}")
    return [number({"v": e}, "v", f"{where}.{key}[{i}]") for i, e in enumerate(v)]


def complexes(blk: dict, key: str, where: str, default=None) -> list[complex]:
    if key not in blk:
        if default is None:
            raise ConfigError("missing field", f"{where}.{key}")
        return list(default)
    v = blk[key]
    if not isinstance(v, list) or not v:
        raise ConfigError("expected a nonempty list", f"{where}.{key}")
    return [io.parse_complex(e, f"{where}.{key}[{i}]") for i, e in enumerate(v)]


def select_intervals(ctx: Context, blk: dict, where: str, default_all: bool) -> list[tuple[int, StabilityInterval]]:
    """Stability intervals named by ``interval: [c, d]`` or found from ``e_min``/``e_max``."""
    if "interval" in blk:
        c, d = numbers(blk, "interval", where)[:2]
        if not c < d:
            raise ConfigError("need c < d", f"{where}.interval")
        return [(0, StabilityInterval(c, d, 0, 0))]
    e_min = number(blk, "e_min", where, 0.0)
    e_max = number(blk, "e_max", where, 100.0)
    if not e_min < e_max:
        raise ConfigError("need e_min < e_max", f"{where}.e_max")
    bands = band_edges(ctx.background, e_min, e_max, number(blk, "scan_step", where, 0.05, positive=True))
    if "band" in blk:
        k = integer(blk, "band", where, 0, minimum=0)
        if k >= len(bands):
            raise ConfigError(f"only {len(bands)} bands in [{e_min:g}, {e_max:g}]", f"{where}.band")
        return [(k, bands[k])]
    if not bands:
        raise ConfigError(f"no complete band in [{e_min:g}, {e_max:g}]", f"{where}.e_max")
    return list(enumerate(bands)) if default_all else [(0, bands[0])]


def cplx(z: complex) -> list[float]:
    return [z.real, z.imag]


# ---------------------------------------------------------------- commands


def cmd_bands(ctx: Context):
    where = "bands"
    blk = ctx.block(where)
    e_min = number(blk, "e_min", where, 0.0)
    e_max = number(blk, "e_max", where, 100.0)
    if not e_min < e_max:
        raise ConfigError("need e_min < e_max", f"{where}.e_max")
    step = number(blk, "scan_step", where, 0.05, positive=True)
    tol = ctx.tol(blk, where, 1e-10)
    bands = band_edges(ctx.background, e_min, e_max, step, tol)
    rows = [(i, b.c, b.d, b.D_c, b.D_d) for i, b in enumerate(bands)]
    header = ["index", "c", "d", "D_at_c", "D_at_d"]
    report = {"bands": [dict(zip(header, r)) for r in rows]}
    summary = [f"bands: {len(bands)} stability intervals in [{e_min:g}, {e_max:g}]"]
    return header, rows, report, summary, EXIT_OK


def _sample(problem, z):
    try:
        return scattering_coefficients(problem, z)
    except NumericalError as exc:
        nan = complex("nan")
        return ScatteringSample(z, nan, nan, float("nan"), str(exc))


def cmd_scatter(ctx: Context):
    where = "scatter"
    blk = ctx.block(where)
    problem = ctx.scattering_problem()
    n = integer(blk, "n", where, 64, minimum=2)
    eta = ctx.args.eta if ctx.args.eta is not None else number(blk, "eta", where, 0.0)
    if eta < 0:
        raise ConfigError("must be nonnegative", f"{where}.eta")
    tol = ctx.tol(blk, where, 1e-6)
    margin = number(blk, "margin", where, 1e-6, positive=True)
    rows, summary, verdicts = [], [], []
    for k, iv in select_intervals(ctx, blk, where, default_all=True):
        zs = [complex(lam, eta) for lam in iv.interior_grid(n, margin)]
        samples = ctx.map(lambda z: _sample(problem, z), zs)
        failed = [s for s in samples if not s.ok]
        max_b = max((abs(s.b) for s in samples if s.ok), default=float("nan"))
        ok = not failed and max_b <= tol
        verdicts.append({"band": k, "c": iv.c, "d": iv.d, "max_b": max_b, "failed": len(failed), "reflectionless": ok})
        summary.append(
            f"band {k} ({iv.c:.10g}, {iv.d:.10g}): max|b|={max_b:.3e} "
            f"reflectionless={'yes' if ok else 'no'} (tol {tol:g}, {len(failed)} failed points)"
        )
        for s in samples:
            rows.append((s.z.real, s.z.imag, s.a.real, s.a.imag, s.b.real, s.b.imag, abs(s.b), s.wronskian_drift))
    header = ["re_z", "im_z", "re_a", "im_a", "re_b", "im_b", "abs_b", "wronskian_drift"]
    report = {"problem_hash": io.document_hash(problem), "intervals": verdicts, "samples": [dict(zip(header, r)) for r in rows]}
    return header, rows, report, summary, EXIT_OK


def _m_table(ctx: Context, blk: dict, where: str):
    tol = ctx.tol(blk, where, 1e-8)
    coeffs = ctx.coefficients
    xs = numbers(blk, "x", where, [0.0])
    if "lambda" in blk:
        lams = complexes(blk, "lambda", where)
    else:
        _, iv = select_intervals(ctx, blk, where, default_all=False)[0]
        eta = ctx.args.eta if ctx.args.eta is not None else number(blk, "eta", where, 1e-2 * iv.width)
        lams = [complex(lam, eta) for lam in iv.interior_grid(integer(blk, "n", where, 16, minimum=2), 1e-3)]
    if any(lam.imag <= 0 for lam in lams):
        raise ConfigError("m-functions need Im(lambda) > 0", f"{where}.lambda")
    pairs = [(x, lam) for x in xs for lam in lams]
    discs = ctx.map(lambda p: weyl_limit(coeffs, p[0], p[1], tol), pairs)
    rows = [(x, lam.real, lam.imag, d.center.real, d.center.imag, d.radius) for (x, lam), d in zip(pairs, discs)]
    header = ["x", "re_lambda", "im_lambda", "re_m", "im_m", "radius"]
    im_min = min(r[4] for r in rows)
    report = {"rows": [dict(zip(header, r)) for r in rows], "im_m_min": im_min}
    return header, rows, report, [f"mfun table: {len(rows)} values, min Im m = {im_min:.6g}"], EXIT_OK


def _m_asy(ctx: Context, blk: dict, where: str):
    tol = ctx.tol(blk, where, 1e-10)
    coeffs = ctx.coefficients
    xs = numbers(blk, "x", where)
    mus = complexes(blk, "mu", where, [1j])
    rs = numbers(blk, "r", where, [1e2, 1e3, 1e4, 1e5, 1e6])
    if any(r <= 0 for r in rs):
        raise ConfigError("must be positive", f"{where}.r")
    if any(mu.imag <= 0 for mu in mus):
        raise ConfigError("need Im(mu) > 0", f"{where}.mu")
    for x in xs:
        if coeffs.is_breakpoint(x):
            raise ConfigError(f"x={x!r} is a breakpoint", f"{where}.x")
    pairs = [(x, mu) for x in xs for mu in mus]
    results = ctx.map(lambda p: m_asymptotics_probe(coeffs, p[0], p[1], rs, tol), pairs)
    rows, summary, probes = [], [], []
    for (x, mu), (table, dec) in zip(pairs, results):
        for row in table:
            rows.append((x, mu.real, mu.imag, row.r, row.ratio.real, row.ratio.imag, row.target.real, row.target.imag, row.deviation))
        probes.append({"x": x, "mu": cplx(mu), "deviation": [row.deviation for row in table], "decreasing": dec})
        summary.append(f"x={x:g} mu={mu}: deviation {table[0].deviation:.3e} -> {table[-1].deviation:.3e} decreasing={'yes' if dec else 'no'}")
    header = ["x", "re_mu", "im_mu", "r", "re_ratio", "im_ratio", "re_target", "im_target", "deviation"]
    return header, rows, {"r": rs, "probes": probes}, summary, EXIT_OK


def _m_converge(ctx: Context, blk: dict, where: str):
    if "target" not in blk:
        raise ConfigError("missing field", f"{where}.target")
    target = io.block_from_dict(blk["target"], f"{where}.target")
    ns = [int(v) for v in numbers(blk, "n", where, [2, 4, 8, 16, 32, 64, 128])]
    if any(n < 1 for n in ns):
        raise ConfigError("mollifier indices must be >= 1", f"{where}.n")
    xs = numbers(blk, "x", where)
    lams = complexes(blk, "lambda", where)
    if any(lam.imag <= 0 for lam in lams):
        raise ConfigError("m-functions need Im(lambda) > 0", f"{where}.lambda")
    final = number(blk, "final_tol", where, 1e-3, positive=True)
    rep = m_convergence_experiment(target, ns, xs, lams, final_tol=final, m_tol=ctx.tol(blk, where, 1e-10), mapper=ctx.map)
    rows = [(n, s, im) for n, s, im in zip(rep["n"], rep["sup_diff"], rep["im_m_min_by_n"])]
    summary = [
        f"converge: sup|m_n - m_0| {rep['sup_diff'][0]:.3e} -> {rep['sup_diff'][-1]:.3e}, "
        f"min Im m = {rep['im_m_min']:.6g}, passed={'yes' if rep['passed'] else 'no'}"
    ]
    return ["n", "sup_diff", "im_m_min"], rows, rep, summary, EXIT_OK


def cmd_mfun(ctx: Context):
    mode = ctx.args.mode
    where = f"mfun.{mode}"
    blk = ctx.block("mfun")
    sub = blk.get(mode, blk)
    if not isinstance(sub, dict):
        raise ConfigError("expected an object", where)
    return {"table": _m_table, "asy": _m_asy, "converge": _m_converge}[mode](ctx, sub, where)


def cmd_liouville(ctx: Context):
    where = "liouville"
    blk = ctx.block(where)
    if "p1" in blk or "p2" in blk:
        p1 = io.block_from_dict(blk.get("p1"), f"{where}.p1")
        p2 = io.block_from_dict(blk.get("p2"), f"{where}.p2")
        default_window = 1.0
    else:
        problem = ctx.scattering_problem()
        p1, p2 = problem.coefficients, problem.background
        default_window = problem.D + 1.0
    window = number(blk, "window", where, default_window, positive=True)
    fmap = build_map(p1, p2, window)
    unit = unitarity_battery(fmap, integer(blk, "n", where, 4000, minimum=10))
    weights = np.append(fmap.weights, fmap.weights[-1])
    rows = list(zip(fmap.knots.tolist(), fmap.images.tolist(), weights.tolist()))
    report = {
        "identity": fmap.identity,
        "window": window,
        "knots": fmap.knots.tolist(),
        "t": fmap.images.tolist(),
        "s": fmap.weights.tolist(),
        "unitarity_residual": list(unit),
    }
    summary = [
        f"liouville: {fmap.knots.size} knots, identity={'yes' if fmap.identity else 'no'}, "
        f"unitarity residual {unit[0]:.3e} -> {unit[1]:.3e}"
    ]
    return ["x", "t", "s"], rows, report, summary, EXIT_OK


def cmd_verify(ctx: Context):
    which = ctx.args.which
    where = f"verify.{which}"
    blk = ctx.block("verify")
    sub = blk.get(which, blk)
    if not isinstance(sub, dict):
        raise ConfigError("expected an object", where)
    problem = ctx.scattering_problem()
    _, iv = select_intervals(ctx, sub, where, default_all=False)[0]
    fixture = io.document_hash(problem)
    if which == "theorem":
        etas = [ctx.args.eta] if ctx.args.eta is not None else numbers(sub, "etas", where, [0.1, 1.0])
        if any(e <= 0 for e in etas):
            raise ConfigError("need eta > 0", f"{where}.etas")
        try:
            rep = verify_equivalence(
                problem,
                iv,
                n_lambda=integer(sub, "n_lambda", where, 16, minimum=2),
                etas=etas,
                tol=ctx.tol(sub, where, 1e-5),
                gate_tol=number(sub, "gate_tol", where, 1e-6, positive=True),
            )
        except PreconditionError as exc:
            doc = {"fixture_hash": fixture, "gate": "failed", "message": str(exc)}
            return ["key", "value"], [("gate", "failed")], doc, [f"theorem: {exc}"], EXIT_GATE
        doc = {"fixture_hash": fixture, "gate": "passed", **rep.to_dict()}
        code = EXIT_OK if rep.passed else EXIT_VERIFY
        summary = [
            f"theorem: max|b|={rep.max_b:.3e}, sup|m - m0|={rep.m_sup:.3e} (tol {rep.m_tol:g}), "
            f"unitarity {rep.unitarity[1]:.3e}, passed={'yes' if rep.passed else 'no'}"
        ]
    else:
        if not problem.perturbation.f.is_zero():
            raise ConfigError("the corollary applies only to perturbations with f = 0", "perturbation.f")
        rep = verify_f_zero_rigidity(problem, iv, tol=ctx.tol(sub, where, 1e-6), calibration=number(sub, "calibration", where, 1e-3, positive=True))
        doc = {"fixture_hash": fixture, **rep.to_dict()}
        code = {"consistent": EXIT_OK, "rejected": EXIT_GATE, "contradiction": EXIT_VERIFY}[rep.verdict]
        summary = [f"corollary: max|b|={rep.max_b:.3e}, ||g||_1={rep.g_l1:.6g}, verdict={rep.verdict}"]
    rows = [(k, v) for k, v in doc.items() if not isinstance(v, (list, dict))]
    return ["key", "value"], rows, doc, summary, code


def cmd_estimates(ctx: Context):
    where = "estimates"
    blk = ctx.block(where)
    coeffs = ctx.coefficients
    zs = complexes(blk, "z", where, [1 + 1j])
    xs = numbers(blk, "x", where, [0.0])
    span = number(blk, "span", where, 2.0, positive=True)
    init = complexes(blk, "init", where, [1.0, 0.0])
    if len(init) != 2:
        raise ConfigError("expected two entries", f"{where}.init")
    rows = []
    pairs = [(z, x) for z in zs for x in xs]
    for (z, x), (fw, bw) in zip(pairs, ctx.map(
        lambda p: (check_growth_bound(coeffs, p[0], p[1], p[1] + span, init),
                   check_growth_bound(coeffs, p[0], p[1] + span, p[1], init)), pairs)):
        rows.append(("growth", z.real, z.imag, x, x + span, fw.lhs, fw.rhs, fw.satisfied))
        rows.append(("growth", z.real, z.imag, x + span, x, bw.lhs, bw.rhs, bw.satisfied))
    if "target" in blk:
        target = io.block_from_dict(blk["target"], f"{where}.target")
        for n in [int(v) for v in numbers(blk, "n", where, [2, 8, 32, 128])]:
            approx = mollify_sequence(target, n)
            for z, x in pairs:
                r = check_difference_bound(target, approx, z, x + span, x, init)
                rows.append((f"difference_n{n}", z.real, z.imag, x, x + span, r.lhs, r.rhs, r.satisfied))
    floor = check_local_l2_floor(coeffs, zs, xs)
    rows.append(("local_l2_floor", float("nan"), float("nan"), float("nan"), float("nan"), 0.0, floor.min_ratio, floor.satisfied))
    upper = [z for z in zs if z.imag > 0]
    report = {"checks": [], "local_l2_floor": floor.to_dict()}
    if upper:
        disc = check_disc_bounds([coeffs], xs, upper, tol=ctx.tol(blk, where, 1e-10))
        rows.append(("disc_bounds", float("nan"), float("nan"), float("nan"), float("nan"), 0.0, disc.im_floor, disc.satisfied))
        report["disc_bounds"] = disc.to_dict()
    header = ["check", "re_z", "im_z", "x", "y", "lhs", "rhs", "satisfied"]
    report["checks"] = [dict(zip(header, r)) for r in rows]
    bad = sum(1 for r in rows if not r[-1])
    summary = [f"estimates: {len(rows)} checks, {bad} violated"]
    return header, rows, report, summary, EXIT_OK if bad == 0 else EXIT_NUMERICAL


COMMANDS = {
    "bands": (cmd_bands, "csv"),
    "scatter": (cmd_scatter, "csv"),
    "mfun": (cmd_mfun, None),
    "liouville": (cmd_liouville, "csv"),
    "verify": (cmd_verify, "json"),
    "estimates": (cmd_estimates, "json"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON problem document plus command blocks")
    common.add_argument("--out", metavar="PATH", help="write data here instead of standard output")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default depends on the command)")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for grid points")
    common.add_argument("--tol", type=float, metavar="X", help="override the command's main tolerance")
    common.add_argument("--eta", type=float, metavar="X", help="override the imaginary offset of energy grids")

    parser = argparse.ArgumentParser(prog="sturmscat", description="Spectral and scattering computations for periodic Sturm-Liouville problems.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bands", parents=[common], help="stability intervals of the background")
    sub.add_parser("scatter", parents=[common], help="scan of the scattering coefficients a, b")
    p = sub.add_parser("mfun", parents=[common], help="m-function tables, asymptotics, convergence")
    p.add_argument("mode", choices=("table", "asy", "converge"))
    sub.add_parser("liouville", parents=[common], help="Liouville map between two diffusion coefficients")
    p = sub.add_parser("verify", parents=[common], help="unitary-equivalence chain or its f = 0 corollary")
    p.add_argument("which", choices=("theorem", "corollary"))
    sub.add_parser("estimates", parents=[common], help="a-priori solution and disc bounds")
    return parser


def _render(fmt: str, header, rows, report) -> str:
    if fmt == "csv":
        return io.write_csv(header, rows)
    return io.dumps(_jsonable(report)) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("must be >= 1", "--threads")
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("must be positive", "--tol")
        if args.eta is not None and not (math.isfinite(args.eta) and args.eta >= 0):
            raise ConfigError("must be nonnegative", "--eta")
        config = io.load_json(args.config)
        if not isinstance(config, dict):
            raise ConfigError("expected a JSON object", "config")
        ctx = Context(args, config, Path(args.config).resolve().parent)
        fn, default_fmt = COMMANDS[args.command]
        header, rows, report, summary, code = fn(ctx)
        if default_fmt is None:
            default_fmt = "json" if args.mode == "converge" else "csv"
        text = _render(args.format or default_fmt, header, rows, report)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        Path(args.out).write_text(text)
        stream = sys.stdout
    else:
        sys.stdout.write(text)
        stream = sys.stderr
    for line in summary:
        print(line, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
