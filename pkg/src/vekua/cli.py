"""Command-line front end: ``vekua TASK -c config.json [overrides]``.

The config is one JSON document (see README for the schema).  Reports are
written to ``<output>.report`` as a timestamp line followed by a JSON body
with sorted keys, so two runs of the same config differ only in line one.
"""
from __future__ import annotations

import argparse
import copy
import datetime as _dt
import hashlib
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .conditions import (Spectrum, classify_lambda0, dc_prime_equivalence, diophantine_check,
                         find_resonances, global_constants, hit_to_dict, resonance_cross_check)
from .errors import ConfigError, HypothesisViolation, NumericalFailure, VekuaError
from .fields import (PairedField, apply_P, encode_mode, field_from_dict, field_to_dict, random_field,
                     solve_field)
from .group import FactorKind, GroupFactor, GroupModel, enumerate_modes, mode_scalars
from .modes import (TOL_DEGENERATE, SolverGrid, VekuaParams, build_mode_system, oracle_shooting,
                    rho_branch, solve_mode_forced)
from .trigpoly import CTrigPoly, TrigPoly

log = logging.getLogger("vekua")

TASKS = ("solve", "classify", "resonances", "diophantine", "oracle", "selftest")

EXIT_CODES = """exit codes:
  0  success
  1  unexpected internal error
  2  configuration or file error (includes alpha = 0, q changing sign)
  3  hypothesis violation (|alpha| = |delta| where rho vanishes)
  4  resonant mode (|D1| or |D2| below tolerance, singular monodromy)
  5  numerical failure (under-resolved grid, selftest failure)
  6  truncation not closed under conjugation
"""


@dataclass
class RunConfig:
    task: str
    params: VekuaParams
    bounds: tuple
    n_t: int | None
    k_bound: int
    forcing: dict | None
    output: str | None
    drift: list | None = None
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        text = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


# --------------------------------------------------------------------------- parsing

def _require(mapping, key, path):
    if not isinstance(mapping, Mapping) or key not in mapping:
        raise ConfigError(f"{path}.{key}: required field missing" if path else f"{key}: required field missing")
    return mapping[key]


def _finite(x, path) -> float:
    try:
        v = float(x)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: expected a number, got {x!r}") from exc
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite")
    return v


def _complex(x, path) -> complex:
    if isinstance(x, Mapping):
        return complex(_finite(x.get("re", 0.0), path + ".re"), _finite(x.get("im", 0.0), path + ".im"))
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"{path}: expected [re, im]")
        return complex(_finite(x[0], path + "[0]"), _finite(x[1], path + "[1]"))
    return complex(_finite(x, path))


def _trig(spec, path) -> TrigPoly:
    try:
        return TrigPoly.from_spec(spec)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _vector(x, n, path, default=None):
    if x is None:
        if default is None:
            raise ConfigError(f"{path}: required field missing")
        return [default] * n
    if isinstance(x, (int, float)):
        return [_finite(x, path)] * n
    if not isinstance(x, (list, tuple)) or len(x) != n:
        raise ConfigError(f"{path}: expected {n} entries (one per factor)")
    return [_finite(v, f"{path}[{i}]") for i, v in enumerate(x)]


def apply_overrides(raw: dict, delta=None, alpha_re=None, alpha_im=None, trunc_L=None, n_t=None) -> dict:
    raw = copy.deepcopy(raw)
    op = raw.setdefault("operator", {})
    if delta is not None:
        op["delta"] = delta
    if alpha_re is not None or alpha_im is not None:
        cur = _complex(op.get("alpha", 0.0), "operator.alpha") if "alpha" in op else 0j
        op["alpha"] = [alpha_re if alpha_re is not None else cur.real,
                       alpha_im if alpha_im is not None else cur.imag]
    tr = raw.setdefault("truncation", {})
    if trunc_L is not None:
        n = len(op.get("factors", [])) or 1
        tr["bounds"] = [trunc_L] * n
    if n_t is not None:
        tr["n_t"] = n_t
    return raw


def parse_config(text: str | dict, task: str | None = None) -> RunConfig:
    """Validate a JSON config (text or already-decoded mapping)."""
    if isinstance(text, str):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        raw = copy.deepcopy(text)
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a JSON object")
    task = task or raw.get("task")
    if task not in TASKS:
        raise ConfigError(f"task: expected one of {', '.join(TASKS)}, got {task!r}")
    raw["task"] = task

    op = _require(raw, "operator", "")
    kinds = _require(op, "factors", "operator")
    if not isinstance(kinds, list) or not kinds:
        raise ConfigError("operator.factors: expected a nonempty list of 'circle'/'su2'")
    factors = []
    for i, k in enumerate(kinds):
        try:
            factors.append(GroupFactor(FactorKind(k)))
        except ValueError as exc:
            raise ConfigError(f"operator.factors[{i}]: unknown factor {k!r}") from exc
    n = len(factors)
    lam = _vector(op.get("lambda"), n, "operator.lambda", 0.0)
    p0 = _vector(op.get("p0"), n, "operator.p0", 0.0)
    delta = _finite(_require(op, "delta", "operator"), "operator.delta")
    alpha = _complex(_require(op, "alpha", "operator"), "operator.alpha")
    if alpha == 0:
        raise ConfigError("operator.alpha: alpha = 0 is excluded; the operator requires alpha in C \\ {0}")
    s = _trig(op.get("s", 0.0), "operator.s")
    q = _trig(_require(op, "q", "operator"), "operator.q")
    group = GroupModel(tuple(factors), tuple(lam), tuple(p0))
    try:
        params = VekuaParams(group, delta, alpha, s, q)
    except ConfigError as exc:
        raise ConfigError(f"operator: {exc}") from exc
    drift = None
    if op.get("drift") is not None:
        d = op["drift"]
        if not isinstance(d, list) or len(d) != n:
            raise ConfigError("operator.drift: expected one trig polynomial per factor")
        drift = [_trig(x, f"operator.drift[{i}]") for i, x in enumerate(d)]
        for i, (p, m) in enumerate(zip(drift, p0)):
            if not math.isclose(p.mean, m, rel_tol=1e-12, abs_tol=1e-12):
                raise ConfigError(f"operator.drift[{i}]: mean {p.mean:g} must equal p0[{i}] = {m:g}")

    tr = raw.get("truncation", {})
    if not isinstance(tr, Mapping):
        raise ConfigError("truncation: expected an object")
    bounds = tr.get("bounds", tr.get("L"))
    if bounds is None:
        raise ConfigError("truncation.bounds: required field missing")
    if isinstance(bounds, (int, float)):
        bounds = [bounds] * n
    if not isinstance(bounds, list) or len(bounds) != n:
        raise ConfigError(f"truncation.bounds: expected {n} entries")
    clean_bounds = []
    for i, (fac, bd) in enumerate(zip(factors, bounds)):
        v = _finite(bd, f"truncation.bounds[{i}]")
        if v < 0:
            raise ConfigError(f"truncation.bounds[{i}]: must be >= 0")
        if fac.kind is FactorKind.CIRCLE:
            if v != int(v):
                raise ConfigError(f"truncation.bounds[{i}]: circle bound must be an integer")
            clean_bounds.append(int(v))
        else:
            if 2 * v != int(2 * v):
                raise ConfigError(f"truncation.bounds[{i}]: SU(2) bound must be a half-integer")
            clean_bounds.append(int(v) if v == int(v) else v)
    n_t = tr.get("n_t")
    if n_t is not None:
        if not isinstance(n_t, int) or n_t < 8:
            raise ConfigError("truncation.n_t: expected an integer >= 8")
    k_bound = tr.get("k_bound", 50)
    if not isinstance(k_bound, int) or k_bound < 0:
        raise ConfigError("truncation.k_bound: expected a nonnegative integer")

    forcing = raw.get("forcing")
    if task in ("solve",) and forcing is None:
        raise ConfigError("forcing: forcing required for task=solve")
    if forcing is not None and not isinstance(forcing, Mapping):
        raise ConfigError("forcing: expected an object with 'path', 'modes' or 'random'")
    options = raw.get("options", {}) or {}
    if not isinstance(options, Mapping):
        raise ConfigError("options: expected an object")
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a path prefix string")
    return RunConfig(task, params, tuple(clean_bounds), n_t, k_bound, forcing, output, drift, dict(options), raw)


# --------------------------------------------------------------------------- forcing

def load_forcing(cfg: RunConfig, base: Path | None = None) -> PairedField:
    spec = cfg.forcing
    model = cfg.params.group
    support = frozenset(enumerate_modes(model, cfg.bounds))
    if spec is None:
        raise ConfigError("forcing: forcing required")
    if "path" in spec:
        path = Path(spec["path"])
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"forcing.path: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"forcing.path: {path} is not valid JSON: {exc}") from exc
        return field_from_dict(model, data, support)
    if "modes" in spec:
        return field_from_dict(model, spec, support)
    if "random" in spec:
        r = spec["random"] or {}
        rng = np.random.default_rng(int(r.get("seed", 0)))
        u = random_field(model, cfg.bounds, rng, int(r.get("degree", 4)), float(r.get("decay", 1.0)))
        paired = PairedField.from_primal(u)
        if r.get("manufactured", True):
            return apply_P(cfg.params, paired, cfg.drift)
        return paired
    raise ConfigError("forcing: expected 'path', 'modes' or 'random'")


# --------------------------------------------------------------------------- tasks

def _spectrum(cfg: RunConfig) -> Spectrum:
    return Spectrum.from_model(cfg.params.group, cfg.bounds)


def _say(msg: str) -> None:
    # summaries go to stderr so a report on stdout stays parseable
    print(msg, file=sys.stderr)


def task_solve(cfg: RunConfig, base=None) -> tuple[dict, dict]:
    f = load_forcing(cfg, base)
    rep = solve_field(cfg.params, f, n_t=cfg.n_t, drift=cfg.drift,
                      workers=cfg.options.get("workers"))
    _say(f"solved {len(rep.modes)} modes at n_t={rep.n_t}; residual max {rep.residual_max:.3e}")
    body = {"solve": rep.to_dict()}
    extras = {"solution.json": json.dumps(field_to_dict(rep.solution), sort_keys=True) + "\n",
              "decay.csv": rep.decay.to_csv()}
    return body, extras


def task_classify(cfg: RunConfig) -> tuple[dict, dict]:
    params = cfg.params
    M = float(cfg.options.get("M", 2.0))
    sp = _spectrum(cfg)
    if params.group.lambda_is_zero:
        verdict = classify_lambda0(params, sp, cfg.k_bound, M, cfg.bounds)
        _say(verdict.summary)
        return {"classify": verdict.to_dict()}, {}
    # lambda != 0: check rho != 0, absence of resonances and the denominator bound directly
    c = global_constants(params)
    rho = np.atleast_1d(rho_branch(sp.a, params.delta, params.alpha))
    degenerate = [i for i in range(len(sp)) if abs(rho[i]) ** 2 <= TOL_DEGENERATE * (1 + abs(sp.a[i])) ** 2]
    if degenerate:
        raise HypothesisViolation(f"rho vanishes at mode {sp.label(degenerate[0])}")
    hits = find_resonances(c, sp, cfg.k_bound)
    dio = diophantine_check(params, sp, M, kind="III", truncation=cfg.bounds)
    ok = not hits and dio.holds
    summary = "general: " + ("solvable up to truncation" if ok else "conditions fail")
    _say(summary)
    return {"classify": {"case": None, "summary": summary, "solvable": ok,
                         "resonance_hits": [hit_to_dict(h) for h in hits],
                         "diophantine": dio.to_dict()}}, {}


def task_resonances(cfg: RunConfig) -> tuple[dict, dict]:
    c = global_constants(cfg.params)
    sp = _spectrum(cfg)
    hits = find_resonances(c, sp, cfg.k_bound)
    cross = resonance_cross_check(c, sp, cfg.k_bound)
    ks = sorted({h.k for h in hits})
    _say(f"{len(hits)} resonance hits; k values {ks}")
    return {"resonances": {"n_modes": len(sp), "k_bound": cfg.k_bound, "k_values": ks,
                           "hits": [hit_to_dict(h) for h in hits],
                           "cross_check_agree": cross["agree"],
                           "constants": {"A0": [c.A0.real, c.A0.imag], "B0": [c.B0.real, c.B0.imag],
                                         "s0": c.s0, "q0": c.q0}}}, {}


def task_diophantine(cfg: RunConfig) -> tuple[dict, dict]:
    params = cfg.params
    M = float(cfg.options.get("M", 2.0))
    sp = _spectrum(cfg)
    out = {"III": diophantine_check(params, sp, M, kind="III", truncation=cfg.bounds).to_dict()}
    if abs(params.alpha) < abs(params.delta) and params.s0 == 0 and params.group.lambda_is_zero:
        pair = dc_prime_equivalence(params, sp, M, cfg.bounds)
        out["DC"] = pair.dc.to_dict()
        out["DC_prime"] = pair.to_dict()
    _say(", ".join(f"{k}: {v['verdict'] if 'verdict' in v else v['agree']}" for k, v in out.items()))
    return {"diophantine": out}, {}


def task_oracle(cfg: RunConfig, base=None) -> tuple[dict, dict]:
    params = cfg.params
    n_t = cfg.n_t or 256
    refine = int(cfg.options.get("refine", 16))
    max_modes = int(cfg.options.get("max_modes", 32))
    if cfg.forcing is not None:
        f = load_forcing(cfg, base)
    else:
        rng = np.random.default_rng(int(cfg.options.get("seed", 0)))
        f = PairedField.from_primal(random_field(params.group, cfg.bounds, rng, 3))
    modes = f.modes()[:max_modes]
    grid = SolverGrid(params, n_t)
    F1 = [f.primal.get(m) if f.primal.get(m) is not None else CTrigPoly.zero() for m in modes]
    F2 = [f.conj.get(m) if f.conj.get(m) is not None else CTrigPoly.zero() for m in modes]
    scal = [mode_scalars(params.group, m) for m in modes]
    sh = oracle_shooting(params, [s.a for s in scal], [s.b for s in scal], F1, F2, n_t, refine,
                         raise_singular=False)
    rows = []
    for i, (m, s) in enumerate(zip(modes, scal)):
        system = build_mode_system(params, s, check=False, mode=m)
        row = {"mode": encode_mode(params.group, m), "a": s.a, "b": s.b,
               "abs_D1": abs(system.D1), "abs_D2": abs(system.D2), "smin": float(sh.smin[i])}
        if system.is_resonant():
            row.update(status="resonant", deviation=None)
        else:
            sol = solve_mode_forced(system, F1[i], F2[i], grid)
            ref = max(np.max(np.abs(sh.w1[i])), np.max(np.abs(sh.w2[i])), 1e-300)
            dev = max(np.max(np.abs(sol.w1 - sh.w1[i])), np.max(np.abs(sol.w2 - sh.w2[i]))) / ref
            row.update(status="ok", deviation=float(dev))
        rows.append(row)
    devs = [r["deviation"] for r in rows if r["deviation"] is not None]
    _say(f"{len(rows)} modes; max relative deviation {max(devs) if devs else float('nan'):.3e}")
    return {"oracle": {"n_t": n_t, "refine": refine, "rows": rows,
                       "max_deviation": max(devs) if devs else None}}, {}


def task_selftest(cfg: RunConfig | None) -> tuple[dict, dict]:
    from .acceptance import run_all
    scale = "reduced"
    if cfg is not None:
        scale = cfg.options.get("scale", "reduced")
    results = run_all(scale=scale)
    for r in results:
        _say(r.line())
    body = {"selftest": {"scale": scale, "results": [r.to_dict() for r in results],
                         "passed": all(r.passed for r in results)}}
    if not all(r.passed for r in results):
        raise NumericalFailure("selftest: " + ", ".join(r.name for r in results if not r.passed) + " failed")
    return body, {}


# --------------------------------------------------------------------------- reports

def format_report(cfg: RunConfig, body: dict, timestamp: str | None = None) -> str:
    timestamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    doc = {"version": __version__, "task": cfg.task, "config_hash": cfg.config_hash,
           "truncation": {"bounds": list(cfg.bounds), "n_t": cfg.n_t, "k_bound": cfg.k_bound},
           "config": cfg.raw, **body}
    return f"# vekua report {timestamp}\n" + json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def read_report(text: str) -> dict:
    """Parse a report written by :func:`format_report` (skips the timestamp line)."""
    return json.loads(text.split("\n", 1)[1])


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def run(cfg: RunConfig, base: Path | None = None) -> int:
    """Execute ``cfg`` and write artifacts; returns the exit status."""
    handlers = {"solve": lambda: task_solve(cfg, base), "classify": lambda: task_classify(cfg),
                "resonances": lambda: task_resonances(cfg), "diophantine": lambda: task_diophantine(cfg),
                "oracle": lambda: task_oracle(cfg, base), "selftest": lambda: task_selftest(cfg)}
    body, extras = handlers[cfg.task]()
    report = format_report(cfg, body)
    if cfg.output:
        prefix = Path(cfg.output)
        try:
            prefix.parent.mkdir(parents=True, exist_ok=True)
            Path(f"{prefix}.report").write_text(report)
            for suffix, text in extras.items():
                Path(f"{prefix}.{suffix}").write_text(text)
        except OSError as exc:
            raise ConfigError(f"output: cannot write {prefix}: {exc}") from exc
    else:
        sys.stdout.write(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vekua", description="Spectral solver and solvability checks for Vekua-type operators.",
        epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("-c", "--config", help="JSON run configuration (optional for selftest)")
    parser.add_argument("-o", "--output", help="output path prefix (overrides config 'output')")
    parser.add_argument("--delta", type=float)
    parser.add_argument("--alpha-re", type=float)
    parser.add_argument("--alpha-im", type=float)
    parser.add_argument("--trunc-L", type=float, help="set every factor's truncation bound")
    parser.add_argument("--nt", type=int, help="time grid size")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=f"vekua {__version__}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config is None:
            if args.task != "selftest":
                raise ConfigError("-c/--config is required for this task")
            body, _ = task_selftest(None)
            return 0
        path = Path(args.config)
        try:
            raw = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        trunc = args.trunc_L
        if trunc is not None and trunc == int(trunc):
            trunc = int(trunc)
        raw = apply_overrides(raw, args.delta, args.alpha_re, args.alpha_im, trunc, args.nt)
        if args.output:
            raw["output"] = args.output
        cfg = parse_config(raw, task=args.task)
        return run(cfg, base=path.parent)
    except VekuaError as exc:
        mode = getattr(exc, "mode", None)
        extra = f" (mode {mode})" if mode is not None else ""
        print(f"vekua: error: {exc}{extra}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
