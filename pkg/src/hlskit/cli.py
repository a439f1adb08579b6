"""``hlskit`` command line.

Exit status: 0 on success, 1 when a check fails (metric validation, complex
validation, measure bounds), 2 on structural or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import io
from .config import DEFAULTS
from .convergence import iff_audit, run_convergence
from .errors import HlsError, StructuralError
from .foliation import TANGENTIAL, TRANSVERSE, WarpSpec, check_complex, glue_complexes, hls, warp
from .generators import generate, realize_graph
from .gh import gh_estimate, gh_exact, GhEstimate
from .graph import glue_graphs, measure_ball_check, sample_graph
from .metric import validate_metric
from .quotient import collapse_subset, glue, orbit_quotient

COMMANDS = (
    "validate", "hls", "warp", "glue", "collapse", "orbit", "gh",
    "realize", "sample", "measure-check", "converge", "audit", "generate",
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    input2: str | None = None
    output: str | None = None
    format: str = "json"
    seed: int = int(DEFAULTS["seed"])
    tol: float | None = None
    cap: int | None = None
    eps_grid: tuple[float, ...] = ()
    ns: tuple[int, ...] = ()
    resolution: int = 16
    mapping: str | None = None
    subset: tuple[str, ...] = ()
    mode: str | None = None
    family: str | None = None
    params: tuple[tuple[str, str], ...] = ()
    step: float | None = None
    budget: int | None = None
    k: int | None = None
    value: float | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise StructuralError(f"unknown command {self.command!r}")
        for name in ("tol", "step", "value"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise StructuralError(f"--{name} must be positive, got {v}")
        if any(not e > 0 for e in self.eps_grid):
            raise StructuralError("--eps-grid values must be positive")
        if self.resolution < 1:
            raise StructuralError("--resolution must be positive")
        for name in ("cap", "budget", "k"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise StructuralError(f"--{name} must be at least 1")


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(t) for t in s.split(",") if t.strip())


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(t) for t in s.split(",") if t.strip())


def _params(s: str) -> tuple[tuple[str, str], ...]:
    out = []
    for item in s.split(","):
        if not item.strip():
            continue
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"parameter {item!r} is not key=value")
        out.append((key.strip(), val.strip()))
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hlskit", description="Hausdorff leaf spaces of discrete foliations.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input")
    p.add_argument("--input2")
    p.add_argument("--output")
    p.add_argument("--format", choices=("json", "dot", "csv"), default="json")
    p.add_argument("--seed", type=int, default=int(DEFAULTS["seed"]))
    p.add_argument("--tol", type=float, help="validation tolerance, zero-collapse threshold or convergence tolerance")
    p.add_argument("--cap", type=int, help="exact GH cap on |x|*|y|")
    p.add_argument("--eps-grid", type=_floats, default=())
    p.add_argument("--ns", type=_ints, default=())
    p.add_argument("--resolution", type=int, default=16)
    p.add_argument("--mapping", help="JSON file: gluing pairs, warp values or orbit generators")
    p.add_argument("--subset", type=lambda s: tuple(t for t in s.split(",") if t), default=())
    p.add_argument("--mode", choices=("strict", "pseudo", TANGENTIAL, TRANSVERSE))
    p.add_argument("--family")
    p.add_argument("--params", type=_params, default=(), help="generator parameters as k=v,k=v")
    p.add_argument("--step", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--value", type=float, help="constant warp value")
    return p


def _need(cfg: RunConfig, *names: str):
    for n in names:
        if getattr(cfg, n) in (None, ()):
            raise StructuralError(f"{cfg.command} needs --{n.replace('_', '-')}")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _coerce(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def dispatch(cfg: RunConfig) -> int:
    cmd = cfg.command
    if cmd == "generate":
        _need(cfg, "family")
        k = generate(cfg.family, **{key: _coerce(v) for key, v in cfg.params})
        _emit(cfg, io.complex_to_dot(k) if cfg.format == "dot" else io.dumps(k))
        return 0

    _need(cfg, "input")
    data = io.read(cfg.input)

    if cmd == "validate":
        if isinstance(data, dict) and "leaf_of" in data:
            problems = check_complex(io.complex_from_json(data))
            _emit(cfg, io.dumps({"kind": "complex", "ok": not problems, "problems": problems}))
            for msg in problems:
                print(f"complex: {msg}", file=sys.stderr)
            return 1 if problems else 0
        space = io.space_like(data)
        rep = validate_metric(space, cfg.mode if cfg.mode in ("strict", "pseudo") else "strict", cfg.tol)
        out = {
            "kind": "space",
            "mode": rep.mode,
            "tol": rep.tol,
            "ok": rep.ok,
            "violations": [{"axiom": v.axiom, "points": list(v.points), "amount": v.amount} for v in rep.violations],
        }
        _emit(cfg, io.dumps(out))
        for v in rep.violations[:20]:
            print(f"violation: {v}", file=sys.stderr)
        return 0 if rep.ok else 1

    if cmd == "hls":
        h = hls(io.complex_from_json(data), cfg.tol)
        if cfg.format == "dot":
            _emit(cfg, io.space_to_dot(h.space))
        else:
            _emit(cfg, io.dumps(h))
            if cfg.output:
                Path(cfg.output).with_suffix(".dot").write_text(io.space_to_dot(h.space), encoding="utf-8")
        return 0

    if cmd == "warp":
        k = io.complex_from_json(data)
        if cfg.mapping:
            spec = io.warp_from_json(io.read(cfg.mapping))
        elif cfg.value is not None:
            spec = WarpSpec.constant(k, cfg.value)
        else:
            raise StructuralError("warp needs --mapping or --value")
        out = warp(k, spec)
        _emit(cfg, io.complex_to_dot(out) if cfg.format == "dot" else io.dumps(out))
        return 0

    if cmd == "glue":
        _need(cfg, "input2", "mapping")
        other = io.read(cfg.input2)
        pairs = io.relation_from_json(io.read(cfg.mapping))
        if "leaf_of" in data:
            mode = cfg.mode if cfg.mode in (TANGENTIAL, TRANSVERSE) else TANGENTIAL
            out = glue_complexes(io.complex_from_json(data), io.complex_from_json(other), dict(pairs), mode)
            _emit(cfg, io.complex_to_dot(out) if cfg.format == "dot" else io.dumps(out))
        elif "nodes" in data:
            g = glue_graphs(io.metric_graph_from_json(data), io.metric_graph_from_json(other), pairs, ("a:", "b:"))
            _emit(cfg, io.graph_to_dot(g) if cfg.format == "dot" else io.dumps(g))
        else:
            q = glue(io.space_like(data), io.space_like(other), dict(pairs), zero_tol=cfg.tol)
            _emit(cfg, io.space_to_dot(q.space) if cfg.format == "dot" else io.dumps(q))
        return 0

    if cmd == "collapse":
        _need(cfg, "subset")
        q = collapse_subset(io.space_like(data), cfg.subset, cfg.tol)
        _emit(cfg, io.space_to_dot(q.space) if cfg.format == "dot" else io.dumps(q))
        return 0

    if cmd == "orbit":
        _need(cfg, "mapping")
        gens = io.read(cfg.mapping)
        if isinstance(gens, dict):
            gens = [gens]
        q = orbit_quotient(io.space_like(data), gens, cfg.tol)
        _emit(cfg, io.space_to_dot(q.space) if cfg.format == "dot" else io.dumps(q))
        return 0

    if cmd == "gh":
        _need(cfg, "input2")
        x, y = io.space_like(data), io.space_like(io.read(cfg.input2))
        cap = DEFAULTS["gh_exact_cap"] if cfg.cap is None else cfg.cap
        if len(x) * len(y) <= cap:
            value, c = gh_exact(x, y, cap=cap, witness=True)
            est = GhEstimate(value, value, "exact", c)
        else:
            est = gh_estimate(x, y, cfg.k, cfg.budget, cfg.seed)
        _emit(cfg, io.dumps(est))
        return 0

    if cmd == "realize":
        k = realize_graph(io.metric_graph_from_json(data), cfg.resolution)
        _emit(cfg, io.complex_to_dot(k) if cfg.format == "dot" else io.dumps(k))
        return 0

    if cmd == "sample":
        g = io.metric_graph_from_json(data)
        step = cfg.step if cfg.step is not None else 1.0 / cfg.resolution
        s = sample_graph(g, step)
        _emit(cfg, io.space_to_dot(s) if cfg.format == "dot" else io.dumps(s))
        return 0

    if cmd == "measure-check":
        rep = measure_ball_check(io.metric_graph_from_json(data))
        out = {
            "beta": rep.beta,
            "eta0": rep.eta0,
            "min_ratio": rep.min_ratio,
            "max_ratio": rep.max_ratio,
            "samples": rep.samples,
            "passed": rep.passed,
        }
        _emit(cfg, io.dumps(out))
        if not rep.passed:
            print(f"measure bounds fail: ratios [{rep.min_ratio}, {rep.max_ratio}] vs beta {rep.beta}", file=sys.stderr)
        return 0 if rep.passed else 1

    if cmd == "converge":
        _need(cfg, "ns")
        rep = run_convergence(io.sequence_from_json(data), cfg.ns, cfg.tol, cfg.seed, cfg.budget)
        if cfg.format == "json":
            out = {
                "verdict": rep.verdict,
                "tau_conv": rep.tau_conv,
                "rows": [r.__dict__ for r in rep.rows],
            }
            _emit(cfg, io.dumps(out))
        else:
            _emit(cfg, rep.to_csv())
        return 0

    if cmd == "audit":
        _need(cfg, "ns", "eps_grid")
        rep = iff_audit(io.sequence_from_json(data), cfg.eps_grid, cfg.ns, cfg.tol, cfg.seed, cfg.budget)
        _emit(cfg, rep.convergence.to_csv() if cfg.format == "csv" else io.dumps(rep.to_json()))
        return 0

    raise StructuralError(f"unhandled command {cmd!r}")  # pragma: no cover


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items()})
        return dispatch(cfg)
    except (HlsError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"hlskit {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
