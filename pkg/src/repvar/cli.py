"""Command-line front end: ``repvar <command> [inputs...] [flags]``.

Every command writes ``<command>.json`` (machine report with the effective
configuration) and ``<command>.txt`` (human summary) into the output
directory.  Exit codes: 0 success, 2 a check or convergence failure, 3 an
invalid configuration or input file.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from . import cohomology as co
from . import extmoduli as em
from . import io
from . import liegroup as lg
from . import localmodel as lm
from . import reduction as rd
from .presentation import CentralTwist, UnsupportedTwist

COMMANDS = ("verify", "sample", "flow", "cohomology", "pairing", "stratify", "localmodel", "compare")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 2, 3

DEFAULTS = {
    "group": {"family": "SpecialLinear", "n": 2, "scale": 1.0},
    "genus": 2,
    "twist": 0,
    "seed": 0,
    "samples": 1,
    "tolerances": {"grad": 1e-8, "svd": 1e-8, "fd_step": 1e-5},
    "flow": {"initial_step": 0.25, "max_iter": 5000, "backtrack": 0.5, "armijo": 1e-4},
    "output": {"dir": "."},
    "checks": [],
    "model": None,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    data: dict
    explicit: set = field(default_factory=set)

    @property
    def spec(self) -> lg.GroupSpec:
        g = self.data["group"]
        return lg.GroupSpec(g["family"], g["n"], g["scale"])

    @property
    def twist(self) -> CentralTwist:
        return CentralTwist(self.spec, self.data["twist"])

    @property
    def flow_config(self) -> rd.FlowConfig:
        f = self.data["flow"]
        return rd.FlowConfig(
            initial_step=f["initial_step"],
            max_iter=f["max_iter"],
            grad_tol=self.data["tolerances"]["grad"],
            backtrack=f["backtrack"],
            armijo=f["armijo"],
        )

    @property
    def out_dir(self) -> Path:
        return Path(self.data["output"]["dir"])


def _check_type(path: str, value, kind):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}: expected integer, got boolean")
    if not isinstance(value, kind):
        raise ConfigError(f"{path}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _merge(defaults: dict, given: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        path = prefix + key
        if key not in defaults:
            raise ConfigError(f"{path}: unknown field")
        ref = defaults[key]
        if isinstance(ref, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: expected object")
            out[key] = _merge(ref, value, path + ".")
        elif ref is None:
            out[key] = None if value is None else _check_type(path, value, str)
        else:
            out[key] = _check_type(path, value, type(ref))
    return out


def validate(data: dict) -> None:
    g = data["group"]
    try:
        lg.Family(g["family"])
    except ValueError:
        raise ConfigError(f"group.family: expected GeneralLinear or SpecialLinear, got {g['family']!r}") from None
    if not 1 <= g["n"] <= 3:
        raise ConfigError(f"group.n: supported sizes are 1..3, got {g['n']}")
    if g["scale"] == 0:
        raise ConfigError("group.scale: must be nonzero")
    if data["genus"] < 1:
        raise ConfigError(f"genus: must be at least 1, got {data['genus']}")
    if data["samples"] < 1:
        raise ConfigError(f"samples: must be at least 1, got {data['samples']}")
    for key, value in data["tolerances"].items():
        if value <= 0:
            raise ConfigError(f"tolerances.{key}: must be positive")
    f = data["flow"]
    for key in ("initial_step", "max_iter", "armijo"):
        if f[key] <= 0:
            raise ConfigError(f"flow.{key}: must be positive")
    if not 0 < f["backtrack"] < 1:
        raise ConfigError("flow.backtrack: must lie in (0, 1)")
    for name in data["checks"]:
        if name not in checks.SUITE:
            raise ConfigError(f"checks: unknown check {name!r}; choose from {', '.join(checks.SUITE)}")
    if lg.Family(g["family"]) is lg.Family.SPECIAL_LINEAR and data["twist"] != 0:
        raise ConfigError(
            "twist: SpecialLinear has trivial compact center (z = 0), so only twist 0 is admissible"
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="repvar", description="Surface-group representation variety toolkit.")
    parser.add_argument("command", help="one of: " + ", ".join(COMMANDS))
    parser.add_argument("inputs", nargs="*", help="input files (points, model config) or check names")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--group", help="gl2, sl2, gl3 or sl3")
    parser.add_argument("--genus", type=int)
    parser.add_argument("--twist", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--tol-grad", type=float)
    parser.add_argument("--tol-svd", type=float)
    parser.add_argument("--fd-step", type=float)
    parser.add_argument("--samples", type=int)
    return parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_config(path=None, flags: dict | None = None) -> RunConfig:
    """Defaults, then the JSON file at ``path``, then non-``None`` flag values."""
    given = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
        if text.strip():
            try:
                given = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config: invalid JSON ({exc})") from None
            if not isinstance(given, dict):
                raise ConfigError("config: top level must be an object")
    data = _merge(DEFAULTS, given)
    explicit = {k for k in given}
    flags = flags or {}
    if flags.get("group") is not None:
        try:
            spec = lg.GroupSpec.from_label(flags["group"], data["group"]["scale"])
        except lg.LieGroupError as exc:
            raise ConfigError(f"group: {exc}") from None
        data["group"].update(family=spec.family.value, n=spec.n)
        explicit.add("group")
    simple = {"genus": "genus", "twist": "twist", "seed": "seed", "samples": "samples"}
    for flag, key in simple.items():
        if flags.get(flag) is not None:
            data[key] = flags[flag]
            explicit.add(key)
    nested = {"tol_grad": ("tolerances", "grad"), "tol_svd": ("tolerances", "svd"), "fd_step": ("tolerances", "fd_step")}
    for flag, (sec, key) in nested.items():
        if flags.get(flag) is not None:
            data[sec][key] = flags[flag]
    if flags.get("out") is not None:
        data["output"]["dir"] = flags["out"]
    validate(data)
    return RunConfig(data, explicit)


# commands ----------------------------------------------------------------------


def _points(cfg: RunConfig, inputs) -> list:
    if inputs:
        spec = cfg.spec if "group" in cfg.explicit else None
        pts = []
        for path in inputs:
            pts.extend(io.read_points_jsonl(path, spec) if str(path).endswith(".jsonl") else [io.load_point(path, spec)])
        return pts
    return [
        em.sample_fiber_point(cfg.spec, cfg.data["genus"], cfg.twist, cfg.data["seed"] + k)
        for k in range(cfg.data["samples"])
    ]


def _twist_for(cfg: RunConfig, point: em.RepPoint) -> CentralTwist:
    degree = cfg.data["twist"] if not point.spec.special else 0
    return CentralTwist(point.spec, degree)


def cmd_verify(cfg: RunConfig, inputs):
    names = list(inputs) or cfg.data["checks"] or list(checks.SUITE)
    for name in names:
        if name not in checks.SUITE:
            raise ConfigError(f"checks: unknown check {name!r}")
    results = [checks.run_check(name) for name in names]
    lines = [r.line() for r in results]
    passed = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return passed, {"checks": [r.to_json() for r in results]}, lines


def cmd_sample(cfg: RunConfig, inputs):
    pts = _points(cfg, [])
    out = cfg.out_dir
    io.write_points_jsonl(out / "points.jsonl", pts)
    for k, p in enumerate(pts):
        io.save_point(out / f"point_{k}.json", p)
    residuals = [em.fiber_residual(p, cfg.twist) for p in pts]
    lines = [f"sampled {len(pts)} point(s) of {cfg.spec.label}, genus {cfg.data['genus']}, twist {cfg.data['twist']}"]
    lines += [f"  point_{k}.json: fiber residual {r:.3e}" for k, r in enumerate(residuals)]
    return True, {"count": len(pts), "fiber_residuals": residuals, "files": ["points.jsonl"]}, lines


def cmd_flow(cfg: RunConfig, inputs):
    reports, lines, ok = [], [], True
    for k, p in enumerate(_points(cfg, inputs)):
        twist = _twist_for(cfg, p)
        rep = rd.flow_to_kempf_ness(p, cfg.flow_config, twist if em.fiber_residual(p, twist) < 1e-6 else None)
        io.save_point(cfg.out_dir / f"flow_{k}_final.json", rep.final_point)
        rep.write_trace(cfg.out_dir / f"flow_{k}_trace.csv")
        reports.append(rep.to_json())
        ok &= rep.converged
        lines.append(
            f"point {k}: |mu_R| {rep.initial_norm:.3e} -> {rep.final_norm:.3e} in {rep.iterations} steps, "
            f"converged: {str(rep.converged).lower()}"
        )
    return ok, {"flows": reports}, lines


def cmd_cohomology(cfg: RunConfig, inputs):
    out, lines, ok = [], [], True
    for k, p in enumerate(_points(cfg, inputs)):
        s = co.cohomology_bases(p, _twist_for(cfg, p), rtol=cfg.data["tolerances"]["svd"]).summary
        ok &= s.euler_check() and not s.flagged
        out.append(s.to_json())
        lines.append(
            f"point {k}: dim H0 {s.dimH0}, dim Z1 {s.dimZ1}, dim B1 {s.dimB1}, dim H1 {s.dimH1}, "
            f"Euler identity {'holds' if s.euler_check() else 'FAILS'}"
        )
    return ok, {"summaries": out}, lines


def cmd_pairing(cfg: RunConfig, inputs):
    out, lines = [], []
    for k, p in enumerate(_points(cfg, inputs)):
        pm = co.pairing_matrix(co.cohomology_bases(p, _twist_for(cfg, p), rtol=cfg.data["tolerances"]["svd"]))
        out.append(pm.to_json())
        lines.append(f"point {k}: {len(pm.basis)}x{len(pm.basis)} gram, smallest singular value {pm.min_singular_value:.3e}")
    return True, {"pairings": out}, lines


def cmd_stratify(cfg: RunConfig, inputs):
    out, lines, ok = [], [], True
    flow_cfg = cfg.flow_config
    for k, p in enumerate(_points(cfg, inputs)):
        rep = rd.flow_to_kempf_ness(p, flow_cfg)
        ok &= rep.converged
        label = rd.orbit_type_label(rep.final_point, grad_tol=max(1e-6, flow_cfg.grad_tol))
        out.append({"flow": rep.to_json(), "label": label.to_json()})
        lines.append(f"point {k}: {label.tag.value} (stabilizer dim {label.stabilizer_dim}, center dim {label.center_dim})")
    return ok, {"strata": out}, lines


def cmd_localmodel(cfg: RunConfig, inputs):
    """Classify zero-fiber points: sampled for the built-in A1 model, listed in the file otherwise."""
    model = inputs[0] if inputs else cfg.data["model"]
    rng = np.random.default_rng(cfg.data["seed"])
    if model is None:
        rep, invs = lm.a1_rep(), lm.a1_invariants()
        pts = [np.zeros(rep.dim, dtype=complex)] + [lm.a1_zero_point(rng) for _ in range(cfg.data["samples"])]
    else:
        rep, invs = lm.load_model_config(model)
        raw = json.loads(Path(model).read_text()).get("points")
        if not raw:
            raise ConfigError("model.points: custom models must list zero-fiber points as [[re, im], ...] rows")
        pts = [np.array([complex(re, im) for re, im in row]) for row in raw]
    table = [lm.classify_quotient_point(rep, v, invs) for v in pts]
    lm.write_classification(cfg.out_dir / "localmodel.csv", table)
    strata = sorted({q.tag.value for q in table})
    body = {"model": rep.to_json(), "points": len(table), "strata": strata}
    lines = [f"classified {len(table)} zero-fiber point(s); strata: {', '.join(strata)}"]
    ok = True
    if set(invs) == set(lm.a1_invariants()):
        rel = max(abs(r) for q in table for r in lm.a1_relations(q.invariants))
        ok = rel <= 1e-10
        body["relation_residual"] = rel
        lines.append(f"nilpotent-cone relations: residual {rel:.3e}")
    return ok, body, lines


def cmd_compare(cfg: RunConfig, inputs):
    if len(inputs) != 2:
        raise ConfigError("compare: expected exactly two point files")
    p, q = _points(cfg, inputs)
    same = rd.same_reduced_point(p, q, cfg.flow_config)
    verdict = "undetermined" if same is None else str(same).lower()
    return same is not None, {"same_reduced_point": same}, [f"same reduced point: {verdict}"]


HANDLERS = {
    "verify": cmd_verify,
    "sample": cmd_sample,
    "flow": cmd_flow,
    "cohomology": cmd_cohomology,
    "pairing": cmd_pairing,
    "stratify": cmd_stratify,
    "localmodel": cmd_localmodel,
    "compare": cmd_compare,
}


def run_command(name: str, cfg: RunConfig, inputs=()) -> int:
    if name not in HANDLERS:
        raise ConfigError(f"unknown command {name!r}; choose from {', '.join(COMMANDS)}")
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    passed, body, lines = HANDLERS[name](cfg, list(inputs))
    io.write_report(cfg.out_dir / f"{name}.json", io.report(name, cfg.data, body, passed))
    text = "\n".join(lines) + "\n"
    (cfg.out_dir / f"{name}.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_FAILED


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = parse_config(args.config, vars(args))
        return run_command(args.command, cfg, args.inputs)
    except (ConfigError, io.FormatError, UnsupportedTwist) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (em.SamplingError, co.CohomologyError, lg.LieGroupError, lm.LocalModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
