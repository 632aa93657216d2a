"""Campaign configuration: flat key=value files plus validation.

Example config:

    seeds = seeds/a.obj, seeds/b.obj
    format = obj
    spec = specs/triangle_mesh.gcon
    target = python3 targets/format_gate.py {input}
    label_mode = exit_code
    budget = 5
    mutants_per_seed = 40
    time_limit_s = 30
    rng_seed = 7
    out = campaign-out

Unknown keys are errors. `#` starts a comment line. The GRAPHREF_SEED
environment variable overrides rng_seed.
"""

import math
import os
import shlex
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from ..converters import FormatDescriptor, FormatKind
from ..errors import ConfigError
from ..mutation import NeighborPolicy, OpKind
from ..refine import IsolatedMode, Tolerances


class LabelMode:
    EXIT_CODE_ONLY = "exit_code"
    STDOUT_LABEL = "stdout"


@dataclass(frozen=True)
class TargetSpec:
    argv_template: tuple[str, ...]
    timeout_ms: int = 10_000
    label_mode: str = LabelMode.EXIT_CODE_ONLY

    def __post_init__(self):
        holes = sum(1 for a in self.argv_template if "{input}" in a)
        if holes != 1:
            raise ConfigError(
                f"target template must contain the {{input}} placeholder exactly once,"
                f" found {holes}"
            )
        if self.timeout_ms <= 0:
            raise ConfigError("target_timeout_ms must be positive")
        if self.label_mode not in (LabelMode.EXIT_CODE_ONLY, LabelMode.STDOUT_LABEL):
            raise ConfigError(f"unknown label_mode {self.label_mode!r}")

    def argv_for(self, input_path: str) -> list[str]:
        return [a.replace("{input}", input_path) for a in self.argv_template]


@dataclass(frozen=True)
class CampaignConfig:
    seeds: tuple[str, ...]
    format: FormatDescriptor
    spec_path: str
    target: TargetSpec
    budget_per_input: int = 5
    mutants_per_seed: int = 100
    time_limit_s: float = 60.0
    no_refine: bool = False
    no_neighbor: bool = False
    op_weights: dict = field(default_factory=dict)  # OpKind -> weight; empty = uniform
    policy: NeighborPolicy = field(default_factory=NeighborPolicy)
    epsilon: float = 1e-9
    tolerances: Tolerances = field(default_factory=Tolerances)
    max_iters: int = 10
    noise_scale: float | None = None  # None: 1% of bbox diagonal per graph
    rng_seed: int = 0
    workers: int = 1
    out_dir: str = "campaign-out"

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.budget_per_input < 1:
            raise ConfigError("budget must be >= 1")
        if self.mutants_per_seed < 1:
            raise ConfigError("mutants_per_seed must be >= 1")
        if self.time_limit_s <= 0:
            raise ConfigError("time_limit_s must be positive")
        if self.epsilon <= 0 or not math.isfinite(self.epsilon):
            raise ConfigError("epsilon must be positive")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def effective_policy(self) -> NeighborPolicy:
        if self.no_neighbor:
            return NeighborPolicy(
                hops=self.policy.hops,
                sigma=self.policy.sigma,
                spread_rho=self.policy.spread_rho,
                enabled=False,
            )
        return self.policy

    def echo(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "format": self.format.kind.value,
            "format_options": dict(self.format.options),
            "spec": self.spec_path,
            "target": list(self.target.argv_template),
            "target_timeout_ms": self.target.timeout_ms,
            "label_mode": self.target.label_mode,
            "budget": self.budget_per_input,
            "mutants_per_seed": self.mutants_per_seed,
            "time_limit_s": self.time_limit_s,
            "no_refine": self.no_refine,
            "no_neighbor": self.no_neighbor,
            "op_weights": {k.value: v for k, v in sorted(self.op_weights.items(), key=lambda kv: kv[0].value)},
            "hops": self.policy.hops,
            "rho": self.policy.spread_rho,
            "sigma": self.policy.sigma,
            "noise_scale": self.noise_scale,
            "epsilon": self.epsilon,
            "merge_tol": self.tolerances.merge_tol,
            "angle_tol": self.tolerances.angle_tol,
            "isolated_mode": self.tolerances.isolated_mode.value,
            "max_iters": self.max_iters,
            "rng_seed": self.rng_seed,
            "workers": self.workers,
            "out": self.out_dir,
        }


_BOOL_WORDS = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}

_KNOWN_KEYS = {
    "seeds",
    "format",
    "knn_k",
    "spec",
    "target",
    "target_timeout_ms",
    "label_mode",
    "budget",
    "mutants_per_seed",
    "time_limit_s",
    "no_refine",
    "no_neighbor",
    "op_weights",
    "hops",
    "rho",
    "sigma",
    "noise_scale",
    "epsilon",
    "merge_tol",
    "angle_tol",
    "isolated_mode",
    "max_iters",
    "rng_seed",
    "workers",
    "out",
}


def _parse_bool(key: str, raw: str) -> bool:
    try:
        return _BOOL_WORDS[raw.strip().lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}") from None


def _parse_float(key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_op_weights(raw: str) -> dict:
    by_name = {k.value: k for k in OpKind}
    weights = {}
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"op_weights entry {item!r} must be Name:weight")
        name, value = item.split(":", 1)
        kind = by_name.get(name.strip())
        if kind is None:
            raise ConfigError(f"op_weights: unknown operator {name.strip()!r}")
        weights[kind] = _parse_float("op_weights", value)
    return weights


def parse_config_text(text: str, base_dir: Path | None = None) -> CampaignConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value

    for required in ("seeds", "format", "spec", "target"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")

    def resolve(p: str) -> str:
        path = Path(p)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return str(path)

    seeds = tuple(resolve(s.strip()) for s in values["seeds"].split(",") if s.strip())
    try:
        kind = FormatKind(values["format"].strip().lower())
    except ValueError:
        raise ConfigError(f"unknown format {values['format']!r}") from None
    options = {}
    if "knn_k" in values:
        options["knn_k"] = values["knn_k"].strip()

    sigma_raw = values.get("sigma", "auto").strip().lower()
    sigma = None if sigma_raw in ("auto", "") else _parse_float("sigma", sigma_raw)
    noise_raw = values.get("noise_scale", "auto").strip().lower()
    noise_scale = None if noise_raw in ("auto", "") else _parse_float("noise_scale", noise_raw)
    merge_raw = values.get("merge_tol", "auto").strip().lower()
    merge_tol = None if merge_raw in ("auto", "") else _parse_float("merge_tol", merge_raw)

    isolated_raw = values.get("isolated_mode", "connect_within_triangle").strip().lower()
    try:
        isolated_mode = IsolatedMode(isolated_raw)
    except ValueError:
        raise ConfigError(f"unknown isolated_mode {isolated_raw!r}") from None

    policy = NeighborPolicy(
        hops=_parse_int("hops", values.get("hops", "2")),
        sigma=sigma,
        spread_rho=_parse_float("rho", values.get("rho", "0.5")),
        enabled=True,
    )
    target = TargetSpec(
        argv_template=tuple(shlex.split(values["target"])),
        timeout_ms=_parse_int("target_timeout_ms", values.get("target_timeout_ms", "10000")),
        label_mode=values.get("label_mode", LabelMode.EXIT_CODE_ONLY).strip().lower(),
    )

    rng_seed = _parse_int("rng_seed", values.get("rng_seed", "0"))
    env_seed = os.environ.get("GRAPHREF_SEED")
    if env_seed is not None:
        rng_seed = _parse_int("GRAPHREF_SEED", env_seed)

    return CampaignConfig(
        seeds=seeds,
        format=FormatDescriptor(kind, options),
        spec_path=resolve(values["spec"].strip()),
        target=target,
        budget_per_input=_parse_int("budget", values.get("budget", "5")),
        mutants_per_seed=_parse_int("mutants_per_seed", values.get("mutants_per_seed", "100")),
        time_limit_s=_parse_float("time_limit_s", values.get("time_limit_s", "60")),
        no_refine=_parse_bool("no_refine", values.get("no_refine", "false")),
        no_neighbor=_parse_bool("no_neighbor", values.get("no_neighbor", "false")),
        op_weights=_parse_op_weights(values.get("op_weights", "")),
        policy=policy,
        epsilon=_parse_float("epsilon", values.get("epsilon", "1e-9")),
        tolerances=Tolerances(
            merge_tol=merge_tol,
            angle_tol=_parse_float("angle_tol", values.get("angle_tol", "1e-3")),
            isolated_mode=isolated_mode,
        ),
        max_iters=_parse_int("max_iters", values.get("max_iters", "10")),
        noise_scale=noise_scale,
        rng_seed=rng_seed,
        workers=_parse_int("workers", values.get("workers", "1")),
        out_dir=resolve(values.get("out", "campaign-out").strip()),
    )


def load_config(path) -> CampaignConfig:
    path = Path(path)
    return parse_config_text(path.read_text("utf-8"), base_dir=path.parent)


def check_target_spawnable(target: TargetSpec) -> None:
    program = target.argv_template[0]
    if "{input}" in program:
        raise ConfigError("the {input} placeholder cannot be the program name")
    if shutil.which(program) is None and not Path(program).exists():
        raise ConfigError(f"target program not found: {program}")
