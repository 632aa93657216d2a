"""Campaign orchestration: seed intake, mutate/refine/execute loop, metrics.

Per seed: parse, serialize the canonical form, get the target's label for it,
then generate mutants until the count cap or the per-seed time limit. Each
mutant is timed per stage (graph construction, neighbor selection and
mutation, constraint refinement, serialization, target execution), saved
under a content-hash filename, and judged:

* refinement on: a Discarded mutant is invalid and is not executed; a
  Clean/Repaired mutant is valid iff the target accepts it.
* refinement off (ablation): every mutant runs and validity is target
  acceptance alone.

Seeds get independent RNG streams derived from (rng_seed, seed index), so
results do not depend on the worker count.
"""

import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constraints import parse_spec
from ..errors import MutationFailureError, ParseError
from ..graph import Graph
from ..mutation import DEFAULT_OP_WEIGHTS, OpKind, mutate_n_inplace
from ..refine import RefineStatus, refine_owned
from .config import CampaignConfig, LabelMode, check_target_spawnable
from .metrics import mutation_diversity
from .target import execute_target

logger = logging.getLogger(__name__)

STAGE_NAMES = (
    "graph_construction",
    "neighbor_selection_and_mutation",
    "constraint_refinement",
    "target_execution",
    "serialization",
)

_EXTENSIONS = {"obj": ".obj", "pgm": ".pgm", "xyz": ".xyz", "txt": ".txt"}


@dataclass(frozen=True)
class CampaignMetrics:
    generated: int
    valid: int
    vir: float
    sps: float | None
    sps_excluded: int
    md: dict | None
    eti_ms: dict
    refine_outcomes: dict
    violations_by_kind: dict
    verifier_rejected: int
    target_rejected: int
    mutation_failures: int

    def to_dict(self) -> dict:
        return {
            "generated": self.generated,
            "valid": self.valid,
            "vir": self.vir,
            "sps": self.sps,
            "sps_excluded": self.sps_excluded,
            "md": self.md,
            "eti_ms": self.eti_ms,
            "refine_outcomes": self.refine_outcomes,
            "violations_by_kind": self.violations_by_kind,
            "verifier_rejected": self.verifier_rejected,
            "target_rejected": self.target_rejected,
            "mutation_failures": self.mutation_failures,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignMetrics":
        return cls(**{f: data[f] for f in cls.__dataclass_fields__})


@dataclass
class CampaignResult:
    config_echo: dict
    per_mutant: list[dict]
    summary: CampaignMetrics
    skipped_seeds: list[dict]
    seed_records: list[dict]
    artifact_dir: str


@dataclass
class _SeedOutput:
    index: int
    record: dict
    rows: list[dict] = field(default_factory=list)
    valid_graphs: list[Graph] = field(default_factory=list)
    skipped: dict | None = None


def _content_name(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


def _run_seed(seed_index: int, seed_path: str, cfg: CampaignConfig, spec, out: Path) -> _SeedOutput:
    from ..converters import dump_bytes, load_bytes

    ext = _EXTENSIONS[cfg.format.kind.value]
    record = {"seed": seed_path, "index": seed_index}
    try:
        raw = Path(seed_path).read_bytes()
        parse_start = time.perf_counter()
        base = load_bytes(raw, cfg.format)
        record["parse_ms"] = (time.perf_counter() - parse_start) * 1000.0
    except (OSError, ParseError) as exc:
        logger.warning("skipping seed %s: %s", seed_path, exc)
        return _SeedOutput(seed_index, record, skipped={"seed": seed_path, "reason": str(exc)})

    if base.family.value == "triangle_mesh":
        from ..graph import is_fan_connected

        for vid in base.vertices:  # warm the fan cache; copies inherit it
            is_fan_connected(base, vid)
    canonical = dump_bytes(base, cfg.format)
    seed_file = out / "seeds" / f"seed{seed_index:03d}{ext}"
    seed_file.write_bytes(canonical)
    seed_exec = execute_target(cfg.target, str(seed_file))
    record["accepted"] = seed_exec.accepted
    record["label"] = seed_exec.label

    policy = cfg.effective_policy()
    op_weights = cfg.op_weights or DEFAULT_OP_WEIGHTS
    op_params: dict[OpKind, dict] = {}
    if cfg.noise_scale is not None:
        for kind in OpKind:
            op_params[kind] = {"scale": cfg.noise_scale}
    rng = np.random.default_rng([cfg.rng_seed, seed_index])
    deadline = time.monotonic() + cfg.time_limit_s

    output = _SeedOutput(seed_index, record)
    for _ in range(cfg.mutants_per_seed):
        if time.monotonic() >= deadline:
            break
        total_start = time.perf_counter()
        ms = dict.fromkeys(("construct", "mutate", "refine", "execute", "serialize"), 0.0)

        t0 = time.perf_counter()
        work = base.copy()
        ms["construct"] = (time.perf_counter() - t0) * 1000.0

        t0 = time.perf_counter()
        try:
            records = mutate_n_inplace(
                work, cfg.budget_per_input, op_weights, policy, rng, op_params
            )
        except MutationFailureError as exc:
            logger.warning("mutation failed on %s: %s", seed_path, exc)
            output.rows.append(
                {
                    "id": None,
                    "seed": seed_path,
                    "ops": [],
                    "refine_status": "mutation_failed",
                    "violations_before": None,
                    "violations_after": None,
                    "accepted": None,
                    "label": None,
                    "ms": ms,
                    "total_ms": (time.perf_counter() - total_start) * 1000.0,
                }
            )
            continue
        ms["mutate"] = (time.perf_counter() - t0) * 1000.0

        outcome = None
        if not cfg.no_refine:
            t0 = time.perf_counter()
            work, outcome = refine_owned(
                work, spec, cfg.epsilon, cfg.tolerances, cfg.max_iters
            )
            ms["refine"] = (time.perf_counter() - t0) * 1000.0

        t0 = time.perf_counter()
        data = dump_bytes(work, cfg.format)
        ms["serialize"] = (time.perf_counter() - t0) * 1000.0

        name = _content_name(data)
        (out / "mutants" / f"{name}{ext}").write_bytes(data)

        accepted = None
        label = None
        discarded = outcome is not None and outcome.status is RefineStatus.DISCARDED
        if not discarded:
            t0 = time.perf_counter()
            exec_result = execute_target(cfg.target, str(out / "mutants" / f"{name}{ext}"))
            ms["execute"] = (time.perf_counter() - t0) * 1000.0
            accepted = exec_result.accepted
            label = exec_result.label
            if exec_result.stderr:
                (out / "stderr" / f"{name}.txt").write_bytes(exec_result.stderr)

        row = {
            "id": name,
            "seed": seed_path,
            "ops": [r.to_dict() for r in records],
            "refine_status": outcome.status.value if outcome else "skipped",
            "violations_before": outcome.violations_before if outcome else None,
            "violations_after": outcome.violations_after if outcome else None,
            "accepted": accepted,
            "label": label,
            "ms": ms,
            "total_ms": (time.perf_counter() - total_start) * 1000.0,
        }
        if outcome is not None:
            row["refine_actions"] = [a.to_dict() for a in outcome.actions]
            row["violations_by_kind"] = dict(outcome.initial_by_kind)
        output.rows.append(row)

        valid = accepted is True and (outcome is None or not discarded)
        if valid:
            output.valid_graphs.append(work)
            row["valid"] = True
        else:
            row["valid"] = False
    return output


def run_campaign(config: CampaignConfig) -> CampaignResult:
    """Run a full campaign and write artifacts (mutants + report) to out_dir."""
    check_target_spawnable(config.target)
    spec = parse_spec(Path(config.spec_path).read_text("utf-8"))

    out = Path(config.out_dir)
    for sub in ("mutants", "seeds", "stderr"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    outputs: list[_SeedOutput] = []
    if config.workers == 1:
        for i, seed in enumerate(config.seeds):
            outputs.append(_run_seed(i, seed, config, spec, out))
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = [
                pool.submit(_run_seed, i, seed, config, spec, out)
                for i, seed in enumerate(config.seeds)
            ]
            outputs = [f.result() for f in futures]
    outputs.sort(key=lambda o: o.index)

    rows: list[dict] = []
    valid_graphs: list[Graph] = []
    skipped: list[dict] = []
    seed_records: list[dict] = []
    label_by_seed: dict[str, str | None] = {}
    for o in outputs:
        if o.skipped is not None:
            skipped.append(o.skipped)
            continue
        seed_records.append(o.record)
        label_by_seed[o.record["seed"]] = o.record.get("label")
        rows.extend(o.rows)
        valid_graphs.extend(o.valid_graphs)

    summary = _summarize(config, rows, valid_graphs, label_by_seed)
    result = CampaignResult(
        config_echo=config.echo(),
        per_mutant=rows,
        summary=summary,
        skipped_seeds=skipped,
        seed_records=seed_records,
        artifact_dir=str(out),
    )
    from .report import emit_report

    emit_report(result, "json", out / "report.json")
    emit_report(result, "csv", out / "report.csv")
    return result


def _summarize(
    config: CampaignConfig,
    rows: list[dict],
    valid_graphs: list[Graph],
    label_by_seed: dict,
) -> CampaignMetrics:
    generated = len(rows)
    valid = sum(1 for r in rows if r.get("valid"))
    mutation_failures = sum(1 for r in rows if r["refine_status"] == "mutation_failed")
    verifier_rejected = sum(1 for r in rows if r["refine_status"] == "discarded")
    target_rejected = sum(1 for r in rows if r["accepted"] is False)

    refine_outcomes = {"clean": 0, "repaired": 0, "discarded": 0, "skipped": 0}
    for r in rows:
        if r["refine_status"] in refine_outcomes:
            refine_outcomes[r["refine_status"]] += 1

    violations_by_kind: dict[str, int] = {}
    for r in rows:
        for kind, count in r.get("violations_by_kind", {}).items():
            violations_by_kind[kind] = violations_by_kind.get(kind, 0) + count

    matches = 0
    labeled = 0
    sps_excluded = 0
    if config.target.label_mode == LabelMode.STDOUT_LABEL:
        for r in rows:
            seed_label = label_by_seed.get(r["seed"])
            if r.get("valid") and r["label"] is not None and seed_label is not None:
                labeled += 1
                if r["label"].strip() == seed_label.strip():
                    matches += 1
            elif r["accepted"] is False and r["refine_status"] in ("clean", "repaired"):
                sps_excluded += 1
    sps = (matches / labeled) if labeled else None

    md: dict | None = None
    if len(valid_graphs) >= 2:
        md = mutation_diversity(valid_graphs, sample_seed=config.rng_seed).to_dict()

    eti_ms = {}
    for stage_name, key in zip(STAGE_NAMES, ("construct", "mutate", "refine", "execute", "serialize")):
        eti_ms[stage_name] = (
            sum(r["ms"][key] for r in rows) / generated if generated else 0.0
        )
    eti_ms["total"] = sum(r["total_ms"] for r in rows) / generated if generated else 0.0

    return CampaignMetrics(
        generated=generated,
        valid=valid,
        vir=(valid / generated) if generated else 0.0,
        sps=sps,
        sps_excluded=sps_excluded,
        md=md,
        eti_ms=eti_ms,
        refine_outcomes=refine_outcomes,
        violations_by_kind=violations_by_kind,
        verifier_rejected=verifier_rejected,
        target_rejected=target_rejected,
        mutation_failures=mutation_failures,
    )
