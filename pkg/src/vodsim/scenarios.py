"""Scenario files: parsing, validation, sweep expansion, and result writers.

A scenario file is JSON::

    {"schema": 1,
     "scenarios": [
        {"name": "fig7", "kind": "simulation", "config": {...},
         "sweep": {"seed": [0, 1, 2], "cache.lambda": [0.1, 0.5]}}]}

`kind` is "simulation" (a SimConfig) or "cluster_sweep". Sweep keys are
dotted paths into `config`; the grid is their cartesian product.
"""
from __future__ import annotations

import copy
import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from .popularity import ZipfCatalog
from .simulator import (
    CacheParams, CapacityParams, CatalogParams, SessionParams, SimConfig, SimMetrics,
    StreamParams, run, run_cluster_sweep,
)
from .topology import Interconnect, TopologyConfig

SCHEMA_VERSION = 1
KINDS = ("simulation", "cluster_sweep")


class ScenarioError(ValueError):
    def __init__(self, problems: List[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass
class Scenario:
    name: str
    kind: str
    config: Dict[str, Any]
    sweep: Optional[Dict[str, list]] = None

    def points(self) -> List[Tuple[str, Dict[str, Any]]]:
        """(output name, concrete config dict) for every grid point."""
        if not self.sweep:
            return [(self.name, self.config)]
        keys = list(self.sweep)
        out = []
        for values in itertools.product(*(self.sweep[k] for k in keys)):
            cfg = copy.deepcopy(self.config)
            tags = []
            for k, v in zip(keys, values):
                _set_path(cfg, k, v)
                tags.append(_tag(k, v))
            out.append(("-".join([self.name] + tags), cfg))
        return out


def _set_path(d: dict, path: str, value) -> None:
    *parents, leaf = path.split(".")
    for p in parents:
        d = d.setdefault(p, {})
    d[leaf] = copy.deepcopy(value)


def _tag(key: str, value) -> str:
    leaf = key.split(".")[-1]
    if isinstance(value, dict) and "num_app_servers" in value:
        return f"{value['num_app_servers']}x{value.get('db_per_app', 1)}"
    if isinstance(value, float):
        return f"{leaf}{value:g}"
    return f"{leaf}{value}"


# -- config parsing -------------------------------------------------------

_SECTIONS = {
    "catalog": (CatalogParams, {"n_videos": "n_videos", "alpha": "alpha"}),
    "cache": (CacheParams, {"capacity": "capacity", "lambda": "lam"}),
    "session": (SessionParams, {"duration_ticks": "duration_ticks", "total_ticks": "total_ticks"}),
    "capacity": (CapacityParams, {"rate": "rate", "loss_threshold": "loss_threshold"}),
    "stream": (StreamParams, {"size_bits": "size_bits", "duration_s": "duration_s"}),
}
_SCALARS = ("seed", "replication", "request_rate", "arrival", "ingress", "prewarm",
            "queue_capacity", "tick_unit")
_TOPOLOGY_KEYS = ("num_app_servers", "db_per_app", "interconnect")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_sim_config(d: Dict[str, Any]) -> Tuple[Optional[SimConfig], List[str]]:
    """Build a SimConfig from its JSON form; returns (config or None, problems)."""
    problems: List[str] = []
    if not isinstance(d, dict):
        return None, ["config must be an object"]
    kwargs: Dict[str, Any] = {}
    for key in d:
        if key not in _SECTIONS and key not in _SCALARS and key != "topology":
            problems.append(f"unknown field {key!r}")

    for section, (cls, names) in _SECTIONS.items():
        raw = d.get(section, {})
        if not isinstance(raw, dict):
            problems.append(f"{section} must be an object")
            continue
        args = {}
        for k, v in raw.items():
            if k not in names:
                problems.append(f"unknown field {section}.{k!r}")
            elif not _is_number(v):
                problems.append(f"{section}.{k} must be a number, got {v!r}")
            else:
                args[names[k]] = v
        kwargs[section] = cls(**args)

    topo = d.get("topology", {"num_app_servers": 14, "db_per_app": 1})
    if not isinstance(topo, dict):
        problems.append("topology must be an object")
    else:
        unknown = [k for k in topo if k not in _TOPOLOGY_KEYS]
        problems += [f"unknown field topology.{k!r}" for k in unknown]
        try:
            n_app, n_db = topo.get("num_app_servers", 14), topo.get("db_per_app", 1)
            if not (isinstance(n_app, int) and isinstance(n_db, int)) or isinstance(n_app, bool):
                raise ValueError("topology.num_app_servers and topology.db_per_app must be integers")
            kwargs["topology"] = TopologyConfig(n_app, n_db, Interconnect(topo.get("interconnect", "ring")))
        except ValueError as exc:
            problems.append(f"topology: {exc}")

    for k in _SCALARS:
        if k in d:
            kwargs[k] = d[k]
    if problems:
        return None, problems
    config = SimConfig(**kwargs)
    try:
        problems = config.validate()
    except TypeError as exc:
        problems = [f"malformed value: {exc}"]
    return (None if problems else config), problems


def parse_cluster_config(d: Dict[str, Any]) -> List[str]:
    problems = []
    allowed = {"catalog", "viewers", "cluster_counts", "rate", "interactive_fraction"}
    problems += [f"unknown field {k!r}" for k in d if k not in allowed]
    cat = d.get("catalog", {})
    alpha = cat.get("alpha", 0.8) if isinstance(cat, dict) else None
    n = cat.get("n_videos", 1000) if isinstance(cat, dict) else None
    if not (_is_number(alpha) and 0.0 < alpha <= 1.0):
        problems.append(f"catalog.alpha must be in (0,1], got {alpha!r}")
    if not (isinstance(n, int) and n >= 1):
        problems.append(f"catalog.n_videos must be a positive integer, got {n!r}")
    viewers = d.get("viewers")
    if not (isinstance(viewers, int) and viewers >= 1):
        problems.append(f"viewers must be a positive integer, got {viewers!r}")
    counts = d.get("cluster_counts")
    if not isinstance(counts, list) or not all(isinstance(k, int) and k >= 1 for k in counts):
        problems.append("cluster_counts must be a list of positive integers")
    rate = d.get("rate")
    if not (_is_number(rate) and rate > 0):
        problems.append(f"rate must be > 0, got {rate!r}")
    frac = d.get("interactive_fraction", 0.0)
    if not (_is_number(frac) and 0.0 <= frac <= 1.0):
        problems.append(f"interactive_fraction must be in [0,1], got {frac!r}")
    return problems


# -- files ----------------------------------------------------------------

def preset_names() -> List[str]:
    root = resources.files("vodsim") / "presets"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve(path_or_preset: str) -> Path:
    p = Path(path_or_preset)
    if p.exists() or p.suffix == ".json":
        return p
    if path_or_preset in preset_names():
        return Path(str(resources.files("vodsim") / "presets" / f"{path_or_preset}.json"))
    return p


def load_scenarios(path) -> Tuple[List[Scenario], List[str]]:
    """Parse a scenario file; OSError propagates, content problems are returned."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        return [], [f"not valid JSON: {exc}"]
    if not isinstance(doc, dict):
        return [], ["top level must be an object"]
    problems = []
    if doc.get("schema") != SCHEMA_VERSION:
        problems.append(f"schema must be {SCHEMA_VERSION}, got {doc.get('schema')!r}")
    raw = doc.get("scenarios")
    if not isinstance(raw, list) or not raw:
        return [], problems + ["scenarios must be a non-empty list"]

    scenarios, seen = [], set()
    for i, entry in enumerate(raw):
        where = f"scenarios[{i}]"
        if not isinstance(entry, dict):
            problems.append(f"{where} must be an object")
            continue
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            problems.append(f"{where}.name must be a non-empty string")
            continue
        where = name
        if name in seen:
            problems.append(f"{where}: duplicate scenario name")
        seen.add(name)
        kind = entry.get("kind", "simulation")
        if kind not in KINDS:
            problems.append(f"{where}: kind must be one of {KINDS}, got {kind!r}")
            continue
        config = entry.get("config", {})
        sweep = entry.get("sweep")
        if sweep is not None:
            if not isinstance(sweep, dict) or not sweep:
                problems.append(f"{where}: sweep grid must be non-empty")
                continue
            bad = [k for k, v in sweep.items() if not isinstance(v, list) or not v]
            if bad:
                problems.append(f"{where}: sweep grid must be non-empty (empty axis {bad[0]!r})")
                continue
        scenario = Scenario(name, kind, config, sweep)
        for point_name, cfg in scenario.points():
            tag = where if point_name == name else point_name
            if kind == "simulation":
                _, errs = parse_sim_config(cfg)
            else:
                errs = parse_cluster_config(cfg) if isinstance(cfg, dict) else ["config must be an object"]
            problems += [f"{tag}: {e}" for e in errs]
        scenarios.append(scenario)
    return scenarios, problems


def validate_scenario(path) -> List[str]:
    """Every constraint violation in the file; an empty list means valid."""
    _, problems = load_scenarios(path)
    return problems


# -- execution ------------------------------------------------------------

@dataclass
class PointResult:
    name: str
    kind: str
    config: Dict[str, Any]
    metrics: Optional[SimMetrics] = None
    cluster_series: list = field(default_factory=list)


def run_point(name: str, kind: str, cfg: Dict[str, Any], check: Optional[bool] = None) -> PointResult:
    if kind == "simulation":
        config, problems = parse_sim_config(cfg)
        if problems:
            raise ScenarioError([f"{name}: {p}" for p in problems])
        return PointResult(name, kind, config.to_dict(), metrics=run(config, check=check))
    cat = cfg.get("catalog", {})
    catalog = ZipfCatalog(cat.get("n_videos", 1000), cat.get("alpha", 0.8))
    series = run_cluster_sweep(catalog, cfg["viewers"], cfg["cluster_counts"], cfg["rate"],
                               cfg.get("interactive_fraction", 0.0))
    return PointResult(name, kind, cfg, cluster_series=series)


def _run_point_args(args):
    return run_point(*args)


def _csv(rows: List[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render(result: PointResult, fmt: str = "both") -> Dict[str, str]:
    """{filename: contents} for one grid point."""
    files = {}
    want_json = fmt in ("json", "both")
    want_csv = fmt in ("csv", "both")
    if result.kind == "simulation":
        m = result.metrics
        if want_json:
            doc = {
                "name": result.name,
                "config": result.config,
                "metrics": m.to_dict(),
                "summary": {
                    "served": m.served,
                    "mean_hops": m.mean_hops() if m.served else None,
                    "modal_hop": m.modal_hop(),
                    "hit_ratio_series": m.hit_ratio_series,
                },
            }
            files[f"{result.name}-metrics.json"] = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if want_csv:
            rows = [["hop", "count"]] + [[h, c] for h, c in sorted(m.hop_histogram.items())]
            files[f"{result.name}-hops.csv"] = _csv(rows)
            duration = result.config["session"]["duration_ticks"]
            capacity = result.config["capacity"]["rate"]
            rows = [["session", "start_tick", "aggregate_bps", "capacity_bps", "requests", "hits", "hit_ratio"]]
            for i, (b, r, h) in enumerate(zip(m.bandwidth_series, m.session_requests, m.session_hits)):
                rows.append([i, i * duration, repr(float(b)), repr(float(capacity)), r, h,
                             repr(h / r if r else 0.0)])
            files[f"{result.name}-bandwidth.csv"] = _csv(rows)
    else:
        if want_json:
            doc = {"name": result.name, "config": result.config,
                   "series": [vars(p) for p in result.cluster_series]}
            files[f"{result.name}-metrics.json"] = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if want_csv:
            rows = [["clusters", "viewers_per_cluster", "per_cluster_bps", "aggregate_bps", "unclustered_bps"]]
            rows += [[p.clusters, p.viewers_per_cluster, repr(p.per_cluster_bandwidth),
                      repr(p.aggregate_bandwidth), repr(p.unclustered_bandwidth)]
                     for p in result.cluster_series]
            files[f"{result.name}-bandwidth.csv"] = _csv(rows)
    return files


def expand(scenarios: List[Scenario], seed: Optional[int] = None) -> List[Tuple[str, str, dict]]:
    """(name, kind, config) for every point; `seed` overrides base and swept seeds."""
    jobs = []
    for sc in scenarios:
        if seed is not None and sc.kind == "simulation":
            sweep = {k: v for k, v in (sc.sweep or {}).items() if k != "seed"} or None
            sc = Scenario(sc.name, sc.kind, dict(sc.config, seed=seed), sweep)
        jobs += [(name, sc.kind, cfg) for name, cfg in sc.points()]
    return jobs


def run_scenario(path, out_dir, seed: Optional[int] = None, jobs: int = 1, fmt: str = "both",
                 check: Optional[bool] = None) -> List[PointResult]:
    """Run every point of a scenario file and write its result files into out_dir.

    Raises ScenarioError (nothing written) on a malformed file and OSError on
    unreadable input or unwritable output.
    """
    scenarios, problems = load_scenarios(path)
    if problems:
        raise ScenarioError(problems)
    points = [(name, kind, cfg, check) for name, kind, cfg in expand(scenarios, seed)]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(points) > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_point_args, points))
    else:
        results = [run_point(*p) for p in points]
    for result in results:
        for filename, text in render(result, fmt).items():
            (out / filename).write_text(text)
    return results
