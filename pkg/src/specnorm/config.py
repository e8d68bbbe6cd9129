"""Experiment configuration: TOML loading, validation and seed derivation."""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

MODES = ("graph_report", "tree_check", "sphere_report", "full")


def load_toml(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_p_list(value) -> list[float]:
    """Accept [4, 8, "inf"] or "4,8,inf"."""
    if value is None:
        return []
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    out = []
    for v in value:
        if isinstance(v, str):
            v = v.strip().lower()
            out.append(math.inf if v in ("inf", "infinity", "oo") else float(v))
        else:
            out.append(float(v))
    return out


@dataclass
class TreeSection:
    q: list = field(default_factory=lambda: [2, 3])
    n_max: int = 12
    tolerance: float = 1e-12


@dataclass
class GraphSection:
    specs: list = field(default_factory=list)   # spec strings or edge-list paths
    p: list = field(default_factory=lambda: [4.0, 8.0, math.inf])
    delta: float = 0.25
    epsilon: float | None = None
    N: int | None = None
    n_max: int | None = None
    probe_trials: int = 1000
    identity_n: int = 10
    tolerance: float = 1e-8


@dataclass
class SphereSection:
    rotations: str = "default"
    s: list = field(default_factory=lambda: [25, 50, 100])
    p: list = field(default_factory=lambda: [10.0, math.inf])
    kernel_s: list = field(default_factory=lambda: [50, 100, 200, 400])
    kernel_p: list = field(default_factory=lambda: [10.0, 12.0])
    slope_tolerance: float = 0.05
    word_length: int = 6
    separation_points: int = 100
    separation_threshold: float = 1e-3
    reproduce_s: int = 50
    tolerance: float = 1e-8


@dataclass
class ExperimentConfig:
    mode: str = "full"
    seed: int = 0
    out: str = "out"
    tree: TreeSection = field(default_factory=TreeSection)
    graph: GraphSection = field(default_factory=GraphSection)
    sphere: SphereSection = field(default_factory=SphereSection)
    source: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("source")
        return _jsonable(d)

    def content_dict(self) -> dict:
        """Everything that affects results; the output directory does not."""
        d = self.to_dict()
        d.pop("out")
        return d

    def hash(self) -> str:
        blob = json.dumps(self.content_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def rng(self, label: str) -> np.random.Generator:
        return derive_rng(self.seed, label)


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def derive_seed(seed: int, label: str) -> np.random.SeedSequence:
    """Child seed for a named consumer: the label is hashed into the entropy."""
    digest = hashlib.sha256(label.encode()).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(seed) & (2**64 - 1), *words])


def derive_rng(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, label))


def derive_int(seed: int, label: str) -> int:
    return int(derive_seed(seed, label).generate_state(1, np.uint64)[0])


def thread_count() -> int:
    raw = os.environ.get("SPECNORM_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)


_SECTION_TYPES = {"tree": TreeSection, "graph": GraphSection, "sphere": SphereSection}


def _section(name, raw, base_dir):
    cls = _SECTION_TYPES[name]
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = set(cls.__dataclass_fields__)
    raw = dict(raw)
    if name == "graph" and "spec" in raw:
        spec = raw.pop("spec")
        raw["specs"] = [spec] if isinstance(spec, str) else list(spec)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"[{name}] unknown keys: {sorted(unknown)}")
    for key in ("p", "kernel_p"):
        if key in raw:
            raw[key] = parse_p_list(raw[key])
    sec = cls(**raw)
    if name == "graph":
        sec.specs = [_resolve_path_or_spec(s, base_dir) for s in sec.specs]
    if name == "sphere" and sec.rotations != "default":
        path = Path(sec.rotations)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"rotation-set file not found: {path}")
        sec.rotations = str(path)
    return sec


def _resolve_path_or_spec(value: str, base_dir):
    if ":" in value and not Path(value).exists():
        return value
    path = Path(value)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    if not path.exists():
        raise ConfigError(f"graph file not found: {path}")
    return str(path)


def config_from_dict(data: dict, base_dir=None, source=None) -> ExperimentConfig:
    data = dict(data)
    top = {"mode", "seed", "out", "tree", "graph", "sphere"}
    unknown = set(data) - top
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    mode = str(data.get("mode", "full")).replace("-", "_")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    cfg = ExperimentConfig(
        mode=mode,
        seed=seed,
        out=str(data.get("out", "out")),
        tree=_section("tree", data.get("tree"), base_dir),
        graph=_section("graph", data.get("graph"), base_dir),
        sphere=_section("sphere", data.get("sphere"), base_dir),
        source=source,
    )
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return config_from_dict(load_toml(path), base_dir=path.parent, source=str(path))


def validate(cfg: ExperimentConfig) -> None:
    g, sp = cfg.graph, cfg.sphere
    if any(not p > 2 for p in g.p):
        raise ConfigError("graph p values must exceed 2")
    if not 0 < g.delta < 0.5:
        raise ConfigError("graph delta must lie in (0, 1/2)")
    if g.epsilon is not None and g.epsilon < 0:
        raise ConfigError("graph epsilon must be >= 0")
    if g.N is not None and g.N < 1:
        raise ConfigError("graph N must be >= 1")
    for p in sp.p:
        if p <= 6:
            raise ConfigError(f"sphere p values must exceed 6 (got {p})")
        if p <= 8:
            warnings.warn(
                f"sphere p = {p} lies in (6, 8]; the simplified kernel argument used here needs p > 8",
                stacklevel=2,
            )
    if any(not p > 4 for p in sp.kernel_p):
        raise ConfigError("sphere kernel_p values must exceed 4")
    if sp.s != sorted(sp.s):
        raise ConfigError("sphere s list must be ascending")
    if any(q < 2 for q in cfg.tree.q):
        raise ConfigError("tree q values must be >= 2")
