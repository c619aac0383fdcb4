"""Experiment configuration as ``key = value`` text.

One setting per line; ``#`` starts a comment; lists are comma separated.
Floats are written with ``repr`` so that parse(dump(cfg)) == cfg exactly.
Unknown keys are rejected. See ``FIELDS`` for the recognised keys and
``ExperimentConfig`` for their meaning and defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["AUTO", "STUDIES", "DOMAINS", "ExperimentConfig", "dump_config", "load_config", "parse_config"]

AUTO = "auto"
STUDIES = (
    "single",
    "passage-sequence",
    "sheet-sequence",
    "pole-sequence",
    "smooth-sequence",
    "epsilon-sweep",
    "find-config",
)
DOMAINS = ("ball", "shell", "fournais", "passage", "sheet", "pole", "smoothed")


@dataclass
class ExperimentConfig:
    """Everything needed to rebuild and rerun an experiment.

    ``eps``, ``l``, ``delta``, ``width`` and ``margin`` accept ``"auto"``:
    eps -> eps_fraction * epsilon_upper_bound, l -> max(ceil(1 / clearance), 2n),
    delta -> half the feature-size estimate, width -> delta / 4,
    margin -> 2h. ``values`` lists the swept index of a sequence study (n,
    m, l, delta or eps).
    """

    study: str = "single"
    domain: str = "fournais"
    R1: float = 1.0
    R: float = 1.8
    M: int = 16
    centers: str = "fibonacci"
    eps: float | str = AUTO
    eps_fraction: float = 0.5
    strict_eps: bool = True
    n: int = 2
    m: int = 1
    l: int | str = AUTO
    delta: float | str = AUTO
    width: float | str = AUTO
    h: list[float] = field(default_factory=lambda: [0.05])
    values: list[float] = field(default_factory=list)
    k: int = 3
    tol: float = 1e-6
    seed: int = 20260101
    max_iter: int = 2000
    preconditioner: str = "amg"
    boundary: str = "ghost"
    margin: float | str = AUTO
    zero_band: float = 1e-12
    topology: bool = True
    betti: bool = False
    vtk: bool = False
    out: str = "results"
    workers: int = 1
    find_M: list[int] = field(default_factory=lambda: [8, 12, 16])
    find_eps_fraction: list[float] = field(default_factory=lambda: [0.5])
    find_eps: list[float] = field(default_factory=list)
    find_R: list[float] = field(default_factory=lambda: [1.8])
    find_h_ratio: list[float] = field(default_factory=lambda: [0.25])
    find_h: list[float] = field(default_factory=list)
    find_shell: bool = False
    find_max_nodes: int = 1_500_000

    def __post_init__(self) -> None:
        if self.study not in STUDIES:
            raise ValueError(f"unknown study {self.study!r}")
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if self.k < 3:
            raise ValueError("k must be at least 3 (the gap above lambda_2 is always reported)")
        if not self.h or any(not v > 0 for v in self.h):
            raise ValueError("h must be a nonempty list of positive spacings")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, str]:
        return {f.name: _format(getattr(self, f.name)) for f in dataclasses.fields(self)}

    @classmethod
    def from_dict(cls, items: dict[str, str]) -> ExperimentConfig:
        kinds = {f.name: f.type for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, raw in items.items():
            if key not in kinds:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _parse(kinds[key], raw.strip(), key)
        return cls(**kwargs)


FIELDS = tuple(f.name for f in dataclasses.fields(ExperimentConfig))


def _format(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return ", ".join(_format(x) for x in v)
    return str(v)


def _number(raw: str, key: str, integer: bool):
    try:
        return int(raw) if integer else float(raw)
    except ValueError:
        raise ValueError(f"{key}: cannot parse {raw!r}") from None


def _parse(kind: str, raw: str, key: str):
    if kind == "bool":
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"{key}: expected true or false, got {raw!r}")
        return raw.lower() == "true"
    if kind == "str":
        return raw
    if kind.startswith("list["):
        inner = kind[5:-1]
        items = [s.strip() for s in raw.split(",") if s.strip()]
        return [_number(s, key, inner == "int") for s in items]
    integer = kind.startswith("int")
    if "| str" in kind and raw == AUTO:
        return AUTO
    return _number(raw, key, integer)


def parse_config(text: str) -> ExperimentConfig:
    items: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in items:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        items[key] = value
    return ExperimentConfig.from_dict(items)


def dump_config(cfg: ExperimentConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
