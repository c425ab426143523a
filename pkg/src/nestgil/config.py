"""Flat ``key=value`` run configuration with typed keys.

Lines are ``key = value``; blank lines and lines starting with ``#`` are
ignored. Unknown keys are rejected by name.
"""

from __future__ import annotations

import hashlib

from .gil import GilConfig, PSI_VARIANTS
from .operators import EXTRACTORS
from .prox import ProxWeights
from .reconstruct import PRESETS, constant_schedule
from .solvers import ScheduleParams


class ConfigError(ValueError):
    pass


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (list, tuple)):
        return tuple(float(v) for v in s)
    return tuple(float(v) for v in str(s).split(",") if v.strip())


def _ints(s):
    if isinstance(s, (list, tuple)):
        return tuple(int(v) for v in s)
    return tuple(int(v) for v in str(s).split(",") if v.strip())


def _choice(*options):
    def parse(s):
        s = str(s).strip()
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {s!r}")
        return s
    return parse


# key -> (parser, default); None defaults are filled from the preset or the task
KEYS = {
    "task": (_choice("cs-natural", "ct-sparse", "bench-rate"), "cs-natural"),
    "input": (str, None),
    "output": (str, None),
    "truth": (str, None),
    "ratio": (float, 0.25),
    "views": (_ints, (60, 90, 120, 180)),
    "detectors": (int, None),
    "stages": (int, None),
    "seed": (int, 0),
    "patch": (int, 33),
    "overlap": (int, 8),
    "data_range": (float, 1.0),
    "preset": (_choice(*PRESETS), "default"),
    "phantom": (_choice("shepp-logan", "disk"), "shepp-logan"),
    "size": (int, 64),
    "gil.domains": (int, None),
    "gil.psi": (_choice(*PSI_VARIANTS), None),
    "gil.tau": (float, None),
    "gil.epsilon": (float, None),
    "gil.extractor": (_choice(*EXTRACTORS), None),
    "gil.beta": (_floats, None),
    "gil.strict_contraction": (_bool, None),
    "schedule.alpha1": (float, None),
    "schedule.c1": (float, None),
    "schedule.alpha2": (float, None),
    "schedule.c2": (float, None),
    "schedule.alpha3": (float, None),
    "schedule.c3": (float, None),
    "bench.iters": (int, 500),
    "bench.oracle_iters": (int, 50000),
    "bench.lambda": (float, 0.1),
    "bench.m": (int, 20),
    "bench.n": (int, 50),
    "bench.scale": (float, 3.0),
}

PATH_KEYS = ("input", "output", "truth")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r} ({source}:{lineno})")
        raw[key] = value
    return raw


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, str(path))


class RunConfig:
    """Typed, validated configuration; later sources override earlier ones."""

    def __init__(self, *sources: dict):
        self.values = {k: default for k, (_, default) in KEYS.items()}
        self.explicit = set()
        for src in sources:
            for key, value in src.items():
                if value is None:
                    continue
                if key not in KEYS:
                    raise ConfigError(f"unknown config key {key!r}")
                try:
                    self.values[key] = KEYS[key][0](value)
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"invalid value for {key}: {exc}") from exc
                self.explicit.add(key)
        self._validate()

    def __getitem__(self, key):
        return self.values[key]

    def _validate(self):
        v = self.values
        if not 0 < v["ratio"] <= 1:
            raise ConfigError(f"ratio must lie in (0, 1], got {v['ratio']}")
        if v["stages"] is not None and v["stages"] < 1:
            raise ConfigError("stages must be >= 1")
        if v["patch"] < 1 or v["overlap"] < 1:
            raise ConfigError("patch and overlap must be >= 1")
        if v["overlap"] > v["patch"]:
            raise ConfigError("overlap step cannot exceed the patch size")
        if any(n < 1 for n in v["views"]):
            raise ConfigError("view counts must be >= 1")
        if v["data_range"] <= 0:
            raise ConfigError("data_range must be positive")
        if v["gil.domains"] is not None and not 1 <= v["gil.domains"] <= 11:
            raise ConfigError("gil.domains must lie in 1..11")
        try:
            self.schedules()
            self.gil()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def stages_for(self, task):
        if self["stages"] is not None:
            return self["stages"]
        return 7 if task == "ct-sparse" else 20

    def schedules(self) -> ScheduleParams:
        base = PRESETS[self["preset"]].schedules
        vals = {}
        for name in ("alpha1", "c1", "alpha2", "c2", "alpha3", "c3"):
            given = self.values[f"schedule.{name}"]
            vals[name] = given if given is not None else getattr(base, name)
        params = ScheduleParams(**vals)
        if self["gil.tau"] is not None:
            flat = constant_schedule(1.0, self["gil.tau"])
            params = ScheduleParams(params.alpha1, params.c1, 0.0, flat.c2, params.alpha3, params.c3)
        return params

    def gil(self) -> GilConfig:
        base = PRESETS[self["preset"]].gil
        kw = {}
        if self["gil.domains"] is not None:
            kw["n_domains"] = self["gil.domains"]
        if self["gil.psi"] is not None:
            kw["psi"] = self["gil.psi"]
        if self["gil.epsilon"] is not None:
            kw["epsilon"] = self["gil.epsilon"]
        if self["gil.extractor"] is not None:
            kw["extractor"] = EXTRACTORS[self["gil.extractor"]]()
        if self["gil.beta"] is not None:
            kw["weights"] = ProxWeights(self["gil.beta"])
        if self["gil.strict_contraction"] is not None:
            kw["strict_contraction"] = self["gil.strict_contraction"]
        return GilConfig(**{**_gil_fields(base), **kw})

    def canonical(self) -> str:
        lines = []
        for key in sorted(self.values):
            if key in PATH_KEYS:
                continue
            value = self.values[key]
            if isinstance(value, tuple):
                value = ",".join(repr(v) for v in value)
            lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
        return "\n".join(lines)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def _gil_fields(cfg: GilConfig) -> dict:
    return {
        "n_domains": cfg.n_domains, "psi": cfg.psi, "tau": cfg.tau, "extractor": cfg.extractor,
        "weights": cfg.weights, "epsilon": cfg.epsilon, "strict_contraction": cfg.strict_contraction,
    }
