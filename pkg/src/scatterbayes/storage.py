"""File formats: experiment config (INI), data and summaries (JSON), samples (CSV).

All writers go through :func:`atomic_write` so an interrupted run never
leaves partial or temporary files behind. Floats are written with ``repr``
precision, which makes files byte-reproducible and lossless on reload.
"""
from __future__ import annotations

import configparser
import io
import json
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .curve import OBSTACLES, ErfMap, ExpMap
from .errors import ConfigurationError
from .forward import FarFieldMap, unit_directions
from .mcmc import ChainConfig
from .prior import KLPriorSpec, SEPriorSpec, TVSpec

__all__ = [
    "FORMAT_VERSION",
    "atomic_write",
    "DataFile",
    "ExperimentConfig",
    "ChainSummary",
    "write_samples_csv",
    "read_samples_csv",
    "positivity_from_dict",
    "prior_from_dict",
]

FORMAT_VERSION = 1


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def _floats(a) -> list:
    return [float(v) for v in np.ravel(a)]


def positivity_from_dict(d: dict):
    kind = d.get("map", "erf")
    if kind == "exp":
        return ExpMap()
    if kind == "erf":
        return ErfMap(float(d.get("a", 2.0)), float(d.get("b", 2.0)))
    raise ConfigurationError(f"unknown positivity map {kind!r}; valid: exp, erf")


def prior_from_dict(d: dict):
    kind = d.get("kind", "se")
    if kind == "se":
        return SEPriorSpec(float(d.get("length_scale", 0.5)))
    if kind == "kl":
        return KLPriorSpec(float(d.get("s", 2.0)), int(d.get("n_modes", 30)),
                           float(d.get("mean_mode_std", 0.5)))
    raise ConfigurationError(f"unknown prior kind {kind!r}; valid: se, kl")


@dataclass
class DataFile:
    """Synthesised photon counts plus everything needed to reproduce them."""

    obstacle: str
    obs_dirs: np.ndarray
    incident_dirs: np.ndarray
    k: float
    eta: float
    tau: float
    shift: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    seed: int
    n_points: int
    grading_order: int
    truth_points: np.ndarray
    format_version: int = FORMAT_VERSION

    def forward_map(self) -> FarFieldMap:
        return FarFieldMap(k=self.k, incident_dirs=self.incident_dirs, eta=self.eta,
                           obs_dirs=self.obs_dirs, tau=self.tau, shift=self.shift)

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "obstacle": self.obstacle,
            "obs_dirs": np.asarray(self.obs_dirs, dtype=float).tolist(),
            "incident_dirs": np.asarray(self.incident_dirs, dtype=float).tolist(),
            "k": float(self.k), "eta": float(self.eta), "tau": float(self.tau),
            "shift": _floats(self.shift),
            "y": [int(v) for v in self.y],
            "lambda": _floats(self.lam),
            "seed": int(self.seed),
            "n_points": int(self.n_points),
            "grading_order": int(self.grading_order),
            "truth": {"name": self.obstacle,
                      "points": np.asarray(self.truth_points, dtype=float).tolist()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataFile":
        if d.get("format_version") != FORMAT_VERSION:
            raise ConfigurationError(
                f"unsupported data format version {d.get('format_version')!r}")
        y = np.asarray(d["y"])
        if y.size and (y.min() < 0 or not np.issubdtype(y.dtype, np.integer)):
            raise ConfigurationError("counts must be nonnegative integers")
        return cls(
            obstacle=d["obstacle"],
            obs_dirs=np.asarray(d["obs_dirs"], dtype=float),
            incident_dirs=np.asarray(d["incident_dirs"], dtype=float),
            k=float(d["k"]), eta=float(d["eta"]), tau=float(d["tau"]),
            shift=np.asarray(d["shift"], dtype=float),
            y=y.astype(np.int64),
            lam=np.asarray(d["lambda"], dtype=float),
            seed=int(d["seed"]), n_points=int(d["n_points"]),
            grading_order=int(d["grading_order"]),
            truth_points=np.asarray(d["truth"]["points"], dtype=float),
        )

    def to_json(self) -> str:
        return _dump_json(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DataFile":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> Path:
        return atomic_write(path, self.to_json())

    @classmethod
    def load(cls, path) -> "DataFile":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def __eq__(self, other):
        return isinstance(other, DataFile) and self.to_dict() == other.to_dict()


def _parse_angles(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigurationError(f"cannot parse angle list {text!r}") from None


@dataclass
class ExperimentConfig:
    """Everything that defines one reconstruction run."""

    obstacle: str = "peanut"
    output_dir: str = "out"
    data_path: str | None = None
    # forward map
    k: float = 1.0
    incident_angles: tuple[float, ...] = (0.0,)
    eta: float | None = None
    m: int = 64
    tau: float = 1000.0
    shift: float = 0.0
    auto_shift: bool = False
    # data synthesis
    data_seed: int = 7
    data_n_points: int = 512
    grading_order: int | None = None
    # inversion
    positivity: ExpMap | ErfMap = field(default_factory=ErfMap)
    prior: KLPriorSpec | SEPriorSpec = field(default_factory=SEPriorSpec)
    tv: TVSpec = field(default_factory=TVSpec)
    beta: float = ChainConfig.beta
    n_iters: int = ChainConfig.n_iters
    burn_in: int = ChainConfig.burn_in
    thin: int = ChainConfig.thin
    seed: int = 0
    n_points: int = 128
    n_chains: int = 1

    def __post_init__(self):
        if self.obstacle not in OBSTACLES:
            raise ConfigurationError(
                f"unknown obstacle {self.obstacle!r}; valid names: {', '.join(OBSTACLES)}")
        if self.n_chains < 1:
            raise ConfigurationError("n_chains must be >= 1")
        self.incident_angles = tuple(float(a) for a in self.incident_angles)
        self.chain_config()

    def chain_config(self, seed: int | None = None) -> ChainConfig:
        return ChainConfig(beta=self.beta, n_iters=self.n_iters, burn_in=self.burn_in,
                           thin=self.thin, seed=self.seed if seed is None else seed,
                           prior=self.prior, positivity=self.positivity, tv=self.tv)

    def forward_map(self, shift=None) -> FarFieldMap:
        return FarFieldMap(k=self.k, incident_dirs=unit_directions(self.incident_angles),
                           eta=self.eta, m=self.m, tau=self.tau,
                           shift=self.shift if shift is None else shift)

    def to_dict(self) -> dict:
        return {
            "experiment": {"obstacle": self.obstacle, "output_dir": self.output_dir,
                           "data_path": self.data_path or ""},
            "forward": {"k": self.k,
                        "incident_angles": " ".join(repr(a) for a in self.incident_angles),
                        "eta": "" if self.eta is None else self.eta,
                        "m": self.m, "tau": self.tau, "shift": self.shift,
                        "auto_shift": self.auto_shift},
            "data": {"seed": self.data_seed, "n_points": self.data_n_points,
                     "grading_order": "" if self.grading_order is None else self.grading_order},
            "positivity": self.positivity.to_dict(),
            "prior": self.prior.to_dict(),
            "tv": {"zeta": self.tv.zeta},
            "chain": {"beta": self.beta, "n_iters": self.n_iters, "burn_in": self.burn_in,
                      "thin": self.thin, "seed": self.seed, "n_points": self.n_points,
                      "n_chains": self.n_chains},
        }

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for section, values in self.to_dict().items():
            cp[section] = {key: (repr(v) if isinstance(v, float) else str(v))
                           for key, v in values.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        def get(section, key, conv, default):
            raw = d.get(section, {}).get(key, "")
            if raw == "" or raw is None:
                return default
            try:
                return conv(raw)
            except (TypeError, ValueError):
                raise ConfigurationError(f"[{section}] {key} = {raw!r} is invalid") from None

        def boolean(v):
            if isinstance(v, bool):
                return v
            s = str(v).strip().lower()
            if s in ("1", "true", "yes", "on"):
                return True
            if s in ("0", "false", "no", "off"):
                return False
            raise ValueError(v)

        known = {"experiment", "forward", "data", "positivity", "prior", "tv", "chain"}
        unknown = set(d) - known - {"DEFAULT"}
        if unknown:
            raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
        dflt = cls.__dataclass_fields__
        return cls(
            obstacle=get("experiment", "obstacle", str, "peanut"),
            output_dir=get("experiment", "output_dir", str, "out"),
            data_path=get("experiment", "data_path", str, None),
            k=get("forward", "k", float, 1.0),
            incident_angles=get("forward", "incident_angles",
                                lambda v: _parse_angles(str(v)), (0.0,)),
            eta=get("forward", "eta", float, None),
            m=get("forward", "m", int, 64),
            tau=get("forward", "tau", float, 1000.0),
            shift=get("forward", "shift", float, 0.0),
            auto_shift=get("forward", "auto_shift", boolean, False),
            data_seed=get("data", "seed", int, 7),
            data_n_points=get("data", "n_points", int, 512),
            grading_order=get("data", "grading_order", int, None),
            positivity=positivity_from_dict(dict(d.get("positivity", {}))),
            prior=prior_from_dict(dict(d.get("prior", {}))),
            tv=TVSpec(get("tv", "zeta", float, 0.0)),
            beta=get("chain", "beta", float, dflt["beta"].default),
            n_iters=get("chain", "n_iters", int, dflt["n_iters"].default),
            burn_in=get("chain", "burn_in", int, dflt["burn_in"].default),
            thin=get("chain", "thin", int, dflt["thin"].default),
            seed=get("chain", "seed", int, 0),
            n_points=get("chain", "n_points", int, 128),
            n_chains=get("chain", "n_chains", int, 1),
        )

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";",))
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse config: {exc}") from None
        return cls.from_dict({s: dict(cp[s]) for s in cp.sections()})

    def save(self, path) -> Path:
        return atomic_write(path, self.to_ini())

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_ini(Path(path).read_text(encoding="utf-8"))


@dataclass
class ChainSummary:
    """What ``summary.json`` holds; enough to redraw every figure."""

    obstacle: str
    config: dict
    n_points: int
    mean_q: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray
    acceptance_rates: list
    n_retained: int
    n_failures: int
    potential_trace: np.ndarray
    obs_angles: np.ndarray
    y: np.ndarray
    lam_true: np.ndarray
    truth_points: np.ndarray
    truth_q: np.ndarray | None = None
    rel_l2_error: float | None = None
    band_coverage: float | None = None
    data_file: str = ""
    format_version: int = FORMAT_VERSION

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.acceptance_rates))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                v = v.tolist() if v.ndim > 1 or v.dtype.kind in "iu" else _floats(v)
            out[f.name] = v
        if self.truth_q is not None:
            out["truth_q"] = _floats(self.truth_q)
        out["acceptance_rates"] = [float(a) for a in self.acceptance_rates]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ChainSummary":
        if d.get("format_version") != FORMAT_VERSION:
            raise ConfigurationError(
                f"unsupported summary format version {d.get('format_version')!r}")
        kw = dict(d)
        for name in ("mean_q", "band_lo", "band_hi", "potential_trace", "obs_angles",
                     "lam_true", "truth_points"):
            kw[name] = np.asarray(kw[name], dtype=float)
        kw["y"] = np.asarray(kw["y"], dtype=np.int64)
        if kw.get("truth_q") is not None:
            kw["truth_q"] = np.asarray(kw["truth_q"], dtype=float)
        return cls(**kw)

    def to_json(self) -> str:
        return _dump_json(self.to_dict())

    @classmethod
    def load(cls, path) -> "ChainSummary":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path) -> Path:
        return atomic_write(path, self.to_json())

    def __eq__(self, other):
        return isinstance(other, ChainSummary) and self.to_json() == other.to_json()


def write_samples_csv(path, samples: np.ndarray, nodes: np.ndarray) -> Path:
    """One row per retained latent sample; columns are grid nodes."""
    lines = [",".join(f"t{i}" for i in range(len(nodes)))]
    lines += [",".join(repr(float(v)) for v in row) for row in np.atleast_2d(samples)]
    return atomic_write(path, "\n".join(lines) + "\n")


def read_samples_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
