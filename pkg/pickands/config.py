"""
Experiment configuration files.

Configs are TOML documents handled by atoml, so a config written back after
overrides keeps its comments and layout.
"""
import logging
import os

from collections.abc import Mapping
from typing import Any, Dict, List, Optional, Tuple

import atoml

from atoml.exceptions import ParseError
from atoml.toml_document import TOMLDocument
from atoml.toml_file import TOMLFile

from .estimators import CAPACITY, DEFAULT_STEP, METHODS, check_admissible
from .exceptions import (
    ConfigError,
    ContractError,
    MissingFieldError,
    MomentConditionError,
)
from .gaussian import VarianceFunction
from .grid import GridSpec
from .levy import CONTINUOUS_ROUTE, GRID_ROUTE, check_moment_conditions
from .process import (
    GAUSSIAN,
    VARIANCE_MIXED,
    GaussianProcess,
    LevyProcess,
    ProcessSpec,
    VarianceMixedProcess,
    process_from_dict,
)


LOGGER = logging.getLogger(__name__)

FEKETE = "fekete"
CONFIG_METHODS = METHODS + (FEKETE,)
CSV = "csv"
JSONL = "jsonl"
FORMATS = (CSV, JSONL)

TOP_KEYS = ("name", "method", "n", "seed", "workers", "output", "format")
EXTRA_KEYS = (
    "T",
    "T_list",
    "beta",
    "k_pilot",
    "x_levels",
    "delta_list",
    "points",
    "t_shift",
)
DEFAULTS = {
    "name": "experiment",
    "method": "dieker_yakir",
    "n": 10000,
    "workers": 1,
    "output": "pickands.csv",
    "format": CSV,
}


def _table(data: Mapping) -> "atoml.items.Table":
    tab = atoml.table()
    for key, value in data.items():
        if isinstance(value, Mapping):
            inline = atoml.inline_table()
            inline.update(value)
            value = inline
        tab.add(key, value)

    return tab


class ExperimentConfig:
    """
    A validated view over a TOML experiment document.
    """

    def __init__(self, document: TOMLDocument, path: Optional[str] = None) -> None:
        self._doc = document
        self._path = path
        self._process = None

    @classmethod
    def parse(cls, text: str, path: Optional[str] = None) -> "ExperimentConfig":
        try:
            return cls(atoml.parse(text), path)
        except ParseError as e:
            raise ConfigError(path or "<string>", str(e))

    @classmethod
    def read(cls, path: str) -> "ExperimentConfig":
        try:
            doc = TOMLFile(path).read()
        except ParseError as e:
            raise ConfigError(path, str(e))
        except OSError as e:
            raise ConfigError(path, f"cannot read config: {e.strerror}")

        return cls(doc, path)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        """
        Builds a fresh document: scalars first, then one table per section.
        """
        doc = atoml.document()
        for key in TOP_KEYS:
            if key in data:
                doc.add(key, data[key])
        for key in ("process", "grid", "extras"):
            if key in data:
                doc.add(atoml.nl())
                doc.add(key, _table(data[key]))

        return cls(doc)

    @property
    def document(self) -> TOMLDocument:
        return self._doc

    @property
    def path(self) -> Optional[str]:
        return self._path

    def dumps(self) -> str:
        return atoml.dumps(self._doc)

    def write(self, path: str) -> None:
        TOMLFile(path).write(self._doc)

    def as_dict(self) -> Dict[str, Any]:
        return self._doc.value

    def override(self, **values: Any) -> None:
        """
        Writes non-None values back into the document.
        """
        for key, value in values.items():
            if value is None:
                continue
            if key not in TOP_KEYS:
                raise ConfigError(key, "cannot be overridden")
            self._doc[key] = value

    def _get(self, key: str) -> Any:
        if key in self._doc:
            return self._doc[key]
        if key in DEFAULTS:
            return DEFAULTS[key]

        raise MissingFieldError(key)

    def _section(self, key: str) -> Dict[str, Any]:
        section = self._doc.get(key)
        if section is None:
            return {}
        if not isinstance(section, Mapping):
            raise ConfigError(key, "must be a table")

        return self.as_dict()[key]

    @property
    def name(self) -> str:
        return str(self._get("name"))

    @property
    def method(self) -> str:
        method = str(self._get("method"))
        if method not in CONFIG_METHODS:
            raise ConfigError("method", f"must be one of {', '.join(CONFIG_METHODS)}")

        return method

    def _count(self, key: str, minimum: int) -> int:
        value = self._get(key)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(key, f"must be an integer >= {minimum}")

        return int(value)

    @property
    def n(self) -> int:
        return self._count("n", 1)

    @property
    def seed(self) -> int:
        return self._count("seed", 0)

    @property
    def workers(self) -> int:
        return self._count("workers", 1)

    @property
    def output(self) -> str:
        return str(self._get("output"))

    @property
    def format(self) -> str:
        fmt = str(self._get("format"))
        if fmt not in FORMATS:
            raise ConfigError("format", f"must be one of {', '.join(FORMATS)}")

        return fmt

    @property
    def process(self) -> ProcessSpec:
        if self._process is None:
            self._process = self._build_process()

        return self._process

    def _build_process(self) -> ProcessSpec:
        data = self._section("process")
        if not data:
            raise MissingFieldError("process")

        kind = data.get("kind")
        try:
            if "variance_file" in data and kind in (GAUSSIAN, VARIANCE_MIXED):
                path = self._resolve(data["variance_file"])
                sigma2 = VarianceFunction.from_file(path)
                if kind == GAUSSIAN:
                    return GaussianProcess(sigma2)
                return VarianceMixedProcess(
                    sigma2, tuple(data["values"]), tuple(data["probs"])
                )
            return process_from_dict(data)
        except KeyError as e:
            raise MissingFieldError(f"process.{e.args[0]}")
        except (ContractError, TypeError) as e:
            raise ConfigError("process", str(e))
        except OSError as e:
            raise ConfigError("process.variance_file", e.strerror)

    def _resolve(self, path: str) -> str:
        if self._path is None or os.path.isabs(path):
            return path

        return os.path.join(os.path.dirname(os.path.abspath(self._path)), path)

    def _grid_value(self, key: str, default: float) -> float:
        value = self._section("grid").get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"grid.{key}", "must be a number")
        if value < 0:
            raise ConfigError(f"grid.{key}", "must be non-negative")

        return float(value)

    @property
    def delta(self) -> float:
        return self._grid_value("delta", 0.0)

    @property
    def eta(self) -> float:
        return self._grid_value("eta", self.delta)

    @property
    def step(self) -> float:
        step = self._grid_value("step", DEFAULT_STEP)
        if step == 0:
            raise ConfigError("grid.step", "must be positive")

        return step

    @property
    def window(self) -> Optional[Tuple[float, float]]:
        window = self._section("grid").get("window")
        if window is None:
            return None
        if len(window) != 2 or not window[0] <= 0 <= window[1]:
            raise ConfigError("grid.window", "must be [lo, hi] with lo <= 0 <= hi")

        return float(window[0]), float(window[1])

    @property
    def extras(self) -> Dict[str, Any]:
        extras = self._section("extras")
        unknown = set(extras) - set(EXTRA_KEYS)
        if unknown:
            raise ConfigError(f"extras.{sorted(unknown)[0]}", "unknown key")

        return extras

    def extra(self, key: str, default: Any = None) -> Any:
        return self.extras.get(key, default)

    def require_extra(self, key: str) -> Any:
        value = self.extra(key)
        if value is None:
            raise MissingFieldError(f"extras.{key}")

        return value

    @property
    def route(self) -> str:
        if self.method == CAPACITY:
            return GRID_ROUTE
        if self.delta == 0 and self.eta == 0:
            return CONTINUOUS_ROUTE

        return GRID_ROUTE

    def grid(self) -> GridSpec:
        """
        The simulation grid implied by delta, step and window.
        """
        step = self.delta or self.step
        lo, hi = self.window or (
            -self.process.default_half_width(),
            self.process.default_half_width(),
        )
        try:
            return GridSpec(step, lo, hi, eta=self.eta, target_delta=self.delta)
        except ContractError as e:
            raise ConfigError("grid", str(e))

    def validate(self) -> "ExperimentConfig":
        """
        Checks every field and the Lévy moment conditions of the route.
        """
        for key in ("method", "n", "seed", "workers", "output", "format"):
            getattr(self, key)
        self.extras
        process = self.process
        try:
            if self.method not in (CAPACITY, FEKETE):
                check_admissible(self.delta, self.eta)
        except ContractError as e:
            raise ConfigError("grid", str(e))
        self.window

        if isinstance(process, LevyProcess):
            ok, bound = check_moment_conditions(process.spec, self.route)
            if not ok:
                raise MomentConditionError("process", bound)

        return self

    def summary(self) -> List[str]:
        return [
            f"{self.name}: {self.method} on {self.process.name}",
            f"  delta={self.delta:g} eta={self.eta:g} n={self.n} seed={self.seed}",
        ]


def load_config(path: str) -> ExperimentConfig:
    return ExperimentConfig.read(path).validate()
