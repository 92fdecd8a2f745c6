"""
Run configuration: built-in defaults, overridden by the environment (Config),
then by a JSON config file, then by command-line flags.
"""

import copy
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from config.config import config
from config.logger import setup_logger
from core.grid import Grid1D, Grid2D, make_grid_1d, make_grid_2d
from core.params import BsParams, MgParams
from potentials.quartic import QuarticParams
from pricing.evolution import EvolutionConfig
from utils.errors import InvalidConfigError, InvalidInputError, ReportIOError

logger = setup_logger(__name__)

SECTION_KEYS: Dict[str, Tuple[str, ...]] = {
    "bs": ("r", "sigma", "sigma2"),
    "mg": ("r", "lam", "mu", "zeta", "alpha", "rho"),
    "quartic": ("mu2", "lam4"),
    "grid": ("x_min", "x_max", "nx", "y_min", "y_max", "ny"),
    "evolution": ("maturity", "steps", "scheme", "rannacher_steps"),
    "analysis": ("y", "ys", "bracket", "samples", "strike", "spot", "model"),
    "tolerances": (
        "stationarity",
        "residual",
        "commutator",
        "broken",
        "root",
        "price",
        "deviation",
        "manifold",
    ),
}
PATH_KEYS = ("out", "csv", "db")


def default_sections() -> Dict[str, Dict[str, Any]]:
    return {
        "bs": {"r": 0.05, "sigma": 0.2},
        "mg": {"r": 0.05, "lam": -1.0, "mu": 0.5, "zeta": 1.0, "alpha": 1.0, "rho": 0.0},
        "quartic": {"mu2": 0.04, "lam4": -0.01},
        "grid": {},
        "evolution": {"scheme": "crank-nicolson", "rannacher_steps": 2},
        "analysis": {"y": 0.0, "bracket": [-2.0, 2.0], "samples": 401},
        "tolerances": {
            "stationarity": config.QLAB_TOL_STATIONARITY,
            "residual": config.QLAB_TOL_RESIDUAL,
            "commutator": config.QLAB_TOL_COMMUTATOR,
            "broken": config.QLAB_TOL_BROKEN,
            "root": config.QLAB_TOL_ROOT,
            "price": config.QLAB_TOL_PRICE,
            "deviation": config.QLAB_TOL_DEVIATION,
            "manifold": config.QLAB_TOL_MANIFOLD,
        },
    }


# argparse dest -> (section, key); --r is routed to both market models.
FLAG_TARGETS: Dict[str, Tuple[str, str]] = {
    "sigma2": ("bs", "sigma2"),
    "lam": ("mg", "lam"),
    "mu": ("mg", "mu"),
    "zeta": ("mg", "zeta"),
    "alpha": ("mg", "alpha"),
    "rho": ("mg", "rho"),
    "mu2": ("quartic", "mu2"),
    "lam4": ("quartic", "lam4"),
    "x_min": ("grid", "x_min"),
    "x_max": ("grid", "x_max"),
    "nx": ("grid", "nx"),
    "y_min": ("grid", "y_min"),
    "y_max": ("grid", "y_max"),
    "ny": ("grid", "ny"),
    "maturity": ("evolution", "maturity"),
    "steps": ("evolution", "steps"),
    "scheme": ("evolution", "scheme"),
    "rannacher_steps": ("evolution", "rannacher_steps"),
    "y": ("analysis", "y"),
    "ys": ("analysis", "ys"),
    "bracket": ("analysis", "bracket"),
    "samples": ("analysis", "samples"),
    "strike": ("analysis", "strike"),
    "spot": ("analysis", "spot"),
    "model": ("analysis", "model"),
}
FLAG_TARGETS.update(
    {f"tol_{key}": ("tolerances", key) for key in SECTION_KEYS["tolerances"]}
)


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Reads a JSON run configuration and checks its keys against the schema.

    Args:
        path: Path to the JSON file.

    Returns:
        dict: The parsed document.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as e:
        logger.error("Cannot read config file %s: %s", path, e)
        raise ReportIOError(f"Cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        logger.error("Config file %s is not valid JSON: %s", path, e)
        raise InvalidConfigError(f"Config file {path} is not valid JSON: {e}") from e

    if not isinstance(document, dict):
        raise InvalidConfigError("The config file must hold a JSON object.")
    for section, body in document.items():
        if section in PATH_KEYS:
            if body is not None and not isinstance(body, str):
                raise InvalidConfigError(f"'{section}' must be a path string.")
            continue
        if section not in SECTION_KEYS:
            raise InvalidConfigError(f"Unknown config section '{section}'.")
        if not isinstance(body, dict):
            raise InvalidConfigError(f"Config section '{section}' must be an object.")
        unknown = sorted(set(body) - set(SECTION_KEYS[section]))
        if unknown:
            raise InvalidConfigError(f"Unknown keys in '{section}': {', '.join(unknown)}.")
    return document


def _number(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfigError(f"{section}.{key} must be a number, got {value!r}.")
    value = float(value)
    if not math.isfinite(value):
        raise InvalidConfigError(f"{section}.{key} must be finite.")
    return value


def _integer(section: str, key: str, value: Any) -> int:
    number = _number(section, key, value)
    if number != int(number):
        raise InvalidConfigError(f"{section}.{key} must be an integer, got {value!r}.")
    return int(number)


@dataclass
class RunConfig:
    """
    Fully merged settings for one subcommand.

    Attributes:
        command: Subcommand name.
        sections: Merged config sections (bs, mg, quartic, grid, evolution,
            analysis, tolerances).
        out: JSON report path, stdout when None.
        csv: CSV table path, none written when None.
        db: Report archive URL, archive disabled when empty.
    """

    command: str
    sections: Dict[str, Dict[str, Any]] = field(default_factory=default_sections)
    out: Optional[str] = None
    csv: Optional[str] = None
    db: Optional[str] = None

    @property
    def tolerances(self) -> Dict[str, float]:
        return {
            key: _number("tolerances", key, value)
            for key, value in sorted(self.sections["tolerances"].items())
        }

    def tolerance(self, key: str) -> float:
        return self.tolerances[key]

    def bs_params(self) -> BsParams:
        section = self.sections["bs"]
        r = _number("bs", "r", section.get("r"))
        if section.get("sigma2") is not None:
            return BsParams.from_variance(r, _number("bs", "sigma2", section["sigma2"]))
        return BsParams(r=r, sigma=_number("bs", "sigma", section.get("sigma")))

    def mg_params(self) -> MgParams:
        section = self.sections["mg"]
        return MgParams(**{key: _number("mg", key, section.get(key)) for key in SECTION_KEYS["mg"]})

    def quartic_params(self) -> QuarticParams:
        section = self.sections["quartic"]
        return QuarticParams(
            mu2=_number("quartic", "mu2", section.get("mu2")),
            lam4=_number("quartic", "lam4", section.get("lam4")),
        )

    def grid_1d(self, x_min: float, x_max: float, nx: int) -> Grid1D:
        """Log-price grid, with the given per-command defaults for unset keys."""
        section = self.sections["grid"]
        return make_grid_1d(
            _number("grid", "x_min", section.get("x_min", x_min)),
            _number("grid", "x_max", section.get("x_max", x_max)),
            _integer("grid", "nx", section.get("nx", nx)),
        )

    def grid_2d(
        self, x_min: float, x_max: float, nx: int, y_min: float, y_max: float, ny: int
    ) -> Grid2D:
        section = self.sections["grid"]
        return make_grid_2d(
            _number("grid", "x_min", section.get("x_min", x_min)),
            _number("grid", "x_max", section.get("x_max", x_max)),
            _integer("grid", "nx", section.get("nx", nx)),
            _number("grid", "y_min", section.get("y_min", y_min)),
            _number("grid", "y_max", section.get("y_max", y_max)),
            _integer("grid", "ny", section.get("ny", ny)),
        )

    def evolution(self, maturity: float, steps: int, grid=None) -> EvolutionConfig:
        section = self.sections["evolution"]
        scheme = section.get("scheme", "crank-nicolson")
        try:
            return EvolutionConfig(
                maturity=_number("evolution", "maturity", section.get("maturity", maturity)),
                steps=_integer("evolution", "steps", section.get("steps", steps)),
                scheme=scheme,
                rannacher_steps=_integer(
                    "evolution", "rannacher_steps", section.get("rannacher_steps", 2)
                ),
                grid=grid,
            )
        except ValueError as e:
            if isinstance(e, InvalidInputError):
                raise
            raise InvalidConfigError(f"Unknown evolution scheme {scheme!r}.") from e

    def number(self, key: str, default: Optional[float] = None) -> float:
        return _number("analysis", key, self.sections["analysis"].get(key, default))

    def numbers(self, key: str, default: Sequence[float] = ()) -> List[float]:
        values = self.sections["analysis"].get(key, default)
        if values is None or isinstance(values, (str, bytes)) or not hasattr(values, "__iter__"):
            raise InvalidConfigError(f"analysis.{key} must be a list of numbers.")
        return [_number("analysis", key, v) for v in values]

    def choice(self, key: str, default: str) -> str:
        return str(self.sections["analysis"].get(key, default))


def build_run_config(
    command: str, flags: Dict[str, Any], config_path: Optional[str] = None
) -> RunConfig:
    """
    Merges defaults, the optional JSON file and explicit flags.

    Args:
        command: Subcommand name.
        flags: argparse namespace as a dict; None means "not given".
        config_path: Optional JSON config file.

    Returns:
        RunConfig: The merged configuration.
    """
    sections = default_sections()
    paths: Dict[str, Optional[str]] = {key: None for key in PATH_KEYS}

    layers: List[Dict[str, Any]] = []
    if config_path:
        layers.append(load_config_file(config_path))

    explicit: Dict[str, Any] = {}
    for dest, value in flags.items():
        if value is None:
            continue
        if dest in PATH_KEYS:
            explicit[dest] = value
        elif dest == "r":
            # --r sets the rate of whichever market model the command uses.
            explicit.setdefault("bs", {})["r"] = value
            explicit.setdefault("mg", {})["r"] = value
        elif dest in FLAG_TARGETS:
            section, key = FLAG_TARGETS[dest]
            explicit.setdefault(section, {})[key] = value
    layers.append(explicit)

    for layer in layers:
        for section, body in layer.items():
            if section in PATH_KEYS:
                paths[section] = body
                continue
            if section == "bs" and ("sigma" in body or "sigma2" in body):
                # The later layer's volatility replaces both spellings.
                sections["bs"].pop("sigma", None)
                sections["bs"].pop("sigma2", None)
            sections[section].update(copy.deepcopy(body))

    if paths["db"] is None and config.QLAB_REPORT_DB_URL:
        paths["db"] = config.QLAB_REPORT_DB_URL

    logger.debug("Run config for %s: %s", command, sections)
    return RunConfig(command=command, sections=sections, **paths)
