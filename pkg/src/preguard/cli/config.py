import configparser
import logging
import tomllib

from argparse import Namespace
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Annotated
from typing import Any
from typing import Optional

from preguard.errors import PreguardError
from preguard.instrument.types import DEFAULT_MAX_ROUNDS
from preguard.interp.types import DEFAULT_BUDGET
from preguard.testgen.types import GenPolicy

logger = logging.getLogger(__name__)

SECTION = "preguard"


class ConfigError(PreguardError):
    """
    Unreadable or invalid configuration file
    """


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of one run: built-in defaults, overridden by the config
    file, overridden by explicit flags
    """
    inputs: Annotated[tuple[Path, ...], "Input files or directories"] = ()
    method: Annotated[Optional[str], "Target method"] = None
    seed: Annotated[int, "Generator seed"] = 42
    envs_per_round: Annotated[int, "Generated environments per round"] = 200
    null_prob: Annotated[float, "Probability of null references"] = 0.25
    max_rounds: Annotated[int, "Inference round limit"] = DEFAULT_MAX_ROUNDS
    reduce: Annotated[bool, "Reduce converged preconditions"] = True
    budget: Annotated[int, "Interpreter step budget"] = DEFAULT_BUDGET
    out: Annotated[Path, "Output directory"] = field(
        default_factory=lambda: Path("out"))
    log: Annotated[str, "Log level"] = "INFO"

    @property
    def policy(self) -> GenPolicy:
        return GenPolicy(rng_seed=self.seed, null_prob=self.null_prob,
                         envs_per_round=self.envs_per_round)


def _convert(name: str, raw: Any) -> Any:
    """
    Coerce a config file value to the type of the RunConfig field
    """
    try:
        match name:
            case "inputs":
                if isinstance(raw, str):
                    raw = [p.strip() for p in raw.split(",") if p.strip()]
                return tuple(Path(p) for p in raw)
            case "method":
                return str(raw)
            case "seed" | "envs_per_round" | "max_rounds" | "budget":
                return int(raw)
            case "null_prob":
                return float(raw)
            case "reduce":
                if isinstance(raw, str):
                    lowered = raw.strip().lower()
                    if lowered not in configparser.ConfigParser.BOOLEAN_STATES:
                        raise ValueError(raw)
                    return configparser.ConfigParser.BOOLEAN_STATES[lowered]
                return bool(raw)
            case "out":
                return Path(raw)
            case "log":
                return str(raw).upper()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for {name}: {raw!r}") from exc
    raise ConfigError(f"unknown setting {name}")


def read_config_file(path: Path) -> dict[str, Any]:
    """
    Settings from a TOML file (top level or [preguard] table)
    or an INI file ([preguard] section)
    """
    logger.debug(f"Reading configuration from {path}")
    if path.suffix == ".toml":
        try:
            with open(path, "rb") as fp:
                data = tomllib.load(fp)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        raw = data.get(SECTION, data)
    else:
        parser = configparser.ConfigParser()
        try:
            with open(path, "r") as fp:
                parser.read_file(fp)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        if not parser.has_section(SECTION):
            raise ConfigError(f"{path}: missing [{SECTION}] section")
        raw = dict(parser.items(SECTION))
    return {name: _convert(name, value) for name, value in raw.items()}


def build_config(args: Namespace) -> RunConfig:
    """
    Merge defaults, the optional --config file and explicit flags
    :param args  Parsed arguments; flags that were not given are None
    """
    config = RunConfig()
    if getattr(args, "config", None) is not None:
        config = replace(config, **read_config_file(args.config))

    flags: dict[str, Any] = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        if f.name == "inputs":
            if not value:
                continue
            value = tuple(value)
        flags[f.name] = value
    if getattr(args, "no_reduce", False):
        flags["reduce"] = False
    return replace(config, **flags)
