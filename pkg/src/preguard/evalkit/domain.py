import itertools
import json
import logging
import math

from pathlib import Path
from typing import Any

from preguard.interp.types import (
    ArrayValue, Environment, EnvValue, ObjectValue,
)
from preguard.lang.types import (
    ArrayType, ClassType, MethodDef, Program, Type, BOOL, INT,
)

from .types import (
    ArrayDomain, BoolDomain, DomainError, DomainSpec, DomainTooLarge,
    IntDomain, ObjectDomain, ValueDomain, DEFAULT_CAP,
)

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".domain.json"


def sidecar_path(source: Path, method: str) -> Path:
    """
    `<method>.domain.json` next to the source file
    """
    return source.parent / f"{method}{SIDECAR_SUFFIX}"


def _parse_value(program: Program, t: Type, data: Any,
                 where: str) -> ValueDomain:
    if not isinstance(data, dict):
        raise DomainError(f"{where}: expected an object, got {data!r}")
    if t == INT:
        if "ints" in data:
            return IntDomain(tuple(int(v) for v in data["ints"]))
        if "range" in data:
            lo, hi = data["range"]
            if lo > hi:
                raise DomainError(f"{where}: empty range {lo}..{hi}")
            return IntDomain(tuple(range(int(lo), int(hi) + 1)))
        raise DomainError(f"{where}: int domain needs 'ints' or 'range'")
    if t == BOOL:
        return BoolDomain()
    match t:
        case ArrayType(elem=elem):
            lengths = tuple(int(n) for n in data.get("lengths", [0]))
            if any(n < 0 for n in lengths):
                raise DomainError(f"{where}: negative array length")
            elems = data.get("elems")
            if elems is None:
                if any(lengths):
                    raise DomainError(f"{where}: non-empty arrays need "
                                      f"'elems'")
                elems_domain: ValueDomain = IntDomain((0,))
            else:
                elems_domain = _parse_value(program, elem, elems,
                                            f"{where}[]")
            return ArrayDomain(bool(data.get("null", False)), lengths,
                               elems_domain)
        case ClassType(name=declared):
            if "classes" in data:
                raw = data["classes"]
            elif "class" in data:
                raw = {data["class"]: data.get("fields", {})}
            else:
                raw = {declared: data.get("fields", {})}
            classes = []
            for cls, fields in sorted(raw.items()):
                if cls not in program.class_table \
                        or not program.is_subclass(cls, declared):
                    raise DomainError(f"{where}: {cls} is not a {declared}")
                info = program.class_table[cls]
                field_domains = []
                for name, fdata in sorted(fields.items()):
                    ft = info.field_type(name)
                    if ft is None:
                        raise DomainError(f"{where}: {cls} has no field "
                                          f"{name}")
                    field_domains.append((name, _parse_value(
                        program, ft, fdata, f"{where}.{name}")))
                classes.append((cls, tuple(field_domains)))
            return ObjectDomain(bool(data.get("null", False)), tuple(classes))
    raise DomainError(f"{where}: unsupported type {t}")


def parse_domain(program: Program, method: MethodDef,
                 data: dict[str, Any]) -> DomainSpec:
    """
    Build a domain spec from its JSON form:
    {"cap": n, "params": {name: domain, ...}}
    :param program  Program providing the class table
    :param method   Method whose parameters are described
    :param data     Decoded sidecar
    """
    params = data.get("params", {})
    unknown = set(params) - {name for name, _ in method.params}
    if unknown:
        raise DomainError(f"{method.name}: unknown parameters "
                          f"{sorted(unknown)}")
    out: list[tuple[str, ValueDomain]] = []
    for name, t in method.params:
        if name not in params:
            if t != BOOL:
                raise DomainError(f"{method.name}: no domain for {name}")
            out.append((name, BoolDomain()))
            continue
        out.append((name, _parse_value(program, t, params[name], name)))
    return DomainSpec(tuple(out), int(data.get("cap", DEFAULT_CAP)))


def load_domain(path: Path, program: Program, method: MethodDef) -> DomainSpec:
    logger.debug(f"Loading domain of {method.name} from {path}")
    with open(path, "r") as fp:
        try:
            data = json.load(fp)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: {exc}") from exc
    return parse_domain(program, method, data)


def domain_size(domain: ValueDomain) -> int:
    match domain:
        case IntDomain(values=values):
            return len(values)
        case BoolDomain():
            return 2
        case ArrayDomain(null=null, lengths=lengths, elems=elems):
            base = domain_size(elems)
            return int(null) + sum(base ** n for n in lengths)
        case ObjectDomain(null=null, classes=classes):
            return int(null) + sum(
                math.prod(domain_size(d) for _, d in fields)
                for _, fields in classes)
    raise TypeError(f"not a domain: {domain!r}")


def spec_size(spec: DomainSpec) -> int:
    return math.prod(domain_size(d) for _, d in spec.params)


def domain_values(domain: ValueDomain) -> list[EnvValue]:
    """
    Every value of a domain, in a fixed order
    """
    match domain:
        case IntDomain(values=values):
            return list(values)
        case BoolDomain():
            return [False, True]
        case ArrayDomain(null=null, lengths=lengths, elems=elems):
            out: list[EnvValue] = [None] if null else []
            elem_values = domain_values(elems)
            for n in lengths:
                out.extend(ArrayValue(combo) for combo
                           in itertools.product(elem_values, repeat=n))
            return out
        case ObjectDomain(null=null, classes=classes):
            out = [None] if null else []
            for cls, fields in classes:
                names = [name for name, _ in fields]
                for combo in itertools.product(
                        *(domain_values(d) for _, d in fields)):
                    out.append(ObjectValue(cls, tuple(zip(names, combo))))
            return out
    raise TypeError(f"not a domain: {domain!r}")


def enumerate_envs(spec: DomainSpec) -> list[Environment]:
    """
    Every combination of parameter values exactly once, in a
    deterministic order
    :raises DomainTooLarge  The product exceeds the spec's cap
    """
    size = spec_size(spec)
    if size > spec.cap:
        raise DomainTooLarge(f"domain has {size} environments, "
                             f"cap is {spec.cap}")
    values = [domain_values(d) for _, d in spec.params]
    return [Environment(combo) for combo in itertools.product(*values)]
