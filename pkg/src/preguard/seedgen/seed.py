import json
import logging

from dataclasses import replace
from pathlib import Path

from preguard.lang.resolver import resolve
from preguard.lang.types import MethodDef, NodeId, Program, ResolveError
from preguard.lang.util import IdAllocator, clone, walk

from .transforms import (
    booleanize, normalize_calls, normalize_loops, strip_throws,
)
from .types import (
    FROM_SOURCE, Origin, PreconditionProgram, SEED_INSERTED, PRE_SUFFIX,
)

logger = logging.getLogger(__name__)


def pre_name(program: Program, target: str) -> str:
    """
    Name of the precondition method for target, unique in program
    """
    name = f"{target}{PRE_SUFFIX}"
    suffix = 2
    while program.has_method(name):
        name = f"{target}{PRE_SUFFIX}{suffix}"
        suffix += 1
    return name


def with_method(program: Program, method: MethodDef) -> Program:
    """
    Re-resolve program with method replaced (matched by name) or appended
    """
    if program.has_method(method.name):
        methods = tuple(method if m.name == method.name else m
                        for m in program.methods)
    else:
        methods = program.methods + (method,)
    return resolve(program.classes, methods)


def make_seed(program: Program, target: str) -> PreconditionProgram:
    """
    Derive the seed precondition of target: booleanized, throw-free,
    with loop conditions and calls normalized. The result is added to
    the program next to target, callees stay as they are.
    :param program  Resolved program
    :param target   Method to infer a precondition for
    :raises ResolveError  Unknown target, or a transformed method that
                          no longer type-checks
    """
    if not program.has_method(target):
        raise ResolveError(f"unknown method {target}")
    source = program.method(target)

    ids = IdAllocator(program.next_id)
    body = clone(source.body, ids)
    from_source = {n.nid for n in walk(body)}
    method = replace(source, name=pre_name(program, target), body=body,
                     nid=ids())
    current = with_method(program, method)

    for step in (booleanize, strip_throws, normalize_loops):
        method = step(method, IdAllocator(current.next_id))
        current = with_method(current, method)
        logger.debug(f"Seed of {target} after {step.__name__}")
    method = normalize_calls(method, current, IdAllocator(current.next_id))
    current = with_method(current, method)

    provenance: dict[NodeId, Origin] = {method.nid: SEED_INSERTED}
    for n in walk(method.body):
        provenance[n.nid] = FROM_SOURCE if n.nid in from_source \
            else SEED_INSERTED
    logger.info(f"Seeded {method.name} from {target}")
    return PreconditionProgram(current, method.name, target, provenance)


def write_seed(seed: PreconditionProgram, path: Path) -> Path:
    """
    Write the seed program as MiniLang text plus a provenance sidecar
    :param seed  Seed precondition
    :param path  Destination .mpl file
    :return      Path of the provenance sidecar
    """
    with open(path, "w") as fp:
        fp.write(seed.program.printed.text)
    sidecar = path.with_suffix(".provenance.json")
    with open(sidecar, "w") as fp:
        json.dump(seed.provenance_json(), fp, indent=2, sort_keys=True)
    logger.info(f"Wrote seed of {seed.source} to {path}")
    return sidecar
