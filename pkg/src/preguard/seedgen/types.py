from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Annotated
from typing import Any
from typing import Optional

from preguard.interp.types import CrashKind
from preguard.lang.types import MethodDef, NodeId, Program

PRE_SUFFIX = "_pre"
TEMP_PREFIX = "__t"


class OriginKind(Enum):
    FROM_SOURCE = "source"
    SEED_INSERTED = "seed"
    GUARD_INSERTED = "guard"
    WRAP_INSERTED = "wrap"


@dataclass(frozen=True)
class Origin:
    """
    Where a node of a precondition came from
    """
    kind: OriginKind
    crash: Annotated[Optional[CrashKind], "Guarded crash kind"] = None

    def to_json(self) -> str:
        if self.crash is not None:
            return f"{self.kind.value}:{self.crash.value}"
        return self.kind.value


FROM_SOURCE = Origin(OriginKind.FROM_SOURCE)
SEED_INSERTED = Origin(OriginKind.SEED_INSERTED)
WRAP_INSERTED = Origin(OriginKind.WRAP_INSERTED)


def guard_inserted(kind: CrashKind) -> Origin:
    return Origin(OriginKind.GUARD_INSERTED, kind)


@dataclass(frozen=True)
class PreconditionProgram:
    """
    A program holding a boolean precondition method next to the
    original method it was derived from
    """
    program: Program
    entry: Annotated[str, "Name of the precondition method"]
    source: Annotated[str, "Name of the method the precondition guards"]
    provenance: Annotated[dict[NodeId, Origin],
                          "Origin of every node of the entry method"] = \
        field(default_factory=dict, compare=False)
    guarded: Annotated[frozenset[tuple[str, NodeId]],
                       "(guard key, node id) of every inserted check"] = \
        field(default=frozenset(), compare=False)

    @property
    def method(self) -> MethodDef:
        return self.program.method(self.entry)

    def with_program(self, program: Program,
                     provenance: dict[NodeId, Origin],
                     guarded: Optional[frozenset[tuple[str, NodeId]]] = None
                     ) -> "PreconditionProgram":
        if guarded is None:
            guarded = self.guarded
        return replace(self, program=program, provenance=provenance,
                       guarded=guarded)

    def provenance_json(self) -> dict[str, Any]:
        """
        Provenance keyed by node id, plus the node id order of the
        pretty-print so ids can be re-attached to the text
        """
        return {
            "entry": self.entry,
            "source": self.source,
            "node_ids": self.program.printed.order,
            "provenance": {str(nid): origin.to_json()
                           for nid, origin in sorted(self.provenance.items())},
        }
