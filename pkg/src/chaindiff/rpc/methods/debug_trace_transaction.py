"""Annotation: debug_traceTransaction(transactionHash) -> structured trace.

structLogs stack entries are the post-op stack top (at most 4, top first).
"""

from ..types import (Array, MethodSchema, Object, OutputSchema, Param,
                     ParamKind, ValueKind)
from ._common import BOOLEAN, NUMBER, QUANTITY, STRING

SCHEMA = MethodSchema(
    name="debug_traceTransaction",
    params=(
        Param("transactionHash", ParamKind(ValueKind.DataBytes)),
    ),
    output=OutputSchema(Object((
        ("gasUsed", QUANTITY),
        ("failed", BOOLEAN),
        ("structLogs", Array(Object((
            ("pc", NUMBER),
            ("op", STRING),
            ("gas", NUMBER),
            ("gasCost", NUMBER),
            ("depth", NUMBER),
            ("stack", Array(QUANTITY)),
        )))),
    ))),
)
