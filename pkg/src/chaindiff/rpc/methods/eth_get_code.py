"""Annotation: eth_getCode(address, blockTag) -> code bytes, "0x" if empty.

The result is nullable on the wire because a known client bug class returns
null for empty code; the comparison-rule layer decides whether that is
benign.
"""

from ..types import (MethodSchema, Nullable, OutputSchema, Param, ParamKind,
                     ValueKind)
from ._common import HEXDATA

SCHEMA = MethodSchema(
    name="eth_getCode",
    params=(
        Param("address", ParamKind(ValueKind.Address)),
        Param("blockTag", ParamKind(ValueKind.BlockTag)),
    ),
    output=OutputSchema(Nullable(HEXDATA)),
)
