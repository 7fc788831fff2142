"""Annotation: eth_getBalance(address, blockTag) -> balance quantity."""

from ..types import MethodSchema, OutputSchema, Param, ParamKind, ValueKind
from ._common import QUANTITY

SCHEMA = MethodSchema(
    name="eth_getBalance",
    params=(
        Param("address", ParamKind(ValueKind.Address)),
        Param("blockTag", ParamKind(ValueKind.BlockTag)),
    ),
    output=OutputSchema(QUANTITY),
)
