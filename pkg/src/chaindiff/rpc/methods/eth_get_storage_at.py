"""Annotation: eth_getStorageAt(address, position, blockTag) -> 32-byte word."""

from ..types import (MethodSchema, OutputSchema, Param, ParamKind,
                     QuantityRole, ValueKind)
from ._common import HEXDATA

SCHEMA = MethodSchema(
    name="eth_getStorageAt",
    params=(
        Param("address", ParamKind(ValueKind.Address)),
        Param("position", ParamKind(ValueKind.Quantity, QuantityRole.Generic)),
        Param("blockTag", ParamKind(ValueKind.BlockTag)),
    ),
    output=OutputSchema(HEXDATA),
)
