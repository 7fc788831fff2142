"""Annotation: eth_getTransactionByBlockNumberAndIndex(blockTag, index)."""

from ..types import (MethodSchema, Nullable, OutputSchema, Param, ParamKind,
                     QuantityRole, ValueKind)
from ._common import transaction_object_node

SCHEMA = MethodSchema(
    name="eth_getTransactionByBlockNumberAndIndex",
    params=(
        Param("blockTag", ParamKind(ValueKind.BlockTag)),
        Param("index", ParamKind(ValueKind.Quantity, QuantityRole.Index)),
    ),
    output=OutputSchema(Nullable(transaction_object_node())),
)
