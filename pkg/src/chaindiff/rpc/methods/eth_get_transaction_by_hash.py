"""Annotation: eth_getTransactionByHash(transactionHash) -> transaction or null."""

from ..types import (MethodSchema, Nullable, OutputSchema, Param, ParamKind,
                     ValueKind)
from ._common import transaction_object_node

SCHEMA = MethodSchema(
    name="eth_getTransactionByHash",
    params=(
        Param("transactionHash", ParamKind(ValueKind.DataBytes)),
    ),
    output=OutputSchema(Nullable(transaction_object_node())),
)
