"""Annotation: eth_estimateGas(transaction, blockTag?) -> gas quantity."""

from ..types import MethodSchema, OutputSchema, Param, ParamKind, ValueKind
from ._common import QUANTITY

SCHEMA = MethodSchema(
    name="eth_estimateGas",
    params=(
        Param("transaction", ParamKind(ValueKind.TransactionObject)),
        Param("blockTag", ParamKind(ValueKind.BlockTag), optional=True),
    ),
    output=OutputSchema(QUANTITY),
)
