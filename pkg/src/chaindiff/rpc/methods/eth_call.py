"""Annotation: eth_call(transaction, blockTag, stateOverride?) -> return data."""

from ..types import MethodSchema, OutputSchema, Param, ParamKind, ValueKind
from ._common import HEXDATA

SCHEMA = MethodSchema(
    name="eth_call",
    params=(
        Param("transaction", ParamKind(ValueKind.TransactionObject)),
        Param("blockTag", ParamKind(ValueKind.BlockTag)),
        Param("stateOverride", ParamKind(ValueKind.StateOverride), optional=True),
    ),
    output=OutputSchema(HEXDATA),
)
