"""Annotation: eth_getBlockByNumber(blockTag, fullTransactions) -> block or null.

The transactions array holds hashes or full objects depending on the
boolean flag, so its items are compared as raw JSON.
"""

from ..types import (Array, MethodSchema, Nullable, Object, OutputSchema,
                     Param, ParamKind, ValueKind)
from ._common import HEXDATA, QUANTITY, RAW

SCHEMA = MethodSchema(
    name="eth_getBlockByNumber",
    params=(
        Param("blockTag", ParamKind(ValueKind.BlockTag)),
        Param("fullTransactions", ParamKind(ValueKind.Boolean)),
    ),
    output=OutputSchema(Nullable(Object((
        ("number", QUANTITY),
        ("hash", HEXDATA),
        ("parentHash", HEXDATA),
        ("timestamp", QUANTITY),
        ("gasLimit", QUANTITY),
        ("gasUsed", QUANTITY),
        ("baseFeePerGas", QUANTITY),
        ("transactions", Array(RAW)),
    )))),
)
