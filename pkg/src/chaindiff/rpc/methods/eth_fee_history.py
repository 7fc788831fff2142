"""Annotation: eth_feeHistory(blockCount, newestBlock, rewardPercentiles)."""

from ..types import (Array, MethodSchema, Object, OutputSchema, Param,
                     ParamKind, QuantityRole, ValueKind)
from ._common import NUMBER, QUANTITY

SCHEMA = MethodSchema(
    name="eth_feeHistory",
    params=(
        Param("blockCount", ParamKind(ValueKind.Quantity, QuantityRole.Generic)),
        Param("newestBlock", ParamKind(ValueKind.BlockTag)),
        Param("rewardPercentiles", ParamKind(ValueKind.FloatArray)),
    ),
    output=OutputSchema(Object((
        ("oldestBlock", QUANTITY),
        ("baseFeePerGas", Array(QUANTITY)),
        ("gasUsedRatio", Array(NUMBER)),
    ))),
)
