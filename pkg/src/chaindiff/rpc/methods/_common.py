"""Schema fragments shared by several method annotations."""

from ..types import (Array, Node, Nullable, Object, OutputSchema, Scalar,
                     ScalarKind)

QUANTITY = Scalar(ScalarKind.Quantity)
HEXDATA = Scalar(ScalarKind.HexData)
ADDRESS = Scalar(ScalarKind.AddressVal)
BOOLEAN = Scalar(ScalarKind.Bool)
STRING = Scalar(ScalarKind.Str)
NUMBER = Scalar(ScalarKind.Number)
RAW = Scalar(ScalarKind.Raw)


def transaction_object_node() -> Node:
    return Object((
        ("hash", HEXDATA),
        ("blockNumber", QUANTITY),
        ("transactionIndex", QUANTITY),
        ("from", ADDRESS),
        ("to", Nullable(ADDRESS)),
        ("value", QUANTITY),
        ("gas", QUANTITY),
        ("maxFeePerGas", QUANTITY),
        ("input", HEXDATA),
        ("nonce", QUANTITY),
    ))
