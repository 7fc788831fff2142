"""Typed model of RPC parameters, method schemas, and output shapes.

A method is described by an ordered parameter list (each parameter one
ParamKind) plus an OutputSchema tree whose leaves carry a comparison kind.
Schemas are declared as data, one registry file per method, so adding a
method is an annotation exercise rather than a code change.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class ValueKind(Enum):
    Quantity = "quantity"
    Address = "address"
    DataBytes = "data"
    Boolean = "boolean"
    BlockTag = "blockTag"
    TransactionObject = "transactionObject"
    StateOverride = "stateOverride"
    FloatArray = "floatArray"


class QuantityRole(Enum):
    Gas = "gas"
    Fee = "fee"
    Value = "value"
    Index = "index"
    Generic = "generic"


@dataclass(frozen=True)
class ParamKind:
    kind: ValueKind
    role: QuantityRole | None = None

    def __post_init__(self):
        if (self.kind is ValueKind.Quantity) != (self.role is not None):
            raise ValueError("role set exactly when kind is Quantity")


@dataclass(frozen=True)
class Param:
    name: str
    kind: ParamKind
    optional: bool = False


# --- output schema nodes --------------------------------------------------------

class ScalarKind(Enum):
    Quantity = "quantity"    # 0x-hex minimal digits
    HexData = "hexdata"      # 0x-hex, fixed or variable width
    AddressVal = "address"
    Bool = "boolean"
    Str = "string"
    Number = "number"        # plain JSON number
    Raw = "raw"              # compared as raw JSON value


@dataclass(frozen=True)
class Scalar:
    kind: ScalarKind


@dataclass(frozen=True)
class Object:
    fields: tuple[tuple[str, "Node"], ...]


@dataclass(frozen=True)
class Array:
    item: "Node"


@dataclass(frozen=True)
class Nullable:
    inner: "Node"


Node = Scalar | Object | Array | Nullable


@dataclass(frozen=True)
class OutputSchema:
    shape: Node


@dataclass(frozen=True)
class MethodSchema:
    name: str
    params: tuple[Param, ...]
    output: OutputSchema


@dataclass(frozen=True)
class ContextView:
    """Immutable snapshot of the network taken between generation batches.

    recorded_txs keeps full transactions (not just hashes) because
    transaction-object generation mutates their numeric fields;
    sender_balance anchors the Value-role interval slicing.
    """
    head_number: int
    head_hash: bytes
    base_fee: int
    block_gas_limit: int
    known_addresses: tuple[str, ...]
    recorded_txs: tuple = ()
    sender_balance: int = 0


@dataclass(frozen=True)
class RpcCall:
    id: int
    method: str
    params: tuple


@dataclass(frozen=True)
class RpcError:
    code: int
    message: str


@dataclass
class RpcResponse:
    """Exactly one of result/error; extras holds unknown object fields."""
    result: object = None
    error: RpcError | None = None
    has_result: bool = False
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.has_result == (self.error is not None):
            raise ValueError("exactly one of result/error required")

    @classmethod
    def ok(cls, result) -> "RpcResponse":
        return cls(result=result, has_result=True)

    @classmethod
    def fail(cls, code: int, message: str) -> "RpcResponse":
        return cls(error=RpcError(code, message))


class UnsupportedMethod(Exception):
    pass


class MalformedJson(Exception):
    pass


class SchemaViolation(Exception):
    pass
