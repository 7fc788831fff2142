"""RPC DSL: typed parameter model, call generation, and wire encoding."""

from .generate import (GenerationConfig, Interval, generate_call,
                       sample_quantity, slice_quantity_intervals)
from .methods import REGISTRY, SUPPORTED_METHODS
from .types import (ContextView, MalformedJson, MethodSchema, OutputSchema,
                    Param, ParamKind, QuantityRole, RpcCall, RpcError,
                    RpcResponse, SchemaViolation, UnsupportedMethod,
                    ValueKind)
from .wire import (METHOD_NOT_FOUND, PARSE_ERROR, SCHEMA_ERROR,
                   assemble_request, data_hex, parse_request, parse_response,
                   quantity_hex, serialize_response)
