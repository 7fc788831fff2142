"""Canonical JSON-RPC 2.0 byte encoding and schema-checked response parsing.

One byte encoding per call value: fixed key order, minimal lowercase 0x hex
for quantities, compact separators. Identical calls always assemble to
identical bytes, which is what report deduplication and replay compare
against.
"""

from __future__ import annotations

import json

from .methods import REGISTRY
from .types import (Array, MethodSchema, Node, Nullable, Object, OutputSchema,
                    ParamKind, RpcCall, RpcResponse, Scalar, ScalarKind,
                    UnsupportedMethod, ValueKind)

PARSE_ERROR = -32700
SCHEMA_ERROR = -32098
METHOD_NOT_FOUND = -32601

_BLOCK_TAG_NAMES = ("latest", "earliest", "pending")
_TX_KEYS = ("from", "to", "gas", "value", "data", "maxFeePerGas")
_OVERRIDE_KEYS = ("balance", "code")


def quantity_hex(value: int) -> str:
    return hex(value)  # lowercase, minimal digits, "0x0" for zero


def data_hex(data: bytes) -> str:
    return "0x" + data.hex()


def _encode_value(value, kind: ParamKind):
    k = kind.kind
    if k is ValueKind.Quantity:
        return quantity_hex(value)
    if k is ValueKind.Address:
        return value.lower()
    if k is ValueKind.DataBytes:
        return data_hex(value)
    if k is ValueKind.Boolean:
        return value
    if k is ValueKind.BlockTag:
        return quantity_hex(value) if isinstance(value, int) else value
    if k is ValueKind.TransactionObject:
        out = {}
        for key in _TX_KEYS:
            if key not in value:
                continue
            v = value[key]
            if key in ("from", "to"):
                out[key] = v.lower()
            elif key == "data":
                out[key] = data_hex(v)
            else:
                out[key] = quantity_hex(v)
        return out
    if k is ValueKind.StateOverride:
        out = {}
        for addr in sorted(value):
            entry = {}
            for key in _OVERRIDE_KEYS:
                if key in value[addr]:
                    v = value[addr][key]
                    entry[key] = quantity_hex(v) if key == "balance" else data_hex(v)
            out[addr.lower()] = entry
        return out
    if k is ValueKind.FloatArray:
        return list(value)
    raise UnsupportedMethod(f"no encoding for {k}")


def _decode_value(wire, kind: ParamKind):
    k = kind.kind
    if k is ValueKind.Quantity:
        return int(wire, 16)
    if k is ValueKind.Address:
        return wire
    if k is ValueKind.DataBytes:
        return bytes.fromhex(wire[2:])
    if k is ValueKind.Boolean:
        return wire
    if k is ValueKind.BlockTag:
        return wire if wire in _BLOCK_TAG_NAMES else int(wire, 16)
    if k is ValueKind.TransactionObject:
        out = {}
        for key in _TX_KEYS:
            if key not in wire:
                continue
            if key in ("from", "to"):
                out[key] = wire[key]
            elif key == "data":
                out[key] = bytes.fromhex(wire[key][2:])
            else:
                out[key] = int(wire[key], 16)
        return out
    if k is ValueKind.StateOverride:
        out = {}
        for addr, entry in wire.items():
            decoded = {}
            if "balance" in entry:
                decoded["balance"] = int(entry["balance"], 16)
            if "code" in entry:
                decoded["code"] = bytes.fromhex(entry["code"][2:])
            out[addr] = decoded
        return out
    if k is ValueKind.FloatArray:
        return list(wire)
    raise UnsupportedMethod(f"no decoding for {k}")


def assemble_request(call: RpcCall) -> bytes:
    schema = REGISTRY.get(call.method)
    if schema is None:
        raise UnsupportedMethod(call.method)
    wire_params = [_encode_value(v, schema.params[i].kind)
                   for i, v in enumerate(call.params)]
    obj = {"jsonrpc": "2.0", "id": call.id, "method": call.method,
           "params": wire_params}
    return json.dumps(obj, separators=(",", ":")).encode()


def parse_request(data: bytes) -> RpcCall:
    obj = json.loads(data)
    schema = REGISTRY.get(obj.get("method"))
    if schema is None:
        raise UnsupportedMethod(obj.get("method"))
    params = tuple(_decode_value(v, schema.params[i].kind)
                   for i, v in enumerate(obj["params"]))
    return RpcCall(id=obj["id"], method=obj["method"], params=params)


def serialize_response(call_id: int, response: RpcResponse) -> bytes:
    if response.has_result:
        obj = {"jsonrpc": "2.0", "id": call_id, "result": response.result}
    else:
        obj = {"jsonrpc": "2.0", "id": call_id,
               "error": {"code": response.error.code,
                         "message": response.error.message}}
    return json.dumps(obj, separators=(",", ":")).encode()


# --- response validation ----------------------------------------------------------

def _is_hex_string(v, min_digits: int = 0) -> bool:
    if not isinstance(v, str) or not v.startswith("0x"):
        return False
    digits = v[2:]
    if len(digits) < min_digits:
        return False
    return all(c in "0123456789abcdefABCDEF" for c in digits)


def _check(node: Node, value, path: str, extras: dict) -> str | None:
    """Returns the offending path on violation, None when valid."""
    if isinstance(node, Nullable):
        if value is None:
            return None
        return _check(node.inner, value, path, extras)
    if isinstance(node, Scalar):
        k = node.kind
        if k is ScalarKind.Raw:
            return None
        if k is ScalarKind.Quantity or k is ScalarKind.HexData:
            return None if _is_hex_string(value) else path
        if k is ScalarKind.AddressVal:
            return None if _is_hex_string(value) and len(value) == 42 else path
        if k is ScalarKind.Bool:
            return None if isinstance(value, bool) else path
        if k is ScalarKind.Str:
            return None if isinstance(value, str) else path
        if k is ScalarKind.Number:
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
            return None if ok else path
        return path
    if isinstance(node, Object):
        if not isinstance(value, dict):
            return path
        known = dict(node.fields)
        for name, sub in node.fields:
            if name not in value:
                return f"{path}/{name}"
            bad = _check(sub, value[name], f"{path}/{name}", extras)
            if bad:
                return bad
        for name in value:
            if name not in known:
                # unknown fields stay in the tree for comparison and are
                # indexed here for reporting
                extras[f"{path}/{name}"] = value[name]
        return None
    if isinstance(node, Array):
        if not isinstance(value, list):
            return path
        for i, item in enumerate(value):
            bad = _check(node.item, item, f"{path}/{i}", extras)
            if bad:
                return bad
        return None
    return path


def parse_response(schema: OutputSchema, data: bytes) -> RpcResponse:
    """Schema-checked parse; failures become synthetic error responses so the
    comparison layer can treat a malformed reply as a divergence signal."""
    try:
        obj = json.loads(data)
    except (ValueError, UnicodeDecodeError):
        return RpcResponse.fail(PARSE_ERROR, "malformed json")
    if not isinstance(obj, dict) or ("result" in obj) == ("error" in obj):
        return RpcResponse.fail(PARSE_ERROR, "not a json-rpc response")
    if "error" in obj:
        err = obj["error"]
        if not isinstance(err, dict) or "code" not in err:
            return RpcResponse.fail(PARSE_ERROR, "malformed error object")
        return RpcResponse.fail(int(err["code"]), str(err.get("message", "")))
    extras: dict = {}
    bad = _check(schema.shape, obj["result"], "", extras)
    if bad is not None:
        return RpcResponse.fail(SCHEMA_ERROR, f"schema violation at {bad or '/'}")
    resp = RpcResponse.ok(obj["result"])
    resp.extras = extras
    return resp
