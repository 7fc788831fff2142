"""Cross-client comparison: normalization, divergence detection, dedup store.

Responses are normalized by an ordered, idempotent rule list before a
field-by-field comparison against a pivot client (lexicographically first
id). A divergence's signature hashes the method, differing paths, and
per-path value classes -- not raw values -- so the same bug re-triggered
with different random parameters dedupes to one report.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .rpc import RpcCall, RpcResponse
from .rpc.methods import REGISTRY
from .rpc.types import Array, Node, Nullable, Object, Scalar, ScalarKind


class TooFewClients(Exception):
    pass


class StoreIo(Exception):
    pass


class RuleType(Enum):
    EmptyCodeNullEqualsHex0x = "EmptyCodeNullEqualsHex0x"
    IgnoreField = "IgnoreField"
    QuantityCanonicalize = "QuantityCanonicalize"
    CaseFoldHex = "CaseFoldHex"


@dataclass(frozen=True)
class Rule:
    type: RuleType
    path: str | None = None    # field name or full path for IgnoreField
    method: str | None = None  # restrict rule to one method


@dataclass(frozen=True)
class NormalizationRules:
    rules: tuple[Rule, ...] = ()

    @classmethod
    def from_file(cls, path: str | Path) -> "NormalizationRules":
        raw = json.loads(Path(path).read_text())
        return cls(tuple(Rule(type=RuleType(r["type"]), path=r.get("path"),
                              method=r.get("method")) for r in raw))

    def to_json(self) -> list:
        out = []
        for r in self.rules:
            obj = {"type": r.type.value}
            if r.path is not None:
                obj["path"] = r.path
            if r.method is not None:
                obj["method"] = r.method
            out.append(obj)
        return out


def default_rules() -> NormalizationRules:
    return NormalizationRules((
        Rule(RuleType.EmptyCodeNullEqualsHex0x, method="eth_getCode"),
        Rule(RuleType.IgnoreField, path="totalDifficulty"),
        Rule(RuleType.QuantityCanonicalize),
        Rule(RuleType.CaseFoldHex),
    ))


def _is_hex(v) -> bool:
    return (isinstance(v, str) and v.startswith("0x")
            and all(c in "0123456789abcdefABCDEF" for c in v[2:]))


def _canon_quantity(v: str) -> str:
    digits = v[2:].lower().lstrip("0")
    return "0x" + (digits or "0")


def _ignore_matches(rule_path: str, path: str, name: str) -> bool:
    return rule_path == name or rule_path == path


def _walk_fold(value):
    """CaseFoldHex over a whole tree, in place for containers."""
    if isinstance(value, dict):
        return {k: _walk_fold(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_walk_fold(v) for v in value]
    if _is_hex(value):
        return "0x" + value[2:].lower()
    return value


def _schema_node_for(node: Node | None, key) -> Node | None:
    if isinstance(node, Nullable):
        node = node.inner
    if isinstance(node, Object) and isinstance(key, str):
        return dict(node.fields).get(key)
    if isinstance(node, Array):
        return node.item
    return None


def _apply_quantity_canon(value, node: Node | None):
    """Canonicalize only schema-typed Quantity leaves; untyped/extra fields
    are left to CaseFoldHex so data payloads keep their digits."""
    if isinstance(node, Nullable):
        if value is None:
            return None
        return _apply_quantity_canon(value, node.inner)
    if isinstance(node, Scalar):
        if node.kind is ScalarKind.Quantity and _is_hex(value):
            return _canon_quantity(value)
        return value
    if isinstance(value, dict):
        return {k: _apply_quantity_canon(v, _schema_node_for(node, k))
                for k, v in value.items()}
    if isinstance(value, list):
        return [_apply_quantity_canon(v, _schema_node_for(node, 0))
                for v in value]
    return value


def _apply_ignore(value, rule_path: str, path: str = ""):
    if isinstance(value, dict):
        return {k: _apply_ignore(v, rule_path, f"{path}/{k}")
                for k, v in value.items()
                if not _ignore_matches(rule_path, f"{path}/{k}", k)}
    if isinstance(value, list):
        return [_apply_ignore(v, rule_path, f"{path}/{i}")
                for i, v in enumerate(value)]
    return value


def normalize(value, rules: NormalizationRules, method: str):
    """Normalized copy of a result value tree; idempotent."""
    schema = REGISTRY.get(method)
    shape = schema.output.shape if schema else None
    out = copy.deepcopy(value)
    for rule in rules.rules:
        if rule.method is not None and rule.method != method:
            continue
        if rule.type is RuleType.EmptyCodeNullEqualsHex0x:
            if method == "eth_getCode" and out is None:
                out = "0x"
        elif rule.type is RuleType.IgnoreField and rule.path:
            out = _apply_ignore(out, rule.path)
        elif rule.type is RuleType.QuantityCanonicalize:
            out = _apply_quantity_canon(out, shape)
        elif rule.type is RuleType.CaseFoldHex:
            out = _walk_fold(out)
    return out


# --- comparison -----------------------------------------------------------------

_ABSENT = object()


def value_class(v) -> str:
    if v is _ABSENT:
        return "absent"
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, (int, float)):
        return "number:" + ("zero" if v == 0 else "nonzero")
    if _is_hex(v):
        zero = int(v[2:] or "0", 16) == 0 if v[2:] else True
        return "hex:" + ("zero" if zero else "nonzero")
    if isinstance(v, str):
        return "string"
    if isinstance(v, dict):
        return "object"
    if isinstance(v, list):
        return "array"
    return "other"


def _diff(a, b, path: str, out: dict):
    """Collect differing paths with (left class, right class) tags."""
    if isinstance(a, dict) and isinstance(b, dict):
        for key in sorted(set(a) | set(b)):
            _diff(a.get(key, _ABSENT), b.get(key, _ABSENT),
                  f"{path}/{key}", out)
        return
    if isinstance(a, list) and isinstance(b, list):
        for i in range(max(len(a), len(b))):
            av = a[i] if i < len(a) else _ABSENT
            bv = b[i] if i < len(b) else _ABSENT
            _diff(av, bv, f"{path}/{i}", out)
        return
    if a != b or type(a) is not type(b):
        out.setdefault(path, set()).add((value_class(a), value_class(b)))


@dataclass
class Divergence:
    call: RpcCall
    responses: dict  # clientId -> RpcResponse
    diff_paths: list[str]
    path_classes: dict  # path -> sorted list of (leftClass, rightClass)


def compare(call: RpcCall, responses: dict,
            rules: NormalizationRules) -> Divergence | None:
    """None when all clients agree after normalization."""
    if len(responses) < 2:
        raise TooFewClients(sorted(responses))
    pivot_id = min(responses)
    norm = {}
    for cid, resp in responses.items():
        if resp.has_result:
            norm[cid] = ("result", normalize(resp.result, rules, call.method))
        else:
            norm[cid] = ("error", {"code": resp.error.code,
                                   "message": resp.error.message})
    pivot_kind, pivot_val = norm[pivot_id]
    paths: dict = {}
    for cid in sorted(responses):
        if cid == pivot_id:
            continue
        kind, val = norm[cid]
        if kind != pivot_kind:
            # result-vs-error is never benign
            paths.setdefault("/", set()).add(("kind", "kind"))
            continue
        _diff(pivot_val, val, "/result" if kind == "result" else "/error", paths)
    if not paths:
        return None
    return Divergence(
        call=call,
        responses=dict(responses),
        diff_paths=sorted(paths),
        path_classes={p: sorted(tags) for p, tags in paths.items()},
    )


def signature(divergence: Divergence) -> bytes:
    h = hashlib.sha256()
    h.update(divergence.call.method.encode())
    for path in divergence.diff_paths:
        h.update(b"\x00" + path.encode())
        for left, right in divergence.path_classes[path]:
            h.update(f"|{left}|{right}".encode())
    return h.digest()


@dataclass
class DivergenceReport:
    divergence: Divergence
    signature: bytes
    context_block: int
    context_hash: bytes
    first_seen: int

    @classmethod
    def build(cls, divergence: Divergence, context_block: int,
              context_hash: bytes, first_seen: int) -> "DivergenceReport":
        return cls(divergence, signature(divergence), context_block,
                   context_hash, first_seen)


class RecordVerdict(Enum):
    New = "New"
    Duplicate = "Duplicate"


class ReportStore:
    """Append-only JSONL store deduplicating by signature."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._seen: set[bytes] = set()
        self.records: list[dict] = []
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    obj = json.loads(line)
                    self._seen.add(bytes.fromhex(obj["signature"]))
                    self.records.append(obj)

    def record(self, report: DivergenceReport,
               serialize_call, serialize_response) -> RecordVerdict:
        """serialize_call/serialize_response produce the raw JSON values
        embedded in the record (canonical request, raw responses)."""
        if report.signature in self._seen:
            return RecordVerdict.Duplicate
        record = {
            "signature": report.signature.hex(),
            "method": report.divergence.call.method,
            "diffPaths": report.divergence.diff_paths,
            "context": {"block": report.context_block,
                        "hash": "0x" + report.context_hash.hex()},
            "call": serialize_call(report.divergence.call),
            "responses": {cid: serialize_response(report.divergence.call.id, r)
                          for cid, r in sorted(report.divergence.responses.items())},
            "firstSeen": report.first_seen,
        }
        try:
            with open(self.path, "a") as fh:
                fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        except OSError as exc:
            raise StoreIo(str(exc)) from exc
        self._seen.add(report.signature)
        self.records.append(record)
        return RecordVerdict.New

    def __len__(self):
        return len(self.records)
