"""Response normalization, divergence comparison, report deduplication."""

import json
from pathlib import Path

import pytest

from chaindiff.oracle import (DivergenceReport, NormalizationRules,
                              RecordVerdict, ReportStore, Rule, RuleType,
                              TooFewClients, compare, default_rules,
                              normalize, signature)
from chaindiff.rpc import RpcCall, RpcResponse, serialize_response
from chaindiff.rpc.wire import assemble_request

RULES = default_rules()


def call(method="eth_getBalance", params=("0x" + "11" * 20, "latest")):
    return RpcCall(1, method, tuple(params))


def cmp2(a: RpcResponse, b: RpcResponse, c=None, rules=RULES):
    return compare(c or call(), {"clientA": a, "clientB": b}, rules)


class TestNormalize:
    def test_null_code_equals_empty_hex(self):
        assert normalize(None, RULES, "eth_getCode") == "0x"
        assert normalize("0x", RULES, "eth_getCode") == "0x"

    def test_null_rule_only_applies_to_get_code(self):
        assert normalize(None, RULES, "eth_getBalance") is None

    def test_total_difficulty_removed(self):
        block = {"number": "0x1", "totalDifficulty": "0x400"}
        out = normalize(block, RULES, "eth_getBlockByNumber")
        assert out == {"number": "0x1"}

    def test_quantity_leading_zeros_stripped(self):
        assert normalize("0x05", RULES, "eth_getBalance") == "0x5"
        assert normalize("0x0", RULES, "eth_getBalance") == "0x0"

    def test_data_payload_digits_preserved(self):
        # getCode output is HexData, not Quantity: leading zeros are content
        assert normalize("0x0060", RULES, "eth_getCode") == "0x0060"

    def test_hex_case_folded(self):
        assert normalize("0xAB", RULES, "eth_getCode") == "0xab"

    def test_idempotent(self):
        trees = ["0x0AB", None, {"number": "0x01", "totalDifficulty": "0x1"},
                 ["0x01", "0xFF"], 3.5]
        for method in ("eth_getCode", "eth_getBalance",
                       "eth_getBlockByNumber"):
            for tree in trees:
                once = normalize(tree, RULES, method)
                assert normalize(once, RULES, method) == once

    def test_input_not_mutated(self):
        tree = {"number": "0x01", "totalDifficulty": "0x1"}
        normalize(tree, RULES, "eth_getBlockByNumber")
        assert "totalDifficulty" in tree

    def test_rules_file_round_trip(self, tmp_path):
        path = tmp_path / "rules.json"
        path.write_text(json.dumps(RULES.to_json()))
        assert NormalizationRules.from_file(path) == RULES

    def test_shipped_default_rules_file_matches_code(self):
        shipped = Path(__file__).resolve().parents[1] / "rules" / "default.json"
        assert NormalizationRules.from_file(shipped) == default_rules()


class TestCompare:
    def test_identical_responses_agree(self):
        assert cmp2(RpcResponse.ok("0x5"), RpcResponse.ok("0x5")) is None

    def test_normalized_equivalents_agree(self):
        c = call("eth_getCode")
        assert cmp2(RpcResponse.ok(None), RpcResponse.ok("0x"), c) is None
        assert cmp2(RpcResponse.ok("0x05"), RpcResponse.ok("0x5")) is None

    def test_differing_scalar_result(self):
        c = RpcCall(1, "eth_estimateGas", ({"to": "0x" + "11" * 20},))
        d = cmp2(RpcResponse.ok("0x5208"), RpcResponse.ok("0x5209"), c)
        assert d.diff_paths == ["/result"]
        assert d.path_classes["/result"] == [("hex:nonzero", "hex:nonzero")]

    def test_result_vs_error_never_benign(self):
        d = cmp2(RpcResponse.ok("0x5"), RpcResponse.fail(-32000, "boom"))
        assert d.diff_paths == ["/"]

    def test_error_vs_error_compared_fieldwise(self):
        same = cmp2(RpcResponse.fail(-32000, "x"), RpcResponse.fail(-32000, "x"))
        assert same is None
        d = cmp2(RpcResponse.fail(-32000, "x"), RpcResponse.fail(-32601, "x"))
        assert d.diff_paths == ["/error/code"]

    def test_nested_diff_path(self):
        a = RpcResponse.ok({"number": "0x1", "gasUsed": "0x0"})
        b = RpcResponse.ok({"number": "0x1", "gasUsed": "0x5"})
        d = cmp2(a, b, call("eth_getBlockByNumber", (0, False)))
        assert d.diff_paths == ["/result/gasUsed"]

    def test_too_few_clients(self):
        with pytest.raises(TooFewClients):
            compare(call(), {"only": RpcResponse.ok("0x1")}, RULES)

    def test_three_clients_pivot_is_lexicographic_minimum(self):
        responses = {"b": RpcResponse.ok("0x1"),
                     "a": RpcResponse.ok("0x2"),
                     "c": RpcResponse.ok("0x2")}
        d = compare(call(), responses, RULES)
        # both b->a... pivot "a": b and c both differ from it
        assert d is not None and d.diff_paths == ["/result"]

    def test_removing_null_rule_exposes_get_code_divergence(self):
        stripped = NormalizationRules(tuple(
            r for r in RULES.rules
            if r.type is not RuleType.EmptyCodeNullEqualsHex0x))
        c = call("eth_getCode")
        assert cmp2(RpcResponse.ok(None), RpcResponse.ok("0x"), c,
                    rules=stripped) is not None


class TestSignature:
    def _report(self, divergence):
        return DivergenceReport.build(divergence, 3, b"\x11" * 32, 0)

    def test_same_classes_same_signature(self):
        # different raw values, same diff paths and value classes
        d1 = cmp2(RpcResponse.ok("0x5208"), RpcResponse.ok("0x5209"))
        d2 = cmp2(RpcResponse.ok("0x6000"), RpcResponse.ok("0x6001"))
        assert signature(d1) == signature(d2)

    def test_method_distinguishes_signatures(self):
        d1 = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"),
                  call("eth_getBalance"))
        d2 = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"),
                  call("eth_getStorageAt", ("0x" + "11" * 20, 0, "latest")))
        assert signature(d1) != signature(d2)

    def test_value_class_distinguishes_signatures(self):
        zero = cmp2(RpcResponse.ok("0x0"), RpcResponse.ok("0x2"))
        nonzero = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"))
        assert signature(zero) != signature(nonzero)


class TestReportStore:
    def _record(self, store, divergence):
        report = DivergenceReport.build(divergence, 1, b"\x22" * 32, 0)
        return store.record(report,
                            lambda c: assemble_request(c).decode(),
                            lambda cid, r: serialize_response(cid, r).decode())

    def test_new_then_duplicate(self, tmp_path):
        store = ReportStore(tmp_path / "reports.jsonl")
        d = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"))
        assert self._record(store, d) is RecordVerdict.New
        assert self._record(store, d) is RecordVerdict.Duplicate
        assert len(store) == 1

    def test_parameter_noise_dedupes(self, tmp_path):
        store = ReportStore(tmp_path / "reports.jsonl")
        d1 = cmp2(RpcResponse.ok("0x5208"), RpcResponse.ok("0x5209"))
        d2 = cmp2(RpcResponse.ok("0x6000"), RpcResponse.ok("0x6001"),
                  call(params=("0x" + "22" * 20, "earliest")))
        assert self._record(store, d1) is RecordVerdict.New
        assert self._record(store, d2) is RecordVerdict.Duplicate

    def test_different_methods_both_recorded(self, tmp_path):
        store = ReportStore(tmp_path / "reports.jsonl")
        d1 = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"))
        d2 = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"),
                  call("eth_getStorageAt", ("0x" + "11" * 20, 0, "latest")))
        assert self._record(store, d1) is RecordVerdict.New
        assert self._record(store, d2) is RecordVerdict.New
        assert len(store) == 2

    def test_store_reload_preserves_dedup(self, tmp_path):
        path = tmp_path / "reports.jsonl"
        d = cmp2(RpcResponse.ok("0x1"), RpcResponse.ok("0x2"))
        self._record(ReportStore(path), d)
        reloaded = ReportStore(path)
        assert len(reloaded) == 1
        assert self._record(reloaded, d) is RecordVerdict.Duplicate
