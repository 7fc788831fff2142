"""RPC layer: interval slicing, call generation, wire encoding, parsing."""

import json
import random

import pytest

from chaindiff.dispatch import context_view, dispatch
from chaindiff.rpc import (PARSE_ERROR, REGISTRY, SCHEMA_ERROR,
                           SUPPORTED_METHODS, ContextView, GenerationConfig,
                           QuantityRole, RpcCall, UnsupportedMethod,
                           assemble_request, generate_call, parse_request,
                           parse_response, quantity_hex, sample_quantity,
                           serialize_response, slice_quantity_intervals)

from conftest import ALICE, BOB, call_tx, make_network


def ctx(base_fee=1_000_000_000, gas_limit=30_000_000, head=5,
        balance=10 ** 20, addresses=(ALICE, BOB)) -> ContextView:
    return ContextView(head_number=head, head_hash=b"\x00" * 32,
                       base_fee=base_fee, block_gas_limit=gas_limit,
                       known_addresses=tuple(addresses),
                       sender_balance=balance)


class TestIntervalSlicing:
    def test_fee_intervals_anchor_on_base_fee(self):
        ivs = slice_quantity_intervals(QuantityRole.Fee, ctx())
        assert [(iv.lo, iv.hi) for iv in ivs] == [
            (0, 10 ** 9), (10 ** 9, 10 ** 10), (10 ** 10, None)]

    def test_gas_intervals_anchor_on_block_limit(self):
        ivs = slice_quantity_intervals(QuantityRole.Gas,
                                       ctx(gas_limit=100_000))
        assert [(iv.lo, iv.hi) for iv in ivs] == [
            (0, 21000), (21000, 100_000), (100_000, 1_000_000),
            (1_000_000, None)]

    def test_value_intervals_anchor_on_balance(self):
        ivs = slice_quantity_intervals(QuantityRole.Value, ctx(balance=50))
        assert [(iv.lo, iv.hi) for iv in ivs] == [(0, 1), (1, 50), (50, None)]

    def test_index_intervals_split_at_head(self):
        ivs = slice_quantity_intervals(QuantityRole.Index, ctx(head=5))
        assert [(iv.lo, iv.hi) for iv in ivs] == [(0, 6), (6, None)]

    def test_generic_is_single_unbounded_interval(self):
        ivs = slice_quantity_intervals(QuantityRole.Generic, ctx())
        assert [(iv.lo, iv.hi) for iv in ivs] == [(0, None)]

    def test_intervals_partition_for_random_base_fees(self, rng):
        for _ in range(100):
            c = ctx(base_fee=rng.randrange(1, 1 << 40),
                    gas_limit=rng.randrange(21001, 1 << 32),
                    balance=rng.randrange(2, 1 << 64),
                    head=rng.randrange(0, 1 << 20))
            for role in QuantityRole:
                ivs = slice_quantity_intervals(role, c)
                nonempty = [iv for iv in ivs if not iv.empty]
                # disjoint, ordered, covering [0, 2^256)
                assert nonempty[0].lo == 0
                assert nonempty[-1].hi is None
                for a, b in zip(nonempty, nonempty[1:]):
                    assert a.bounded_hi == b.lo

    def test_sampled_values_fall_in_some_interval(self, rng):
        c = ctx()
        for role in QuantityRole:
            ivs = slice_quantity_intervals(role, c)
            for _ in range(200):
                v = sample_quantity(role, c, rng)
                assert any(v in iv for iv in ivs)

    def test_gas_sampling_straddles_block_limit(self, rng):
        c = ctx(gas_limit=100_000)
        samples = [sample_quantity(QuantityRole.Gas, c, rng)
                   for _ in range(400)]
        assert any(v > c.block_gas_limit for v in samples)
        assert any(21000 <= v < c.block_gas_limit for v in samples)


class TestGeneration:
    def test_every_method_generates_valid_arity(self, rng):
        for name in SUPPORTED_METHODS:
            schema = REGISTRY[name]
            required = sum(1 for p in schema.params if not p.optional)
            for _ in range(20):
                call = generate_call(schema, ctx(), rng)
                assert required <= len(call.params) <= len(schema.params)
                assert call.method == name

    def test_deterministic_for_fixed_seed(self):
        calls_a = [generate_call(REGISTRY[m], ctx(), random.Random(4))
                   for m in SUPPORTED_METHODS]
        calls_b = [generate_call(REGISTRY[m], ctx(), random.Random(4))
                   for m in SUPPORTED_METHODS]
        assert calls_a == calls_b

    def test_known_address_bias(self, rng):
        cfg = GenerationConfig(known_address=1.0)
        for _ in range(50):
            call = generate_call(REGISTRY["eth_getBalance"], ctx(), rng,
                                 cfg=cfg)
            assert call.params[0] in (ALICE, BOB)

    def test_tx_object_gas_exceeds_block_limit_sometimes(self, rng):
        c = ctx(gas_limit=100_000)
        over = 0
        for _ in range(500):
            call = generate_call(REGISTRY["eth_call"], c, rng)
            if call.params[0]["gas"] > c.block_gas_limit:
                over += 1
        assert over >= 1

    def test_recorded_tx_fields_reused(self, rng):
        net = make_network()
        net.submit_transaction(call_tx(net, ALICE, BOB, value=3))
        view = context_view(net)
        cfg = GenerationConfig(numeric_reroll=0.0, recorded_hash=1.0)
        call = generate_call(REGISTRY["eth_call"], view, rng, cfg=cfg)
        assert call.params[0]["to"] == BOB and call.params[0]["value"] == 3
        trace_call = generate_call(REGISTRY["debug_traceTransaction"], view,
                                   rng, cfg=cfg)
        assert trace_call.params[0] == view.recorded_txs[0].hash

    def test_unknown_method_rejected(self, rng):
        schema = REGISTRY["eth_call"]
        bogus = type(schema)("eth_bogus", schema.params, schema.output)
        with pytest.raises(UnsupportedMethod):
            generate_call(bogus, ctx(), rng)


class TestWire:
    def test_assemble_exact_bytes(self):
        call = RpcCall(7, "eth_getBalance", (ALICE, "latest"))
        assert assemble_request(call) == (
            b'{"jsonrpc":"2.0","id":7,"method":"eth_getBalance",'
            b'"params":["' + ALICE.encode() + b'","latest"]}')

    def test_quantity_hex_minimal(self):
        assert quantity_hex(0) == "0x0"
        assert quantity_hex(255) == "0xff"

    def test_block_tag_numeric_encoding(self):
        call = RpcCall(1, "eth_getBalance", (ALICE, 0))
        assert b'"0x0"' in assemble_request(call)

    def test_assemble_parse_round_trip(self, rng):
        net = make_network()
        net.submit_transaction(call_tx(net, ALICE, BOB, value=1))
        view = context_view(net)
        for _ in range(1000):
            method = rng.choice(SUPPORTED_METHODS)
            call = generate_call(REGISTRY[method], view, rng)
            wire = assemble_request(call)
            assert assemble_request(parse_request(wire)) == wire

    def test_parse_response_scalar(self):
        schema = REGISTRY["eth_getBalance"].output
        resp = parse_response(schema, b'{"jsonrpc":"2.0","id":1,'
                                      b'"result":"0x5"}')
        assert resp.has_result and resp.result == "0x5"

    def test_parse_response_error_passthrough(self):
        schema = REGISTRY["eth_getBalance"].output
        resp = parse_response(
            schema, b'{"jsonrpc":"2.0","id":1,'
                    b'"error":{"code":-32000,"message":"boom"}}')
        assert not resp.has_result
        assert resp.error.code == -32000 and resp.error.message == "boom"

    def test_parse_response_schema_violation(self):
        schema = REGISTRY["eth_getBalance"].output
        resp = parse_response(schema, b'{"jsonrpc":"2.0","id":1,"result":17}')
        assert resp.error.code == SCHEMA_ERROR

    def test_parse_response_malformed_json(self):
        schema = REGISTRY["eth_getBalance"].output
        assert parse_response(schema, b"{nope").error.code == PARSE_ERROR
        both = b'{"jsonrpc":"2.0","id":1,"result":"0x1","error":{}}'
        assert parse_response(schema, both).error.code == PARSE_ERROR

    def test_unknown_object_fields_collected_as_extras(self):
        schema = REGISTRY["eth_feeHistory"].output
        payload = {"jsonrpc": "2.0", "id": 1, "result": {
            "oldestBlock": "0x0", "baseFeePerGas": ["0x1"],
            "gasUsedRatio": [0.5], "reward": [["0x0"]]}}
        resp = parse_response(schema, json.dumps(payload).encode())
        assert resp.has_result
        assert resp.extras == {"/reward": [["0x0"]]}
        assert resp.result["reward"] == [["0x0"]]  # stays in the tree

    def test_serialize_response_round_trips_through_parse(self):
        schema = REGISTRY["eth_getBalance"].output
        from chaindiff.rpc import RpcResponse
        wire = serialize_response(1, RpcResponse.ok("0xabc"))
        assert parse_response(schema, wire).result == "0xabc"


class TestEndToEnd:
    def test_generated_calls_dispatch_without_crash(self, rng):
        net = make_network({"v": ("F1", "F2", "F3", "F4", "F5", "F6")})
        net.submit_transaction(call_tx(net, ALICE, BOB, value=1))
        view = context_view(net)
        for _ in range(300):
            method = rng.choice(SUPPORTED_METHODS)
            call = generate_call(REGISTRY[method], view, rng)
            call = parse_request(assemble_request(call))
            for client in net.clients:
                resp = dispatch(client, net, call)
                assert resp.has_result != (resp.error is not None)
