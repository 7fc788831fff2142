"""Corpus selection, seed streams, synthetic generation, persistence."""

import json
import random

import pytest

from chaindiff import evm
from chaindiff.chain import Transaction
from chaindiff.corpus import (CorpusConfig, CorpusEntry, CorpusState,
                              SeedFormatError, SeedStream, StreamExhausted,
                              generate_contract, load_corpus, save_corpus,
                              select_initial_corpus, synthesize_seed_stream,
                              write_seed_file)
from chaindiff.evm import (BlockContext, Halt, OpcodeSeq, WorldState,
                           merge_coverage)

from conftest import ALICE, BOB, FUNDING, make_network

VALID_HALTS = {Halt.Stop, Halt.Return, Halt.Revert}


def seed_item(code: bytes, data: bytes = b"",
              gas: int = 1_000_000) -> tuple[Transaction, OpcodeSeq]:
    tx = Transaction(sender=ALICE, to=BOB, value=0, data=data, gas_limit=gas,
                     max_fee_per_gas=1_000_000_000, nonce=0)
    return tx, OpcodeSeq(code)


def selection_world(code: bytes = b"") -> WorldState:
    return WorldState({
        ALICE: evm.Account(balance=FUNDING),
        BOB: evm.Account(code=OpcodeSeq(code)),
    })


class TestSeedStream:
    def test_pop_order_and_exhaustion(self):
        stream = SeedStream([seed_item(bytes([evm.STOP])),
                             seed_item(bytes([evm.ADD]))])
        assert len(stream) == 2
        assert stream.pop()[1].data == bytes([evm.STOP])
        assert stream.pop()[1].data == bytes([evm.ADD])
        with pytest.raises(StreamExhausted):
            stream.pop()

    def test_file_round_trip(self, tmp_path):
        items = [seed_item(bytes([evm.PUSH1, 7, evm.STOP]), data=b"\x01\x02")]
        path = tmp_path / "seeds.jsonl"
        write_seed_file(path, items)
        loaded = SeedStream.from_file(path)
        tx, code = loaded.pop()
        assert (tx, code) == items[0]

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "seeds.jsonl"
        write_seed_file(path, [seed_item(bytes([evm.STOP]))])
        obj = json.loads(path.read_text())
        obj["bogus"] = 1
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(SeedFormatError, match="unknown"):
            SeedStream.from_file(path)

    def test_missing_key_rejected(self, tmp_path):
        path = tmp_path / "seeds.jsonl"
        write_seed_file(path, [seed_item(bytes([evm.STOP]))])
        obj = json.loads(path.read_text())
        del obj["gasLimit"]
        path.write_text(json.dumps(obj) + "\n")
        with pytest.raises(SeedFormatError, match="missing"):
            SeedStream.from_file(path)


class TestSelection:
    def test_identical_transactions_selected_once(self):
        code = bytes([evm.PUSH1, 1, evm.STOP])
        stream = SeedStream([seed_item(code), seed_item(code)])
        skipped = []
        state = select_initial_corpus(stream, CorpusConfig(),
                                      selection_world(code),
                                      skip_counter=skipped)
        assert len(state.selected) == 1
        assert len(skipped) == 1  # second tx statically redundant

    def test_max_selected_cap(self):
        net = make_network()
        stream = synthesize_seed_stream(7, 40, net)
        state = select_initial_corpus(stream, CorpusConfig(max_selected=3),
                                      net.world.copy(), net._next_context())
        assert len(state.selected) == 3

    def test_accumulated_equals_union_of_selected(self):
        net = make_network()
        stream = synthesize_seed_stream(7, 40, net)
        state = select_initial_corpus(stream, CorpusConfig(),
                                      net.world.copy(),
                                      net._next_context())
        union = set()
        for entry in state.selected:
            union = merge_coverage(union, entry.coverage)
        assert state.accumulated == union
        assert state.selected  # non-degenerate

    def test_each_entry_added_new_units(self):
        net = make_network()
        stream = synthesize_seed_stream(11, 40, net)
        state = select_initial_corpus(stream, CorpusConfig(),
                                      net.world.copy(), net._next_context())
        running = set()
        for entry in state.selected:
            grown = merge_coverage(running, entry.coverage)
            assert len(grown) > len(running)
            running = grown

    def test_coverage_threshold_stops_selection(self):
        net = make_network()
        stream = synthesize_seed_stream(7, 40, net)
        state = select_initial_corpus(stream,
                                      CorpusConfig(coverage_threshold=0),
                                      net.world.copy(), net._next_context())
        assert state.selected == []

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError):
            CorpusConfig(max_selected=0)
        with pytest.raises(ValueError):
            CorpusConfig(coverage_threshold=-1)


class TestSynthesis:
    def test_generated_contracts_mostly_halt_cleanly(self):
        rng = random.Random(1)
        valid = 0
        total = 300
        for _ in range(total):
            code = generate_contract(rng)
            world = selection_world(code.data)
            ctx = evm.ExecContext(caller=ALICE, callee=BOB,
                                  block=BlockContext(), gas_limit=2_000_000)
            if evm.execute(code, ctx, world).halt in VALID_HALTS:
                valid += 1
        assert valid / total >= 0.9

    def test_generator_avoids_position_sensitive_opcodes(self):
        rng = random.Random(2)
        banned = {evm.PC, evm.GAS, evm.MSIZE, evm.CALL, evm.INVALID}
        for _ in range(200):
            assert not (evm.scan_opcodes(generate_contract(rng)) & banned)

    def test_stream_is_deterministic(self):
        items_a = list(synthesize_seed_stream(5, 10, make_network())._items)
        items_b = list(synthesize_seed_stream(5, 10, make_network())._items)
        assert items_a == items_b

    def test_stream_deploys_on_network(self):
        net = make_network()
        stream = synthesize_seed_stream(5, 4, net)
        assert len(stream) == 4
        assert len(net.chain) == 5  # genesis + one deployment per contract
        while len(stream):
            tx, code = stream.pop()
            assert net.world.account(tx.to).code == code

    def test_zero_count(self):
        net = make_network()
        stream = synthesize_seed_stream(5, 0, net)
        assert len(stream) == 0
        assert len(net.chain) == 1


class TestPersistence:
    def test_save_load_round_trip(self, tmp_path):
        tx, code = seed_item(bytes([evm.PUSH1, 1, evm.STOP]), data=b"\xAA")
        entries = [
            CorpusEntry(tx, code, {("edge", evm.PUSH1, evm.STOP),
                                   ("halt", evm.STOP, "Stop")},
                        reformed=OpcodeSeq(bytes([evm.STOP]))),
            CorpusEntry(tx, code, set(), reformed=None),
        ]
        save_corpus(entries, tmp_path / "corpus")
        loaded = load_corpus(tmp_path / "corpus")
        assert loaded == entries

    def test_corpus_state_starts_empty(self):
        state = CorpusState()
        assert state.selected == [] and state.accumulated == set()
        assert state.seen_opcodes == set()
