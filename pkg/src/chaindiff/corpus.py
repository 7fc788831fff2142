"""Initial transaction corpus selection and seed streams.

Selection is an incremental loop over a seed stream: a transaction is only
executed when its callee's static opcode set brings something new, and only
recorded when its execution coverage strictly grows the accumulated map.
Mainnet scraping is out of scope; the synthetic stream generates structurally
valid contracts (taken jumps with real JUMPDEST targets, arity-balanced
straight segments) and deploys them on the test network.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import chain as chain_mod
from . import evm
from .chain import Network, Transaction
from .evm import (BlockContext, CoverageMap, OpcodeSeq, WorldState,
                  merge_coverage, scan_opcodes)


class StreamExhausted(Exception):
    pass


class SeedFormatError(ValueError):
    pass


_SEED_KEYS = {"from", "to", "value", "data", "gasLimit", "maxFeePerGas",
              "nonce", "calleeCode"}


class SeedStream:
    """Exhaustible stream of (transaction, callee code) pairs."""

    def __init__(self, items: list[tuple[Transaction, OpcodeSeq]]):
        self._items = list(items)
        self._pos = 0

    def pop(self) -> tuple[Transaction, OpcodeSeq]:
        if self._pos >= len(self._items):
            raise StreamExhausted()
        item = self._items[self._pos]
        self._pos += 1
        return item

    def __len__(self):
        return len(self._items) - self._pos

    @classmethod
    def from_file(cls, path: str | Path) -> "SeedStream":
        """JSON Lines seed file; unknown keys are rejected."""
        items = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            extra = set(obj) - _SEED_KEYS
            if extra:
                raise SeedFormatError(f"line {lineno}: unknown keys {sorted(extra)}")
            missing = _SEED_KEYS - set(obj)
            if missing:
                raise SeedFormatError(f"line {lineno}: missing keys {sorted(missing)}")
            tx = Transaction(
                sender=obj["from"],
                to=obj["to"],
                value=int(obj["value"], 16),
                data=bytes.fromhex(obj["data"][2:]),
                gas_limit=int(obj["gasLimit"]),
                max_fee_per_gas=int(obj["maxFeePerGas"], 16),
                nonce=int(obj["nonce"]),
            )
            items.append((tx, OpcodeSeq.from_hex(obj["calleeCode"])))
        return cls(items)


def write_seed_file(path: str | Path, items: list[tuple[Transaction, OpcodeSeq]]):
    with open(path, "w") as fh:
        for tx, code in items:
            fh.write(json.dumps({
                "from": tx.sender,
                "to": tx.to,
                "value": evm.word_hex(tx.value),
                "data": "0x" + tx.data.hex(),
                "gasLimit": tx.gas_limit,
                "maxFeePerGas": evm.word_hex(tx.max_fee_per_gas),
                "nonce": tx.nonce,
                "calleeCode": code.to_hex(),
            }) + "\n")


@dataclass
class CorpusConfig:
    coverage_threshold: int = 500  # absolute accumulated coverage-unit count
    max_selected: int = 1000

    def __post_init__(self):
        if self.max_selected < 1 or self.coverage_threshold < 0:
            raise ValueError("max_selected >= 1 and coverage_threshold >= 0 required")


@dataclass
class CorpusEntry:
    tx: Transaction
    callee_code: OpcodeSeq
    coverage: CoverageMap
    reformed: OpcodeSeq | None = None


@dataclass
class CorpusState:
    selected: list[CorpusEntry] = field(default_factory=list)
    seen_opcodes: set[int] = field(default_factory=set)
    accumulated: CoverageMap = field(default_factory=set)


def select_initial_corpus(stream: SeedStream, config: CorpusConfig,
                          context_world: WorldState,
                          block: BlockContext | None = None,
                          skip_counter: list | None = None) -> CorpusState:
    """Incremental coverage-maximizing selection over the stream.

    ``skip_counter``, when given, receives one entry per transaction skipped
    by the static opcode-subset gate (instrumentation for tests).
    """
    block = block or BlockContext()
    state = CorpusState()
    while (len(state.accumulated) < config.coverage_threshold
           and len(state.selected) < config.max_selected):
        try:
            tx, callee_code = stream.pop()
        except StreamExhausted:
            break
        static_ops = scan_opcodes(callee_code)
        if static_ops <= state.seen_opcodes:
            if skip_counter is not None:
                skip_counter.append(tx.hash)
            continue
        result = chain_mod.execute_transaction(tx, context_world, block)
        merged = merge_coverage(state.accumulated, result.coverage)
        if len(merged) > len(state.accumulated):
            state.accumulated = merged
            state.selected.append(CorpusEntry(tx, callee_code, set(result.coverage)))
            state.seen_opcodes |= {step.opcode for step in result.trace}
    return state


# --- synthetic contract/transaction generation --------------------------------

_ENV_OPS = (evm.TIMESTAMP, evm.NUMBER, evm.BASEFEE, evm.CALLVALUE,
            evm.CALLDATASIZE, evm.CALLER, evm.ADDRESS, evm.GASLIMIT)
_BINARY_OPS = (evm.ADD, evm.MUL, evm.SUB, evm.DIV, evm.MOD, evm.LT, evm.GT,
               evm.EQ, evm.AND, evm.OR, evm.XOR)
# one pop, one push: any live stack value is a valid operand
_UNARY_OPS = (evm.ISZERO, evm.NOT, evm.BALANCE, evm.CALLDATALOAD)


def _gen_segment(rng: random.Random, depth: int, length: int) -> tuple[list[int], int]:
    """Arity-safe straight-line op bytes; returns (bytes, resulting depth)."""
    out: list[int] = []
    for _ in range(length):
        roll = rng.random()
        if roll < 0.24 or depth == 0:
            width = rng.choice((0, 1, 1, 2, 2, 3, 4, 8, 16, 32))
            out.append(evm.PUSH0 + width)
            out.extend(rng.randbytes(width))
            depth += 1
        elif roll < 0.34:
            out.append(rng.choice(_ENV_OPS))
            depth += 1
        elif roll < 0.40:
            # depth >= 1 is guaranteed past the first branch
            if rng.random() < 0.5 or depth < 2:
                out.append(evm.DUP1 + rng.randrange(min(depth, 16)))
                depth += 1
            else:
                out.append(evm.SWAP1 + rng.randrange(min(depth - 1, 16)))
        elif roll < 0.52 and depth >= 2:
            out.append(rng.choice(_BINARY_OPS))
            depth -= 1
        elif roll < 0.58:
            out.append(rng.choice(_UNARY_OPS))
        elif roll < 0.68:
            # storage traffic on a small key range
            out.extend([evm.PUSH1, rng.randrange(256),
                        evm.PUSH1, rng.randrange(8),
                        rng.choice((evm.SSTORE, evm.TSTORE))])
        elif roll < 0.74:
            out.extend([evm.PUSH1, rng.randrange(8),
                        rng.choice((evm.SLOAD, evm.TLOAD))])
            depth += 1
        elif roll < 0.82:
            if rng.random() < 0.3:
                # occasional deep memory write: makes the context gas-hungry
                off = rng.randrange(1 << 20, 1 << 22)
                out.extend([evm.PUSH1, rng.randrange(256),
                            evm.PUSH1 + 2, off >> 16, (off >> 8) & 0xFF, off & 0xFF,
                            evm.MSTORE])
            else:
                out.extend([evm.PUSH1, rng.randrange(256),
                            evm.PUSH1, 32 * rng.randrange(8),
                            evm.MSTORE])
        elif roll < 0.88:
            out.extend([evm.PUSH1, 32 * rng.randrange(8), evm.MLOAD])
            depth += 1
        elif roll < 0.94:
            out.extend([evm.PUSH1, 32, evm.PUSH1, 32 * rng.randrange(4),
                        evm.KECCAK256])
            depth += 1
        elif depth >= 1:
            out.append(evm.POP)
            depth -= 1
        else:
            out.append(evm.JUMPDEST)
    return out, depth


def generate_contract(rng: random.Random, ensure_jump: bool = True) -> OpcodeSeq:
    """Random contract whose jumps all land on real JUMPDEST positions."""
    code: list[int] = []
    depth = 0
    segments = rng.randrange(2, 5)
    for i in range(segments):
        seg, depth = _gen_segment(rng, depth, rng.randrange(3, 9))
        code.extend(seg)
        want_jump = ensure_jump and i == 0
        if want_jump or rng.random() < 0.6:
            middle, mid_depth = _gen_segment(rng, depth, rng.randrange(1, 5))
            if rng.random() < 0.5:
                # unconditional forward jump over the middle segment
                dest = len(code) + 5 + len(middle)
                code.extend([evm.PUSH1 + 2, dest >> 16, (dest >> 8) & 0xFF,
                             dest & 0xFF, evm.JUMP])
                code.extend(middle)
                code.append(evm.JUMPDEST)
            else:
                cond = rng.randrange(2)
                dest = len(code) + 7 + len(middle)
                code.extend([evm.PUSH1, cond,
                             evm.PUSH1 + 2, dest >> 16, (dest >> 8) & 0xFF,
                             dest & 0xFF, evm.JUMPI])
                code.extend(middle)
                code.append(evm.JUMPDEST)
                if cond == 0:
                    depth = mid_depth  # fallthrough path executed the middle
    ending = rng.random()
    if ending < 0.6:
        code.append(evm.STOP)
    elif ending < 0.9:
        code.extend([evm.PUSH1, 32, evm.PUSH1, 0, evm.RETURN])
    else:
        code.extend([evm.PUSH1, 0, evm.PUSH1, 0, evm.REVERT])
    return OpcodeSeq(bytes(code))


def synthesize_seed_stream(rng_seed: int, count: int, network: Network) -> SeedStream:
    """Deploy ``count`` generated contracts and pair each with a calling tx."""
    rng = random.Random(rng_seed)
    funded = sorted(network.config.accounts)
    if not funded and count:
        raise ValueError("network has no funded accounts")
    items: list[tuple[Transaction, OpcodeSeq]] = []
    for _ in range(count):
        code = generate_contract(rng)
        deployer = funded[0]
        addr = network.deploy_code(code, deployer)
        sender = rng.choice(funded)
        tx = Transaction(
            sender=sender,
            to=addr,
            value=0,
            data=rng.randbytes(rng.randrange(0, 64)),
            gas_limit=min(1_000_000, network.config.block_gas_limit),
            max_fee_per_gas=network.config.base_fee,
            nonce=network.world.account(sender).nonce,
        )
        items.append((tx, code))
    return SeedStream(items)


# --- corpus persistence --------------------------------------------------------

def _coverage_to_json(coverage: CoverageMap) -> list:
    units = []
    for unit in sorted(coverage):
        units.append(list(unit))
    return units


def _coverage_from_json(units: list) -> CoverageMap:
    return {tuple(u) for u in units}


def save_corpus(entries: list[CorpusEntry], directory: str | Path):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "entries.jsonl", "w") as fh:
        for entry in entries:
            tx = entry.tx
            fh.write(json.dumps({
                "from": tx.sender,
                "to": tx.to,
                "value": evm.word_hex(tx.value),
                "data": "0x" + tx.data.hex(),
                "gasLimit": tx.gas_limit,
                "maxFeePerGas": evm.word_hex(tx.max_fee_per_gas),
                "nonce": tx.nonce,
                "calleeCode": entry.callee_code.to_hex(),
                "coverage": _coverage_to_json(entry.coverage),
                "reformed": entry.reformed.to_hex() if entry.reformed else None,
            }) + "\n")


def load_corpus(directory: str | Path) -> list[CorpusEntry]:
    entries = []
    for line in (Path(directory) / "entries.jsonl").read_text().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        tx = Transaction(
            sender=obj["from"], to=obj["to"], value=int(obj["value"], 16),
            data=bytes.fromhex(obj["data"][2:]), gas_limit=int(obj["gasLimit"]),
            max_fee_per_gas=int(obj["maxFeePerGas"], 16), nonce=int(obj["nonce"]))
        entries.append(CorpusEntry(
            tx=tx,
            callee_code=OpcodeSeq.from_hex(obj["calleeCode"]),
            coverage=_coverage_from_json(obj["coverage"]),
            reformed=OpcodeSeq.from_hex(obj["reformed"]) if obj["reformed"] else None,
        ))
    return entries
