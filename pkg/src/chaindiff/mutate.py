"""Sequence mutation and the coverage-gated context-generation loop.

Mutants are branch-free linear sequences: block-level edits splice whole
JUMPDEST-delimited blocks, opcode-level edits insert or delete single
opcodes. State-aware insertion seeds load operands (storage keys, memory
offsets, stack depths) from a forward abstract-stack pass over the parent
sequence: inserted opcodes consume live stack values where the depth
suffices, stack deficits are padded with pushes (keys drawn from locations
the parent actually wrote), and memory-addressing operands are pinned
under the memory cap. Every mutant is pre-evaluated off-chain; only
coverage-increasing mutants are deployed to the network.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from . import chain as chain_mod
from . import evm
from .chain import Network, Transaction
from .corpus import CorpusEntry, CorpusState
from .evm import (BlockContext, CoverageMap, DecodedOp, ExecResult, OpcodeSeq,
                  WorldState, push_width)
from .reform import BasicBlock, join_blocks, segment_blocks


class MissingCallee(Exception):
    pass


TOP = None  # abstract "unknown" stack value


@dataclass
class StateLocations:
    storage_keys: set[int] = field(default_factory=set)
    transient_keys: set[int] = field(default_factory=set)
    mem_offsets: set[int] = field(default_factory=set)
    mem_high_water: int = 0


def analyze_used_locations(seq: OpcodeSeq) -> StateLocations:
    """Forward abstract-stack pass recording concretely-addressed writes.

    PUSH operands are concrete, DUP/SWAP propagate, everything else
    produces unknowns; a missing stack item is treated as unknown rather
    than an error.
    """
    locs = StateLocations()
    stack: list = []

    def pop():
        return stack.pop() if stack else TOP

    for op in seq.decode():
        opcode = op.opcode
        width = push_width(opcode)
        if evm.PUSH0 <= opcode <= evm.PUSH32:
            stack.append(int.from_bytes(op.immediate, "big"))
        elif evm.DUP1 <= opcode <= evm.DUP16:
            n = opcode - evm.DUP1 + 1
            stack.append(stack[-n] if len(stack) >= n else TOP)
        elif evm.SWAP1 <= opcode <= evm.SWAP16:
            n = opcode - evm.SWAP1 + 2
            if len(stack) >= n:
                stack[-1], stack[-n] = stack[-n], stack[-1]
        elif opcode in (evm.SSTORE, evm.TSTORE):
            key = pop()
            pop()
            if key is not TOP:
                target = locs.storage_keys if opcode == evm.SSTORE else locs.transient_keys
                target.add(key)
        elif opcode == evm.MSTORE:
            offset = pop()
            pop()
            if offset is not TOP and offset + 32 <= evm.MEMORY_CAP:
                locs.mem_offsets.add(offset)
                locs.mem_high_water = max(locs.mem_high_water, offset + 32)
        elif opcode in evm.SUPPORTED_OPCODES and opcode != evm.INVALID:
            pops, pushes = evm.opcode_arity(opcode)
            for _ in range(pops):
                pop()
            stack.extend([TOP] * pushes)
        # unknown bytes contribute nothing to the abstraction
    return locs


@dataclass
class MutationWeights:
    # opcode-level edits discover far more new opcode pairings per roll than
    # block splices, whose contents are already-covered corpus material
    block_insert: float = 0.1
    block_delete: float = 0.1
    op_insert: float = 0.5
    op_delete: float = 0.3


@dataclass
class MutationConfig:
    block_corpus: list[BasicBlock] = field(default_factory=list)
    opcode_corpus: tuple[int, ...] = ()
    weights: MutationWeights = field(default_factory=MutationWeights)
    rng_seed: int = 0
    state_aware: bool = True

    def __post_init__(self):
        w = self.weights
        if w.block_insert + w.block_delete + w.op_insert + w.op_delete <= 0:
            raise ValueError("mutation weights must not all be zero")
        if not self.opcode_corpus:
            self.opcode_corpus = default_opcode_corpus()


def default_opcode_corpus() -> tuple[int, ...]:
    """Every interpreter opcode except the control-flow pair."""
    return tuple(sorted(evm.SUPPORTED_OPCODES - {evm.JUMP, evm.JUMPI, evm.INVALID}))


def _push_for(value: int, rng: random.Random | None = None) -> list[DecodedOp]:
    width = max(1, (value.bit_length() + 7) // 8)
    return [DecodedOp(0, evm.PUSH0 + width, value.to_bytes(width, "big"))]


def mutate_block_level(seq: OpcodeSeq, cfg: MutationConfig,
                       rng: random.Random) -> OpcodeSeq:
    """One block insertion or deletion at a JUMPDEST boundary."""
    blocks = segment_blocks(seq)
    delete = rng.random() < (cfg.weights.block_delete /
                             max(cfg.weights.block_insert + cfg.weights.block_delete, 1e-9))
    if delete and blocks:
        del blocks[rng.randrange(len(blocks))]
    elif cfg.block_corpus:
        pos = rng.randrange(len(blocks) + 1)
        block = rng.choice(cfg.block_corpus)
        # corpus blocks often consume stack; pad the insertion point with
        # PUSH0s so the spliced block sees the depth it needs instead of
        # underflowing (deepening the stack never breaks the suffix)
        depth = 0
        for prefix in blocks[:pos]:
            depth = max(0, depth + prefix.net_stack_effect)
        deficit = block.min_stack_depth - depth
        if deficit > 0:
            padded = OpcodeSeq(bytes([evm.PUSH0]) * deficit + block.ops.data)
            block = BasicBlock(padded, block.net_stack_effect + deficit,
                               max(block.min_stack_depth - deficit, 0))
        blocks.insert(pos, block)
    return join_blocks(blocks)


def _abstract_depth(ops: list[DecodedOp], pos: int) -> int:
    """Stack depth reaching position ``pos``, clamping underflows at zero."""
    depth = 0
    for op in ops[:pos]:
        pops, pushes = evm.opcode_arity(op.opcode)
        depth = max(0, depth - pops) + pushes
    return depth


def mutate_opcode_level(seq: OpcodeSeq, locs: StateLocations,
                        cfg: MutationConfig, rng: random.Random) -> OpcodeSeq:
    """One opcode insertion or deletion, with state-aware operand seeding."""
    ops = seq.decode()
    delete = rng.random() < (cfg.weights.op_delete /
                             max(cfg.weights.op_insert + cfg.weights.op_delete, 1e-9))
    if delete and ops:
        del ops[rng.randrange(len(ops))]
        return OpcodeSeq.encode(ops)

    opcode = rng.choice(cfg.opcode_corpus)
    pos = rng.randrange(len(ops) + 1)
    snippet: list[DecodedOp] = []
    if cfg.state_aware:
        def live_offset() -> int:
            if locs.mem_offsets:
                return rng.choice(sorted(locs.mem_offsets))
            return 32 * rng.randrange(max(locs.mem_high_water // 32, 1) + 1)

        pops, _ = evm.opcode_arity(opcode)
        if opcode in (evm.MLOAD, evm.MSTORE):
            # the offset operand must stay under the memory cap: always seed
            # it; an existing stack value may serve as the stored word
            if opcode == evm.MSTORE and _abstract_depth(ops, pos) < 1:
                snippet.extend(_push_for(rng.randrange(1 << 16)))
            snippet.extend(_push_for(live_offset()))
        elif opcode in (evm.KECCAK256, evm.RETURN, evm.REVERT):
            offset = (rng.choice(sorted(locs.mem_offsets))
                      if locs.mem_offsets else 0)
            snippet.extend(_push_for(32))      # size, popped second
            snippet.extend(_push_for(offset))  # offset, popped first
        else:
            # cover only the stack deficit so live values become operands;
            # the topmost pad for a storage op is its key, seeded from a
            # location the parent actually wrote
            need = max(pops - _abstract_depth(ops, pos), 0)
            storage_keys = {evm.SLOAD: locs.storage_keys,
                            evm.SSTORE: locs.storage_keys,
                            evm.TLOAD: locs.transient_keys,
                            evm.TSTORE: locs.transient_keys}.get(opcode)
            for k in range(need):
                if k == need - 1 and storage_keys:
                    snippet.extend(_push_for(rng.choice(sorted(storage_keys))))
                else:
                    snippet.extend(_push_for(rng.randrange(1 << 16)))
    width = push_width(opcode)
    imm = rng.randbytes(width) if width else b""
    snippet.append(DecodedOp(0, opcode, imm))

    ops[pos:pos] = snippet
    return OpcodeSeq.encode(ops)


def mutate(seq: OpcodeSeq, cfg: MutationConfig, rng: random.Random) -> OpcodeSeq:
    """One weighted mutation step (block- or opcode-level)."""
    w = cfg.weights
    block_w = w.block_insert + w.block_delete
    total = block_w + w.op_insert + w.op_delete
    if rng.random() < block_w / total:
        return mutate_block_level(seq, cfg, rng)
    locs = analyze_used_locations(seq) if cfg.state_aware else StateLocations()
    return mutate_opcode_level(seq, locs, cfg, rng)


def simulate_off_chain(tx: Transaction, snapshot: WorldState,
                       block: BlockContext) -> tuple[ExecResult, CoverageMap]:
    """Execute a call transaction against a copy of the snapshot.

    No block production, no nonce or balance bookkeeping; the snapshot is
    never mutated.
    """
    if tx.to is None or tx.to not in snapshot.accounts:
        raise MissingCallee(tx.to)
    result = chain_mod.execute_transaction(tx, snapshot.copy(), block)
    return result, result.coverage


@dataclass
class ContextArtifacts:
    deployed_txs: list[Transaction] = field(default_factory=list)
    final_coverage: CoverageMap = field(default_factory=set)
    generated: int = 0
    interesting: int = 0
    deployed: int = 0
    invalid_halts: int = 0


_VALID_HALTS = (evm.Halt.Stop, evm.Halt.Return, evm.Halt.Revert)


def fuzz_context_loop(initial: CorpusState, budget: int, network: Network,
                      cfg: MutationConfig, deployer: str | None = None,
                      rng: random.Random | None = None) -> ContextArtifacts:
    """Mutate, pre-evaluate off-chain, deploy only coverage-increasing mutants."""
    rng = rng or random.Random(cfg.rng_seed)
    if deployer is None:
        funded = sorted(network.config.accounts)
        if not funded:
            raise ValueError("no funded account to deploy from")
        deployer = funded[0]

    pool: list[OpcodeSeq] = []
    pool_data: list[bytes] = []
    for entry in initial.selected:
        pool.append(entry.reformed if entry.reformed else entry.callee_code)
        pool_data.append(entry.tx.data)
    artifacts = ContextArtifacts(final_coverage=set(initial.accumulated))
    if budget <= 0:
        return artifacts
    if not pool and not cfg.block_corpus and not cfg.opcode_corpus:
        return artifacts

    block = network._next_context()
    # execution is journaled, so one snapshot serves until the chain moves
    snapshot = network.world.copy()
    scratch_addr = chain_mod.contract_address(
        deployer, snapshot.account(deployer).nonce)
    scratch = snapshot.ensure(scratch_addr)
    for _ in range(budget):
        artifacts.generated += 1
        if pool:
            # size tournament: of two uniform picks keep the shorter parent;
            # small parents mutate into small, diverse, cheap-to-run mutants
            i, j = rng.randrange(len(pool)), rng.randrange(len(pool))
            pick = i if len(pool[i].data) <= len(pool[j].data) else j
            parent, parent_data = pool[pick], pool_data[pick]
        else:
            parent, parent_data = OpcodeSeq(), b""
        mutant = mutate(parent, cfg, rng)

        scratch.code = mutant
        call_tx = _random_call_tx(rng, deployer, scratch_addr, parent_data,
                                  snapshot, network.config)
        # interestingness is a property of the sequence: evaluate at the full
        # block gas limit so a low gas roll cannot mask new coverage
        eval_tx = replace(call_tx, gas_limit=network.config.block_gas_limit)
        result = chain_mod.execute_transaction(eval_tx, snapshot, block)
        if result.halt not in _VALID_HALTS:
            # broken mutants never enter the corpus or the chain
            artifacts.invalid_halts += 1
            continue

        merged = artifacts.final_coverage | result.coverage
        if len(merged) > len(artifacts.final_coverage):
            artifacts.interesting += 1
            artifacts.final_coverage = merged
            pool.append(mutant)
            pool_data.append(call_tx.data)
            try:
                addr = network.deploy_code(mutant, deployer)
                onchain_tx = Transaction(
                    sender=call_tx.sender, to=addr, value=call_tx.value,
                    data=call_tx.data, gas_limit=call_tx.gas_limit,
                    max_fee_per_gas=call_tx.max_fee_per_gas,
                    nonce=network.world.account(call_tx.sender).nonce)
                network.submit_transaction(onchain_tx)
            except chain_mod.InsufficientFunds:
                continue  # drained sender: keep the mutant in the pool only
            artifacts.deployed += 1
            artifacts.deployed_txs.append(onchain_tx)
            block = network._next_context()
            snapshot = network.world.copy()
            scratch_addr = chain_mod.contract_address(
                deployer, snapshot.account(deployer).nonce)
            scratch = snapshot.ensure(scratch_addr)
    return artifacts


def _random_call_tx(rng: random.Random, sender: str, to: str, data: bytes,
                    world: WorldState, config) -> Transaction:
    """Fill remaining transaction fields randomly within validity.

    value in [0, balance/4], fee in [baseFee, 10*baseFee], gas limit in
    [21000, 2*block gas limit] -- the over-limit half deliberately produces
    gas-hungry contexts.
    """
    balance = world.account(sender).balance
    base_fee = config.base_fee
    gas_limit = rng.randrange(evm.TX_BASE_GAS, 2 * config.block_gas_limit + 1)
    max_fee = base_fee + rng.randrange(9 * base_fee + 1)
    headroom = balance - gas_limit * max_fee  # gas deposit comes first
    value_cap = min(balance // 4, max(headroom, 0))
    return Transaction(
        sender=sender,
        to=to,
        value=rng.randrange(value_cap + 1) if value_cap > 0 else 0,
        data=data,
        gas_limit=gas_limit,
        max_fee_per_gas=max_fee,
        nonce=world.account(sender).nonce,
    )
