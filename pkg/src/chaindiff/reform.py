"""Trace reforming: rewrite executed traces into branch-free linear code.

The executed-opcode view of a transaction is already a flattened path, so
jumps can be removed without changing what ran: every JUMP becomes a POP
(consuming the destination), every JUMPI two POPs (destination and
condition; the trace encodes which way the branch went), and a PUSH that
only fed a removed jump is deleted together with its POP. JUMPDEST survives
as a no-op block boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import evm
from .evm import (DecodedOp, ExecResult, OpcodeSeq, TraceStep, opcode_arity,
                  push_width)


class EmptyTrace(Exception):
    pass


class ContextUnavailable(Exception):
    pass


# opcodes whose results depend on code position or metering; reformed code
# moves both, so equivalence is not promised and the checker skips
POSITION_SENSITIVE = frozenset({evm.PC, evm.GAS, evm.MSIZE})


def extract_trace(result: ExecResult) -> list[TraceStep]:
    """Depth-0 steps only; sub-frame steps are dropped, CALL steps retained."""
    if not result.trace:
        raise EmptyTrace()
    return [step for step in result.trace if step.frame_depth == 0]


def _step_to_op(step: TraceStep) -> DecodedOp:
    width = push_width(step.opcode)
    if width:
        # post-op stack top holds the value this PUSH produced
        value = step.stack_top[0] if step.stack_top else 0
        imm = (value & ((1 << (8 * width)) - 1)).to_bytes(width, "big")
        return DecodedOp(0, step.opcode, imm)
    return DecodedOp(0, step.opcode)


def reform(trace: list[TraceStep]) -> OpcodeSeq:
    """Linear sequence (no JUMP/JUMPI) replaying the traced path."""
    ops: list[DecodedOp] = []
    for step in trace:
        if step.opcode == evm.JUMP:
            ops.append(DecodedOp(0, evm.POP))
        elif step.opcode == evm.JUMPI:
            ops.append(DecodedOp(0, evm.POP))
            ops.append(DecodedOp(0, evm.POP))
        else:
            ops.append(_step_to_op(step))
    # peephole: PUSHk directly feeding a POP cancels out; repeat to fixpoint
    changed = True
    while changed:
        changed = False
        out: list[DecodedOp] = []
        i = 0
        while i < len(ops):
            if (i + 1 < len(ops) and evm.PUSH0 <= ops[i].opcode <= evm.PUSH32
                    and ops[i + 1].opcode == evm.POP):
                i += 2
                changed = True
            else:
                out.append(ops[i])
                i += 1
        ops = out
    return OpcodeSeq.encode(ops)


@dataclass(frozen=True)
class BasicBlock:
    """Straight-line run between JUMPDEST boundaries."""
    ops: OpcodeSeq
    net_stack_effect: int
    min_stack_depth: int


def stack_effect(ops: list[DecodedOp]) -> tuple[int, int]:
    """(net effect, minimum inputs required) by static arity accounting."""
    depth = 0
    minimum = 0
    for op in ops:
        pops, pushes = opcode_arity(op.opcode)
        depth -= pops
        minimum = min(minimum, depth)
        depth += pushes
    return depth, -minimum


def segment_blocks(seq: OpcodeSeq) -> list[BasicBlock]:
    """Split at JUMPDEST; boundaries excluded, empty blocks dropped."""
    blocks: list[BasicBlock] = []
    current: list[DecodedOp] = []

    def flush():
        if current:
            net, min_depth = stack_effect(current)
            blocks.append(BasicBlock(OpcodeSeq.encode(current), net, min_depth))
            current.clear()

    for op in seq.decode():
        if op.opcode == evm.JUMPDEST:
            flush()
        else:
            current.append(op)
    flush()
    return blocks


def join_blocks(blocks: list[BasicBlock]) -> OpcodeSeq:
    """Concatenate blocks with single JUMPDEST separators."""
    parts: list[bytes] = []
    for i, block in enumerate(blocks):
        if i:
            parts.append(bytes([evm.JUMPDEST]))
        parts.append(block.ops.data)
    return OpcodeSeq(b"".join(parts))


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    mismatch: tuple[str, str] | None = None  # (field, detail)
    skipped: bool = False
    skip_reason: str = ""


def _storage_only(delta) -> dict:
    return {addr: d.storage_writes for addr, d in delta.items() if d.storage_writes}


def check_equivalence(original_tx, reformed_seq: OpcodeSeq, network) -> EquivalenceVerdict:
    """Re-run a reformed sequence in the original transaction's context.

    The reformed code replaces the callee's code in a scratch copy of the
    pre-transaction world; return data, storage delta and halt kind must
    match (gas is excluded by design; PC/GAS/MSIZE traces are skipped).
    """
    from . import chain as chain_mod

    found = network.find_transaction(original_tx.hash)
    if found is None:
        raise ContextUnavailable(original_tx.hash.hex())
    block, _, tx = found
    pre_world = network.pre_state_of_block(block.context.number)
    if pre_world is None or tx.to is None:
        raise ContextUnavailable("no pre-state snapshot")

    original = chain_mod.execute_transaction(tx, pre_world, block.context)
    traced_opcodes = {step.opcode for step in original.trace}
    sensitive = traced_opcodes & POSITION_SENSITIVE
    if sensitive:
        names = ",".join(sorted(evm.opcode_name(op) for op in sensitive))
        return EquivalenceVerdict(False, skipped=True,
                                  skip_reason=f"trace contains {names}")

    scratch = pre_world.copy()
    scratch.ensure(tx.to).code = reformed_seq
    reformed = chain_mod.execute_transaction(tx, scratch, block.context)

    if original.halt is not reformed.halt:
        return EquivalenceVerdict(False, ("HaltKind",
                                          f"{original.halt.name} != {reformed.halt.name}"))
    if original.return_data != reformed.return_data:
        return EquivalenceVerdict(False, ("ReturnData",
                                          f"{original.return_data.hex()} != {reformed.return_data.hex()}"))
    if _storage_only(original.state_delta) != _storage_only(reformed.state_delta):
        return EquivalenceVerdict(False, ("StorageDelta", "storage writes differ"))
    return EquivalenceVerdict(True)
