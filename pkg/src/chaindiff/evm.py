"""Miniature EVM: stack machine with gas accounting, tracing and coverage.

Deterministic execution substrate shared by the test chain, the off-chain
simulator and the trace reformer. The opcode subset is fixed: arithmetic,
comparison, bitwise, KECCAK256, environment reads, memory, storage,
transient storage, control flow, PUSH0..32, DUP1..16, SWAP1..16, a
simplified CALL, RETURN and REVERT.

Conventions (documented once, relied on by the mutators):
  - MSTORE pops (offset, value), MLOAD pops (offset).
  - SSTORE pops (key, value), SLOAD pops (key); same for TSTORE/TLOAD.
  - KECCAK256 pops (offset, size).
  - CALL pops (gas, to, value, inOffset, inSize, outOffset, outSize).
  - RETURN/REVERT pop (offset, size).
  - JUMPI pops (dest, cond); the jump is taken when cond != 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .keccak import keccak256

WORD_MASK = (1 << 256) - 1
ADDR_MASK = (1 << 160) - 1
STACK_LIMIT = 1024
MEMORY_CAP = 1 << 22  # bytes; expansion past this halts with OutOfGas
CALL_DEPTH_LIMIT = 16
TX_BASE_GAS = 21000  # charged by the transaction layer, not per frame

Address = str  # 0x-prefixed lowercase, 40 hex chars
Word = int

# --- opcode bytes -----------------------------------------------------------

STOP = 0x00
ADD = 0x01
MUL = 0x02
SUB = 0x03
DIV = 0x04
MOD = 0x06
LT = 0x10
GT = 0x11
EQ = 0x14
ISZERO = 0x15
AND = 0x16
OR = 0x17
XOR = 0x18
NOT = 0x19
KECCAK256 = 0x20
ADDRESS = 0x30
BALANCE = 0x31
CALLER = 0x33
CALLVALUE = 0x34
CALLDATALOAD = 0x35
CALLDATASIZE = 0x36
TIMESTAMP = 0x42
NUMBER = 0x43
GASLIMIT = 0x45
BASEFEE = 0x48
POP = 0x50
MLOAD = 0x51
MSTORE = 0x52
SLOAD = 0x54
SSTORE = 0x55
JUMP = 0x56
JUMPI = 0x57
PC = 0x58
MSIZE = 0x59
GAS = 0x5A
JUMPDEST = 0x5B
TLOAD = 0x5C
TSTORE = 0x5D
PUSH0 = 0x5F
PUSH1 = 0x60
PUSH32 = 0x7F
DUP1 = 0x80
DUP16 = 0x8F
SWAP1 = 0x90
SWAP16 = 0x9F
CALL = 0xF1
RETURN = 0xF3
REVERT = 0xFD
INVALID = 0xFE

_NAMES = {
    STOP: "STOP", ADD: "ADD", MUL: "MUL", SUB: "SUB", DIV: "DIV", MOD: "MOD",
    LT: "LT", GT: "GT", EQ: "EQ", ISZERO: "ISZERO", AND: "AND", OR: "OR",
    XOR: "XOR", NOT: "NOT", KECCAK256: "KECCAK256", ADDRESS: "ADDRESS",
    BALANCE: "BALANCE", CALLER: "CALLER", CALLVALUE: "CALLVALUE",
    CALLDATALOAD: "CALLDATALOAD", CALLDATASIZE: "CALLDATASIZE",
    TIMESTAMP: "TIMESTAMP", NUMBER: "NUMBER", GASLIMIT: "GASLIMIT",
    BASEFEE: "BASEFEE", POP: "POP", MLOAD: "MLOAD", MSTORE: "MSTORE",
    SLOAD: "SLOAD", SSTORE: "SSTORE", JUMP: "JUMP", JUMPI: "JUMPI",
    PC: "PC", MSIZE: "MSIZE", GAS: "GAS", JUMPDEST: "JUMPDEST",
    TLOAD: "TLOAD", TSTORE: "TSTORE", CALL: "CALL", RETURN: "RETURN",
    REVERT: "REVERT", INVALID: "INVALID",
}
for _k in range(33):
    _NAMES[PUSH0 + _k] = f"PUSH{_k}"
for _k in range(16):
    _NAMES[DUP1 + _k] = f"DUP{_k + 1}"
    _NAMES[SWAP1 + _k] = f"SWAP{_k + 1}"

# (pops, pushes) per opcode
_ARITY = {
    STOP: (0, 0), ADD: (2, 1), MUL: (2, 1), SUB: (2, 1), DIV: (2, 1),
    MOD: (2, 1), LT: (2, 1), GT: (2, 1), EQ: (2, 1), ISZERO: (1, 1),
    AND: (2, 1), OR: (2, 1), XOR: (2, 1), NOT: (1, 1), KECCAK256: (2, 1),
    ADDRESS: (0, 1), BALANCE: (1, 1), CALLER: (0, 1), CALLVALUE: (0, 1),
    CALLDATALOAD: (1, 1), CALLDATASIZE: (0, 1), TIMESTAMP: (0, 1),
    NUMBER: (0, 1), GASLIMIT: (0, 1), BASEFEE: (0, 1), POP: (1, 0),
    MLOAD: (1, 1), MSTORE: (2, 0), SLOAD: (1, 1), SSTORE: (2, 0),
    JUMP: (1, 0), JUMPI: (2, 0), PC: (0, 1), MSIZE: (0, 1), GAS: (0, 1),
    JUMPDEST: (0, 0), TLOAD: (1, 1), TSTORE: (2, 0), CALL: (7, 1),
    RETURN: (2, 0), REVERT: (2, 0),
}
for _k in range(33):
    _ARITY[PUSH0 + _k] = (0, 1)
for _k in range(16):
    _ARITY[DUP1 + _k] = (_k + 1, _k + 2)
    _ARITY[SWAP1 + _k] = (_k + 2, _k + 2)

SUPPORTED_OPCODES = frozenset(_ARITY) | {INVALID}


def opcode_name(op: int) -> str:
    return _NAMES.get(op, f"0x{op:02x}")


def opcode_arity(op: int) -> tuple[int, int]:
    """(pops, pushes) for a supported opcode."""
    return _ARITY[op]


def push_width(op: int) -> int:
    """Immediate byte count for PUSHk opcodes, 0 otherwise."""
    return op - PUSH0 if PUSH0 <= op <= PUSH32 else 0


# --- word / address helpers -------------------------------------------------

def word_hex(value: Word) -> str:
    """Canonical 0x-prefixed lowercase hex, no leading zeros ("0x0" for 0)."""
    return hex(value & WORD_MASK)


def address_hex(value: int) -> Address:
    return "0x" + format(value & ADDR_MASK, "040x")


def address_int(addr: Address) -> int:
    return int(addr, 16) & ADDR_MASK


# --- opcode sequences --------------------------------------------------------

@dataclass(frozen=True)
class DecodedOp:
    pc: int
    opcode: int
    immediate: bytes = b""


class OpcodeSeq:
    """Byte sequence where PUSHk is followed by k immediate bytes.

    A truncated trailing PUSH immediate is zero-padded on decode, so
    decode -> encode normalizes the byte form.
    """

    __slots__ = ("data",)

    def __init__(self, data: bytes = b""):
        self.data = bytes(data)

    @classmethod
    def from_hex(cls, text: str) -> "OpcodeSeq":
        body = text[2:] if text.startswith(("0x", "0X")) else text
        return cls(bytes.fromhex(body))

    def to_hex(self) -> str:
        return "0x" + self.data.hex()

    def decode(self) -> list[DecodedOp]:
        ops = []
        data = self.data
        i = 0
        while i < len(data):
            op = data[i]
            width = push_width(op)
            imm = data[i + 1:i + 1 + width]
            if len(imm) < width:
                imm = imm + b"\x00" * (width - len(imm))
            ops.append(DecodedOp(i, op, imm))
            i += 1 + width
        return ops

    @classmethod
    def encode(cls, ops: list[DecodedOp]) -> "OpcodeSeq":
        return cls(b"".join(bytes([o.opcode]) + o.immediate for o in ops))

    def __eq__(self, other):
        return isinstance(other, OpcodeSeq) and self.data == other.data

    def __hash__(self):
        return hash(self.data)

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        return f"OpcodeSeq({self.to_hex()})"


def scan_opcodes(code: OpcodeSeq) -> set[int]:
    """Static opcode byte set, skipping PUSH immediate bytes."""
    return {op.opcode for op in code.decode()}


# --- world state -------------------------------------------------------------

@dataclass
class Account:
    balance: Word = 0
    nonce: int = 0
    code: OpcodeSeq = field(default_factory=OpcodeSeq)
    storage: dict[Word, Word] = field(default_factory=dict)

    def copy(self) -> "Account":
        return Account(self.balance, self.nonce, OpcodeSeq(self.code.data),
                       dict(self.storage))


class WorldState:
    """Accounts plus per-transaction transient storage.

    Absent accounts read as empty; absent storage keys read as zero.
    """

    __slots__ = ("accounts", "transient")

    def __init__(self, accounts: dict[Address, Account] | None = None):
        self.accounts = accounts or {}
        self.transient: dict[tuple[Address, Word], Word] = {}

    def account(self, addr: Address) -> Account:
        acct = self.accounts.get(addr)
        return acct if acct is not None else Account()

    def ensure(self, addr: Address) -> Account:
        acct = self.accounts.get(addr)
        if acct is None:
            acct = Account()
            self.accounts[addr] = acct
        return acct

    def copy(self) -> "WorldState":
        return WorldState({a: acct.copy() for a, acct in self.accounts.items()})

    def state_hash(self) -> str:
        """Order-independent digest of all account state (test helper)."""
        import hashlib
        items = []
        for addr in sorted(self.accounts):
            acct = self.accounts[addr]
            storage = sorted((k, v) for k, v in acct.storage.items() if v)
            items.append((addr, acct.balance, acct.nonce, acct.code.data.hex(),
                          tuple(storage)))
        return hashlib.sha256(repr(items).encode()).hexdigest()


# --- execution context / results ---------------------------------------------

@dataclass(frozen=True)
class BlockContext:
    number: int = 0
    timestamp: int = 0
    base_fee: Word = 1_000_000_000
    gas_limit: int = 30_000_000
    parent_hash: bytes = b"\x00" * 32


@dataclass
class ExecContext:
    caller: Address
    callee: Address
    call_value: Word = 0
    call_data: bytes = b""
    block: BlockContext = field(default_factory=BlockContext)
    gas_limit: int = 1_000_000
    gas_limit_override: bool = False  # permits gas_limit > block.gas_limit

    def __post_init__(self):
        if not self.gas_limit_override and self.gas_limit > self.block.gas_limit:
            raise ValueError("frame gas limit exceeds block gas limit")


class Halt(Enum):
    Stop = "Stop"
    Return = "Return"
    Revert = "Revert"
    OutOfGas = "OutOfGas"
    StackUnderflow = "StackUnderflow"
    StackOverflow = "StackOverflow"
    InvalidJump = "InvalidJump"
    InvalidOpcode = "InvalidOpcode"
    DepthExceeded = "DepthExceeded"


FAILURE_HALTS = frozenset({
    Halt.Revert, Halt.OutOfGas, Halt.StackUnderflow, Halt.StackOverflow,
    Halt.InvalidJump, Halt.InvalidOpcode, Halt.DepthExceeded,
})


@dataclass(slots=True)
class TraceStep:
    frame_depth: int
    pc: int
    opcode: int
    gas_before: int
    gas_cost: int
    stack_top: tuple[Word, ...]  # post-op stack, top first, at most 4 items


@dataclass
class AccountDelta:
    balance_delta: int = 0
    storage_writes: dict[Word, Word] = field(default_factory=dict)


StateDelta = dict  # Address -> AccountDelta

# Coverage units: ("edge", from_opcode, to_opcode) for adjacent same-frame
# steps, ("halt", opcode, halt_name) at frame ends.
CoverageUnit = tuple
CoverageMap = set


def merge_coverage(a: CoverageMap, b: CoverageMap) -> CoverageMap:
    return set(a) | set(b)


@dataclass
class ExecResult:
    halt: Halt
    return_data: bytes
    gas_used: int
    trace: list[TraceStep]
    state_delta: StateDelta
    coverage: CoverageMap


def apply_state_delta(world: WorldState, delta: StateDelta) -> WorldState:
    """New world with balances and storage writes applied (nonces untouched)."""
    out = world.copy()
    for addr, acct_delta in delta.items():
        acct = out.ensure(addr)
        acct.balance = (acct.balance + acct_delta.balance_delta) & WORD_MASK
        acct.storage.update(acct_delta.storage_writes)
    return out


# --- interpreter --------------------------------------------------------------

_decode_cache: dict[bytes, tuple[list[DecodedOp], dict[int, int], frozenset]] = {}


def _prepared(code: OpcodeSeq):
    key = code.data
    hit = _decode_cache.get(key)
    if hit is not None:
        return hit
    ops = code.decode()
    pc_index = {op.pc: i for i, op in enumerate(ops)}
    jumpdests = frozenset(op.pc for op in ops if op.opcode == JUMPDEST)
    entry = (ops, pc_index, jumpdests)
    if len(_decode_cache) > 4096:
        _decode_cache.clear()
    _decode_cache[key] = entry
    return entry


class _Journal:
    """Mutable execution-scoped overlay on an immutable WorldState."""

    __slots__ = ("world", "balance", "storage", "transient")

    def __init__(self, world: WorldState):
        self.world = world
        self.balance: dict[Address, int] = {}
        self.storage: dict[Address, dict[Word, Word]] = {}
        self.transient: dict[tuple[Address, Word], Word] = dict(world.transient)

    def snapshot(self):
        return (dict(self.balance),
                {a: dict(m) for a, m in self.storage.items()},
                dict(self.transient))

    def restore(self, snap):
        self.balance, self.storage, self.transient = snap

    def get_balance(self, addr: Address) -> Word:
        return (self.world.account(addr).balance + self.balance.get(addr, 0)) & WORD_MASK

    def add_balance(self, addr: Address, amount: int):
        self.balance[addr] = self.balance.get(addr, 0) + amount

    def sload(self, addr: Address, key: Word) -> Word:
        writes = self.storage.get(addr)
        if writes is not None and key in writes:
            return writes[key]
        return self.world.account(addr).storage.get(key, 0)

    def sstore(self, addr: Address, key: Word, value: Word):
        self.storage.setdefault(addr, {})[key] = value

    def to_delta(self) -> StateDelta:
        delta: StateDelta = {}
        for addr, amount in self.balance.items():
            if amount:
                delta.setdefault(addr, AccountDelta()).balance_delta = amount
        for addr, writes in self.storage.items():
            if writes:
                delta.setdefault(addr, AccountDelta()).storage_writes.update(writes)
        return delta


def execute(code: OpcodeSeq, ctx: ExecContext, world: WorldState) -> ExecResult:
    """Run ``code`` in ``ctx`` against ``world``; never raises for guest faults.

    Pure: ``world`` is only read; all writes land in the returned state delta
    (empty for every failure halt).
    """
    trace: list[TraceStep] = []
    coverage: CoverageMap = set()
    journal = _Journal(world)
    halt, rdata, gas_used = _run_frame(
        code, ctx.caller, ctx.callee, ctx.call_value, ctx.call_data,
        ctx.gas_limit, 0, ctx.block, journal, trace, coverage, world)
    delta = {} if halt in FAILURE_HALTS else journal.to_delta()
    return ExecResult(halt, rdata, gas_used, trace, delta, coverage)


def _run_frame(code, caller, callee, value, data, gas, depth, block,
               journal, trace, coverage, world):
    ops, pc_index, jumpdests = _prepared(code)
    stack: list[Word] = []
    memory = bytearray()
    remaining = gas
    idx = 0
    snap = journal.snapshot()
    last_op = None
    rdata = b""
    remaining_before = remaining

    def top4():
        return tuple(stack[-1:-5:-1])

    def record(pc, op, cost):
        if trace and trace[-1].frame_depth == depth:
            coverage.add(("edge", trace[-1].opcode, op))
        trace.append(TraceStep(depth, pc, op, remaining_before, cost, top4()))

    def expand(offset, size):
        """Grow memory; returns newly touched 32-byte words, or None on cap."""
        if size == 0:
            return 0
        end = offset + size
        if end > MEMORY_CAP:
            return None
        target = ((end + 31) // 32) * 32
        if target > len(memory):
            new_words = (target - len(memory)) // 32
            memory.extend(b"\x00" * (target - len(memory)))
            return new_words
        return 0

    while True:
        if idx >= len(ops):
            halt = Halt.Stop  # ran off the end of code
            break
        dop = ops[idx]
        op = dop.opcode
        last_op = op
        remaining_before = remaining

        if op not in _ARITY:
            record(dop.pc, op, 0)
            halt = Halt.InvalidOpcode
            break
        pops, pushes = _ARITY[op]
        if len(stack) < pops:
            record(dop.pc, op, 0)
            halt = Halt.StackUnderflow
            break
        if len(stack) - pops + pushes > STACK_LIMIT:
            record(dop.pc, op, 0)
            halt = Halt.StackOverflow
            break
        if op == JUMP and stack[-1] not in jumpdests:
            record(dop.pc, op, 0)
            halt = Halt.InvalidJump
            break
        if op == JUMPI and stack[-2] != 0 and stack[-1] not in jumpdests:
            record(dop.pc, op, 0)
            halt = Halt.InvalidJump
            break

        # gas cost (may inspect stack without popping); None => memory cap
        cost = _gas_cost(op, stack, memory)
        if cost is None or cost > remaining:
            cost = remaining
            remaining = 0
            record(dop.pc, op, cost)
            halt = Halt.OutOfGas
            break
        remaining -= cost
        idx += 1

        if op == STOP:
            record(dop.pc, op, cost)
            halt = Halt.Stop
            break
        elif PUSH0 <= op <= PUSH32:
            stack.append(int.from_bytes(dop.immediate, "big"))
        elif DUP1 <= op <= DUP16:
            stack.append(stack[-(op - DUP1 + 1)])
        elif SWAP1 <= op <= SWAP16:
            n = op - SWAP1 + 2
            stack[-1], stack[-n] = stack[-n], stack[-1]
        elif op == POP:
            stack.pop()
        elif op == ADD:
            a, b = stack.pop(), stack.pop()
            stack.append((a + b) & WORD_MASK)
        elif op == MUL:
            a, b = stack.pop(), stack.pop()
            stack.append((a * b) & WORD_MASK)
        elif op == SUB:
            a, b = stack.pop(), stack.pop()
            stack.append((a - b) & WORD_MASK)
        elif op == DIV:
            a, b = stack.pop(), stack.pop()
            stack.append(a // b if b else 0)
        elif op == MOD:
            a, b = stack.pop(), stack.pop()
            stack.append(a % b if b else 0)
        elif op == LT:
            a, b = stack.pop(), stack.pop()
            stack.append(1 if a < b else 0)
        elif op == GT:
            a, b = stack.pop(), stack.pop()
            stack.append(1 if a > b else 0)
        elif op == EQ:
            a, b = stack.pop(), stack.pop()
            stack.append(1 if a == b else 0)
        elif op == ISZERO:
            stack.append(1 if stack.pop() == 0 else 0)
        elif op == AND:
            stack.append(stack.pop() & stack.pop())
        elif op == OR:
            stack.append(stack.pop() | stack.pop())
        elif op == XOR:
            stack.append(stack.pop() ^ stack.pop())
        elif op == NOT:
            stack.append(stack.pop() ^ WORD_MASK)
        elif op == KECCAK256:
            offset, size = stack.pop(), stack.pop()
            expand(offset, size)
            stack.append(int.from_bytes(keccak256(bytes(memory[offset:offset + size])), "big"))
        elif op == ADDRESS:
            stack.append(address_int(callee))
        elif op == BALANCE:
            stack.append(journal.get_balance(address_hex(stack.pop())))
        elif op == CALLER:
            stack.append(address_int(caller))
        elif op == CALLVALUE:
            stack.append(value)
        elif op == CALLDATALOAD:
            offset = stack.pop()
            chunk = data[offset:offset + 32] if offset < len(data) else b""
            stack.append(int.from_bytes(chunk.ljust(32, b"\x00"), "big"))
        elif op == CALLDATASIZE:
            stack.append(len(data))
        elif op == TIMESTAMP:
            stack.append(block.timestamp)
        elif op == NUMBER:
            stack.append(block.number)
        elif op == GASLIMIT:
            stack.append(block.gas_limit)
        elif op == BASEFEE:
            stack.append(block.base_fee)
        elif op == MLOAD:
            offset = stack.pop()
            expand(offset, 32)
            stack.append(int.from_bytes(memory[offset:offset + 32], "big"))
        elif op == MSTORE:
            offset, val = stack.pop(), stack.pop()
            expand(offset, 32)
            memory[offset:offset + 32] = val.to_bytes(32, "big")
        elif op == SLOAD:
            stack.append(journal.sload(callee, stack.pop()))
        elif op == SSTORE:
            key, val = stack.pop(), stack.pop()
            journal.sstore(callee, key, val)
        elif op == TLOAD:
            stack.append(journal.transient.get((callee, stack.pop()), 0))
        elif op == TSTORE:
            key, val = stack.pop(), stack.pop()
            journal.transient[(callee, key)] = val
        elif op == JUMP:
            idx = pc_index[stack.pop()]
        elif op == JUMPI:
            dest, cond = stack.pop(), stack.pop()
            if cond:
                idx = pc_index[dest]
        elif op == PC:
            stack.append(dop.pc)
        elif op == MSIZE:
            stack.append(len(memory))
        elif op == GAS:
            stack.append(remaining)
        elif op == JUMPDEST:
            pass
        elif op == RETURN or op == REVERT:
            offset, size = stack.pop(), stack.pop()
            expand(offset, size)
            rdata = bytes(memory[offset:offset + size])
            record(dop.pc, op, cost)
            halt = Halt.Return if op == RETURN else Halt.Revert
            break
        elif op == CALL:
            gas_req, to_int, call_value = stack.pop(), stack.pop(), stack.pop()
            in_off, in_size = stack.pop(), stack.pop()
            out_off, out_size = stack.pop(), stack.pop()
            expand(in_off, in_size)
            expand(out_off, out_size)
            to_addr = address_hex(to_int)
            record(dop.pc, op, cost)  # CALL step precedes sub-frame steps
            call_step = trace[-1]
            if depth + 1 > CALL_DEPTH_LIMIT:
                coverage.add(("halt", CALL, Halt.DepthExceeded.name))
                stack.append(0)
                continue
            if call_value > journal.get_balance(callee):
                stack.append(0)
                continue
            forwarded = min(gas_req, remaining)
            sub_snap = journal.snapshot()
            if call_value:
                journal.add_balance(callee, -call_value)
                journal.add_balance(to_addr, call_value)
            sub_code = journal.world.account(to_addr).code
            sub_halt, sub_rdata, sub_used = _run_frame(
                sub_code, callee, to_addr, call_value, bytes(memory[in_off:in_off + in_size]),
                forwarded, depth + 1, block, journal, trace, coverage, world)
            remaining -= sub_used
            # the step's cost covers the gas the sub-frame consumed, keeping
            # gasBefore(next) = gasBefore(cur) - gasCost(cur) within a frame
            call_step.gas_cost = cost + sub_used
            if sub_halt in FAILURE_HALTS:
                journal.restore(sub_snap)
                stack.append(0)
            else:
                stack.append(1)
                if out_size and sub_rdata:
                    n = min(out_size, len(sub_rdata))
                    memory[out_off:out_off + n] = sub_rdata[:n]
            continue
        else:  # pragma: no cover - table and dispatch kept in sync
            record(dop.pc, op, 0)
            halt = Halt.InvalidOpcode
            break

        record(dop.pc, op, cost)

    gas_used = gas - remaining
    if halt in FAILURE_HALTS:
        journal.restore(snap)
        if halt is Halt.OutOfGas:
            gas_used = gas
    if halt is not Halt.Return and halt is not Halt.Revert:
        rdata = b""
    if last_op is not None:
        coverage.add(("halt", last_op, halt.name))
    return halt, rdata, gas_used


def _gas_cost(op, stack, memory):
    """Scheduled cost; None signals the memory cap was exceeded."""
    if op == JUMPDEST:
        return 1
    if op == SLOAD or op == TLOAD:
        return 20
    if op == SSTORE or op == TSTORE:
        return 100
    if op == MLOAD or op == MSTORE:
        offset = stack[-1]
        if offset + 32 > MEMORY_CAP:
            return None
        end = ((offset + 32 + 31) // 32) * 32
        new_words = max(0, (end - len(memory)) // 32)
        return 3 + 3 * new_words
    if op == KECCAK256:
        offset, size = stack[-1], stack[-2]
        if size and offset + size > MEMORY_CAP:
            return None
        return 30 + 6 * ((size + 31) // 32)
    if op == CALL:
        in_off, in_size = stack[-4], stack[-5]
        out_off, out_size = stack[-6], stack[-7]
        if (in_size and in_off + in_size > MEMORY_CAP) or \
           (out_size and out_off + out_size > MEMORY_CAP):
            return None
        return 100
    if op == RETURN or op == REVERT:
        offset, size = stack[-1], stack[-2]
        if size and offset + size > MEMORY_CAP:
            return None
        return 3
    return 3
