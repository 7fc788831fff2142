"""In-process test blockchain and the client registry.

One reference client plus N fault-injected variants share a single canonical
chain. Faults are deterministic transforms applied when computing an RPC
response for a variant client; they never touch canonical state, so every
divergence the oracle finds is ground-truth labeled.

Fault behavioral contracts (bit-exact):
  F1  eth_call executes with gas cap 2**63-1 instead of the block gas limit.
  F2  eth_getCode of an empty-code account returns JSON null instead of "0x".
  F3  eth_estimateGas drops maxFeePerGas from the transaction object before
      validation, so the below-base-fee rejection never fires.
  F4  debug_traceTransaction reports gasCost 20000 for every SSTORE step.
  F5  debug_traceTransaction reports 0 as the BASEFEE step's top stack entry.
  F6  eth_getTransactionByBlockNumberAndIndex reads index+1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum

from . import evm
from .evm import (Account, Address, BlockContext, ExecContext, Halt,
                  OpcodeSeq, WorldState, Word, address_hex, word_hex)

UNLIMITED_GAS_CAP = (1 << 63) - 1


class ChainError(Exception):
    pass


class DuplicateClientId(ChainError):
    pass


class ZeroClients(ChainError):
    pass


class NonceMismatch(ChainError):
    pass


class InsufficientFunds(ChainError):
    pass


class FeeBelowBase(ChainError):
    pass


class FaultId(Enum):
    F1_UnlimitedEthCallGas = "F1"
    F2_NullEmptyCode = "F2"
    F3_EstimateIgnoresFeeParam = "F3"
    F4_TraceWrongGasCost = "F4"
    F5_TraceWrongBasefee = "F5"
    F6_TxIndexOffByOne = "F6"


@dataclass(frozen=True)
class FaultSpec:
    fault_id: FaultId
    params: tuple = ()


@dataclass
class ClientHandle:
    client_id: str
    faults: tuple[FaultSpec, ...] = ()

    @property
    def is_reference(self) -> bool:
        return not self.faults


@dataclass(frozen=True)
class Transaction:
    sender: Address
    to: Address | None  # None = deployment
    value: Word
    data: bytes
    gas_limit: int
    max_fee_per_gas: Word
    nonce: int

    @property
    def hash(self) -> bytes:
        h = hashlib.sha256()
        to = self.to if self.to is not None else ""
        h.update(f"{self.sender}|{to}|{self.value}|{self.data.hex()}|"
                 f"{self.gas_limit}|{self.max_fee_per_gas}|{self.nonce}".encode())
        return h.digest()

    @property
    def is_deployment(self) -> bool:
        return self.to is None


class ReceiptStatus(Enum):
    Success = 1
    Failed = 0


@dataclass
class Receipt:
    status: ReceiptStatus
    gas_used: int
    contract_address: Address | None = None


@dataclass
class Block:
    context: BlockContext
    transactions: list[Transaction]
    receipts: list[Receipt]
    hash: bytes


@dataclass
class NetworkConfig:
    clients: list[ClientHandle] = field(default_factory=list)
    accounts: dict[Address, Word] = field(default_factory=dict)
    block_gas_limit: int = 30_000_000
    base_fee: Word = 1_000_000_000
    genesis_timestamp: int = 1_700_000_000
    block_interval: int = 12


def contract_address(deployer: Address, nonce: int) -> Address:
    digest = hashlib.sha256(bytes.fromhex(deployer[2:]) + nonce.to_bytes(8, "big")).digest()
    return address_hex(int.from_bytes(digest[-20:], "big"))


def _block_hash(context: BlockContext, txs: list[Transaction]) -> bytes:
    h = hashlib.sha256()
    h.update(f"{context.number}|{context.timestamp}|{context.base_fee}|"
             f"{context.gas_limit}|{context.parent_hash.hex()}".encode())
    for tx in txs:
        h.update(tx.hash)
    return h.digest()


class Network:
    """Canonical chain plus per-block state snapshots.

    Single-writer: block production is serialized; ``dispatch`` is read-only.
    One transaction per block.
    """

    def __init__(self, config: NetworkConfig):
        if not config.clients:
            raise ZeroClients("at least one client required")
        ids = [c.client_id for c in config.clients]
        if len(set(ids)) != len(ids):
            raise DuplicateClientId(ids)
        refs = [c for c in config.clients if c.is_reference]
        if not refs:
            raise ChainError("at least one fault-free reference client required")
        self.config = config
        self.clients = list(config.clients)
        self.world = WorldState({
            addr: Account(balance=bal) for addr, bal in config.accounts.items()
        })
        genesis_ctx = BlockContext(
            number=0, timestamp=config.genesis_timestamp,
            base_fee=config.base_fee, gas_limit=config.block_gas_limit,
            parent_hash=b"\x00" * 32)
        genesis = Block(genesis_ctx, [], [], _block_hash(genesis_ctx, []))
        self.chain: list[Block] = [genesis]
        # snapshots[i] = world after block i (index-aligned with chain)
        self.snapshots: list[WorldState] = [self.world.copy()]

    @property
    def head(self) -> Block:
        return self.chain[-1]

    def client(self, client_id: str) -> ClientHandle:
        for c in self.clients:
            if c.client_id == client_id:
                return c
        raise ChainError(f"unknown client {client_id!r}")

    def clone(self) -> "Network":
        import copy
        return copy.deepcopy(self)

    def _next_context(self) -> BlockContext:
        head = self.head.context
        return BlockContext(
            number=head.number + 1,
            timestamp=head.timestamp + self.config.block_interval,
            base_fee=self.config.base_fee,
            gas_limit=self.config.block_gas_limit,
            parent_hash=self.head.hash)

    def submit_transaction(self, tx: Transaction) -> Receipt:
        sender = self.world.account(tx.sender)
        if tx.nonce != sender.nonce:
            raise NonceMismatch(f"expected nonce {sender.nonce}, got {tx.nonce}")
        if tx.max_fee_per_gas < self.config.base_fee:
            raise FeeBelowBase(word_hex(tx.max_fee_per_gas))
        if sender.balance < tx.value + tx.gas_limit * tx.max_fee_per_gas:
            raise InsufficientFunds(tx.sender)

        context = self._next_context()
        receipt = self._apply(self.world, tx, context)
        block = Block(context, [tx], [receipt], _block_hash(context, [tx]))
        self.chain.append(block)
        self.snapshots.append(self.world.copy())
        return receipt

    def _apply(self, world: WorldState, tx: Transaction, context: BlockContext) -> Receipt:
        """Execute ``tx`` against ``world`` in place; returns the receipt."""
        sender = world.ensure(tx.sender)
        sender.nonce += 1
        if tx.is_deployment:
            # deployment data is installed verbatim as account code
            addr = contract_address(tx.sender, tx.nonce)
            acct = world.ensure(addr)
            acct.code = OpcodeSeq(tx.data)
            gas_used = evm.TX_BASE_GAS
            self._charge(world, tx.sender, gas_used, context.base_fee)
            return Receipt(ReceiptStatus.Success, gas_used, addr)

        result = execute_transaction(tx, world, context)
        gas_used = evm.TX_BASE_GAS + result.gas_used
        self._charge(world, tx.sender, gas_used, context.base_fee)
        if result.halt in evm.FAILURE_HALTS:
            return Receipt(ReceiptStatus.Failed, gas_used)
        for addr, delta in result.state_delta.items():
            acct = world.ensure(addr)
            acct.balance = (acct.balance + delta.balance_delta) & evm.WORD_MASK
            acct.storage.update(delta.storage_writes)
        if tx.value:
            world.ensure(tx.sender).balance -= tx.value
            world.ensure(tx.to).balance += tx.value
        return Receipt(ReceiptStatus.Success, gas_used)

    @staticmethod
    def _charge(world: WorldState, sender: Address, gas_used: int, base_fee: Word):
        world.ensure(sender).balance -= gas_used * base_fee

    def deploy_code(self, seq: OpcodeSeq, deployer: Address) -> Address:
        nonce = self.world.account(deployer).nonce
        tx = Transaction(deployer, None, 0, seq.data, evm.TX_BASE_GAS,
                         self.config.base_fee, nonce)
        receipt = self.submit_transaction(tx)
        return receipt.contract_address

    # -- read-side helpers shared with the RPC layer -------------------------

    def block_by_number(self, number: int) -> Block | None:
        if 0 <= number < len(self.chain):
            return self.chain[number]
        return None

    def state_at(self, number: int) -> WorldState | None:
        if 0 <= number < len(self.chain):
            return self.snapshots[number]
        return None

    def pre_state_of_block(self, number: int) -> WorldState | None:
        if 1 <= number < len(self.chain):
            return self.snapshots[number - 1]
        return None

    def find_transaction(self, tx_hash: bytes):
        """(block, index, tx) for a canonical transaction hash, or None."""
        for block in self.chain:
            for i, tx in enumerate(block.transactions):
                if tx.hash == tx_hash:
                    return block, i, tx
        return None


def execute_transaction(tx: Transaction, world: WorldState,
                        context: BlockContext) -> evm.ExecResult:
    """Run a call transaction's code with the gas cap the chain enforces."""
    code = world.account(tx.to).code
    gas_cap = min(tx.gas_limit, context.gas_limit)
    frame_gas = max(0, gas_cap - evm.TX_BASE_GAS)
    ctx = ExecContext(caller=tx.sender, callee=tx.to, call_value=tx.value,
                      call_data=tx.data, block=context, gas_limit=frame_gas)
    return evm.execute(code, ctx, world)


def init_network(config: NetworkConfig) -> Network:
    return Network(config)
