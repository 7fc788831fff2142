"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import random

import pytest

from chaindiff import evm
from chaindiff.chain import (ClientHandle, FaultId, FaultSpec, Network,
                             NetworkConfig, Transaction)

FUNDING = 10 ** 24

ALICE = evm.address_hex(0xA11CE)
BOB = evm.address_hex(0xB0B)


def make_network(faults: dict[str, tuple[str, ...]] | None = None,
                 accounts: dict[str, int] | None = None,
                 block_gas_limit: int = 30_000_000,
                 base_fee: int = 1_000_000_000) -> Network:
    """Network with a reference client plus optional fault variants."""
    by_name = {f.value: f for f in FaultId}
    clients = [ClientHandle("ref", ())]
    for client_id, names in (faults or {}).items():
        clients.append(ClientHandle(
            client_id, tuple(FaultSpec(by_name[n]) for n in names)))
    config = NetworkConfig(
        clients=clients,
        accounts=accounts if accounts is not None else {ALICE: FUNDING,
                                                        BOB: FUNDING},
        block_gas_limit=block_gas_limit,
        base_fee=base_fee,
    )
    return Network(config)


def run_code(code: bytes | evm.OpcodeSeq, gas: int = 100_000,
             data: bytes = b"", value: int = 0,
             world: evm.WorldState | None = None,
             block: evm.BlockContext | None = None) -> evm.ExecResult:
    """Execute code at a fixed callee with a plain context."""
    if isinstance(code, bytes):
        code = evm.OpcodeSeq(code)
    world = world or evm.WorldState()
    block = block or evm.BlockContext()
    ctx = evm.ExecContext(caller=ALICE, callee=BOB, call_value=value,
                          call_data=data, block=block, gas_limit=gas)
    return evm.execute(code, ctx, world)


def call_tx(network: Network, sender: str, to: str, data: bytes = b"",
            value: int = 0, gas: int = 1_000_000) -> Transaction:
    return Transaction(
        sender=sender, to=to, value=value, data=data,
        gas_limit=min(gas, network.config.block_gas_limit),
        max_fee_per_gas=network.config.base_fee,
        nonce=network.world.account(sender).nonce)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
