"""Method schema registry: one annotation module per supported method."""

from ..types import MethodSchema
from . import (debug_trace_transaction, eth_call, eth_estimate_gas,
               eth_fee_history, eth_get_balance, eth_get_block_by_number,
               eth_get_code, eth_get_storage_at,
               eth_get_transaction_by_block_number_and_index,
               eth_get_transaction_by_hash)

_MODULES = (
    eth_get_balance,
    eth_get_code,
    eth_get_storage_at,
    eth_get_block_by_number,
    eth_get_transaction_by_hash,
    eth_get_transaction_by_block_number_and_index,
    eth_call,
    eth_estimate_gas,
    eth_fee_history,
    debug_trace_transaction,
)

REGISTRY: dict[str, MethodSchema] = {m.SCHEMA.name: m.SCHEMA for m in _MODULES}

SUPPORTED_METHODS: tuple[str, ...] = tuple(m.SCHEMA.name for m in _MODULES)
