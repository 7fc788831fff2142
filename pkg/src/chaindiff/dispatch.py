"""In-process RPC dispatch: reference semantics plus per-client fault transforms.

Every client shares the canonical chain. The reference response is computed
from chain state; a variant client's response is the reference response run
through its fault transforms in order. Transforms are pure functions of
(reference response, call, chain view): some rewrite the response value,
others recompute it under perturbed semantics. Nothing here mutates
canonical state.
"""

from __future__ import annotations

import copy

from . import evm
from .chain import (UNLIMITED_GAS_CAP, Block, ClientHandle, FaultId, Network,
                    ReceiptStatus, Transaction)
from .rpc import (METHOD_NOT_FOUND, REGISTRY, ContextView, RpcCall,
                  RpcResponse, data_hex, quantity_hex)

EXECUTION_ERROR = -32000


def context_view(network: Network, sender: str | None = None) -> ContextView:
    """Immutable generation-time snapshot of the network."""
    funded = sorted(network.config.accounts)
    contracts = sorted(addr for addr, acct in network.world.accounts.items()
                       if len(acct.code.data))
    if sender is None:
        sender = funded[0] if funded else None
    recorded = tuple(tx for block in network.chain
                     for tx in block.transactions if tx.to is not None)
    return ContextView(
        head_number=network.head.context.number,
        head_hash=network.head.hash,
        base_fee=network.config.base_fee,
        block_gas_limit=network.config.block_gas_limit,
        known_addresses=tuple(contracts + [a for a in funded if a not in contracts]),
        recorded_txs=recorded,
        sender_balance=network.world.account(sender).balance if sender else 0,
    )


def _resolve_tag(network: Network, tag) -> int | None:
    if tag in ("latest", "pending"):
        return network.head.context.number
    if tag == "earliest":
        return 0
    if isinstance(tag, int) and 0 <= tag < len(network.chain):
        return tag
    return None


def _unknown_block() -> RpcResponse:
    return RpcResponse.fail(EXECUTION_ERROR, "unknown block")


def _tx_json(block: Block, index: int, tx: Transaction) -> dict:
    return {
        "hash": data_hex(tx.hash),
        "blockNumber": quantity_hex(block.context.number),
        "transactionIndex": quantity_hex(index),
        "from": tx.sender,
        "to": tx.to,
        "value": quantity_hex(tx.value),
        "gas": quantity_hex(tx.gas_limit),
        "maxFeePerGas": quantity_hex(tx.max_fee_per_gas),
        "input": data_hex(tx.data),
        "nonce": quantity_hex(tx.nonce),
    }


def _block_json(network: Network, block: Block, full: bool) -> dict:
    gas_used = sum(r.gas_used for r in block.receipts)
    if full:
        txs = [_tx_json(block, i, tx) for i, tx in enumerate(block.transactions)]
    else:
        txs = [data_hex(tx.hash) for tx in block.transactions]
    return {
        "number": quantity_hex(block.context.number),
        "hash": data_hex(block.hash),
        "parentHash": data_hex(block.context.parent_hash),
        "timestamp": quantity_hex(block.context.timestamp),
        "gasLimit": quantity_hex(block.context.gas_limit),
        "gasUsed": quantity_hex(gas_used),
        "baseFeePerGas": quantity_hex(block.context.base_fee),
        "transactions": txs,
    }


_HALT_MESSAGES = {
    evm.Halt.Revert: "execution reverted",
    evm.Halt.OutOfGas: "out of gas",
}


def _run_call(network: Network, tx_obj: dict, block_number: int,
              gas_cap: int, state_override: dict | None = None) -> RpcResponse:
    """Simulate a call transaction against the state at a block; read-only."""
    world = network.state_at(block_number).copy()
    for addr, entry in (state_override or {}).items():
        acct = world.ensure(addr)
        if "balance" in entry:
            acct.balance = entry["balance"]
        if "code" in entry:
            acct.code = evm.OpcodeSeq(entry["code"])
    to = tx_obj.get("to")
    if to is None or to not in world.accounts or not len(world.account(to).code.data):
        return RpcResponse.ok("0x")  # no code to run
    block = network.chain[block_number].context
    frame_gas = max(0, gas_cap - evm.TX_BASE_GAS)
    ctx = evm.ExecContext(
        caller=tx_obj.get("from", evm.address_hex(0)),
        callee=to,
        call_value=tx_obj.get("value", 0),
        call_data=tx_obj.get("data", b""),
        block=block,
        gas_limit=frame_gas,
        gas_limit_override=frame_gas > block.gas_limit,
    )
    result = evm.execute(world.account(to).code, ctx, world)
    if result.halt in evm.FAILURE_HALTS:
        message = _HALT_MESSAGES.get(result.halt,
                                     f"execution failed: {result.halt.name}")
        return RpcResponse.fail(EXECUTION_ERROR, message)
    return RpcResponse.ok(data_hex(result.return_data))


def _eth_call(network: Network, params: tuple,
              gas_cap_limit: int) -> RpcResponse:
    tx_obj = params[0]
    number = _resolve_tag(network, params[1] if len(params) > 1 else "latest")
    if number is None:
        return _unknown_block()
    override = params[2] if len(params) > 2 else None
    requested = tx_obj.get("gas", network.config.block_gas_limit)
    return _run_call(network, tx_obj, number, min(requested, gas_cap_limit),
                     override)


def _eth_estimate_gas(network: Network, params: tuple,
                      ignore_fee_param: bool) -> RpcResponse:
    tx_obj = dict(params[0])
    if ignore_fee_param:
        tx_obj.pop("maxFeePerGas", None)
    number = _resolve_tag(network, params[1] if len(params) > 1 else "latest")
    if number is None:
        return _unknown_block()
    if ("maxFeePerGas" in tx_obj
            and tx_obj["maxFeePerGas"] < network.chain[number].context.base_fee):
        return RpcResponse.fail(EXECUTION_ERROR,
                                "max fee per gas below block base fee")
    world = network.state_at(number).copy()
    to = tx_obj.get("to")
    if to is None or to not in world.accounts or not len(world.account(to).code.data):
        return RpcResponse.ok(quantity_hex(evm.TX_BASE_GAS))
    block = network.chain[number].context
    ctx = evm.ExecContext(
        caller=tx_obj.get("from", evm.address_hex(0)),
        callee=to,
        call_value=tx_obj.get("value", 0),
        call_data=tx_obj.get("data", b""),
        block=block,
        gas_limit=max(0, block.gas_limit - evm.TX_BASE_GAS),
    )
    result = evm.execute(world.account(to).code, ctx, world)
    if result.halt in evm.FAILURE_HALTS:
        message = _HALT_MESSAGES.get(result.halt,
                                     f"execution failed: {result.halt.name}")
        return RpcResponse.fail(EXECUTION_ERROR, message)
    return RpcResponse.ok(quantity_hex(evm.TX_BASE_GAS + result.gas_used))


def _fee_history(network: Network, params: tuple) -> RpcResponse:
    count, newest_tag, percentiles = params[0], params[1], params[2]
    newest = _resolve_tag(network, newest_tag)
    if newest is None:
        return _unknown_block()
    if count < 1:
        return RpcResponse.fail(EXECUTION_ERROR, "block count must be >= 1")
    count = min(count, newest + 1, 1024)
    oldest = newest - count + 1
    blocks = network.chain[oldest:newest + 1]
    base_fees = [quantity_hex(b.context.base_fee) for b in blocks]
    base_fees.append(quantity_hex(network.config.base_fee))  # next block
    ratios = [sum(r.gas_used for r in b.receipts) / b.context.gas_limit
              for b in blocks]
    result = {"oldestBlock": quantity_hex(oldest),
              "baseFeePerGas": base_fees,
              "gasUsedRatio": ratios}
    if percentiles:
        result["reward"] = [["0x0"] * len(percentiles) for _ in blocks]
    return RpcResponse.ok(result)


def _trace_transaction(network: Network, tx_hash: bytes) -> RpcResponse:
    found = network.find_transaction(tx_hash)
    if found is None:
        return RpcResponse.fail(EXECUTION_ERROR, "transaction not found")
    block, index, tx = found
    receipt = block.receipts[index]
    if tx.is_deployment:
        return RpcResponse.ok({"gasUsed": quantity_hex(receipt.gas_used),
                               "failed": receipt.status is ReceiptStatus.Failed,
                               "structLogs": []})
    pre_world = network.pre_state_of_block(block.context.number).copy()
    from . import chain as chain_mod
    result = chain_mod.execute_transaction(tx, pre_world, block.context)
    logs = [{
        "pc": step.pc,
        "op": evm.opcode_name(step.opcode),
        "gas": step.gas_before,
        "gasCost": step.gas_cost,
        "depth": step.frame_depth,
        "stack": [quantity_hex(v) for v in step.stack_top],
    } for step in result.trace]
    return RpcResponse.ok({
        "gasUsed": quantity_hex(evm.TX_BASE_GAS + result.gas_used),
        "failed": result.halt in evm.FAILURE_HALTS,
        "structLogs": logs,
    })


def reference_response(network: Network, call: RpcCall) -> RpcResponse:
    method, params = call.method, call.params
    if method == "eth_getBalance":
        number = _resolve_tag(network, params[1])
        if number is None:
            return _unknown_block()
        acct = network.state_at(number).accounts.get(params[0])
        return RpcResponse.ok(quantity_hex(acct.balance if acct else 0))
    if method == "eth_getCode":
        number = _resolve_tag(network, params[1])
        if number is None:
            return _unknown_block()
        acct = network.state_at(number).accounts.get(params[0])
        return RpcResponse.ok(data_hex(acct.code.data) if acct else "0x")
    if method == "eth_getStorageAt":
        number = _resolve_tag(network, params[2])
        if number is None:
            return _unknown_block()
        acct = network.state_at(number).accounts.get(params[0])
        value = acct.storage.get(params[1], 0) if acct else 0
        return RpcResponse.ok("0x" + value.to_bytes(32, "big").hex())
    if method == "eth_getBlockByNumber":
        number = _resolve_tag(network, params[0])
        if number is None:
            return RpcResponse.ok(None)
        return RpcResponse.ok(_block_json(network, network.chain[number],
                                          bool(params[1])))
    if method == "eth_getTransactionByHash":
        found = network.find_transaction(params[0])
        if found is None:
            return RpcResponse.ok(None)
        block, index, tx = found
        return RpcResponse.ok(_tx_json(block, index, tx))
    if method == "eth_getTransactionByBlockNumberAndIndex":
        return _tx_by_index(network, params[0], params[1])
    if method == "eth_call":
        return _eth_call(network, params, network.config.block_gas_limit)
    if method == "eth_estimateGas":
        return _eth_estimate_gas(network, params, ignore_fee_param=False)
    if method == "eth_feeHistory":
        return _fee_history(network, params)
    if method == "debug_traceTransaction":
        return _trace_transaction(network, params[0])
    return RpcResponse.fail(METHOD_NOT_FOUND, f"method not found: {method}")


def _tx_by_index(network: Network, tag, index: int) -> RpcResponse:
    number = _resolve_tag(network, tag)
    if number is None:
        return RpcResponse.ok(None)
    block = network.chain[number]
    if index >= len(block.transactions):
        return RpcResponse.ok(None)
    return RpcResponse.ok(_tx_json(block, index, block.transactions[index]))


# --- fault transforms ---------------------------------------------------------

def _apply_fault(fault_id: FaultId, reference: RpcResponse, call: RpcCall,
                 network: Network) -> RpcResponse:
    method = call.method
    if fault_id is FaultId.F1_UnlimitedEthCallGas and method == "eth_call":
        return _eth_call(network, call.params, UNLIMITED_GAS_CAP)
    if fault_id is FaultId.F2_NullEmptyCode and method == "eth_getCode":
        if reference.has_result and reference.result == "0x":
            return RpcResponse.ok(None)
        return reference
    if fault_id is FaultId.F3_EstimateIgnoresFeeParam and method == "eth_estimateGas":
        return _eth_estimate_gas(network, call.params, ignore_fee_param=True)
    if fault_id is FaultId.F4_TraceWrongGasCost and method == "debug_traceTransaction":
        return _rewrite_logs(reference, "SSTORE", lambda log: log.update(gasCost=20000))
    if fault_id is FaultId.F5_TraceWrongBasefee and method == "debug_traceTransaction":
        def zero_top(log):
            if log["stack"]:
                log["stack"][0] = "0x0"
        return _rewrite_logs(reference, "BASEFEE", zero_top)
    if fault_id is FaultId.F6_TxIndexOffByOne and method == "eth_getTransactionByBlockNumberAndIndex":
        return _tx_by_index(network, call.params[0], call.params[1] + 1)
    return reference


def _rewrite_logs(reference: RpcResponse, op_name: str, edit) -> RpcResponse:
    if not reference.has_result:
        return reference
    result = copy.deepcopy(reference.result)
    for log in result["structLogs"]:
        if log["op"] == op_name:
            edit(log)
    return RpcResponse.ok(result)


def dispatch(client: ClientHandle, network: Network, call: RpcCall) -> RpcResponse:
    if call.method not in REGISTRY:
        return RpcResponse.fail(METHOD_NOT_FOUND,
                                f"method not found: {call.method}")
    response = reference_response(network, call)
    for fault in client.faults:
        response = _apply_fault(fault.fault_id, response, call, network)
    return response
