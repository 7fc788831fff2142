"""Context-aware call generation: interval slicing plus per-kind rules.

Quantities are not drawn uniformly over the 256-bit space; the space is
sliced into intervals anchored on live context values (base fee, block gas
limit, sender balance, head number) and an interval is picked uniformly
first. This keeps boundary-straddling values (e.g. gas just above the block
limit) as likely as ordinary ones.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .methods import REGISTRY
from .types import (ContextView, MethodSchema, Param, ParamKind, QuantityRole,
                    RpcCall, UnsupportedMethod, ValueKind)

WORD_BOUND = 1 << 256
GAS_FLOOR = 21000  # minimum transaction cost; Gas-role interval boundary
_UNBOUNDED_SPAN = 1 << 64  # sampling width used inside an unbounded interval


@dataclass(frozen=True)
class Interval:
    lo: int
    hi: int | None  # None = unbounded (conceptually 2**256)

    @property
    def bounded_hi(self) -> int:
        return WORD_BOUND if self.hi is None else self.hi

    def __contains__(self, value: int) -> bool:
        return self.lo <= value < self.bounded_hi

    @property
    def empty(self) -> bool:
        return self.lo >= self.bounded_hi


def slice_quantity_intervals(role: QuantityRole, ctx: ContextView) -> list[Interval]:
    """Disjoint intervals covering [0, 2**256) for the given role."""
    if role is QuantityRole.Fee:
        bf = ctx.base_fee
        return [Interval(0, bf), Interval(bf, 10 * bf), Interval(10 * bf, None)]
    if role is QuantityRole.Gas:
        gl = ctx.block_gas_limit
        return [Interval(0, GAS_FLOOR), Interval(GAS_FLOOR, gl),
                Interval(gl, 10 * gl), Interval(10 * gl, None)]
    if role is QuantityRole.Value:
        return [Interval(0, 1), Interval(1, ctx.sender_balance),
                Interval(ctx.sender_balance, None)]
    if role is QuantityRole.Index:
        return [Interval(0, ctx.head_number + 1),
                Interval(ctx.head_number + 1, None)]
    return [Interval(0, None)]


@dataclass(frozen=True)
class GenerationConfig:
    """Probability knobs; values are defaults, not derived constants."""
    numeric_reroll: float = 0.5
    optional_include: float = 0.7
    state_override: float = 0.3
    known_address: float = 0.5
    recorded_hash: float = 0.8
    max_data_bytes: int = 256
    max_float_array: int = 8


def _sample_interval(iv: Interval, rng: random.Random) -> int:
    hi = iv.bounded_hi if iv.hi is not None else min(iv.lo + _UNBOUNDED_SPAN,
                                                     WORD_BOUND)
    return rng.randrange(iv.lo, hi)


def sample_quantity(role: QuantityRole, ctx: ContextView,
                    rng: random.Random) -> int:
    intervals = [iv for iv in slice_quantity_intervals(role, ctx) if not iv.empty]
    return _sample_interval(rng.choice(intervals), rng)


def _fresh_address(rng: random.Random) -> str:
    return "0x" + rng.randbytes(20).hex()


def _sample_address(ctx: ContextView, rng: random.Random,
                    cfg: GenerationConfig) -> str:
    if ctx.known_addresses and rng.random() < cfg.known_address:
        return rng.choice(ctx.known_addresses)
    return _fresh_address(rng)


def _sample_block_tag(ctx: ContextView, rng: random.Random):
    choices: list = [ctx.head_number, 0, ctx.head_number + 10,
                     "latest", "earliest", "pending"]
    if ctx.head_number > 0:
        choices.insert(1, ctx.head_number - 1)
    return rng.choice(choices)


_TX_NUMERIC_ROLES = (("gas", QuantityRole.Gas), ("value", QuantityRole.Value),
                     ("maxFeePerGas", QuantityRole.Fee))


def _sample_tx_object(ctx: ContextView, rng: random.Random,
                      cfg: GenerationConfig) -> dict:
    if ctx.recorded_txs:
        tx = rng.choice(ctx.recorded_txs)
        obj = {"from": tx.sender, "to": tx.to, "gas": tx.gas_limit,
               "value": tx.value, "data": tx.data,
               "maxFeePerGas": tx.max_fee_per_gas}
        for key, role in _TX_NUMERIC_ROLES:
            if rng.random() < cfg.numeric_reroll:
                obj[key] = sample_quantity(role, ctx, rng)
        return obj
    return {"from": _sample_address(ctx, rng, cfg),
            "to": _sample_address(ctx, rng, cfg),
            "gas": sample_quantity(QuantityRole.Gas, ctx, rng),
            "value": sample_quantity(QuantityRole.Value, ctx, rng),
            "data": rng.randbytes(rng.randrange(0, 65)),
            "maxFeePerGas": sample_quantity(QuantityRole.Fee, ctx, rng)}


def _sample_state_override(ctx: ContextView, rng: random.Random,
                           cfg: GenerationConfig) -> dict:
    if not ctx.known_addresses or rng.random() >= cfg.state_override:
        return {}
    addr = rng.choice(ctx.known_addresses)
    entry: dict = {}
    roll = rng.randrange(3)
    if roll != 1:
        entry["balance"] = rng.randrange(1 << 64)
    if roll != 0:
        entry["code"] = rng.randbytes(rng.randrange(1, 16))
    return {addr: entry}


def _sample_param(param: Param, ctx: ContextView, rng: random.Random,
                  cfg: GenerationConfig):
    kind = param.kind.kind
    if kind is ValueKind.Quantity:
        return sample_quantity(param.kind.role, ctx, rng)
    if kind is ValueKind.Address:
        return _sample_address(ctx, rng, cfg)
    if kind is ValueKind.DataBytes:
        if param.name == "transactionHash":
            # transaction parameters draw from recorded transactions
            if ctx.recorded_txs and rng.random() < cfg.recorded_hash:
                return rng.choice(ctx.recorded_txs).hash
            return rng.randbytes(32)
        return rng.randbytes(rng.randrange(0, cfg.max_data_bytes + 1))
    if kind is ValueKind.Boolean:
        return rng.random() < 0.5
    if kind is ValueKind.BlockTag:
        return _sample_block_tag(ctx, rng)
    if kind is ValueKind.TransactionObject:
        return _sample_tx_object(ctx, rng, cfg)
    if kind is ValueKind.StateOverride:
        return _sample_state_override(ctx, rng, cfg)
    if kind is ValueKind.FloatArray:
        return [round(rng.uniform(0, 100), 4)
                for _ in range(rng.randrange(0, cfg.max_float_array + 1))]
    raise UnsupportedMethod(f"no generation rule for {kind}")


def generate_call(schema: MethodSchema, ctx: ContextView, rng: random.Random,
                  call_id: int = 1,
                  cfg: GenerationConfig = GenerationConfig()) -> RpcCall:
    """One random call for the schema; positional params, trailing optionals
    dropped together so the wire arity stays valid."""
    if schema.name not in REGISTRY:
        raise UnsupportedMethod(schema.name)
    params = []
    for param in schema.params:
        if param.optional and rng.random() >= cfg.optional_include:
            break  # positional encoding: omission truncates the tail
        params.append(_sample_param(param, ctx, rng, cfg))
    return RpcCall(id=call_id, method=schema.name, params=tuple(params))
