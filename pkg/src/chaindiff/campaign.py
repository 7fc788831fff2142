"""Campaign orchestration: context generation, call generation, comparison.

A campaign alternates three phases per round: (1) coverage-guided context
generation on the shared network, (2) snapshot the context and generate a
batch of RPC calls round-robin across the supported methods, (3) dispatch
every call to every client, compare responses, and record deduplicated
divergence reports. Everything downstream of the config's rng seed is
deterministic, so reports.jsonl is byte-reproducible.
"""

from __future__ import annotations

import json
import random
import tempfile
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from . import chain as chain_mod
from . import corpus as corpus_mod
from . import dispatch as dispatch_mod
from . import evm, mutate, oracle, reform, rpc
from .chain import ClientHandle, FaultId, FaultSpec, Network, NetworkConfig
from .corpus import CorpusConfig, CorpusEntry
from .mutate import MutationConfig
from .oracle import (DivergenceReport, NormalizationRules, RecordVerdict,
                     ReportStore, default_rules)
from .rpc import REGISTRY, SUPPORTED_METHODS


class ConfigInvalid(Exception):
    pass


class SeedMismatch(Exception):
    pass


DEFAULT_FUNDING = 10 ** 24


@dataclass
class CampaignConfig:
    rng_seed: int = 0
    coverage_threshold: int = 500
    max_selected: int = 1000
    calls_per_context: int = 256
    context_rounds: int = 1
    mutations_per_round: int = 200
    state_aware: bool = True
    seed_count: int = 40
    block_gas_limit: int = 30_000_000
    base_fee: int = 1_000_000_000
    funded_accounts: int = 3
    clients: tuple = (("ref", ()),)  # (clientId, fault-name tuple)
    rules_file: str | None = None
    out_dir: str = "out"
    workers: int = 1

    def validate(self, fuzz_mode: bool = True):
        if self.context_rounds < 1:
            raise ConfigInvalid("contextRounds must be >= 1")
        if fuzz_mode and len(self.clients) < 2:
            raise ConfigInvalid("fuzz mode requires >= 2 clients")
        if self.workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        if self.funded_accounts < 1:
            raise ConfigInvalid("at least one funded account required")


_CONFIG_KEYS = {
    "rngSeed": "rng_seed",
    "coverageThreshold": "coverage_threshold",
    "maxSelected": "max_selected",
    "callsPerContext": "calls_per_context",
    "contextRounds": "context_rounds",
    "mutationsPerRound": "mutations_per_round",
    "stateAware": "state_aware",
    "seedCount": "seed_count",
    "blockGasLimit": "block_gas_limit",
    "baseFee": "base_fee",
    "fundedAccounts": "funded_accounts",
    "clients": "clients",
    "rulesFile": "rules_file",
    "outDir": "out_dir",
    "workers": "workers",
}

_FAULT_BY_NAME = {f.value: f for f in FaultId}


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> CampaignConfig:
    """Flat JSON document; every key has a same-named CLI flag override."""
    raw: dict = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    raw.update(overrides or {})
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        attr = _CONFIG_KEYS[key]
        if key == "clients":
            try:
                value = tuple((c["clientId"], tuple(c["faults"])) for c in value)
            except (TypeError, KeyError) as exc:
                raise ConfigInvalid(f"malformed clients entry: {exc}") from exc
        kwargs[attr] = value
    try:
        return CampaignConfig(**kwargs)
    except TypeError as exc:
        raise ConfigInvalid(str(exc)) from exc


def _client_handles(config: CampaignConfig) -> list[ClientHandle]:
    handles = []
    for client_id, fault_names in config.clients:
        try:
            faults = tuple(FaultSpec(_FAULT_BY_NAME[name]) for name in fault_names)
        except KeyError as exc:
            raise ConfigInvalid(f"unknown fault {exc}") from exc
        handles.append(ClientHandle(client_id, faults))
    return handles


def build_network(config: CampaignConfig) -> Network:
    accounts = {evm.address_hex(0x1000 + i): DEFAULT_FUNDING
                for i in range(config.funded_accounts)}
    net_config = NetworkConfig(
        clients=_client_handles(config),
        accounts=accounts,
        block_gas_limit=config.block_gas_limit,
        base_fee=config.base_fee,
    )
    try:
        return chain_mod.init_network(net_config)
    except chain_mod.ChainError as exc:
        raise ConfigInvalid(str(exc)) from exc


@dataclass
class CampaignStats:
    contexts: int = 0
    mutants_generated: int = 0
    mutants_interesting: int = 0
    mutants_deployed: int = 0
    rpc_calls_sent: int = 0
    divergences: int = 0
    deduped_reports: int = 0
    coverage_cardinality: int = 0
    wall_clock: float = 0.0

    def to_json(self, rng_seed: int) -> dict:
        return {
            "rngSeed": rng_seed,
            "contexts": self.contexts,
            "mutantsGenerated": self.mutants_generated,
            "mutantsInteresting": self.mutants_interesting,
            "mutantsDeployed": self.mutants_deployed,
            "rpcCallsSent": self.rpc_calls_sent,
            "divergences": self.divergences,
            "dedupedReports": self.deduped_reports,
            "coverageCardinality": self.coverage_cardinality,
            "wallClock": self.wall_clock,
        }


def _load_rules(config: CampaignConfig) -> NormalizationRules:
    if config.rules_file:
        return NormalizationRules.from_file(config.rules_file)
    return default_rules()


def prepare_corpus(config: CampaignConfig, network: Network):
    """Seed synthesis + selection + reforming; returns the CorpusState."""
    stream = corpus_mod.synthesize_seed_stream(config.rng_seed ^ 0x5EED,
                                               config.seed_count, network)
    state = corpus_mod.select_initial_corpus(
        stream,
        CorpusConfig(config.coverage_threshold, config.max_selected),
        network.world.copy(),
        network._next_context())
    block = network._next_context()
    for entry in state.selected:
        result = chain_mod.execute_transaction(entry.tx, network.world.copy(),
                                               block)
        try:
            entry.reformed = reform.reform(reform.extract_trace(result))
        except reform.EmptyTrace:
            entry.reformed = None
    return state


def submit_corpus(network: Network, state) -> list:
    """Put every selected transaction on-chain (with refreshed nonces) so the
    call-generation context can reference them."""
    submitted = []
    for entry in state.selected:
        tx = chain_mod.Transaction(
            entry.tx.sender, entry.tx.to, entry.tx.value, entry.tx.data,
            entry.tx.gas_limit, entry.tx.max_fee_per_gas,
            network.world.account(entry.tx.sender).nonce)
        network.submit_transaction(tx)
        submitted.append(tx)
    return submitted


def _record_json_call(call: rpc.RpcCall):
    return json.loads(rpc.assemble_request(call))


def _record_json_response(call_id: int, response: rpc.RpcResponse):
    return json.loads(rpc.serialize_response(call_id, response))


def run_campaign(config: CampaignConfig) -> CampaignStats:
    config.validate(fuzz_mode=True)
    if config.workers > 1:
        return _run_workers(config)
    started = time.monotonic()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports_path = out / "reports.jsonl"
    if reports_path.exists():
        reports_path.unlink()
    rules = _load_rules(config)

    network = build_network(config)
    state = prepare_corpus(config, network)
    corpus_mod.save_corpus(state.selected, out / "corpus")
    submit_corpus(network, state)

    block_pool = []
    for entry in state.selected:
        block_pool.extend(reform.segment_blocks(entry.reformed
                                                or entry.callee_code))
    mutation = MutationConfig(block_corpus=block_pool,
                              state_aware=config.state_aware,
                              rng_seed=config.rng_seed + 1)
    mut_rng = random.Random(config.rng_seed + 1)
    call_rng = random.Random(config.rng_seed + 2)

    reports_path.touch()
    store = ReportStore(reports_path)
    stats = CampaignStats()
    call_index = 0
    for _round in range(config.context_rounds):
        artifacts = mutate.fuzz_context_loop(state, config.mutations_per_round,
                                             network, mutation, rng=mut_rng)
        state.accumulated = artifacts.final_coverage
        for tx in artifacts.deployed_txs:
            code = network.world.account(tx.to).code
            state.selected.append(CorpusEntry(tx, code, set()))
        stats.contexts += 1
        stats.mutants_generated += artifacts.generated
        stats.mutants_interesting += artifacts.interesting
        stats.mutants_deployed += artifacts.deployed

        view = dispatch_mod.context_view(network)
        for _ in range(config.calls_per_context):
            schema = REGISTRY[SUPPORTED_METHODS[call_index % len(SUPPORTED_METHODS)]]
            call = rpc.generate_call(schema, view, call_rng, call_id=call_index)
            responses = {}
            for client in network.clients:
                raw = rpc.serialize_response(
                    call.id, dispatch_mod.dispatch(client, network, call))
                responses[client.client_id] = rpc.parse_response(schema.output,
                                                                 raw)
            divergence = oracle.compare(call, responses, rules)
            stats.rpc_calls_sent += 1
            if divergence is not None:
                stats.divergences += 1
                report = DivergenceReport.build(divergence, view.head_number,
                                                view.head_hash, call_index)
                if store.record(report, _record_json_call,
                                _record_json_response) is RecordVerdict.New:
                    stats.deduped_reports += 1
            call_index += 1

    stats.coverage_cardinality = len(state.accumulated)
    stats.wall_clock = time.monotonic() - started
    (out / "stats.json").write_text(
        json.dumps(stats.to_json(config.rng_seed), indent=2) + "\n")
    return stats


def _run_workers(config: CampaignConfig) -> CampaignStats:
    """Sequential isolated campaigns with derived seeds, merged by signature."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    merged = CampaignStats()
    started = time.monotonic()
    seen: set[str] = set()
    merged_lines: list[str] = []
    for i in range(config.workers):
        sub = replace(config, workers=1, rng_seed=config.rng_seed + i,
                      out_dir=str(out / f"worker-{i}"))
        stats = run_campaign(sub)
        merged.contexts += stats.contexts
        merged.mutants_generated += stats.mutants_generated
        merged.mutants_interesting += stats.mutants_interesting
        merged.mutants_deployed += stats.mutants_deployed
        merged.rpc_calls_sent += stats.rpc_calls_sent
        merged.divergences += stats.divergences
        merged.coverage_cardinality += stats.coverage_cardinality
        worker_reports = Path(sub.out_dir) / "reports.jsonl"
        if worker_reports.exists():
            for line in worker_reports.read_text().splitlines():
                sig = json.loads(line)["signature"]
                if sig not in seen:
                    seen.add(sig)
                    merged_lines.append(line)
    merged.deduped_reports = len(merged_lines)
    (out / "reports.jsonl").write_text(
        "".join(line + "\n" for line in merged_lines))
    merged.wall_clock = time.monotonic() - started
    (out / "stats.json").write_text(
        json.dumps(merged.to_json(config.rng_seed), indent=2) + "\n")
    return merged


class ReplayOutcome(Enum):
    Reproduced = "Reproduced"
    NotReproduced = "NotReproduced"


@dataclass
class ReplayVerdict:
    signature: str
    method: str
    outcome: ReplayOutcome


def replay(report_path: str | Path, config: CampaignConfig) -> list[ReplayVerdict]:
    """Deterministically re-run the campaign and check each report's
    signature reappears."""
    report_path = Path(report_path)
    stats_path = report_path.parent / "stats.json"
    if stats_path.exists():
        recorded = json.loads(stats_path.read_text()).get("rngSeed")
        if recorded is not None and recorded != config.rng_seed:
            raise SeedMismatch(f"campaign seed {recorded}, config seed "
                               f"{config.rng_seed}")
    reports = [json.loads(line)
               for line in report_path.read_text().splitlines() if line.strip()]
    with tempfile.TemporaryDirectory() as tmp:
        rerun = replace(config, out_dir=tmp)
        run_campaign(rerun)
        fresh = Path(tmp) / "reports.jsonl"
        signatures = set()
        if fresh.exists():
            signatures = {json.loads(line)["signature"]
                          for line in fresh.read_text().splitlines()
                          if line.strip()}
    return [ReplayVerdict(
        signature=r["signature"], method=r["method"],
        outcome=(ReplayOutcome.Reproduced if r["signature"] in signatures
                 else ReplayOutcome.NotReproduced)) for r in reports]
