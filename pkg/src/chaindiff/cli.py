"""Command-line surface: corpus selection, fuzzing, replay, reform checks.

Exit codes: 0 success, 1 operational error (IO, replay mismatch, failed
equivalence), 2 configuration error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import campaign as campaign_mod
from . import chain as chain_mod
from . import corpus as corpus_mod
from . import reform as reform_mod
from .campaign import (CampaignConfig, ConfigInvalid, ReplayOutcome,
                       SeedMismatch, load_config)

EXIT_OK = 0
EXIT_OPERATIONAL = 1
EXIT_CONFIG = 2


def _config_options(fn):
    """Same-named override flag for every config key."""
    options = [
        click.option("--rng-seed", "rngSeed", type=int, default=None),
        click.option("--coverage-threshold", "coverageThreshold", type=int, default=None),
        click.option("--max-selected", "maxSelected", type=int, default=None),
        click.option("--calls-per-context", "callsPerContext", type=int, default=None),
        click.option("--context-rounds", "contextRounds", type=int, default=None),
        click.option("--mutations-per-round", "mutationsPerRound", type=int, default=None),
        click.option("--state-aware/--no-state-aware", "stateAware", default=None),
        click.option("--seed-count", "seedCount", type=int, default=None),
        click.option("--block-gas-limit", "blockGasLimit", type=int, default=None),
        click.option("--base-fee", "baseFee", type=int, default=None),
        click.option("--funded-accounts", "fundedAccounts", type=int, default=None),
        click.option("--rules-file", "rulesFile", type=str, default=None),
        click.option("--out-dir", "outDir", type=str, default=None),
        click.option("--workers", "workers", type=int, default=None),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_config(config_path: str | None, flags: dict) -> CampaignConfig:
    overrides = {k: v for k, v in flags.items() if v is not None}
    return load_config(config_path, overrides)


@click.group()
def main():
    """Differential fuzzer for context-dependent RPC divergences."""


@main.group("corpus")
def corpus_group():
    """Initial corpus operations."""


@corpus_group.command("select")
@click.option("--config", "config_path", type=str, default=None)
@_config_options
def corpus_select(config_path, **flags):
    """Synthesize a seed stream, run selection, write the corpus directory."""
    try:
        config = _build_config(config_path, flags)
        config.validate(fuzz_mode=False)
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        network = campaign_mod.build_network(config)
        state = campaign_mod.prepare_corpus(config, network)
        out = Path(config.out_dir) / "corpus"
        corpus_mod.save_corpus(state.selected, out)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_OPERATIONAL)
    click.echo(f"selected {len(state.selected)} entries, "
               f"coverage {len(state.accumulated)}, wrote {out}")
    sys.exit(EXIT_OK)


@main.command("fuzz")
@click.option("--config", "config_path", type=str, default=None)
@_config_options
def fuzz(config_path, **flags):
    """Run a full campaign; writes reports.jsonl and stats.json."""
    try:
        config = _build_config(config_path, flags)
        stats = campaign_mod.run_campaign(config)
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_OPERATIONAL)
    click.echo(f"contexts {stats.contexts}, calls {stats.rpc_calls_sent}, "
               f"divergences {stats.divergences}, "
               f"reports {stats.deduped_reports}, "
               f"coverage {stats.coverage_cardinality}")
    sys.exit(EXIT_OK)


@main.command("replay")
@click.option("--reports", "reports_path", type=str, required=True)
@click.option("--config", "config_path", type=str, default=None)
@_config_options
def replay(reports_path, config_path, **flags):
    """Re-run a recorded campaign and verify each report reappears."""
    try:
        config = _build_config(config_path, flags)
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        verdicts = campaign_mod.replay(reports_path, config)
    except SeedMismatch as exc:
        click.echo(f"seed mismatch: {exc}", err=True)
        sys.exit(EXIT_OPERATIONAL)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_OPERATIONAL)
    reproduced = sum(v.outcome is ReplayOutcome.Reproduced for v in verdicts)
    for v in verdicts:
        click.echo(f"{v.signature[:16]} {v.method}: {v.outcome.value}")
    click.echo(f"reproduced: {reproduced}/{len(verdicts)}")
    sys.exit(EXIT_OK if reproduced == len(verdicts) else EXIT_OPERATIONAL)


@main.command("reform-check")
@click.option("--config", "config_path", type=str, default=None)
@click.option("--corpus", "corpus_dir", type=str, default=None,
              help="Corpus dir to cross-check against the regenerated selection.")
@_config_options
def reform_check(config_path, corpus_dir, **flags):
    """Equivalence suite: reform every selected trace and re-execute it."""
    try:
        config = _build_config(config_path, flags)
        config.validate(fuzz_mode=False)
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    network = campaign_mod.build_network(config)
    state = campaign_mod.prepare_corpus(config, network)
    if corpus_dir is not None:
        try:
            stored = corpus_mod.load_corpus(corpus_dir)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_OPERATIONAL)
        stored_hashes = [e.tx.hash for e in stored]
        fresh_hashes = [e.tx.hash for e in state.selected]
        if stored_hashes != fresh_hashes:
            click.echo("corpus does not match regenerated selection "
                       "(different seed or config?)", err=True)
            sys.exit(EXIT_OPERATIONAL)
    equivalent = checked = skipped = 0
    for entry in state.selected:
        tx = chain_mod.Transaction(
            entry.tx.sender, entry.tx.to, entry.tx.value, entry.tx.data,
            entry.tx.gas_limit, entry.tx.max_fee_per_gas,
            network.world.account(entry.tx.sender).nonce)
        network.submit_transaction(tx)
        if entry.reformed is None:
            skipped += 1
            continue
        verdict = reform_mod.check_equivalence(tx, entry.reformed, network)
        if verdict.skipped:
            skipped += 1
            continue
        checked += 1
        if verdict.equivalent:
            equivalent += 1
        else:
            click.echo(f"mismatch: {verdict.mismatch}", err=True)
    click.echo(f"equivalent: {equivalent}/{checked} (skipped: {skipped})")
    sys.exit(EXIT_OK if equivalent == checked else EXIT_OPERATIONAL)


@main.command("stats")
@click.option("--path", "stats_path", type=str, default="out/stats.json")
def stats(stats_path):
    """Print a campaign's stats.json."""
    try:
        content = Path(stats_path).read_text()
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_OPERATIONAL)
    try:
        click.echo(json.dumps(json.loads(content), indent=2))
    except ValueError as exc:
        click.echo(f"error: invalid stats file: {exc}", err=True)
        sys.exit(EXIT_OPERATIONAL)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
