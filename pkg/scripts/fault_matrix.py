#!/usr/bin/env python3
"""Run one two-client campaign per fault and print a detection matrix.

Each row: fault id, RPC calls sent, deduped reports, whether at least one
report names the method the fault perturbs.
"""

import argparse
import json
import tempfile
from pathlib import Path

from chaindiff.campaign import CampaignConfig, run_campaign

FAULT_METHOD = {
    "F1": "eth_call",
    "F2": "eth_getCode",
    "F3": "eth_estimateGas",
    "F4": "debug_traceTransaction",
    "F5": "debug_traceTransaction",
    "F6": "eth_getTransactionByBlockNumberAndIndex",
}


def campaign_for(fault: str, seed: int, out_dir: str) -> CampaignConfig:
    # F1 divergences need contexts hungrier than the block gas limit
    block_gas_limit = 100_000 if fault == "F1" else 30_000_000
    return CampaignConfig(
        rng_seed=seed,
        seed_count=25,
        context_rounds=2,
        mutations_per_round=150,
        calls_per_context=2500,
        block_gas_limit=block_gas_limit,
        clients=(("ref", ()), ("variant", (fault,))),
        out_dir=out_dir,
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--faults", nargs="*", default=list(FAULT_METHOD))
    args = parser.parse_args()

    print(f"{'fault':<6} {'calls':>7} {'reports':>8} {'method hit':>11}")
    for fault in args.faults:
        with tempfile.TemporaryDirectory() as tmp:
            stats = run_campaign(campaign_for(fault, args.seed, tmp))
            methods = set()
            for line in (Path(tmp) / "reports.jsonl").read_text().splitlines():
                methods.add(json.loads(line)["method"])
        hit = FAULT_METHOD[fault] in methods
        print(f"{fault:<6} {stats.rpc_calls_sent:>7} "
              f"{stats.deduped_reports:>8} {str(hit):>11}")


if __name__ == "__main__":
    main()
