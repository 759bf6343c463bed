"""Pricing a strategy and searching the policy grid under a constraint.

Storage bills per replica per GB-month with graduated quantity discounts;
auditing and repair bill as egress/ingress. Given a tariff, the search
ranks candidate (copies, audit cadence) policies either by loss subject to
a budget or by cost subject to a loss target.
"""

import math

from presim import parse_scenario_dict, policy_search, run_once, tiered_price

GB = 2**30

BASE = {
    "documents": {"count": 2000, "size": "5 MB"},
    "copies": 3,
    "sector": {"half_life": "50 Mh"},
    "server": {"half_life": "5 my"},
    "audit": {
        "documents": {"cycle": "1 my", "segments": 1, "strategy": "systematic"},
        "server_probe": {"interval": "0.25 my", "probe_count": 3},
    },
    "tariff": {
        "storage": [[1024, 0.02], [None, 0.01]],
        "ingress": [[None, 0.0]],
        "egress": [[None, 0.05]],
    },
    "horizon": "10 my",
}


def main():
    tiers = ((1024.0, 0.02), (None, 0.01))
    print("graduated storage pricing (per month):")
    for gb in (100, 1024, 2048, 8192):
        print(f"  {gb:>6} GB -> {tiered_price(gb, tiers):>8.2f}")

    scen = parse_scenario_dict(BASE)
    r = run_once(scen, seed=1)
    print("\none 10-my run of the base policy:")
    print(f"  storage {r.cost_storage:9.2f} | ingress {r.cost_ingress:7.2f} "
          f"| egress {r.cost_egress:8.2f} | lost {r.lost_count}")

    result = policy_search(
        scen,
        {"copies": [2, 3, 5], "audit.documents.segments": [1, 4]},
        mode="min-cost",
        n_runs=60,
        master_seed=11,
        loss_target=1e-4,
    )
    print(f"\nmin-cost search s.t. mean lost fraction <= 1e-4 "
          f"({'feasible' if result.feasible else 'infeasible'}):")
    for row in result.table.rows:
        marker = "->" if row["selected"] else "  "
        print(f" {marker} copies={row['copies']} segments={row['audit_documents_segments']} "
              f"cost={row['mean_cost_total']:9.2f} loss={row['mean_lost_fraction']:.2e} "
              f"feasible={bool(row['feasible'])}")


if __name__ == "__main__":
    main()
