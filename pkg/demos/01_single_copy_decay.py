"""How fast does a single unaudited copy decay?

Sweeps block half-life across three orders of magnitude and compares the
simulated mean lost fraction of a 10,000-document collection against the
closed form 1 - exp(-blocks * ln2/h * t). The two columns should agree to
within Monte-Carlo noise at every quality level; document size scales the
loss linearly (a bigger file is a bigger target).
"""

import math

from presim import p_doc_loss_single_copy, parse_scenario_dict, run_replications

HALF_LIVES_MH = [20, 50, 100, 200, 500, 1000]
HORIZON = "10 my"
RUNS = 60


def scenario(h_mh):
    return parse_scenario_dict({
        "documents": {"count": 10_000, "size": "1 MB"},
        "copies": 1,
        "sector": {"half_life": f"{h_mh} Mh"},
        "horizon": HORIZON,
    })


def main():
    print(f"single copy, 1-block documents, horizon {HORIZON}, {RUNS} runs/point")
    print(f"{'half-life':>10} {'simulated':>12} {'analytic':>12}")
    for h_mh in HALF_LIVES_MH:
        agg = run_replications(scenario(h_mh), RUNS, master_seed=1)
        analytic = p_doc_loss_single_copy(1, h_mh * 1e6, 1e5)
        print(f"{h_mh:>8}Mh {agg.mean_lost_fraction:>12.3e} {analytic:>12.3e}")
    print()
    print("size dependence at 100 Mh (loss is linear in block count):")
    for blocks in (1, 5, 20):
        p = p_doc_loss_single_copy(blocks, 1e8, 1e5)
        print(f"  {blocks:>3} blocks -> {p:.3e}")


if __name__ == "__main__":
    main()
