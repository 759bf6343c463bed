"""Correlated failures: shocks that take out several servers at once.

Independent-failure arithmetic collapses when one event (a recession, a
war, a legal order) can destroy multiple replicas simultaneously. The
defenses are faster detection and more copies; this demo reproduces both
effects for two-server and three-server shock spans.
"""

from presim import parse_scenario_dict, run_replications

RUNS = 300
WEEK, MONTH, QUARTER = 0.02, 1 / 12, 0.25


def scenario(copies, probe_my, span, shock_half_life_my):
    return parse_scenario_dict({
        "documents": {"count": 2000, "size": "1 MB"},
        "copies": copies,
        "sector": {"half_life": "immortal"},
        "shocks": [{"kind": "span",
                    "arrival_half_life": f"{shock_half_life_my} my",
                    "span": span}],
        "audit": {"server_probe": {"interval": f"{probe_my} my", "probe_count": 3}},
        "horizon": "10 my",
    })


def main():
    print(f"span-2 shocks, 5 copies: total-loss probability vs probe cadence ({RUNS} runs)")
    print(f"{'shock half-life':>16} {'quarterly':>10} {'monthly':>9} {'weekly':>8}")
    for h in (0.5, 1, 2, 4):
        row = [
            run_replications(scenario(5, cadence, 2, h), RUNS, master_seed=7).p_total_loss
            for cadence in (QUARTER, MONTH, WEEK)
        ]
        print(f"{h:>14}my {row[0]:>10.3f} {row[1]:>9.3f} {row[2]:>8.3f}")

    print()
    print("span-3 shocks at 0.5 my: redundancy cannot substitute for speed")
    w8 = run_replications(scenario(8, WEEK, 3, 0.5), RUNS, master_seed=9)
    m9 = run_replications(scenario(9, MONTH, 3, 0.5), RUNS, master_seed=9)
    print(f"  weekly probes + 8 copies:  p_total_loss = {w8.p_total_loss:.3f}")
    print(f"  monthly probes + 9 copies: p_total_loss = {m9.p_total_loss:.3f}")


if __name__ == "__main__":
    main()
