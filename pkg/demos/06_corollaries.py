"""Reusing the same machinery for adjacent preservation problems.

Encryption keys: a tiny collection whose risk is shock-dominated, kept on
its own server set. Format obsolescence: readers as servers, readability
probes as audits. Compression: a closed-form trade between smaller targets
and higher fragility. Subverted auditors: replica-count arithmetic.
"""

from presim import (
    byzantine_min_replicas,
    compression_reduces_loss,
    fragility_equivalent,
    preset_encryption_keys,
    preset_format_obsolescence,
    run_replications,
)


def main():
    keys = preset_encryption_keys()
    agg = run_replications(keys, 300, master_seed=13)
    print("encryption-key custody (4 copies, monthly audits, shock-dominated):")
    print(f"  p_total_loss over 30 my = {agg.p_total_loss:.4f}")

    print("\nformat obsolescence as server survival:")
    for readers in (3, 5):
        scen = preset_format_obsolescence(readers)
        agg = run_replications(scen, 300, master_seed=17)
        print(f"  {readers} independent readers, annual checks: "
              f"p_format_lost = {agg.p_total_loss:.4f}")

    print("\ncompression trade-off (benefit iff C x F' >= F):")
    for c, f, f2 in ((1.2, 1.0, 1.0), (2.0, 3.0, 1.0), (1.5, 2.0, 1.0)):
        verdict = "reduces loss" if compression_reduces_loss(c, f, f2) else "increases loss"
        print(f"  C={c} F={f} F'={f2}: {verdict}")

    eq = fragility_equivalent(10_000, 10, 2)
    print(f"\nfragility F=2 over 10-block docs behaves like "
          f"{eq.doc_count:.0f} docs of {eq.size_blocks:.0f} blocks at F=1")

    print("\nreplica counts against subverted auditors (3s+1, plus shock span):")
    for s, span in ((1, 0), (2, 0), (2, 3)):
        print(f"  s={s}, span={span}: {byzantine_min_replicas(s, span)} replicas")


if __name__ == "__main__":
    main()
