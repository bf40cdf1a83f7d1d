"""Smoke test for the crn_osc_py extension.

Build and install it first:  pip install --no-build-isolation ./crates/python
"""

import math
import sys

import crn_osc_py as co


def main():
    assert co.count(2, 1) == 14
    assert co.count(3, 2) == 622

    atom = co.Crn.from_text("#! species 2\nX1 + X2 -> 2 X2\n").fully_open()
    assert atom.is_fully_open() and atom.n_reactions == 5
    assert co.Crn.from_key(atom.key()).key() == atom.key()

    r22 = co.closure((2, 2), add_seeds=[atom])
    assert len(r22["inheritors"]) == 25
    pop = [c.fully_open() for c in co.enumerate(2, 2)]
    frac = co.motif_fraction([atom], pop)
    assert math.isclose(frac, 25 / 169)

    k, times, states, cls = co.simulate(atom, "pl", seed=1, draw=0)
    assert len(k) == 5 and len(times) == len(states) and cls

    rec = co.certify_power_law_set(0.05)
    assert rec["verdict"] == "SPPO", rec["verdict"]
    print(f"power-law set k=0.05: T = {rec['period']:.4f}, multipliers {rec['reduced_multipliers']}")

    rep = co.appendix_checks(draws=20)
    failed = [c["name"] for c in rep["checks"] if not c["passed"]]
    assert not failed, failed

    t = co.table(max_k=2, max_l=2)
    assert [c["total"] for c in t["cells"]] == [14, 169]
    print("smoke test ok")


if __name__ == "__main__":
    sys.exit(main())
