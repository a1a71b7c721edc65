"""Smoke test for the tfim_rs extension.

Build with `cargo build --release -p tfim-py --features extension-module`,
copy `target/release/libtfim_rs.so` to `python/tfim_rs.so`, then run
`python3 python/smoke_test.py`.
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import tfim_rs  # noqa: E402


def main():
    j, h = 1.0, 0.7
    chain = tfim_rs.Chain(2, j, h)
    energy, gap, state = chain.ground_state()
    assert abs(energy + math.sqrt(j * j + 4 * h * h)) < 1e-10, energy
    assert gap > 0 and len(state) == 4

    rho = tfim_rs.reduced_density(1, 1, j, h)
    assert len(rho) == 4 and abs(sum(rho[i][i] for i in range(4)) - 1) < 1e-12
    assert tfim_rs.entanglement_entropy(1, 1, 0.0, h) < 1e-12
    s = tfim_rs.entanglement_entropy(2, 1, 1.0, 4.0)
    assert 0 < s < math.log(4), s

    k = tfim_rs.transition_kernel(1, -1, 0.3, 2.0)
    assert abs(k - (1 - math.exp(-1.2)) / 2) < 1e-14
    flips = tfim_rs.sample_bridge(1, -1, 0.0, 1.0, 2.0, seed=5)
    assert len(flips) % 2 == 1 and flips == sorted(flips)

    assert abs(tfim_rs.bound_psi(2.0) - 8 / (1 - math.exp(-1))) < 1e-12
    exact, truncated = tfim_rs.polymer_log_z([0.1, 0.2], [(0, 1)])
    assert abs(exact - math.log(1.3)) < 1e-14 and abs(truncated - exact) < 1e-12

    mean, err, acc = tfim_rs.mc_zz(2, 1.0, 2.0, 2.0, 0, 1, n_sweeps=20_000, n_burn_in=2_000, seed=1)
    ed = tfim_rs.Chain(2, 1.0, 2.0).thermal_zz(2.0, 0, 1)
    assert abs(mean - ed) < 5 * err + 1e-3, (mean, err, ed)
    assert 0 < acc <= 1

    report = json.loads(tfim_rs.run_scenario("kp-scan", '{"c": [1.0], "h_max": 64.0, "max_norm": 4}', 0))
    assert report["scenario"] == "kp-scan" and report["criteria"][0]["criterion"] == 6

    print("tfim_rs smoke test passed")


if __name__ == "__main__":
    main()
