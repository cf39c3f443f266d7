"""Monte Carlo N' and S for M identical copies against the closed forms, M = 2..6."""

import argparse

from cohpurify import analytics as an
from cohpurify.detectors import Apd
from cohpurify.engine import SimulationConfig, simulate_purification
from cohpurify.phase_space import NoiseKind, PreparationSpec


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=float, default=1.0, help="thermal photons per copy")
    parser.add_argument("--samples", type=int, default=500_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    print("M  N'_mc      N'_exact  S_mc      S_exact")
    for m in range(2, 7):
        ns = (args.n,) * m
        res = simulate_purification(SimulationConfig(
            PreparationSpec.from_photons(NoiseKind.ISOTROPIC, ns), Apd(1.0, 0.0), None, args.samples, args.seed))
        print(f"{m}  {res.n_prime.value:.5f}   {an.n_apd_multi(ns):.5f}   "
              f"{res.success.value:.5f}   {an.s_apd_multi(ns):.5f}")


if __name__ == "__main__":
    main()
