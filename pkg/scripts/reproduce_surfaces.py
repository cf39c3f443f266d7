"""Write the closed-form (N1, N2) surfaces for the two-copy figures as CSV files.

Usage: python scripts/reproduce_surfaces.py [outdir]
"""

import sys
from pathlib import Path

from cohpurify.cli import run

SURFACES = {
    "apd_purification.csv": ["--quantities", "n_apd,s_apd,n_det,n_tailored,n_pmp,n_mp"],
    "apd_efficiency_0p4.csv": ["--quantities", "n_apd,s_apd", "--eta", "0.4"],
    "phase_sensitive.csv": ["--quantities", "n_apd_phase,n_hom_phase,n_tailored,n_det"],
    "fidelity_capacity.csv": ["--quantities", "fidelity,capacity", "--signal-photons", "4"],
}


def main(outdir: str = "surfaces") -> int:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, extra in SURFACES.items():
        code = run(["sweep", *extra, "--format", "csv", "-o", str(out / name)])
        if code:
            return code
        print(f"wrote {out / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main(*sys.argv[1:]))
