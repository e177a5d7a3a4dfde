"""Search output-stage geometries matching the reference neighbourhood energies.

Prints the best candidates with their energies and relative errors.
"""

import argparse

from qcahaz.energy import (
    SEARCH_DOT_SPACINGS,
    SEARCH_DRIVER_COUNTS,
    SEARCH_PITCHES,
    TARGET_E_KINK,
    TARGET_E_OPP,
    TARGET_E_SAME,
    EnergyParams,
    search_output_stage,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--top", type=int, default=10)
    ap.add_argument("--permittivity", type=float, default=1.0)
    args = ap.parse_args()

    found = search_output_stage(EnergyParams(relative_permittivity=args.permittivity))
    print(f"pitches {SEARCH_PITCHES}  dot spacings {SEARCH_DOT_SPACINGS}  drivers {SEARCH_DRIVER_COUNTS}")
    print(f"{len(found)} candidates; targets E_opp {TARGET_E_OPP:.4e}  E_same {TARGET_E_SAME:.4e}  "
          f"E_kink {TARGET_E_KINK:.4e}")
    print("rank pitch  ds  offsets                               pols          E_opp       E_same      E_kink      error")
    for k, c in enumerate(found[:args.top], 1):
        offs = " ".join(f"{i:+d},{j:+d}" for i, j in c.offsets)
        pols = "".join("+" if p > 0 else "-" for p in c.driver_pols)
        print(f"{k:4d} {c.pitch:5.1f} {c.dot_spacing:4.1f}  {offs:<37s} {pols:<12s}  "
              f"{c.e_opp:.4e}  {c.e_same:.4e}  {c.e_kink:.4e}  {c.error:.2%}")


if __name__ == "__main__":
    main()
