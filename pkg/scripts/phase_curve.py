"""Print the false-memory overlap as a function of the relative branch phase."""
import argparse

import numpy as np

from collapse_lab.experiments import retrodict_with_phase, retrodiction_setup


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=33)
    args = parser.parse_args()
    setup = retrodiction_setup()
    print(f"{'phi':>10} {'overlap^2':>12} {'|1-e^(i phi)|^2/4':>18}")
    for phi in np.linspace(0, 2 * np.pi, args.points):
        got = retrodict_with_phase(phi, setup).false_memory_overlap
        print(f"{phi:10.5f} {got:12.9f} {abs(1 - np.exp(1j * phi)) ** 2 / 4:18.9f}")


if __name__ == "__main__":
    main()
