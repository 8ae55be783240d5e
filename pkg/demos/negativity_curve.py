"""Exact negativity of pure polarization states along the Bloch polar angle.

Sweeps theta at a few fixed phases, prints the peak, and saves a figure
when matplotlib is available.
"""

import argparse
import math

import numpy as np

from oqlab import MAX_NEGATIVITY, context_table, make_pure_state, oq_distribution


def curve(phi_deg, thetas_deg):
    phi = math.radians(phi_deg)
    return np.array(
        [
            oq_distribution(context_table(make_pure_state(math.radians(t), phi))).negativity
            for t in thetas_deg
        ]
    )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="negativity_curve.png")
    args = parser.parse_args(argv)

    thetas = np.linspace(0.0, 180.0, 361)
    phases = [0.0, 30.0, 60.0, 90.0]
    curves = {phi: curve(phi, thetas) for phi in phases}

    n0 = curves[0.0]
    peak = thetas[np.argmax(n0)]
    print(f"peak negativity {n0.max():.6f} at theta = {peak:.1f} deg (phi = 0)")
    print(f"theoretical maximum (sqrt(2)-1)/4 = {MAX_NEGATIVITY:.6f}")
    for phi in phases[1:]:
        print(f"phi = {phi:4.0f} deg: max negativity {curves[phi].max():.6f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed, skipping the figure")
        return

    fig, ax = plt.subplots(figsize=(6, 4))
    for phi in phases:
        ax.plot(thetas, curves[phi], label=f"phi = {phi:g} deg")
    ax.axhline(MAX_NEGATIVITY, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("Bloch polar angle theta (deg)")
    ax.set_ylabel("negativity")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
