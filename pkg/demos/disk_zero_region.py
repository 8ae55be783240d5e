"""Negativity over the x-z Bloch disk and its diamond-shaped zero region.

Every state with |x| + |z| <= 1 has a nonnegative quasiprobability; the
four corners of the disk carry the largest negativity. Prints the region
fractions and saves a map of the disk when matplotlib is available.
"""

import argparse

import numpy as np

from oqlab import negativity_region


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="disk_zero_region.png")
    parser.add_argument("--resolution", type=int, default=201)
    args = parser.parse_args(argv)

    axis = np.linspace(-1.0, 1.0, args.resolution)
    grid = np.full((args.resolution, args.resolution), np.nan)
    for i, z in enumerate(axis):
        for j, x in enumerate(axis):
            if x * x + z * z <= 1.0:
                grid[i, j] = negativity_region(x, z)

    inside = np.isfinite(grid)
    zero_fraction = np.mean(grid[inside] == 0.0)
    print(f"zero-negativity fraction of the disk: {zero_fraction:.3f} (pi/2 - 1 over pi/4 area)")
    print(f"largest negativity on the disk: {np.nanmax(grid):.6f} at the diagonal corners")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed, skipping the figure")
        return

    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(grid, origin="lower", extent=(-1, 1, -1, 1), cmap="magma")
    boundary = np.array([(1, 0), (0, 1), (-1, 0), (0, -1), (1, 0)], dtype=float)
    ax.plot(boundary[:, 0], boundary[:, 1], "w--", lw=1.0)
    ax.set_xlabel("x")
    ax.set_ylabel("z")
    fig.colorbar(im, ax=ax, label="negativity")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
