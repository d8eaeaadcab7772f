"""Direct vs Radon-pipeline agreement as the slope grid and CWT oversampling vary.

Each row reports the relative L2 distance over the whole lattice and the
wall time of the pipeline.
"""

from __future__ import annotations

import argparse
import time

from radonshear.phantoms import cone_noise
from radonshear.radon2d import affine_radon, default_v_grid
from radonshear.shearlet2d import Lattice, direct_transform, make_mother, pipeline_transform


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--levels", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    img = cone_noise(seed=args.seed, n=args.n)
    m = make_mother()
    lat = Lattice.for_image(img, J=args.levels)
    direct = direct_transform(img, m, lat)
    print(f"{'n_v':>5} {'os':>3} {'rel_L2':>10} {'sec':>6}")
    for nv in (65, 129, 257):
        sino = affine_radon(img, default_v_grid(3.0, nv))
        for os_ in (1, 2):
            t0 = time.perf_counter()
            vol = pipeline_transform(sino, m, lat, oversample=os_)
            sec = time.perf_counter() - t0
            print(f"{nv:5d} {os_:3d} {vol.relative_distance(direct):10.2e} {sec:6.1f}", flush=True)


if __name__ == "__main__":
    main()
