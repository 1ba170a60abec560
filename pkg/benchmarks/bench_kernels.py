"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the same inputs with both backends; the table reports
the best wall time per backend and the speed-up of the compiled one.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np
from scipy import ndimage

from curvescope import _kernels, synthetic
from curvescope.edgelab import ImproveConfig, run_improve, threshold_two_mean


def _inputs():
    img, _ = synthetic.lowlight_cells()
    smooth = ndimage.gaussian_filter(img, 1.0)
    gx = ndimage.sobel(smooth, axis=1)
    gy = ndimage.sobel(smooth, axis=0)
    mag = np.hypot(gx, gy)
    mag /= mag.max()
    weak = mag > 0.05
    strong = mag > 0.15
    rng = np.random.default_rng(0)
    # binary map the edge pipeline thins at J=6 (2x upsampled working grid)
    binary = threshold_two_mean(run_improve(img, ImproveConfig(scale=6)).reconstruction)
    dog = ndimage.gaussian_filter(rng.standard_normal((5, 256, 256)), (0, 2, 2))
    tex = synthetic.texture()
    return {
        "nonmax_suppress": (mag, gx, gy),
        "hysteresis": (strong, weak),
        "zhang_suen": (binary,),
        "dog_extrema": (dog, 0.01, 5),
        "sift_descriptor": (tex, 128, 128, 0.7, 4.8, 17, 4, 8),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _kernels.get_backend("python")}
    try:
        backends["cython"] = _kernels.get_backend("cython")
    except ImportError:
        print("compiled kernels not built; timing the numpy backend only")
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends) + f"{'speed-up':>10}")
    for kernel, args_ in _inputs().items():
        times = {}
        for name, mod in backends.items():
            fn = getattr(mod, kernel)
            fn(*args_)
            times[name] = min(timeit.repeat(lambda: fn(*args_), number=1, repeat=args.repeat))
        row = f"{kernel:<18}" + "".join(f"{times[n] * 1e3:>10.2f}ms" for n in backends)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
