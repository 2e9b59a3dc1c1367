"""Time the assembly kernel backends and one full implicit step.

    python benchmarks/bench_kernels.py [--sizes 80,640,2560] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from curveflow import kernels
from curveflow.assembly import Stencil, solve_step
from curveflow.energy import SurfaceEnergy, b_matrices
from curveflow.geometry import Ellipse, initial_shape, segment_frame


def inputs(n):
    curve = initial_shape(Ellipse(2, 1), n)
    f = segment_frame(curve)
    args = (
        n, True, f.lengths, np.ascontiguousarray(f.lengths[:, None] * f.normals),
        np.ascontiguousarray(b_matrices(SurfaceEnergy.cosine(0.05), f.angles)), 1e3, curve.nodes * 1e3,
    )
    return curve, args


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--sizes", default="80,640,2560")
    p.add_argument("--repeat", type=int, default=20)
    a = p.parse_args()
    backends = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    print(f"{'N':>6} " + " ".join(f"{name + ' [ms]':>14}" for name in backends) + f" {'speedup':>8} {'full step [ms]':>15}")
    for n in map(int, a.sizes.split(",")):
        curve, args = inputs(n)
        times = {}
        for name, fn in backends.items():
            times[name] = min(timeit.repeat(lambda: fn(*args), number=1, repeat=a.repeat)) * 1e3
        energy = SurfaceEnergy.cosine(0.05)
        frame = segment_frame(curve)
        step = min(timeit.repeat(lambda: solve_step(frame, Stencil.bdf1(curve), energy, 1e-3), number=1, repeat=a.repeat)) * 1e3
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{n:>6} " + " ".join(f"{t:>14.4f}" for t in times.values()) + f" {speed:>8.1f} {step:>15.3f}")


if __name__ == "__main__":
    main()
