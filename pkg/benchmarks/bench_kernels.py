"""Time the compiled kernels against the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py``. Each kernel is timed on
identical inputs for every available backend, and the outputs are compared
so a speedup never hides a disagreement.
"""
import argparse
import timeit

import numpy as np

from extlorentz import kernels
from extlorentz.connection import build_connection, jet_from_sample
from extlorentz.fields import FieldSample, ParticleParams


def _inputs(seed):
    rng = np.random.default_rng(seed)
    pp = ParticleParams(q=1.0, m=1.0, c=1.0)
    s = FieldSample(rng.normal(size=3), rng.normal(size=3),
                    rng.normal(size=(4, 3)), rng.normal(size=(4, 3)))
    jet = jet_from_sample(s, pp)
    gre = np.ascontiguousarray(build_connection(
        FieldSample([0.2, -0.1, 0.3], [0.5, 0.4, -1.0]), pp).real)
    y0 = np.array([0, 0, 0, 0, 1.0, 0.1, -0.2, 0.05])
    return jet, gre, y0


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=300, help="RK4 steps per call")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    jet, gre, y0 = _inputs(args.seed)
    hs = np.full(args.steps, 0.01)
    backends = kernels.available_backends()
    cases = {
        "riemann": (lambda k: k.riemann(jet.g, jet.dg), 200),
        f"rk4_uniform[{args.steps}]": (lambda k: k.rk4_uniform(gre, y0, hs), 5),
    }

    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':<20}{'backend':<10}{'time/call':>14}{'speedup':>10}")
    for name, (call, number) in cases.items():
        ref_time = None
        ref_out = None
        for bname, mod in backends.items():
            out = call(mod)
            out = out[0] if isinstance(out, tuple) else out
            if ref_out is None:
                ref_out = out
            elif not np.allclose(out, ref_out, rtol=1e-12, atol=1e-12):
                raise SystemExit(f"{name}: backend {bname} disagrees with python")
            t = _best(lambda: call(mod), args.repeat, number)
            ref_time = ref_time or t
            print(f"{name:<20}{bname:<10}{t * 1e6:>11.1f} us{ref_time / t:>9.1f}x")
    if "cython" not in backends:
        print("compiled backend unavailable (not built, or EXTLORENTZ_PURE_PYTHON is set)")


if __name__ == "__main__":
    main()
