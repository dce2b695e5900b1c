"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--paths 4096] [--steps 200] [--repeat 3]
"""
import argparse
import sys
import timeit

import numpy as np

from ctsb import _backend, su2
from ctsb.params import TransformParams, phi_inverse
from ctsb.sampling import frame_abc, step_schedule


def sde_inputs(n_paths, n_steps, seed=0):
    p = TransformParams.make(2.0, 1.0, 0.5).check()
    V, scale, block = step_schedule(frame_abc(phi_inverse(p.s, p.t, p.u)), n_steps)
    xi = np.random.default_rng(seed).standard_normal((scale.shape[0], n_paths, V.shape[0]))
    return V, xi, scale, block


def heat_inputs(n, seed=0):
    z = su2.expm2(su2.random_sl2(np.random.default_rng(seed), n, 0.5))
    return np.trace(z, axis1=-2, axis2=-1), 1.0 + 0.5j, 40


def bench(label, fn_c, fn_py, repeat):
    t_py = min(timeit.repeat(fn_py, number=1, repeat=repeat))
    line = f"{label:<34} python {t_py * 1e3:9.2f} ms"
    if fn_c is not None:
        t_c = min(timeit.repeat(fn_c, number=1, repeat=repeat))
        line += f"   compiled {t_c * 1e3:9.2f} ms   speedup {t_py / t_c:6.1f}x"
    print(line)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=4096)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--traces", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    c, py = _backend.compiled_kernels, _backend.python_kernels
    if c is None:
        print("compiled extension not built; timing the fallback only", file=sys.stderr)

    sde = sde_inputs(args.paths, args.steps)
    if c is not None:
        diff = np.max(np.abs(c.sde_endpoints(*sde)[0] - py.sde_endpoints(*sde)[0]))
        print(f"sde_endpoints max |compiled - python| = {diff:.2e}")
    bench(f"sde_endpoints {args.paths}x{args.steps}",
          c and (lambda: c.sde_endpoints(*sde)), lambda: py.sde_endpoints(*sde), args.repeat)

    heat = heat_inputs(args.traces)
    bench(f"heat_series {args.traces} traces",
          c and (lambda: c.heat_series(*heat)), lambda: py.heat_series(*heat), args.repeat)


if __name__ == "__main__":
    main()
