"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 64] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from emnls.kernels import backends


def _cases(n, rng):
    shape = (n, n, n)
    u = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    pot = np.ascontiguousarray(rng.normal(size=shape))
    grads = [rng.normal(size=shape) + 1j * rng.normal(size=shape) for _ in range(2)]
    avec = [np.ascontiguousarray(rng.normal(size=shape)) for _ in range(2)]
    amps = np.linspace(3.0, 6.0, 64)
    return {
        "phase_rotate": lambda m: m.phase_rotate(u.copy(), pot, 1e-3, 2.0),
        "phase_rotate(p=11/3)": lambda m: m.phase_rotate(u.copy(), None, 1e-3, 8.0 / 3.0),
        "advection_rhs": lambda m: m.advection_rhs(grads, avec, np.empty_like(u)),
        "shoot_radial": lambda m: m.shoot_radial(amps, 3.0, 3.0, 1e-3, 20000),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64, help="lattice points per axis")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    mods = backends()
    rng = np.random.default_rng(0)
    cases = _cases(args.n, rng)
    names = list(mods)
    print(f"lattice {args.n}^3, best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in names) + ("     speed-up" if len(names) > 1 else ""))
    for label, fn in cases.items():
        best = {b: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for b, m in mods.items()}
        row = f"{label:<22}" + "".join(f"{best[b] * 1e3:>10.2f}ms" for b in names)
        if "cython" in best:
            row += f"{best['python'] / best['cython']:>12.1f}x"
        print(row)


if __name__ == "__main__":
    main()
