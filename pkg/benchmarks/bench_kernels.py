"""Time the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--sizes 5,20,80]
"""
import argparse
import timeit

import numpy as np

from dynoracle import _kernels
from dynoracle.oracles import nesterov_params
from dynoracle.problems import random_quadratic_instance


def _cases(n):
    prob = random_quadratic_instance(n, n, 5.0, 0)
    f, g, A = prob.f, prob.g, prob.A
    c = prob.constants
    eta1 = 0.5 * 2 / (c.mu_p + c.beta_p)
    p = nesterov_params(c.mu_g, c.beta_g)
    z = np.zeros(n)
    B = np.random.default_rng(0).standard_normal((n, n))
    S = B + B.T
    SPD = B @ B.T + np.eye(n)
    Ms = [np.array([[1.3, -0.4], [1.0, 0.0]]), np.array([[0.2, 0.3], [1.0, 0.0]])]
    return {
        "jacobi_eigvalsh": lambda k: k.jacobi_eigvalsh(S, 1e-12, 100),
        "cholesky_lower": lambda k: k.cholesky_lower(SPD),
        "pdgm_quadratic(2000)": lambda k: k.pdgm_quadratic(
            f.Q, f.q, g.Q, g.q, A, eta1, p.eta2, z, z, 2000, 1e-300, 1e12),
        "state_space_quadratic(2000)": lambda k: k.state_space_quadratic(
            f.Q, f.q, g.Q, g.q, A, eta1, p.c1, p.c2, p.c3, p.eta2, z, z, z, 2000, 1e-300, 1e12),
        "lmi_min_margin": lambda k: k.lmi_min_margin(Ms, 0.95, 60),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--sizes", default="5,20,80")
    args = ap.parse_args(argv)
    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels are not built; only the fallback is timed")
    print(f"{'kernel':<30}{'n':>5}" + "".join(f"{b + ' [ms]':>16}" for b in backends) + f"{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fn in _cases(n).items():
            if name == "lmi_min_margin" and n != int(args.sizes.split(",")[0]):
                continue  # size independent
            times = {}
            for b in backends:
                impl = _kernels.get_backend(b)
                number = 1
                times[b] = min(timeit.repeat(lambda: fn(impl), number=number, repeat=args.repeat)) * 1e3
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<30}{n:>5}" + "".join(f"{times[b]:>16.3f}" for b in backends) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
