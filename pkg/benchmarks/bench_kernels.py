"""Compare the numba and numpy density-matrix kernels.

    python benchmarks/bench_kernels.py [--qubits 4,6,8] [--repeat 20]

Both paths are imported directly, so the ``QSPECNOISE_DISABLE_NUMBA`` flag
does not matter here.  Results are checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from qspecnoise import _kernels as K
from qspecnoise.channels import make_channel


def _best(fn, repeat):
    fn()  # warm-up, includes JIT compilation on first call
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", default="4,6,8")
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    kraus = make_channel("depolarizing", 1e-3).kraus
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>3}{'numpy [ms]':>13}{'numba [ms]':>13}{'speed-up':>10}")
    for n in (int(s) for s in args.qubits.split(",")):
        dim = 1 << n
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = a @ a.conj().T
        rho /= np.trace(rho)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, dim))
        cases = {
            "full noisy layer": (
                lambda: _layer(K.apply_kraus_1q_numpy, K.conjugate_diagonal_numpy, rho, phases, kraus, n),
                lambda: _layer(K.apply_kraus_1q_numba, K.conjugate_diagonal_numba, rho, phases, kraus, n),
            ),
            "kraus on one qubit": (
                lambda: K.apply_kraus_1q_numpy(rho, kraus, n // 2),
                lambda: K.apply_kraus_1q_numba(rho, kraus, n // 2),
            ),
            "diagonal conjugation": (
                lambda: K.conjugate_diagonal_numpy(rho, phases),
                lambda: K.conjugate_diagonal_numba(rho, phases),
            ),
        }
        for name, (f_np, f_nb) in cases.items():
            np.testing.assert_allclose(f_np(), f_nb(), atol=1e-13)
            t_np = _best(f_np, args.repeat)
            t_nb = _best(f_nb, args.repeat)
            print(f"{name:<22}{n:>3}{1e3 * t_np:>13.3f}{1e3 * t_nb:>13.3f}{t_np / t_nb:>10.2f}")


def _layer(kraus_fn, diag_fn, rho, phases, kraus, n):
    out = diag_fn(rho, phases)
    for q in range(n):
        out = kraus_fn(out, kraus, q)
    return out


if __name__ == "__main__":
    main()
