"""Head-to-head timing of the numpy and numba kernel lanes.

Usage, from the repo root:

    python3 benchmarks/bench_kernels.py [--repeat N]

Each function gets one untimed warmup call, so numba compilation (first run
only; the on-disk cache persists) never pollutes the numbers.  Reported times
are the best of N repeats.
"""

import argparse
import time

import numpy as np

from epsim import _kernels_numpy as knp

try:
    from epsim import _kernels_numba as knb
except ImportError:
    knb = None


def volterra_case(n_t=2001, m=2):
    # fig-5-like pair: resonant kernel with two decay scales, weak CR kernel
    dt = 0.05
    tau = np.arange(n_t) * dt
    base = np.exp(-0.08 * tau) * np.exp(-1j * 0.35 * tau)
    kres = np.zeros((n_t, m, m), dtype=np.complex128)
    kres[:, 0, 0] = kres[:, 1, 1] = 2.4e-3 * base
    kres[:, 0, 1] = kres[:, 1, 0] = 1.1e-3 * base * np.exp(-1j * 0.1 * tau)
    s = np.arange(2 * n_t - 1) * dt
    kcr = np.zeros((2 * n_t - 1, m, m), dtype=np.complex128)
    kcr[:, 0, 1] = kcr[:, 1, 0] = 1e-4 * np.exp(-0.05 * s) * np.exp(1j * 10.7 * s)
    markov = np.zeros((m, m), dtype=np.complex128)
    c0 = np.zeros(m, dtype=np.complex128)
    c0[0] = 1.0
    return kres, kcr, markov, c0, dt, True


def rk4_case(d=16, n_steps=4000):
    # single-excitation ladder scale: 2 emitters + 13 modes + ground
    rng = np.random.default_rng(3)
    h = rng.normal(size=(d, d)) * 0.05
    h = (h + h.T) / 2.0
    h_nh = h.astype(np.complex128) / 0.6582
    kappas = rng.uniform(0.05, 0.3, size=3) / 0.6582
    jl, jr = [], []
    for i, kap in enumerate(kappas):
        op = np.zeros((d, d), dtype=np.complex128)
        op[0, i + 1] = 1.0
        h_nh = h_nh - 0.5j * kap * (op.conj().T @ op)
        jl.append(np.sqrt(kap) * op)
        jr.append(np.sqrt(kap) * op.conj().T)
    rho0 = np.zeros((d, d), dtype=np.complex128)
    rho0[1, 1] = 1.0
    return (np.ascontiguousarray(h_nh), np.ascontiguousarray(np.stack(jl)),
            np.ascontiguousarray(np.stack(jr)), rho0, 0.05, n_steps, 1, 200,
            1e-6, 1e-6, 1e-6)


def sommerfeld_case(n=256):
    # detour segment of the reflected-field contour at plasmonic permittivity
    k0 = 0.0179
    k = np.linspace(0.8, 1.5, n) * k0 - 0.02j * k0
    return k.astype(np.complex128), k0, -1.01 + 0.057j, 14.0, 1.5


def bessel_case(n=4096):
    rng = np.random.default_rng(11)
    z = rng.uniform(0.0, 60.0, n) + 1j * rng.uniform(-0.4, 0.4, n)
    return (z.astype(np.complex128),)


def best_of(fn, args, repeat):
    fn(*args)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


CASES = [
    ("volterra_propagate (n_t=2001, m=2)", "volterra_propagate", volterra_case()),
    ("rk4_lindblad_propagate (d=16, 4000 steps)", "rk4_lindblad_propagate", rk4_case()),
    ("sommerfeld_integrand (256 k-points)", "sommerfeld_integrand", sommerfeld_case()),
    ("bessel_j012_array (4096 points)", "bessel_j012_array", bessel_case()),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    width = max(len(label) for label, _, _ in CASES)
    header = f"{'kernel':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, name, case in CASES:
        t_np = best_of(getattr(knp, name), case, args.repeat)
        if knb is None:
            print(f"{label:<{width}}  {t_np * 1e3:>8.2f} ms  {'n/a':>10}  {'n/a':>8}")
            continue
        t_nb = best_of(getattr(knb, name), case, args.repeat)
        print(f"{label:<{width}}  {t_np * 1e3:>8.2f} ms  {t_nb * 1e3:>8.2f} ms"
              f"  {t_np / t_nb:>7.1f}x")
    if knb is None:
        print("\nnumba lane unavailable; set up numba to compare "
              "(EPSIM_DISABLE_NUMBA/EPSIM_BACKEND control the dispatch).")


if __name__ == "__main__":
    main()
