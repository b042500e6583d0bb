"""Transition matrices between computational-basis populations.

Analytic model: per qubit and per layer a symmetric flip with probability p/2;
after l layers the accumulated flip parameter is ``q = 1 - (1-p)**l`` and

    M[i, j] = (q/2)**d(i,j) * (1 - q/2)**(n - d(i,j))

with d the Hamming distance.  Empirical matrices come from density-matrix runs
started in each basis state, optionally through shot sampling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .channels import NoisyStepConfig, noisy_step
from .errors import NoConvergence, SingularConfusion, StrengthOutOfRange
from .field import ProblemSpec
from .quantum import DensityMatrix, layer


@dataclass
class TransitionMatrix:
    entries: np.ndarray
    n: int
    provenance: dict = field(default_factory=dict)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def column_sums(self):
        return self.entries.sum(axis=0)


def hamming(i: int, j: int) -> int:
    return int(i ^ j).bit_count()


def hamming_matrix(n: int) -> np.ndarray:
    return _kernels.popcount_table(n)


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise StrengthOutOfRange(f"p must lie in [0, 1], got {p!r}")


def m1(p: float) -> np.ndarray:
    _check_p(p)
    return np.array([[1 - p / 2, p / 2], [p / 2, 1 - p / 2]])


def effective_p(p: float, l: int) -> float:
    _check_p(p)
    if l < 0:
        raise ValueError("layer count must be non-negative")
    # 1 - (1-p)^l without cancellation for tiny p
    return float(-np.expm1(l * np.log1p(-p))) if p < 1 else float(l > 0)


def analytic_matrix(n: int, p: float, l: int) -> TransitionMatrix:
    q = effective_p(p, l)
    d = hamming_matrix(n)
    entries = (q / 2) ** d * (1 - q / 2) ** (n - d)
    return TransitionMatrix(entries, n, {"kind": "analytic", "p": p, "l": l})


def tensor_power(m, n: int) -> np.ndarray:
    """``m ⊗ m ⊗ ... ⊗ m`` with the highest qubit as the leftmost factor."""
    return reduce(np.kron, [np.asarray(m)] * n)


@dataclass(frozen=True)
class ShotSampler:
    shots: int
    seed: int = 0
    readout: "ReadoutModel | None" = None
    mitigate: bool = False

    def column_rng(self, column: int, layers: int = 0):
        return np.random.default_rng(np.random.SeedSequence([self.seed, layers, column]))


def _sample_column(P, j, l, sampler):
    if sampler is None:
        return P
    rng = sampler.column_rng(j, l)
    if sampler.readout is not None:
        P = sampler.readout.noisy_distribution(P)
    counts = rng.multinomial(sampler.shots, P / P.sum())
    if sampler.readout is not None and sampler.mitigate:
        return mitigate_readout(counts, sampler.readout)
    return counts / sampler.shots


def _column_series(n, j, layers, cfg, lay, phases):
    """Populations after each requested layer count, from a single run started in ``|j>``."""
    rho = DensityMatrix.basis(n, j)
    out = {}
    done = 0
    for l in sorted(set(layers)):
        for _ in range(l - done):
            rho = noisy_step(rho, lay, cfg, phases)
        done = l
        P = np.clip(rho.diagonal(), 0.0, None)
        out[l] = P / P.sum()
    return out


def empirical_matrices(n: int, layers, cfg: NoisyStepConfig, sampler: ShotSampler | None = None,
                       spec: ProblemSpec | None = None, workers: int = 1) -> dict:
    """Empirical matrices for several layer counts, sharing one run per column.

    Column ``j`` starts in ``|j>``; preparation is exact (the Ry(pi) circuit is
    only emitted by the QASM exporter).  ``spec`` sets the layer angles
    (default c=1, dt=0.02, L=2*pi on ``2**n`` points); they do not change
    populations.  Columns are independent, so ``workers > 1`` uses a thread
    pool and gives identical output.
    """
    if n > 10:
        raise ValueError("dense density matrices are limited to n <= 10")
    layers = [int(l) for l in layers]
    if any(l < 0 for l in layers):
        raise ValueError("layer counts must be non-negative")
    spec = spec or ProblemSpec(N=1 << n)
    lay = layer(spec)
    phases = lay.phases()
    dim = 1 << n

    def col(j):
        return _column_series(n, j, layers, cfg, lay, phases)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            cols = list(ex.map(col, range(dim)))
    else:
        cols = [col(j) for j in range(dim)]
    result = {}
    for l in sorted(set(layers)):
        entries = np.stack([_sample_column(cols[j][l], j, l, sampler) for j in range(dim)], axis=1)
        prov = {"kind": "empirical", "channel": cfg.channel.kind.value, "strength": cfg.channel.strength, "l": l}
        if sampler is not None:
            prov.update(shots=sampler.shots, seed=sampler.seed)
        result[l] = TransitionMatrix(entries, n, prov)
    return result


def empirical_matrix(n: int, l: int, cfg: NoisyStepConfig, sampler: ShotSampler | None = None,
                     spec: ProblemSpec | None = None, workers: int = 1) -> TransitionMatrix:
    return empirical_matrices(n, [l], cfg, sampler, spec, workers)[l]


def group_by_distance(M) -> np.ndarray:
    """Mean entry for each Hamming distance d = 0..n."""
    M = np.asarray(M)
    n = M.shape[0].bit_length() - 1
    d = hamming_matrix(n)
    return np.array([M[d == k].mean() for k in range(n + 1)])


def hamming_profile(n: int, p: float, layers) -> np.ndarray:
    """Analytic per-distance transition probability, one row per layer count."""
    out = []
    for l in layers:
        q = effective_p(p, l)
        d = np.arange(n + 1)
        out.append((q / 2) ** d * (1 - q / 2) ** (n - d))
    return np.array(out)


def fit_p(M_observed, n: int, l: int) -> float:
    """Least-squares (Frobenius) fit of the per-layer error p to an observed matrix."""
    if l < 1:
        raise ValueError("fitting needs at least one layer")
    M = np.asarray(M_observed, dtype=float)
    d = hamming_matrix(n)

    def loss(p):
        q = -np.expm1(l * np.log1p(-p)) if p < 1 else 1.0
        return float(np.sum(((q / 2) ** d * (1 - q / 2) ** (n - d) - M) ** 2))

    # coarse log grid to bracket the minimum, then bounded Brent refinement
    grid = np.concatenate([[0.0], np.logspace(-9, 0, 181)])
    vals = np.array([loss(p) for p in grid])
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if k == 0 and vals[0] <= vals[1]:
        lo, hi = 0.0, grid[1]
    res = minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-15, "maxiter": 500})
    if not res.success:
        raise NoConvergence(f"scalar fit did not converge: {res.message}")
    best = min([(res.fun, res.x), (vals[k], grid[k])])
    return float(best[1])


@dataclass
class ReadoutModel:
    """Per-qubit confusion matrices ``C[b_read, b_true]`` (qubit 0 first)."""

    confusions: list

    def __post_init__(self):
        self.confusions = [np.asarray(c, dtype=float) for c in self.confusions]
        for c in self.confusions:
            if c.shape != (2, 2) or np.any(c < 0) or not np.allclose(c.sum(axis=0), 1.0, atol=1e-12):
                raise ValueError("confusion matrices must be 2x2 with columns summing to 1")

    @classmethod
    def symmetric(cls, n: int, e0: float, e1: float | None = None):
        """``e0`` = P(read 1 | 0), ``e1`` = P(read 0 | 1)."""
        e1 = e0 if e1 is None else e1
        return cls([[[1 - e0, e1], [e0, 1 - e1]]] * n)

    @property
    def n(self) -> int:
        return len(self.confusions)

    def full(self) -> np.ndarray:
        # highest qubit is the most significant bit, hence the leftmost factor
        return reduce(np.kron, self.confusions[::-1])

    def noisy_distribution(self, P) -> np.ndarray:
        return _apply_per_qubit(np.asarray(P, dtype=float), self.confusions)


def _apply_per_qubit(P, mats):
    n = len(mats)
    t = P.reshape((2,) * n)  # axis 0 is the highest qubit
    for q, m in enumerate(mats):
        ax = n - 1 - q
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [ax])), 0, ax)
    return t.reshape(-1)


def sample_counts(P, shots: int, seed=None) -> np.ndarray:
    if shots < 1:
        raise ValueError("shots must be >= 1")
    P = np.clip(np.asarray(P, dtype=float), 0.0, None)
    return np.random.default_rng(seed).multinomial(shots, P / P.sum())


def mitigate_readout(counts, model: ReadoutModel) -> np.ndarray:
    """Invert the tensor-product confusion, clip negatives and renormalize."""
    freq = np.asarray(counts, dtype=float)
    freq = freq / freq.sum()
    inv = []
    for c in model.confusions:
        if abs(np.linalg.det(c)) < 1e-12:
            raise SingularConfusion("confusion matrix is not invertible")
        inv.append(np.linalg.inv(c))
    P = np.clip(_apply_per_qubit(freq, inv), 0.0, None)
    return P / P.sum()
