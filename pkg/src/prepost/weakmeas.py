"""Weak values, von Neumann pointer distributions and post-selected ensembles.

The pointer is a 1-D Gaussian wavefunction on a uniform grid. Coupling is the
impulse exp(-i g A (x) p), which displaces the pointer by ``g*a`` in the
eigenspace of A with eigenvalue ``a``. Projecting the system on the
post-selected state leaves the pointer in

    Phi(q) = sum_a <post|P_a|pre> phi(q - g a),

exact to all orders in ``g``.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .errors import (
    EmptyDistribution,
    GridTooSmall,
    NoAcceptedTrials,
    OrthogonalPostSelection,
)

ORTHOGONALITY_EPS = 1e-12
DEFAULT_POINTS = 4096
DEFAULT_BLOCK = 10_000


@dataclass(frozen=True, eq=False)
class PrePostPair:
    pre: qcore.State
    post: qcore.State
    overlap: complex = field(init=False)

    def __post_init__(self):
        pre, post = self.pre, self.post
        if not isinstance(pre, qcore.State):
            pre = qcore.normalize(pre)
        if not isinstance(post, qcore.State):
            post = qcore.normalize(post)
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)
        # raises DimensionMismatch
        object.__setattr__(self, "overlap", qcore.inner(post, pre))

    @property
    def dim(self):
        return self.pre.dim


@dataclass(frozen=True)
class GaussianPointer:
    """Gaussian measuring device with position spread ``width``.

    ``halfwidth`` fixes the grid to ``[-L, L]``; left as ``None`` it is chosen
    per coupling as ``max(8*width, |g|*max|a| + 8*width)``.
    """

    width: float = 1.0
    halfwidth: float | None = None
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("pointer width must be positive")
        m = self.points
        if m < 256 or m & (m - 1):
            raise ValueError(f"grid points must be a power of two >= 256, got {m}")
        if self.halfwidth is not None and self.halfwidth < 6 * self.width:
            raise ValueError("grid halfwidth must be at least 6 pointer widths")

    def grid_halfwidth(self, reach=0.0):
        if self.halfwidth is not None:
            return float(self.halfwidth)
        return max(8.0 * self.width, abs(reach) + 8.0 * self.width)

    def grid(self, reach=0.0):
        L = self.grid_halfwidth(reach)
        return np.linspace(-L, L, self.points)

    def wavefunction(self, q, center=0.0):
        s = self.width
        return (2 * np.pi * s * s) ** -0.25 * np.exp(-((q - center) ** 2) / (4 * s * s))


def _integrate(f, h):
    """Trapezoidal rule on a uniform grid."""
    return h * (np.sum(f) - 0.5 * (f[0] + f[-1]))


@dataclass(frozen=True, eq=False)
class PointerDistribution:
    q: np.ndarray
    amplitudes: np.ndarray
    postselection_probability: float
    mean: float
    variance: float

    @property
    def spacing(self):
        return float(self.q[1] - self.q[0])

    @property
    def density(self):
        """Normalized probability density of the post-selected pointer."""
        return np.abs(self.amplitudes) ** 2 / self.postselection_probability

    def records(self):
        dens = self.density
        return [
            {"q": q, "re": a.real, "im": a.imag, "density": d}
            for q, a, d in zip(self.q.tolist(), self.amplitudes.tolist(), dens.tolist())
        ]


@dataclass(frozen=True)
class EnsembleStats:
    m_total: int
    m_acc: int
    sample_mean: float
    sample_stderr: float
    seed: int

    def to_json(self):
        return {
            "m_total": self.m_total,
            "m_acc": self.m_acc,
            "mean": self.sample_mean,
            "stderr": self.sample_stderr,
            "seed": self.seed,
        }


def _as_pair(pp):
    if isinstance(pp, PrePostPair):
        return pp
    pre, post = pp
    return PrePostPair(pre, post)


def weak_value(A, pp):
    """<post|A|pre> / <post|pre>.

    Raises :class:`OrthogonalPostSelection` when ``|<post|pre>| < 1e-12``.
    """
    pp = _as_pair(pp)
    if abs(pp.overlap) < ORTHOGONALITY_EPS:
        raise OrthogonalPostSelection(f"|<post|pre>| = {abs(pp.overlap):.3e} is below {ORTHOGONALITY_EPS}")
    a = qcore.as_matrix(A)
    qcore._same_dim(a, pp.pre.amplitudes)
    num = np.vdot(pp.post.amplitudes, a @ pp.pre.amplitudes)
    return complex(num / pp.overlap)


def postselection_probability(pp):
    """|<post|pre>|^2: the zero-coupling success rate of the post-selection."""
    pp = _as_pair(pp)
    return float(min(abs(pp.overlap) ** 2, 1.0))


def branch_amplitudes(A, pp):
    """Eigenvalues of A and the matching amplitudes <post|P_a|pre>, one per eigenvector."""
    pp = _as_pair(pp)
    spec = qcore.eigh(A)
    qcore._same_dim(spec.eigenvectors, pp.pre.amplitudes)
    v = spec.eigenvectors
    amps = (v.conj().T @ pp.pre.amplitudes) * (v.T @ pp.post.amplitudes.conj())
    return spec.eigenvalues, amps


def projector_weights(A, pp, tol=1e-9):
    """Projective-measurement statistics |<post|P_a|pre>|^2 / sum, per distinct eigenvalue.

    Degenerate eigenvalues (within ``tol``) share one projector.
    """
    vals, amps = branch_amplitudes(A, pp)
    groups = []
    for val, amp in zip(vals, amps):
        if groups and abs(val - groups[-1][0]) <= tol:
            groups[-1][1] += amp
        else:
            groups.append([val, amp])
    eig = np.array([g[0] for g in groups])
    w = np.array([abs(g[1]) ** 2 for g in groups])
    total = w.sum()
    if total <= 0:
        raise EmptyDistribution("post-selection never succeeds for any eigenvalue")
    return eig, w / total


def pointer_final_distribution(A, pp, ptr, g):
    """Post-selected pointer wavefunction after coupling strength ``g``."""
    vals, amps = branch_amplitudes(A, pp)
    g = float(g)
    reach = abs(g) * float(np.max(np.abs(vals)))
    L = ptr.grid_halfwidth(reach)
    if reach + 5 * ptr.width > L:
        raise GridTooSmall(
            f"pointer shifted by {reach:.3g} leaves less than 5 widths of margin on a grid of halfwidth {L:.3g}"
        )
    q = ptr.grid(reach)
    h = q[1] - q[0]
    if h > 0.25 * ptr.width:
        raise GridTooSmall(f"grid spacing {h:.3g} under-resolves pointer width {ptr.width:.3g}")
    phi = np.zeros_like(q, dtype=complex)
    for a, c in zip(vals, amps):
        if c != 0:
            phi += c * ptr.wavefunction(q, g * a)
    phi.setflags(write=False)
    dens = np.abs(phi) ** 2
    p = float(_integrate(dens, h))
    if p < 1e-300:
        return PointerDistribution(q, phi, max(p, 0.0), float("nan"), float("nan"))
    mean = float(_integrate(q * dens, h) / p)
    var = float(_integrate((q - mean) ** 2 * dens, h) / p)
    return PointerDistribution(q, phi, p, mean, var)


def pointer_statistics(dist):
    """(mean, variance, p) of a post-selected pointer distribution, recomputed from the grid."""
    h = dist.spacing
    dens = np.abs(dist.amplitudes) ** 2
    p = float(_integrate(dens, h))
    if p < 1e-300:
        raise EmptyDistribution("post-selection probability is zero")
    q = dist.q
    mean = float(_integrate(q * dens, h) / p)
    var = float(_integrate((q - mean) ** 2 * dens, h) / p)
    return mean, var, p


def pointer_momentum_mean(dist):
    """Mean pointer momentum of the post-selected state, from an FFT of the grid wavefunction."""
    q = dist.q
    h = q[1] - q[0]
    phi_k = np.fft.fft(dist.amplitudes)
    k = 2 * np.pi * np.fft.fftfreq(q.size, d=h)
    w = np.abs(phi_k) ** 2
    if w.sum() <= 0:
        raise EmptyDistribution("post-selection probability is zero")
    return float(np.sum(k * w) / np.sum(w))


def resolve_workers(workers=None):
    """Worker count: explicit argument, else ``PREPOST_THREADS`` (0 = auto), else 1."""
    if workers is None:
        env = os.environ.get("PREPOST_THREADS", "").strip()
        workers = int(env) if env else 1
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def block_sizes(m_total, block_size):
    n_full, rest = divmod(m_total, block_size)
    return [block_size] * n_full + ([rest] if rest else [])


def block_generators(seed, n_blocks):
    """One independent generator per trial block, spawned from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n_blocks)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _inverse_cdf(dist):
    dens = dist.density
    h = dist.spacing
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * h * (dens[1:] + dens[:-1]))])
    cdf /= cdf[-1]
    return cdf, dist.q


def monte_carlo_run(A, pp, ptr, g, m_total, seed, block_size=DEFAULT_BLOCK, workers=None):
    """Simulate the measure / post-select / discard / average procedure.

    Each of ``m_total`` systems passes post-selection with the exact
    probability of the coupled state; accepted systems yield a pointer
    reading drawn from the normalized post-selected density by inverse CDF.
    Trials are split into blocks with their own seeded substreams, so the
    result depends on ``seed`` and ``block_size`` only, never on ``workers``.
    """
    m_total = int(m_total)
    if m_total < 1:
        raise ValueError("m_total must be at least 1")
    dist = pointer_final_distribution(A, pp, ptr, g)
    p = min(max(dist.postselection_probability, 0.0), 1.0)
    cdf, q = _inverse_cdf(dist) if p > 0 else (None, None)

    sizes = block_sizes(m_total, block_size)
    gens = block_generators(seed, len(sizes))

    def run_block(i):
        rng = gens[i]
        accepted = int(np.count_nonzero(rng.random(sizes[i]) < p))
        if accepted == 0:
            return np.empty(0)
        return np.interp(rng.random(accepted), cdf, q)

    n_workers = min(resolve_workers(workers), len(sizes))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as ex:
            blocks = list(ex.map(run_block, range(len(sizes))))
    else:
        blocks = [run_block(i) for i in range(len(sizes))]

    readings = np.concatenate(blocks)
    m_acc = readings.size
    if m_acc == 0:
        raise NoAcceptedTrials(f"none of {m_total} trials passed post-selection (p = {p:.3e})")
    mean = float(readings.mean())
    std = float(readings.std(ddof=1)) if m_acc > 1 else 0.0
    return EnsembleStats(m_total, m_acc, mean, float(std / np.sqrt(m_acc)), int(seed))
