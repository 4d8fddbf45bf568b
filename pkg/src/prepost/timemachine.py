"""Time-translation machine built from a post-selected superposition of evolutions.

A machine with N branches evolves the system for ``n * tau`` in branch ``n``
and is pre- and post-selected in machine states with amplitudes ``alpha`` and
``beta``. On success the system is acted on by

    K = sum_n conj(beta_n) alpha_n U(tau)^n,

which on an energy eigenstate is the scalar ``sum_n gamma_n exp(-i E n tau)``.
Choosing ``gamma`` so that this scalar tracks ``exp(-i E T')`` across an energy
band makes K proportional to U(T') on every state confined to that band, for
any T' including values outside ``[0, (N-1) tau]``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import (
    EmptyInput,
    IllConditioned,
    InfeasibleBand,
    PostSelectionNeverSucceeds,
    ZeroDesign,
)
from .weakmeas import block_generators

ILL_CONDITIONED = 1e12


@dataclass(frozen=True)
class BandSpec:
    e_min: float
    e_max: float
    n_grid: int = 4096

    def __post_init__(self):
        if not self.e_min < self.e_max:
            raise ValueError(f"empty band [{self.e_min}, {self.e_max}]")
        if self.n_grid < 128:
            raise ValueError("band grid needs at least 128 points")

    @property
    def width(self):
        return self.e_max - self.e_min

    def grid(self, n=None):
        return np.linspace(self.e_min, self.e_max, n or self.n_grid)

    def contains(self, e, tol=1e-12):
        e = np.asarray(e)
        return (e >= self.e_min - tol) & (e <= self.e_max + tol)


@dataclass(frozen=True, eq=False)
class MachineSpec:
    n: int
    tau: float
    alpha: np.ndarray
    beta: np.ndarray
    t_target: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("machine needs at least one branch")
        for name in ("alpha", "beta"):
            v = np.array(getattr(self, name), dtype=complex)
            if v.shape != (self.n,):
                raise ValueError(f"{name} must have length {self.n}")
            if abs(np.linalg.norm(v) - 1) > qcore.CONSTRUCTION_TOL:
                raise ValueError(f"{name} is not normalized")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def total_time(self):
        """Machine operation time T = (N-1) tau."""
        return (self.n - 1) * self.tau

    @property
    def coefficients(self):
        """Effective branch weights conj(beta_n) * alpha_n."""
        return self.beta.conj() * self.alpha


@dataclass(frozen=True, eq=False)
class DesignResult:
    n: int
    tau: float
    t_prime: float
    gamma: np.ndarray
    residual: float
    conditioning: float

    def to_json(self):
        return {
            "n": self.n,
            "tau": self.tau,
            "t_prime": self.t_prime,
            "gamma": qcore.to_pairs(self.gamma),
            "residual": self.residual,
        }


@dataclass(frozen=True, eq=False)
class EffectiveKernel:
    matrix: np.ndarray

    @property
    def sigma_max(self):
        return float(np.linalg.norm(self.matrix, 2))


def transfer_function(gamma, tau, energies):
    """sum_n gamma_n exp(-i E n tau) evaluated at each energy."""
    gamma = np.asarray(gamma, dtype=complex)
    n = np.arange(gamma.size)
    return np.exp(-1j * np.outer(energies, n) * tau) @ gamma


def band_residual(gamma, tau, t_prime, energies):
    target = np.exp(-1j * np.asarray(energies) * t_prime)
    return float(np.max(np.abs(transfer_function(gamma, tau, energies) - target)))


def design_coefficients(n, tau, t_prime, band, ridge=1e-12):
    """Fit branch weights so the machine imitates exp(-iHT') over ``band``.

    Least squares on the band grid with Tikhonov damping: singular value
    ``s`` of the design matrix is filtered by ``s / (s^2 + lam^2)`` with
    ``lam = ridge * s_max``, so ``ridge`` is a relative cutoff.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if not tau > 0:
        raise ValueError("tau must be positive")
    if n > 1 and band.width * tau >= 2 * np.pi:
        raise InfeasibleBand(f"band width x tau = {band.width * tau:.3f} wraps the phase (>= 2 pi)")

    energies = band.grid()
    design = np.exp(-1j * np.outer(energies, np.arange(n)) * tau)
    u, s, vh = np.linalg.svd(design, full_matrices=False)
    cond = float(s[0] / s[-1]) if s[-1] > 0 else float("inf")

    steps = t_prime / tau
    k = int(round(steps))
    if abs(steps - k) < 1e-12 and 0 <= k < n:
        # T' is one of the branch times: select that branch outright
        gamma = np.zeros(n, dtype=complex)
        gamma[k] = 1.0
    else:
        target = np.exp(-1j * energies * t_prime)
        lam = ridge * s[0]
        gamma = vh.conj().T @ (s / (s**2 + lam**2) * (u.conj().T @ target))

    if cond > ILL_CONDITIONED:
        warnings.warn(
            f"band design matrix condition number {cond:.2e} exceeds {ILL_CONDITIONED:.0e}",
            IllConditioned,
            stacklevel=2,
        )
    gamma.setflags(write=False)
    residual = band_residual(gamma, tau, t_prime, energies)
    return DesignResult(n, float(tau), float(t_prime), gamma, residual, cond)


def factorize_design(gamma):
    """Split weights into normalized machine states with conj(beta) * alpha = gamma / sum|gamma|.

    ``alpha`` carries the phases, ``beta`` is real and non-negative.
    """
    gamma = np.asarray(gamma, dtype=complex)
    mag = np.abs(gamma)
    total = mag.sum()
    if total == 0:
        raise ZeroDesign("all branch weights are zero")
    root = np.sqrt(mag / total)
    alpha = root * np.exp(1j * np.angle(gamma))
    beta = root.astype(complex)
    return alpha, beta


def machine_from_gamma(gamma, tau, t_target):
    alpha, beta = factorize_design(gamma)
    return MachineSpec(len(alpha), float(tau), alpha, beta, float(t_target))


def machine_from_design(design):
    return machine_from_gamma(design.gamma, design.tau, design.t_prime)


def effective_kernel(spec, H):
    """K = sum_n conj(beta_n) alpha_n U(tau)^n, accumulated by repeated multiplication."""
    u = qcore.unitary_from_hamiltonian(H, spec.tau).entries
    d = u.shape[0]
    power = np.eye(d, dtype=complex)
    k = np.zeros((d, d), dtype=complex)
    for c in spec.coefficients:
        k += c * power
        power = u @ power
    k.setflags(write=False)
    return EffectiveKernel(k)


def success_probability(K, psi):
    """||K psi||^2: probability that the machine's post-selection fires."""
    _, norm = qcore.apply(K, psi)
    return norm**2


def translation_fidelity(K, H, t_prime, psi):
    """Overlap of the normalized machine output with the T'-evolved input.

    Returns ``(fidelity, p)``.
    """
    out, norm = qcore.apply(K, psi)
    if norm <= 1e-12:
        raise PostSelectionNeverSucceeds(f"||K psi|| = {norm:.3e}")
    target, _ = qcore.apply(qcore.unitary_from_hamiltonian(H, t_prime), psi)
    fid = abs(np.vdot(target, out)) ** 2 / norm**2
    return float(min(fid, 1.0)), norm**2


def classical_time_bound(gamma, tau):
    """Effective time of a branch mixture and whether it is a classical one.

    Non-negative real weights form a convex combination of the branch times
    ``n * tau`` and so can only land in ``[0, (N-1) tau]``. Any other weights
    are reported as non-classical with ``tau * Re(sum n gamma_n / sum gamma_n)``.
    Returns ``(is_classical, weak_time)``.
    """
    gamma = np.asarray(gamma, dtype=complex)
    if not np.any(gamma):
        raise ZeroDesign("all branch weights are zero")
    n = np.arange(gamma.size)
    is_classical = bool(np.all(gamma.imag == 0) and np.all(gamma.real >= 0))
    if is_classical:
        w = gamma.real / gamma.real.sum()
        t = tau * float(np.dot(w, n))
        lo, hi = sorted((0.0, (gamma.size - 1) * tau))
        slack = 1e-12 * max(abs(hi - lo), abs(tau))
        if not lo - slack <= t <= hi + slack:
            raise AssertionError(f"convex combination {t} escaped [{lo}, {hi}]")
        # rounding only
        return True, min(max(t, lo), hi)
    total = gamma.sum()
    if total == 0:
        # orthogonal machine states: the first-order time diverges
        num = np.dot(gamma, n).real * tau
        return False, float(np.sign(num) * np.inf) if num else float("nan")
    return False, float(tau * (np.dot(gamma, n) / total).real)


def random_band_hamiltonian(d, band, rng):
    """Random Hermitian whose eigenvalues are drawn uniformly inside ``band``."""
    e = np.sort(rng.uniform(band.e_min, band.e_max, size=d))
    v = qcore.random_unitary(d, rng)
    return qcore.HermitianOperator((v * e) @ v.conj().T)


def band_limited_state(spectrum, band, rng):
    """Complex-Gaussian combination of the eigenvectors whose energies lie in ``band``."""
    inside = band.contains(spectrum.eigenvalues)
    if not inside.any():
        raise EmptyInput("Hamiltonian has no eigenvalue inside the band")
    k = int(inside.sum())
    c = rng.normal(size=k) + 1j * rng.normal(size=k)
    return qcore.normalize(spectrum.eigenvectors[:, inside] @ c)


@dataclass(frozen=True)
class AuditRow:
    system_id: int
    state_id: int
    fidelity: float
    success_prob: float


@dataclass(frozen=True, eq=False)
class AuditReport:
    rows: list
    t_prime: float

    @property
    def fidelities(self):
        return np.array([r.fidelity for r in self.rows])

    @property
    def success_probs(self):
        return np.array([r.success_prob for r in self.rows])

    def summary(self):
        f, p = self.fidelities, self.success_probs
        qs = (0.0, 0.05, 0.5, 0.95, 1.0)
        return {
            "n_rows": len(self.rows),
            "fidelity_quantiles": dict(zip(map(str, qs), np.quantile(f, qs).tolist())),
            "success_prob_quantiles": dict(zip(map(str, qs), np.quantile(p, qs).tolist())),
        }

    def records(self):
        return [
            {"system_id": r.system_id, "state_id": r.state_id, "fidelity": r.fidelity, "success_prob": r.success_prob}
            for r in self.rows
        ]


def universality_audit(spec, H_list, n_states, band, seed, t_prime=None):
    """Translation fidelity and success probability over systems and band-limited states.

    Each system gets its own substream spawned from ``seed``; states are random
    combinations of that system's in-band eigenvectors only.
    """
    if not H_list or n_states < 1:
        raise EmptyInput("audit needs at least one Hamiltonian and one state")
    t_prime = spec.t_target if t_prime is None else t_prime
    rows = []
    for sys_id, (H, rng) in enumerate(zip(H_list, block_generators(seed, len(H_list)))):
        spectrum = qcore.eigh(H)
        K = effective_kernel(spec, H)
        target = qcore.unitary_from_hamiltonian(spectrum, t_prime)
        for state_id in range(n_states):
            psi = band_limited_state(spectrum, band, rng)
            out, norm = qcore.apply(K, psi)
            if norm <= 1e-12:
                raise PostSelectionNeverSucceeds(f"system {sys_id} state {state_id}: ||K psi|| = {norm:.3e}")
            ideal, _ = qcore.apply(target, psi)
            fid = min(abs(np.vdot(ideal, out)) ** 2 / norm**2, 1.0)
            rows.append(AuditRow(sys_id, state_id, float(fid), norm**2))
    return AuditReport(rows, float(t_prime))


def standard_systems(band, dims=(2, 4, 8), seed=0):
    """Seeded in-band Hamiltonians of the given dimensions."""
    gens = block_generators([seed, 0xB4D], len(dims))
    return [random_band_hamiltonian(d, band, rng) for d, rng in zip(dims, gens)]
