"""Jones-calculus model of a birefringent retarder between two polarizers.

Polarization vectors are written in the (fast axis, slow axis) basis. The
retarder is the symmetric phase unitary ``diag(exp(i d/2), exp(-i d/2))``, so
its generator is ``sigma_z / 2`` and small retardations probe the weak value
of ``sigma_z`` between the two filter states.
"""

from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import ModeGridMismatch, VanishingTransmission
from .timemachine import classical_time_bound, machine_from_gamma
from .weakmeas import weak_value


def polarization(theta):
    """Linear polarization at angle ``theta`` (radians) from the fast axis."""
    return qcore.State(np.array([np.cos(theta), np.sin(theta)], dtype=complex))


def polarization_deg(angle):
    return polarization(np.deg2rad(angle))


def retarder_unitary(delta):
    half = 0.5 * float(delta)
    return qcore.UnitaryOperator(np.diag([np.exp(1j * half), np.exp(-1j * half)]))


def filtered_transmission(pre, post, delta):
    """Amplitude <post| R(delta) |pre> transmitted through both filters."""
    pre, post = qcore.as_vector(pre), qcore.as_vector(post)
    half = 0.5 * np.asarray(delta, dtype=float)
    t = np.conj(post[0]) * pre[0] * np.exp(1j * half) + np.conj(post[1]) * pre[1] * np.exp(-1j * half)
    return complex(t) if np.ndim(t) == 0 else t


def effective_phase_gain(pre, post, delta):
    """Transmitted phase and its ratio to the bare retarder phase ``delta/2``.

    The phase is taken relative to the zero-retardation transmission
    ``<post|pre>``, so a filter pair with negative overlap does not add pi.
    """
    if delta == 0:
        raise ValueError("gain is undefined at zero retardation")
    t = filtered_transmission(pre, post, delta)
    if abs(t) < 1e-12:
        raise VanishingTransmission(f"|t| = {abs(t):.3e} at delta = {delta}")
    ref = qcore.inner(post, pre)
    phase = float(np.angle(t * np.conj(ref))) if abs(ref) > 0 else float(np.angle(t))
    return phase, phase / (0.5 * delta)


def sweep(pre, post, deltas):
    """Rows of (delta, phase, gain, throughput) over a list of retardations."""
    rows = []
    for d in deltas:
        d = float(d)
        t = filtered_transmission(pre, post, d)
        phase, gain = effective_phase_gain(pre, post, d)
        rows.append({"delta": d, "phase": phase, "gain": gain, "throughput": abs(t) ** 2})
    return rows


@dataclass(frozen=True)
class Dispersion:
    """Retardation as a function of mode frequency.

    ``constant``: delta(omega) = delta0.
    ``linear``: delta(omega) = delta0 + slope * (omega - omega0).
    """

    kind: str = "constant"
    delta0: float = 0.0
    slope: float = 0.0
    omega0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear"):
            raise ValueError(f"unknown dispersion rule {self.kind!r}")

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        if self.kind == "constant":
            return np.full_like(omega, self.delta0)
        return self.delta0 + self.slope * (omega - self.omega0)


@dataclass(frozen=True, eq=False)
class WavePacket:
    omegas: np.ndarray
    amplitudes: np.ndarray
    dispersion: Dispersion = Dispersion()
    throughput: float = 1.0
    normalized: bool = True

    def __post_init__(self):
        w = np.array(self.omegas, dtype=float)
        c = np.array(self.amplitudes, dtype=complex)
        if w.ndim != 1 or w.shape != c.shape or w.size == 0:
            raise ModeGridMismatch("mode frequencies and amplitudes must be equal-length vectors")
        if np.any(np.diff(w) <= 0):
            raise ValueError("mode frequencies must be strictly increasing")
        if self.normalized and abs(np.linalg.norm(c) - 1) > 1e-10:
            raise ValueError("packet amplitudes are not normalized")
        w.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "amplitudes", c)

    def records(self):
        return [{"omega": w, "re": c.real, "im": c.imag} for w, c in zip(self.omegas.tolist(), self.amplitudes.tolist())]

    @classmethod
    def from_records(cls, rows, dispersion=Dispersion()):
        w = [float(r["omega"]) for r in rows]
        c = np.array([float(r["re"]) + 1j * float(r["im"]) for r in rows])
        return cls(w, c / np.linalg.norm(c), dispersion)


def gaussian_packet(n_modes, omega0, sigma, dispersion=Dispersion(), span=4.0):
    """Equally spaced modes over ``omega0 +- span*sigma``; |c|^2 is Gaussian with std ``sigma``."""
    w = np.linspace(omega0 - span * sigma, omega0 + span * sigma, n_modes) if n_modes > 1 else np.array([omega0])
    c = np.exp(-((w - omega0) ** 2) / (4 * sigma**2)).astype(complex)
    return WavePacket(w, c / np.linalg.norm(c), dispersion)


def linear_dispersion_for_span(pre, post, omega0, sigma, delta0, phase_span=0.5):
    """Linear dispersion whose weak-value phase ``Re(A_w) * delta`` changes by
    ``phase_span`` between ``omega0 - sigma`` and ``omega0 + sigma``."""
    gain = weak_gain(pre, post)
    slope = phase_span / (gain * 2 * sigma)
    return Dispersion("linear", delta0, slope, omega0)


def weak_gain(pre, post):
    """Re of the sigma_z weak value between the filter states: the small-delta gain."""
    return weak_value(qcore.SIGMA_Z, (pre, post)).real


def wavepacket_transmit(wp, pre, post):
    """Multiply every mode by its own filtered transmission.

    The result is unnormalized; its ``throughput`` is the transmitted power.
    """
    t = filtered_transmission(pre, post, wp.dispersion(wp.omegas))
    out = wp.amplitudes * t
    return WavePacket(wp.omegas, out, wp.dispersion, float(np.sum(np.abs(out) ** 2)), normalized=False)


def ideal_advanced_packet(wp, pre, post):
    """The packet a universal device would produce: every mode receives the
    transmission of the carrier mode at the dispersion reference frequency."""
    d = wp.dispersion
    t0 = filtered_transmission(pre, post, float(d(d.omega0)))
    out = wp.amplitudes * t0
    return WavePacket(wp.omegas, out, d, float(np.sum(np.abs(out) ** 2)), normalized=False)


def distortion_metric(out, ideal):
    """1 - |<ideal|out>|^2 / (||ideal||^2 ||out||^2); zero iff the packets are proportional."""
    if out.omegas.shape != ideal.omegas.shape or not np.allclose(out.omegas, ideal.omegas, rtol=0, atol=1e-12):
        raise ModeGridMismatch("packets are defined on different mode grids")
    a, b = ideal.amplitudes, out.amplitudes
    na, nb = np.vdot(a, a).real, np.vdot(b, b).real
    if na == 0 or nb == 0:
        raise VanishingTransmission("cannot compare an empty packet")
    return float(min(max(1 - abs(np.vdot(a, b)) ** 2 / (na * nb), 0.0), 1.0))


def map_to_machine(pre, post, delta):
    """Two-branch time machine equivalent to the filtered retarder.

    Branch ``n`` is the ``n``-th polarization component with weight
    ``conj(post_n) pre_n``. Energies are measured in units of the probed mode,
    so ``tau = delta`` and the mode at E = 1 picks up ``exp(-i delta)`` between
    branches; on that mode the machine reproduces ``exp(-i delta/2) t``.
    """
    pre, post = qcore.as_vector(pre), qcore.as_vector(post)
    gamma = post.conj() * pre
    _, t_weak = classical_time_bound(gamma, delta)
    return machine_from_gamma(gamma, delta, t_weak)
