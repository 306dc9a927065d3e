"""
kinetic-hypo: Nonlocal Kinetic Fokker-Planck Toolkit
License: MIT (see LICENSE file for details)

Closed-form source terms and test functions on phase space R^d x R^d.

Fourier convention: ``hat f(k) = int exp(i k.z) f(z) dz`` with z = (x, v) and
k = (xi, eta); the inverse carries ``(2 pi)^(-2d) exp(-i k.z)``.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy import integrate

from kinetic_hypo.core.exceptions import ValidationError, validate_positive

WINDOW_KINDS = ("bump", "box")


def _vector(value, n: int, name: str, op: str) -> np.ndarray:
    arr = np.zeros(n) if value is None else np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (n,) or not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be a finite vector of length {n}", operation=op)
    return arr


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """
    Gaussian wave-packet source with a compact time window.

    The phase-space transform is

        hat f(t, k) = amplitude * w(t) * exp(i k.shift) * [G(k - k0) + G(k + k0)],
        G(q) = exp(-sum_j q_j^2 / (2 s_j^2)),

    with bandwidth ``s_j = bandwidth`` on x-axes and ``bandwidth_v`` on v-axes
    (defaulting to ``bandwidth``). The symmetrized pair makes f real.

    Args:
        dim: Spatial dimension d.
        center_freq: k0 = (xi0, eta0) of length 2d.
        bandwidth: Frequency bandwidth on the x-axes.
        time_window: (T_a, T_b) support of the window.
        amplitude: Real amplitude.
        bandwidth_v: Frequency bandwidth on the v-axes.
        shift: Phase-space translation (x_shift, v_shift) of length 2d.
        window: "bump" (C-infinity, w = 1 at the midpoint) or "box" (indicator).
        bump_exponent: p in w = exp(p - p / (1 - tau^2)).
    """

    dim: int
    center_freq: np.ndarray
    bandwidth: float
    time_window: Tuple[float, float]
    amplitude: float = 1.0
    bandwidth_v: Optional[float] = None
    shift: np.ndarray = None
    window: str = "bump"
    bump_exponent: float = 1.0
    kind: str = "gaussian_packet"

    def __post_init__(self):
        op = "sources.SourceSpec"
        n = 2 * self.dim
        object.__setattr__(self, "center_freq", _vector(self.center_freq, n, "center_freq", op))
        object.__setattr__(self, "shift", _vector(self.shift, n, "shift", op))
        validate_positive(self.bandwidth, "bandwidth", op)
        if self.bandwidth_v is None:
            object.__setattr__(self, "bandwidth_v", float(self.bandwidth))
        validate_positive(self.bandwidth_v, "bandwidth_v", op)
        t_a, t_b = (float(t) for t in self.time_window)
        if not t_b > t_a:
            raise ValidationError(
                f"time window must satisfy T_a < T_b, got ({t_a}, {t_b})", operation=op
            )
        object.__setattr__(self, "time_window", (t_a, t_b))
        if self.window not in WINDOW_KINDS:
            raise ValidationError(
                f"window must be one of {WINDOW_KINDS}, got {self.window!r}", operation=op
            )
        if self.kind != "gaussian_packet":
            raise ValidationError(f"unsupported source kind {self.kind!r}", operation=op)
        validate_positive(self.bump_exponent, "bump_exponent", op)
        if not np.isfinite(self.amplitude):
            raise ValidationError("amplitude must be finite", operation=op)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    # -------------------------------------------------------------------------

    @property
    def scales(self) -> np.ndarray:
        """Per-axis bandwidths (x-axes first)."""
        return np.concatenate(
            [np.full(self.dim, float(self.bandwidth)), np.full(self.dim, float(self.bandwidth_v))]
        )

    def window_value(self, t) -> np.ndarray:
        """w(t); zero outside [T_a, T_b)."""
        t = np.asarray(t, dtype=float)
        t_a, t_b = self.time_window
        if self.window == "box":
            return np.where((t >= t_a) & (t < t_b), 1.0, 0.0)
        tau = (2.0 * t - t_a - t_b) / (t_b - t_a)
        inside = np.abs(tau) < 1.0
        safe = np.where(inside, 1.0 - tau**2, 1.0)
        p = self.bump_exponent
        return np.where(inside, np.exp(p - p / safe), 0.0)

    def window_integral(self, power: int = 1) -> float:
        """int w(t)^power dt over the window."""
        t_a, t_b = self.time_window
        if self.window == "box":
            return t_b - t_a
        value, _ = integrate.quad(
            lambda t: float(self.window_value(t)) ** power, t_a, t_b, epsabs=0.0, epsrel=1e-13,
            limit=200,
        )
        return value

    def hat(self, k: np.ndarray) -> np.ndarray:
        """Time-independent spectrum: hat f(t, k) = amplitude * w(t) * hat(k)."""
        k = np.asarray(k, dtype=float)
        s2 = self.scales**2
        g_minus = np.exp(-0.5 * np.sum((k - self.center_freq) ** 2 / s2, axis=-1))
        g_plus = np.exp(-0.5 * np.sum((k + self.center_freq) ** 2 / s2, axis=-1))
        return np.exp(1j * (k @ self.shift)) * (g_minus + g_plus)

    def hat_grad_v(self, k: np.ndarray) -> np.ndarray:
        """Gradient of ``hat`` with respect to the eta components, shape (..., d)."""
        k = np.asarray(k, dtype=float)
        d = self.dim
        s2 = self.scales**2
        phase = np.exp(1j * (k @ self.shift))
        g_minus = np.exp(-0.5 * np.sum((k - self.center_freq) ** 2 / s2, axis=-1))
        g_plus = np.exp(-0.5 * np.sum((k + self.center_freq) ** 2 / s2, axis=-1))
        eta, eta0, sv2 = k[..., d:], self.center_freq[d:], s2[d:]
        d_minus = -(eta - eta0) / sv2 * g_minus[..., None]
        d_plus = -(eta + eta0) / sv2 * g_plus[..., None]
        total = (g_minus + g_plus)[..., None]
        return phase[..., None] * (d_minus + d_plus + 1j * self.shift[d:] * total)

    def transform(self, t, k: np.ndarray) -> np.ndarray:
        """Full transform hat f(t, k) for a scalar time t."""
        return self.amplitude * float(self.window_value(t)) * self.hat(k)

    def evaluate(self, t, z: np.ndarray) -> np.ndarray:
        """Physical value f(t, z) at points z of shape (..., 2d)."""
        z = np.asarray(z, dtype=float) - self.shift
        n = 2 * self.dim
        s = self.scales
        prefactor = (2.0 * math.pi) ** (-n) * np.prod(np.sqrt(2.0 * math.pi) * s)
        envelope = np.exp(-0.5 * np.sum((s * z) ** 2, axis=-1))
        carrier = 2.0 * np.cos(z @ self.center_freq)
        return self.amplitude * float(self.window_value(t)) * prefactor * envelope * carrier

    def spatial_l2_norm_sq(self) -> float:
        """|f(t)|_2^2 / (amplitude w(t))^2, from Plancherel."""
        n = 2 * self.dim
        s = self.scales
        overlap = math.exp(-float(np.sum(self.center_freq**2 / s**2)))
        return (2.0 * math.pi) ** (-n) * 2.0 * float(np.prod(math.sqrt(math.pi) * s)) * (
            1.0 + overlap
        )

    def l2_norm(self) -> float:
        """Closed-form |f|_{L^2(R x R^2d)}."""
        return abs(self.amplitude) * math.sqrt(
            self.window_integral(2) * self.spatial_l2_norm_sq()
        )

    def envelope_radius(self, level: float = 1e-12) -> np.ndarray:
        """Per-axis frequency radius beyond which |hat| < level * max|hat|."""
        return np.abs(self.center_freq) + self.scales * math.sqrt(2.0 * math.log(1.0 / level))

    # -------------------------------------------------------------------------

    def with_updates(self, **kwargs) -> "SourceSpec":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(kwargs)
        return SourceSpec(**values)

    def rescaled(self, r: float, t0: float, alpha: float) -> "SourceSpec":
        """
        Source g(t, x, v) = f(r^alpha t + t0, r^(1+alpha) x, r v).

        Frequencies scale by r^(1+alpha) on x-axes and r on v-axes; the
        amplitude absorbs the Jacobian r^(-(2+alpha)d).
        """
        validate_positive(r, "r", "sources.SourceSpec.rescaled")
        d = self.dim
        factors = np.concatenate([np.full(d, r ** (1.0 + alpha)), np.full(d, r)])
        t_a, t_b = self.time_window
        scale_t = r**alpha
        return self.with_updates(
            center_freq=self.center_freq * factors,
            bandwidth=self.bandwidth * r ** (1.0 + alpha),
            bandwidth_v=self.bandwidth_v * r,
            shift=self.shift / factors,
            time_window=((t_a - t0) / scale_t, (t_b - t0) / scale_t),
            amplitude=self.amplitude * r ** (-(2.0 + alpha) * d),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "center_freq": self.center_freq.tolist(),
            "bandwidth": self.bandwidth,
            "bandwidth_v": self.bandwidth_v,
            "shift": self.shift.tolist(),
            "time_window": list(self.time_window),
            "window": self.window,
            "bump_exponent": self.bump_exponent,
            "amplitude": self.amplitude,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], dim: int) -> "SourceSpec":
        try:
            return cls(
                dim=int(data.get("dim", dim)),
                center_freq=data.get("center_freq", [0.0] * (2 * dim)),
                bandwidth=data["bandwidth"],
                time_window=tuple(data["time_window"]),
                amplitude=data.get("amplitude", 1.0),
                bandwidth_v=data.get("bandwidth_v"),
                shift=data.get("shift"),
                window=data.get("window", "bump"),
                bump_exponent=data.get("bump_exponent", 1.0),
                kind=data.get("kind", "gaussian_packet"),
            )
        except KeyError as e:
            raise ValidationError(
                f"source is missing field {e}", operation="sources.SourceSpec.from_dict"
            )


@dataclass(frozen=True, eq=False)
class GaussianWave:
    """
    Test function phi(z) = prod_j exp(-(z_j - c_j)^2 / (2 w_j^2)) * cos(a.z + phase).

    A width of ``inf`` removes the envelope on that axis, so that pure plane
    waves and functions independent of v are members of the family.
    """

    dim: int
    centers: np.ndarray = None
    widths: np.ndarray = None
    wavevector: np.ndarray = None
    phase: float = 0.0

    def __post_init__(self):
        op = "sources.GaussianWave"
        n = 2 * self.dim
        object.__setattr__(self, "centers", _vector(self.centers, n, "centers", op))
        object.__setattr__(self, "wavevector", _vector(self.wavevector, n, "wavevector", op))
        widths = np.full(n, np.inf) if self.widths is None else np.asarray(self.widths, dtype=float)
        if widths.shape != (n,) or np.any(widths <= 0):
            raise ValidationError(f"widths must be {n} positive values", operation=op)
        object.__setattr__(self, "widths", widths)

    @property
    def localized(self) -> bool:
        return bool(np.all(np.isfinite(self.widths)))

    def _inv_w2(self) -> np.ndarray:
        return np.where(np.isfinite(self.widths), 1.0 / self.widths**2, 0.0)

    def _envelope(self, z: np.ndarray) -> np.ndarray:
        return np.exp(-0.5 * np.sum((z - self.centers) ** 2 * self._inv_w2(), axis=-1))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self._envelope(z) * np.cos(z @ self.wavevector + self.phase)

    def gradient(self, z: np.ndarray) -> np.ndarray:
        """Full gradient (x-components first), shape (..., 2d)."""
        z = np.asarray(z, dtype=float)
        env = self._envelope(z)[..., None]
        arg = (z @ self.wavevector + self.phase)[..., None]
        return env * (
            -(z - self.centers) * self._inv_w2() * np.cos(arg) - self.wavevector * np.sin(arg)
        )

    def gradient_x(self, z: np.ndarray) -> np.ndarray:
        return self.gradient(z)[..., : self.dim]

    def gradient_v(self, z: np.ndarray) -> np.ndarray:
        return self.gradient(z)[..., self.dim :]

    def hessian_v(self, z: np.ndarray) -> np.ndarray:
        """v-Hessian, shape (..., d, d)."""
        z = np.asarray(z, dtype=float)
        d = self.dim
        env = self._envelope(z)
        arg = z @ self.wavevector + self.phase
        c, s = np.cos(arg), np.sin(arg)
        g = -(z - self.centers)[..., d:] * self._inv_w2()[d:]
        a = self.wavevector[d:]
        outer = (
            (g[..., :, None] * g[..., None, :] - a[:, None] * a[None, :] * 1.0)
            * c[..., None, None]
            - (g[..., :, None] * a[None, :] + a[:, None] * g[..., None, :]) * s[..., None, None]
        )
        diag = -np.diag(self._inv_w2()[d:]) * c[..., None, None]
        return env[..., None, None] * (outer + diag)

    def envelope_radius(self) -> float:
        """Distance from the centers in v beyond which the envelope is below 1e-12."""
        wv = self.widths[self.dim :]
        finite = wv[np.isfinite(wv)]
        return float(np.max(finite)) * math.sqrt(2.0 * math.log(1e12)) if finite.size else np.inf

    # Fourier side, defined for fully localized functions

    def _require_localized(self, op: str) -> None:
        if not self.localized:
            raise ValidationError(
                "Fourier transform needs finite widths on every axis", operation=op
            )

    def _gauss_hat(self, k: np.ndarray) -> np.ndarray:
        w = self.widths
        return np.prod(np.sqrt(2.0 * math.pi) * w) * np.exp(
            1j * (k @ self.centers) - 0.5 * np.sum(w**2 * k**2, axis=-1)
        )

    def hat(self, k: np.ndarray) -> np.ndarray:
        """Transform int exp(i k.z) phi(z) dz."""
        self._require_localized("sources.GaussianWave.hat")
        k = np.asarray(k, dtype=float)
        a, ph = self.wavevector, self.phase
        return 0.5 * (
            np.exp(1j * ph) * self._gauss_hat(k + a) + np.exp(-1j * ph) * self._gauss_hat(k - a)
        )

    def hat_grad_v(self, k: np.ndarray) -> np.ndarray:
        """Gradient of ``hat`` with respect to eta, shape (..., d)."""
        self._require_localized("sources.GaussianWave.hat_grad_v")
        k = np.asarray(k, dtype=float)
        d = self.dim
        a, ph, w = self.wavevector, self.phase, self.widths

        def piece(q):
            factor = 1j * self.centers[d:] - w[d:] ** 2 * q[..., d:]
            return self._gauss_hat(q)[..., None] * factor

        return 0.5 * (np.exp(1j * ph) * piece(k + a) + np.exp(-1j * ph) * piece(k - a))

    def spectral_radius(self, level: float = 1e-12) -> np.ndarray:
        """Per-axis frequency radius of the spectral envelope."""
        self._require_localized("sources.GaussianWave.spectral_radius")
        return np.abs(self.wavevector) + math.sqrt(2.0 * math.log(1.0 / level)) / self.widths
