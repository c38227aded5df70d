"""MZI-mesh simulation: unitary decomposition, SVD weight realization, detection.

A single MZI couples adjacent modes (i, i+1) with the 2x2 transfer

    T(theta, phi) = i e^{i theta/2} [[e^{i phi} sin(theta/2), cos(theta/2)],
                                     [e^{i phi} cos(theta/2), -sin(theta/2)]]

so theta = pi is the bar state and theta = 0 full cross coupling.  A
rectangular mesh of N(N-1)/2 such settings followed by one output phase per
mode realizes any N x N unitary; an arbitrary real weight matrix becomes two
meshes around a diagonal attenuation column via its SVD, with the largest
singular value pulled out as a scalar gain so the attenuations stay passive
(in [0, 1]).

Everything here works at transfer-matrix fidelity: phase settings stand in
for the physical permittivities, and nonlinearities between meshes are
applied as ideal real functions on the detected field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import ForwardTrace, Network, activation_apply

__all__ = [
    "MZISetting",
    "MeshProgram",
    "PhotonicLayer",
    "MeshBackend",
    "mzi_transfer",
    "mesh_forward",
    "transfer_matrix",
    "unitarity_residual",
    "clements_decompose",
    "realize_weight",
    "detect_intensity",
    "apply_phase_noise",
]

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MZISetting:
    """Phases of one MZI coupling modes (mode, mode + 1)."""

    mode: int
    theta: float
    phi: float

    def __post_init__(self) -> None:
        if self.mode < 0:
            raise ValueError(f"mode index must be >= 0, got {self.mode}")
        for name, value in (("theta", self.theta), ("phi", self.phi)):
            if not 0.0 <= value < TWO_PI:
                raise ValueError(f"{name} must lie in [0, 2pi), got {value}")


def mzi_transfer(setting: MZISetting) -> np.ndarray:
    """2x2 unitary transfer matrix of one MZI."""
    half = 0.5 * setting.theta
    s, c = np.sin(half), np.cos(half)
    pref = 1j * np.exp(0.5j * setting.theta)
    ephi = np.exp(1j * setting.phi)
    return pref * np.array([[ephi * s, c], [ephi * c, -s]])


@dataclass(frozen=True)
class MeshProgram:
    """Ordered MZI settings plus a final output phase screen.

    Stored as parallel arrays; ``settings`` exposes them as MZISetting values.
    Phases are wrapped into [0, 2pi) at construction.  Application order is
    list order: the first setting acts on the input field first, the phase
    screen last.
    """

    n: int
    modes: np.ndarray
    thetas: np.ndarray
    phis: np.ndarray
    out_phases: np.ndarray

    def __post_init__(self) -> None:
        modes = np.asarray(self.modes, dtype=int)
        thetas = np.mod(np.asarray(self.thetas, dtype=float), TWO_PI)
        phis = np.mod(np.asarray(self.phis, dtype=float), TWO_PI)
        out = np.mod(np.asarray(self.out_phases, dtype=float), TWO_PI)
        expected = self.n * (self.n - 1) // 2
        if not (len(modes) == len(thetas) == len(phis) == expected):
            raise ValueError(
                f"mesh of dimension {self.n} needs exactly {expected} MZIs, "
                f"got {len(modes)}"
            )
        if out.shape != (self.n,):
            raise ValueError(f"output phase screen must have length {self.n}")
        if modes.size and (modes.min() < 0 or modes.max() > self.n - 2):
            raise ValueError("MZI mode indices out of range")
        for name, arr in (("modes", modes), ("thetas", thetas), ("phis", phis), ("out_phases", out)):
            object.__setattr__(self, name, arr)

    @property
    def settings(self) -> tuple[MZISetting, ...]:
        return tuple(
            MZISetting(int(m), float(t), float(p))
            for m, t, p in zip(self.modes, self.thetas, self.phis)
        )

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "mzis": [
                {"i": int(m), "theta": float(t), "phi": float(p)}
                for m, t, p in zip(self.modes, self.thetas, self.phis)
            ],
            "out_phases": self.out_phases.tolist(),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "MeshProgram":
        doc = json.loads(text)
        mzis = doc["mzis"]
        return cls(
            n=doc["n"],
            modes=np.array([m["i"] for m in mzis], dtype=int),
            thetas=np.array([m["theta"] for m in mzis]),
            phis=np.array([m["phi"] for m in mzis]),
            out_phases=np.array(doc["out_phases"]),
        )


def mesh_forward(prog: MeshProgram, field: np.ndarray) -> np.ndarray:
    """Propagate a complex field (length n, or (n, B) batch) through the mesh."""
    field = np.asarray(field, dtype=complex)
    if field.shape[0] != prog.n:
        raise ValueError(f"field length {field.shape[0]} != mesh dimension {prog.n}")
    v = field.copy()
    for m, theta, phi in zip(prog.modes, prog.thetas, prog.phis):
        half = 0.5 * theta
        s, c = np.sin(half), np.cos(half)
        pref = 1j * np.exp(0.5j * theta)
        ephi = np.exp(1j * phi)
        top = v[m].copy()
        bot = v[m + 1]
        v[m] = pref * (ephi * s * top + c * bot)
        v[m + 1] = pref * (ephi * c * top - s * bot)
    shape = (prog.n,) + (1,) * (v.ndim - 1)
    return v * np.exp(1j * prog.out_phases).reshape(shape)


def transfer_matrix(prog: MeshProgram) -> np.ndarray:
    """Dense n x n matrix of the mesh's action (mesh applied to the identity)."""
    return mesh_forward(prog, np.eye(prog.n, dtype=complex))


def unitarity_residual(prog: MeshProgram) -> float:
    """Frobenius norm of T^H T - I for the mesh's transfer matrix T."""
    t = transfer_matrix(prog)
    return float(np.linalg.norm(t.conj().T @ t - np.eye(prog.n)))


def _apply_right_dagger(work: np.ndarray, m: int, theta: float, phi: float) -> None:
    """In place: work <- work @ T(theta, phi)^H acting on columns (m, m+1)."""
    half = 0.5 * theta
    s, c = np.sin(half), np.cos(half)
    pref = -1j * np.exp(-0.5j * theta)
    emphi = np.exp(-1j * phi)
    col = work[:, m].copy()
    col1 = work[:, m + 1]
    work[:, m] = pref * (emphi * s * col + c * col1)
    work[:, m + 1] = pref * (emphi * c * col - s * col1)


def _apply_left(work: np.ndarray, m: int, theta: float, phi: float) -> None:
    """In place: work <- T(theta, phi) @ work acting on rows (m, m+1)."""
    half = 0.5 * theta
    s, c = np.sin(half), np.cos(half)
    pref = 1j * np.exp(0.5j * theta)
    ephi = np.exp(1j * phi)
    row = work[m, :].copy()
    row1 = work[m + 1, :]
    work[m, :] = pref * (ephi * s * row + c * row1)
    work[m + 1, :] = pref * (ephi * c * row - s * row1)


def clements_decompose(u: np.ndarray) -> MeshProgram:
    """Factor a unitary into a rectangular mesh program.

    Sweeps the anti-diagonals, nulling below-diagonal elements alternately by
    right multiplications with inverse MZIs (odd sweeps, acting on columns)
    and left multiplications (even sweeps, acting on rows), then pushes the
    remaining diagonal through the left factors so every MZI ends up on the
    input side of the phase screen.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    n = u.shape[0]
    residual = float(np.linalg.norm(u.conj().T @ u - np.eye(n)))
    if residual > 1e-8:
        raise ValueError(f"input is not unitary: ||U^H U - I||_F = {residual:.3e}")

    work = u.copy()
    rights: list[tuple[int, float, float]] = []
    lefts: list[tuple[int, float, float]] = []
    for i in range(1, n):
        if i % 2 == 1:
            for j in range(i):
                r = n - 1 - j
                m = i - 1 - j
                a, b = work[r, m], work[r, m + 1]
                theta = 2.0 * np.arctan2(abs(b), abs(a))
                phi = -np.angle(-b * np.conj(a))
                _apply_right_dagger(work, m, theta, phi)
                rights.append((m, theta, phi))
        else:
            for j in range(1, i + 1):
                r = n + j - i - 1
                col = j - 1
                m = r - 1
                a, b = work[r - 1, col], work[r, col]
                theta = 2.0 * np.arctan2(abs(a), abs(b))
                phi = np.angle(b * np.conj(a))
                _apply_left(work, m, theta, phi)
                lefts.append((m, theta, phi))

    # work is now diagonal; commute it through the left factors.
    d = np.diag(work).astype(complex).copy()
    converted: list[tuple[int, float, float]] = []
    for m, theta, phi in reversed(lefts):
        a, b = d[m], d[m + 1]
        phi_new = float(np.angle(a * np.conj(b)))
        d[m] = -b * np.exp(-1j * (theta + phi))
        d[m + 1] = -b * np.exp(-1j * theta)
        converted.append((m, theta, phi_new))

    ops = rights + converted
    return MeshProgram(
        n=n,
        modes=np.array([op[0] for op in ops], dtype=int),
        thetas=np.array([op[1] for op in ops]),
        phis=np.array([op[2] for op in ops]),
        out_phases=np.angle(d),
    )


def detect_intensity(field: np.ndarray) -> np.ndarray:
    """Photodetector reading per port: |z|^2 (the square activation on real fields)."""
    field = np.asarray(field)
    return (field * field.conj()).real


@dataclass(frozen=True)
class PhotonicLayer:
    """A real weight matrix realized as mesh(U) . attenuation . mesh(V^H), times a gain."""

    mesh_v: MeshProgram
    sigma: np.ndarray
    mesh_u: MeshProgram
    scale: float

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim != 1 or sigma.shape[0] != min(self.in_dim, self.out_dim):
            raise ValueError("sigma must have length min(out_dim, in_dim)")
        if sigma.size and (sigma.min() < 0.0 or sigma.max() > 1.0 + 1e-12):
            raise ValueError("attenuations must lie in [0, 1]")
        object.__setattr__(self, "sigma", sigma)

    @property
    def in_dim(self) -> int:
        return self.mesh_v.n

    @property
    def out_dim(self) -> int:
        return self.mesh_u.n

    def forward(self, field: np.ndarray) -> np.ndarray:
        """Propagate a field (length in_dim, or batch) through both meshes."""
        v = mesh_forward(self.mesh_v, field)
        k = self.sigma.shape[0]
        shape = (self.out_dim,) + v.shape[1:]
        mid = np.zeros(shape, dtype=complex)
        sig = self.sigma.reshape((k,) + (1,) * (v.ndim - 1))
        mid[:k] = sig * v[:k]
        return self.scale * mesh_forward(self.mesh_u, mid)

    @cached_property
    def realized_matrix(self) -> np.ndarray:
        """Dense out_dim x in_dim matrix implemented by the layer."""
        tv = transfer_matrix(self.mesh_v)
        tu = transfer_matrix(self.mesh_u)
        k = self.sigma.shape[0]
        embed = np.zeros((self.out_dim, self.in_dim), dtype=complex)
        embed[np.arange(k), np.arange(k)] = self.sigma
        return self.scale * (tu @ embed @ tv)


def realize_weight(w: np.ndarray) -> PhotonicLayer:
    """Realize a real matrix photonically via its SVD, W = scale * U Sigma V^H.

    ``scale`` is the largest singular value so the attenuation column stays in
    [0, 1] (for the all-zero matrix the scale is set to 1).
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2:
        raise ValueError(f"weight must be 2-D, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise ValueError("weight contains non-finite values")
    u, s, vh = np.linalg.svd(w)
    scale = float(s[0]) if s.size and s[0] > 0.0 else 1.0
    return PhotonicLayer(
        mesh_v=clements_decompose(vh),
        sigma=s / scale,
        mesh_u=clements_decompose(u),
        scale=scale,
    )


def apply_phase_noise(prog: MeshProgram, sigma_phase: float, seed: int) -> MeshProgram:
    """Perturb every phase (thetas, phis, output screen) with i.i.d. Gaussian noise.

    Phase-only perturbations, so the result is exactly unitary again.
    """
    if sigma_phase < 0.0:
        raise ValueError("sigma_phase must be >= 0")
    rng = np.random.default_rng(seed)
    k = prog.modes.shape[0]
    return MeshProgram(
        n=prog.n,
        modes=prog.modes,
        thetas=prog.thetas + rng.normal(0.0, sigma_phase, k),
        phis=prog.phis + rng.normal(0.0, sigma_phase, k),
        out_phases=prog.out_phases + rng.normal(0.0, sigma_phase, prog.n),
    )


class MeshBackend:
    """Evaluates a dense network through its photonic realization.

    Each layer's weight is realized as a PhotonicLayer; forwards run through
    the realized transfer matrices (numerically the mesh's exact action), the
    detected field is its real part, and activations are applied as ideal
    real functions.  ``refresh`` re-realizes after a weight update.
    """

    def __init__(self, net: Network):
        self.refresh(net)

    def refresh(self, net: Network) -> None:
        self.layers = [realize_weight(layer.weight) for layer in net.layers]
        self.activations = [layer.activation for layer in net.layers]
        self._matrices = [pl.realized_matrix for pl in self.layers]

    def forward(self, x0: np.ndarray) -> ForwardTrace:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape[0] != self._matrices[0].shape[1]:
            raise ValueError(
                f"input length {x0.shape[0]} != realized in_dim {self._matrices[0].shape[1]}"
            )
        zs, xs = [], []
        x = x0
        for mat, act in zip(self._matrices, self.activations):
            z = (mat @ x).real
            x = activation_apply(act, z)
            zs.append(z)
            xs.append(x)
        return ForwardTrace(x0=x0, zs=tuple(zs), xs=tuple(xs))
