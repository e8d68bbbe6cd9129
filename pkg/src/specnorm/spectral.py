"""Eigendecomposition of T_q, the theta parametrization and spectral projectors."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure

EDGE_TOL = 1e-12


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of a symmetric operator with lambda = 2 cos(theta).

    For |lambda| <= 2, ``thetas[j]`` is arccos(lambda/2) in [0, pi]. Otherwise
    it holds arcosh(|lambda|/2) and ``signs[j]`` records the sign of lambda.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    thetas: np.ndarray
    signs: np.ndarray
    tempered: np.ndarray

    def __len__(self):
        return self.eigenvalues.size

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,lambda,theta,tempered\n")
        for j, (lam, th, temp) in enumerate(zip(self.eigenvalues, self.thetas, self.tempered)):
            buf.write(f"{j},{lam:.15e},{th:.15e},{int(temp)}\n")
        return buf.getvalue()


def theta_of(lam):
    """Return (theta, sign, tempered) arrays for eigenvalues lam = 2cos(theta)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    tempered = np.abs(lam) <= 2.0 + EDGE_TOL
    half = np.abs(lam) / 2.0
    theta = np.where(
        tempered,
        np.arccos(np.clip(lam / 2.0, -1.0, 1.0)),
        np.arccosh(np.maximum(half, 1.0)),
    )
    return theta, np.where(lam < 0, -1.0, 1.0), tempered


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    vecs = vecs.copy()
    scale = np.max(np.abs(vecs), axis=0)
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12 * scale[j])
        if nz.size and col[nz[0]] < 0:
            vecs[:, j] = -col
    return vecs


def eig_sym(op: np.ndarray) -> SpectralData:
    """Full decomposition of a real symmetric matrix, ascending eigenvalues.

    Each eigenvector is signed so that its first nonzero entry is positive.
    """
    op = np.asarray(op, dtype=np.float64)
    try:
        lam, vecs = np.linalg.eigh(op)
    except np.linalg.LinAlgError as exc:
        norm = np.linalg.norm(op, 2) if op.size else 0.0
        raise ConvergenceFailure(
            f"eigh failed on {op.shape} matrix (2-norm {norm:.3e}, "
            f"asymmetry {np.max(np.abs(op - op.T)):.3e}): {exc}"
        ) from exc
    vecs = _fix_signs(vecs)
    theta, sign, tempered = theta_of(lam)
    return SpectralData(lam, vecs, theta, sign, tempered)


def residuals(op: np.ndarray, spec: SpectralData) -> np.ndarray:
    return np.linalg.norm(op @ spec.eigenvectors - spec.eigenvectors * spec.eigenvalues, axis=0)


@dataclass(frozen=True)
class SpectralProjector:
    epsilon: float
    matrix: np.ndarray
    included_indices: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.included_indices.size)


def included(spec: SpectralData, epsilon: float) -> np.ndarray:
    return np.flatnonzero(np.abs(spec.eigenvalues) <= 2.0 + epsilon + 1e-10)


def projector(spec: SpectralData, epsilon: float = 0.0) -> SpectralProjector:
    """Orthogonal projector onto eigenvectors with |lambda| <= 2 + epsilon."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    idx = included(spec, epsilon)
    v = spec.eigenvectors[:, idx]
    mat = v @ v.T
    return SpectralProjector(float(epsilon), 0.5 * (mat + mat.T), idx)


# ---------------------------------------------------------------------------
# spherical functions


def _cheb_parts(theta, sign, tempered, n):
    """cos(n theta) and sin((n+1)theta)/sin(theta), including the edge limits."""
    theta = np.asarray(theta, dtype=np.float64)
    if tempered:
        s = np.sin(theta)
        if abs(s) < 1e-7:
            # theta at 0 or pi: limit (n+1)(+-1)^n
            pm = 1.0 if theta < np.pi / 2 else -1.0
            return pm**n, (n + 1) * pm**n
        return np.cos(n * theta), np.sin((n + 1) * theta) / s
    t = float(theta)
    sn = sign**n
    if t < 1e-7:
        return sn, (n + 1) * sn
    return sn * np.cosh(n * t), sn * np.sinh((n + 1) * t) / np.sinh(t)


def spherical_function(q: int, theta, n: int, *, sign: float = 1.0, tempered: bool | None = None) -> float:
    """phi_theta(n) = q^{-n/2} (2/(q+1) cos(n theta) + (q-1)/(q+1) sin((n+1)theta)/sin(theta)).

    ``theta`` may be a real number (tempered), or a complex number with zero
    real part / real part pi for the untempered branches. Alternatively pass
    theta = arcosh(|lambda|/2) with ``tempered=False`` and ``sign``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 1.0
    if tempered is None:
        if isinstance(theta, complex) or np.iscomplexobj(theta):
            z = complex(theta)
            if abs(z.imag) < 1e-15:
                tempered, theta = True, z.real
            else:
                tempered = False
                sign = -1.0 if abs(z.real - np.pi) < 1e-9 else 1.0
                theta = abs(z.imag)
        else:
            tempered = True
    c, u = _cheb_parts(theta, sign, tempered, n)
    return float(q ** (-n / 2) * (2.0 / (q + 1) * c + (q - 1.0) / (q + 1) * u))


def spherical_from_lambda(q: int, lam: float, n: int) -> float:
    th, sg, temp = theta_of(lam)
    return spherical_function(q, float(th[0]), n, sign=float(sg[0]), tempered=bool(temp[0]))


def sphere_eigenvalue(q: int, lam: float, n: int) -> float:
    """Eigenvalue of the normalized sphere operator S_n on a lambda-eigenvector of T_q.

    Equals ((q+1)/q) q^{n/2} phi_theta(n) for n >= 1 and 1 for n = 0.
    """
    if n == 0:
        return 1.0
    return (q + 1) / q * q ** (n / 2) * spherical_from_lambda(q, lam, n)


@dataclass
class EigenvalueLawRow:
    n: int
    measured_constant: float
    dev_unit: float
    dev_corrected: float
    dev_fitted: float
    matches: str


def sn_eigenvalue_check(spec: SpectralData, q: int, sphere_list, tol: float = 1e-8) -> list[EigenvalueLawRow]:
    """Compare S_n psi_j against c q^{n/2} phi_{theta_j}(n) psi_j for each n.

    Reports the deviation under the plain normalization (c = 1), the
    corrected one (c = (q+1)/q for n >= 1) and the least-squares fitted c.
    """
    rows = []
    vecs = spec.eigenvectors
    for n, s_n in enumerate(sphere_list):
        base = np.array([
            q ** (n / 2) * spherical_function(q, th, n, sign=sg, tempered=bool(tp))
            for th, sg, tp in zip(spec.thetas, spec.signs, spec.tempered)
        ])
        sv = s_n @ vecs
        rayleigh = np.einsum("ij,ij->j", vecs, sv)
        c_fit = float(rayleigh @ base / (base @ base))

        def dev(c):
            return float(np.max(np.linalg.norm(sv - vecs * (c * base), axis=0)))

        c_corr = 1.0 if n == 0 else (q + 1) / q
        d_unit, d_corr, d_fit = dev(1.0), dev(c_corr), dev(c_fit)
        if d_unit <= tol and d_corr <= tol:
            which = "both"
        elif d_corr <= tol:
            which = "corrected"
        elif d_unit <= tol:
            which = "unit"
        else:
            which = "neither"
        rows.append(EigenvalueLawRow(n, c_fit, d_unit, d_corr, d_fit, which))
    return rows
