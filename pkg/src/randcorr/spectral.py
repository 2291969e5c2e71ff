"""Limiting spectral law of G H^t H G^t / (nm) at aspect ratio alpha = m/n.

The Stieltjes transform s(z) = int dF(x)/(x - z) (Herglotz convention:
Im s > 0 for Im z > 0) of the limiting eigenvalue distribution F satisfies

    (z^2/alpha) s^3 - (z(alpha-1)/alpha) s^2 - z s - 1 = 0.

For alpha < 1 the matrix has rank m < n, so F carries an atom of mass
1 - alpha at zero; the absolutely continuous part is recovered by Stieltjes
inversion f(x) = Im s(x + i eps)/pi after subtracting the atom's smeared
Lorentzian.  The cubic has spurious upper-half-plane roots, so the physical
branch is tracked by continuity from the -1/z asymptote rather than picked
by largest imaginary part.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .sampling import SeedSpec, gaussian_product

DEFAULT_GRID_POINTS = 4000
_EDGE_POINTS = 2500  # graded points resolving the hard edge at 0 (worst at alpha=1)
_EPS_CAP = 1e-6


def _cubic_coeffs(alpha: float, z):
    z = np.asarray(z, dtype=complex)
    return (z * z / alpha, -z * (alpha - 1.0) / alpha, -z,
            -np.ones_like(z))


def cubic_residual(alpha: float, z, s) -> float:
    """Relative residual of the defining cubic at (z, s)."""
    a3, a2, a1, a0 = _cubic_coeffs(alpha, z)
    num = np.abs(a3 * s**3 + a2 * s**2 + a1 * s + a0)
    den = np.abs(a3 * s**3) + np.abs(a2 * s**2) + np.abs(a1 * s) + np.abs(a0)
    return float(np.max(num / den))


def _roots_batch(alpha: float, zs: np.ndarray) -> np.ndarray:
    """All three cubic roots per z, via batched companion eigenvalues,
    polished with one Newton step."""
    a3, a2, a1, a0 = _cubic_coeffs(alpha, zs)
    n = len(zs)
    comp = np.zeros((n, 3, 3), dtype=complex)
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 0, 2] = -a0 / a3
    comp[:, 1, 2] = -a1 / a3
    comp[:, 2, 2] = -a2 / a3
    roots = np.linalg.eigvals(comp)
    a3c, a2c, a1c = a3[:, None], a2[:, None], a1[:, None]
    p = a3c * roots**3 + a2c * roots**2 + a1c * roots + a0[:, None]
    dp = 3 * a3c * roots**2 + 2 * a2c * roots + a1c
    safe = np.abs(dp) > 1e-30
    roots = np.where(safe, roots - p / np.where(safe, dp, 1.0), roots)
    return roots


def ac_support_edges(alpha: float) -> tuple[float, float]:
    """Edges of the absolutely continuous support, where the cubic's
    discriminant (a quadratic in x after factoring x^3) vanishes."""
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    b = alpha * ((alpha - 1.0) ** 2 - 18.0 * (alpha - 1.0) - 27.0)
    disc = b * b + 64.0 * alpha**2 * (alpha - 1.0) ** 3
    root = np.sqrt(max(disc, 0.0))
    x_hi = (-b + root) / (8.0 * alpha**2)
    x_lo = max(0.0, (-b - root) / (8.0 * alpha**2))
    return float(x_lo), float(x_hi)


def support_overestimate(alpha: float) -> float:
    """Generous scan bound, never returned as a result."""
    return 10.0 * (1.0 + 1.0 / np.sqrt(alpha)) ** 2


def stieltjes(alpha: float, z: complex, residual_tol: float = 1e-12) -> complex:
    """The Stieltjes transform at a single z with Im z > 0.

    The physical branch is continued from the -1/z asymptote down a
    straight path to z; the returned root has Im s > 0 and satisfies the
    cubic to `residual_tol` (relative).
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    z = complex(z)
    if z.imag <= 0:
        raise ValidationError("stieltjes requires Im z > 0")
    anchor = 1e9j * max(1.0, abs(z))
    ts = np.geomspace(1.0, 1e-9, 60)
    path = z + (anchor - z) * ts
    path = np.append(path, z)
    roots = _roots_batch(alpha, path)
    s = -1.0 / path[0]
    for k in range(len(path)):
        s = roots[k, np.argmin(np.abs(roots[k] - s))]
    if s.imag <= 0:
        raise NumericalError("no upper-half-plane root found",
                             detail={"z": z, "roots": roots[-1].tolist()})
    res = cubic_residual(alpha, z, s)
    if res > residual_tol:
        raise NumericalError(f"cubic residual {res:.2e} above tolerance",
                             detail={"z": z})
    return complex(s)


@dataclass
class SpectralLaw:
    """Discretized limiting law: a.c. density on a grid plus the point mass
    at zero (present for alpha < 1), with its fractional moment."""

    alpha: float
    grid: np.ndarray
    density: np.ndarray
    support_upper: float
    c_alpha: float
    atom_mass: float = 0.0
    tail_mass: float = 0.0

    def total_mass(self) -> float:
        return float(np.trapezoid(self.density, self.grid) + self.atom_mass
                     + self.tail_mass)

    def first_moment(self) -> float:
        return float(np.trapezoid(self.density * self.grid, self.grid))

    def cdf_grid(self) -> np.ndarray:
        inc = np.concatenate(
            [[0.0], np.cumsum(0.5 * (self.density[1:] + self.density[:-1])
                              * np.diff(self.grid))])
        return np.minimum(self.atom_mass + self.tail_mass + inc, 1.0)

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        vals = np.interp(x, self.grid, self.cdf_grid(),
                         left=self.atom_mass, right=1.0)
        return np.where(x < 0.0, 0.0, vals)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            for x, f in zip(self.grid, self.density):
                fh.write(f"{format(x, '.17g')},{format(f, '.17g')}\n")


def _density_arrays(alpha: float, grid_points: int, eps_cap: float):
    x_lo, x_hi = ac_support_edges(alpha)
    top = 1.08 * x_hi
    xs_uniform = np.linspace(top / grid_points, top, grid_points)
    xs_graded = top * 0.02 * np.geomspace(1e-12, 1.0, _EDGE_POINTS)
    xs = np.unique(np.concatenate([xs_graded, xs_uniform]))
    steps = np.diff(xs, prepend=0.0)
    eps = np.clip(steps / 10.0, 1e-13, eps_cap)
    zs = xs + 1j * eps
    roots = _roots_batch(alpha, zs)
    atom = max(0.0, 1.0 - alpha)
    s_vals = np.empty(len(xs), dtype=complex)
    prev = -1.0 / zs[-1] - 1.0 / zs[-1] ** 2
    for i in range(len(xs) - 1, -1, -1):
        k = int(np.argmin(np.abs(roots[i] - prev)))
        s_vals[i] = roots[i, k]
        prev = s_vals[i]
    f = s_vals.imag / np.pi - atom * (eps / np.pi) / (xs * xs + eps * eps)
    f = np.maximum(f, 0.0)
    f[xs > x_hi] = 0.0
    # below-grid tail of a hard edge at 0: local power-law extrapolation
    tail = 0.0
    if alpha <= 1.0 and f[0] > 0.0 and f[1] > 0.0 and xs[0] < 1e-6 * x_hi:
        p = np.log(f[1] / f[0]) / np.log(xs[1] / xs[0])
        if -1.0 < p < 0.0:
            tail = float(f[0] * xs[0] / (p + 1.0))
    return xs, f, atom, tail, x_hi, s_vals, eps


def _scan_upper_edge(alpha: float, x_hi_hint: float) -> tuple[float, float]:
    """Scan downward from the overestimate for the point where the tracked
    density first rises above the numerical floor.  The floor is relative to
    the bulk density scale, which is O(alpha/width) for small alpha."""
    over = max(support_overestimate(alpha), 1.05 * x_hi_hint)
    xs = np.linspace(0.5 * x_hi_hint, over, 512)
    eps = 1e-9
    roots = _roots_batch(alpha, xs + 1j * eps)
    prev = -1.0 / complex(xs[-1], eps)
    prof = np.empty(len(xs))
    for i in range(len(xs) - 1, -1, -1):
        k = int(np.argmin(np.abs(roots[i] - prev)))
        prev = roots[i, k]
        prof[i] = prev.imag / np.pi
    floor = max(1e-7, 1e-3 * prof.max())
    above = np.nonzero(prof > floor)[0]
    edge = xs[above[-1]] if len(above) else xs[0]
    return float(edge), float(xs[1] - xs[0])


def density(alpha: float, grid_points: int = DEFAULT_GRID_POINTS,
            eps_cap: float = _EPS_CAP) -> SpectralLaw:
    """Stieltjes inversion of the cubic on a graded grid.

    The grid is uniform over the support with geometric refinement near
    zero; the inversion offset eps is min(eps_cap, local step / 10).  The
    reported support edge comes from scanning downward from the
    overestimate, refined to the discriminant zero of the cubic.
    """
    if alpha <= 0:
        raise ValidationError("alpha must be positive")
    if grid_points < 100:
        raise ValidationError("grid_points must be >= 100")
    xs, f, atom, tail, x_hi, _, _ = _density_arrays(alpha, grid_points, eps_cap)
    detected, scan_step = _scan_upper_edge(alpha, x_hi)
    if abs(detected - x_hi) > max(3.0 * scan_step, 0.02 * x_hi):
        raise NumericalError(
            "edge scan disagrees with the discriminant edge",
            detail={"scanned": detected, "discriminant": x_hi})
    c_val = float(np.trapezoid(f * np.sqrt(xs), xs))
    law = SpectralLaw(alpha=float(alpha), grid=xs, density=f,
                      support_upper=float(x_hi), c_alpha=c_val,
                      atom_mass=atom, tail_mass=tail)
    mass = law.total_mass()
    if abs(mass - 1.0) > 1e-3:
        raise NumericalError(f"density normalization off: total mass {mass:.6f}",
                             detail={"alpha": alpha})
    return law


def c_alpha(alpha: float, grid_points: int = DEFAULT_GRID_POINTS,
            eps_cap: float = _EPS_CAP) -> float:
    """Fractional moment int sqrt(x) dF(x); the atom at zero contributes
    nothing, so only the a.c. part is integrated."""
    return density(alpha, grid_points, eps_cap).c_alpha


def alpha_threshold(gap_constant: float, lo: float = 0.01, hi: float = 1.0,
                    tol: float = 1e-4,
                    grid_points: int = DEFAULT_GRID_POINTS,
                    eps_cap: float = _EPS_CAP) -> float:
    """The aspect ratio where gap_constant * C_alpha / sqrt(alpha) crosses 1.

    C_alpha/sqrt(alpha) decreases in alpha (checked at the bracket ends),
    so plain bisection applies.
    """
    if gap_constant <= 0:
        raise ValidationError("gap_constant must be positive")

    def objective(a: float) -> float:
        return gap_constant * c_alpha(a, grid_points, eps_cap) / np.sqrt(a) - 1.0

    f_lo, f_hi = objective(lo), objective(hi)
    if f_lo <= f_hi:
        raise NumericalError("C_alpha/sqrt(alpha) not decreasing on bracket",
                             detail={"lo": f_lo, "hi": f_hi})
    if f_lo < 0 or f_hi > 0:
        raise NumericalError("no sign change on the initial bracket",
                             detail={"f(lo)": f_lo, "f(hi)": f_hi})
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if objective(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class EmpiricalSpectrum:
    """Sorted eigenvalues of one realization of G H^t H G^t/(nm)."""

    eigenvalues: np.ndarray
    n: int
    m: int

    def ecdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.searchsorted(self.eigenvalues, x, side="right") / self.n


def empirical_spectrum(n: int, m: int, seed: SeedSpec) -> EmpiricalSpectrum:
    """Squared singular values of G H^t / sqrt(nm); the min(n, m) rank
    deficiency makes the trailing eigenvalues exact zeros."""
    if n < 1 or m < 1:
        raise ValidationError("empirical_spectrum requires n, m >= 1")
    prod = gaussian_product(n, m, seed)
    try:
        sv = np.linalg.svd(prod, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"SVD failed: {exc}") from exc
    lam = sv * sv / (n * m)
    rank_tol = lam.max() * n * np.finfo(float).eps if lam.size else 0.0
    lam[lam < rank_tol] = 0.0
    return EmpiricalSpectrum(eigenvalues=np.sort(lam), n=n, m=m)


def ks_distance(emp: EmpiricalSpectrum, law: SpectralLaw) -> float:
    """sup_x |F_n(x) - F(x)| between the empirical CDF and the law.

    Tie-aware: repeated eigenvalues (the exact zeros meeting the law's atom)
    produce a single jump, evaluated against the CDF's left and right limits.
    """
    alpha_emp = emp.m / emp.n
    if abs(alpha_emp - law.alpha) > 1e-6:
        raise ValidationError(
            f"aspect mismatch: law alpha={law.alpha}, empirical m/n={alpha_emp}")
    values, counts = np.unique(emp.eigenvalues, return_counts=True)
    cum = np.cumsum(counts) / emp.n
    cum_prev = np.concatenate([[0.0], cum[:-1]])
    f_right = law.cdf(values)
    f_left = np.where(values > 0.0, f_right, 0.0)  # the law jumps only at 0
    d = max(float(np.max(np.abs(cum - f_right))),
            float(np.max(np.abs(cum_prev - f_left))))
    return min(max(d, 0.0), 1.0)
