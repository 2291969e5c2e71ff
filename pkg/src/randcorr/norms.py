"""Quantum and classical norms of correlation matrices.

The sign-vector norm ||a||_{inf->1} = max_{alpha,beta in {+-1}^n} alpha^t a beta
is the classical (Bell) value of a functional; its dual is the projective
norm, whose unit ball is the polytope of classical correlations.  The
factorization norm gamma2 plays the same role for the quantum set.  This
module computes exact values where enumeration is affordable and certified
two-sided brackets everywhere else.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalError, ValidationError
from .linalg import as_matrix, svd
from .sampling import SeedSpec

EXACT_CAP = 24          # 2^(n-1) sign vectors enumerated exactly up to here
GAMMA2_ORACLE_CAP = 12  # PSD-completion oracle stays desk-scale
_BLOCK = 1 << 16


@dataclass(frozen=True)
class GrothendieckConstants:
    """Published interval for the real Grothendieck constant."""

    kg_lower: float = 1.67696
    kg_upper: float = 1.78221


GROTHENDIECK = GrothendieckConstants()


def _sign(x: np.ndarray) -> np.ndarray:
    # sign with the fixed 0 -> +1 convention, so certificates are exact +-1
    return np.where(x >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class SignPair:
    """A pair of sign vectors attaining (or witnessing) an inf->1 value."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        for v in (self.alpha, self.beta):
            arr = np.asarray(v, dtype=float)
            if arr.ndim != 1 or not np.all(np.abs(arr) == 1.0):
                raise ValidationError("sign vectors must have entries exactly +-1")

    def pairing(self, a) -> float:
        m = as_matrix(a)
        return float(self.alpha @ m @ self.beta)

    def to_dict(self) -> dict:
        return {"type": "sign_pair",
                "alpha": [int(x) for x in self.alpha],
                "beta": [int(x) for x in self.beta]}

    @classmethod
    def from_dict(cls, d: dict) -> "SignPair":
        return cls(np.asarray(d["alpha"], dtype=float), np.asarray(d["beta"], dtype=float))


@dataclass(frozen=True)
class DualWitness:
    """Orthogonal matrix a certifying gamma2(t) >= <t, a>/n."""

    a: np.ndarray

    def value(self, t) -> float:
        m = as_matrix(t, square=True)
        return float((m * self.a).sum() / m.shape[0])

    def to_dict(self) -> dict:
        return {"type": "dual_witness", "a": self.a.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DualWitness":
        return cls(as_matrix(d["a"], square=True))


@dataclass(frozen=True)
class FactorizationPair:
    """Explicit factorization t = x @ y certifying a gamma2 upper bound."""

    x: np.ndarray
    y: np.ndarray

    def value(self) -> float:
        row = np.sqrt((self.x * self.x).sum(axis=1).max())
        col = np.sqrt((self.y * self.y).sum(axis=0).max())
        return float(row * col)

    def residual(self, t) -> float:
        m = as_matrix(t)
        denom = max(1.0, float(np.abs(m).max()))
        return float(np.abs(self.x @ self.y - m).max() / denom)

    def to_dict(self) -> dict:
        return {"type": "factorization", "x": self.x.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FactorizationPair":
        return cls(np.asarray(d["x"], dtype=float), np.asarray(d["y"], dtype=float))


@dataclass
class ConvexDecomposition:
    """t ~= sum_k weights[k] * outer(alpha_k, beta_k); the weight sum upper
    bounds the projective norm whenever the reconstruction is exact."""

    weights: np.ndarray
    atoms: list[SignPair]
    residual: float = 0.0
    converged: bool = True
    certified: bool = True
    dual_bound: float | None = None

    def weight_sum(self) -> float:
        return float(np.sum(self.weights))

    def reconstruct(self, n: int) -> np.ndarray:
        out = np.zeros((n, n))
        for w, atom in zip(self.weights, self.atoms):
            out += w * np.outer(atom.alpha, atom.beta)
        return out

    def reconstruction_residual(self, t) -> float:
        m = as_matrix(t, square=True)
        return float(np.abs(self.reconstruct(m.shape[0]) - m).max())

    def to_dict(self) -> dict:
        return {"type": "convex_decomposition",
                "weights": [float(w) for w in self.weights],
                "atoms": [a.to_dict() for a in self.atoms],
                "residual": self.residual,
                "converged": self.converged,
                "certified": self.certified}

    @classmethod
    def from_dict(cls, d: dict) -> "ConvexDecomposition":
        return cls(weights=np.asarray(d["weights"], dtype=float),
                   atoms=[SignPair.from_dict(a) for a in d["atoms"]],
                   residual=float(d.get("residual", 0.0)),
                   converged=bool(d.get("converged", True)),
                   certified=bool(d.get("certified", True)))


@dataclass
class NormBracket:
    """Certified lower/upper bounds with re-evaluable certificates."""

    lower: float
    upper: float
    lower_certificate: object = None
    upper_certificate: object = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-12 * max(1.0, abs(self.upper)):
            raise NumericalError(
                f"bracket inverted: lower={self.lower} > upper={self.upper}")

    def ratio(self) -> float:
        return self.upper / self.lower if self.lower > 0 else np.inf


@dataclass
class BellFunctional:
    """A Bell functional a with its inf->1 norm (exact, or a certified upper
    bound with the heuristic lower estimate carried separately)."""

    a: np.ndarray
    eps_one_norm: float
    exact: bool
    heuristic_lower: float | None = None
    near_singular: bool = False
    attaining: SignPair | None = None

    def to_dict(self) -> dict:
        d = {"type": "bell_functional", "a": self.a.tolist(),
             "eps_one_norm": self.eps_one_norm, "exact": self.exact,
             "near_singular": self.near_singular}
        if self.heuristic_lower is not None:
            d["heuristic_lower"] = self.heuristic_lower
        if self.attaining is not None:
            d["attaining"] = self.attaining.to_dict()
        return d


def _sign_block(width: int, start: int, stop: int) -> np.ndarray:
    """Rows are sign vectors (+1, s_1..s_width) for indices start..stop-1."""
    idx = np.arange(start, stop, dtype=np.uint64)
    if width == 0:
        return np.ones((len(idx), 1))
    bits = ((idx[:, None] >> np.arange(width, dtype=np.uint64)) & 1).astype(float)
    block = np.empty((len(idx), width + 1))
    block[:, 0] = 1.0
    block[:, 1:] = 1.0 - 2.0 * bits
    return block


def infty_to_one_exact(a, exact_cap: int = EXACT_CAP) -> tuple[float, SignPair]:
    """Exact max of alpha^t a beta over sign vectors, with an attaining pair.

    Enumerates the 2^(n-1) sign vectors alpha with alpha_1 = +1 (global sign
    symmetry) in vectorized blocks and takes beta = sign(a^t alpha).
    """
    m = as_matrix(a, square=True)
    n = m.shape[0]
    if n > exact_cap:
        raise ValidationError(
            f"n={n} exceeds exact_cap={exact_cap}; use infty_to_one_heuristic")
    total = 1 << (n - 1)
    best_val = -np.inf
    best_idx = 0
    for start in range(0, total, _BLOCK):
        stop = min(start + _BLOCK, total)
        block = _sign_block(n - 1, start, stop)
        vals = np.abs(block @ m).sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_idx = start + k
    alpha = _sign_block(n - 1, best_idx, best_idx + 1)[0]
    beta = _sign(m.T @ alpha)
    return float(alpha @ m @ beta), SignPair(alpha, beta)


def infty_to_one_heuristic(a, restarts: int, seed: SeedSpec) -> tuple[float, SignPair]:
    """Alternating-ascent lower bound on the inf->1 norm.

    From each random start, alternately set beta = sign(a^t alpha) and
    alpha = sign(a beta) until neither step strictly increases the value;
    the result is the best fixed point over all restarts (never decreases
    as restarts grow).
    """
    m = as_matrix(a, square=True)
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    n = m.shape[0]
    gen = seed.generator()
    best_val = -np.inf
    best_pair = None
    for _ in range(restarts):
        alpha = _sign(gen.standard_normal(n))
        val = -np.inf
        while True:
            beta = _sign(m.T @ alpha)
            alpha_next = _sign(m @ beta)
            new = float(alpha_next @ m @ beta)
            if new <= val + 1e-12 * max(1.0, abs(val)):
                break
            val = new
            alpha = alpha_next
        if val > best_val:
            best_val = val
            best_pair = SignPair(alpha, _sign(m.T @ alpha))
    return best_val, best_pair


def gamma2_star_orthogonal(o, tol_orth: float = 1e-9) -> float:
    """The dual quantum norm of an orthogonal matrix equals its size n."""
    m = as_matrix(o, square=True)
    n = m.shape[0]
    residual = float(np.linalg.norm(m @ m.T - np.eye(n)))
    if residual > tol_orth:
        raise ValidationError(
            f"matrix is not orthogonal (residual {residual:.3e} > {tol_orth:.1e})")
    return float(n)


def gamma2_bracket(t) -> NormBracket:
    """Two-sided gamma2 bracket from the SVD t = U S V^t.

    lower = ||t||_tr / n, witnessed by the orthogonal dual functional UV^t;
    upper = max row norm of U sqrt(S) times max column norm of sqrt(S) V^t,
    witnessed by that explicit factorization.
    """
    m = as_matrix(t, square=True)
    if not np.any(m):
        raise ValidationError("gamma2_bracket requires a nonzero matrix")
    n = m.shape[0]
    triple = svd(m)
    u, s, v = triple.u, triple.sigma, triple.v
    lower = float(s.sum() / n)
    x = u * np.sqrt(s)
    y = (np.sqrt(s)[:, None]) * v.T
    upper_cert = FactorizationPair(x, y)
    upper = upper_cert.value()
    return NormBracket(lower=lower, upper=upper,
                       lower_certificate=DualWitness(u @ v.T),
                       upper_certificate=upper_cert)


def _psd_completion_feasible(t: np.ndarray, c: float, z0: np.ndarray | None,
                             tol_feas: float, max_iter: int):
    """Alternating projections between the PSD cone and the affine slice
    {off-diagonal block = t, diagonal <= c}.  Returns (feasible, last Z)."""
    n = t.shape[0]
    scale = 1.0 + float(np.linalg.norm(t))
    if z0 is None:
        z = np.zeros((2 * n, 2 * n))
        z[:n, n:] = t
        z[n:, :n] = t.T
        np.fill_diagonal(z, c)
    else:
        z = z0.copy()
        d = np.diagonal(z).copy()
        np.fill_diagonal(z, np.minimum(d, c))
    prev_res = np.inf
    for it in range(max_iter):
        w, vec = np.linalg.eigh(z)
        psd = (vec * np.maximum(w, 0.0)) @ vec.T
        z = psd.copy()
        z[:n, n:] = t
        z[n:, :n] = t.T
        d = np.diagonal(z).copy()
        np.fill_diagonal(z, np.minimum(d, c))
        res = float(np.linalg.norm(psd - z)) / scale
        if res < tol_feas:
            return True, z
        if it % 50 == 49:
            if res > 10 * tol_feas and res > 0.999 * prev_res:
                return False, z
            prev_res = res
    return res < 10 * tol_feas, z


def gamma2_oracle(t, tol: float = 1e-4, tol_feas: float = 1e-7,
                  max_bisect: int = 40, max_iter: int = 3000) -> float:
    """Small-n gamma2 oracle, independent of the bracket construction.

    Bisects c over [bracket.lower, bracket.upper] on feasibility of a PSD
    completion [[P, t], [t^t, Q]] with all diagonal entries <= c, decided
    by alternating projections (eigenvalue clipping vs. affine reset).
    """
    m = as_matrix(t, square=True)
    if m.shape[0] > GAMMA2_ORACLE_CAP:
        raise ValidationError(f"gamma2_oracle is capped at n={GAMMA2_ORACLE_CAP}")
    bracket = gamma2_bracket(m)
    lo, hi = bracket.lower, bracket.upper
    warm = None
    steps = 0
    while hi - lo > tol:
        if steps >= max_bisect:
            raise NumericalError("gamma2 bisection failed to separate",
                                 detail={"interval": (lo, hi)})
        mid = 0.5 * (lo + hi)
        feasible, warm = _psd_completion_feasible(m, mid, warm, tol_feas, max_iter)
        if feasible:
            hi = mid
        else:
            lo = mid
        steps += 1
    return 0.5 * (lo + hi)


def classical_lower_bound(t, bell: BellFunctional) -> float:
    """Certified lower bound <t, a>/||a|| on the projective norm of t.

    Remains valid when bell.eps_one_norm is an upper bound on the true norm.
    """
    m = as_matrix(t, square=True)
    if bell.eps_one_norm <= 0:
        raise ValidationError("Bell functional norm must be positive")
    return float((m * bell.a).sum() / bell.eps_one_norm)


def bell_functional_from_svd(t, exact_cap: int = EXACT_CAP,
                             heuristic_restarts: int = 50,
                             seed: SeedSpec | None = None) -> BellFunctional:
    """The orthogonal functional UV^t from the SVD of t.

    For n <= exact_cap the inf->1 norm is computed exactly; above the cap
    the certified upper bound min(n, n * ||a||_op) is stored and the
    alternating-ascent estimate is reported separately.  Near-singular
    inputs keep the (non-unique) UV^t and set a warning flag.
    """
    m = as_matrix(t, square=True)
    n = m.shape[0]
    triple = svd(m)
    a = triple.u @ triple.v.T
    near_singular = bool(triple.sigma[-1] <= 1e-10 * max(triple.sigma[0], 1e-300))
    if n <= exact_cap:
        value, pair = infty_to_one_exact(a, exact_cap)
        return BellFunctional(a=a, eps_one_norm=value, exact=True,
                              near_singular=near_singular, attaining=pair)
    op = float(np.linalg.svd(a, compute_uv=False)[0])
    upper = float(min(n, n * op))
    h_seed = seed if seed is not None else SeedSpec(0, 0)
    h_val, h_pair = infty_to_one_heuristic(a, heuristic_restarts, h_seed)
    return BellFunctional(a=a, eps_one_norm=upper, exact=False,
                          heuristic_lower=h_val, near_singular=near_singular,
                          attaining=h_pair)


def classical_upper_bound(t, max_atoms: int = 400, tol: float = 1e-9,
                          exact_cap: int = EXACT_CAP,
                          heuristic_restarts: int = 50,
                          seed: SeedSpec | None = None) -> ConvexDecomposition:
    """Projective-norm upper bound by column generation over sign atoms.

    Restricted master: min sum(w) with sum_k w_k outer(alpha_k, beta_k) = t,
    w >= 0 (elastic slacks keep it feasible while the pool is small).
    Pricing maximizes the dual pairing over sign matrices; with exact
    pricing (n <= exact_cap) the result is certified optimal to `tol` via
    the dual bound sum(w) <= opt * price.
    """
    m = as_matrix(t, square=True)
    if max_atoms < 1:
        raise ValidationError("max_atoms must be >= 1")
    n = m.shape[0]
    certified = n <= exact_cap
    h_seed = seed if seed is not None else SeedSpec(0, 0)
    b = m.flatten()
    scale = max(1.0, float(np.abs(m).max()))
    big_m = 1e6 * scale

    def price_oracle(y: np.ndarray) -> tuple[float, SignPair]:
        if certified:
            return infty_to_one_exact(y, exact_cap)
        return infty_to_one_heuristic(y, heuristic_restarts, h_seed)

    val0, pair0 = price_oracle(m)
    atoms = [pair0, SignPair(np.ones(n), np.ones(n))]
    columns = [np.outer(p.alpha, p.beta).flatten() for p in atoms]
    seen = {c.tobytes() for c in columns}
    n2 = n * n
    eye = np.eye(n2)
    dual_bound = None
    for _ in range(max_atoms):
        a_mat = np.stack(columns, axis=1)
        k = a_mat.shape[1]
        cost = np.concatenate([np.ones(k), big_m * np.ones(2 * n2)])
        a_eq = np.hstack([a_mat, eye, -eye])
        res = linprog(cost, A_eq=a_eq, b_eq=b, bounds=(0, None), method="highs")
        if res.status != 0:
            raise NumericalError(f"master LP failed: {res.message}")
        weights = res.x[:k]
        slack = float(res.x[k:].sum())
        y = res.eqlin.marginals
        price, pair = price_oracle(y.reshape(n, n))
        primal = float(weights.sum())
        if price > 0:
            dual_bound = float(y @ b) / price
        gap = primal - dual_bound if dual_bound is not None else np.inf
        if price <= 1.0 + 1e-9 and slack <= 1e-9 * scale and gap <= tol:
            break
        col = np.outer(pair.alpha, pair.beta).flatten()
        key = col.tobytes()
        if key in seen:
            break  # pricing stalled on a known atom: numerical plateau
        seen.add(key)
        atoms.append(pair)
        columns.append(col)
    keep = weights > 1e-14
    kept_atoms = [a for a, keep_it in zip(atoms, keep) if keep_it]
    kept_w = weights[keep]
    dec = ConvexDecomposition(weights=kept_w, atoms=kept_atoms,
                              converged=bool(price <= 1.0 + 1e-9 and slack <= 1e-9 * scale),
                              certified=certified and bool(price <= 1.0 + 1e-9),
                              dual_bound=dual_bound)
    dec.residual = dec.reconstruction_residual(m)
    return dec


def quantum_classical_gap(t, exact_cap: int = EXACT_CAP,
                          heuristic_restarts: int = 50,
                          seed: SeedSpec | None = None) -> float:
    """Estimated ratio of classical to quantum norm of t.

    Numerator: the certified classical lower bound <t, UV^t>/||UV^t||.
    Denominator: ||t||_tr / n, the quantum norm value that the trace-norm
    convergence theorem makes asymptotically exact for flat bi-invariant
    ensembles.  A value > 1 flags t/gamma2(t) as non-classical; when n
    exceeds exact_cap the Bell norm is the alternating-ascent estimate and
    the gap is an uncertified (optimistic) estimate.
    """
    m = as_matrix(t, square=True)
    bell = bell_functional_from_svd(m, exact_cap, heuristic_restarts, seed)
    bracket = gamma2_bracket(m)
    if bell.exact:
        norm_value = bell.eps_one_norm
    else:
        norm_value = bell.heuristic_lower
    numerator = float((m * bell.a).sum() / norm_value)
    return numerator / bracket.lower


def tau_gap_bound(n: int, m: int, seed: SeedSpec) -> float:
    """Certified upper bound on the projective norm of tau - GH^t/m for the
    coupled draw, via the row-normalization error vectors.

    With eps_i = g_i/||g_i|| - g_i/sqrt(m) (and delta_j for H), each cross
    term is a Gram matrix whose gamma2 is at most the product of maximal row
    norms; the Grothendieck upper constant converts gamma2 into the
    projective norm.
    """
    from .sampling import _gaussian_pair

    g, h, _ = _gaussian_pair(n, m, seed)
    gn = np.linalg.norm(g, axis=1)
    hn = np.linalg.norm(h, axis=1)
    sqrt_m = np.sqrt(m)
    max_eps = float(np.abs(gn / sqrt_m - 1.0).max())
    max_delta = float(np.abs(hn / sqrt_m - 1.0).max())
    kg = GROTHENDIECK.kg_upper
    return kg * (max_eps * hn.max() / sqrt_m
                 + gn.max() * max_delta / sqrt_m
                 + max_eps * max_delta)
