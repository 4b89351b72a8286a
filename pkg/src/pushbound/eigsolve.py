"""Symmetric eigenvalues and the symmetric-definite pencil sup{a : A - aB >= 0}.

The pencil is reduced by a pivoted Cholesky factorization of B (after
diagonal equilibration).  When B is numerically rank deficient the problem is
restricted to its range through a Schur complement on the null block.  The
reduction can run in float64 or in mpmath at a chosen decimal precision; the
final small symmetric eigenproblem is always solved in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

DEFAULT_RANK_TOL = 1e-12


class IndefiniteError(ValueError):
    """B is indefinite beyond tolerance (usually a broken moment table)."""


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# symmetric eigenproblem


def sym_eig(M, vectors: bool = False):
    """Ascending eigenvalues (and orthonormal eigenvectors) of a symmetric matrix."""
    M = np.asarray(_as_float(M), dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    M = 0.5 * (M + M.T)
    try:
        if vectors:
            return np.linalg.eigh(M)
        return np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(str(exc)) from exc


# ---------------------------------------------------------------------------
# pivoted Cholesky over float or mpf arrays


@dataclass
class CholeskyResult:
    """``M[perm][:, perm] ~= F @ F.T`` with F lower trapezoidal (m x rank)."""

    factor: np.ndarray  # rows in permuted order, m x rank
    perm: np.ndarray
    rank: int
    pivots: list
    residual: float  # max |entry| of the remaining Schur complement

    @property
    def full_rank(self) -> bool:
        return self.rank == len(self.perm)

    def lower(self) -> np.ndarray:
        """Unpermuted factor L with M ~= L L^T (float view)."""
        inv = np.argsort(self.perm)
        return _as_float(self.factor)[inv]


def _sqrt(x):
    return mpmath.sqrt(x) if isinstance(x, mpmath.mpf) else math.sqrt(x)


def cholesky(M, tol: float = DEFAULT_RANK_TOL) -> CholeskyResult:
    """Diagonally pivoted Cholesky; stops when the largest remaining pivot is
    below ``tol * max(diag)`` and reports the numerical rank."""
    M = np.array(M, dtype=object if np.asarray(M).dtype == object else float)
    m = M.shape[0]
    perm = np.arange(m)
    F = np.zeros((m, m), dtype=M.dtype)
    if M.dtype == object:
        F[:] = M[0, 0] * 0 if m else 0
    d = np.array([M[i, i] for i in range(m)], dtype=M.dtype)
    maxd = max((d[i] for i in range(m)), default=0)
    thresh = tol * maxd if maxd > 0 else 0
    pivots = []
    k = 0
    for k in range(m + 1):
        if k == m:
            break
        rest = perm[k:]
        j = k + int(np.argmax(np.array([float(v) for v in d[rest]])))
        if maxd <= 0 or d[perm[j]] <= thresh:
            break
        perm[k], perm[j] = perm[j], perm[k]
        if k:
            F[[k, j], :k] = F[[j, k], :k]
        p = perm[k]
        piv = _sqrt(d[p])
        pivots.append(d[p])
        F[k, k] = piv
        rest = perm[k + 1 :]
        if len(rest):
            col = M[rest, p]
            if k:
                col = col - F[k + 1 :, :k] @ F[k, :k]
            col = col / piv
            F[k + 1 :, k] = col
            d[rest] = d[rest] - col * col
    rank = k
    # map F rows: F[i] corresponds to perm[i]
    resid = 0.0
    if rank < m:
        rest = perm[rank:]
        R = M[np.ix_(rest, rest)] - F[rank:, :rank] @ F[rank:, :rank].T
        resid = float(max(abs(float(v)) for v in np.ravel(R)))
        scale = float(maxd) if maxd > 0 else 1.0
        if resid > max(1e3 * float(thresh), 1e-300) and resid > 1e-9 * scale:
            raise IndefiniteError(
                f"matrix is indefinite: remaining block of size {m - rank} has entries up to {resid:.3g}"
            )
    return CholeskyResult(F[:, :rank], perm, rank, pivots, resid)


# ---------------------------------------------------------------------------
# pencil


@dataclass
class GenEigResult:
    value: float  # sup{a : A - aB psd}; +inf if unbounded, -inf if infeasible
    dim: int
    rank: int  # numerical rank of B
    vector: np.ndarray | None = None  # x with x^T A x / x^T B x = value
    min_pivot_ratio: float = float("nan")
    dps: int | None = None
    notes: list = field(default_factory=list)

    @property
    def unbounded(self) -> bool:
        return self.value == math.inf

    @property
    def infeasible(self) -> bool:
        return self.value == -math.inf


def _as_float(M):
    M = np.asarray(M)
    if M.dtype == object:
        return np.array([[float(v) for v in row] for row in M], dtype=float).reshape(M.shape)
    return M.astype(float)


def _to_mp(M, dps: int):
    M = np.asarray(M)
    out = np.empty(M.shape, dtype=object)
    with mpmath.workdps(dps):
        for idx, v in np.ndenumerate(M):
            if isinstance(v, Fraction):
                out[idx] = mpmath.mpf(v.numerator) / v.denominator
            else:
                out[idx] = mpmath.mpf(v)
    return out


def _forward_solve(T, X):
    """Solve T Y = X for lower-triangular T (works on object arrays)."""
    m = T.shape[0]
    Y = np.empty_like(X)
    for i in range(m):
        acc = X[i]
        if i:
            acc = acc - T[i, :i] @ Y[:i]
        Y[i] = acc / T[i, i]
    return Y


def _reduce(A, B, tol, dps):
    """Equilibrate, factor B and congruence-transform A; returns float data."""
    m = A.shape[0]
    ctx = mpmath.workdps(dps) if dps else None
    if ctx:
        ctx.__enter__()
    try:
        if dps:
            A = _to_mp(A, dps)
            B = _to_mp(B, dps)
            sq = mpmath.sqrt
        else:
            A = _as_float(A)
            B = _as_float(B)
            sq = math.sqrt
        diagB = [B[i, i] for i in range(m)]
        s = np.empty(m, dtype=object if dps else float)
        for i in range(m):
            if diagB[i] > 0:
                s[i] = 1 / sq(diagB[i])
            elif abs(A[i, i]) > 0:
                s[i] = 1 / sq(abs(A[i, i]))
            else:
                s[i] = 1 + 0 * A[i, i]
        As = A * np.outer(s, s)
        Bs = B * np.outer(s, s)
        ch = cholesky(Bs, tol)
        r = ch.rank
        P = ch.perm
        Ap = As[np.ix_(P, P)]
        # T = [[F1, 0], [F2, I]]
        T = np.zeros((m, m), dtype=Ap.dtype)
        if dps:
            T[:] = 0 * Ap[0, 0]
        T[:, :r] = ch.factor
        for i in range(r, m):
            T[i, i] = 1 + 0 * Ap[0, 0]
        Y = _forward_solve(T, Ap)
        C = _forward_solve(T, Y.T.copy()).T
        ratio = float(min(ch.pivots) / max(ch.pivots)) if ch.pivots else 0.0
        Cf = _as_float(C)
        Cf = 0.5 * (Cf + Cf.T)
        return Cf, ch, T, s, ratio
    finally:
        if ctx:
            ctx.__exit__(None, None, None)


def congruence_reduce(ref, mats, dps: int = 40, ratio_floor: float = 1e-8):
    """Map each M to the leading r x r block of T^{-1} S P M P^T S T^{-T}, where
    S P ref P^T S = T [I_r 0; 0 0] T^T (equilibrated pivoted Cholesky, rank r).

    Runs in float64 when ``ref`` is numerically well conditioned and in mpmath
    from exact data otherwise.  Returns float arrays; ``None`` entries pass through.
    """
    m = np.shape(ref)[0]
    exact = _is_exact(ref) and all(M is None or _is_exact(M) for M in mats)
    use_dps = None
    try:
        _, ch, _, _, ratio = _reduce(ref, ref, DEFAULT_RANK_TOL, None)
        if exact and (not ch.full_rank or ratio < ratio_floor):
            use_dps = dps
    except IndefiniteError:
        if not exact:
            raise
        use_dps = dps
    ctx = mpmath.workdps(use_dps) if use_dps else None
    if ctx:
        ctx.__enter__()
    try:
        tol = 10.0 ** (-(use_dps - 10)) if use_dps else DEFAULT_RANK_TOL
        _, ch, T, s, _ = _reduce(ref, ref, tol, use_dps)
        r = ch.rank
        P = ch.perm
        out = []
        for M in mats:
            if M is None:
                out.append(None)
                continue
            Mx = _to_mp(M, use_dps) if use_dps else _as_float(M)
            Mx = (Mx * np.outer(s, s))[np.ix_(P, P)]
            Y = _forward_solve(T, Mx)
            C = _as_float(_forward_solve(T, Y.T.copy()).T)
            C = 0.5 * (C + C.T)
            out.append(C[:r, :r].copy())
        return out
    finally:
        if ctx:
            ctx.__exit__(None, None, None)


def _back_vector(z, T, s, perm, dps):
    """x = S P^T T^{-T} z (returned in float)."""
    m = len(z)
    if dps:
        with mpmath.workdps(dps):
            zz = np.array([mpmath.mpf(float(v)) for v in z], dtype=object)
            y = np.empty(m, dtype=object)
            for i in range(m - 1, -1, -1):
                acc = zz[i]
                if i < m - 1:
                    acc = acc - T[i + 1 :, i] @ y[i + 1 :]
                y[i] = acc / T[i, i]
            x = np.empty(m, dtype=object)
            x[perm] = y
            x = x * s
            return np.array([float(v) for v in x])
    y = np.linalg.solve(np.asarray(T, dtype=float).T, z)
    x = np.empty(m)
    x[perm] = y
    return x * np.asarray(s, dtype=float)


def gen_eig_solve(A, B, tol: float | None = None, dps: int | None | str = None) -> GenEigResult:
    """Solve sup{a : A - aB psd} for symmetric A and positive semidefinite B.

    ``dps=None`` runs in float64; an integer runs the reduction in mpmath at
    that many digits; ``"auto"`` starts in float64 and switches to extended
    precision when B is badly conditioned and the inputs are exact
    (``Fraction`` object arrays).
    """
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("pencil matrices must be square and of equal size")
    if dps == "auto":
        return _solve_auto(A, B, tol)
    if tol is None:
        tol = DEFAULT_RANK_TOL if not dps else 10.0 ** (-(dps - 10))
    m = A.shape[0]
    if m == 0:
        return GenEigResult(math.inf, 0, 0)
    C, ch, T, s, ratio = _reduce(A, B, tol, dps)
    r = ch.rank
    res = GenEigResult(math.nan, m, r, None, ratio, dps)
    if r == 0:
        ev = sym_eig(C)
        if ev[0] >= -tol * max(1.0, abs(ev[-1])):
            res.value = math.inf
            res.notes.append("B vanishes and A is psd: unbounded")
        else:
            res.value = -math.inf
            res.notes.append("B vanishes and A is not psd: infeasible")
        return res
    if r == m:
        w, V = sym_eig(C, vectors=True)
        res.value = float(w[0])
        z = V[:, 0]
    else:
        CRR, CRN, CNN = C[:r, :r], C[:r, r:], C[r:, r:]
        wN = sym_eig(CNN)
        scale = max(1.0, float(np.max(np.abs(C))))
        res.notes.append(f"B rank deficient ({r}/{m}); restricted to its range")
        if wN[0] < -1e-8 * scale:
            res.value = -math.inf
            res.notes.append("A is not psd on the null space of B: infeasible")
            return res
        if wN[0] <= 1e-12 * scale:
            res.notes.append("A singular on the null space of B; used pseudo-inverse")
            K = np.linalg.pinv(CNN, rcond=1e-12) @ CRN.T
        else:
            K = np.linalg.solve(CNN, CRN.T)
        S = CRR - CRN @ K
        w, V = sym_eig(S, vectors=True)
        res.value = float(w[0])
        z = np.concatenate([V[:, 0], -K @ V[:, 0]])
    res.vector = _back_vector(z, T, s, ch.perm, dps)
    return res


def _is_exact(M) -> bool:
    return M.dtype == object and all(isinstance(v, (Fraction, int)) for v in M.flat)


def _solve_auto(A, B, tol):
    res = gen_eig_solve(A, B, tol, None)
    exact = _is_exact(A) and _is_exact(B)
    well = res.rank == res.dim and res.min_pivot_ratio >= 1e-8
    if well or not exact:
        if not well:
            res.notes.append("ill-conditioned float64 reduction (no exact data to refine)")
        return res
    dps = 40
    while True:
        res = gen_eig_solve(A, B, None, dps)
        if res.rank < res.dim:
            if dps >= 160:
                return res
            dps *= 2
            continue
        need = int(math.ceil(-math.log10(max(res.min_pivot_ratio, 1e-300)))) + 20
        if need <= dps or dps >= 320:
            return res
        dps = need


def gen_eig_min(A, B, tol: float | None = None, dps=None) -> float:
    return gen_eig_solve(A, B, tol, dps).value


def rayleigh_quotient(A, B, x, dps: int = 50) -> float:
    """x^T A x / x^T B x evaluated at ``dps`` digits (exact inputs allowed)."""
    with mpmath.workdps(dps):
        Am, Bm = _to_mp(A, dps), _to_mp(B, dps)
        xm = np.array([mpmath.mpf(float(v)) for v in x], dtype=object)
        den = xm @ Bm @ xm
        if den <= 0:
            return math.nan
        return float((xm @ Am @ xm) / den)


def is_psd(M, tol: float = 1e-12) -> bool:
    """PSD test by pivoted Cholesky: pivots stop at ``tol * max diag`` and the
    leftover Schur block must have no eigenvalue below ``-tol * max diag``."""
    M = _as_float(M)
    m = M.shape[0]
    if m == 0:
        return True
    scale = max(float(np.max(np.abs(np.diag(M)))), 1e-300)
    if np.min(np.diag(M)) < -tol * scale:
        return False
    try:
        ch = cholesky(M, tol)
    except IndefiniteError:
        return False
    if ch.rank == m:
        return True
    rest = ch.perm[ch.rank :]
    Fr = ch.factor[ch.rank :]
    R = M[np.ix_(rest, rest)] - Fr @ Fr.T
    return bool(sym_eig(0.5 * (R + R.T))[0] >= -tol * scale)
