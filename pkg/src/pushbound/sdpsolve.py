"""Dense primal-dual interior-point solver for small block LMI problems.

Problems are stated as

    maximize  c . x   s.t.  F0_k + sum_j x_j F_jk  >= 0   for every block k,

which is the dual standard form  max b.y  s.t.  C - sum_j y_j A_j = Z >= 0
with C = F0, A_j = -F_j.  The solver is an infeasible-start path-following
method with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
MAXITER = "MaxIter"


class SdpSizeError(ValueError):
    pass


@dataclass
class SdpProblem:
    """``blocks[k] = (F0, [F_1, ..., F_nvars])``; a ``None`` entry means zero."""

    nvars: int
    objective: np.ndarray
    blocks: list
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.nvars,):
            raise ValueError("objective length must equal nvars")
        for F0, Fs in self.blocks:
            if len(Fs) != self.nvars:
                raise ValueError("each block needs one matrix (or None) per variable")
            for F in Fs:
                if F is not None and np.shape(F) != np.shape(F0):
                    raise ValueError("matrices within a block must share dimension")

    @property
    def block_sizes(self) -> list[int]:
        return [np.shape(F0)[0] for F0, _ in self.blocks]

    def lmi(self, x, k: int) -> np.ndarray:
        F0, Fs = self.blocks[k]
        out = np.array(F0, dtype=float)
        for xj, F in zip(x, Fs):
            if F is not None and xj:
                out = out + xj * np.asarray(F, dtype=float)
        return out

    def min_eigs(self, x) -> list[float]:
        return [float(np.linalg.eigvalsh(self.lmi(x, k))[0]) for k in range(len(self.blocks))]


@dataclass
class SdpSolution:
    status: str
    x: np.ndarray
    objective: float
    gap: float
    residual: float
    iterations: int
    dual_objective: float = math.nan

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class SdpTolerances:
    gap: float = 1e-7
    feas: float = 1e-8
    max_iter: int = 200
    max_block: int = 500
    max_vars: int = 500
    step: float = 0.98


def _psd_step(L, D):
    """Largest a in (0, inf] with L L^T + a D psd."""
    Li = np.linalg.inv(L)
    S = Li @ D @ Li.T
    lam = np.linalg.eigvalsh(0.5 * (S + S.T))[0]
    return math.inf if lam >= 0 else -1.0 / lam


def _chol(M):
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(M)
        shift = max(0.0, -w[0]) + 1e-14 * max(1.0, abs(w[-1]))
        return np.linalg.cholesky(M + shift * np.eye(len(M)))


def _iterate(C, A, b, X, Z, tol: SdpTolerances, normb: float, normC: float, state: dict):
    """Predictor-corrector loop; returns (status, iterations, y, primal objective, gap).

    ``state`` records the last nearly feasible y so a caller can recover from
    a factorization failure.
    """
    m = len(b)
    ntot = sum(Ck.shape[0] for Ck in C)

    def Aop(Xs):
        return sum(np.einsum("jab,ab->j", Ak, Xk) for Ak, Xk in zip(A, Xs))

    def ATop(y):
        return [np.einsum("j,jab->ab", y, Ak) for Ak in A]

    y = np.zeros(m)
    best_y = y.copy()
    status = MAXITER
    it = 0
    pobj = math.nan
    relgap = math.inf
    for it in range(1, tol.max_iter + 1):
        ATy = ATop(y)
        rp = b - Aop(X)
        Rd = [Ck - Zk - Ak for Ck, Zk, Ak in zip(C, Z, ATy)]
        mu = sum(np.sum(Xk * Zk) for Xk, Zk in zip(X, Z)) / ntot
        pobj = sum(np.sum(Ck * Xk) for Ck, Xk in zip(C, X))
        dobj = float(b @ y)
        pinf = np.linalg.norm(rp) / normb
        dinf = math.sqrt(sum(np.sum(R**2) for R in Rd)) / normC
        relgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        if relgap < tol.gap and pinf < tol.feas and dinf < tol.feas:
            status = OPTIMAL
            break
        trX = sum(np.trace(Xk) for Xk in X)
        if np.linalg.norm(y) > 1e12 and dinf < 1e-6:
            status = UNBOUNDED
            break
        if trX > 1e12 and pinf < 1e-6:
            status = INFEASIBLE
            break
        if not (math.isfinite(trX) and np.all(np.isfinite(y))):
            status = INFEASIBLE if trX > 1e12 or not math.isfinite(trX) else MAXITER
            y = best_y
            break
        if pinf < 1e-6 and dinf < 1e-6:
            best_y = y.copy()
        state.update(best_y=best_y, it=it, trX=trX, pobj=pobj, gap=relgap)

        # Nesterov-Todd scaling per block: W Z W = X, G^T Z G = G^{-1} X G^{-T} = diag(d)
        Ls, Rs, Gs, Ws, ds = [], [], [], [], []
        for Xk, Zk in zip(X, Z):
            L = _chol(Xk)
            R = _chol(Zk)
            U, sv, _ = np.linalg.svd(L.T @ R)
            G = L @ U / np.sqrt(sv)[None, :]
            Ls.append(L)
            Rs.append(R)
            Gs.append(G)
            Ws.append(G @ G.T)
            ds.append(sv)
        M = np.zeros((m, m))
        for Ak, W in zip(A, Ws):
            WAW = W @ Ak @ W
            M += np.einsum("iab,jab->ij", Ak, WAW)
        M = 0.5 * (M + M.T)
        try:
            Mc = np.linalg.cholesky(M + 1e-14 * np.trace(M) / max(m, 1) * np.eye(m))
            msolve = lambda r: np.linalg.solve(Mc.T, np.linalg.solve(Mc, r))  # noqa: E731
        except np.linalg.LinAlgError:
            msolve = lambda r: np.linalg.lstsq(M, r, rcond=None)[0]  # noqa: E731

        def direction(Hs):
            """Hs: per-block RHS of the scaled complementarity equation."""
            Ks = [2.0 * H / (d[:, None] + d[None, :]) for H, d in zip(Hs, ds)]
            GKG = [G @ K @ G.T for G, K in zip(Gs, Ks)]
            WRW = [W @ R @ W for W, R in zip(Ws, Rd)]
            rhs = rp - Aop(GKG) + Aop(WRW)
            dy = msolve(rhs)
            ATdy = ATop(dy)
            dZ = [R - T for R, T in zip(Rd, ATdy)]
            dX = [gkg - W @ dz @ W for gkg, W, dz in zip(GKG, Ws, dZ)]
            dX = [0.5 * (D + D.T) for D in dX]
            dZ = [0.5 * (D + D.T) for D in dZ]
            return dX, dy, dZ

        def steps(dX, dZ):
            ap = min(_psd_step(L, D) for L, D in zip(Ls, dX))
            ad = min(_psd_step(R, D) for R, D in zip(Rs, dZ))
            return ap, ad

        # predictor
        Hs = [-np.diag(d * d) for d in ds]
        dXa, dya, dZa = direction(Hs)
        ap, ad = steps(dXa, dZa)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = sum(
            np.sum((Xk + ap * dx) * (Zk + ad * dz)) for Xk, Zk, dx, dz in zip(X, Z, dXa, dZa)
        ) / ntot
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        Hs = []
        for G, d, dx, dz in zip(Gs, ds, dXa, dZa):
            Gi = np.linalg.inv(G)
            dxt = Gi @ dx @ Gi.T
            dzt = G.T @ dz @ G
            cross = dxt @ dzt
            Hs.append(sigma * mu * np.eye(len(d)) - np.diag(d * d) - 0.5 * (cross + cross.T))
        dX, dy, dZ = direction(Hs)
        ap, ad = steps(dX, dZ)
        ap = min(1.0, tol.step * ap)
        ad = min(1.0, tol.step * ad)
        X = [Xk + ap * D for Xk, D in zip(X, dX)]
        Z = [Zk + ad * D for Zk, D in zip(Z, dZ)]
        y = y + ad * dy

    return status, it, y, pobj, relgap


def sdp_solve(p: SdpProblem, tol: SdpTolerances | None = None) -> SdpSolution:
    tol = tol or SdpTolerances()
    if p.nvars > tol.max_vars:
        raise SdpSizeError(f"{p.nvars} variables exceed cap {tol.max_vars}")
    if any(n > tol.max_block for n in p.block_sizes):
        raise SdpSizeError(f"block sizes {p.block_sizes} exceed cap {tol.max_block}")
    m = p.nvars

    # block and variable scaling (congruence by positive scalars / column scaling)
    C, A = [], []
    for F0, Fs in p.blocks:
        F0 = np.asarray(F0, dtype=float)
        n = F0.shape[0]
        stack = np.zeros((m, n, n))
        for j, F in enumerate(Fs):
            if F is not None:
                stack[j] = -np.asarray(F, dtype=float)
        nrm = max(np.linalg.norm(F0), np.max(np.abs(stack)) if m else 0.0, 1e-300)
        C.append(0.5 * (F0 + F0.T) / nrm)
        A.append(0.5 * (stack + stack.transpose(0, 2, 1)) / nrm)
    colnorm = np.array([math.sqrt(sum(np.sum(Ak[j] ** 2) for Ak in A)) for j in range(m)])
    colnorm[colnorm == 0] = 1.0
    A = [Ak / colnorm[:, None, None] for Ak in A]
    b = p.objective / colnorm
    # drop directions y with sum_j y_j A_j = 0 (non-unique multipliers)
    Vr = None
    if m:
        stackA = np.concatenate([Ak.reshape(m, -1) for Ak in A], axis=1)
        Uy, sv, _ = np.linalg.svd(stackA, full_matrices=True)
        rank = int(np.sum(sv > 1e-12 * sv[0])) if sv.size and sv[0] > 0 else 0
        if rank < m:
            Vnull = Uy[:, rank:]
            if np.linalg.norm(Vnull.T @ b) > 1e-10 * (1 + np.linalg.norm(b)):
                return SdpSolution(UNBOUNDED, np.full(p.nvars, np.nan), math.inf, math.nan, math.nan, 0)
            Vr = Uy[:, :rank]
            A = [np.einsum("jr,jab->rab", Vr, Ak) for Ak in A]
            b = Vr.T @ b
            m = rank
    nblk = len(C)
    ntot = sum(Ck.shape[0] for Ck in C)

    normb = 1.0 + np.linalg.norm(b)
    normC = 1.0 + math.sqrt(sum(np.sum(Ck**2) for Ck in C))
    X, Z = [], []
    for Ck, Ak in zip(C, A):
        n = Ck.shape[0]
        xi = max(10.0, math.sqrt(n), max((1 + abs(bj)) / (1 + np.linalg.norm(Ak[j])) for j, bj in enumerate(b)) if m else 10.0)
        eta = max(10.0, math.sqrt(n), np.linalg.norm(Ck), max((np.linalg.norm(Ak[j]) for j in range(m)), default=0.0))
        X.append(xi * np.eye(n))
        Z.append(eta * np.eye(n))
    with np.errstate(over="ignore", invalid="ignore"):
        state: dict = {}
        try:
            status, it, y, pobj, relgap = _iterate(C, A, b, X, Z, tol, normb, normC, state)
        except np.linalg.LinAlgError:
            diverged = not math.isfinite(state.get("trX", math.inf)) or state.get("trX", 0.0) > 1e8
            status = INFEASIBLE if diverged else MAXITER
            y = state.get("best_y", np.zeros(m))
            it = state.get("it", 0)
            pobj = state.get("pobj", math.nan)
            relgap = state.get("gap", math.inf)
    if Vr is not None:
        y = Vr @ y
    x = y / colnorm
    # feasibility residual of the returned point in the original LMI
    resid = max((max(0.0, -e) for e in p.min_eigs(x)), default=0.0)
    return SdpSolution(
        status=status,
        x=x,
        objective=float(p.objective @ x),
        gap=float(relgap),
        residual=float(resid),
        iterations=it,
        dual_objective=float(pobj),
    )


# ---------------------------------------------------------------------------
# export


def to_sdpa(p: SdpProblem) -> str:
    """Sparse SDPA-style text: header with nvars and block sizes, then
    triplets ``mat block i j value`` (upper triangle, 1-based).  Matrix 0 is
    F0 and matrix j is F_j, describing F0 + sum x_j F_j >= 0; maximize c.x.
    """
    lines = [
        f"{p.nvars} = nvars",
        f"{len(p.blocks)} = nblocks",
        " ".join(str(s) for s in p.block_sizes) + " = block sizes",
        " ".join(repr(float(c)) for c in p.objective),
    ]
    for k, (F0, Fs) in enumerate(p.blocks, start=1):
        for j, F in enumerate([F0] + list(Fs)):
            if F is None:
                continue
            F = np.asarray(F, dtype=float)
            n = F.shape[0]
            for a in range(n):
                for c in range(a, n):
                    if F[a, c] != 0:
                        lines.append(f"{j} {k} {a + 1} {c + 1} {float(F[a, c])!r}")
    return "\n".join(lines) + "\n"


def from_sdpa(text: str) -> SdpProblem:
    rows = [ln.split("=")[0].split() for ln in text.strip().splitlines()]
    nvars = int(rows[0][0])
    nblocks = int(rows[1][0])
    sizes = [int(s) for s in rows[2]]
    c = np.array([float(v) for v in rows[3]])
    blocks = [[np.zeros((s, s)), [None] * nvars] for s in sizes]
    for r in rows[4:]:
        j, k, a, b = (int(v) for v in r[:4])
        v = float(r[4])
        F0, Fs = blocks[k - 1]
        if j == 0:
            M = F0
        else:
            if Fs[j - 1] is None:
                Fs[j - 1] = np.zeros((sizes[k - 1],) * 2)
            M = Fs[j - 1]
        M[a - 1, b - 1] = M[b - 1, a - 1] = v
    assert len(blocks) == nblocks
    return SdpProblem(nvars, c, [tuple(bk) for bk in blocks])


# ---------------------------------------------------------------------------
# sum-of-fractions hierarchies as LMI problems


def _precondition(mats, ref, dps: int = 40):
    """Congruence-transform a block's matrices so ``ref`` becomes the identity.

    When ``ref`` is singular its null space is shared by every matrix of the
    block (a polynomial vanishing on the support of the measure), so the block
    is restricted to the range of ``ref``.  This removes the loss of strict
    feasibility without changing the feasible set.
    """
    from .eigsolve import congruence_reduce

    return congruence_reduce(ref, mats, dps=dps)


def _assemble(blocks_exact, refs, precondition):
    blocks = []
    for (F0, Fs), ref in zip(blocks_exact, refs):
        mats = [F0] + list(Fs)
        if precondition:
            mats = _precondition(mats, ref)
        else:
            from .eigsolve import _as_float

            mats = [None if M is None else _as_float(M) for M in mats]
        blocks.append((mats[0], mats[1:]))
    return blocks


def build_sum_standard(fractions, oracle, d: int, s: int, precondition: bool = True) -> SdpProblem:
    """LMI for the sum-of-fractions upper-bound program in the original variables.

    Variables: a, then the coefficients of h_2..h_N in the degree-<=s basis.
    Block 1: M(f_1) - a M(g_1) - sum_i M(h_i g_1) >= 0.
    Block i: M(f_i) + M(h_i g_i) >= 0.
    """
    from .momentmatrix import localizing_matrix, make_basis
    from .polyarith import MultiPoly

    N = len(fractions)
    n = oracle.nvars
    basis = make_basis(n, d)
    hbasis = make_basis(n, s).exponents if N > 1 else ()
    nh = len(hbasis)
    nvars = 1 + (N - 1) * nh
    names = ["a"] + [f"h{i + 1}{g}" for i in range(1, N) for g in hbasis]

    def loc(q):
        return localizing_matrix(q, oracle, basis, exact=True)

    f1, g1 = fractions[0]
    G1 = loc(g1)
    Fs = [-G1] + [None] * (nvars - 1)
    g1_shift = {}
    for gamma in hbasis:
        g1_shift[gamma] = loc(MultiPoly.monomial(gamma, 1, g1.mode) * g1)
    for i in range(1, N):
        for k, gamma in enumerate(hbasis):
            Fs[1 + (i - 1) * nh + k] = -g1_shift[gamma]
    blocks = [(loc(f1), Fs)]
    refs = [G1]
    for i in range(1, N):
        fi, gi = fractions[i]
        Fs = [None] * nvars
        for k, gamma in enumerate(hbasis):
            Fs[1 + (i - 1) * nh + k] = loc(MultiPoly.monomial(gamma, 1, gi.mode) * gi)
        blocks.append((loc(fi), Fs))
        refs.append(loc(gi))
    c = np.zeros(nvars)
    c[0] = 1.0
    return SdpProblem(nvars, c, _assemble(blocks, refs, precondition), names)


def build_sum_pushforward(
    fractions_or_N, table, d: int, s: int, multiplier: str = "v", precondition: bool = True
) -> SdpProblem:
    """LMI for the pushforward sum hierarchy over the 2N image variables.

    Image variables are ordered (u_1..u_N, v_1..v_N).  ``multiplier`` selects
    the factor paired with h_i in the first block: ``"v"`` uses v_1, ``"u"``
    the literal u_1 variant.
    """
    from .momentmatrix import localizing_matrix, make_basis
    from .polyarith import MultiPoly

    N = fractions_or_N if isinstance(fractions_or_N, int) else len(fractions_or_N)
    m = 2 * N
    if table.mvars != m:
        raise ValueError(f"table has {table.mvars} image variables, expected {m}")
    if multiplier not in ("u", "v"):
        raise ValueError("multiplier must be 'u' or 'v'")
    basis = make_basis(m, d)
    hbasis = make_basis(m, s).exponents if N > 1 else ()
    nh = len(hbasis)
    nvars = 1 + (N - 1) * nh
    names = ["a"] + [f"h{i + 1}{g}" for i in range(1, N) for g in hbasis]
    u = [MultiPoly.variable(m, i) for i in range(N)]
    v = [MultiPoly.variable(m, N + i) for i in range(N)]

    def loc(q):
        return localizing_matrix(q, table, basis, exact=table.exact)

    first = v[0] if multiplier == "v" else u[0]
    V1 = loc(v[0])
    Fs = [-V1] + [None] * (nvars - 1)
    shifted = {gamma: loc(MultiPoly.monomial(gamma) * first) for gamma in hbasis}
    for i in range(1, N):
        for k, gamma in enumerate(hbasis):
            Fs[1 + (i - 1) * nh + k] = -shifted[gamma]
    blocks = [(loc(u[0]), Fs)]
    refs = [V1]
    for i in range(1, N):
        Fs = [None] * nvars
        for k, gamma in enumerate(hbasis):
            Fs[1 + (i - 1) * nh + k] = loc(MultiPoly.monomial(gamma) * v[i])
        blocks.append((loc(u[i]), Fs))
        refs.append(loc(v[i]))
    c = np.zeros(nvars)
    c[0] = 1.0
    return SdpProblem(nvars, c, _assemble(blocks, refs, precondition), names)


def feasible_point(minima, hbasis) -> np.ndarray:
    """Analytic feasible point: h_i = -min(f_i/g_i) (constant), a = sum of the minima."""
    N = len(minima)
    nh = len(hbasis)
    x = np.zeros(1 + (N - 1) * nh)
    x[0] = float(sum(minima))
    if N > 1:
        k0 = list(hbasis).index(tuple(0 for _ in hbasis[0]))
        for i in range(1, N):
            x[1 + (i - 1) * nh + k0] = -float(minima[i])
    return x
