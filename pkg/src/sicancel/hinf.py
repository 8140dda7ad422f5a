"""Discrete-time H-infinity machinery.

solve_dare is a structure-preserving doubling iteration good for both the
definite (LQ-type) and indefinite (game-type) second-order terms that show
up here.  hinf_norm certifies the l2-induced norm by bisecting the
bounded-real condition, seeded by a dense frequency sweep.  synthesize
builds the output-feedback central controller from two sequential games:
a control Riccati step, a loop transformation that turns the remainder
into a pure estimation problem, and the dual Riccati step for the filter
gain.  Every returned controller is re-verified on the closed loop before
it is handed back.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _accel
from .plant import GeneralizedPlant
from .sysmat import DiscreteStateSpace

DARE_TOL = 1e-12
DARE_MAX_ITER = 200
RESIDUAL_BOUND = 1e-8


class DareError(RuntimeError):
    """Riccati iteration failed: no stabilizing solution at this data."""


class GammaInfeasibleError(RuntimeError):
    """No certified controller exists at the requested level."""


def dare_residual(A, B, Q, R, S, X) -> float:
    M = A.T @ X @ B + S
    Rt = R + B.T @ X @ B
    return float(
        np.linalg.norm(A.T @ X @ A - X - M @ np.linalg.solve(Rt, M.T) + Q)
    )


def _stein_solve(A, Q):
    """X = A'XA + Q for stable A.

    Thin wrapper over the Schur-based solver; the perturbation warning it
    emits for eigenvalue pairs straddling the bilinear singularity is
    harmless here because every accepted solution is residual-checked.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        X = scipy.linalg.solve_discrete_lyapunov(A.T, Q, method="bilinear")
    return (X + X.T) / 2


def _reduce_balanced(g: DiscreteStateSpace, err_budget: float):
    """Balanced truncation of a stable system with a certified error bound.

    Returns (reduced, err) with ||g - reduced||_inf <= err <= err_budget
    (twice the sum of the dropped Hankel singular values).  Used before
    norm certification: a loop that cancels a large internal gain down to
    a tiny input/output norm has storage functions spanning many orders of
    magnitude, and the bounded-real test on the raw realization drowns in
    roundoff.  The Hankel singular values are bounded by the norm itself,
    so the balanced model is small and perfectly scaled.
    """
    A, B, C, D = g.A, g.B, g.C, g.D
    n = g.n_states
    Wc = _stein_solve(A.T, B @ B.T)
    Wo = _stein_solve(A, C.T @ C)
    ec, Vc = np.linalg.eigh(Wc)
    eo, Vo = np.linalg.eigh(Wo)
    cut_c = max(ec.max(), 0.0) * 1e-18
    cut_o = max(eo.max(), 0.0) * 1e-18
    Lc = Vc[:, ec > cut_c] * np.sqrt(ec[ec > cut_c])
    Lo = Vo[:, eo > cut_o] * np.sqrt(eo[eo > cut_o])
    if Lc.shape[1] == 0 or Lo.shape[1] == 0:
        return DiscreteStateSpace(
            np.zeros((0, 0)), np.zeros((0, g.n_inputs)),
            np.zeros((g.n_outputs, 0)), D, g.period
        ), 0.0
    U, s, Vt = np.linalg.svd(Lo.T @ Lc)
    # keep enough states that the tail obeys the error budget
    tail = 2.0 * np.cumsum(s[::-1])[::-1]
    r = int(np.searchsorted(-tail, -err_budget))
    if r >= min(n, s.size):
        return g, 0.0
    err = float(tail[r]) if r < s.size else 0.0
    if r == 0:
        return DiscreteStateSpace(
            np.zeros((0, 0)), np.zeros((0, g.n_inputs)),
            np.zeros((g.n_outputs, 0)), D, g.period
        ), err
    sr = np.sqrt(s[:r])
    T = Lc @ Vt[:r, :].T / sr
    Ti = (U[:, :r] / sr).T @ Lo.T
    red = DiscreteStateSpace(Ti @ A @ T, Ti @ B, C @ T, D, g.period)
    if not red.is_stable():
        # fall back to the raw realization rather than lose the certificate
        return g, 0.0
    return red, err


def solve_dare(A, B, Q, R, S=None, tol: float = DARE_TOL,
               max_iter: int = DARE_MAX_ITER) -> np.ndarray:
    """Stabilizing solution of the discrete algebraic Riccati equation

        X = A'XA - (A'XB + S)(R + B'XB)^-1 (B'XA + S') + Q

    by the structure-preserving doubling iteration.  R may be indefinite
    (as in game-type equations) but must be invertible.  The problem is
    balanced by a diagonal state scaling first; highly non-normal state
    matrices otherwise wreck the iteration's accuracy.  Raises DareError
    when the iteration breaks down, fails to converge, the residual is
    large, or the closed-loop matrix is not stable.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    n, p = B.shape
    if S is None:
        S = np.zeros((n, p))
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    if np.linalg.norm(Q - Q.T) > 1e-10 * (1 + np.linalg.norm(Q)):
        raise DareError("Q must be symmetric")
    if np.linalg.norm(R - R.T) > 1e-10 * (1 + np.linalg.norm(R)):
        raise DareError("R must be symmetric")
    try:
        Rinv = np.linalg.inv(R)
    except np.linalg.LinAlgError as e:
        raise DareError(f"R is singular: {e}") from e

    At = A - B @ Rinv @ S.T
    Qt = Q - S @ Rinv @ S.T
    G = B @ Rinv @ B.T
    if n == 0:
        return np.zeros((0, 0))

    # diagonal balancing: x = T xb with T = diag(d)
    _, T = scipy.linalg.matrix_balance(At, permute=False)
    d = np.diag(T)
    di = 1.0 / d
    Ab = (di[:, None] * At) * d[None, :]
    Gb = (di[:, None] * G) * di[None, :]
    Qb = (d[:, None] * Qt) * d[None, :]

    Ak, Gk, Hk = Ab, (Gb + Gb.T) / 2, (Qb + Qb.T) / 2
    eye = np.eye(n)
    converged = False
    for _ in range(max_iter):
        M = eye + Gk @ Hk
        try:
            W1 = np.linalg.solve(M, Ak)
            W2 = np.linalg.solve(M, Gk)
        except np.linalg.LinAlgError as e:
            raise DareError(f"doubling iteration broke down: {e}") from e
        An = Ak @ W1
        Gn = Gk + Ak @ W2 @ Ak.T
        Hn = Hk + Ak.T @ Hk @ W1
        if not (
            np.all(np.isfinite(An))
            and np.all(np.isfinite(Gn))
            and np.all(np.isfinite(Hn))
        ):
            raise DareError("doubling iteration diverged")
        delta = np.linalg.norm(Hn - Hk, "fro")
        Ak, Gk, Hk = An, (Gn + Gn.T) / 2, (Hn + Hn.T) / 2
        scale = np.linalg.norm(Hk, "fro")
        if not (np.isfinite(delta) and np.isfinite(scale)):
            raise DareError("doubling iteration diverged")
        if delta <= tol * max(1.0, scale):
            converged = True
            break
    if not converged:
        raise DareError(f"doubling iteration did not converge in {max_iter} steps")
    Xb = (Hk + Hk.T) / 2

    # polish and validate in the balanced coordinates where the arithmetic
    # happened; a few Newton steps (each one Stein solve) recover the digits
    # the doubling recursion loses on badly conditioned problems
    Bb = di[:, None] * B
    Sb = d[:, None] * S
    Aob = Ab + Bb @ Rinv @ Sb.T
    Qob = Qb + Sb @ Rinv @ Sb.T
    try:
        for _ in range(5):
            res = dare_residual(Aob, Bb, Qob, R, Sb, Xb)
            if res <= 0.5 * RESIDUAL_BOUND * (1.0 + np.linalg.norm(Xb)):
                break
            F = -np.linalg.solve(R + Bb.T @ Xb @ Bb, Bb.T @ Xb @ Aob + Sb.T)
            Acl = Aob + Bb @ F
            if np.max(np.abs(np.linalg.eigvals(Acl))) >= 1.0:
                break
            rhs = Qob + Sb @ F + F.T @ Sb.T + F.T @ R @ F
            try:
                Xn = _stein_solve(Acl, (rhs + rhs.T) / 2)
            except (np.linalg.LinAlgError, ValueError):
                break
            if not np.all(np.isfinite(Xn)):
                break
            Xb = (Xn + Xn.T) / 2

        res = dare_residual(Aob, Bb, Qob, R, Sb, Xb)
        if res > RESIDUAL_BOUND * (1.0 + np.linalg.norm(Xb)):
            raise DareError(f"solution residual too large: {res}")
        F = -np.linalg.solve(R + Bb.T @ Xb @ Bb, Bb.T @ Xb @ Aob + Sb.T)
        rho = float(np.max(np.abs(np.linalg.eigvals(Aob + Bb @ F))))
    except np.linalg.LinAlgError as e:
        raise DareError(f"solution validation failed: {e}") from e
    if rho >= 1.0:
        raise DareError(f"solution is not stabilizing (closed-loop radius {rho})")
    return (di[:, None] * Xb) * di[None, :]


def _brl_feasible(g: DiscreteStateSpace, gamma: float) -> bool:
    """Bounded-real test: does the stable system g satisfy ||g|| < gamma?

    Tested at level 1 on the gamma-normalized output (C/gamma, D/gamma) so
    the Riccati data stays well scaled for any level.
    """
    if gamma <= 0:
        return False
    D = g.D / gamma
    dgain = np.linalg.svd(D, compute_uv=False)[0] if D.size else 0.0
    if dgain >= 1.0:
        return False
    if g.n_states == 0:
        return True
    C = g.C / gamma
    Q = C.T @ C
    R = D.T @ D - np.eye(g.n_inputs)
    S = C.T @ D
    try:
        X = solve_dare(g.A, g.B, Q, R, S)
    except DareError:
        return False
    W = np.eye(g.n_inputs) - D.T @ D - g.B.T @ X @ g.B
    if np.min(np.linalg.eigvalsh(W)) <= 0:
        return False
    if np.min(np.linalg.eigvalsh(X)) < -RESIDUAL_BOUND * (1 + np.linalg.norm(X)):
        return False
    return True


def _gain_at(g: DiscreteStateSpace, omega: float) -> float:
    z = complex(np.cos(omega), np.sin(omega))
    if g.n_states == 0:
        G = g.D.astype(complex)
    else:
        G = g.D + g.C @ np.linalg.solve(
            z * np.eye(g.n_states) - g.A, g.B
        )
    return float(np.linalg.svd(G, compute_uv=False)[0])


def _grid_peak(g: DiscreteStateSpace, npts: int) -> float:
    omegas = np.linspace(0.0, np.pi, npts)
    zs = np.exp(1j * omegas)
    gains = _accel.resolvent_peak_gains(g.A, g.B, g.C, g.D, zs)
    k = int(np.argmax(gains))
    best = float(gains[k])
    # golden-section refinement around the grid peak
    lo = omegas[max(k - 1, 0)]
    hi = omegas[min(k + 1, npts - 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - phi * (hi - lo)
    x2 = lo + phi * (hi - lo)
    f1, f2 = _gain_at(g, x1), _gain_at(g, x2)
    for _ in range(60):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + phi * (hi - lo)
            f2 = _gain_at(g, x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - phi * (hi - lo)
            f1 = _gain_at(g, x1)
    return max(best, f1, f2)


_REDUCE_ABOVE = 120


def hinf_norm(g: DiscreteStateSpace, tol: float = 1e-6, grid: int = 2048) -> float:
    """l2-induced norm of a stable system to absolute accuracy ``tol``.

    A dense frequency sweep (with local refinement at the peak) gives a
    certified lower bound; bisection of the bounded-real condition gives
    certified upper bounds until the bracket is narrower than the budget.
    Large systems are balance-truncated first (with the truncation error
    folded into the accuracy budget) so the bounded-real test stays
    numerically trustworthy.
    """
    if not g.is_stable():
        raise ValueError("hinf_norm requires a stable system")
    if g.n_states == 0:
        return float(np.linalg.svd(g.D, compute_uv=False)[0]) if g.D.size else 0.0
    if tol <= 0:
        raise ValueError("tol must be positive")
    work = g
    slack = 0.0
    if g.n_states > _REDUCE_ABOVE:
        work, slack = _reduce_balanced(g, tol / 4.0)
    if work.n_states == 0:
        base = float(np.linalg.svd(work.D, compute_uv=False)[0]) if work.D.size else 0.0
        return base
    budget = tol - 2.0 * slack
    lo = _grid_peak(work, grid)
    hi = lo + max(budget / 2.0, 1e-12 * max(lo, 1.0))
    step = hi - lo
    while not _brl_feasible(work, hi):
        step *= 4.0
        hi += step
        if hi > 1e12 * max(lo, 1.0) + 1e12:
            raise RuntimeError("could not bracket the norm from above")
    while hi - lo > budget:
        mid = 0.5 * (lo + hi)
        if _brl_feasible(work, mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi) + slack


def _certified_below(g: DiscreteStateSpace, gamma: float) -> bool:
    """Certified test that a stable system's norm is below gamma."""
    if g.n_states <= _REDUCE_ABOVE:
        return _brl_feasible(g, gamma)
    red, err = _reduce_balanced(g, gamma * 1e-3)
    return _brl_feasible(red, gamma - err)


@dataclass(frozen=True)
class Controller:
    """Symbol-rate canceler with its certified closed-loop level.

    The certification contract: the closed loop of the design plant with
    this controller is internally stable with induced norm at most
    gamma_certified (re-checked independently at synthesis time).
    """

    system: DiscreteStateSpace
    gamma_certified: float
    info: dict = field(default_factory=dict, compare=False)


def lft(sigma: DiscreteStateSpace, n_z: int, n_y: int,
        K: DiscreteStateSpace) -> DiscreteStateSpace:
    """Lower linear-fractional interconnection of a partitioned plant and K.

    The last n_y plant outputs feed K; K's outputs drive the last
    K.n_outputs plant inputs.  Raises if the static loop is ill-posed.
    """
    n_u = K.n_outputs
    n_w = sigma.n_inputs - n_u
    if K.n_inputs != n_y:
        raise ValueError(f"controller expects {K.n_inputs} measurements, plant has {n_y}")
    if n_w < 0 or sigma.n_outputs < n_z + n_y:
        raise ValueError("partition widths exceed plant dimensions")
    A, B, C, D = sigma.A, sigma.B, sigma.C, sigma.D
    B1, B2 = B[:, :n_w], B[:, n_w:]
    C1, C2 = C[:n_z, :], C[n_z:, :]
    D11, D12 = D[:n_z, :n_w], D[:n_z, n_w:]
    D21, D22 = D[n_z:, :n_w], D[n_z:, n_w:]
    AK, BK, CK, DK = K.A, K.B, K.C, K.D
    M = np.eye(n_u) - DK @ D22
    try:
        E = np.linalg.inv(M)
    except np.linalg.LinAlgError as e:
        raise ValueError("algebraic loop: I - DK D22 is singular") from e
    EDK = E @ DK
    Acl = np.block(
        [
            [A + B2 @ EDK @ C2, B2 @ E @ CK],
            [BK @ (C2 + D22 @ EDK @ C2), AK + BK @ D22 @ E @ CK],
        ]
    )
    Bcl = np.vstack(
        [B1 + B2 @ EDK @ D21, BK @ (D21 + D22 @ EDK @ D21)]
    )
    Ccl = np.hstack([C1 + D12 @ EDK @ C2, D12 @ E @ CK])
    Dcl = D11 + D12 @ EDK @ D21
    return DiscreteStateSpace(Acl, Bcl, Ccl, Dcl, sigma.period)


def close_loop(plant: GeneralizedPlant, k: Controller) -> DiscreteStateSpace:
    """Closed loop of the design plant with the canceler (w -> z map)."""
    if k.system.n_outputs != plant.n_u:
        raise ValueError(
            f"controller drives {k.system.n_outputs} inputs, plant takes {plant.n_u}"
        )
    return lft(plant.sigma, plant.n_z, plant.n_y, k.system)


def _psd_sqrt_pair(M):
    """(M^1/2, M^-1/2) of a symmetric positive definite matrix."""
    w, V = np.linalg.eigh(M)
    if np.min(w) <= 0:
        raise np.linalg.LinAlgError("matrix not positive definite")
    return (V * np.sqrt(w)) @ V.T, (V / np.sqrt(w)) @ V.T


def _game_gains(A, B1, B2, C1, D12, gamma):
    """Control-side Riccati step of the min-max design at level gamma.

    Returns (X, Fw, Fu, Theta, Dw, Du, residual) where [w*; u*] = [Fw; Fu] x
    are the saddle gains, Theta couples the two deviation coordinates, and
    Dw, Du are the positive definite weights of the completed squares.
    Raises GammaInfeasibleError when the saddle conditions fail.
    """
    n = A.shape[0]
    m1, m2 = B1.shape[1], B2.shape[1]
    Bst = np.hstack([B1, B2])
    Q = C1.T @ C1
    S = np.hstack([np.zeros((n, m1)), C1.T @ D12])
    R = np.zeros((m1 + m2, m1 + m2))
    R[:m1, :m1] = -(gamma**2) * np.eye(m1)
    R[m1:, m1:] = D12.T @ D12
    try:
        X = solve_dare(A, Bst, Q, R, S)
    except DareError as e:
        raise GammaInfeasibleError(f"Riccati step failed: {e}") from e
    if np.min(np.linalg.eigvalsh(X)) < -RESIDUAL_BOUND * (1 + np.linalg.norm(X)):
        raise GammaInfeasibleError("Riccati solution not positive semidefinite")
    Phi = R + Bst.T @ X @ Bst
    P11, P12 = Phi[:m1, :m1], Phi[:m1, m1:]
    P21, P22 = Phi[m1:, :m1], Phi[m1:, m1:]
    if np.max(np.linalg.eigvalsh(P11)) >= 0:
        raise GammaInfeasibleError("disturbance weight lost definiteness")
    Du = P22 - P21 @ np.linalg.solve(P11, P12)
    if np.min(np.linalg.eigvalsh(Du)) <= 0:
        raise GammaInfeasibleError("control weight lost definiteness")
    F = -np.linalg.solve(Phi, Bst.T @ X @ A + S.T)
    Theta = np.linalg.solve(P11, P12)
    res = dare_residual(A, Bst, Q, R, S, X)
    return X, F[:m1, :], F[m1:, :], Theta, -P11, Du, res


def _central_controller(A, B1, B2, C1, C2, D12, D21, gamma):
    """Output-feedback central controller for a plant with D11 = 0, D22 = 0.

    First the control game is solved; rewriting the cost through its
    completed squares turns the residual problem into pure estimation of
    the control gain's state feedback from y, which the dual game solves.
    The controller is the resulting worst-case observer with u = Fu x_hat.
    """
    X, Fw, Fu, Theta, Dw, Du, res_x = _game_gains(A, B1, B2, C1, D12, gamma)
    _, Dw_isqrt = _psd_sqrt_pair(Dw)
    Du_sqrt, _ = _psd_sqrt_pair(Du)

    # plant rewritten in deviation coordinates (disturbance s, control r)
    Abar = A + B1 @ Fw + B1 @ Theta @ Fu
    B1bar = B1 @ Dw_isqrt
    B2bar = B2 - B1 @ Theta
    C2bar = C2 + D21 @ Fw + D21 @ Theta @ Fu
    D21bar = D21 @ Dw_isqrt
    D22bar = -D21 @ Theta

    # estimation step: dual game at level 1 on the transposed plant
    Yx, _, Gu, _, _, _, res_y = _game_gains(
        Abar.T, Fu.T @ Du_sqrt, C2bar.T, B1bar.T, D21bar.T, 1.0
    )
    L = -Gu.T
    AK = Abar + B2bar @ Fu - L @ (C2bar + D22bar @ Fu)
    BK = L
    CK = Fu
    DK = np.zeros((CK.shape[0], BK.shape[1]))
    info = {
        "x_residual": res_x,
        "y_residual": res_y,
        "x_spectral_norm": float(np.linalg.norm(X, 2)),
        "y_spectral_norm": float(np.linalg.norm(Yx, 2)),
    }
    return AK, BK, CK, DK, info


def synthesize(
    plant: GeneralizedPlant,
    gamma: float,
    epsilon: float = 1e-4,
    verify: bool = True,
) -> Controller:
    """Controller achieving closed-loop induced norm below ``gamma``.

    The performance output is augmented with epsilon * u and the
    measurement with an epsilon-scaled fictitious noise channel so the
    feedthrough rank conditions hold; the candidate is then checked
    against the unaugmented plant.  With verify=True (the default) the
    check is a full certificate: internal stability plus a bounded-real
    test at gamma on the (balance-truncated) closed loop.  verify=False
    keeps only the cheap necessary checks (stability and a frequency-grid
    lower bound) and is meant for the inner steps of the level search.

    Raises GammaInfeasibleError when no certified controller is found.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    sigma = plant.sigma
    n_w, n_u, n_z, n_y = plant.n_w, plant.n_u, plant.n_z, plant.n_y
    A = sigma.A
    B1 = sigma.B[:, :n_w]
    B2 = sigma.B[:, n_w:]
    C1 = sigma.C[:n_z, :]
    C2 = sigma.C[n_z:, :]
    D11 = sigma.D[:n_z, :n_w]
    D12 = sigma.D[:n_z, n_w:]
    D21 = sigma.D[n_z:, :n_w]
    D22 = sigma.D[n_z:, n_w:]
    if np.max(np.abs(D11)) > 0 or np.max(np.abs(D22)) > 0:
        raise ValueError("synthesis requires zero w->z and u->y feedthrough")

    n = A.shape[0]
    B1a = np.hstack([B1, np.zeros((n, n_y))])
    D21a = np.hstack([D21, epsilon * np.eye(n_y)])
    C1a = np.vstack([C1, np.zeros((n_u, n))])
    D12a = np.vstack([D12, epsilon * np.eye(n_u)])

    AK, BK, CK, DK, info = _central_controller(
        A, B1a, B2, C1a, C2, D12a, D21a, gamma
    )
    K = DiscreteStateSpace(AK, BK, CK, DK, sigma.period)
    ctrl = Controller(K, gamma_certified=float(gamma), info=info)

    cl = close_loop(plant, ctrl)
    rho = cl.spectral_radius()
    if rho >= 1.0 - 1e-12:
        raise GammaInfeasibleError(
            f"candidate controller does not stabilize (radius {rho})"
        )
    info["closed_loop_radius"] = rho
    if verify:
        if not _certified_below(cl, gamma * (1.0 + 1e-6)):
            raise GammaInfeasibleError(
                f"candidate controller misses the level {gamma}"
            )
    else:
        if _grid_peak(cl, 512) > gamma:
            raise GammaInfeasibleError(
                f"closed-loop response exceeds the level {gamma}"
            )
    return ctrl


def gamma_iterate(
    plant: GeneralizedPlant,
    rel_tol: float = 1e-3,
    epsilon: float = 1e-4,
    gamma_cap: float = 1e6,
):
    """Bisection over certified feasibility down to relative width rel_tol.

    Returns (gamma, controller) with the controller certified at the final
    feasible level.  The bracket invariant feasible(hi) and not feasible(lo)
    holds throughout; infeasibility all the way to gamma_cap signals a
    mis-modeled plant and raises.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must be in (0, 1)")
    hi = 1.0
    feasible = False
    while not feasible:
        try:
            synthesize(plant, hi, epsilon, verify=False)
            feasible = True
        except GammaInfeasibleError:
            hi *= 2.0
            if hi > gamma_cap:
                raise GammaInfeasibleError(
                    f"no feasible level found below {gamma_cap}"
                )
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        try:
            synthesize(plant, mid, epsilon, verify=False)
            hi = mid
        except GammaInfeasibleError:
            lo = mid
    # certify the final level; on the rare numerical miss, walk the level
    # up by the search resolution until the certificate holds
    for _ in range(200):
        try:
            return hi, synthesize(plant, hi, epsilon)
        except GammaInfeasibleError:
            hi *= 1.0 + max(rel_tol, 1e-6)
            if hi > gamma_cap:
                break
    raise GammaInfeasibleError("could not certify any searched level")
