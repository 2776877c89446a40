"""Corepresentation calculus.

A corep of a FiniteQG parent A is stored as a unital *-representation phi
of the dual block algebra (+)_a M_{n_a}, through the matrices
phi(e^a_{ij}) on the corep space.  The unitary U = sum_q u_q (x) phi(e_q)
is assembled on demand as the coefficient tensor Ucoef[i] in the basis of
A.  Dual-algebra elements are passed around as u-coordinate vectors; the
block form of a functional is exactly such a vector, so characters of A
become grouplike dual elements for free.
"""

from __future__ import annotations

import numpy as np

from . import linalg
from .core import FiniteQG
from .errors import (
    AxiomViolation,
    EmptyQ,
    NotAState,
    NotInvolutive,
    NotKac,
    OracleMismatch,
    ParentMismatch,
)
from .windows import GroupDualWindow

DEFAULT_TOL = 1e-9


class Corep:
    """Unitary corepresentation via its dual-side *-representation."""

    def __init__(self, parent: FiniteQG, phis, tol: float = DEFAULT_TOL,
                 validate: bool = True):
        self.parent = parent
        self.phis = np.asarray(phis, dtype=complex)  # (d, N, N), index q
        if self.phis.ndim != 3 or self.phis.shape[0] != parent.d:
            raise AxiomViolation(f"phi data must be (d, N, N), got {self.phis.shape}")
        self.space_dim = self.phis.shape[1]
        self.tol = tol
        if validate:
            self.validate()
        self.phis.flags.writeable = False

    # -- assembly -----------------------------------------------------------

    def phi(self, x):
        """phi(x) for a dual element given in u-coordinates."""
        return np.tensordot(np.asarray(x, dtype=complex), self.phis, axes=([0], [0]))

    def u_coef(self):
        """Coefficient tensor of U: U = sum_i e_i (x) u_coef[i]."""
        return np.tensordot(self.parent.B, self.phis, axes=([1], [0]))

    def counit_of(self, x):
        return self.parent.dual().counit_of(x)

    # -- validation -----------------------------------------------------------

    def validate(self):
        g = self.parent
        n = self.space_dim
        worst = 0.0
        # unital *-homomorphism on matrix units
        total = np.zeros((n, n), dtype=complex)
        for a, (na, off) in enumerate(zip(g.block_dims, g.block_offsets)):
            for i in range(na):
                total += self.phis[off + i * na + i]
                for j in range(na):
                    q = off + i * na + j
                    qt = off + j * na + i
                    worst = max(worst, float(np.linalg.norm(
                        self.phis[q].conj().T - self.phis[qt])))
        worst = max(worst, float(np.linalg.norm(total - np.eye(n))))
        worst = max(worst, self._product_residual())
        # corep identity on coefficients: sum_i Delta[i,a,b] U_i = U_a U_b
        uc = self.u_coef()
        lhs = np.tensordot(g.comult, uc, axes=([0], [0]))  # (a, b, N, N)
        rhs = np.einsum("aij,bjk->abik", uc, uc)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
        worst = max(worst, self._unitarity_residual(uc))
        if worst > self.tol:
            raise AxiomViolation(f"corep residual {worst:.3e} > {self.tol:.1e}")
        return worst

    def _product_residual(self):
        g = self.parent
        worst = 0.0
        for a, (na, off) in enumerate(zip(g.block_dims, g.block_offsets)):
            for b, (nb, offb) in enumerate(zip(g.block_dims, g.block_offsets)):
                for i in range(na):
                    for j in range(na):
                        for k in range(nb):
                            for l in range(nb):
                                prod = self.phis[off + i * na + j] @ self.phis[offb + k * nb + l]
                                if a == b and j == k:
                                    prod = prod - self.phis[off + i * na + l]
                                worst = max(worst, float(np.linalg.norm(prod)))
        return worst

    def _unitarity_residual(self, uc):
        g = self.parent
        n = self.space_dim
        # U^* U = 1: sum_{i,j,p} star[p,i] m[p,j,k] uc[i]^dag uc[j] = unit_k I
        c2 = np.tensordot(g.star, g.mult, axes=([0], [0]))  # c2[i,j,k]
        worst = 0.0
        acc = np.zeros((g.d, n, n), dtype=complex)
        ucd = np.conj(np.transpose(uc, (0, 2, 1)))
        nz = np.argwhere(np.abs(c2) > 1e-16)
        for (i, j, k) in nz:
            acc[k] += c2[i, j, k] * (ucd[i] @ uc[j])
        for k in range(g.d):
            target = g.unit[k] * np.eye(n)
            worst = max(worst, float(np.linalg.norm(acc[k] - target)))
        return worst

    # -- invariant vectors -----------------------------------------------------

    def invariant_projection(self, oracle_tol: float = 1e-8):
        """p = (h (x) id)(U), cross-checked against the joint eigenspace.

        The oracle computes ker{phi(e_q) - dual_counit(e_q) I} by brute
        force and compares the two orthogonal projections.
        """
        g = self.parent
        p = np.tensordot(g.haar, self.u_coef(), axes=([0], [0]))
        tol = self.tol
        if (np.linalg.norm(p @ p - p) > tol or
                np.linalg.norm(p - p.conj().T) > tol):
            raise AxiomViolation("averaged operator is not an orthogonal projection")
        eps = g.dual().counit
        stack = np.vstack([self.phis[q] - eps[q] * np.eye(self.space_dim)
                           for q in range(g.d)])
        basis = linalg.null_space(stack)
        if basis:
            vs = np.array(basis)
            # orthonormalise for safety
            qmat, _ = np.linalg.qr(vs.T)
            p_oracle = qmat @ qmat.conj().T
        else:
            p_oracle = np.zeros_like(p)
        if np.linalg.norm(p - p_oracle) > oracle_tol:
            raise OracleMismatch(
                f"averaging and joint-eigenspace projections differ by "
                f"{np.linalg.norm(p - p_oracle):.3e}")
        return p

    def invariant_rank(self):
        p = self.invariant_projection()
        return int(round(np.trace(p).real))

    def is_ergodic(self):
        return self.invariant_rank() == 0

    def defect(self, xi, family):
        """max over x in family of ||phi(x) xi - dual_counit(x) xi||."""
        xi = np.asarray(xi, dtype=complex)
        eps = self.parent.dual().counit
        out = 0.0
        for x in family:
            x = np.asarray(x, dtype=complex)
            e = complex(eps @ x)
            out = max(out, float(np.linalg.norm(self.phi(x) @ xi - e * xi)))
        return out


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def block_corep(parent: FiniteQG, alpha: int) -> Corep:
    """The canonical irreducible corep supported on block alpha."""
    n = parent.block_dims[alpha]
    off = parent.block_offsets[alpha]
    phis = np.zeros((parent.d, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            phis[off + i * n + j, i, j] = 1.0
    return Corep(parent, phis)


def trivial_corep(parent: FiniteQG, k: int = 1) -> Corep:
    phis = np.zeros((parent.d, k, k), dtype=complex)
    eps = parent.dual().counit
    for q in range(parent.d):
        phis[q] = eps[q] * np.eye(k)
    return Corep(parent, phis)


def direct_sum(*coreps: Corep) -> Corep:
    parent = coreps[0].parent
    if any(c.parent is not parent for c in coreps):
        raise ParentMismatch("direct sum needs a common parent")
    n = sum(c.space_dim for c in coreps)
    phis = np.zeros((parent.d, n, n), dtype=complex)
    pos = 0
    for c in coreps:
        phis[:, pos:pos + c.space_dim, pos:pos + c.space_dim] = c.phis
        pos += c.space_dim
    return Corep(parent, phis)


def regular_corep(parent: FiniteQG) -> Corep:
    """phi(x) = (+)_a (x^a (x) I_{n_a}) on C^(sum n_a^2) = C^d."""
    d = parent.d
    phis = np.zeros((d, d, d), dtype=complex)
    for a, (n, off) in enumerate(zip(parent.block_dims, parent.block_offsets)):
        for i in range(n):
            for j in range(n):
                q = off + i * n + j
                phis[q, off:off + n * n, off:off + n * n] = np.kron(
                    _unit_matrix(n, i, j), np.eye(n))
    return Corep(parent, phis)


def _unit_matrix(n, i, j):
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


# ---------------------------------------------------------------------------
# tensor product and contragredient
# ---------------------------------------------------------------------------

def tensor(u: Corep, v: Corep, oracle_tol: float = DEFAULT_TOL) -> Corep:
    """Tensor product corep on H_u (x) H_v.

    Primary route: phi = (phi_u (x) phi_v) o flip o dual_comult.  Verified
    against the direct leg product U_12 V_13 on the coefficient tensors.
    """
    if u.parent is not v.parent:
        raise ParentMismatch("tensor needs a common parent")
    g = u.parent
    p = g.dual().P  # u_p u_r = sum_q P[p,r,q] u_q
    n = u.space_dim * v.space_dim
    phis = np.zeros((g.d, n, n), dtype=complex)
    nz = np.argwhere(np.abs(p) > 1e-16)
    for (pp, rr, qq) in nz:
        phis[qq] += p[pp, rr, qq] * np.kron(u.phis[pp], v.phis[rr])
    out = Corep(g, phis)
    # oracle: coefficient tensor of U_12 V_13
    uc, vc = u.u_coef(), v.u_coef()
    direct = np.zeros((g.d, n, n), dtype=complex)
    nzm = np.argwhere(np.abs(g.mult) > 1e-16)
    for (j, k, i) in nzm:
        direct[i] += g.mult[j, k, i] * np.kron(uc[j], vc[k])
    if float(np.linalg.norm(direct - out.u_coef())) > oracle_tol:
        raise OracleMismatch("tensor legs and dual-coproduct routes disagree")
    return out


def contragredient(u: Corep) -> Corep:
    """U^c = (R (x) transpose) U on the conjugate space (Kac parents)."""
    g = u.parent
    if not g.kac:
        raise NotKac("contragredient implemented for Kac parents")
    uc = u.u_coef()
    # R = S on coefficients; transpose is entrywise in the chosen basis
    cc = np.einsum("ji,iab->jba", g.antipode, uc)
    return corep_from_u_coef(g, cc)


def corep_from_u_coef(parent: FiniteQG, u_coef) -> Corep:
    """Recover phi from a coefficient tensor via the basis change."""
    phis = np.tensordot(parent.Binv, np.asarray(u_coef, dtype=complex),
                        axes=([1], [0]))
    return Corep(parent, phis)


def intertwiners(u: Corep, v: Corep):
    """Basis of {T : phi_v(x) T = T phi_u(x) for all x}."""
    return linalg.solve_intertwiner(list(u.phis), list(v.phis))


def unitarily_equivalent(u: Corep, v: Corep, tol: float = 1e-8):
    """Search the intertwiner space for a unitary; returns (bool, residual).

    A generic invertible intertwiner T yields a unitary one through its
    polar factor T (T^*T)^(-1/2), which still intertwines because T^*T
    commutes with the source representation.
    """
    if u.space_dim != v.space_dim:
        return False, np.inf
    basis = intertwiners(u, v)
    if not basis:
        return False, np.inf
    from ._rng import CounterRNG
    rng = CounterRNG(41)
    candidates = list(basis)
    for _ in range(8):
        candidates.append(sum(rng.complex_normal() * b for b in basis))
    best = np.inf
    n = u.space_dim
    for t in candidates:
        s = np.linalg.svd(t, compute_uv=False)
        if s[0] < 1e-12 or s[-1] < 1e-9 * s[0]:
            continue
        w = t @ np.linalg.inv(linalg.psd_sqrt(t.conj().T @ t))
        resid = float(np.linalg.norm(w.conj().T @ w - np.eye(n)))
        resid = max(resid, max(
            float(np.linalg.norm(v.phis[q] @ w - w @ u.phis[q]))
            for q in range(u.parent.d)))
        best = min(best, resid)
        if best <= tol:
            return True, best
    return False, best


# ---------------------------------------------------------------------------
# spectral quantities
# ---------------------------------------------------------------------------

def kazhdan_gap(u: Corep, q_elements, tol: float = DEFAULT_TOL):
    """min over unit xi orthogonal to the invariant subspace of
    max_{x in Q} ||phi(x) xi - dual_counit(x) xi||.

    Computed as the square root of the smallest eigenvalue of
    sum_x (phi(x) - eps(x))^* (phi(x) - eps(x)) compressed to the
    orthocomplement of the invariant vectors; +inf when that space is 0.
    """
    q_elements = list(q_elements)
    if not q_elements:
        raise EmptyQ("kazhdan_gap needs a non-empty Q")
    g = u.parent
    eps = g.dual().counit
    p = u.invariant_projection()
    n = u.space_dim
    comp = linalg.null_space(p)  # orthocomplement basis (rows)
    if not comp:
        return np.inf
    w = np.array(comp).T  # (n, m) isometry onto the complement
    acc = np.zeros((w.shape[1], w.shape[1]), dtype=complex)
    for x in q_elements:
        x = np.asarray(x, dtype=complex)
        dx = u.phi(x) - complex(eps @ x) * np.eye(n)
        dxw = dx @ w
        acc += dxw.conj().T @ dxw
    lam = linalg.min_eig(acc)
    return float(np.sqrt(max(lam, 0.0)))


def dual_matrix_units(parent: FiniteQG):
    """All matrix units of the dual block algebra, as u-coordinate vectors."""
    return [np.eye(parent.d)[q] for q in range(parent.d)]


def is_weakly_mixing(u: Corep) -> bool:
    """No invariant vectors in U (x) U^c (Kac parents)."""
    if not u.parent.kac:
        raise NotKac("weak mixing test implemented for Kac parents")
    return tensor(u, contragredient(u)).invariant_rank() == 0


# ---------------------------------------------------------------------------
# GNS construction and condition-R
# ---------------------------------------------------------------------------

def gns(parent: FiniteQG, dual_state, tol: float = DEFAULT_TOL,
        rank_tol: float = 1e-10):
    """GNS corep of a state on the dual block algebra.

    dual_state: u-coordinate vector w with w_q = mu(e_q); positivity means
    every block of w is PSD.  Returns (corep, cyclic vector Omega, J) where
    J realises the conjugation of an R-hat-invariant state (else None).
    """
    g = parent
    w = np.asarray(dual_state, dtype=complex).reshape(g.d)
    blocks = g.blocks_of(w)
    for b in blocks:
        if not linalg.psd_check(b, 1e-9):
            raise NotAState("dual functional is not positive")
    if abs(sum(np.trace(b) for b in blocks) - 1.0) > 1e-9:
        raise NotAState("dual functional is not normalised")

    d = g.d
    gram = np.zeros((d, d), dtype=complex)
    for a, (n, off) in enumerate(zip(g.block_dims, g.block_offsets)):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        # <e_ij, e_kl> = delta_ik w^a_{jl}
                        if i == k:
                            gram[off + i * n + j, off + k * n + l] = blocks[a][j, l]
    f = linalg.psd_factor_vectors(gram, rank_tol)  # rows = Lambda(e_q)
    r = f.shape[1]
    pinv_ft = np.linalg.pinv(f.T)

    dual_mult = g.dual().block_mult_tensor()
    phis = np.zeros((d, r, r), dtype=complex)
    for p in range(d):
        fx = np.tensordot(dual_mult[p], f, axes=([1], [0]))  # rows Lambda(e_p e_q)
        phis[p] = fx.T @ pinv_ft
    corep = Corep(g, phis)

    # cyclic vector: Lambda(1) with 1 = sum of diagonal matrix units
    unit_hat = np.zeros(d)
    for n, off in zip(g.block_dims, g.block_offsets):
        for i in range(n):
            unit_hat[off + i * n + i] = 1.0
    omega = unit_hat @ f
    # state recovery check
    for q in range(d):
        val = omega.conj() @ phis[q] @ omega
        if abs(val - w[q]) > tol:
            raise OracleMismatch(f"GNS state mismatch at unit {q}: {abs(val - w[q]):.3e}")

    j_mat = None
    dual = g.dual()
    rhat = dual.unitary_antipode
    perm = dual.star_perm()
    # R-hat invariance: mu(Rhat(x)) = mu(x) on the basis
    rw = rhat.T @ w
    if np.max(np.abs(rw - w)) <= 1e-9:
        # J Lambda(x) = Lambda(Rhat(x^*)), antiunitary involution
        targets = np.zeros((d, r), dtype=complex)
        for q in range(d):
            coords = rhat[:, perm[q]]
            targets[q] = coords @ f
        j_mat = targets.T @ np.linalg.pinv(np.conj(f).T)
        if np.linalg.norm(j_mat @ np.conj(j_mat) - np.eye(r)) > 1e-8:
            raise NotInvolutive("constructed conjugation is not involutive")
        if not check_condition_r(corep, j_mat):
            raise OracleMismatch("GNS of an invariant state fails condition R")
    return corep, omega, j_mat


def check_condition_r(u: Corep, j_conj, tol: float = 1e-8) -> bool:
    """(R (x) j)(U) = U for j(x) = J x^* J, with J xi = j_conj conj(xi)."""
    j_conj = np.asarray(j_conj, dtype=complex)
    if np.linalg.norm(j_conj @ np.conj(j_conj) - np.eye(u.space_dim)) > 1e-9:
        raise NotInvolutive("candidate conjugation is not an involution")
    g = u.parent
    uc = u.u_coef()
    # j(x) = J x^T conj(J) as a matrix identity
    jx = np.einsum("ab,ibc,cd->iad", j_conj, np.transpose(uc, (0, 2, 1)),
                   np.conj(j_conj))
    lhs = np.tensordot(g.antipode, jx, axes=([1], [0]))
    return float(np.linalg.norm(lhs - uc)) <= tol


# ---------------------------------------------------------------------------
# window coreps (no Haar state: tensor and gauges only)
# ---------------------------------------------------------------------------

class WindowCorep:
    """Family of unitaries phi(g) with partial multiplicativity."""

    def __init__(self, window: GroupDualWindow, mats, tol=DEFAULT_TOL):
        self.parent = window
        self.mats = {g: np.asarray(m, dtype=complex) for g, m in mats.items()}
        self.space_dim = next(iter(self.mats.values())).shape[0]
        for g, m in self.mats.items():
            if np.linalg.norm(m @ m.conj().T - np.eye(self.space_dim)) > tol:
                raise AxiomViolation(f"phi({g!r}) is not unitary")
        for g in window.elements:
            for h in window.elements:
                p = window.mul(g, h)
                if p is None:
                    continue
                if np.linalg.norm(self.mats[g] @ self.mats[h] - self.mats[p]) > tol:
                    raise AxiomViolation("partial multiplicativity fails")

    def defect(self, xi, elements):
        xi = np.asarray(xi, dtype=complex)
        return max(float(np.linalg.norm(self.mats[g] @ xi - xi)) for g in elements)


def window_tensor(u: WindowCorep, v: WindowCorep) -> WindowCorep:
    if u.parent is not v.parent:
        raise ParentMismatch("window tensor needs a common parent")
    return WindowCorep(u.parent, {g: np.kron(u.mats[g], v.mats[g])
                                  for g in u.parent.elements})
