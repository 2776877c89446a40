"""Generating functionals and their cocycle calculus.

A generating functional L is selfadjoint, vanishes at the unit and is
conditionally negative definite (the form -L(a^* b) is PSD on ker eps).
It generates the convolution semigroup mu_t = exp_*(-t L).  The
conditional GNS construction produces a representation rho and a cocycle
c with

    c(ab) = rho(a) c(b) + c(a) eps(b),
    L(a^* b) = conj(L(a)) eps(b) + conj(eps(a)) L(b) - <c(a), c(b)>,

from which the triple-product matrices and their norm identities follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .core import FiniteQG
from .errors import (
    GramNotPSD,
    NotCentral,
    NotCND,
    NotKac,
    NotNormalized,
    NotSelfadjoint,
    NotVanishing,
    SelectionFailed,
    StageOverflow,
    WindowTruncation,
)
from .functionals import Functional, adjoint, semigroup_state
from .windows import GroupDualWindow

CND_TOL = 1e-9
FLAG_TOL = 1e-10


@dataclass
class GenFunctional:
    """A validated generating functional with its structure flags."""

    base: Functional
    selfadjoint: bool
    vanishes_at_unit: bool
    central: bool
    s_invariant: bool
    central_values: np.ndarray | None = None   # c_a per irrep when central

    @property
    def parent(self):
        return self.base.parent


def _kernel_counit_basis(parent):
    """Orthonormal basis (columns) of ker eps inside the coefficient space."""
    if isinstance(parent, GroupDualWindow):
        row = np.ones((1, parent.size))
    else:
        row = parent.counit.reshape(1, -1)
    vecs = linalg.null_space(row)
    return np.array(vecs).T


def cnd_gram(l: Functional, sub_radius=None):
    """The matrix -L(basis_i^* basis_j) over the relevant basis.

    FiniteQG: the full coefficient basis.  Windows: elements of the
    half-radius sub-window (or the given radius).
    """
    if l.is_window:
        w = l.parent
        s = (w.radius // 2) if sub_radius is None else sub_radius
        sub = w.sub_window(max(s, 1))
        gram = np.zeros((len(sub), len(sub)), dtype=complex)
        for a, ia in enumerate(sub):
            gi = w.inv(w.elements[ia])
            for b, ib in enumerate(sub):
                p = w.mul(gi, w.elements[ib])
                if p is None:
                    raise WindowTruncation("half-window product escaped the window")
                gram[a, b] = -l.value(p)
        return gram, sub
    g = l.parent
    m_l = np.tensordot(g.mult, l.coeffs, axes=([2], [0]))
    return -(g.star.T @ m_l), list(range(g.d))


def validate_generating(l: Functional, tol: float = CND_TOL,
                        sub_radius=None) -> GenFunctional:
    """Check the generating-functional axioms and compute structure flags."""
    parent = l.parent
    # vanishing at the unit
    if abs(l.at_unit()) > FLAG_TOL:
        raise NotVanishing(f"L(1) = {l.at_unit():.3e}")
    # selfadjointness: L(a^*) = conj(L(a))
    sa_resid = float(np.max(np.abs(adjoint(l).coeffs - l.coeffs)))
    if sa_resid > FLAG_TOL:
        raise NotSelfadjoint(f"selfadjointness residual {sa_resid:.3e}")
    # conditional negative definiteness on ker eps
    gram, sub = cnd_gram(l, sub_radius)
    if isinstance(parent, GroupDualWindow):
        kmat = np.array(linalg.null_space(np.ones((1, len(sub))))).T
    else:
        kmat = _kernel_counit_basis(parent)
    comp = kmat.conj().T @ gram @ kmat
    herm = 0.5 * (comp + comp.conj().T)
    if np.linalg.norm(comp - herm) > tol * max(1.0, np.linalg.norm(comp)):
        raise NotCND("restricted form is not Hermitian")
    vals, vecs = linalg.hermitian_eig(herm)
    if vals[0] < -tol:
        witness = kmat @ vecs[:, 0]
        raise NotCND(f"negative-definiteness fails: form value {-vals[0]:.3e}",
                     witness=witness)
    # flags
    if isinstance(parent, GroupDualWindow):
        central = True
        s_inv = all(abs(l.value(parent.inv(g)) - l.value(g)) <= FLAG_TOL
                    for g in parent.elements)
        central_values = np.real_if_close(l.coeffs.copy())
    else:
        blocks = l.blocks()
        central = all(
            np.linalg.norm(b - np.trace(b) / b.shape[0] * np.eye(b.shape[0])) <= FLAG_TOL
            for b in blocks)
        s_inv = float(np.max(np.abs(parent.antipode.T @ l.coeffs - l.coeffs))) <= FLAG_TOL
        central_values = (np.array([np.trace(b) / b.shape[0] for b in blocks])
                          if central else None)
    return GenFunctional(l, True, True, central, s_inv, central_values)


# ---------------------------------------------------------------------------
# Schurmann triple (conditional GNS)
# ---------------------------------------------------------------------------

class SchurmannTriple:
    """Representation rho and cocycle c reconstructing the generator."""

    def __init__(self, gen: GenFunctional, tol: float = 1e-8):
        self.gen = gen
        parent = gen.parent
        l = gen.base
        if isinstance(parent, GroupDualWindow):
            sub = parent.sub_window(max(parent.radius // 2, 1))
            self.basis = [parent.elements[i] for i in sub]
            nb = len(self.basis)
            eps = np.ones(nb)
            lvals = np.array([l.value(g) for g in self.basis])
            gram = np.zeros((nb, nb), dtype=complex)
            for a, ga in enumerate(self.basis):
                gi = parent.inv(ga)
                for b, gb in enumerate(self.basis):
                    p = parent.mul(gi, gb)
                    if p is None:
                        raise WindowTruncation("cocycle basis product undefined")
                    gram[a, b] = (np.conj(lvals[a]) + lvals[b] - l.value(p))
        else:
            nb = parent.d
            self.basis = list(range(nb))
            eps = parent.counit
            lvals = l.coeffs
            m_l = np.tensordot(parent.mult, l.coeffs, axes=([2], [0]))
            star_prod = parent.star.T @ m_l  # L(e_i^* e_j)
            gram = (np.outer(np.conj(lvals), eps) +
                    np.outer(np.conj(eps), lvals) - star_prod)
        self.cocycle_gram = gram
        try:
            self.cocycle_vectors = linalg.psd_factor_vectors(gram)
        except GramNotPSD as exc:
            raise GramNotPSD(f"cocycle gram not PSD: {exc}") from exc
        self.dim = self.cocycle_vectors.shape[1]
        self._parent = parent
        self._eps = np.asarray(eps, dtype=complex)
        self._lvals = np.asarray(lvals, dtype=complex)
        self._basis_index = {g: i for i, g in enumerate(self.basis)}
        if isinstance(parent, GroupDualWindow):
            self.rhos = None
            self._verify_window_rule(tol)
        else:
            self._build_rho()
            self._verify(tol)
        if gen.s_invariant:
            imag = float(np.max(np.abs(self.cocycle_gram.imag)))
            if imag > 1e-8:
                raise GramNotPSD(
                    f"gram of an antipode-invariant generator not real: {imag:.3e}")

    # cocycle on a coefficient vector
    def cocycle(self, coeffs):
        return np.asarray(coeffs, dtype=complex) @ self.cocycle_vectors

    def _product_coeffs(self, p, q):
        """Coefficient vector of basis_p * basis_q over the basis."""
        parent = self._parent
        if isinstance(parent, GroupDualWindow):
            r = parent.mul(self.basis[p], self.basis[q])
            if r is None or r not in self._basis_index:
                raise WindowTruncation("cocycle product escapes the basis")
            out = np.zeros(len(self.basis))
            out[self._basis_index[r]] = 1.0
            return out
        return parent.mult[p, q]

    def _build_rho(self):
        f = self.cocycle_vectors
        pinv_ft = np.linalg.pinv(f.T)
        nb = len(self.basis)
        rhos = np.zeros((nb, self.dim, self.dim), dtype=complex)
        for p in range(nb):
            targets = np.zeros((nb, self.dim), dtype=complex)
            for q in range(nb):
                coeffs = self._product_coeffs(p, q)
                targets[q] = self.cocycle(coeffs) - self._eps[q] * f[p]
            rhos[p] = targets.T @ pinv_ft
        self.rhos = rhos

    def rho(self, coeffs):
        if self.rhos is None:
            raise WindowTruncation("window triples expose only the cocycle gram")
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.rhos,
                            axes=([0], [0]))

    def _verify_window_rule(self, tol):
        """Gram-level cocycle rule on windows.

        The rule c(bd) = rho(b)c(d) + c(b) with rho(b) unitary is, at the
        level of inner products, <c(bd) - c(b), c(bd') - c(b)> = <c(d), c(d')>
        whenever the products stay inside the cocycle basis.
        """
        w = self._parent
        f = self.cocycle_vectors
        bi = self._basis_index
        worst = 0.0
        for b in self.basis:
            avail = [(dd, w.mul(b, dd)) for dd in self.basis
                     if w.mul(b, dd) in bi]
            for dd, bd in avail:
                for dd2, bd2 in avail:
                    lhs = np.vdot(f[bi[bd]] - f[bi[b]], f[bi[bd2]] - f[bi[b]])
                    rhs = np.vdot(f[bi[dd]], f[bi[dd2]])
                    worst = max(worst, abs(lhs - rhs))
        if worst > tol:
            raise GramNotPSD(f"window cocycle rule residual {worst:.3e}")
        self.cocycle_rule_residual = worst

    def _verify(self, tol):
        # cocycle rule residual on basis triples through the gram:
        # <c(a), c(bd)> = <c(a), rho(b) c(d)> + eps(d) <c(a), c(b)>
        nb = len(self.basis)
        f = self.cocycle_vectors
        worst = 0.0
        for b in range(nb):
            for dd in range(nb):
                cbd = self.cocycle(self._product_coeffs(b, dd))
                rhs = self.rhos[b] @ f[dd] + self._eps[dd] * f[b]
                worst = max(worst, float(np.linalg.norm(cbd - rhs)))
        if worst > tol:
            raise GramNotPSD(f"cocycle rule residual {worst:.3e}")
        self.cocycle_rule_residual = worst
        # defining identity residual (a recomputation of the gram)
        parent = self._parent
        if isinstance(parent, GroupDualWindow):
            return
        l = self.gen.base
        m_l = np.tensordot(parent.mult, l.coeffs, axes=([2], [0]))
        star_prod = parent.star.T @ m_l
        rhs = (np.outer(np.conj(l.coeffs), parent.counit) +
               np.outer(np.conj(parent.counit), l.coeffs)
               - np.conj(f) @ f.T)
        resid = float(np.linalg.norm(star_prod - rhs))
        if resid > 1e-9:
            raise GramNotPSD(f"defining identity residual {resid:.3e}")


def schurmann_triple(gen: GenFunctional) -> SchurmannTriple:
    return SchurmannTriple(gen)


# ---------------------------------------------------------------------------
# central triple-product matrices and the cocycle norm identity
# ---------------------------------------------------------------------------

def _require_central_kac(gen: GenFunctional):
    parent = gen.parent
    if isinstance(parent, FiniteQG) and not parent.kac:
        raise NotKac("triple forms need a Kac parent")
    if not gen.central or not gen.s_invariant:
        raise NotCentral("triple forms need a central antipode-invariant generator")


def triple_form_matrices(gen: GenFunctional, alpha, beta, gammas,
                         triple: SchurmannTriple | None = None,
                         tol: float = 1e-10):
    """Hermitian matrices V[(i,j,k),(p,r,s)] = L((u^a_ip)^* u^g_jr u^b_ks).

    Primary route: the cocycle expansion
        V = delta(c_a + c_g + c_b)
            - delta_ip <c((u^g_jr)^*), c(u^b_ks)>
            - delta_ks <c(u^a_ip), c(u^g_jr)>
            - <c(u^a_ip), rho(u^g_jr) c(u^b_ks)>
    cross-checked entrywise against direct evaluation of L on the expanded
    triple products.  Returns per gamma a record with the matrix, its
    minimum eigenvalue and the operator-norm lower bound
    c_g + c_a + c_b - 2 sqrt(c_a c_g) - 2 sqrt(c_g c_b) - 2 sqrt(c_a c_b)
    assembled from ||T_g|| = sqrt(2 c_g).
    """
    _require_central_kac(gen)
    parent = gen.parent
    if isinstance(parent, GroupDualWindow):
        return _window_triple_forms(gen, alpha, beta, gammas, tol)
    if triple is None:
        triple = SchurmannTriple(gen)
    l = gen.base
    cvals = gen.central_values
    out = []
    for gamma in gammas:
        v_primary = _triple_form_cocycle(parent, triple, cvals, alpha, gamma, beta)
        v_direct = _triple_form_direct(parent, l, alpha, gamma, beta)
        entry_resid = float(np.max(np.abs(v_primary - v_direct)))
        if entry_resid > tol:
            raise GramNotPSD(
                f"triple-form routes disagree by {entry_resid:.3e} at gamma={gamma}")
        herm = float(np.linalg.norm(v_direct - v_direct.conj().T))
        if herm > tol:
            raise GramNotPSD(f"triple form not Hermitian: {herm:.3e}")
        vals = np.linalg.eigvalsh(0.5 * (v_direct + v_direct.conj().T))
        ca, cg, cb = (max(float(cvals[alpha].real), 0.0),
                      max(float(cvals[gamma].real), 0.0),
                      max(float(cvals[beta].real), 0.0))
        bound = (ca + cg + cb - 2.0 * math.sqrt(ca * cg)
                 - 2.0 * math.sqrt(cg * cb) - 2.0 * math.sqrt(ca * cb))
        out.append({
            "gamma": gamma,
            "matrix": v_direct,
            "hermiticity": herm,
            "route_residual": entry_resid,
            "min_eig": float(vals[0]),
            "lower_bound": bound,
        })
    return out


def _irrep_entry_coeffs(parent, alpha, i, j):
    return parent.irreps[alpha].coeffs[i, j]


def _triple_form_direct(parent, l, alpha, gamma, beta):
    na, ng, nb = (parent.block_dims[alpha], parent.block_dims[gamma],
                  parent.block_dims[beta])
    v = np.zeros((na * ng * nb, na * ng * nb), dtype=complex)
    star = parent.star
    for i in range(na):
        for p in range(na):
            a_star = star @ np.conj(_irrep_entry_coeffs(parent, alpha, i, p))
            for j in range(ng):
                for r in range(ng):
                    left = parent.mul(a_star, _irrep_entry_coeffs(parent, gamma, j, r))
                    for k in range(nb):
                        for s in range(nb):
                            full = parent.mul(left, _irrep_entry_coeffs(parent, beta, k, s))
                            v[(i * ng + j) * nb + k, (p * ng + r) * nb + s] = l(full)
    return v


def _triple_form_cocycle(parent, triple, cvals, alpha, gamma, beta):
    na, ng, nb = (parent.block_dims[alpha], parent.block_dims[gamma],
                  parent.block_dims[beta])
    ca, cg, cb = cvals[alpha].real, cvals[gamma].real, cvals[beta].real
    star = parent.star

    def cvec(al, i, j):
        return triple.cocycle(_irrep_entry_coeffs(parent, al, i, j))

    def cvec_star(al, i, j):
        return triple.cocycle(star @ np.conj(_irrep_entry_coeffs(parent, al, i, j)))

    dim = na * ng * nb
    v = np.zeros((dim, dim), dtype=complex)
    for i in range(na):
        for p in range(na):
            c_a = cvec(alpha, i, p)
            for j in range(ng):
                for r in range(ng):
                    c_g = cvec(gamma, j, r)
                    c_g_star = cvec_star(gamma, j, r)
                    rho_g = triple.rho(_irrep_entry_coeffs(parent, gamma, j, r))
                    for k in range(nb):
                        for s in range(nb):
                            c_b = cvec(beta, k, s)
                            val = 0.0
                            if i == p and j == r and k == s:
                                val += ca + cg + cb
                            if i == p:
                                val -= np.vdot(c_g_star, c_b)
                            if k == s:
                                val -= np.vdot(c_a, c_g)
                            val -= np.vdot(c_a, rho_g @ c_b)
                            v[(i * ng + j) * nb + k, (p * ng + r) * nb + s] = val
    return v


def _window_triple_forms(gen, alpha, beta, gammas, tol):
    w = gen.parent
    l = gen.base
    out = []
    ai = w.inv(alpha)
    for gamma in gammas:
        left = w.mul(ai, gamma)
        if left is None:
            raise WindowTruncation("triple product escapes the window")
        full = w.mul(left, beta)
        if full is None:
            raise WindowTruncation("triple product escapes the window")
        val = l.value(full)
        ca, cg, cb = (l.value(alpha).real, l.value(gamma).real,
                      l.value(beta).real)
        bound = (ca + cg + cb - 2.0 * math.sqrt(max(ca * cg, 0.0))
                 - 2.0 * math.sqrt(max(cg * cb, 0.0))
                 - 2.0 * math.sqrt(max(ca * cb, 0.0)))
        out.append({
            "gamma": gamma,
            "matrix": np.array([[val]]),
            "hermiticity": float(abs(val - np.conj(val))),
            "route_residual": 0.0,
            "min_eig": float(val.real),
            "lower_bound": bound,
        })
    return out


def cocycle_norm_residual(triple: SchurmannTriple, gamma, tol: float = 1e-8):
    """Residual of T^*T = 2 c_g I for the cocycle block operators.

    T(e_j) = sum_a c(u^g_{ja}) (x) e_a and the tilde version uses
    c((u^g_{aj})^*); both must have squared norm 2 c_g.
    """
    gen = triple.gen
    _require_central_kac(gen)
    parent = gen.parent
    if isinstance(parent, GroupDualWindow):
        # 1-dim blocks: ||c(g)||^2 = 2 L(g) and the same for the inverse
        cg = gen.base.value(gamma).real
        bi = triple._basis_index
        if gamma not in bi or parent.inv(gamma) not in bi:
            raise WindowTruncation("gamma outside the cocycle basis window")
        g_idx, gi_idx = bi[gamma], bi[parent.inv(gamma)]
        return max(abs(triple.cocycle_gram[g_idx, g_idx].real - 2.0 * cg),
                   abs(triple.cocycle_gram[gi_idx, gi_idx].real - 2.0 * cg))
    ng = parent.block_dims[gamma]
    cg = gen.central_values[gamma].real
    star = parent.star
    t_mat = np.zeros((ng, ng), dtype=complex)
    tt_mat = np.zeros((ng, ng), dtype=complex)
    cvecs = {}
    cvecs_star = {}
    for a in range(ng):
        for b in range(ng):
            cvecs[a, b] = triple.cocycle(_irrep_entry_coeffs(parent, gamma, a, b))
            cvecs_star[a, b] = triple.cocycle(
                star @ np.conj(_irrep_entry_coeffs(parent, gamma, a, b)))
    for i in range(ng):
        for j in range(ng):
            t_mat[i, j] = sum(np.vdot(cvecs[i, a], cvecs[j, a]) for a in range(ng))
            tt_mat[i, j] = sum(np.vdot(cvecs_star[a, i], cvecs_star[a, j])
                               for a in range(ng))
    target = 2.0 * cg * np.eye(ng)
    return max(float(np.linalg.norm(t_mat - target)),
               float(np.linalg.norm(tt_mat - target)))


# ---------------------------------------------------------------------------
# strongly unbounded generator constructor
# ---------------------------------------------------------------------------

def construct_unbounded_generator(block_at, eps, eval_windows, search_labels,
                                  k_candidates, max_stages: int = 40):
    """Grow a strongly unbounded central generator from a vanishing sequence.

    block_at(k, label) returns the block of the k-th element at an irrep
    label (a scalar or a matrix).  Stage l selects k_l with
    sup_{label in K_l} ||I - a_{k_l}|| <= eps/4^l (smallness) and a witness
    label with ||I - a_{k_l}|| >= eps (escape), then accumulates
    L = sum_l 2^l (1 - a_{k_l}).  Stages are capped and weights guarded
    against overflow.
    """
    if max_stages > 60:
        raise StageOverflow("stage weights exceed double precision beyond 60")
    stages = []
    k_prev = -1
    k_list = list(k_candidates)
    search = list(search_labels)
    n_stages = min(max_stages, len(eval_windows))

    def gauge(k, label):
        b = np.asarray(block_at(k, label))
        if b.ndim == 0:
            return float(abs(1.0 - complex(b)))
        return linalg.opnorm(b - np.eye(b.shape[0]))

    for l in range(1, n_stages + 1):
        window = list(eval_windows[l - 1])
        small_bound = eps / (4.0 ** l)
        chosen = None
        witness = None
        small_ok_seen = False
        for k in k_list:
            if k <= k_prev:
                continue
            if max(gauge(k, lab) for lab in window) > small_bound:
                continue
            small_ok_seen = True
            for lab in search:
                if gauge(k, lab) >= eps:
                    chosen, witness = k, lab
                    break
            if chosen is not None:
                break
        if chosen is None:
            cond = "escape" if small_ok_seen else "smallness"
            raise SelectionFailed(
                f"stage {l}: no candidate satisfies the {cond} condition",
                condition=cond, stage=l)
        stages.append({"l": l, "k": chosen, "witness": witness,
                       "weight": 2.0 ** l})
        k_prev = chosen

    def generator_block(label):
        acc = None
        for st in stages:
            b = np.asarray(block_at(st["k"], label), dtype=complex)
            term = st["weight"] * ((np.eye(b.shape[0]) if b.ndim == 2 else 1.0) - b)
            acc = term if acc is None else acc + term
            if np.max(np.abs(np.atleast_1d(acc))) > 1e300:
                raise StageOverflow("generator value exceeded double precision")
        return acc

    for st in stages:
        val = generator_block(st["witness"])
        norm = (abs(complex(val)) if np.asarray(val).ndim == 0
                else linalg.opnorm(np.asarray(val)))
        st["witness_norm"] = float(norm)
        st["witness_bound"] = st["weight"] * eps
        if norm < st["witness_bound"] - 1e-9:
            raise SelectionFailed(
                f"stage {st['l']}: witness norm {norm:.3e} below "
                f"{st['witness_bound']:.3e}", condition="escape", stage=st["l"])
    return {"stages": stages, "generator_block": generator_block}


def unbounded_generator_on_z(a_fn, eps, n_windows, max_stages: int = 40,
                             search_limit: int = 10 ** 7):
    """The integer-lattice specialisation of the unbounded-generator growth.

    a_fn(k, m) gives the (scalar) block of the k-th positive-definite
    function at the integer m; evaluation windows are {-n..n} for
    n = 1..n_windows.  Witnesses are searched along doubling integers.
    Validates the resulting generator on every evaluation window and
    returns (report, validated GenFunctional on the largest window).
    """
    windows = [list(range(-n, n + 1)) for n in range(1, n_windows + 1)]
    search = []
    m = 1
    while m <= search_limit:
        search.append(m)
        m *= 2
    k_candidates = search  # doubling candidates work for smooth families
    report = construct_unbounded_generator(a_fn, eps, windows, search,
                                           k_candidates, max_stages)
    gen_block = report["generator_block"]
    from .windows import build_window
    results = []
    largest = None
    for n in range(1, n_windows + 1):
        # host window of radius 2n so the gram over {-n..n} is fully defined
        w = build_window("Z(1)", 2 * n)
        vals = np.array([complex(gen_block(g[0])) for g in w.elements])
        lf = Functional(w, vals)
        gen = validate_generating(lf, sub_radius=n)
        largest = gen
        results.append({"n": n, "max_abs": float(np.max(np.abs(vals)))})
    report["window_validation"] = results
    return report, largest


# ---------------------------------------------------------------------------
# no-invariant-vector bounds for the doubled GNS representation
# ---------------------------------------------------------------------------

def pair_invariance_bounds(gen: GenFunctional, t: float, zeta_spec,
                           gamma_seq, tol: float = 1e-9):
    """Lower bounds forcing ||(pi_t * pi_t)(z) zeta - zeta|| away from zero.

    On a group-dual window with semigroup mu_t = exp(-t L):
        bound(gamma) = 1 - 2 sum_{i,j} Re[mu_t(a_j^-1 gamma a_i)
                                          mu_t(b_j^-1 gamma b_i)]
    for zeta = sum_i pi(a_i) Omega (x) pi(b_i) Omega, which must be
    normalised in the GNS norm of mu_t (x) mu_t.
    """
    w = gen.parent
    if not isinstance(w, GroupDualWindow):
        raise NotCentral("pair bounds are a window experiment")
    mu = semigroup_state(gen.base, t)

    def mu_at(g):
        return mu.value(g)

    pairs = list(zeta_spec)
    norm_sq = 0.0
    for (ai, bi) in pairs:
        for (aj, bj) in pairs:
            pa = w.mul(w.inv(aj), ai)
            pb = w.mul(w.inv(bj), bi)
            if pa is None or pb is None:
                raise WindowTruncation("zeta gram product escapes the window")
            norm_sq += (mu_at(pa) * mu_at(pb)).real
    if abs(norm_sq - 1.0) > tol:
        raise NotNormalized(f"zeta norm^2 = {norm_sq:.6f}")

    bounds = []
    for gamma in gamma_seq:
        acc = 0.0
        for (ai, bi) in pairs:
            for (aj, bj) in pairs:
                left = w.mul(w.inv(aj), gamma)
                right = w.mul(w.inv(bj), gamma)
                if left is None or right is None:
                    raise WindowTruncation("gamma product escapes the window")
                pa = w.mul(left, ai)
                pb = w.mul(right, bi)
                if pa is None or pb is None:
                    raise WindowTruncation("gamma product escapes the window")
                acc += (mu_at(pa) * mu_at(pb)).real
        bounds.append({"gamma": gamma, "bound": 1.0 - 2.0 * acc})
    return bounds
