import itertools

import numpy as np
import pytest

from qgwb import coreps, fock, presets
from qgwb._rng import CounterRNG
from qgwb.errors import CompatibilityFailed, DepthExceeded, NotTracial


@pytest.fixture(scope="module")
def f28():
    return fock.TruncatedFock(2, 8)


def test_dimensions(f28):
    assert f28.total_dim == 511
    assert f28.degree_dims == [1, 2, 4, 8, 16, 32, 64, 128, 256]


def test_involution_invariants():
    f = fock.TruncatedFock(3, 2)
    assert np.linalg.norm(f.j_conj @ np.conj(f.j_conj) - np.eye(3)) < 1e-12
    assert np.linalg.norm(f.t_conj @ np.conj(f.t_conj) - np.eye(3)) < 1e-12
    assert f.tracial
    q = np.diag([2.0, 0.5])
    jswap = np.array([[0.0, 1.0], [1.0, 0.0]])
    f2 = fock.TruncatedFock(2, 2, j_conj=jswap, q_mat=q)
    assert not f2.tracial


def test_cap():
    with pytest.raises(DepthExceeded):
        fock.TruncatedFock(4, 10)


def test_zero_operator(f28):
    assert np.linalg.norm(f28.s_operator(np.zeros(2))) == 0.0


def test_catalan_moments(f28):
    zeta = np.array([1.0, 0.0])
    s = f28.s_operator(zeta)
    m = f28.vacuum_moments(s, [2, 4, 6, 8])
    assert abs(m[2] - 1.0) < 1e-12
    assert abs(m[4] - 2.0) < 1e-12
    assert abs(m[6] - 5.0) < 1e-12
    assert abs(m[8] - 14.0) < 1e-12


def test_pair_moments(f28):
    rng = CounterRNG(2)
    for _ in range(4):
        z, e = rng.complex_vector(2), rng.complex_vector(2)
        lhs = f28.vacuum().conj() @ f28.s_operator(z) @ f28.s_operator(e) @ f28.vacuum()
        assert abs(lhs - np.vdot(f28.apply_t(z), e)) < 1e-12


def test_selfadjoint_iff_t_fixed(f28):
    s = f28.s_operator(np.array([1.0, 0.0]))
    assert np.linalg.norm(s - s.conj().T) < 1e-12
    s2 = f28.s_operator(np.array([1.0j, 0.0]))
    assert np.linalg.norm(s2 - s2.conj().T) > 0.5


def test_moment_exactness_depth_stability():
    zeta = np.array([1.0, 0.0])
    vals = {}
    for depth in (8, 10):
        f = fock.TruncatedFock(2, depth)
        s = f.s_operator(zeta)
        vals[depth] = f.vacuum_moments(s, [2, 4, 6, 8])
    for k in (2, 4, 6, 8):
        assert abs(vals[8][k] - vals[10][k]) < 1e-14


def brute_force_pairings(word):
    """Sum over non-crossing pair partitions of <Omega, s_{i1}..s_{ik} Omega>
    for orthonormal J-real letters: each pair contributes delta of labels."""
    k = len(word)
    if k % 2:
        return 0.0

    def count(indices):
        if not indices:
            return 1.0
        first = indices[0]
        total = 0.0
        for pos in range(1, len(indices), 2):
            j = indices[pos]
            if word[first] == word[j]:
                total += count(indices[1:pos]) * count(indices[pos + 1:])
        return total

    return count(list(range(k)))


def test_free_independence_via_noncrossing_pairings(f28):
    s = [f28.s_operator(np.array([1.0, 0.0])),
         f28.s_operator(np.array([0.0, 1.0]))]
    vac = f28.vacuum()
    for length in (2, 3, 4):
        for labels in itertools.product([0, 1], repeat=length):
            op = np.eye(f28.total_dim)
            for l in labels:
                op = op @ s[l]
            val = (vac.conj() @ op @ vac).real
            assert abs(val - brute_force_pairings(labels)) < 1e-12


# -- lifting --------------------------------------------------------------------

def test_lift_trivial():
    g = presets.load_preset("dual-Z(2)")
    t = coreps.trivial_corep(g)
    f = fock.TruncatedFock(1, 4)
    lifted = fock.lift_rep(f, t)
    eps_coef = np.einsum("i,ab->iab", g.unit, np.eye(f.total_dim))
    assert np.linalg.norm(lifted.coef - eps_coef) < 1e-12


def test_lift_sign_character_powers():
    g = presets.load_preset("dual-Z(2)")
    sign = coreps.block_corep(g, 1)
    f = fock.TruncatedFock(1, 6)
    lifted = fock.lift_rep(f, sign)
    for n, b in enumerate(lifted.degree_blocks):
        assert abs(b[1][0, 0] - (n % 2)) < 1e-12
        assert abs(b[0][0, 0] - ((n + 1) % 2)) < 1e-12


def test_lift_depth2_dim2():
    g = presets.load_preset("fn-S3")
    sig = coreps.block_corep(g, 2)
    f = fock.TruncatedFock(2, 2)
    lifted = fock.lift_rep(f, sig)
    assert f.total_dim == 7
    c = lifted.corep()
    assert c.space_dim == 7
    assert c.validate() < 1e-9


def test_lift_incompatible_rejected():
    g = presets.load_preset("dual-Z(4)")
    chi1 = coreps.block_corep(g, 1)
    f = fock.TruncatedFock(1, 3)  # J = plain conjugation
    with pytest.raises(CompatibilityFailed):
        fock.lift_rep(f, chi1)


# -- induced action -----------------------------------------------------------------

def test_induced_action_trivial():
    g = presets.load_preset("dual-Z(2)")
    t = coreps.trivial_corep(g)
    f = fock.TruncatedFock(1, 4)
    act = fock.induced_action(fock.lift_rep(f, t))
    s = f.s_operator(np.array([1.0]))
    ax = act.alpha_of(s)
    target = np.einsum("i,ab->iab", g.unit, s)
    assert np.linalg.norm(ax - target) < 1e-12


def test_induced_action_identities_sign():
    g = presets.load_preset("dual-Z(2)")
    sign = coreps.block_corep(g, 1)
    f = fock.TruncatedFock(1, 6)
    act = fock.induced_action(fock.lift_rep(f, sign))
    omegas = list(np.eye(2))
    assert act.generator_intertwining_residual(np.array([1.0]), omegas) < 1e-12
    s = f.s_operator(np.array([1.0]))
    assert act.vacuum_invariance_residual([[s], [s, s], [s, s, s]]) < 1e-10
    assert act.multiplicativity_residual([s]) < 1e-10


def test_induced_action_identities_s3():
    g = presets.load_preset("fn-S3")
    sig = coreps.block_corep(g, 2)
    f = fock.TruncatedFock(2, 4)
    act = fock.induced_action(fock.lift_rep(f, sig))
    omegas = list(np.eye(6))
    rng = CounterRNG(3)
    for _ in range(2):
        z = rng.complex_vector(2)
        assert act.generator_intertwining_residual(z, omegas) < 1e-9
    z = np.array([1.0, 0.0])
    s = f.s_operator(z)
    assert act.vacuum_invariance_residual([[s], [s, s]]) < 1e-8
    assert act.multiplicativity_residual([s]) < 1e-9


def test_depth_budget_guard():
    g = presets.load_preset("dual-Z(2)")
    sign = coreps.block_corep(g, 1)
    f = fock.TruncatedFock(1, 4)
    act = fock.induced_action(fock.lift_rep(f, sign))
    s = f.s_operator(np.array([1.0]))
    with pytest.raises(DepthExceeded):
        act.vacuum_invariance_residual([[s, s, s]])


# -- asymptotic invariance -----------------------------------------------------------

def test_invariant_vector_zero_defect():
    n = 4
    g = presets.load_preset(f"dual-Z({n})")
    u = coreps.direct_sum(*[coreps.block_corep(g, k) for k in range(n)])
    jm = np.zeros((n, n))
    for k in range(n):
        jm[(-k) % n, k] = 1.0
    f = fock.TruncatedFock(n, 2, j_conj=jm)
    om = np.exp(2j * np.pi * np.arange(n) / n)
    zeta = np.zeros(n)
    zeta[0] = 1.0  # supported on the trivial character: invariant
    rows = fock.asymptotic_invariance_experiment(f, u, [zeta], om)
    assert rows[0]["corep_defect"] == 0.0
    assert rows[0]["action_defect"] < 1e-12


@pytest.mark.parametrize("n,k", [(8, 1), (8, 2), (32, 1)])
def test_defect_formula(n, k):
    g = presets.load_preset(f"dual-Z({n})")
    u = coreps.direct_sum(*[coreps.block_corep(g, j) for j in range(n)])
    jm = np.zeros((n, n))
    for j in range(n):
        jm[(-j) % n, j] = 1.0
    f = fock.TruncatedFock(n, 2, j_conj=jm)
    om = np.exp(2j * np.pi * np.arange(n) / n)
    z = np.zeros(n)
    z[k] = 1 / np.sqrt(2)
    z[(-k) % n] = 1 / np.sqrt(2)
    rows = fock.asymptotic_invariance_experiment(f, u, [z], om)
    r = rows[0]
    assert abs(r["trace"]) < 1e-10
    assert abs(r["gns_norm"] - 1.0) < 1e-10
    expected = 2 * np.sin(np.pi * k / n)
    assert abs(r["corep_defect"] - expected) < 1e-9
    assert abs(r["action_defect"] - r["corep_defect"]) < 1e-9


def test_experiment_needs_tracial():
    g = presets.load_preset("dual-Z(2)")
    u = coreps.direct_sum(coreps.block_corep(g, 0), coreps.block_corep(g, 1))
    jm = np.array([[0.0, 1.0], [1.0, 0.0]])
    f = fock.TruncatedFock(2, 2, j_conj=jm, q_mat=np.diag([2.0, 0.5]))
    with pytest.raises(NotTracial):
        fock.asymptotic_invariance_experiment(f, u, [np.eye(2)[0]], np.ones(2))


# -- traciality -------------------------------------------------------------------

def test_trace_check_single_generator(f28):
    s = f28.s_operator(np.array([1.0, 0.0]))
    assert fock.trace_check(f28, [[s], [s, s]]) < 1e-12


def test_trace_check_two_generators(f28):
    s1 = f28.s_operator(np.array([1.0, 0.0]))
    s2 = f28.s_operator(np.array([0.0, 1.0]))
    words = []
    for length in range(1, 5):
        for combo in itertools.product([s1, s2], repeat=length):
            words.append(list(combo))
    assert fock.trace_check(f28, words) < 1e-12


def test_trace_check_rejects_nontracial():
    jswap = np.array([[0.0, 1.0], [1.0, 0.0]])
    f = fock.TruncatedFock(2, 4, j_conj=jswap, q_mat=np.diag([2.0, 0.5]))
    s = f.s_operator(np.array([1.0, 1.0]) / np.sqrt(2))
    with pytest.raises(NotTracial):
        fock.trace_check(f, [[s]])


def test_trace_check_depth_budget(f28):
    s = f28.s_operator(np.array([1.0, 0.0]))
    with pytest.raises(DepthExceeded):
        fock.trace_check(f28, [[s] * 5, [s] * 5])


def test_action_equation_on_generated_algebra():
    g = presets.load_preset("fn-S3")
    sig = coreps.block_corep(g, 2)
    f = fock.TruncatedFock(2, 4)
    act = fock.induced_action(fock.lift_rep(f, sig))
    s = f.s_operator(np.array([1.0, 0.0]))
    assert act.action_equation_residual(s) < 1e-8
    assert act.action_equation_residual(s @ s) < 1e-8
    g2 = presets.load_preset("dual-Z(2)")
    sign = coreps.block_corep(g2, 1)
    f2 = fock.TruncatedFock(1, 4)
    act2 = fock.induced_action(fock.lift_rep(f2, sign))
    s2 = f2.s_operator(np.array([1.0]))
    assert act2.action_equation_residual(s2) < 1e-10
