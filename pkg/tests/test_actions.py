import numpy as np
import pytest

from qgwb import actions, coreps, presets
from qgwb._rng import CounterRNG
from qgwb.cli import delta_action, grading_action
from qgwb.errors import AxiomViolation, NoInvariantState, SchemaError


@pytest.fixture(scope="module")
def grading():
    return grading_action(presets.load_preset("dual-Z(2)"))


def trivial_action(parent, n):
    alpha = np.zeros((parent.d, n, n, n, n), dtype=complex)
    eps_like = np.argmax(np.abs(parent.unit))
    for i_e in range(parent.d):
        for a in range(n):
            for b in range(n):
                alpha[i_e, a, b, a, b] = parent.unit[i_e]
    return actions.Action(parent, [n], alpha, invariant_state=np.eye(n) / n)


def test_action_validation(grading):
    assert grading.validate() < 1e-9


def test_action_equation_failure_detected():
    g = presets.load_preset("dual-Z(2)")
    alpha = np.zeros((2, 2, 2, 2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            # wrong degree assignment: constant grading breaks the coproduct
            alpha[1, a, b, a, b] = 1.0
    with pytest.raises((AxiomViolation, NoInvariantState)):
        actions.Action(g, [2], alpha, invariant_state=np.eye(2) / 2)


def test_trivial_action_implementation():
    g = presets.load_preset("dual-Z(2)")
    act = trivial_action(g, 2)
    impl = act.implement()
    assert impl.implementation_residual < 1e-9
    # U = 1: every vector invariant
    assert impl.corep.invariant_rank() == 4
    fixed, expectation = actions.fixed_point_expectation(act)
    assert len(fixed) == 4
    x = CounterRNG(1).complex_matrix(2, 2)
    assert np.linalg.norm(expectation(x) - x) < 1e-12


def test_grading_action_unitary_implementation(grading):
    impl = grading.implement()
    assert impl.implementation_residual < 1e-9
    assert impl.condition_r
    u = impl.corep
    assert u.space_dim == 4
    # U = 1 + 1 + sign + sign on L^2(M_2)
    assert u.invariant_rank() == 2


def test_grading_expectation_is_diagonal_compression(grading):
    fixed, expectation = actions.fixed_point_expectation(grading)
    assert len(fixed) == 2
    x = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=complex)
    assert np.linalg.norm(expectation(x) - np.diag([1.0, 4.0])) < 1e-10


def test_expectation_compression_identity(grading):
    impl = grading.implement()
    p = impl.corep.invariant_projection()
    _, expectation = actions.fixed_point_expectation(grading)
    for x in grading.basis:
        lhs = impl.pi(expectation(x)) @ p
        rhs = p @ impl.pi(x) @ p
        assert np.linalg.norm(lhs - rhs) < 1e-9


def test_expectation_uniqueness_perturbation(grading):
    impl = grading.implement()
    p = impl.corep.invariant_projection()
    _, expectation = actions.fixed_point_expectation(grading)

    def perturbed(x):
        return expectation(x) + 0.01 * np.trace(x) * np.array([[0, 1], [0, 0]])

    bad = 0.0
    for x in grading.basis:
        lhs = impl.pi(perturbed(x)) @ p
        rhs = p @ impl.pi(x) @ p
        bad = max(bad, np.linalg.norm(lhs - rhs))
    assert bad > 1e-4


def test_invariant_state_search(grading):
    g = presets.load_preset("dual-Z(2)")
    act = actions.Action(g, [2], grading.alpha)
    assert np.linalg.norm(act.theta - np.eye(2) / 2) < 1e-9


def test_cone_preservation(grading):
    basis = [np.eye(2)[0], np.eye(2)[1]]
    assert actions.cone_preservation_check(grading, basis)


def test_cone_violated_by_scrambled_unitary(grading):
    impl = grading.implement()
    g = grading.parent
    # V' = (1 (x) W) U with W in the commutant: still satisfies the
    # implementation identity but is not the canonical unitary
    w_right = np.zeros((grading.dimN, grading.dimN), dtype=complex)
    for q, x in enumerate(grading.basis):
        # right multiplication by diag(1, i): J d^* J with d = diag(1, i)
        dmat = np.diag([1.0, 1j])
        w_right[:, q] = grading.vec(x @ dmat)
    w_l2 = impl.c_mat @ w_right @ impl.c_inv
    scrambled = np.einsum("iab,bc->iac", impl.corep.u_coef(), w_l2)
    class Fake:
        def u_coef(self):
            return scrambled
    # build the entrywise matrices directly and run the cone test
    xis = [np.eye(g.d)[0], np.eye(g.d)[1]]
    regs = [g.reg(np.eye(g.d)[k]) for k in range(g.d)]
    u = [[sum((xis[j].conj() @ regs[k] @ xis[i]) * scrambled[k]
              for k in range(g.d)) for j in range(2)] for i in range(2)]
    from qgwb.linalg import psd_sqrt
    rho_half_inv = np.linalg.inv(psd_sqrt(grading.theta))
    rng = CounterRNG(77)
    violated = False
    n = grading.n
    for _ in range(12):
        v = rng.complex_vector(2 * grading.dimN)
        blocks = [grading.unvec(v[i * grading.dimN:(i + 1) * grading.dimN])
                  for i in range(2)]
        x_big = np.zeros((2 * n, 2 * n), dtype=complex)
        for i in range(2):
            for j in range(2):
                x_big[i * n:(i + 1) * n, j * n:(j + 1) * n] = \
                    blocks[i] @ blocks[j].conj().T
        z = x_big @ np.kron(np.eye(2), rho_half_inv)
        z_out = np.zeros_like(z)
        for i in range(2):
            for j in range(2):
                zij = z[i * n:(i + 1) * n, j * n:(j + 1) * n]
                wv = impl.unlambda(u[i][j] @ impl.lambda_vec(zij))
                z_out[i * n:(i + 1) * n, j * n:(j + 1) * n] = wv
        if not actions.cone_member_test(np.kron(np.eye(2), grading.theta), z_out):
            violated = True
            break
    assert violated


def test_spectral_gap_report(grading):
    rep = actions.spectral_gap_report(grading)
    assert rep["rank_invariant"] == 2
    assert rep["projection_in_image"]
    assert rep["kazhdan_gap"] > 0
    assert rep["consistent"]


def test_delta_action_dual_z():
    g = presets.load_preset("fn-Z(4)")
    act = delta_action(g)
    impl = act.implement()
    assert impl.corep.invariant_rank() == 1
    fixed, expectation = actions.fixed_point_expectation(act)
    assert len(fixed) == 1
    x = np.diag([1.0, 2.0, 3.0, 4.0]).astype(complex)
    ex = expectation(x)
    assert np.linalg.norm(ex - np.trace(x) / 4 * np.eye(4)) < 1e-9


def test_delta_action_fn_s3():
    g = presets.load_preset("fn-S3")
    act = delta_action(g)
    impl = act.implement()
    assert impl.corep.invariant_rank() == 1
    rep = actions.spectral_gap_report(act)
    assert rep["rank_invariant"] == 1 and rep["consistent"]


def test_delta_action_needs_pointwise_parent():
    g = presets.load_preset("dual-Z(3)")
    with pytest.raises(SchemaError):
        delta_action(g)


def test_spectral_gap_dual_z_closed_form():
    g = presets.load_preset("fn-Z(8)")
    act = delta_action(g)
    rep = actions.spectral_gap_report(act)
    assert rep["rank_invariant"] == 1


@pytest.mark.parametrize("name,block", [("fn-S3", 2), ("dual-Z(2)", 1),
                                        ("kac-paljutkin", 4)])
def test_v_vbar_implementation(name, block):
    g = presets.load_preset(name)
    u = coreps.block_corep(g, block)
    ok, resid = actions.v_vbar_implementation_check(u)
    assert ok and resid < 1e-8


def test_v_vbar_one_dimensional_trivial():
    g = presets.load_preset("dual-Z(2)")
    ok, resid = actions.v_vbar_implementation_check(coreps.trivial_corep(g))
    assert ok


def test_asymptotic_invariance_bridge(grading):
    # family with defect delta: the corep defect of Lambda(x) is bounded by
    # a theta-computable constant times the action defect
    impl = grading.implement()
    g = grading.parent
    u = impl.corep
    dual = g.dual()
    rng = CounterRNG(13)
    c_const = np.sqrt(np.linalg.eigvalsh(grading.theta)[-1].real) * 2
    for _ in range(4):
        x = rng.complex_matrix(2, 2)
        delta = 0.0
        for i in range(g.d):
            for omega_idx in range(g.d):
                om = np.eye(g.d)[omega_idx]
                avg = sum(om[k] * grading.leg(k, x) for k in range(g.d))
                delta = max(delta, np.linalg.norm(avg - g.unit[omega_idx] * x))
        vec = impl.lambda_vec(x)
        vec = vec / np.linalg.norm(vec)
        defect = u.defect(vec, coreps.dual_matrix_units(g))
        # fixed-point elements have defect 0
        if delta < 1e-12:
            assert defect < 1e-9
    # exact bridge on a fixed point
    fixed, _ = actions.fixed_point_expectation(grading)
    vec = impl.lambda_vec(fixed[0])
    vec = vec / np.linalg.norm(vec)
    assert u.defect(vec, coreps.dual_matrix_units(g)) < 1e-9


def test_conjugation_action_from_corep():
    g = presets.load_preset("kac-paljutkin")
    act = actions.action_from_corep(coreps.block_corep(g, 4))
    impl = act.implement()
    assert impl.implementation_residual < 1e-9
    rep = actions.spectral_gap_report(act)
    assert rep["consistent"]


def test_invariant_rank_equals_fixed_dimension():
    suite = [grading_action(presets.load_preset("dual-Z(2)")),
             delta_action(presets.load_preset("fn-Z(4)")),
             delta_action(presets.load_preset("fn-S3")),
             actions.action_from_corep(
                 coreps.block_corep(presets.load_preset("kac-paljutkin"), 4))]
    for act in suite:
        impl = act.implement()
        fixed, _ = actions.fixed_point_expectation(act)
        assert impl.corep.invariant_rank() == len(fixed)


def test_quantitative_asymptotic_bridge(grading):
    # perturb a fixed point: the GNS vector's corep defect is bounded by
    # sqrt(max eig of theta) times the operator-norm action defect
    impl = grading.implement()
    g = grading.parent
    u = impl.corep
    fixed, _ = actions.fixed_point_expectation(grading)
    y = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # degree-1 part
    c_const = np.sqrt(np.linalg.eigvalsh(grading.theta)[-1].real)
    for delta in (0.5, 0.1, 0.01):
        x = fixed[0] + delta * y
        action_defect = 0.0
        for i in range(g.d):
            avg = grading.leg(i, x)
            action_defect = max(action_defect,
                                np.linalg.norm(avg - g.unit[i] * x, 2))
        vec = impl.lambda_vec(x)
        scale = np.linalg.norm(vec)
        defect = u.defect(vec / scale, coreps.dual_matrix_units(g))
        assert defect * scale <= 2 * g.d * c_const * action_defect + 1e-12
