import numpy as np
import pytest

from qgwb import functionals as F
from qgwb import presets
from qgwb._rng import CounterRNG
from qgwb.errors import NotAState, ParentMismatch, WindowTruncation
from qgwb.windows import build_window


def rand_functional(parent, seed):
    rng = CounterRNG(seed)
    return F.Functional(parent, rng.complex_vector(parent.d))


def rand_state(parent, seed):
    rng = CounterRNG(seed)
    return F.vector_state(parent, rng.unit_vector(parent.d))


@pytest.mark.parametrize("name", ["dual-Z(4)", "fn-S3", "grp-S3", "kac-paljutkin"])
def test_counit_is_convolution_unit(name):
    g = presets.load_preset(name)
    eps = F.counit_functional(g)
    mu = rand_functional(g, 11)
    left = F.convolve(eps, mu)
    right = F.convolve(mu, eps)
    assert np.max(np.abs(left.coeffs - mu.coeffs)) < 1e-10
    assert np.max(np.abs(right.coeffs - mu.coeffs)) < 1e-10


@pytest.mark.parametrize("name", ["dual-Z(3)", "fn-S3", "kac-paljutkin"])
def test_convolution_associative(name):
    g = presets.load_preset(name)
    mu, nu, rho = (rand_functional(g, s) for s in (1, 2, 3))
    left = F.convolve(F.convolve(mu, nu), rho)
    right = F.convolve(mu, F.convolve(nu, rho))
    assert np.max(np.abs(left.coeffs - right.coeffs)) < 1e-10


def test_convolution_blockwise_route():
    g = presets.load_preset("kac-paljutkin")
    mu, nu = rand_functional(g, 4), rand_functional(g, 5)
    a = F.convolve(mu, nu)
    b = F.convolve_blockwise(mu, nu)
    assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-10


def test_character_convolution_on_dual_z3():
    g = presets.load_preset("dual-Z(3)")
    omega = np.exp(2j * np.pi / 3)
    # evaluation at the group element g: the character triple (1, w, w-bar)
    mu = F.Functional(g, np.array([1.0, omega, np.conj(omega)]))
    sq = F.convolve(mu, mu)
    expected = np.array([1.0, omega ** 2, np.conj(omega) ** 2])
    assert np.max(np.abs(sq.coeffs - expected)) < 1e-12


def test_window_convolution_pointwise():
    w = build_window("free(2)", 3)
    rng = CounterRNG(7)
    f = F.Functional(w, rng.complex_vector(w.size))
    g = F.Functional(w, rng.complex_vector(w.size))
    conv = F.convolve(f, g)
    assert np.max(np.abs(conv.coeffs - f.coeffs * g.coeffs)) < 1e-14


def test_parent_mismatch():
    g1, g2 = presets.load_preset("dual-Z(2)"), presets.load_preset("dual-Z(3)")
    with pytest.raises(ParentMismatch):
        F.convolve(rand_functional(g1, 1), rand_functional(g2, 1))


# -- positivity ---------------------------------------------------------------

def test_haar_state_positive():
    for name in ("dual-Z(4)", "fn-S3", "kac-paljutkin"):
        g = presets.load_preset(name)
        assert F.is_positive(F.haar_functional(g))


def test_window_bochner_exponential():
    w = build_window("Z(1)", 6)
    f = F.Functional(w, np.array([np.exp(-abs(g[0])) for g in w.elements]))
    gram = F.positivity_matrix(f)
    assert gram.shape == (7, 7)
    assert np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[0] >= -1e-9
    assert F.is_positive(f)


def test_window_bochner_negative_example():
    w = build_window("Z(1)", 6)
    f = F.Functional(w, np.array([1.0 - abs(g[0]) for g in w.elements]))
    gram = F.positivity_matrix(f)
    assert np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[0] < -1e-9
    assert not F.is_positive(f)


def test_positivity_closure():
    g = presets.load_preset("kac-paljutkin")
    mu, nu = rand_state(g, 21), rand_state(g, 22)
    assert F.is_positive(F.convolve(mu, nu))
    assert F.is_positive(F.adjoint(mu))
    assert F.is_positive(0.25 * mu + 0.75 * nu)


def test_window_truncation_error():
    # custom window whose only length-1 products are undefined
    table = {
        "label": "truncated",
        "elements": ["e", "a", "A"],
        "lengths": [0, 1, 1],
        "inverse": ["e", "A", "a"],
        "product": [["e", "e", "e"], ["e", "a", "a"], ["a", "e", "a"],
                    ["e", "A", "A"], ["A", "e", "A"], ["a", "A", "e"],
                    ["A", "a", "e"]],
    }
    w = build_window(("custom", table), 1)
    f = F.Functional(w, np.ones(3))
    with pytest.raises(WindowTruncation):
        F.positivity_matrix(f)


# -- positive-definite elements ---------------------------------------------

def test_pd_element_of_counit_is_unit():
    g = presets.load_preset("kac-paljutkin")
    a = F.pd_element(F.counit_functional(g))
    for b, n in zip(a.blocks, g.block_dims):
        assert np.allclose(b, np.eye(n))
    assert a.gauge_norm() < 1e-12


def test_pd_element_dual_z_fourier_coefficients():
    g = presets.load_preset("dual-Z(4)")
    mu = rand_state(g, 30)
    a = F.pd_element(mu)
    # Fourier coefficients of a state are bounded by 1
    for b in a.blocks:
        assert abs(b[0, 0]) <= 1 + 1e-12
    assert abs(a.blocks[0][0, 0] - 1.0) < 1e-12  # normalisation at the unit


def test_pd_element_rejects_non_state():
    g = presets.load_preset("dual-Z(4)")
    with pytest.raises(NotAState):
        F.pd_element(rand_functional(g, 31))


def test_pd_element_intertwines_convolution():
    g = presets.load_preset("kac-paljutkin")
    mu, nu = rand_state(g, 32), rand_state(g, 33)
    a = F.pd_element(F.convolve(mu, nu))
    b1, b2 = F.pd_element(mu), F.pd_element(nu)
    prods = [x @ y for x, y in zip(b1.blocks, b2.blocks)]
    resid = max(np.linalg.norm(x - y) for x, y in zip(a.blocks, prods))
    assert resid < 1e-10


def test_central_pd_element_on_kac_paljutkin():
    g = presets.load_preset("kac-paljutkin")
    # convex combination of haar and counit is central on every block
    mu = 0.5 * F.haar_functional(g) + 0.5 * F.counit_functional(g)
    a = F.pd_element(mu)
    assert a.central
    for b in a.blocks:
        assert abs(b[0, 0]) <= 1 + 1e-12


def test_re_transform():
    g = presets.load_preset("dual-Z(4)")
    # a state whose element has non-real entries: point evaluation mix
    omega = np.exp(2j * np.pi / 4)
    chi = F.Functional(g, omega ** np.arange(4))
    mu = 0.5 * F.counit_functional(g) + 0.5 * chi
    a = F.pd_element(mu)
    r = F.re_transform(a)
    for b in r.blocks:
        assert abs(b[0, 0].imag) < 1e-12
    assert F.is_state(r.functional())
    # selfadjoint elements are fixed exactly
    h = F.pd_element(F.haar_functional(g))
    r2 = F.re_transform(h)
    assert max(np.linalg.norm(x - y) for x, y in zip(h.blocks, r2.blocks)) == 0.0


def test_exp_transform():
    g = presets.load_preset("dual-Z(2)")
    a = F.pd_element(F.counit_functional(g))
    e = F.exp_transform(a)
    assert a.gauge_norm() < 1e-12 and e.gauge_norm() < 1e-12
    # a = (1, -1): exp(a - 1) = (1, e^-2)
    chi = F.Functional(g, np.array([1.0, -1.0]))
    e2 = F.exp_transform(F.re_transform(F.pd_element(chi)))
    assert abs(e2.blocks[1][0, 0] - np.exp(-2.0)) < 1e-10
    # outputs are PSD blockwise
    for b in e2.blocks:
        assert b[0, 0].real >= -1e-12


# -- convolution semigroups ----------------------------------------------------

def test_semigroup_of_zero_generator():
    g = presets.load_preset("kac-paljutkin")
    zero = F.Functional(g, np.zeros(g.d))
    states = F.conv_exp_semigroup(zero, [0.0, 0.5, 2.0])
    eps = F.counit_functional(g)
    for s in states:
        assert np.max(np.abs(s.coeffs - eps.coeffs)) < 1e-12


def test_semigroup_on_window_word_length():
    w = build_window("Z(1)", 6)
    wl = F.Functional(w, np.array([float(w.length(g)) for g in w.elements]))
    states = F.conv_exp_semigroup(wl, [0.1, 1.0, 10.0])
    mu1 = states[1]
    two = w.index[(2,)]
    assert abs(mu1.coeffs[two] - np.exp(-2.0)) < 1e-12
    assert abs(np.exp(-2.0) - 0.135335) < 1e-6


def test_semigroup_central_on_kac_paljutkin():
    g = presets.load_preset("kac-paljutkin")
    cvals = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    blocks = [cvals[a] * np.eye(n) for a, n in enumerate(g.block_dims)]
    lf = F.from_blocks(g, blocks)
    for t in (0.1, 1.0):
        mu_t = F.semigroup_state(lf, t)
        series = F.exp_star(-t * lf)
        assert np.max(np.abs(mu_t.coeffs - series.coeffs)) < 1e-10
        for a, b in enumerate(mu_t.blocks()):
            n = g.block_dims[a]
            assert np.linalg.norm(b - np.exp(-t * cvals[a]) * np.eye(n)) < 1e-10


@pytest.mark.parametrize("name", ["dual-Z(4)", "fn-S3", "kac-paljutkin"])
def test_semigroup_state_property_on_grid(name):
    g = presets.load_preset(name)
    mu = rand_state(g, 40)
    lf = 2.0 * (F.counit_functional(g) - mu)
    states = F.conv_exp_semigroup(lf, [0.0, 0.1, 1.0, 10.0])
    for s in states:
        assert F.is_state(s)


def test_gauge_functions():
    g = presets.load_preset("kac-paljutkin")
    mu = rand_state(g, 50)
    a = F.pd_element(mu)
    full = list(range(len(g.block_dims)))
    assert a.gauge_strict(full) <= a.gauge_norm() + 1e-15
    assert a.gauge_strict([0]) <= a.gauge_strict(full) + 1e-15


def test_gauge_window_family_strict_vs_norm():
    # growing windows: strict gauge on a fixed set vanishes while the norm
    # gauge stays bounded below
    for k in (1, 2, 3, 4):
        w = build_window("Z(1)", max(4, k * k))
        vals = np.array([np.exp(-abs(g[0]) / k) for g in w.elements])
        a = F.PDElement(w, vals)
        fixed = [w.index[(m,)] for m in (-1, 0, 1)]
        strict = a.gauge_strict(fixed)
        norm = a.gauge_norm()
        assert strict <= norm + 1e-15
        if k >= 3:
            assert strict < 0.3
            assert norm > 0.5


def test_serialization_roundtrip():
    g = presets.load_preset("dual-Z(3)")
    mu = rand_state(g, 60)
    doc = mu.to_dict()
    assert doc["parent_id"] == "dual-Z(3)"
    back = F.Functional(g, [complex(r, i) for r, i in doc["coeffs"]])
    assert np.max(np.abs(back.coeffs - mu.coeffs)) == 0.0


def test_sharp_involution():
    # on a group algebra the sharp involution reads values at inverses
    g = presets.load_preset("dual-Z(4)")
    rng = CounterRNG(71)
    mu = F.Functional(g, rng.complex_vector(4))
    sh = F.sharp(mu)
    for j in range(4):
        assert abs(sh.coeffs[j] - np.conj(mu.coeffs[(-j) % 4])) < 1e-12
    # involutive
    back = F.sharp(sh)
    assert np.max(np.abs(back.coeffs - mu.coeffs)) < 1e-12


def test_conv_exp_semigroup_full_grid_presets_and_window():
    for name in ("dual-Z(4)", "kac-paljutkin"):
        g = presets.load_preset(name)
        mu = F.vector_state(g, CounterRNG(5).unit_vector(g.d))
        lf = 1.5 * (F.counit_functional(g) - mu)
        states = F.conv_exp_semigroup(lf, [0.0, 0.1, 1.0, 10.0])
        assert all(F.is_state(s) for s in states)
    w = build_window("Z(1)", 6)
    wl = F.Functional(w, np.array([float(w.length(x)) for x in w.elements]))
    states = F.conv_exp_semigroup(wl, [0.0, 0.1, 1.0, 10.0])
    assert all(F.is_state(s) for s in states)
