"""Built-in quantum groups and windows.

The finite quantum group presets span the commutative (function algebras),
cocommutative (group algebras) and genuinely quantum (the 8-dimensional
Kac-Paljutkin algebra) Kac cases.  Windows cover free groups and free
abelian / cyclic groups.  Every preset is validated on construction.
"""

from __future__ import annotations

import functools

import numpy as np

from .core import FiniteQG, Irrep
from .errors import SchemaError
from .windows import build_window

# ---------------------------------------------------------------------------
# duals of cyclic groups: the group algebra C[Z_n]
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def dual_z(n: int) -> FiniteQG:
    """C[Z_n] with grouplike basis; irreps are the n grouplikes."""
    if not 2 <= n <= 64:
        raise SchemaError("dual-Z(n) shipped for 2 <= n <= 64")
    d = n
    mult = np.zeros((d, d, d))
    comult = np.zeros((d, d, d))
    star = np.zeros((d, d))
    antipode = np.zeros((d, d))
    for i in range(n):
        for j in range(n):
            mult[i, j, (i + j) % n] = 1.0
        comult[i, i, i] = 1.0
        star[(-i) % n, i] = 1.0
        antipode[(-i) % n, i] = 1.0
    unit = np.zeros(d)
    unit[0] = 1.0
    counit = np.ones(d)
    haar = np.zeros(d)
    haar[0] = 1.0
    irreps = []
    for k in range(n):
        coeff = np.zeros((1, 1, d))
        coeff[0, 0, k] = 1.0
        irreps.append(Irrep(1, coeff))
    names = [f"g{i}" for i in range(n)]
    return FiniteQG(f"dual-Z({n})", mult, unit, comult, counit, star,
                    antipode, irreps, haar=haar, basis_names=names)


# ---------------------------------------------------------------------------
# function algebras of cyclic groups: C(Z_n)
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def fn_z(n: int) -> FiniteQG:
    """C(Z_n) with delta-function basis; irreps are the n characters."""
    if not 2 <= n <= 64:
        raise SchemaError("fn-Z(n) shipped for 2 <= n <= 64")
    d = n
    mult = np.zeros((d, d, d))
    comult = np.zeros((d, d, d))
    star = np.eye(d)
    antipode = np.zeros((d, d))
    for i in range(n):
        mult[i, i, i] = 1.0
        antipode[(-i) % n, i] = 1.0
        for j in range(n):
            comult[(i + j) % n, i, j] = 1.0
    unit = np.ones(d)
    counit = np.zeros(d)
    counit[0] = 1.0
    haar = np.full(d, 1.0 / n)
    omega = np.exp(2j * np.pi / n)
    irreps = []
    for k in range(n):
        coeff = np.zeros((1, 1, d), dtype=complex)
        coeff[0, 0, :] = omega ** (k * np.arange(n))
        irreps.append(Irrep(1, coeff))
    names = [f"d{i}" for i in range(n)]
    return FiniteQG(f"fn-Z({n})", mult, unit, comult, counit, star,
                    antipode, irreps, haar=haar, basis_names=names)


# ---------------------------------------------------------------------------
# S_3: function algebra and group algebra
# ---------------------------------------------------------------------------

_S3 = [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]
# element g as a map i -> g[i]; composition (g h)[i] = g[h[i]]


def _s3_mul(g, h):
    return tuple(g[h[i]] for i in range(3))


def _s3_inv(g):
    out = [0, 0, 0]
    for i in range(3):
        out[g[i]] = i
    return tuple(out)


def _s3_sign(g):
    seen, sgn = set(), 1
    for i in range(3):
        if i in seen:
            continue
        j, ln = g[i], 1
        seen.add(i)
        while j != i:
            seen.add(j)
            j = g[j]
            ln += 1
        sgn *= (-1) ** (ln - 1)
    return sgn


def _s3_std_rep():
    """Real orthogonal 2-dim irrep from the permutation action on sum-zero vectors."""
    q = np.array([[1 / np.sqrt(2), 1 / np.sqrt(6)],
                  [-1 / np.sqrt(2), 1 / np.sqrt(6)],
                  [0.0, -2 / np.sqrt(6)]])
    mats = []
    for g in _S3:
        p = np.zeros((3, 3))
        for i in range(3):
            p[g[i], i] = 1.0
        mats.append(q.T @ p @ q)
    return mats


@functools.lru_cache(maxsize=None)
def fn_s3() -> FiniteQG:
    """C(S_3); irreps: trivial, sign, and the 2-dim standard representation."""
    d = 6
    idx = {g: i for i, g in enumerate(_S3)}
    mult = np.zeros((d, d, d))
    comult = np.zeros((d, d, d))
    antipode = np.zeros((d, d))
    for i, g in enumerate(_S3):
        mult[i, i, i] = 1.0
        antipode[idx[_s3_inv(g)], i] = 1.0
        for j, h in enumerate(_S3):
            comult[idx[_s3_mul(g, h)], i, j] = 1.0
    unit = np.ones(d)
    counit = np.zeros(d)
    counit[0] = 1.0
    haar = np.full(d, 1.0 / 6.0)
    triv = np.zeros((1, 1, d))
    triv[0, 0, :] = 1.0
    sign = np.zeros((1, 1, d))
    sign[0, 0, :] = [_s3_sign(g) for g in _S3]
    std = np.zeros((2, 2, d))
    for i, rho in enumerate(_s3_std_rep()):
        std[:, :, i] = rho
    irreps = [Irrep(1, triv), Irrep(1, sign), Irrep(2, std)]
    names = ["".join(map(str, g)) for g in _S3]
    return FiniteQG("fn-S3", mult, unit, comult, counit, np.eye(d), antipode,
                    irreps, haar=haar, basis_names=names)


@functools.lru_cache(maxsize=None)
def grp_s3() -> FiniteQG:
    """C[S_3]; the six grouplikes are the irreducible corepresentations."""
    d = 6
    idx = {g: i for i, g in enumerate(_S3)}
    mult = np.zeros((d, d, d))
    comult = np.zeros((d, d, d))
    star = np.zeros((d, d))
    antipode = np.zeros((d, d))
    for i, g in enumerate(_S3):
        comult[i, i, i] = 1.0
        star[idx[_s3_inv(g)], i] = 1.0
        antipode[idx[_s3_inv(g)], i] = 1.0
        for j, h in enumerate(_S3):
            mult[i, j, idx[_s3_mul(g, h)]] = 1.0
    unit = np.zeros(d)
    unit[0] = 1.0
    counit = np.ones(d)
    haar = np.zeros(d)
    haar[0] = 1.0
    irreps = []
    for k in range(d):
        coeff = np.zeros((1, 1, d))
        coeff[0, 0, k] = 1.0
        irreps.append(Irrep(1, coeff))
    names = ["l" + "".join(map(str, g)) for g in _S3]
    return FiniteQG("grp-S3", mult, unit, comult, counit, star, antipode,
                    irreps, haar=haar, basis_names=names)


# ---------------------------------------------------------------------------
# the 8-dimensional Kac-Paljutkin quantum group
# ---------------------------------------------------------------------------

def _kp_gmul(g1, g2):
    # Z_2 x Z_2 coded as two bits
    return g1 ^ g2


def _kp_sigma(g):
    # the x <-> y swap
    return ((g & 1) << 1) | (g >> 1)


@functools.lru_cache(maxsize=None)
def kac_paljutkin() -> FiniteQG:
    """The 8-dimensional quantum group that is neither commutative nor
    cocommutative.

    Presentation: generators x, y, z with x^2 = y^2 = 1, xy = yx,
    zx = yz, zy = xz, z^2 = (1 + x + y - xy)/2, x and y grouplike and

        Delta(z) = ((1 (x) 1 + 1 (x) x + y (x) 1 - y (x) x) / 2)(z (x) z).

    Basis 1, x, y, xy, z, xz, yz, xyz (index g + 4k).  Irrep dimensions
    {1, 1, 1, 1, 2}; the 2-dim corepresentation is

        u = 1/2 [[ z + xz,  yz - xyz ],
                 [ z - xz,  yz + xyz ]].
    """
    d = 8
    tvec = np.array([0.5, 0.5, 0.5, -0.5])  # z^2 = (1 + x + y - xy)/2

    mult = np.zeros((d, d, d))
    for g1 in range(4):
        for k1 in range(2):
            for g2 in range(4):
                for k2 in range(2):
                    i, j = g1 + 4 * k1, g2 + 4 * k2
                    gg = _kp_gmul(g1, _kp_sigma(g2) if k1 else g2)
                    if k1 + k2 < 2:
                        mult[i, j, gg + 4 * (k1 + k2)] = 1.0
                    else:
                        for g3 in range(4):
                            mult[i, j, _kp_gmul(gg, g3)] += tvec[g3]

    unit = np.zeros(d)
    unit[0] = 1.0
    counit = np.ones(d)

    comult = np.zeros((d, d, d))
    for g in range(4):
        comult[g, g, g] = 1.0
    dz = {(4, 4): 0.5, (4, 5): 0.5, (6, 4): 0.5, (6, 5): -0.5}
    for g in range(4):
        for (p, q), v in dz.items():
            gp, kp = p & 3, p >> 2
            gq, kq = q & 3, q >> 2
            comult[g + 4, _kp_gmul(g, gp) + 4 * kp, _kp_gmul(g, gq) + 4 * kq] += v

    antipode = np.zeros((d, d))
    star = np.zeros((d, d))
    for g in range(4):
        antipode[g, g] = 1.0
        star[g, g] = 1.0
        antipode[_kp_sigma(g) + 4, g + 4] = 1.0
        # (w z)^* = z^{-1} w = (z^2) z w = t sigma(w) z
        for g3 in range(4):
            star[_kp_gmul(g3, _kp_sigma(g)) + 4, g + 4] += tvec[g3]

    haar = np.zeros(d)
    haar[0] = 1.0

    irreps = []
    for g in range(4):
        coeff = np.zeros((1, 1, d))
        coeff[0, 0, g] = 1.0
        irreps.append(Irrep(1, coeff))
    two = np.zeros((2, 2, d))
    two[0, 0, 4] = two[0, 0, 5] = 0.5
    two[0, 1, 6], two[0, 1, 7] = 0.5, -0.5
    two[1, 0, 4], two[1, 0, 5] = 0.5, -0.5
    two[1, 1, 6] = two[1, 1, 7] = 0.5
    irreps.append(Irrep(2, two))

    names = ["1", "x", "y", "xy", "z", "xz", "yz", "xyz"]
    return FiniteQG("kac-paljutkin", mult, unit, comult, counit, star,
                    antipode, irreps, haar=haar, basis_names=names)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_DUAL_Z_LISTED = list(range(2, 9)) + [12, 16, 24, 32, 48, 64]
_FN_Z_LISTED = [2, 3, 4, 6, 8]


def preset_names():
    """Stable sorted list of the shipped preset names."""
    names = [f"dual-Z({n})" for n in _DUAL_Z_LISTED]
    names += [f"fn-Z({n})" for n in _FN_Z_LISTED]
    names += ["fn-S3", "grp-S3", "kac-paljutkin"]
    names += ["free(1)", "free(2)", "free(3)", "Z(1)"]
    return sorted(names)


def is_window_preset(name: str) -> bool:
    return name.startswith("free(") or name.startswith("Z(") or name.startswith("cyclic(")


def load_preset(name: str, radius: int | None = None):
    """Build a preset by name; windows take a radius (default 4)."""
    name = name.strip()
    if name.startswith("dual-Z(") and name.endswith(")"):
        return dual_z(int(name[7:-1]))
    if name.startswith("fn-Z(") and name.endswith(")"):
        return fn_z(int(name[5:-1]))
    if name == "fn-S3":
        return fn_s3()
    if name == "grp-S3":
        return grp_s3()
    if name == "kac-paljutkin":
        return kac_paljutkin()
    if is_window_preset(name):
        return build_window(name, 4 if radius is None else radius)
    raise SchemaError(f"unknown preset {name!r}")


def preset_table():
    """Rows of (name, kind, dim, kac, max block dim) for every listed preset."""
    rows = []
    for name in preset_names():
        if is_window_preset(name):
            rows.append({"name": name, "kind": "window", "dim": None,
                         "kac": True, "max_block_dim": 1})
        else:
            g = load_preset(name)
            rows.append({"name": name, "kind": "qg", "dim": g.d,
                         "kac": g.kac, "max_block_dim": g.max_block_dim})
    return rows
