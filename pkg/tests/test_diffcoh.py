import random
from fractions import Fraction

import numpy as np
import pytest

from cellcoh import cells as cl
from cellcoh import diffcoh as dc
from cellcoh.linalg import is_zero, mv, zeros


def octa():
    return cl.bundled_complex("octahedron")


def test_dhat_of_zero_and_a_image():
    K = octa()
    z = dc.DifferentialCochain.zero(K, 2, 2)
    assert z.dhat().is_zero()
    rng = random.Random(0)
    for _ in range(20):
        alpha = dc.random_rational_vector(rng, K.n_cells(1))
        assert dc.forms_a(K, 2, alpha).dhat().is_zero()


def test_dhat_squared_zero_randomized():
    K = octa()
    rng = random.Random(1)
    for _ in range(30):
        deg = rng.choice([1, 2])
        x = dc.DifferentialCochain(
            K, 2, deg,
            dc.random_int_vector(rng, K.n_cells(deg)),
            dc.random_rational_vector(rng, K.n_cells(deg - 1)),
            dc.random_rational_vector(rng, K.n_cells(deg)) if deg >= 2
            else zeros(K.n_cells(deg), 1).reshape(-1))
        assert x.dhat().dhat().is_zero()


def test_omega_truncation_enforced():
    K = octa()
    with pytest.raises(ValueError, match="omega"):
        dc.DifferentialCochain(
            K, 2, 1,
            zeros(K.n_cells(1), 1).reshape(-1),
            zeros(K.n_cells(0), 1).reshape(-1),
            np.array([Fraction(1)] * K.n_cells(1), dtype=object))


def test_fundamental_cocycle_class_on_sphere():
    from cellcoh.lattice import fundamental_cycle
    K = octa()
    fund = fundamental_cycle(K)
    first = next(i for i, v in enumerate(fund) if v == 1)
    c = np.array([1 if i == first else 0 for i in range(len(fund))],
                 dtype=object)
    x = dc.DifferentialCochain(K, 2, 2, c, zeros(K.n_cells(1), 1).reshape(-1),
                               c * Fraction(1))
    assert x.is_cocycle()
    coords, hd = dc.underlying_I(x)
    assert str(hd.group) == "Z"
    assert not hd.class_is_zero(x.c)
    pairing = sum(Fraction(w) * int(z) for w, z in zip(dc.curvature_R(x), fund))
    assert pairing == 1


def test_a_of_exact_form_is_trivial_class():
    K = octa()
    rng = random.Random(2)
    d0 = K.boundary_matrix(1).T
    for _ in range(10):
        beta = dc.random_rational_vector(rng, K.n_cells(0))
        x = dc.forms_a(K, 2, mv(d0, beta))
        triv, wit = dc.class_is_trivial(x)
        assert triv and wit is not None


def test_R_after_a_is_delta():
    K = octa()
    rng = random.Random(3)
    d1 = K.boundary_matrix(2).T
    for _ in range(50):
        alpha = dc.random_rational_vector(rng, K.n_cells(1))
        assert (dc.curvature_R(dc.forms_a(K, 2, alpha)) == mv(d1, alpha)).all()


def test_curvature_rejects_non_cocycles():
    K = octa()
    x = dc.DifferentialCochain(
        K, 2, 2, zeros(K.n_cells(2), 1).reshape(-1),
        np.array([Fraction(1)] + [Fraction(0)] * (K.n_cells(1) - 1),
                 dtype=object),
        zeros(K.n_cells(2), 1).reshape(-1))
    with pytest.raises(ValueError, match="cocycle"):
        dc.curvature_R(x)


def test_equal_classes_reflexive_and_shift_by_coboundary():
    K = octa()
    rng = random.Random(4)
    for _ in range(10):
        x = dc.random_cocycle(K, 2, rng)
        eq, wit = dc.equal_classes(x, x)
        assert eq and wit.dhat().is_zero()
        y = x + dc.random_coboundary(K, 2, rng)
        eq, wit = dc.equal_classes(x, y)
        assert eq
        assert ((x - y) - wit.dhat()).is_zero()


def test_equal_classes_symmetric_transitive_on_samples():
    K = octa()
    rng = random.Random(5)
    for _ in range(5):
        x = dc.random_cocycle(K, 2, rng)
        y = x + dc.random_coboundary(K, 2, rng)
        z = y + dc.random_coboundary(K, 2, rng)
        assert dc.equal_classes(y, x)[0]
        assert dc.equal_classes(x, z)[0]


def test_truncation_blocks_omega_witness_on_circle():
    # (0, 0, delta alpha) vs 0 at m = 1: the omega part of a degree-0
    # witness is forbidden by the truncation, so the classes agree exactly
    # when delta alpha = 0
    K = cl.bundled_complex("circle3")
    d0 = K.boundary_matrix(1).T
    solvable = np.array([Fraction(1)] * 3, dtype=object)      # constant
    unsolvable = np.array([Fraction(1), Fraction(0), Fraction(0)],
                          dtype=object)
    for alpha, want in ((solvable, True), (unsolvable, False)):
        x = dc.DifferentialCochain(K, 1, 1, zeros(3, 1).reshape(-1),
                                   zeros(3, 1).reshape(-1), mv(d0, alpha))
        got, _ = dc.class_is_trivial(x)
        assert got == want


def test_flat_part_of_a_closed_form():
    K = cl.bundled_complex("circle3")
    rng = random.Random(6)
    qz = dc.qz_cohomology(K, 0)
    theta = Fraction(2, 5)
    h = np.array([theta] * 3, dtype=object)
    x = dc.DifferentialCochain(K, 1, 1, zeros(3, 1).reshape(-1), h,
                               zeros(3, 1).reshape(-1))
    fp = dc.flat_part(x)
    assert fp is not None
    assert qz.classes_equal(fp, -h)
    # the group of flat classes of the circle in degree one is Q/Z
    assert str(qz.group) == "Q/Z"
    # nonflat input has no flat part
    y = dc.random_cocycle(K, 1, rng)
    if not is_zero(y.omega):
        assert dc.flat_part(y) is None


def test_rp2_flat_class_with_nontrivial_underlying_class():
    K = cl.bundled_complex("rp2_6")
    qz = dc.qz_cohomology(K, 1)
    assert str(qz.group) == "Z/2"
    lift, order = qz.torsion_lifts[0]
    assert order == 2
    x = dc.flat_include(K, 2, lift)
    assert x.is_cocycle()
    assert is_zero(dc.curvature_R(x))
    hd = dc.integral_cohomology(K, 2)
    assert str(hd.group) == "Z/2"
    assert not hd.class_is_zero(x.c)          # nontrivial underlying class
    # Bockstein hits the generator: Z/2 -> Z/2 nonzero
    assert not hd.class_is_zero(qz.bockstein(lift))


def test_hexagon_m_out_of_range():
    with pytest.raises(ValueError):
        dc.hexagon(octa(), 0)
    with pytest.raises(ValueError):
        dc.hexagon(octa(), 5)


def test_hexagon_exactness_small_samples():
    for name, m in (("circle3", 1), ("rp2_6", 2)):
        rep = dc.hexagon_exactness(cl.bundled_complex(name), m,
                                   samples=20, seed=0)
        assert rep["passed"], [c for c in rep["checks"] if not c["passed"]]


def test_hexagon_octahedron_m3_degenerate_top():
    rep = dc.hexagon_exactness(octa(), 3, samples=20, seed=0)
    assert rep["passed"]
    assert rep["nodes"]["closed_forms"] == "Q^0"


def test_circle_hexagon_nodes():
    hx = dc.hexagon(cl.bundled_complex("circle3"), 1)
    nodes = hx.node_groups()
    assert nodes["forms_mod_exact"] == "Q^3"
    assert nodes["closed_forms"] == "Q^3"
    assert nodes["H_low_QZ"] == "Q/Z"
    assert nodes["H_high_Z"] == "Z"


def test_homotopy_formula_randomized():
    rng = random.Random(7)
    for name, ms in (("circle3", (1,)), ("octahedron", (1, 2))):
        K = cl.bundled_complex(name)
        P = cl.prism(K)
        for m in ms:
            for _ in range(10):
                x = dc.random_cocycle(P.complex, m, rng)
                r = dc.homotopy_formula_check(P, x)
                assert r["passed"]
                assert r["explicit_witness_exact"]


def test_homotopy_formula_strict_zero_on_projection_pullbacks():
    rng = random.Random(8)
    K = octa()
    P = cl.prism(K)
    for m in (1, 2):
        y = dc.random_cocycle(K, m, rng)
        xp = dc.DifferentialCochain(
            P.complex, m, m,
            dc.pullback_cochain(P.proj, y.c, m),
            dc.pullback_cochain(P.proj, y.h, m - 1),
            dc.pullback_cochain(P.proj, y.omega, m))
        r = dc.homotopy_formula_check(P, xp, expect_strict_zero=True)
        assert r["passed"]


def test_omega_concentrated_on_prism_cells_gives_exact_equality():
    # a cocycle (0, h, omega) whose h lives on the two end copies (with
    # closed values on each) has omega concentrated on prism cells, and the
    # end difference equals a(pi_! omega) exactly at the cochain level
    K = cl.bundled_complex("circle3")
    P = cl.prism(K)
    rng = random.Random(9)
    m = 1
    h0 = dc.random_rational(rng) * np.array([1, 1, 1], dtype=object)
    h1 = dc.random_rational(rng) * np.array([1, 1, 1], dtype=object)
    h = zeros(P.complex.n_cells(0), 1).reshape(-1)
    for s in K.cells(0):
        h[P.complex.index[(("v", 0), s)]] = h0[K.index[s]]
        h[P.complex.index[(("v", 1), s)]] = h1[K.index[s]]
    x = dc.DifferentialCochain(
        P.complex, m, m, zeros(P.complex.n_cells(1), 1).reshape(-1), h,
        mv(P.complex.boundary_matrix(1).T, h))
    assert x.is_cocycle()
    for cell in P.complex.cells(1):
        if cell[0][0] != "e":
            assert x.omega[P.complex.index[cell]] == 0   # prism-concentrated
    diff = dc.end_pullback(P, "end1", x) - dc.end_pullback(P, "end0", x)
    fib = cl.fiber_integrate_prism(P, cl.Cochain(P.complex, 1, "Q", x.omega))
    assert (diff - dc.forms_a(K, m, fib.values)).is_zero()


def test_s1_integrate_requires_truncation_and_reduction():
    K = cl.bundled_complex("circle3")
    S = cl.circle_product(K)
    rng = random.Random(10)
    x = dc.random_reduced_cocycle(S, 2, rng)
    with pytest.raises(ValueError, match="m >= 2"):
        bad = dc.DifferentialCochain(S.complex, 1, 2, x.c, x.h, x.omega)
        dc.s1_integrate(S, bad)
    y = dc.random_cocycle(K, 2, rng)
    xp = dc.DifferentialCochain(
        S.complex, 2, 2,
        dc.pullback_cochain(S.proj, y.c, 2),
        dc.pullback_cochain(S.proj, y.h, 1),
        dc.pullback_cochain(S.proj, y.omega, 2))
    # projection pullbacks restrict to y on the base section
    with pytest.raises(ValueError, match="reduced"):
        dc.s1_integrate(S, xp)
    # but their fiber integrals vanish identically componentwise
    assert cl.fiber_integrate_circle(
        S, cl.Cochain(S.complex, 2, "Q", xp.omega)).is_zero()


def test_s1_integrate_random_reduced_cocycles():
    K = cl.bundled_complex("circle3")
    S = cl.circle_product(K)
    rng = random.Random(11)
    for _ in range(25):
        x = dc.random_reduced_cocycle(S, 2, rng)
        out = dc.s1_integrate(S, x)
        assert out.m == 1 and out.n == 1
        assert out.is_cocycle()
        fib = cl.fiber_integrate_circle(
            S, cl.Cochain(S.complex, 2, "Q", x.omega))
        assert (dc.curvature_R(out) == fib.values).all()


def test_s1_integrate_fundamental_times_cocycle():
    K = cl.bundled_complex("circle3")
    S = cl.circle_product(K)
    z = cl.Cochain.indicator(K, K.cells(1)[0])
    cvec = zeros(S.complex.n_cells(2), 1).reshape(-1)
    edge0 = S.fiber_cycle[0][0]
    for s in K.cells(1):
        cvec[S.complex.index[(edge0, s)]] = z[s]
    x = dc.DifferentialCochain(
        S.complex, 2, 2, cvec,
        zeros(S.complex.n_cells(1), 1).reshape(-1), cvec * Fraction(1))
    out = dc.s1_integrate(S, x)
    hd = dc.integral_cohomology(K, 1)
    assert hd.classes_equal(out.c, z.values)


def test_pullback_classification_reports():
    for name, m, witnesses in (("circle3", 1, 1), ("octahedron", 2, 0),
                               ("csaszar_torus", 2, 2)):
        rep = dc.pullback_classification_check(
            cl.bundled_complex(name), m, samples=15, seed=0)
        assert rep["passed"]
        detail = rep["checks"][-1]["detail"]
        assert detail.startswith(str(witnesses))
        # characteristic map has one column per integral generator
        phi = rep["characteristic_map"]
        if name == "octahedron":
            assert phi == [["1"]] or phi == [["-1"]]


def test_curvature_commutes_with_dhat_on_components():
    # the omega component of dhat is the coboundary of the omega component
    K = octa()
    rng = random.Random(13)
    for _ in range(20):
        x = dc.DifferentialCochain(
            K, 1, 1,
            dc.random_int_vector(rng, K.n_cells(1)),
            dc.random_rational_vector(rng, K.n_cells(0)),
            dc.random_rational_vector(rng, K.n_cells(1)))
        want = mv(K.boundary_matrix(2).T, x.omega)
        assert (x.dhat().omega == want).all()


def test_differential_cochain_json_round_trip():
    K = octa()
    rng = random.Random(12)
    x = dc.random_cocycle(K, 2, rng)
    y = dc.DifferentialCochain.from_json(K, x.to_json())
    assert (x - y).is_zero()
