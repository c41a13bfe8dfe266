import numpy as np
import pytest

from schwinger_qem.pauli import (
    DROP_TOL,
    NoiseRotation,
    PauliString,
    PauliSum,
    canonicalize,
    conjugate_pauli,
    expectation,
    is_canonical,
    string_expectation,
    to_dense,
)


def random_sum(rng, n_sites, n_terms):
    terms = []
    for _ in range(n_terms):
        axes = tuple(rng.choice(list("IXYZ")) for _ in range(n_sites))
        terms.append(PauliString(axes, float(rng.normal())))
    return PauliSum.from_terms(terms, n_sites)


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


class TestPauliString:
    def test_rejects_bad_label(self):
        with pytest.raises(ValueError):
            PauliString(("A",), 1.0)

    def test_rejects_nonfinite_coefficient(self):
        with pytest.raises(ValueError):
            PauliString(("X",), float("nan"))

    def test_support(self):
        s = PauliString.from_sites(4, {1: "X", 3: "Z"}, 2.0)
        assert s.support() == (1, 3)
        assert s.axes == ("I", "X", "I", "Z")

    def test_identity_flag(self):
        assert PauliString(("I", "I"), 1.0).is_identity
        assert not PauliString(("I", "X"), 1.0).is_identity


class TestCanonicalize:
    def test_merges_duplicates(self):
        # {1*X0X1, 2*X0X1} -> single term with coefficient 3
        a = PauliString(("X", "X"), 1.0)
        b = PauliString(("X", "X"), 2.0)
        out = canonicalize(PauliSum((a, b), 2))
        assert len(out) == 1
        assert out.terms[0].axes == ("X", "X")
        assert out.terms[0].coefficient == 3.0

    def test_cancellation_drops_term(self):
        a = PauliString(("Z", "I"), 1.0)
        b = PauliString(("Z", "I"), -1.0)
        out = canonicalize(PauliSum((a, b), 2))
        assert len(out) == 0

    def test_sorted_lexicographically(self, rng):
        s = canonicalize(random_sum(rng, 3, 25))
        axes = [t.axes for t in s.terms]
        assert axes == sorted(axes)
        assert is_canonical(s)

    def test_idempotent(self, rng):
        for _ in range(20):
            s = canonicalize(random_sum(rng, 2, 12))
            again = canonicalize(s)
            assert again == s

    def test_drop_threshold(self):
        small = PauliString(("X",), 0.5 * DROP_TOL)
        out = canonicalize(PauliSum((small,), 1))
        assert len(out) == 0


class TestToDense:
    def test_single_site_z(self):
        s = PauliSum((PauliString(("Z",), 1.0),), 1)
        assert np.allclose(to_dense(s), np.diag([1.0, -1.0]))

    def test_two_site_xx(self):
        s = PauliSum((PauliString(("X", "X"), 0.5),), 2)
        want = 0.5 * np.array(
            [[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float
        )
        assert np.allclose(to_dense(s), want)

    def test_site_zero_is_most_significant(self):
        # Z on site 0 of a 2-site register: diag(1, 1, -1, -1)
        s = PauliSum((PauliString(("Z", "I"), 1.0),), 2)
        assert np.allclose(np.diag(to_dense(s)), [1.0, 1.0, -1.0, -1.0])

    def test_hermitian_for_real_coefficients(self, rng):
        for _ in range(10):
            m = to_dense(random_sum(rng, 3, 15))
            assert np.allclose(m, m.conj().T)

    def test_memory_guard(self):
        s = PauliSum((PauliString(("I",) * 13, 1.0),), 13)
        with pytest.raises(ValueError):
            to_dense(s)


class TestExpectation:
    def test_matches_dense_trace(self, rng):
        for n_sites in (1, 2, 3):
            for _ in range(15):
                s = canonicalize(random_sum(rng, n_sites, 10))
                rho = random_density(rng, 2**n_sites)
                want = np.trace(to_dense(s) @ rho).real
                assert abs(expectation(s, rho) - want) < 1e-10

    def test_identity_on_maximally_mixed(self):
        # {2*I} on the maximally mixed state -> 2
        s = PauliSum((PauliString(("I", "I"), 2.0),), 2)
        rho = np.eye(4) / 4.0
        assert expectation(s, rho) == pytest.approx(2.0)

    def test_z_on_computational_state(self):
        s = PauliSum((PauliString(("Z",), 1.0),), 1)
        rho = np.diag([1.0, 0.0]).astype(complex)
        assert expectation(s, rho) == pytest.approx(1.0)

    def test_linear_in_operator(self, rng):
        rho = random_density(rng, 4)
        a = canonicalize(random_sum(rng, 2, 6))
        b = canonicalize(random_sum(rng, 2, 6))
        both = canonicalize(PauliSum(a.terms + b.terms, 2))
        assert expectation(both, rho) == pytest.approx(
            expectation(a, rho) + expectation(b, rho), abs=1e-10
        )

    def test_dimension_mismatch(self):
        s = PauliSum((PauliString(("Z", "I"), 1.0),), 2)
        with pytest.raises(ValueError):
            expectation(s, np.eye(2) / 2)

    def test_string_expectation_signed_permutation(self, rng):
        for axes in [("Y",), ("X", "Z"), ("Y", "Y", "X")]:
            rho = random_density(rng, 2 ** len(axes))
            dense = to_dense(PauliSum((PauliString(axes, 1.0),), len(axes)))
            want = np.trace(dense @ rho)
            assert abs(string_expectation(axes, rho) - want) < 1e-12


class TestNoiseRotation:
    def test_zero_rotation_fixes_everything(self):
        rot = NoiseRotation.zero()
        assert rot.is_identity
        for axis in "XYZ":
            out = conjugate_pauli(axis, rot)
            assert out == ((axis, 1.0),)

    def test_w_is_unitary_for_any_angles(self, rng):
        for _ in range(50):
            rot = NoiseRotation(tuple(tuple(rng.uniform(-3, 3, 3)) for _ in range(3)))
            for axis in "XYZ":
                w = rot.dense_w(axis)
                assert np.allclose(w @ w.conj().T, np.eye(2), atol=1e-12)

    def test_sample_is_reproducible_and_in_range(self):
        a = NoiseRotation.sample(123)
        b = NoiseRotation.sample(123)
        assert a == b
        for phi1, phi2, phi3 in a.angles:
            assert phi1 == 0.0 and phi2 == 0.0
            assert -1.0 <= phi3 <= 1.0
        assert NoiseRotation.sample(124) != a


class TestConjugatePauli:
    def test_closed_form_for_phase_only_rotation(self, rng):
        # With phi1 = phi2 = 0: X -> cos(phi3) X - sin(phi3) Y,
        # Y -> sin(phi3) X + cos(phi3) Y, Z -> Z.
        for _ in range(25):
            phi3 = float(rng.uniform(-1, 1))
            triple = (0.0, 0.0, phi3)
            rot = NoiseRotation((triple, triple, triple))
            got = dict(conjugate_pauli("X", rot))
            assert got.pop("X") == pytest.approx(np.cos(phi3))
            assert got.pop("Y", 0.0) == pytest.approx(-np.sin(phi3), abs=1e-12)
            assert not got
            got = dict(conjugate_pauli("Y", rot))
            assert got.pop("X", 0.0) == pytest.approx(np.sin(phi3), abs=1e-12)
            assert got.pop("Y") == pytest.approx(np.cos(phi3))
            assert not got
            assert dict(conjugate_pauli("Z", rot)) == {"Z": pytest.approx(1.0)}

    def test_image_has_unit_spectrum(self, rng):
        # Conjugation preserves eigenvalues {+1, -1} and tracelessness.
        for _ in range(25):
            rot = NoiseRotation(tuple(tuple(rng.uniform(-3, 3, 3)) for _ in range(3)))
            for axis in "XYZ":
                image = sum(
                    c * to_dense(PauliSum((PauliString((label,), 1.0),), 1))
                    for label, c in conjugate_pauli(axis, rot)
                )
                ev = np.linalg.eigvalsh(image)
                assert np.allclose(sorted(ev), [-1.0, 1.0], atol=1e-10)

    def test_identity_rejected(self):
        with pytest.raises(ValueError):
            conjugate_pauli("I", NoiseRotation.zero())
