import math

import numpy as np
import pytest

from schwinger_qem.model import (
    DomainSpec,
    ModelParams,
    RampSchedule,
    apply_added_noise,
    build_hamiltonian,
    get_preset,
    ramp_value,
    training_schedules,
)
from schwinger_qem.pauli import NoiseRotation, to_dense
from schwinger_qem.validation import ValidationError

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def embed(op, site, n):
    """Independent dense embedding oracle: site 0 leftmost kron factor."""
    out = np.array([[1.0]], dtype=complex)
    for q in range(n):
        out = np.kron(out, op if q == site else np.eye(2))
    return out


def dense_oracle(n, v, mg, lam, l0):
    """Assemble the five groups directly, without the package's types."""
    x = (n / v) ** 2
    dim = 2**n
    h = np.zeros((dim, dim), dtype=complex)
    for q in range(n - 1):
        h += (x / 2) * (embed(SX, q, n) @ embed(SX, q + 1, n))
        h += (x / 2) * (embed(SY, q, n) @ embed(SY, q + 1, n))
    for q in range(n - 1):
        for k in range(q + 1, n):
            h += 0.5 * (n - k - 1 + lam) * (embed(SZ, q, n) @ embed(SZ, k, n))
    for q in range(n - 1):
        h += (n / 4 - math.ceil(q / 2) / 2 + l0 * (n - q - 1)) * embed(SZ, q, n)
    for q in range(n):
        h += mg * math.sqrt(x) * (-1) ** q * embed(SZ, q, n)
    h += (l0 * l0 * (n - 1) + l0 * n / 2 + n * n / 8 + lam * n / 4) * np.eye(dim)
    return h


class TestModelParams:
    def test_rejects_odd_sites(self):
        with pytest.raises(ValidationError):
            ModelParams(5, 30.0, 0.0, 100.0)

    def test_warns_on_small_penalty(self):
        with pytest.warns(UserWarning):
            ModelParams(4, 20.0, 0.0, 5.0)

    def test_x_value(self):
        p = ModelParams(6, 30.0, 0.0, 100.0)
        assert p.x == pytest.approx(0.04)


class TestBuildHamiltonian:
    def test_matches_independent_assembly(self, rng):
        for n in (2, 4, 6):
            v = float(rng.uniform(5, 40))
            mg = float(rng.choice([0.0, rng.uniform(0.1, 12)]))
            lam = float(rng.uniform(20, 150))
            l0 = float(rng.uniform(0, 2))
            params = ModelParams(n, v, mg, lam)
            got = to_dense(build_hamiltonian(params, l0))
            want = dense_oracle(n, v, mg, lam, l0)
            assert np.allclose(got, want, atol=1e-10)

    def test_term_count_massless_preset(self):
        params, domain = get_preset(0)
        h = build_hamiltonian(params, domain.l0_min)
        # 10 hopping + 15 ZZ + 5 single-Z + 1 identity
        assert len(h) == 31

    def test_term_count_massive_preset(self):
        params, domain = get_preset(10)
        for l0 in (domain.l0_min, domain.l0_star, domain.l0_max):
            h = build_hamiltonian(params, l0)
            # the last site picks up a mass Z term
            assert len(h) == 32

    def test_identity_coefficient_massless_preset(self):
        params, domain = get_preset(0)
        h = build_hamiltonian(params, domain.l0_min)
        const = [t for t in h.terms if t.is_identity]
        assert len(const) == 1
        assert const[0].coefficient == pytest.approx(157.3429, abs=1e-4)

    def test_long_range_zz_coefficient_depends_on_far_site(self):
        params, _ = get_preset(0)
        h = build_hamiltonian(params, 0.5)
        coeffs = {
            t.support(): t.coefficient
            for t in h.terms
            if t.support() and all(a in "IZ" for a in t.axes) and len(t.support()) == 2
        }
        lam = params.charge_penalty
        n = params.n_sites
        for (q, k), c in coeffs.items():
            assert c == pytest.approx(0.5 * (n - k - 1 + lam))

    def test_hermitian_spectrum_real(self):
        params, domain = get_preset(10)
        m = to_dense(build_hamiltonian(params, domain.l0_min))
        assert np.allclose(m, m.conj().T)

    def test_charge_sectors_gapped_at_small_n(self):
        # States violating zero net charge carry the penalty; at N = 4 the
        # lowest such state sits far above the two tracked levels.
        for mg in (0, 10):
            params = ModelParams(4, 20.0, float(mg), 100.0)
            _, domain = get_preset(mg)
            h = to_dense(build_hamiltonian(params, domain.l0_min))
            charge = np.zeros(16)
            for q in range(4):
                bit = (np.arange(16) >> (3 - q)) & 1
                charge += (1.0 - 2 * bit + (-1) ** q) / 2
            evals, evecs = np.linalg.eigh(h)
            state_charge = (np.abs(evecs) ** 2 * charge[:, None]).sum(axis=0)
            neutral = evals[np.abs(state_charge) < 1e-6]
            charged = evals[np.abs(state_charge) >= 1e-6]
            assert charged.min() - np.sort(neutral)[1] > params.charge_penalty / 2


class TestAddedNoise:
    def test_zero_rotation_is_identity_map(self):
        params, domain = get_preset(0)
        h = build_hamiltonian(params, domain.l0_min)
        assert apply_added_noise(params, domain.l0_min, NoiseRotation.zero()) == h

    def test_phase_rotation_expands_hopping_only(self):
        params, domain = get_preset(0)
        rot = NoiseRotation.sample(5)
        h = apply_added_noise(params, domain.l0_min, rot)
        # each of the 5 hopping pairs expands into XX, XY, YX, YY
        assert len(h) == 41
        m = to_dense(h)
        assert np.allclose(m, m.conj().T, atol=1e-12)

    def test_conjugation_preserves_spectrum_per_site_rotation(self, rng):
        # W acts site-locally and identically everywhere, so the full
        # conjugated Hamiltonian is unitarily equivalent to the original
        # only when all types rotate coherently; at minimum the perturbed
        # operator must stay Hermitian with real eigenvalues.
        params = ModelParams(4, 20.0, 0.0, 100.0)
        rot = NoiseRotation(tuple(tuple(rng.uniform(-1, 1, 3)) for _ in range(3)))
        h = apply_added_noise(params, 0.5, rot)
        evals = np.linalg.eigvalsh(to_dense(h))
        assert np.all(np.isfinite(evals))

    def test_perturbation_small_for_small_angles(self):
        params, domain = get_preset(0)
        tiny = NoiseRotation(((0, 0, 1e-7), (0, 0, 1e-7), (0, 0, 1e-7)))
        a = to_dense(build_hamiltonian(params, domain.l0_min))
        b = to_dense(apply_added_noise(params, domain.l0_min, tiny))
        assert np.linalg.norm(a - b) < 1e-5


class TestRamps:
    def test_endpoints_exact(self):
        _, domain = get_preset(0)
        s = RampSchedule(domain.l0_min, domain.l0_max, 10.0, 100)
        assert ramp_value(s, 0.0) == domain.l0_min
        assert ramp_value(s, 10.0) == domain.l0_max

    def test_midpoint_value(self):
        _, domain = get_preset(0)
        s = RampSchedule(domain.l0_min, domain.l0_max, 10.0, 100)
        assert ramp_value(s, 5.0) == pytest.approx(0.512027, abs=1e-12)

    def test_linear_affinity(self, rng):
        s = RampSchedule(1.832633, 1.833633, 10.0, 100)
        for _ in range(50):
            t1, t2 = rng.uniform(0, 10, 2)
            lhs = ramp_value(s, t1) + ramp_value(s, t2)
            rhs = 2.0 * ramp_value(s, (t1 + t2) / 2.0)
            assert abs(lhs - rhs) < 1e-14 * max(1.0, abs(lhs))

    def test_out_of_range_rejected(self):
        s = RampSchedule(0.0, 1.0, 10.0, 10)
        with pytest.raises(ValueError):
            ramp_value(s, -0.1)
        with pytest.raises(ValueError):
            ramp_value(s, 10.1)

    def test_grid_matches_formula(self):
        s = RampSchedule(0.5, 0.7, 10.0, 40)
        t = s.times()
        assert len(t) == 41
        assert np.array_equal(s.l0_values(), ramp_value(s, t))


class TestTrainingSchedules:
    def test_first_ramp_ends_on_interface(self):
        _, domain = get_preset(0)
        scheds = training_schedules(domain, 10.0, 100, 11)
        assert len(scheds) == 11
        assert scheds[0].l0_end == domain.l0_int
        assert scheds[0].tau == 1

    def test_last_ramp_degenerates_to_constant(self):
        _, domain = get_preset(10)
        scheds = training_schedules(domain, 10.0, 100, 11)
        assert scheds[-1].l0_end == domain.l0_min
        assert np.allclose(scheds[-1].l0_values(), domain.l0_min)

    def test_endpoints_decrease_and_stay_in_learning_region(self):
        _, domain = get_preset(10)
        scheds = training_schedules(domain, 10.0, 100, 11)
        ends = [s.l0_end for s in scheds]
        assert all(a > b for a, b in zip(ends, ends[1:]))
        assert all(domain.l0_min <= e <= domain.l0_int for e in ends)

    def test_endpoint_override(self):
        _, domain = get_preset(0)
        ends = [domain.l0_int, domain.l0_min + 1e-4]
        scheds = training_schedules(domain, 10.0, 100, 2, endpoints=ends)
        assert [s.l0_end for s in scheds] == ends

    def test_override_outside_learning_region_rejected(self):
        _, domain = get_preset(0)
        with pytest.raises(ValidationError):
            training_schedules(domain, 10.0, 100, 2, endpoints=[domain.l0_max, 0.0])

    def test_n_train_bounds(self):
        _, domain = get_preset(0)
        with pytest.raises(ValidationError):
            training_schedules(domain, 10.0, 100, 1)
        with pytest.raises(ValidationError):
            training_schedules(domain, 10.0, 100, 12)


class TestDomains:
    def test_preset_ordering(self):
        for mg in (0, 10):
            _, d = get_preset(mg)
            assert d.l0_min < d.l0_int < d.l0_star < d.l0_max

    def test_bad_ordering_rejected(self):
        with pytest.raises(ValidationError):
            DomainSpec(0.2, 0.1, 0.3, 0.4)

    def test_region_masks_partition_main_grid(self):
        _, d = get_preset(0)
        s = RampSchedule(d.l0_min, d.l0_max, 10.0, 100)
        l0 = s.l0_values()
        pred = d.prediction_mask(l0)
        learn = d.learning_mask(l0)
        assert np.all(pred ^ learn)
        # the grid point mathematically on l0_int belongs to the learning side
        assert learn[66] and not pred[66]
        assert pred.sum() == 34

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            get_preset(3)
