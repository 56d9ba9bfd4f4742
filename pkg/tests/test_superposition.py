import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grid_fit
from qsuperpose.bloch import ONE, ZERO, PureQubit, SphereCircle, bloch_to_state, BlochPoint
from qsuperpose.linalg import hermitian_eigenvalues, outer
from qsuperpose.superposition import (
    CPMap,
    KrausOperator,
    SuperpositionSpec,
    apply_kraus,
    fit_batch,
    fit_phase,
    is_superposable,
    residual_H,
    success_probability,
    superposable_mask,
    target_vector,
)
from qsuperpose.synthesize import synthesize_channel

R2 = math.sqrt(2) / 2
S3 = math.sqrt(3) / 2
SPEC_RING = SuperpositionSpec(math.sqrt(4 / 5), math.sqrt(1 / 5))
SPEC_ALT = SuperpositionSpec(-R2, R2)
M0_RING = KrausOperator([[0, 0, 0, 0], [0, 0, -1, 0]])
M_ALT = KrausOperator([[R2, 0, 0, 0], [0, 0, -R2, 0]])


def ring_state(y):
    return PureQubit.from_amplitudes(0.5, np.exp(-1j * y) * S3)


def random_kraus(rng, scale=None):
    m = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    top = np.linalg.svd(m, compute_uv=False)[0]
    s = rng.uniform(0.2, 1.0) if scale is None else scale
    return KrausOperator(m * s / top)


def random_spec(rng):
    t = rng.uniform(0.1, math.pi / 2 - 0.1)
    return SuperpositionSpec(math.cos(t) * np.exp(1j * rng.uniform(0, 6.3)), math.sin(t) * np.exp(1j * rng.uniform(0, 6.3)))


def random_state(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return PureQubit.from_vector(v, normalize=True)


class TestTypes:
    def test_spec_normalization(self):
        with pytest.raises(ValueError):
            SuperpositionSpec(1, 1)

    def test_spec_nonzero(self):
        with pytest.raises(ValueError):
            SuperpositionSpec(1, 0)

    def test_kraus_shape(self):
        with pytest.raises(ValueError, match="2x4"):
            KrausOperator(np.eye(2))

    def test_kraus_contraction(self):
        with pytest.raises(ValueError, match="trace-nonincreasing"):
            KrausOperator([[2, 0, 0, 0], [0, 0, 0, 0]])

    def test_cpmap_sum_constraint(self):
        k = KrausOperator([[1, 0, 0, 0], [0, 0, 0, 0]])
        with pytest.raises(ValueError, match="trace-nonincreasing"):
            CPMap((k, k))
        with pytest.raises(ValueError):
            CPMap(())

    def test_kraus_is_immutable(self):
        with pytest.raises(ValueError):
            M0_RING.m[0, 0] = 1


class TestTargetVector:
    def test_same_state(self):
        spec = SuperpositionSpec(R2, R2)
        assert np.allclose(target_vector(spec, 0.0, ZERO, ZERO), [math.sqrt(2), 0])

    @pytest.mark.parametrize("y", [0.0, 1.3, 4.0])
    def test_ring_to_one(self, y):
        t = target_vector(SPEC_RING, -math.pi, ring_state(y), ZERO)
        assert np.allclose(t, [0, math.sqrt(4 / 5) * np.exp(-1j * y) * S3], atol=1e-15)

    @pytest.mark.parametrize("y", [0.0, 1.3, 4.0])
    def test_alternate(self, y):
        t = target_vector(SPEC_ALT, 0.0, ring_state(y), ZERO)
        assert np.allclose(t, [math.sqrt(2) / 4, -(math.sqrt(6) / 4) * np.exp(-1j * y)], atol=1e-15)


class TestApplyKraus:
    @pytest.mark.parametrize("y", [0.0, 0.9, 5.5])
    def test_ring_channel_on_ring(self, y):
        out = apply_kraus(M0_RING, ring_state(y), ZERO)
        assert np.allclose(out, [0, -S3 * np.exp(-1j * y)], atol=1e-15)
        assert np.vdot(out, out).real == pytest.approx(0.75, abs=1e-15)

    @pytest.mark.parametrize("y", [0.0, 0.9, 5.5])
    def test_alternate_on_ring(self, y):
        out = apply_kraus(M_ALT, ring_state(y), ZERO)
        assert np.allclose(out, [math.sqrt(2) / 4, -(math.sqrt(6) / 4) * np.exp(-1j * y)], atol=1e-15)
        assert np.vdot(out, out).real == pytest.approx(0.5, abs=1e-15)

    def test_north_pole_is_killed(self):
        assert not np.any(apply_kraus(M0_RING, ZERO, ZERO))


class TestFitPhase:
    @pytest.mark.parametrize("y", [0.0, 0.9, 3.0, 5.5])
    def test_ring_channel(self, y):
        psi = ring_state(y)
        rep = fit_phase(apply_kraus(M0_RING, psi, ZERO), SPEC_RING, psi, ZERO)
        assert rep.theta == pytest.approx(math.pi, abs=1e-12)
        assert rep.lam == pytest.approx(5 / 4, abs=1e-12)
        assert rep.residual_norm < 1e-12
        assert rep.success_prob == pytest.approx(0.75)

    @pytest.mark.parametrize("y", [0.0, 0.9, 3.0, 5.5])
    def test_alternate(self, y):
        psi = ring_state(y)
        rep = fit_phase(apply_kraus(M_ALT, psi, ZERO), SPEC_ALT, psi, ZERO)
        assert abs(math.remainder(rep.theta, 2 * math.pi)) < 1e-12
        assert rep.residual_norm < 1e-12

    def test_component_mismatch(self):
        rep = fit_phase([1, 0], SuperpositionSpec(R2, R2), ONE, ZERO)
        assert rep.theta is None and rep.lam is None
        assert rep.residual_norm > 0.5

    def test_zero_output(self):
        rep = fit_phase([0, 0], SPEC_RING, ZERO, ZERO)
        assert rep == type(rep)(None, None, 0.0, 0.0)

    def test_rejects_bad_tol(self):
        with pytest.raises(ValueError):
            fit_phase([1, 0], SPEC_RING, ZERO, ZERO, tol=0)

    def test_matches_grid_oracle(self, rng):
        for _ in range(150):
            k, spec, psi, phi0 = random_kraus(rng), random_spec(rng), random_state(rng), random_state(rng)
            out = apply_kraus(k, psi, phi0)
            rep = fit_phase(out, spec, psi, phi0)
            _, _, res = grid_fit(out, spec.alpha, spec.beta, psi.vector, phi0.vector)
            assert abs(rep.residual_norm - res) < 1e-6

    def test_matches_grid_oracle_near_fits(self, rng):
        # outputs close to an exact fit stress the phase accuracy
        for _ in range(60):
            spec, psi, phi0 = random_spec(rng), random_state(rng), random_state(rng)
            th = rng.uniform(0, 2 * math.pi)
            out = 0.7 * target_vector(spec, th, psi, phi0) + 1e-4 * (rng.normal(size=2) + 1j * rng.normal(size=2))
            rep = fit_phase(out, spec, psi, phi0)
            _, _, res = grid_fit(out, spec.alpha, spec.beta, psi.vector, phi0.vector)
            assert abs(rep.residual_norm - res) < 1e-6

    def test_exact_targets_always_fit(self, rng):
        for _ in range(200):
            spec, psi, phi0 = random_spec(rng), random_state(rng), random_state(rng)
            th = rng.uniform(0, 2 * math.pi)
            out = 0.4 * np.exp(1j * rng.uniform(0, 6.3)) * target_vector(spec, th, psi, phi0)
            rep = fit_phase(out, spec, psi, phi0)
            assert rep.fitted
            assert rep.residual_norm < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.integers(0, 2**32 - 1))
    def test_global_phase_invariance(self, phi, seed):
        rng = np.random.default_rng(seed)
        k, spec, psi = random_kraus(rng), random_spec(rng), random_state(rng)
        out = apply_kraus(k, psi, ZERO)
        a = fit_phase(out, spec, psi, ZERO)
        b = fit_phase(np.exp(1j * phi) * out, spec, psi, ZERO)
        assert a.fitted == b.fitted
        assert b.residual_norm == pytest.approx(a.residual_norm, abs=1e-12)
        assert b.success_prob == pytest.approx(a.success_prob, abs=1e-14)

    def test_batch_agrees_with_scalar(self, rng):
        outs, As, Bs, res = [], [], [], []
        for _ in range(50):
            k, spec, psi = random_kraus(rng), random_spec(rng), random_state(rng)
            out = apply_kraus(k, psi, ZERO)
            outs.append(out)
            As.append(spec.alpha * psi.vector)
            Bs.append(spec.beta * ZERO.vector)
            res.append(fit_phase(out, spec, psi, ZERO).residual_norm)
        _, _, batch = fit_batch(np.array(outs), np.array(As), np.array(Bs))
        assert np.allclose(batch, res, atol=1e-15)


class TestResidualH:
    @pytest.mark.parametrize("y", [0.0, 2.2, 4.4])
    def test_vanishes_on_ring(self, y):
        ch = synthesize_channel(SphereCircle(0, 0, 0.5))
        h = residual_H(ch.kraus, ch.spec, ring_state(y), ZERO, 5 / 4, math.pi)
        assert np.linalg.norm(h) < 1e-12

    def test_off_circle_north_pole(self):
        ch = synthesize_channel(SphereCircle(0, 0, 0.5))
        h = residual_H(ch.kraus, ch.spec, ZERO, ZERO, 5 / 4, math.pi)
        t = target_vector(ch.spec, math.pi, ZERO, ZERO)
        assert np.allclose(h, -5 / 4 * outer(t))
        assert np.linalg.norm(h) > 0.1

    def test_adding_back_gives_output_projector(self, rng):
        for _ in range(20):
            k, spec, psi = random_kraus(rng), random_spec(rng), random_state(rng)
            h = residual_H(k, spec, psi, ZERO, 1.0, 0.0)
            p = h + outer(target_vector(spec, 0.0, psi, ZERO))
            eig = hermitian_eigenvalues(p)
            assert eig[0] > -1e-12 and abs(eig[0]) < 1e-12

    def test_entries_match_component_equations(self, rng):
        # with phi0 = |0>: H11, H12, H22 written out in x, y and the a_ij
        for _ in range(20):
            k, spec = random_kraus(rng), random_spec(rng)
            x, y = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi)
            lam, th = rng.uniform(0.1, 2), rng.uniform(0, 2 * math.pi)
            a = k.m
            c, s, e = math.cos(x / 2), math.sin(x / 2), np.exp(-1j * y)
            al, be = spec.alpha, spec.beta
            r1 = a[0, 0] * c + a[0, 2] * s * e
            r2 = a[1, 0] * c + a[1, 2] * s * e
            t1 = al * c + be * np.exp(1j * th)
            t2 = al * s * e
            h = residual_H(k, spec, PureQubit.from_angles(x, y), ZERO, lam, th)
            assert h[0, 0] == pytest.approx(abs(r1) ** 2 - lam * abs(t1) ** 2, abs=1e-12)
            assert h[0, 1] == pytest.approx(r1 * np.conj(r2) - lam * t1 * np.conj(t2), abs=1e-12)
            assert h[1, 1] == pytest.approx(abs(r2) ** 2 - lam * abs(t2) ** 2, abs=1e-12)
            assert h[1, 0] == pytest.approx(np.conj(h[0, 1]), abs=1e-15)

    def test_norm_equals_report_residual(self, rng):
        for _ in range(100):
            k, spec, psi = random_kraus(rng), random_spec(rng), random_state(rng)
            out = apply_kraus(k, psi, ZERO)
            rep = fit_phase(out, spec, psi, ZERO, tol=10.0)
            h = residual_H(k, spec, psi, ZERO, rep.lam, rep.theta)
            assert abs(np.linalg.norm(h) - rep.residual_norm) < 1e-12

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            residual_H(M0_RING, SPEC_RING, ZERO, ZERO, 0.0, 0.0)


class TestIsSuperposable:
    def test_on_ring(self):
        ok, rep = is_superposable(CPMap.single(M0_RING), SPEC_RING, ring_state(1.0), ZERO)
        assert ok and rep.success_prob == pytest.approx(0.75)

    def test_zero_probability(self):
        psi = bloch_to_state(BlochPoint(0, 0, 1))
        ok, rep = is_superposable(CPMap.single(M0_RING), SPEC_RING, psi, ZERO)
        assert not ok and rep.success_prob == 0.0

    def test_off_ring(self):
        psi = PureQubit.from_amplitudes(S3, 0.5)  # Z = +1/2
        ok, rep = is_superposable(CPMap.single(M0_RING), SPEC_RING, psi, ZERO)
        assert not ok
        out = apply_kraus(M0_RING, psi, ZERO)
        _, _, res = grid_fit(out, SPEC_RING.alpha, SPEC_RING.beta, psi.vector, ZERO.vector)
        assert res > 0.1 and rep.residual_norm == pytest.approx(res, abs=1e-6)

    def test_accepts_bare_operator(self):
        ok, _ = is_superposable(M0_RING, SPEC_RING, ring_state(0.3), ZERO)
        assert ok

    def test_every_live_branch_must_fit(self):
        half = math.sqrt(0.5)
        a = KrausOperator(M0_RING.m * half)
        b = KrausOperator([[0, 1, 0, 0], [0, 0, 0, 0]])  # only acts on psi (x) |1>
        c = KrausOperator(np.array([[1, 0, 0, 0], [0, 0, 0, 0]]) * half)
        psi = ring_state(0.4)
        ok, rep = is_superposable(CPMap((a, b)), SPEC_RING, psi, ZERO)
        assert ok and rep.success_prob == pytest.approx(0.375)
        ok, _ = is_superposable(CPMap((a, c)), SPEC_RING, psi, ZERO)
        assert not ok

    def test_all_branches_dead(self):
        k = KrausOperator([[0, 1, 0, 0], [0, 0, 0, 1]])
        ok, rep = is_superposable(CPMap.single(k), SPEC_RING, ring_state(0.4), ZERO)
        assert not ok and rep.success_prob == 0

    def test_success_probability_law(self, rng):
        for _ in range(100):
            k, psi, phi0 = random_kraus(rng), random_state(rng), random_state(rng)
            out = apply_kraus(k, psi, phi0)
            p = success_probability(k, psi, phi0)
            assert 0 <= p <= 1 + 1e-12
            assert abs(p - np.vdot(out, out).real) < 1e-12

    def test_mask_matches_scalar(self, rng):
        ch = synthesize_channel(SphereCircle(0.7, 1.2, 0.3))
        from qsuperpose.bloch import circle_point_array, bloch_to_states

        pts = np.concatenate([circle_point_array(ch.circle, 20), rng.normal(size=(20, 3))])
        psis = bloch_to_states(pts)
        mask = superposable_mask(ch.cp_map, ch.spec, psis, ZERO)
        scalar = [is_superposable(ch.cp_map, ch.spec, PureQubit.from_vector(v), ZERO)[0] for v in psis]
        assert mask.tolist() == scalar
        assert mask[:20].all() and not mask[20:].any()
