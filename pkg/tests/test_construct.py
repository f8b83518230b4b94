import json
import math

import numpy as np
import pytest

from pomlab import numerics as nm
from pomlab.construct import (
    MeasurementSetup,
    PureState,
    alice_observables,
    bob_basis,
    bob_measurements,
    canonical_setup,
    canonical_state,
    check_observable,
    encode_ensemble,
    load_setup,
    dump_setup,
    maximally_entangled,
    random_involution,
    random_setup,
    setup_from_dict,
    setup_to_dict,
    verify_parity_obliviousness,
)
from pomlab.task import from_str, sign_matrix

from .conftest import I2, X, Y, Z

R3 = math.sqrt(3)


def ptrace_loops(m, da, db):
    out = np.zeros((db, db), dtype=complex)
    for a in range(da):
        out += m[a * db:(a + 1) * db, a * db:(a + 1) * db]
    return out


class TestBobBasis:
    def test_n3(self):
        b = bob_basis(3)
        for got, want in zip(b, [X, Y, Z]):
            assert nm.allclose(got, want, 0)

    def test_n4(self):
        want = [nm.kron(X, X), nm.kron(X, Y), nm.kron(X, Z), nm.kron(Y, I2)]
        for got, w in zip(bob_basis(4), want):
            assert nm.allclose(got, w, 0)

    def test_n5(self):
        want = [nm.kron(X, X), nm.kron(X, Y), nm.kron(X, Z), nm.kron(Y, I2), nm.kron(Z, I2)]
        for got, w in zip(bob_basis(5), want):
            assert nm.allclose(got, w, 0)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_anticommuting_involutions(self, n):
        b = bob_basis(n)
        d = 2 ** (n // 2)
        assert len(b) == n and all(m.shape == (d, d) for m in b)
        for y, by in enumerate(b):
            assert nm.allclose(by @ by, np.eye(d), 1e-12)
            for by2 in b[y + 1:]:
                assert np.abs(by @ by2 + by2 @ by).max() <= 1e-12

    @pytest.mark.parametrize("n", [1, 13])
    def test_range(self, n):
        with pytest.raises(ValueError):
            bob_basis(n)


class TestAlice:
    def test_n3_first_and_last(self):
        a = alice_observables(3)
        assert nm.allclose(a[0], (X + Y + Z) / R3, 1e-15)
        assert nm.allclose(a[1], (X + Y - Z) / R3, 1e-15)
        assert nm.allclose(a[2], (X - Y + Z) / R3, 1e-15)
        assert nm.allclose(a[3], (-X + Y + Z) / R3, 1e-15)

    def test_n4_a6(self):
        want = 0.5 * (nm.kron(X, X) + nm.kron(X, Y) - nm.kron(X, Z) - nm.kron(Y, I2))
        assert nm.allclose(alice_observables(4)[5], want, 1e-15)

    def test_n4_all_listed(self):
        xx, xy, xz, yi = nm.kron(X, X), nm.kron(X, Y), nm.kron(X, Z), nm.kron(Y, I2)
        listed = [
            (1, 1, 1, 1), (1, 1, 1, -1), (1, 1, -1, 1), (1, -1, 1, 1),
            (-1, 1, 1, 1), (1, 1, -1, -1), (1, -1, 1, -1), (1, -1, -1, 1),
        ]
        for a, c in zip(alice_observables(4), listed):
            assert nm.allclose(a, 0.5 * (c[0] * xx + c[1] * xy + c[2] * xz + c[3] * yi), 1e-15)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_involutions_and_combination(self, n):
        alice, basis, s = alice_observables(n), bob_basis(n), sign_matrix(n).s
        d = basis[0].shape[0]
        for a in alice:
            assert nm.allclose(a @ a, np.eye(d), 1e-12)
            assert nm.is_hermitian(a, 1e-12)
        for y in range(n):
            comb = sum(float(s[i, y]) * a for i, a in enumerate(alice))
            scale = 2 ** (n - 1) / math.sqrt(n)
            # 2^(n-1) summands of this size: compare relative to the scale
            assert nm.allclose(comb / scale, basis[y], 1e-13)

    def test_n3_combination_sign_is_plus_sigma_y(self):
        # A1 + A2 - A3 + A4 evaluates to +4 sigma_y / sqrt 3 (not -sigma_y)
        a = alice_observables(3)
        assert nm.allclose(a[0] + a[1] - a[2] + a[3], 4 / R3 * Y, 1e-14)


class TestBobMeasurements:
    def test_n3(self):
        for got, want in zip(bob_measurements(3), [X, -Y, Z]):
            assert nm.allclose(got, want, 0)

    def test_n2(self):
        for got, want in zip(bob_measurements(2), [X, -Y]):
            assert nm.allclose(got, want, 0)

    def test_n4(self):
        want = [nm.kron(X, X), -nm.kron(X, Y), nm.kron(X, Z), -nm.kron(Y, I2)]
        for got, w in zip(bob_measurements(4), want):
            assert nm.allclose(got, w, 0)

    def test_literal_listing_gives_two_minus_ones(self):
        # untransposed observables on the stated state: <B2 B2> = <B4 B4> = -1
        st = canonical_state(4)
        vals = [st.expectation(nm.kron(b, b)).real for b in bob_basis(4)]
        assert vals == pytest.approx([1, -1, 1, -1], abs=1e-14)

    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_transpose_identity(self, d, rng):
        phi = maximally_entangled(d)
        for _ in range(20):
            m = random_involution(d, rng)
            assert phi.expectation(nm.kron(m, m.T)).real == pytest.approx(1, abs=1e-12)
            assert nm.allclose(nm.kron(m, np.eye(d)) @ phi.vector, nm.kron(np.eye(d), m.T) @ phi.vector, 1e-12)


class TestState:
    def test_n3(self):
        assert nm.allclose(canonical_state(3).vector, np.array([1, 0, 0, 1]) / math.sqrt(2), 1e-16)

    def test_n2(self):
        assert nm.allclose(canonical_state(2).vector, np.array([1, 0, 0, 1]) / math.sqrt(2), 1e-16)

    def test_n4_qubit_ket(self):
        v = canonical_state(4).vector
        want = np.zeros(16)
        for ket in ("0000", "0101", "1010", "1111"):
            want[int(ket, 2)] = 0.5
        assert nm.allclose(v, want, 1e-16)

    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            PureState(np.array([1, 1, 0, 0]), 2, 2)

    def test_setup_shape_checks(self):
        with pytest.raises(ValueError):
            MeasurementSetup(3, canonical_state(3), tuple(alice_observables(3)[:3]), tuple(bob_measurements(3)))
        with pytest.raises(ValueError):
            MeasurementSetup(4, canonical_state(3), tuple(alice_observables(4)), tuple(bob_measurements(4)))

    def test_check_observable(self):
        check_observable(X)
        with pytest.raises(ValueError):
            check_observable(2 * X)
        with pytest.raises(ValueError):
            check_observable(np.array([[0, 1], [0, 0]]))


class TestEnsemble:
    def test_n3_rho000(self):
        e = encode_ensemble(canonical_setup(3))
        # oracle: brute-force partial trace of ((I + A1)/2 (x) I) Phi+, doubled
        a1 = (X + Y + Z) / R3
        phi = canonical_state(3).density()
        oracle = 2 * ptrace_loops(nm.kron((I2 + a1) / 2, I2) @ phi, 2, 2)
        want = (I2 + (X - Y + Z) / R3) / 2
        assert nm.allclose(oracle, want, 1e-15)
        assert nm.allclose(e.states[from_str("000")], want, 1e-15)

    def test_n3_pair_sums(self):
        e = encode_ensemble(canonical_setup(3))
        for a, b in [("000", "111"), ("001", "110"), ("010", "101"), ("100", "011")]:
            assert nm.allclose(e.states[from_str(a)] + e.states[from_str(b)], I2, 1e-15)

    @pytest.mark.parametrize("n", range(2, 9))
    def test_density_matrices(self, n):
        e = encode_ensemble(canonical_setup(n))
        assert len(e.states) == 2**n
        assert e.weight == 1 / 2**n
        assert e.steering_deviation <= 1e-12
        for rho in e.states.values():
            assert nm.is_hermitian(rho, 1e-12)
            assert abs(np.trace(rho) - 1) <= 1e-10
            assert nm.eigvalsh(rho)[0] >= -1e-10

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_pair_sums_random_setups(self, n, rng):
        for _ in range(10):
            setup = random_setup(n, rng, haar=True)
            e = encode_ensemble(setup)
            entries = sorted(e.states)
            from pomlab.task import input_ordering

            order = input_ordering(n)
            for i in range(2 ** (n - 1)):
                x, xbar = order.entries[i], order.entries[order.partner(i)]
                assert nm.allclose(e.states[x] + e.states[xbar], 2 * e.marginal, 1e-12)
            assert len(entries) == 2**n

    def test_mixed_for_n4(self):
        rho = encode_ensemble(canonical_setup(4)).states[from_str("0000")]
        assert np.trace(rho @ rho).real == pytest.approx(0.5, abs=1e-12)

    def test_haar_state_flags_steering(self, rng):
        e = encode_ensemble(random_setup(2, rng, haar=True))
        assert e.steering_deviation > 1e-9


class TestParity:
    @pytest.mark.parametrize("n", range(2, 9))
    def test_canonical_oblivious(self, n):
        rep = verify_parity_obliviousness(encode_ensemble(canonical_setup(n)))
        assert rep.max_deviation < 1e-12
        assert len(rep.deviations) == 2**n - n - 1
        assert rep.ok

    def test_broken_ensemble_flagged(self):
        e = encode_ensemble(canonical_setup(3))
        e.states[from_str("111")] = e.states[from_str("000")]
        rep = verify_parity_obliviousness(e)
        assert rep.deviations["111"] > 0.5
        assert not rep.ok


class TestSerialization:
    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_round_trip_bit_exact(self, n, rng, tmp_path):
        for setup in (canonical_setup(n), random_setup(n, rng, haar=True)):
            doc = json.loads(json.dumps(setup_to_dict(setup)))
            back = setup_from_dict(doc)
            assert np.array_equal(back.state.vector, setup.state.vector)
            assert all(np.array_equal(a, b) for a, b in zip(back.alice, setup.alice))
            assert all(np.array_equal(a, b) for a, b in zip(back.bob, setup.bob))
            path = tmp_path / f"setup{n}.json"
            dump_setup(setup, path)
            again = load_setup(path)
            assert np.array_equal(again.bob[0], setup.bob[0])

    def test_schema(self):
        doc = setup_to_dict(canonical_setup(3))
        assert list(doc) == ["n", "dim", "state", "alice", "bob"]
        assert doc["dim"] == 2 and len(doc["state"]) == 4 and len(doc["alice"]) == 4
        assert doc["bob"][1] == [[0.0, 0.0], [0.0, 1.0], [0.0, -1.0], [0.0, 0.0]]  # -sigma_y

    def test_bad_document(self):
        doc = setup_to_dict(canonical_setup(3))
        doc["alice"][0] = doc["alice"][0][:3]
        with pytest.raises(ValueError):
            setup_from_dict(doc)
