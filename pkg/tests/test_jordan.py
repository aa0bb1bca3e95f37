import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PAULI_Y, random_hermitian, unit_trace_hermitian
from poptlab.contexts import haar_unitary
from poptlab.errors import DimensionError
from poptlab.fixtures import max_entangled_state, random_density, swap_matrix
from poptlab.jordan import (
    ClassifyConfig,
    LinearMapRep,
    TimeFlowPair,
    apply_map,
    classify,
    is_completely_positive,
    jordan_defect,
    map_from_state,
    orientation_verdict,
    rep_from_action,
    reversed_flow,
    state_from_map,
    transpose_input,
)
from poptlab.operator_core import (
    anticommutator,
    conjugation_flow,
    identity,
    is_psd,
    max_norm,
    partial_trace,
    partial_transpose,
    tensor,
)

FAST = ClassifyConfig(restarts=16, samples=20)


def unitary_conjugation_rep(d: int, seed: int) -> LinearMapRep:
    u = haar_unitary(d, np.random.default_rng(seed))
    return rep_from_action(lambda a: u @ a @ u.conj().T, d, d)


def transpose_rep(d: int) -> LinearMapRep:
    return rep_from_action(lambda a: a.T, d, d)


def depolarizing_rep(d: int) -> LinearMapRep:
    return rep_from_action(lambda a: np.trace(a) * identity(d) / d, d, d)


class TestStateMapBijection:
    def test_maximally_mixed_sends_identity_to_reduction(self):
        rho = identity(6) / 6
        phi = map_from_state(rho, (3, 2))
        expected = partial_trace(rho, (3, 2), keep=2)
        assert max_norm(apply_map(phi, identity(3)) - expected) < 1e-12
        assert max_norm(expected - identity(2) / 2) < 1e-12

    def test_maximally_entangled_gives_scaled_transpose(self):
        phi = map_from_state(max_entangled_state(3), (3, 3))
        for i in range(3):
            for j in range(3):
                unit = np.zeros((3, 3), dtype=complex)
                unit[i, j] = 1.0
                assert max_norm(apply_map(phi, unit) - unit.T / 3) < 1e-12

    def test_roundtrip_on_100_operators(self):
        for seed in range(100):
            rho = unit_trace_hermitian(9, seed) if seed % 2 else random_density(9, seed)
            assert max_norm(state_from_map(map_from_state(rho, (3, 3))) - rho) <= 1e-10

    def test_action_matches_defining_relation(self):
        rho = random_density(9, 5)
        phi = map_from_state(rho, (3, 3))
        a = random_hermitian(3, 7)
        direct = partial_trace(rho @ tensor(a, identity(3)), (3, 3), keep=2)
        assert max_norm(apply_map(phi, a) - direct) <= 1e-10


class TestStateFromMap:
    def test_identity_map_assembles_to_swap(self):
        rep = rep_from_action(lambda a: a, 2, 2)
        assert max_norm(state_from_map(rep) - swap_matrix(2)) < 1e-14

    def test_transpose_map_assembles_to_entangled_projector(self):
        rep = transpose_rep(2)
        expected = 2.0 * max_entangled_state(2)
        assert max_norm(state_from_map(rep) - expected) < 1e-14
        assert is_psd(state_from_map(rep)).is_psd

    def test_trace_map(self):
        rep = rep_from_action(lambda a: np.trace(a) * identity(3) / 3, 3, 3)
        assert max_norm(state_from_map(rep) - identity(9) / 3) < 1e-13


class TestApplyMap:
    def test_identity_map(self):
        rep = rep_from_action(lambda a: a, 3, 3)
        a = random_hermitian(3, 3)
        assert max_norm(apply_map(rep, a) - a) < 1e-13

    def test_depolarizing_on_identity(self):
        phi = map_from_state(identity(9) / 9, (3, 3))
        assert max_norm(apply_map(phi, identity(3)) - identity(3) / 3) < 1e-13

    def test_transpose_flips_pauli_y(self):
        rep = transpose_rep(2)
        assert max_norm(apply_map(rep, PAULI_Y) + PAULI_Y) < 1e-14

    def test_dimension_check(self):
        with pytest.raises(DimensionError):
            apply_map(transpose_rep(2), identity(3))


class TestCompletePositivity:
    def test_density_backed_map_is_cp(self):
        phi = map_from_state(random_density(9, 1), (3, 3))
        assert is_completely_positive(phi).is_psd

    def test_swap_backed_map_is_not(self):
        phi = map_from_state(swap_matrix(3) / 3, (3, 3))
        res = is_completely_positive(phi)
        assert not res.is_psd
        assert abs(res.min_eigenvalue - (-1 / 3)) < 1e-12

    def test_depolarizing_is_cp(self):
        res = is_completely_positive(depolarizing_rep(3))
        assert res.is_psd

    @given(st.integers(0, 100))
    @settings(max_examples=40)
    def test_equivalence_with_state_positivity(self, seed):
        rho = unit_trace_hermitian(9, seed) if seed % 2 else random_density(9, seed)
        assert is_psd(rho, 1e-9).is_psd == is_completely_positive(map_from_state(rho, (3, 3)), 1e-9).is_psd


class TestJordanDefect:
    def test_unitary_conjugation(self):
        assert jordan_defect(unitary_conjugation_rep(3, 0)) <= 1e-10

    def test_transpose(self):
        assert jordan_defect(transpose_rep(3)) <= 1e-10

    def test_depolarizing_fails(self):
        rep = depolarizing_rep(3)
        assert jordan_defect(rep) > 0.1
        a = np.diag([1.0, -1.0, 0.0]).astype(complex)
        lhs = apply_map(rep, anticommutator(a, a))
        rhs = anticommutator(apply_map(rep, a), apply_map(rep, a))
        assert max_norm(lhs - rhs) > 0.1


class TestOrientationVerdict:
    def test_unitary_conjugation_preserving(self):
        verdict = orientation_verdict(unitary_conjugation_rep(3, 1))
        assert verdict.tag == "preserving"
        assert verdict.max_defect_preserving <= 1e-10
        assert verdict.max_defect_reversing > 0.1
        assert verdict.finite_time_defect <= 1e-6

    def test_transpose_reversing(self):
        verdict = orientation_verdict(transpose_rep(3))
        assert verdict.tag == "reversing"
        assert verdict.max_defect_reversing <= 1e-10
        assert verdict.finite_time_defect <= 1e-6

    def test_commutative_image_is_degenerate_neither(self):
        verdict = orientation_verdict(depolarizing_rep(3))
        assert verdict.tag == "neither"
        assert verdict.degenerate
        assert verdict.finite_time_defect is None

    def test_generic_map_is_neither(self):
        rep = map_from_state(random_density(9, 4), (3, 3))
        verdict = orientation_verdict(rep)
        assert verdict.tag == "neither"
        assert not verdict.degenerate


class TestTimeFlows:
    @given(st.integers(0, 100))
    def test_reversed_flow_runs_backwards(self, seed):
        rng = np.random.default_rng(seed)
        a = random_hermitian(3, seed)
        b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        t = 0.7
        assert max_norm(reversed_flow(t, a, b) - conjugation_flow(-t, a, b)) <= 1e-10

    def test_flow_pair_signs(self):
        pair = TimeFlowPair()
        a, b = random_hermitian(3, 1), random_hermitian(3, 2)
        assert max_norm(pair.left_flow(0.5, a, b) - conjugation_flow(-0.5, a, b)) < 1e-12
        assert max_norm(pair.right_flow(0.5, a, b) - conjugation_flow(0.5, a, b)) < 1e-12


class TestClassify:
    def test_maximally_entangled(self):
        report = classify(max_entangled_state(3), (3, 3), FAST)
        assert report.verdict == "quantum_state"
        assert report.is_ppt is False
        assert abs(report.min_pt_eigenvalue - (-1 / 3)) < 1e-9
        assert report.orientation.tag == "preserving"
        assert report.orientation.finite_time_defect <= 1e-6

    def test_swap_popt_only(self):
        report = classify(swap_matrix(3) / 3, (3, 3), FAST)
        assert report.verdict == "popt_only"
        assert abs(report.min_eigenvalue - (-1 / 3)) < 1e-9
        assert report.is_ppt is True  # its one-sided transpose is the entangled projector
        assert report.orientation.tag == "reversing"
        assert report.orientation.finite_time_defect <= 1e-6
        assert report.jordan_defect <= 1e-8

    def test_maximally_mixed(self):
        report = classify(identity(9) / 9, (3, 3), FAST)
        assert report.verdict == "quantum_state"
        assert report.is_ppt is True
        assert report.orientation.tag == "preserving"

    def test_not_popt(self):
        rho = unit_trace_hermitian(9, 3)
        assert np.linalg.eigvalsh(rho)[0] < -0.1
        report = classify(rho, (3, 3), FAST)
        assert report.verdict == "not_popt"

    def test_invalid_inputs(self):
        non_herm = np.zeros((9, 9), dtype=complex)
        non_herm[0, 1] = 1.0
        non_herm[0, 0] = 1.0
        report = classify(non_herm, (3, 3), FAST)
        assert report.verdict == "invalid" and not report.is_hermitian
        report = classify(identity(9), (3, 3), FAST)
        assert report.verdict == "invalid"
        assert any("trace" in r for r in report.reasons)

    @given(st.integers(0, 60))
    @settings(max_examples=8)
    def test_orientation_flips_under_one_sided_transpose(self, seed):
        rho = random_density(9, seed)
        assert np.linalg.eigvalsh(partial_transpose(rho, (3, 3), 1))[0] < -1e-6  # NPT fleet
        tag = classify(rho, (3, 3), FAST).orientation.tag
        flipped = classify(partial_transpose(rho, (3, 3), 1), (3, 3), FAST).orientation.tag
        assert {tag, flipped} == {"preserving", "reversing"}

    @given(st.integers(0, 60))
    @settings(max_examples=8)
    def test_double_flip_preserves_everything(self, seed):
        rho = random_density(9, seed)
        both = partial_transpose(partial_transpose(rho, (3, 3), 1), (3, 3), 2)
        a = classify(rho, (3, 3), FAST)
        b = classify(both, (3, 3), FAST)
        assert a.verdict == b.verdict
        assert a.orientation.tag == b.orientation.tag

    def test_report_json_is_complete(self):
        report = classify(swap_matrix(3) / 3, (3, 3), FAST)
        payload = report.to_json()
        for key in ("dims", "trace", "verdict", "is_psd", "min_eigenvalue", "popt", "is_ppt",
                    "min_pt_eigenvalue", "jordan_defect", "orientation", "psd_witness"):
            assert key in payload
        assert payload["popt"]["witness_left"]["re"]


class TestCorrectedMapConvention:
    def test_transpose_input_is_partial_transpose_of_storage(self):
        phi = map_from_state(random_density(9, 9), (3, 3))
        twisted = transpose_input(phi)
        a = random_hermitian(3, 11)
        assert max_norm(apply_map(twisted, a) - apply_map(phi, a.T)) <= 1e-12

    def test_corrected_map_of_density_has_positive_storage(self):
        # the composition with the transpose undoes the storage twist
        rho = random_density(9, 10)
        corrected = transpose_input(map_from_state(rho, (3, 3)))
        assert is_psd(partial_transpose(corrected.choi, (3, 3), 1)).is_psd
