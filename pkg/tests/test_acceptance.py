"""Acceptance suite: every release criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS lines.
Fleet seeds are fixed; fleet preconditions (e.g. one-sided-transpose
negativity where a definite orientation is required) are asserted, not
assumed.
"""

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import unit_trace_hermitian
from poptlab.bell import TSIRELSON, chsh_table_value, optimize_chsh, pr_box_table, singlet_state
from poptlab.contexts import ContextSamplePlan
from poptlab.dilation import POVM, naimark_dilate, orthomorphism_check, stinespring_dilate
from poptlab.errors import NotCompletelyPositive
from poptlab.fixtures import (
    haar_state_vector,
    planted_contextual_table,
    planted_signalling_table,
    random_density,
    random_povm,
    swap_matrix,
    trine_povm,
    werner_family,
)
from poptlab.jordan import (
    ClassifyConfig,
    classify,
    is_completely_positive,
    jordan_defect,
    map_from_state,
    orientation_verdict,
    rep_from_action,
    transpose_input,
)
from poptlab.measures import (
    OperatorBackedMeasure,
    check_no_disturbance,
    check_no_disturbance_operator,
    check_no_signalling,
    check_popt,
    gleason_extend,
    oracle_from_grid,
    tabulate_tomography_grid,
)
from poptlab.operator_core import dagger, identity, is_psd, max_norm, partial_transpose, tensor

CFG = ClassifyConfig(restarts=32, samples=25)


def report(criterion: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {criterion} {name}: {status}{suffix}")
    assert ok, f"criterion {criterion} failed: {name} {suffix}"


def npt_density(seed: int) -> np.ndarray:
    """Fleet state with a definite orientation: density matrix whose one-sided
    transpose is negative (asserted)."""
    rho = random_density(9, seed)
    assert np.linalg.eigvalsh(partial_transpose(rho, (3, 3), 1))[0] < -1e-8
    return rho


def test_criterion_1_reconstruction_roundtrip():
    start = time.time()
    worst = 0.0
    for k in range(100):
        if k % 2 == 0:
            rho = random_density(9, 1000 + k)
        else:
            rho = unit_trace_hermitian(9, 1000 + k)
        mu = OperatorBackedMeasure(rho, (3, 3))
        oracle, dims, missing = oracle_from_grid(tabulate_tomography_grid(mu))
        assert not missing
        rec = gleason_extend(oracle, dims)
        worst = max(worst, max_norm(rec - rho))
    elapsed = time.time() - start
    report(
        1,
        "measure-to-operator roundtrip on 100 states",
        worst <= 1e-8 and elapsed <= 60.0,
        f"worst error {worst:.2e}, {elapsed:.1f}s",
    )


def test_criterion_2_swap_separation_exhibit():
    rho = swap_matrix(3) / 3
    verdict = classify(rho, (3, 3), CFG)
    cert = check_popt(rho, (3, 3), restarts=64, tol=1e-8, seed=0)
    ok = (
        verdict.verdict == "popt_only"
        and abs(verdict.min_eigenvalue - (-1.0 / 3.0)) <= 1e-9
        and cert.min_value >= -1e-8
    )
    report(2, "swap/3 is positive on products but not positive", ok,
           f"min eig {verdict.min_eigenvalue:.10f}, product min {cert.min_value:.2e}")


def test_criterion_3_positivity_matches_complete_positivity():
    disagreements = 0
    checked = 0
    for seed in range(50):  # PSD half
        rho = random_density(9, 2000 + seed)
        a = is_psd(rho, 1e-9).is_psd
        b = is_completely_positive(map_from_state(rho, (3, 3)), 1e-9).is_psd
        checked += 1
        disagreements += a != b or not a
    for seed in range(50):  # non-PSD half
        rho = unit_trace_hermitian(9, 3000 + seed)
        if seed % 5 == 0:
            rho = swap_matrix(3) / 3 if seed % 10 == 0 else partial_transpose(
                np.outer(haar_state_vector(9, seed), haar_state_vector(9, seed).conj()), (3, 3), 1
            )
        assert not is_psd(rho, 1e-9).is_psd
        b = is_completely_positive(map_from_state(rho, (3, 3)), 1e-9).is_psd
        checked += 1
        disagreements += b
    report(3, "state positivity = complete positivity of the corrected map",
           checked == 100 and disagreements == 0, f"{checked} fixtures, {disagreements} disagreements")


def _lifted_action(rho: np.ndarray, transpose_first: bool):
    phi = map_from_state(rho, (3, 3))
    target = phi if transpose_first else transpose_input(phi)
    dil = stinespring_dilate(target, require_cp=True)
    m, u = dil.multiplicity, dil.representation_unitary
    if transpose_first:
        return (lambda a: u @ tensor(np.asarray(a).T, identity(m)) @ dagger(u)), m
    return (lambda a: u @ tensor(a, identity(m)) @ dagger(u)), m


def test_criterion_4_dilation_chain_and_orientation_separator():
    preserving_ok = 0
    for seed in range(25):
        rho = npt_density(4000 + seed)
        lift, m = _lifted_action(rho, transpose_first=False)
        rep = rep_from_action(lift, 3, 3 * m)
        ortho = orthomorphism_check(lift, dim=3, samples=30, seed=seed)
        chain = (
            ortho.max_defect <= 1e-8
            and jordan_defect(rep, samples=30, seed=seed) <= 1e-8
            and orientation_verdict(rep, samples=30, seed=seed).tag == "preserving"
            and classify(rho, (3, 3), CFG).orientation.tag == "preserving"
        )
        preserving_ok += chain
    reversing_ok = 0
    for seed in range(25):
        twisted = partial_transpose(npt_density(4000 + seed), (3, 3), side=1)
        with pytest.raises(NotCompletelyPositive):
            stinespring_dilate(transpose_input(map_from_state(twisted, (3, 3))))
        lift, m = _lifted_action(twisted, transpose_first=True)
        rep = rep_from_action(lift, 3, 3 * m)
        ortho = orthomorphism_check(lift, dim=3, samples=30, seed=seed)
        chain = (
            ortho.max_defect <= 1e-8
            and jordan_defect(rep, samples=30, seed=seed) <= 1e-8
            and orientation_verdict(rep, samples=30, seed=seed).tag == "reversing"
            and classify(twisted, (3, 3), CFG).orientation.tag == "reversing"
        )
        reversing_ok += chain
    report(4, "dilation chain on 25 states and the orientation separator on their twists",
           preserving_ok == 25 and reversing_ok == 25,
           f"{preserving_ok}/25 preserving, {reversing_ok}/25 reversing")


def _orientation_fleet():
    """50 fixtures whose one-sided transpose is negative, so orientation is definite."""
    fleet = [npt_density(5000 + s) for s in range(30)]
    for s in range(10):
        psi = haar_state_vector(9, 5100 + s)
        rho = np.outer(psi, psi.conj())
        assert np.linalg.eigvalsh(partial_transpose(rho, (3, 3), 1))[0] < -1e-8
        fleet.append(rho)
    for p in np.linspace(-0.95, -0.4, 10):
        rho = werner_family(3, float(p))
        assert np.linalg.eigvalsh(partial_transpose(rho, (3, 3), 1))[0] < -1e-8
        fleet.append(rho)
    return fleet


def test_criterion_5_orientation_involution():
    fleet = _orientation_fleet()
    double_ok = single_ok = 0
    for rho in fleet:
        base = classify(rho, (3, 3), CFG)
        both_sides = partial_transpose(partial_transpose(rho, (3, 3), 1), (3, 3), 2)
        restored = classify(both_sides, (3, 3), CFG)
        double_ok += restored.verdict == base.verdict and restored.orientation.tag == base.orientation.tag
        flipped = classify(partial_transpose(rho, (3, 3), 1), (3, 3), CFG)
        single_ok += {base.orientation.tag, flipped.orientation.tag} == {"preserving", "reversing"}
    report(5, "double flip restores, single flip toggles, on 50 fixtures",
           double_ok == 50 and single_ok == 50, f"double {double_ok}/50, single {single_ok}/50")


def test_criterion_6_constraint_checkers():
    mu = OperatorBackedMeasure(random_density(9, 6000), (3, 3))
    ns = check_no_signalling(mu, ContextSamplePlan(n_random=200, seed=1), tol=1e-10)
    nd = check_no_disturbance_operator(mu, n_families=50, seed=2, tol=1e-10)
    sig = check_no_signalling(planted_signalling_table(0.05))
    ctx = planted_contextual_table(0.05)
    ctx_ns = check_no_signalling(ctx)
    ctx_nd = check_no_disturbance(ctx)
    ok = (
        ns.satisfied
        and nd.satisfied
        and not sig.satisfied
        and abs(sig.max_violation - 0.05) <= 1e-12
        and ctx_ns.satisfied
        and not ctx_nd.satisfied
        and abs(ctx_nd.max_violation - 0.05) <= 1e-12
    )
    report(6, "operator measures pass, planted violations caught at magnitude", ok,
           f"operator NS {ns.max_violation:.1e}, ND {nd.max_violation:.1e}, "
           f"planted {sig.max_violation:.12f}/{ctx_nd.max_violation:.12f}")


def _popt_certified_fleet(count: int = 200):
    kinds = ["ginibre_mixed", "haar_pure", "pt_of_ginibre", "pt_of_haar", "werner", "swap"]
    fleet = []
    k = 0
    while len(fleet) < count:
        kind = kinds[k % len(kinds)]
        seed = 7000 + k
        if kind == "ginibre_mixed":
            rho = random_density(9, seed)
        elif kind == "haar_pure":
            psi = haar_state_vector(9, seed)
            rho = np.outer(psi, psi.conj())
        elif kind == "pt_of_ginibre":
            rho = partial_transpose(random_density(9, seed), (3, 3), 1)
        elif kind == "pt_of_haar":
            psi = haar_state_vector(9, seed)
            rho = partial_transpose(np.outer(psi, psi.conj()), (3, 3), 1)
        elif kind == "werner":
            rho = werner_family(3, float(np.cos(k)))
        else:
            rho = swap_matrix(3) / 3
        cert = check_popt(rho, (3, 3), restarts=8, tol=1e-8, seed=seed)
        assert cert.is_popt, f"fleet member {kind}/{seed} is not product-positive"
        fleet.append(rho)
        k += 1
    return fleet


def test_criterion_7_bell_layer():
    singlet = optimize_chsh(singlet_state(), (2, 2), restarts=64, seed=0)
    pr = pr_box_table()
    pr_ns = check_no_signalling(pr)
    sweep_max = max(
        optimize_chsh(rho, (3, 3), restarts=8, seed=i).value
        for i, rho in enumerate(_popt_certified_fleet(200))
    )
    ok = (
        abs(singlet.value - TSIRELSON) <= 1e-3
        and chsh_table_value(pr) == 4.0
        and pr_ns.satisfied
        and sweep_max <= TSIRELSON + 1e-3
    )
    report(7, "singlet ceiling, PR box, and the 200-state product-positive sweep", ok,
           f"singlet {singlet.value:.6f}, sweep max {sweep_max:.6f}")


def test_criterion_8_naimark_residuals():
    def residual(elements):
        dil = naimark_dilate(POVM(tuple(elements)))
        return max(max_norm(dagger(dil.v) @ q @ dil.v - e) for q, e in zip(dil.pvm_K, elements))

    worst = residual(trine_povm())
    rng = np.random.default_rng(8000)
    for k in range(50):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(2, 6))
        worst = max(worst, residual(random_povm(d, n, 8000 + k)))
    report(8, "trine and 50 random POVMs compress within 1e-8", worst <= 1e-8, f"worst {worst:.2e}")


def test_criterion_9_cli_determinism(tmp_path):
    from poptlab.measures import scenario_to_json
    from poptlab.serialize import state_to_json

    swap_path = tmp_path / "swap.json"
    swap_path.write_text(json.dumps(state_to_json(swap_matrix(3) / 3, (3, 3))))
    singlet_path = tmp_path / "singlet.json"
    singlet_path.write_text(json.dumps(state_to_json(singlet_state(), (2, 2))))
    sig_path = tmp_path / "sig.json"
    sig_path.write_text(json.dumps(scenario_to_json(planted_signalling_table(0.05))))

    invocations = [
        ["classify", str(swap_path), "--seed", "3", "--restarts", "8", "--samples", "10"],
        ["generate", "ginibre_mixed", "--seed", "4"],
        ["chsh", str(singlet_path), "--seed", "5", "--restarts", "8"],
        ["check", str(sig_path), "--constraint", "no-signalling"],
        ["extend", str(_grid_file(tmp_path))],
    ]
    stable = True
    for argv in invocations:
        runs = [
            subprocess.run([sys.executable, "-m", "poptlab.cli", *argv], capture_output=True)
            for _ in range(2)
        ]
        stable = stable and runs[0].stdout == runs[1].stdout and runs[0].stdout != b""
    report(9, "repeated CLI runs are byte-identical", stable, f"{len(invocations)} commands x 2 runs")


def _grid_file(tmp_path):
    mu = OperatorBackedMeasure(random_density(9, 9000), (3, 3))
    path = tmp_path / "grid.json"
    path.write_text(json.dumps(tabulate_tomography_grid(mu)))
    return path
