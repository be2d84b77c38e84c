"""Optimization-model construction tests: variable counts, constraint
families, normalizers, and hand-enumerated rows on tiny instances."""

import numpy as np
import pytest

from hyrosched.channel import OWC, RF
from hyrosched.milp import build_model, delay_sentinel
from hyrosched.scenario import GenConfig, Message, generate

from conftest import empty_snr, manual_scenario

EXPECTED_FAMILIES = {
    "one-link-tx",
    "one-link-rx",
    "message-exists",
    "snr-threshold",
    "no-self-loop",
    "no-simultaneous-roles",
    "at-most-once",
    "packet-linearization",
    "energy-budget",
    "delay-extraction",
    "technology-state",
    "switching-limit",
}


def two_device_scenario():
    snr = empty_snr(2, 2)
    snr[0, 1, :, RF] = 1e6
    snr[1, 0, :, RF] = 1e6
    msgs = [Message(0, 1, 0, 0, 1, 2, 3)]
    return manual_scenario(snr, msgs, budgets=[0.05, 0.05])


def test_toy_variable_counts():
    # 2 devices over 2 steps: 2*2*2*2 = 16 assignment and admission variables,
    # 2*2 = 4 state and switch-envelope variables.
    m = build_model(two_device_scenario())
    assert len(m.x) == 16
    assert len(m.a) == 16
    assert len(m.s) == 4
    assert len(m.z) == 4
    assert len(m.y) == 1 and len(m.delta) == 1
    assert len(m.ytilde) == 2 * 2  # both technologies over the 2-step window


def test_constraint_families_complete(default_scenario):
    m = build_model(default_scenario)
    assert {c.family for c in m.constraints} == EXPECTED_FAMILIES


def test_toy_constraint_counts():
    scn = two_device_scenario()
    m = build_model(scn)
    by_family = {}
    for c in m.constraints:
        by_family[c.family] = by_family.get(c.family, 0) + 1
    assert by_family["one-link-tx"] == 2 * 2  # device x step
    assert by_family["one-link-rx"] == 2 * 2
    assert by_family["message-exists"] == 2 * 2 * 2  # ordered pair x step
    assert by_family["snr-threshold"] == 2 * 2 * 2 * 2
    assert by_family["no-self-loop"] == 2 * 2 * 2  # device x tech x step
    assert by_family["at-most-once"] == 1
    assert by_family["packet-linearization"] == 3 * len(m.ytilde)
    assert by_family["energy-budget"] == 2
    # per transmittable step: one upper and one lower row, plus one miss row
    assert by_family["delay-extraction"] == 2 * 2 + 1
    assert by_family["technology-state"] == 4 * 2 * 2
    assert by_family["switching-limit"] == 2 * 2 * 2 + 2


def test_delay_sentinel_rules(default_scenario):
    # widest default window is 4 steps -> sentinel 5
    assert delay_sentinel(default_scenario) == 5
    widest = max(f.window_len for f in default_scenario.messages)
    assert delay_sentinel(default_scenario) == widest + 1
    empty = manual_scenario(empty_snr(2, 3), [], budgets=[0.1, 0.1])
    assert delay_sentinel(empty) == 2


def test_delta_domain_and_objective_coefficients():
    scn = two_device_scenario()
    m = build_model(scn)
    chi = delay_sentinel(scn)
    dv = m.variables[m.delta[0]]
    assert (dv.lb, dv.ub) == (1, chi)
    assert dv.obj == pytest.approx(m.alpha1 / m.s1)
    # throughput coefficients are negative exactly on positive-capacity slots
    for (fi, t, k), idx in m.ytilde.items():
        f = scn.messages[fi]
        if scn.capacity_bps(f.src, f.dst, k, t) > 0:
            assert m.variables[idx].obj < 0
        else:
            assert m.variables[idx].obj == 0.0


def test_normalizers():
    scn = two_device_scenario()
    m = build_model(scn)
    chi = delay_sentinel(scn)
    assert m.s1 == chi * len(scn.messages)
    rates = [
        1.0 / sum(scn.energy_coeffs(f.src, f.dst, k, t))
        for f in scn.messages
        for k in f.steps
        for t in (RF, OWC)
        if scn.capacity_bps(f.src, f.dst, k, t) > 0
    ]
    assert m.s2 == pytest.approx(sum(f.packets for f in scn.messages) * max(rates))


def test_empty_message_set_objective_zero():
    scn = manual_scenario(empty_snr(2, 3), [], budgets=[0.1, 0.1])
    m = build_model(scn)
    assert all(v.obj == 0.0 for v in m.variables)
    assert m.s1 == 1.0 and m.s2 == 1.0


def test_presolve_fixes():
    snr = empty_snr(2, 2)
    snr[0, 1, :, RF] = 1e6  # admissible
    snr[1, 0, :, RF] = 2.0  # possible but far below the 15 dB threshold
    scn = manual_scenario(snr, [Message(0, 1, 0, 0, 1, 2, 2)], budgets=[0.05, 0.05])
    m = build_model(scn)
    for k in (1, 2):
        assert m.presolve_fixes[m.a[0, 1, RF, k]] == 1.0
        assert m.presolve_fixes[m.a[1, 0, RF, k]] == 0.0
        assert m.presolve_fixes[m.x[1, 0, RF, k]] == 0.0
        # diagonal and message-free pairs forced off
        assert m.presolve_fixes[m.x[0, 0, RF, k]] == 0.0
        assert m.presolve_fixes[m.x[1, 0, OWC, k]] == 0.0


def test_ytilde_bounds_capacity_capped():
    snr = empty_snr(2, 1)
    snr[0, 1, :, RF] = 100.0  # 20 dB: admissible, small capacity
    scn = manual_scenario(snr, [Message(0, 1, 0, 0, 1, 1, 1000)],
                          budgets=[10.0, 10.0])
    m = build_model(scn)
    cap = scn.packet_capacity(0, 1, 1, RF)
    assert cap < 1000
    v = m.variables[m.ytilde[0, RF, 1]]
    assert v.ub == pytest.approx(cap)


def test_omega_default_and_override(default_scenario):
    assert build_model(default_scenario).omega == default_scenario.horizon // 2
    assert build_model(default_scenario, omega=2).omega == 2
