import json
import math

import numpy as np
import pytest

from latfree.construct import make_params
from latfree.errors import ConvergenceError, VerificationError
from latfree.extremal import (
    ExtremalSimplex,
    OptimizerConfig,
    build_delta4,
    build_delta5,
    optimize_a,
    perturbation_probe,
    verify_extremal,
)
from latfree.scalar import adjoin_sqrt
from latfree.width import alpha_formula

import oracles


def test_delta_constructions():
    for build, d in ((build_delta4, 4), (build_delta5, 5)):
        s = build()
        assert s.dim == d and len(s.vertices) == d + 1
        assert all(sum(v) == 1 for v in s.vertices)
        assert len({tuple(x.decimal(30) for x in v) for v in s.vertices}) == d + 1


def test_claimed_widths():
    s4, s5 = build_delta4(), build_delta5()
    assert s4.claimed_width.decimal(8) == "4.7527638"
    assert s5.claimed_width.decimal(8) == "6.1547005"
    # the coordinate gap v_1 - v_{d+1} equals the claimed width for both
    assert s4.v[0] - s4.v[-1] == s4.claimed_width
    assert s5.v[0] - s5.v[-1] == 5 + 2 * adjoin_sqrt(3) / 3


def test_delta5_decimals():
    v = build_delta5().v
    assert round(float(v[0]), 4) == 2.4931
    assert round(float(v[-1]), 4) == -3.6616


def test_verify_extremal():
    for build in (build_delta4, build_delta5):
        s = build()
        ver = verify_extremal(s)
        assert ver.exact_match
        assert ver.width.value == s.claimed_width
        assert ver.width.path == "enumeration"
        assert ver.certificate.kind == "monotone_a"
        assert ver.enumeration.payload["empty_interior"]
        assert ver.width.value > ver.alpha
        json.dumps(ver.to_json())


def test_verify_extremal_reports_mismatch():
    s = build_delta4()
    wrong = ExtremalSimplex(s.dim, s.vertices, s.claimed_width + 1)
    with pytest.raises(VerificationError) as info:
        verify_extremal(wrong)
    assert "claimed" in info.value.details


def test_probe_zero_epsilon_keeps_width():
    s = build_delta4()
    report = perturbation_probe(s, 0, 3, seed=1, full_width=True)
    assert report.lattice_free == 3 and report.violations == 0
    assert all(r["width"] == s.claimed_width.decimal(20) for r in report.records)


def test_probe_is_deterministic():
    s = build_delta5()
    r1 = perturbation_probe(s, 1e-3, 5, seed=3)
    r2 = perturbation_probe(s, 1e-3, 5, seed=3)
    assert r1.to_json() == r2.to_json()
    with pytest.raises(ValueError):
        perturbation_probe(s, -1.0, 1, seed=0)


@pytest.mark.parametrize(
    "d, target",
    [(2, 1 + 2 / math.sqrt(3)), (3, 2 + math.sqrt(2)), (4, 2 + 2 * math.sqrt(1 + 2 / math.sqrt(5))),
     (5, 5 + 2 / math.sqrt(3))],
)
def test_optimizer_reaches_known_values(d, target):
    res = optimize_a(d)
    assert abs(res.objective - target) < 1e-6
    assert abs(res.gap - res.objective) < 1e-9
    assert res.monotone
    assert res.a_star[0] == 0 and res.a_star[-1] == 1
    assert res.residual < 1e-10


def test_optimizer_d4_recovers_delta4_a():
    from latfree.certify import recover_a

    a = [float(x) for x in recover_a(build_delta4().vertices)]
    assert np.allclose(optimize_a(4).a_star, a, atol=1e-6)


def test_optimizer_d6_is_not_monotone():
    res = optimize_a(6)
    assert not res.monotone
    assert np.min(np.diff(res.a_star)) < -1e-3
    assert res.objective >= float(alpha_formula(make_params(6)).alpha)


def test_optimizer_objective_bounded_below_by_family():
    for d in (2, 3, 4, 5, 6, 8):
        res = optimize_a(d)
        assert res.objective >= float(oracles.alpha(d)) - 1e-9


def test_optimizer_config_json():
    cfg = OptimizerConfig.from_json('{"tolerance": 1e-10, "seed": 4}')
    assert cfg.tolerance == 1e-10 and cfg.seed == 4
    assert OptimizerConfig.from_json(json.dumps(cfg.to_json())) == cfg
    with pytest.raises(ValueError):
        OptimizerConfig.from_json('{"bogus": 1}')


def test_optimizer_is_deterministic():
    cfg = OptimizerConfig(start_jitter=1e-3, seed=11)
    r1, r2 = optimize_a(4, cfg), optimize_a(4, cfg)
    assert json.dumps(r1.to_json()) == json.dumps(r2.to_json())


def test_optimizer_round_budget():
    with pytest.raises(ConvergenceError) as info:
        optimize_a(5, OptimizerConfig(max_rounds=0))
    assert info.value.best["objective"] >= float(oracles.alpha(5)) - 1e-9
    assert info.value.trace


def test_optimizer_input_checks():
    with pytest.raises(ValueError):
        optimize_a(1)
    with pytest.raises(ValueError):
        optimize_a(3, OptimizerConfig(start=[0, 1]))
