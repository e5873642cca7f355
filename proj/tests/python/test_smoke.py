import math
import os

import numpy as np
import pytest

import homopt

CONFIGS = os.environ.get(
    "HOMOPT_CONFIG_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "configs"),
)


def test_norm_is_homogeneous():
    w = [1.0, 3.0]
    x = np.array([0.3, -0.7])
    g = homopt.hom_norm(w, 6.0, x)
    for eps in (0.5, 2.0):
        assert homopt.hom_norm(w, 6.0, homopt.dilate(w, eps, x)) == pytest.approx(eps * g, rel=1e-12)


def test_lf_transform_quadratic_is_self_dual():
    a, p = homopt.lf_transform(0.5, 2.0)
    assert (a, p) == pytest.approx((0.5, 2.0))


def test_parse_expr_rational_exponent():
    f = homopt.parse_expr("x1^1/3 + 0.25*x2^4", 2)
    assert f(np.array([8.0, 2.0])) == pytest.approx(2.0 + 4.0)


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        homopt.parse_expr("x1 +", 1)


def test_synthesize_example4():
    s = homopt.synthesize_example("ex4")
    assert s.kappa == 11.0
    c = s.constants
    assert c["rho"] > 0 and c["rho_m"] > 0
    x = np.array([0.4, -0.2])
    assert s.l(x) > 0 and s.H_kappa(x) > 0
    assert s.alpha_star(np.zeros(2)) == 0.0


def test_synthesize_rejects_zero_theta():
    with pytest.raises(homopt.SynthesisError, match="theta=0"):
        homopt.synthesize_config(os.path.join(CONFIGS, "ex1.json"))


def test_worst_case_trajectory_decreases_v():
    s = homopt.synthesize_example("ex4")
    tr = homopt.simulate_worst_case(s, np.array([1.0, 0.0]), 5.0, 1e-8)
    assert tr["x"].shape[1] == 2
    assert tr["V"][-1] < tr["V"][0]
    assert math.isfinite(tr["J"])


def test_criterion_one():
    r = homopt.run_criterion(1)
    assert r["pass"], r["detail"]


def test_cli_exit_codes():
    code, _, _ = homopt.run_cli(["validate", os.path.join(CONFIGS, "ex4.json")])
    assert code == 0
    code, _, err = homopt.run_cli(["validate", "/does/not/exist.json"])
    assert code == 2 and err
