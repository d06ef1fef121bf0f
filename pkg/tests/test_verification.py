import json
import math

import numpy as np
import pytest

from roughfrac.errors import DominationViolation, PreconditionFailed
from roughfrac.geometry import Grid, GridFunction, derive_params
from roughfrac.sphere import RoughKernel
from roughfrac.verification import (
    BoundednessReport, Setting, TestFunctionFamily, check_weight_class, default_family, domination_constant,
    experiment_corollary, experiment_thm_1_2, experiment_thm_1_3, experiment_thm_A_B, experiment_thm_D,
    extend_family, identity_gap, suite_identities,
)
from roughfrac.weights import Weight, power_weight_apq_range

G = Grid(2, 2.0, 32)
PARAMS = derive_params(2, 0.5, 2.0, 3.0, 0.1)
SIGN = RoughKernel.tabulate(2, "sign(cos(theta))", 64)
LOGR = lambda g: GridFunction.from_callable(g, lambda x, y: np.log(np.hypot(x, y)))  # noqa: E731


def setting(weight=None, funcs=None, **kw):
    return Setting(
        params=PARAMS, weight=weight or Weight.power((0.0, 0.0), 0.1), kernel=SIGN, family=default_family(G),
        funcs=funcs or TestFunctionFamily("mixed", 0, 4), grid=G, **kw,
    )


def test_members_are_grid_independent_functions():
    fam = TestFunctionFamily("mixed", 3, 8)
    assert fam.function_id(5) == "power_bump-3-5"
    fine = G.refined(2)
    for i in (0, 2, 3):
        a = fam.member(G, i).values
        b = fam.member(fine, i).values
        # indicator / gaussian / blocks: coarse cells agree with one of their children
        assert np.mean(np.isclose(a, b[::2, ::2]) | np.isclose(a, b[1::2, 1::2])) > 0.9
    assert np.array_equal(TestFunctionFamily("mixed", 3, 2).member(G, 1).values, fam.member(G, 1).values)
    assert not np.array_equal(TestFunctionFamily("mixed", 4, 2).member(G, 1).values, fam.member(G, 1).values)


def test_random_cells_support():
    f = TestFunctionFamily("random_cells", 0, 1).member(G, 0)
    X, Y = G.coords()
    assert not np.any(f.values[(np.abs(X) >= 1) | (np.abs(Y) >= 1)])


def test_unknown_generator():
    with pytest.raises(ValueError):
        TestFunctionFamily("spiky")


def test_extend_family_halves_radius():
    fam = default_family(G)
    ext = extend_family(fam, G.refined(2))
    assert ext.radii_array().min() == pytest.approx(fam.radii_array().min() / 2)
    with pytest.raises(ValueError):
        extend_family(fam, G)


def test_report_shape_and_homogeneity():
    rep = experiment_thm_1_2(setting())
    assert rep.experiment == "1.2" and len(rep.rows) == 4 and rep.ratios_finite
    assert set(rep.max_ratio) == {"coarse", "fine"}
    body = rep.body()
    for key in ("params", "weight", "kernel", "rows", "stability_factor", "family_extension_factor", "provenance"):
        assert key in body
    assert rep.to_csv().splitlines()[0] == "experiment,function_id,skipped,ratio_coarse,ratio_fine,ratio_extended"
    scaled = experiment_thm_1_2(setting(funcs=TestFunctionFamily("mixed", 0, 4, scale=7.5)))
    for a, b in zip(rep.rows, scaled.rows):
        assert b["ratio_fine"] == pytest.approx(a["ratio_fine"], rel=1e-10)


def test_zero_functions_are_skipped():
    rep = experiment_thm_1_2(setting(funcs=TestFunctionFamily("indicator", 0, 2, scale=0.0)))
    assert all(r["skipped"] for r in rep.rows)
    assert rep.max_ratio == {"coarse": 0.0, "fine": 0.0} and rep.stability_factor == 1.0


def test_determinism():
    a = json.dumps(experiment_thm_1_2(setting()).body(), sort_keys=True)
    b = json.dumps(experiment_thm_1_2(setting()).body(), sort_keys=True)
    assert a == b
    assert "timestamp" in json.loads(experiment_thm_D(setting()).to_json())
    assert "timestamp" not in json.loads(experiment_thm_D(setting()).to_json(timestamp=False))


def test_verdict_requires_finite_factors():
    rep = experiment_thm_A_B(setting())
    rep.stability_factor = math.inf
    assert not rep.passed and rep.verdict == "fail"


def test_weight_precondition():
    sp = PARAMS.s_prime
    lo, hi = power_weight_apq_range(2, PARAMS.p1, PARAMS.q1)
    # w^{s'} with w = |x|^beta is |x|^{beta s'}
    check_weight_class(Weight.power((0.0, 0.0), 0.1 * sp), PARAMS.p1, PARAMS.q1, G)
    with pytest.raises(PreconditionFailed):
        experiment_thm_1_2(setting(weight=Weight.power((0.0, 0.0), (hi + 1.0) / sp)))
    with pytest.raises(PreconditionFailed):
        experiment_thm_1_2(setting(weight=Weight.power((0.0, 0.0), (lo - 1.0) / sp)))


def test_commutator_experiments():
    rep = experiment_thm_1_3(setting(), LOGR)
    assert rep.ratios_finite and rep.extra["bmo"]["growth"] <= 1.2
    const = experiment_thm_1_3(setting(), lambda g: GridFunction(g, np.full(g.shape, 2.0)))
    assert all(r["ratio_coarse"] == 0.0 and r["ratio_fine"] == 0.0 for r in const.rows)
    cor = experiment_corollary(setting(), LOGR)
    dom = cor.extra["domination"]
    assert dom["violations"] == 0 and dom["uses_abs_kernel"] and dom["checked_cells"] == 4 * (32**2 + 64**2)
    with pytest.raises(DominationViolation):
        experiment_corollary(setting(), LOGR, slack=-0.99)


def test_bmo_precondition_rejects_growing_b():
    # singularity at a family centre, where the halved balls see it
    c = sorted({b.center for b in default_family(G)})[3]
    spike = lambda g: GridFunction.from_callable(g, lambda x, y: np.hypot(x - c[0], y - c[1]) ** -0.5)  # noqa: E731
    with pytest.raises(PreconditionFailed):
        experiment_thm_1_3(setting(), spike)


def test_identity_gap_and_constant():
    fam = default_family(G)
    f = TestFunctionFamily("random_cells", 1, 1).member(G, 0)
    assert identity_gap(f, 0.3, 4.0, fam) == 0.0
    # s = inf: |B|^(alpha/n) with the full Omega norm
    assert domination_constant(2, math.inf, 0.5) == pytest.approx(math.pi ** 0.75, rel=1e-15)


def test_suite_passes():
    g = Grid(2, 2.0, 64)
    rep = suite_identities(g, default_family(g), seed=0, count=2)
    assert rep.passed, rep.failing()
    assert {r["name"] for r in rep.rows} >= {"maximal_identity", "holder_domination", "rh_subset"}
    assert rep.to_csv().startswith("name,passed,margin")


def test_report_round_trip_json():
    rep = experiment_thm_A_B(setting())
    assert isinstance(rep, BoundednessReport)
    d = json.loads(rep.to_json())
    assert d["experiment"] == "A" and d["verdict"] in ("pass", "fail")
