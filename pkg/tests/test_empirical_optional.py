"""Optional integration test against a user-supplied state incidence panel.

The package bundles no data.  To run this test, point the environment
variable SYNTHCONF_EMPIRICAL_CSV at a wide-layout CSV of log incidence per
100,000 with one column per state (treated unit "RI" by default, 19
pre-treatment years, 6 post-treatment years, 50 controls).  Without the
file the test is skipped; with it, the zero-effect null is tested with the
three regression estimators under both permutation schemes and the
p-values are compared against their published reference values.
"""

import os

import numpy as np
import pytest

import synthconf as sc

CSV_PATH = os.environ.get("SYNTHCONF_EMPIRICAL_CSV", "")
TREATED = os.environ.get("SYNTHCONF_EMPIRICAL_TREATED", "RI")
T0 = int(os.environ.get("SYNTHCONF_EMPIRICAL_T0", "19"))

pytestmark = pytest.mark.skipif(
    not (CSV_PATH and os.path.exists(CSV_PATH)),
    reason="set SYNTHCONF_EMPIRICAL_CSV to the state panel CSV to run",
)

# (estimator, moving-block target, sampled-iid target)
REFERENCE = [
    (sc.EstimatorSpec.did(), 0.08, 0.01),
    (sc.EstimatorSpec.sc(), 0.04, 0.03),
    (sc.EstimatorSpec.classo(), 0.08, 0.02),
]


@pytest.fixture(scope="module")
def panel():
    loaded = sc.read_panel_csv(CSV_PATH, layout="wide", t0=T0, treated=TREATED)
    assert loaded.n_post == 6
    return loaded


@pytest.mark.parametrize("spec,target,_", REFERENCE, ids=lambda v: str(v))
def test_zero_effect_moving_block(panel, spec, target, _):
    zero = np.zeros(panel.n_post)
    result = sc.test_sharp_null(panel, zero, spec)
    print(f"{spec.label}: moving-block p={result.p_value:.3f} (reference {target})")
    assert result.p_value == pytest.approx(target, abs=0.02)


@pytest.mark.parametrize("spec,_,target", REFERENCE, ids=lambda v: str(v))
def test_zero_effect_sampled_iid(panel, spec, _, target):
    zero = np.zeros(panel.n_post)
    scheme = sc.PermutationScheme.iid_sampled(n_samples=5000, seed=0)
    result = sc.test_sharp_null(panel, zero, spec, scheme)
    print(f"{spec.label}: sampled-iid p={result.p_value:.4f} (reference {target})")
    assert result.p_value == pytest.approx(target, abs=0.02)


def test_placebo_checks_run(panel):
    for tau in (1, 2, 3):
        result = sc.placebo_test(panel, tau, sc.EstimatorSpec.classo())
        assert 0 < result.p_value <= 1
