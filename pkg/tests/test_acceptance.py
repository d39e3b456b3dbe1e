"""Acceptance gate: the twelve numbered criteria, one test each.

Two criteria fail by design and are left red on purpose; their tests carry
the analysis in the assertion message rather than an xfail marker, so the
failure stays visible:

* criterion 10 -- the non-resonant defect ||Sigma_eps(lam) - I|| is O(eps),
  not O(eps^2): the kappa B_bb^(1) boundary term survives at first order.
  The corrected quantity ||Sigma - I - kappa B_bb^(1)|| does show slope 2,
  and the criterion detail string reports both slopes.
* criterion 12 -- the stage-one scalar at mu = -1 is +1/4, not the -1/4
  demanded for both half-bound states: the reduction carries gamma(-1) = -1
  through the sign of the first-order term.  The value -1/4 is reproduced
  exactly at mu = +1.
"""

import pytest

from tailwalk import acceptance


@pytest.fixture(scope="module")
def results():
    return {r.cid: r for r in acceptance.run_all()}


@pytest.mark.parametrize(
    "cid", [c[0] for c in acceptance._CRITERIA], ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in acceptance._CRITERIA]
)
def test_criterion(cid, results):
    r = results[cid]
    print(r.line())
    if r.status == "skip":
        pytest.skip(r.detail)
    assert r.status == "pass", r.line()


def test_every_criterion_reports(results):
    assert sorted(results) == list(range(1, 13))
    for r in results.values():
        assert r.detail  # a bare pass/fail with no numbers is useless
        assert r.elapsed < 60.0


def test_fixture_filter_restricts_scope():
    r = acceptance.run_criterion(1, fixture="k4-3tails")
    assert r.status == "skip"


def test_residual_tol_is_honoured():
    # an absurdly tight tolerance must flip criterion 5 to fail, proving the
    # knob reaches the check rather than decorating it
    r = acceptance.run_criterion(5, residual_tol=1e-30)
    assert r.status == "fail"
