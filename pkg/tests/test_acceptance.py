"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
"""
import sys
import time

import pytest

from ctsb import experiments as ex
from ctsb.params import TransformParams


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


def _metrics(rep, *names):
    ms = [rep.metric(n) for n in names]
    return all(m.passed for m in ms), ", ".join(f"{m.name}={m.value:.3e}" for m in ms)


def criterion_1():
    rep, dt = _timed(ex.euclid_isometry, d_values=(1, 2), max_degree=6, n_points=20)
    ok, msg = _metrics(rep, "isometry_rel_err_max")
    return ok and dt < 5, f"{msg}, runtime={dt:.2f}s (< 5s)"


def criterion_2():
    rep, dt = _timed(ex.euclid_ratio, n_points=10)
    ok, msg = _metrics(rep, "ratio_rel_err_max")
    return ok and dt < 10, f"{msg}, runtime={dt:.2f}s (< 10s)"


def criterion_3():
    return _metrics(ex.euclid_ratio(n_points=10), "mu_mass_err_max", "mu_tt_pointwise_err_max")


_su2 = {}


def _su2_report():
    if "rep" not in _su2:
        _su2["rep"], _su2["dt"] = _timed(ex.su2_isometry, n_values=range(1, 6), n_A=5, n_points=20)
    return _su2["rep"], _su2["dt"]


def criterion_4():
    rep, dt = _su2_report()
    ok, msg = _metrics(rep, "isometry_rel_err_max")
    return ok and dt < 30, f"{msg}, runtime={dt:.2f}s (< 30s)"


def criterion_5():
    rep, _ = _su2_report()
    return _metrics(rep, "decomposition_residual_max", "commutator_norm_max")


def criterion_6():
    rep, dt = _timed(ex.transform_equiv, n_values=(1, 2, 3), n_z=5,
                     taus=(1.0, 1 + 0.5j, 1 - 0.5j), order=48, radius=0.5)
    ok, msg = _metrics(rep, "convolution_rel_err_max")
    return ok and dt < 60, f"{msg}, runtime={dt:.2f}s (< 60s)"


def criterion_7():
    rep = ex.heatk_properties(identity_ts=(0.5, 0.1, 0.02), order=48)
    return _metrics(rep, "mass_err_max", "semigroup_err_max", "inversion_err_max",
                    "conjugation_rel_err_max", "approx_identity_err_ratio_max")


def criterion_8():
    rep, dt = _timed(ex.nu_invariance, n_paths=200_000, n_steps=200)
    ok, msg = _metrics(rep, "pair_z_score_max", "control_z_score_min")
    return ok and dt < 120, f"{msg}, runtime={dt:.1f}s (< 120s)"


def criterion_9():
    # exact part on a single point; the Monte Carlo part runs its own six combinations
    p = TransformParams.make(1.0, 1.0, 0.0).check()
    rep = ex.su2_isometry(n_values=(1,), n_A=1, points=[p], mc=True, mc_paths=100_000, mc_steps=200)
    return _metrics(rep, "mc_z_score_max")


def criterion_10():
    rep = ex.large_s(trend_s=(1.0, 2.0, 4.0, 8.0), n_entries=3)
    ok, msg = _metrics(rep, "decay_rate_rel_err", "norm_gap_ratio_max")
    return ok, f"fitted_rate={rep.inputs['fitted_rate']:.4f}, {msg}"


def criterion_11():
    return _metrics(ex.uncertainty(n_states=10), "schrodinger_defect_max")


def criterion_12():
    return _metrics(ex.params_roundtrip(), "phi_roundtrip_err_max", "labc_vs_delta_stau_rel_max",
                    "ad_invariance_rel_max", "trace_formula_rel_max")


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 13)}


def _line(i, ok, msg):
    return f"{'PASS' if ok else 'FAIL'} criterion {i}: {msg}"


@pytest.mark.parametrize("i", list(CRITERIA))
def test_criterion(i, capsys):
    ok, msg = CRITERIA[i]()
    with capsys.disabled():
        print("\n" + _line(i, ok, msg))
    assert ok, msg


if __name__ == "__main__":
    results = [(i, *CRITERIA[i]()) for i in CRITERIA]
    for r in results:
        print(_line(*r), flush=True)
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
