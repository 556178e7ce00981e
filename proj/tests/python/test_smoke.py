"""End-to-end smoke test of the python bindings: every exported name is
exercised once with cheap configurations. Runs as a plain script."""

import json
import math
import tempfile
from pathlib import Path

import numpy as np

import alspce


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    assert alspce.__version__

    # Marginals and the input model.
    lognormal = alspce.Marginal.lognormal_from_moments(5.0, 0.8)
    assert close(lognormal.mean(), 5.0) and close(lognormal.stddev(), 0.8)
    assert lognormal.family == "lognormal"
    u = alspce.Marginal.uniform(0.0, 2.0)
    assert u.family == "uniform" and u.params == [0.0, 2.0]
    assert close(u.cdf(u.icdf(0.3)), 0.3)
    assert close(u.pdf(1.0), 0.5)
    assert close(u.from_standard(u.to_standard(0.7)), 0.7)
    g = alspce.Marginal.gaussian(1.0, 0.5)
    e = alspce.Marginal.exponential(2.0)
    assert close(e.mean(), 0.5)
    assert "lognormal" in repr(alspce.Marginal.lognormal(0.1, 0.2))

    im = alspce.InputModel([u, g])
    assert im.dim == 2
    assert im.marginal(0).family == "uniform"
    X = im.sample(50, seed=1)
    assert X.shape == (50, 2)
    lhs = im.lhs_sample(32, seed=2)
    assert lhs.shape == (32, 2) and lhs[:, 0].min() >= 0.0 and lhs[:, 0].max() <= 2.0
    xi = im.to_standard(X)
    assert np.allclose(im.from_standard(xi), X)
    pdf = im.joint_pdf_batch(X)
    assert pdf.shape == (50,) and (pdf > 0).all()
    im2 = alspce.InputModel.from_json(im.to_json())
    assert json.loads(im2.to_json()) == json.loads(im.to_json())

    # Basis enumeration: graded lexicographic, hyperbolic truncation.
    assert alspce.build_index_set(2, 2, 1.0) == [
        [0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
    assert len(alspce.build_index_set(3, 2, 0.5)) < len(alspce.build_index_set(3, 2, 1.0))

    # Training on toy data.
    toy = alspce.make_testbed("toy")
    assert toy.input_dim == 1
    toy_im = alspce.testbed_input_model("toy")
    rx, y0 = toy.evaluate(np.array([2.0]), seed=7)
    assert np.allclose(rx, [2.0]) and isinstance(y0, float)
    assert toy.evaluate(np.array([2.0]), seed=7)[1] == y0

    Xt = toy_im.lhs_sample(200, seed=11)
    yt = np.array([alspce.make_testbed("toy").evaluate(Xt[i], seed=1000 + i)[1]
                   for i in range(200)])

    cfg = alspce.TrainConfig()
    cfg.p_min, cfg.p_max = 1, 2
    cfg.q_grid = [1.0]
    cfg.sigma_grid_size = 4
    cfg.n_folds = 3
    cfg.restarts = 1
    cfg.n_quad = 40
    cfg.latent_family = "gaussian"
    assert cfg.latent_family == "gaussian"

    model, diag = alspce.fit(Xt, yt, toy_im, config=cfg, seed=21)
    assert diag["converged"] in (True, False)
    assert 1 <= diag["selected_p"] <= 2
    assert len(diag["cv_table"]) > 0 and "heldout_loglik" in diag["cv_table"][0]
    k = len(model.index_set)
    assert model.coeffs.shape == (k,)
    assert model.sigma_eps > 0
    assert model.latent_family == "gaussian" and model.n_quad == 40
    assert model.input_model.dim == 1

    grid = np.linspace(0.0, 2 * math.pi, 64).reshape(-1, 1)
    s = model.s_hat(grid)
    assert s.shape == (64,) and (s >= 0).all() and (s <= 1).all()
    cm = model.conditional_mean(grid)
    assert np.isfinite(cm).all()
    draws_y = model.sample_response(np.array([3.0]), 500, seed=5)
    assert draws_y.shape == (500,) and np.isfinite(draws_y).all()

    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "model.json")
        model.save(path)
        loaded = alspce.SpceModel.load(path)
        assert np.array_equal(loaded.coeffs, model.coeffs)
        assert loaded.sigma_eps == model.sigma_eps
        assert json.loads(model.to_json())["index_set"]

    # Likelihood, information, coefficient ensembles.
    ll = alspce.log_likelihood(model, Xt, yt)
    assert np.isfinite(ll)
    info = alspce.fisher_information(model, Xt, yt)
    assert info.shape == (k, k) and np.allclose(info, info.T)
    ens = alspce.sample_coefficients(model, info, 40, seed=9)
    assert ens.draws.shape == (40, k) and ens.covariance.shape == (k, k)
    sm = ens.s_matrix(grid)
    assert sm.shape == (64, 40)
    vs = ens.variance_of_s(grid)
    assert vs.shape == (64,) and (vs >= 0).all()
    scores = alspce.learning_scores(ens, toy_im, grid)
    assert scores.shape == (64,) and (scores >= 0).all()

    # Reliability estimators.
    est = alspce.pf_from_s(np.array([0.0, 0.5, 1.0]))
    assert close(est.pf, 0.5) and est.estimator == "conditional" and est.n_samples == 3
    assert est.cov_defined and "PfEstimate" in repr(est)
    assert close(alspce.beta_from_pf(0.5), 0.0)
    assert close(est.beta(), 0.0)
    em = alspce.pf_from_model(model, grid)
    assert close(em.pf, float(s.mean()), 1e-9)
    mc = alspce.mcs_indicator(alspce.make_testbed("toy"), toy_im, 2000, seed=13)
    assert mc.estimator == "indicator" and 0.4 < mc.pf < 0.7

    # Analytic testbed references.
    assert "%.3e" % alspce.rs_analytic_pf() == "3.154e-03"
    assert close(alspce.beta_from_pf(alspce.rs_analytic_pf()), alspce.rs_analytic_beta(), 1e-9)
    assert 0.0 < alspce.rs_conditional_s(3.0, 2.5) < 1.0
    assert close(alspce.toy_conditional_s(0.0), 0.5, 1e-9)
    count = alspce.sir_simulate(1500, 100, 0.8, 0.4, population=2000, seed=3)
    assert 0 <= count <= 1500
    assert alspce.make_testbed("rs").input_dim == 2
    assert alspce.make_testbed("sir", i_lim=800.0).input_dim == 4

    # Windowed statistics of a stored dataset.
    uu = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    yy = np.array([4.0, 5.0, 6.0, 1.0, 9.0])
    ws = alspce.moving_window_stats(uu, yy, 1.0, 1.0, [0.0, 1.0])
    assert ws["n_window"] == 3
    assert close(ws["mean"], 5.0) and close(ws["variance"], 1.0)
    assert ws["quantiles"] == [4.0, 6.0]

    # Loop helpers.
    dg = alspce.damped_sigma_grid(0.4, n_grid=3)
    assert close(dg[0], 0.38) and close(dg[-1], 0.42) and len(dg) == 3
    assert close(alspce.smooth_pf([1.0, 2.0, 3.0, 4.0]), 3.0)
    pts = np.linspace(0.0, 1.0, 100).reshape(-1, 1)
    sc = np.zeros(100)
    sc[17] = 5.0
    sc[63] = 4.0
    batch = alspce.select_batch(pts, sc, 2, seed=1)
    assert sorted(batch) == [17, 63]

    # Dataset adapter and CSV interop.
    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "data.csv")
        alspce.write_dataset_csv(path, Xt, yt)
        Xr, yr = alspce.read_dataset_csv(path)
        assert np.array_equal(Xr, Xt) and np.array_equal(yr, yt)
    ds = alspce.make_dataset_simulator(Xt, yt, radius=10.0)
    rx, ry = ds.evaluate(Xt[3], seed=2)
    hits = np.where((Xt == np.asarray(rx).reshape(1, -1)).all(axis=1))[0]
    assert hits.size >= 1 and any(yt[h] == ry for h in hits)

    # A tiny active-learning run end to end.
    al = alspce.AlConfig()
    al.n_initial = 15
    al.batch_size = 5
    al.budget = 25
    al.n_candidates = 300
    al.n_mc = 2000
    al.ensemble_size = 15
    al.train = cfg
    al.seed = 3
    assert al.damped_grid_size == 3
    sim = alspce.make_testbed("toy")
    state = alspce.run_active_loop(al, sim, toy_im)
    assert state.ed_inputs.shape == (25, 1) and state.ed_responses.shape == (25,)
    assert state.ed_iteration.count(0) == 15 and len(state.ed_iteration) == 25
    assert state.mc_sample.shape == (2000, 1)
    assert len(state.history) == 3
    raws = []
    for rec in state.history:
        raws.append(rec.pf_raw)
        assert rec.pf_smoothed == alspce.smooth_pf(raws)
        assert rec.sigma_eps > 0
    assert state.history[0].n_ed == 15 and state.history[-1].n_ed == 25
    assert state.history[-1].batch_inputs.shape[0] == 0
    assert state.model is not None
    sf = state.model.s_hat(grid)
    assert ((sf >= 0) & (sf <= 1)).all()

    print("python smoke: all checks passed")


if __name__ == "__main__":
    main()
