import math
import tempfile

import cpdg


def test_closed_forms():
    assert math.isclose(cpdg.transmission_prob(2.0, 3.0, 1.0 / 3.0), 0.25)
    assert math.isclose(cpdg.geom_exp_laplace(1.0, 1.0, 1.0, 1.0), 0.25)
    assert math.isclose(cpdg.bg_transition(0.5, 1.0, False, math.log(2.0)), 0.25)
    assert math.isclose(cpdg.lower_bound_rate(1.0, 4.0, 0.5), (5 - math.sqrt(17)) / 2)


def test_graph_and_kernel():
    g = cpdg.Graph.star(3)
    assert g.num_vertices == 4
    assert g.degree(0) == 3
    k = cpdg.Kernel.sigma(1.0, 1.0, 1.0)
    assert math.isclose(k.p(2, 3), 1.0 / 6.0)


def test_replica_is_deterministic():
    g = cpdg.Graph.complete(3)
    k = cpdg.Kernel.sigma(0.5, 1.0, 1.0)
    a = cpdg.run_replica(g, k, 1.0, [0], horizon=50.0, seed=5)
    b = cpdg.run_replica(g, k, 1.0, [0], horizon=50.0, seed=5)
    assert a == b


def test_oracle_single_edge():
    g = cpdg.Graph.complete(2)
    k = cpdg.Kernel.constant(1.0, 0.0, 1.0)
    res = cpdg.oracle_extinction(g, k, 0.0, [0])
    assert math.isclose(res["mean_time"], 1.0, rel_tol=1e-9)


def test_phase():
    assert cpdg.phase_classify(0.3, 1.0, 0.1)["phase"] == "NoPhaseTransition"


def test_run_command():
    with tempfile.TemporaryDirectory() as d:
        code, text = cpdg.run_command("edge-law", '{"lambda": 1, "edge_law": {"v": 1, "p": 1}}', d, 1)
        assert code == 0
        rep = cpdg.report_dict(text)
        assert rep["transmission_prob"] == "0.25"
        assert rep["status"] == "ok"
