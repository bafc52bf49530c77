import json
import math

import numpy as np
import pytest

from sparsespin import (Boundary, GraphKind, build_graph, edge_count,
                        graph_from_json, graph_to_json, normalized_time,
                        physical_time, predicted_tstar)


def neighbours(g, site):
    return sorted(set(j for i, j, _ in g.edges() if i == site)
                  | set(i for i, j, _ in g.edges() if j == site))


class TestBuildGraph:
    def test_hypercube8(self):
        g = build_graph("hypercube", 8)
        assert edge_count(g) == 12  # (N/2) log2 N
        assert all(w == 1.0 for _, _, w in g.edges())
        assert neighbours(g, 0) == [1, 2, 4]

    def test_a2a_smallest(self):
        g = build_graph("a2a", 2)
        assert g.edges() == ((0, 1, 1.0),)

    def test_pwr2_periodic_min_image(self):
        # distance rule: coupled iff m or N-m is a power of two
        g = build_graph("pwr2", 8, boundary="periodic")
        assert neighbours(g, 0) == [1, 2, 4, 6, 7]

    def test_pwr2_open_distances(self):
        g = build_graph("pwr2", 8)
        dists = sorted(set(j - i for i, j, _ in g.edges()))
        assert dists == [1, 2, 4]

    @pytest.mark.parametrize("n", [3, 6, 12])
    def test_power_of_two_required(self, n):
        with pytest.raises(ValueError):
            build_graph("hypercube", n)
        with pytest.raises(ValueError):
            build_graph("pwr2", n)

    def test_negative_alpha_rejected(self):
        with pytest.raises(ValueError):
            build_graph("powerlaw", 8, alpha=-0.5)

    def test_too_small(self):
        with pytest.raises(ValueError):
            build_graph("a2a", 1)

    def test_powerlaw_zero_alpha_is_a2a(self):
        pl = build_graph("powerlaw", 10, alpha=0.0)
        a2a = build_graph("a2a", 10)
        assert np.array_equal(pl.weights, a2a.weights)

    def test_powerlaw_large_alpha_pattern_converges_to_nn(self):
        nn = build_graph("nn", 8, boundary="periodic")
        far = np.asarray(build_graph("powerlaw", 8, boundary="periodic",
                                     alpha=600.0).weights)
        assert np.array_equal(far == 1.0, np.asarray(nn.weights) == 1.0)
        assert far[np.asarray(nn.weights) == 0].max() < 1e-180
        # d >= 2 underflows to exact zero once alpha is extreme
        pl = build_graph("powerlaw", 8, boundary="periodic", alpha=1100.0)
        assert np.array_equal(np.asarray(pl.weights) != 0,
                              np.asarray(nn.weights) != 0)

    def test_powerlaw_weights(self):
        g = build_graph("powerlaw", 6, chi0=2.0, alpha=1.5)
        w = np.asarray(g.weights)
        assert w[0, 3] == pytest.approx(2.0 * 3.0 ** -1.5)
        gp = build_graph("powerlaw", 6, alpha=1.5, boundary="periodic")
        assert np.asarray(gp.weights)[0, 4] == pytest.approx(2.0 ** -1.5)


class TestEdgeCount:
    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32])
    def test_family_closed_forms(self, n):
        m = int(math.log2(n))
        assert edge_count(build_graph("a2a", n)) == n * (n - 1) // 2
        assert edge_count(build_graph("nn", n)) == n - 1
        assert edge_count(build_graph("pwr2", n)) == n * m - n + 1
        assert edge_count(build_graph("hypercube", n)) == n * m // 2

    @pytest.mark.parametrize("n", [4, 8, 16, 32])
    def test_nn_ring(self, n):
        # N=2 degenerates (the wrap bond coincides with the open bond)
        assert edge_count(build_graph("nn", n, boundary="periodic")) == n

    def test_examples(self):
        assert edge_count(build_graph("pwr2", 8)) == 17
        assert edge_count(build_graph("a2a", 8)) == 28
        assert edge_count(build_graph("hypercube", 4)) == 4

    @pytest.mark.parametrize("n", [2, 4, 8, 16, 32])
    def test_hypercube_regular(self, n):
        g = build_graph("hypercube", n)
        deg = np.count_nonzero(g.weights, axis=1)
        assert np.all(deg == int(math.log2(n)))

    @pytest.mark.parametrize("kind,bnd,alpha", [
        ("a2a", "open", None), ("nn", "periodic", None),
        ("pwr2", "open", None), ("hypercube", "open", None),
        ("powerlaw", "periodic", 1.3)])
    def test_symmetry(self, kind, bnd, alpha):
        g = build_graph(kind, 16, boundary=bnd, alpha=alpha)
        w = np.asarray(g.weights)
        assert np.array_equal(w, w.T)
        assert np.all(np.diag(w) == 0)


class TestTimes:
    def test_a2a_identity(self):
        g = build_graph("a2a", 12)
        assert normalized_time(1.0, g) == pytest.approx(1.0)

    def test_hypercube8(self):
        g = build_graph("hypercube", 8)
        assert normalized_time(7.0, g) == pytest.approx(3.0)  # 7 * 12/28

    def test_inverse(self):
        g = build_graph("pwr2", 8)
        assert physical_time(math.pi, g) == pytest.approx(math.pi * 28 / 17)
        assert normalized_time(physical_time(0.73, g), g) == pytest.approx(0.73)

    def test_predicted_tstar(self):
        assert predicted_tstar(build_graph("a2a", 10)) == pytest.approx(math.pi)
        assert predicted_tstar(build_graph("hypercube", 16)) == \
            pytest.approx(3.75 * math.pi)
        assert predicted_tstar(build_graph("hypercube", 2)) == \
            pytest.approx(math.pi)

    def test_tstar_scales_with_chi0(self):
        assert predicted_tstar(build_graph("a2a", 8, chi0=2.0)) == \
            pytest.approx(math.pi / 2.0)


class TestJson:
    def test_round_trip(self):
        g = build_graph("powerlaw", 8, chi0=1.5, boundary="periodic", alpha=2.0)
        doc = graph_to_json(g)
        assert doc["kind"] == "powerlaw" and doc["alpha"] == 2.0
        g2 = graph_from_json(json.dumps(doc))
        assert g2.kind is GraphKind.POWER_LAW
        assert g2.boundary is Boundary.PERIODIC
        assert np.allclose(g2.weights, g.weights)

    def test_alpha_absent_for_plain_kinds(self):
        doc = graph_to_json(build_graph("nn", 4))
        assert "alpha" not in doc
        assert doc["edges"] == [[0, 1, 1.0], [1, 2, 1.0], [2, 3, 1.0]]


def test_weights_frozen():
    g = build_graph("a2a", 4)
    with pytest.raises(ValueError):
        g.weights[0, 1] = 5.0
