import itertools

import numpy as np
import pytest

from ansatz_lab.errors import EmptyGraph, ParseError, PenaltyTooSmall, TooManyQubits, ValidationError
from ansatz_lab.vqa.observable import exact_minimum
from ansatz_lab.vqa.problems import (
    Graph,
    bundled_problem,
    decode_tsp,
    encode_maxcut,
    encode_tsp,
    encode_vertex_cover,
    parse_distances,
    parse_graph,
    qubo_to_observable,
    tsp_qubit,
)


def bit(b, q):
    return (b >> q) & 1


def cut_value(graph, b):
    return sum(w for u, v, w in graph.edges if bit(b, u) != bit(b, v))


def brute_max_cut(graph):
    return max(cut_value(graph, b) for b in range(1 << graph.n))


def brute_min_cover(graph):
    best = None
    for b in range(1 << graph.n):
        if all(bit(b, u) or bit(b, v) for u, v, _ in graph.edges):
            size = bin(b).count("1")
            best = size if best is None else min(best, size)
    return best


def brute_tsp(d):
    nc = d.shape[0]
    return min(sum(d[t[p], t[(p + 1) % nc]] for p in range(nc)) for t in itertools.permutations(range(nc)))


def random_graph(n, rng, p=0.5):
    edges = [(u, v, 1.0) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    if not edges:
        edges = [(0, 1, 1.0)]
    return Graph(n, tuple(edges))


class TestQubo:
    def test_matches_direct_evaluation(self):
        rng = np.random.default_rng(0)
        n = 4
        lin = {i: float(rng.normal()) for i in range(n)}
        quad = {(0, 1): 1.5, (2, 3): -0.7, (1, 1): 0.3, (3, 0): 2.0}
        obs = qubo_to_observable(n, 0.25, lin, quad)
        diag = obs.diagonal()
        for b in range(1 << n):
            x = [bit(b, q) for q in range(n)]
            want = 0.25 + sum(h * x[i] for i, h in lin.items())
            want += sum(j * x[a] * x[c] for (a, c), j in quad.items())
            assert diag[b] == pytest.approx(want, abs=1e-12)


class TestMaxCut:
    @pytest.mark.parametrize("seed", range(5))
    def test_energy_is_minus_cut(self, seed):
        graph = random_graph(6, np.random.default_rng(seed))
        problem = encode_maxcut(graph)
        diag = problem.observable.diagonal()
        for b in range(1 << graph.n):
            assert diag[b] == pytest.approx(-cut_value(graph, b), abs=1e-12)
        assert problem.cost(exact_minimum(problem.observable).energy) == pytest.approx(brute_max_cut(graph))

    def test_weighted(self):
        graph = Graph.from_edges(3, [(0, 1, 2.5), (1, 2, 1.0)])
        assert -exact_minimum(encode_maxcut(graph).observable).energy == pytest.approx(3.5)

    def test_empty_graph(self):
        with pytest.raises(EmptyGraph):
            encode_maxcut(Graph(3, ()))


class TestVertexCover:
    @pytest.mark.parametrize("seed", range(5))
    def test_ground_state_is_minimum_cover(self, seed):
        graph = random_graph(6, np.random.default_rng(10 + seed))
        problem = encode_vertex_cover(graph)
        ground = exact_minimum(problem.observable)
        b = ground.bitstring
        assert all(bit(b, u) or bit(b, v) for u, v, _ in graph.edges)
        assert ground.energy == pytest.approx(brute_min_cover(graph))

    def test_penalty_must_dominate(self):
        graph = Graph.from_edges(2, [(0, 1)])
        with pytest.raises(PenaltyTooSmall):
            encode_vertex_cover(graph, penalty=1.0)


class TestTsp:
    @pytest.mark.parametrize("seed", range(4))
    def test_ground_state_is_optimal_tour(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 10, size=(3, 2))
        d = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
        problem = encode_tsp(d)
        ground = exact_minimum(problem.observable)
        tour = decode_tsp(ground.bitstring, 3)
        assert tour is not None
        assert ground.energy == pytest.approx(brute_tsp(d), abs=1e-9)

    def test_asymmetric_distances(self):
        d = np.array([[0, 1, 10], [10, 0, 1], [1, 10, 0]], dtype=float)
        ground = exact_minimum(encode_tsp(d).observable)
        assert ground.energy == pytest.approx(3.0)

    def test_valid_tours_cost_their_length(self):
        d = np.array([[0, 2, 9], [2, 0, 6], [9, 6, 0]], dtype=float)
        diag = encode_tsp(d).observable.diagonal()
        for tour in itertools.permutations(range(3)):
            b = sum(1 << tsp_qubit(v, p, 3) for p, v in enumerate(tour))
            assert diag[b] == pytest.approx(17.0)
            assert decode_tsp(b, 3) == list(tour)

    def test_decode_invalid(self):
        assert decode_tsp(0, 3) is None
        assert decode_tsp(0b111, 3) is None

    def test_limits(self):
        with pytest.raises(TooManyQubits):
            encode_tsp(np.ones((4, 4)) - np.eye(4))
        with pytest.raises(PenaltyTooSmall):
            encode_tsp(np.ones((3, 3)) - np.eye(3), penalty=3.0)
        with pytest.raises(ValidationError):
            encode_tsp(-np.ones((3, 3)))


class TestParsing:
    def test_graph(self):
        g = parse_graph("# c\n3 2\n0 1\n1 2 0.5\n")
        assert g.n == 3 and g.edges == ((0, 1, 1.0), (1, 2, 0.5))
        assert parse_graph(g.to_text()) == g

    @pytest.mark.parametrize("text", ["", "3\n", "3 2\n0 1\n", "2 1\n0 x\n", "2 1\n0 2\n", "2 1\n1 1\n"])
    def test_graph_errors(self, text):
        with pytest.raises(ParseError):
            parse_graph(text)

    def test_distances(self):
        d = parse_distances("# d\n0,1\n1,0\n")
        np.testing.assert_array_equal(d, [[0, 1], [1, 0]])
        with pytest.raises(ParseError):
            parse_distances("0,1\n1\n")
        with pytest.raises(ParseError):
            parse_distances("0,a\n1,0\n")


class TestBundledInstances:
    def test_maxcut(self):
        p = bundled_problem("maxcut_4")
        assert p.cost(exact_minimum(p.observable).energy) == pytest.approx(4.0)
        assert brute_max_cut(p.payload["graph"]) == 4

    def test_vertex_cover(self):
        p = bundled_problem("vertex_cover_6")
        assert exact_minimum(p.observable).energy == pytest.approx(3.0)
        assert brute_min_cover(p.payload["graph"]) == 3

    def test_tsp(self):
        p = bundled_problem("tsp_3")
        assert p.observable.n == 9
        assert exact_minimum(p.observable).energy == pytest.approx(brute_tsp(p.payload["dist"]))

    def test_unknown(self):
        with pytest.raises(ValidationError):
            bundled_problem("nope")
