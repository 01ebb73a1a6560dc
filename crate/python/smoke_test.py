"""Smoke test for the pycgsampler extension.

Build and run:

    cargo build -p pycgsampler --release --features extension-module
    cp target/release/libpycgsampler.so python/pycgsampler.so
    python3 python/smoke_test.py
"""

import json
import os
import sys
import tempfile
from fractions import Fraction

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pycgsampler as cgs


def check_graph_and_closure():
    # two disjoint edges in a 4-vertex undirected graph
    g = cgs.Graph(4, edges=[[0, 2], [1, 3]])
    assert g.n == 4 and not g.directed
    assert sorted((u, v) for u, v, _ in g.edges()) == [(0, 2), (1, 3)]

    fixed = cgs.FixedSet.for_graph(g)
    closed = cgs.compute_closure(g, fixed)
    assert len(closed) >= len(fixed)

    like = cgs.enumerate(g, fixed)
    assert len(like) == 3, len(like)

    s = cgs.UgsSampler(g, seed=7)
    changed = s.run(2000)
    assert 0 < changed <= 2000
    assert s.graph.degrees() == g.degrees()

    d = cgs.Graph(3, directed=True, edges=[[0, 1], [1, 2], [2, 0]])
    c = cgs.compute_closure(d, cgs.FixedSet.for_graph(d))
    assert (0, 0) in c


def check_tables():
    t = cgs.Table([[3, 1, 0], [1, 2, 2], [0, 1, 4]])
    assert t.shape == (3, 3)

    w = cgs.WgsSampler.for_table(t, fixed_cells=[(0, 0)], seed=3)
    w.run(5000)
    out = w.table
    assert out.row_sums() == t.row_sums()
    assert out.col_sums() == t.col_sums()
    assert out.tolist()[0][0] == 3

    ds = cgs.DsSampler(t, seed=3)
    ds.run(5000)
    assert ds.table.row_sums() == t.row_sums()

    fit = cgs.ipfp(t)
    assert abs(sum(fit[0]) - sum(t.tolist()[0])) < 1e-8
    chi2, g2 = cgs.table_statistics(t)
    assert chi2 > 0 and g2 > 0


def check_walk_probability():
    g = cgs.Graph(4, edges=[[0, 2], [1, 3]])
    p = cgs.walk_probability(g, [0, 2, 1, 3, 0], cgs.FixedSet.for_graph(g))
    assert isinstance(p, Fraction)
    assert 0 < p <= 1


def check_diagnostics():
    trace = [float(i % 7) for i in range(500)]
    assert cgs.ess(trace) > 0
    p, se = cgs.p_value(trace, 5.0)
    assert 0.0 <= p <= 1.0 and se >= 0.0


def check_errors():
    try:
        cgs.Table([[1, 2], [3]])
    except ValueError:
        pass
    else:
        raise AssertionError("ragged table accepted")


def check_run_file():
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "web.txt")
        with open(path, "w") as f:
            f.write("a c\nb c\nc d\nb d\na e\ne d\n")
        cfg = {"method": "ugs", "steps": 300, "seed": 9, "statistic": "compartmentalization"}
        a = cgs.run_file(path, cfg, directed=True)
        b = cgs.run_file(path, cfg, directed=True)
        timing = {"wall_time", "ess_per_second"}
        assert {k: v for k, v in a.items() if k not in timing} == {k: v for k, v in b.items() if k not in timing}
        assert 0.0 <= a["p_value"] <= 1.0
        json.dumps(a)


def main():
    for check in (
        check_graph_and_closure,
        check_tables,
        check_walk_probability,
        check_diagnostics,
        check_errors,
        check_run_file,
    ):
        check()
        print("ok", check.__name__)
    print("smoke test passed")


if __name__ == "__main__":
    main()
