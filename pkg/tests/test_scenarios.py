import numpy as np
import pytest

from horofill import scenarios as sc
from horofill import trace as tr
from horofill import tube as tb


@pytest.mark.parametrize("name", sorted(sc.GENERATORS))
def test_generators_deterministic(name):
    h1, l1 = sc.GENERATORS[name](16, 1.0, 3)
    h2, l2 = sc.GENERATORS[name](16, 1.0, 3)
    assert np.array_equal(l1.vertices, l2.vertices)
    h3, l3 = sc.GENERATORS[name](16, 1.0, 4)
    assert not np.array_equal(l1.vertices, l3.vertices)


@pytest.mark.parametrize("name", ["tube-point", "tube-segment", "tube-square"])
def test_tube_generators_on_surface(name):
    P, loop = sc.GENERATORS[name](24, 1.0, 0)
    for v in loop.vertices[::7]:
        assert abs(tb.tube_distance(P, v) - 1.0) < 1e-9
    assert 0.5 * 24 <= loop.length <= 1.6 * 24


@pytest.mark.parametrize("name", ["trace-a2", "trace-a3"])
def test_trace_generators_on_level_set(name):
    trace, loop = sc.GENERATORS[name](24, 1.0, 0)
    vals = trace.values(loop.vertices)
    assert float(np.max(np.abs(vals))) < 1e-6
    assert 0.5 * 24 <= loop.length <= 1.6 * 24


def test_square_serpentine_degree_zero():
    P, loop = sc.tube_square_serpentine(1.0, 24, 1.0, 0)
    chart = tb.chart_for(P, 1.0, loop.vertices)
    assert tb.loop_degree(chart, loop.vertices) == 0


def test_wrap_generators_wind():
    P, loop = sc.tube_segment_wrap(1.0, 32, 1.0, 0)
    chart = tb.chart_for(P, 1.0, loop.vertices)
    assert abs(tb.loop_degree(chart, loop.vertices)) >= 3


def test_custom_trace_loop_a2():
    import horofill.coxeter as cx

    rs = cx.build_root_system("A", rank=2)
    theta = cx.project_to_chamber(rs, rs.coweights[0])
    trace = tr.symmetric_trace(rs, theta).shifted(-2.0)
    trace2, loop = sc.custom_trace_loop(trace, 16, 1.0, 0)
    vals = trace2.values(loop.vertices)
    assert float(np.max(np.abs(vals))) < 1e-6


def test_custom_trace_loop_rejects_unbounded():
    import horofill.coxeter as cx

    pp = cx.build_root_system("product", factors=[1, 1])
    th = cx.project_to_chamber(pp, np.array([1.0, 0.0]))
    slab = tr.BusemannTrace(
        pp, th, np.array([[1.0, 0], [-1.0, 0]]), np.array([-1.0, -1.0])
    )
    with pytest.raises(ValueError, match="bounded"):
        sc.custom_trace_loop(slab, 16, 1.0, 0)
