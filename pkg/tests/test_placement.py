import math

import pytest
from hypothesis import given, settings, strategies as st

from agriwsn.errors import BoundaryError, ConfigError, DomainError, FeasibilityError
from agriwsn.field import FieldSpec, Point2D
from agriwsn.placement import (ANCHOR, CONTROLLER_ID, GOLDEN_RATIO, STATION, Deployment, SensorNode,
                               anchor_distance, fibonacci_cells, fibonacci_layout, inclined_projection,
                               radial_layout, sequential_spacing, uniform_layout)
from agriwsn.radio import DEFAULT_RADIOS


def test_uniform_36():
    dep = uniform_layout(FieldSpec())
    assert len(dep) == 36
    assert {n.role for n in dep.nodes} == {STATION}
    assert dep.anchor is None
    assert set(dep.links.values()) == {CONTROLLER_ID}


def test_uniform_small_field():
    dep = uniform_layout(FieldSpec(100, 100, 50))
    assert sorted(tuple(n.position) for n in dep.nodes) == [(25, 25), (25, 75), (75, 25), (75, 75)]


@settings(max_examples=25, deadline=None)
@given(cols=st.integers(1, 7), rows=st.integers(1, 7))
def test_uniform_count_equals_cells(cols, rows):
    spec = FieldSpec(cols * 20.0, rows * 20.0, 20.0)
    assert len(uniform_layout(spec)) == spec.n_cells


@pytest.mark.parametrize("n, expected", [(36, [1, 2, 3, 5, 8, 13, 21, 34]), (4, [1, 2, 3]), (1, [1])])
def test_fibonacci_cells(n, expected):
    assert fibonacci_cells(n) == expected


def test_fibonacci_layout_counts():
    dep = fibonacci_layout(FieldSpec())
    assert len(dep) == 8
    assert tuple(dep.nodes[0].position) == (25, 25)


def test_fibonacci_row_major_cells():
    dep = fibonacci_layout(FieldSpec(), walk="row-major")
    assert dep.meta["cells"] == [1, 2, 3, 5, 8, 13, 21, 34]
    small = fibonacci_layout(FieldSpec(100, 100, 50), walk="row-major")
    assert [tuple(n.position) for n in small.nodes] == [(25, 25), (75, 25), (25, 75)]


def test_fibonacci_serpentine_walk():
    dep = fibonacci_layout(FieldSpec())
    # step 8 lands in row 2 walking right-to-left: column 6 - 1 = 5
    assert dep.meta["cells"][:5] == [1, 2, 3, 5, 11]
    assert len(set(dep.meta["cells"])) == 8


def test_fibonacci_unknown_walk():
    with pytest.raises(ConfigError):
        fibonacci_layout(FieldSpec(), walk="spiral")


@settings(max_examples=20, deadline=None)
@given(cols=st.integers(2, 8), rows=st.integers(2, 8))
def test_fibonacci_fewer_than_uniform(cols, rows):
    spec = FieldSpec(cols * 10.0, rows * 10.0, 10.0)
    fib = fibonacci_layout(spec)
    assert len(fib) == len(fibonacci_cells(spec.n_cells)) < len(uniform_layout(spec))


def test_radial_examples():
    spec = FieldSpec()
    dep = radial_layout(spec, Point2D(150, 150), 8, 80.9)
    assert len(dep) == 9
    assert dep.anchor.position == (150, 150)
    assert dep.nodes[1].position.x == pytest.approx(230.9)
    assert dep.nodes[1].position.y == pytest.approx(150)
    four = radial_layout(spec, Point2D(150, 150), 4, 10)
    offsets = [(round(n.position.x - 150, 9), round(n.position.y - 150, 9)) for n in four.by_role(STATION)]
    assert offsets == [(10, 0), (0, 10), (-10, 0), (0, -10)]


def test_radial_outside_field():
    with pytest.raises(BoundaryError):
        radial_layout(FieldSpec(), Point2D(150, 150), 8, 200)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 20), d=st.floats(0, 140), phase=st.floats(-math.pi, math.pi))
def test_radial_equal_distances(n, d, phase):
    dep = radial_layout(FieldSpec(), Point2D(150, 150), n, d, phase)
    for s in dep.by_role(STATION):
        assert anchor_distance(s.position, dep.anchor.position) == pytest.approx(d, abs=1e-9)


def test_sequential_spacing_examples():
    assert sequential_spacing(1.618, 50, 2) == pytest.approx([50, 80.9])
    assert sequential_spacing(1, 7, 3) == [7, 7, 7]
    assert sequential_spacing(2, 1, 4) == [1, 2, 4, 8]
    with pytest.raises(DomainError):
        sequential_spacing(0, 1, 3)


def test_golden_spacing_ratio():
    d = sequential_spacing(GOLDEN_RATIO, 50, 10)
    for a, b in zip(d, d[1:]):
        assert b / a == pytest.approx(1.6180339887, rel=1e-9)


def test_anchor_distance_examples():
    assert anchor_distance((3, 4), (0, 0)) == 5
    assert anchor_distance((7, 7), (7, 7)) == 0


@given(a=st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)),
       b=st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)))
def test_anchor_distance_symmetric(a, b):
    assert anchor_distance(a, b) == anchor_distance(b, a)


def test_inclined_projection():
    assert inclined_projection(80.397, 0) == 80.397
    assert inclined_projection(10, math.pi / 3) == pytest.approx(5)
    assert inclined_projection(10, math.pi / 2) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        inclined_projection(10, 2.0)


def test_deployment_invariants():
    spec = FieldSpec()
    with pytest.raises(ConfigError):
        Deployment(spec, [SensorNode(1, Point2D(1, 1)), SensorNode(1, Point2D(2, 2))])
    with pytest.raises(ConfigError):
        Deployment(spec, [SensorNode(1, Point2D(1, 1), ANCHOR), SensorNode(2, Point2D(2, 2), ANCHOR)])
    with pytest.raises(BoundaryError):
        Deployment(spec, [SensorNode(1, Point2D(-1, 1))])


def test_generated_links_feasible():
    for dep in (uniform_layout(FieldSpec()), fibonacci_layout(FieldSpec()),
                radial_layout(FieldSpec(), Point2D(150, 150), 8, 80.9)):
        dep.validate(DEFAULT_RADIOS)


def test_infeasible_link_detected():
    spec = FieldSpec()
    dep = Deployment(spec, [SensorNode(1, Point2D(150, 150), ANCHOR, "Bluetooth"),
                            SensorNode(2, Point2D(150, 180), STATION, "Bluetooth")], {2: 1})
    with pytest.raises(FeasibilityError):
        dep.validate(DEFAULT_RADIOS)
