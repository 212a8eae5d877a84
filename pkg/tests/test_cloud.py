import numpy as np
import pytest

from maglab.cloud import (
    DomainShape,
    RefinementReport,
    extrapolate,
    refinement_sequence,
    sample_domain,
)
from maglab.errors import ArgumentError, DiagnosticError, ResourceError


def test_shape_validation():
    with pytest.raises(ArgumentError):
        DomainShape.ball(0, 1.0)
    with pytest.raises(ArgumentError):
        DomainShape.ball(3, -1.0)
    with pytest.raises(ArgumentError):
        DomainShape.shell(2.0, 1.0)
    with pytest.raises(ArgumentError):
        DomainShape.box()
    with pytest.raises(ArgumentError):
        DomainShape("blob", ())


def test_shape_dimensions_and_bounds():
    assert DomainShape.ball(5, 2.0).dimension == 5
    assert DomainShape.ball(5, 2.0).bounding_radius() == 2.0
    assert DomainShape.shell(1, 2).dimension == 3
    assert DomainShape.box(1.0, 2.0, 3.0).dimension == 3
    assert DomainShape.box(1.0, 2.0, 3.0).bounding_radius() == 3.0


def test_membership():
    shell = DomainShape.shell(1, 2)
    inside = shell.contains(np.array([[1.5, 0, 0], [0.5, 0, 0], [2.5, 0, 0]]))
    assert list(inside) == [True, False, False]


def test_lattice_is_origin_aligned_and_nested():
    ball = DomainShape.ball(2, 1.0)
    coarse = sample_domain(ball, 0.5)
    fine = sample_domain(ball, 0.25)
    coarse_pts = {p for p in coarse.points}
    fine_pts = {p for p in fine.points}
    assert coarse_pts <= fine_pts  # bit-identical nesting
    assert (0.0, 0.0) in coarse_pts


def test_sample_counts_scale_with_resolution():
    ball = DomainShape.ball(3, 1.0)
    n1 = len(sample_domain(ball, 0.5))
    n2 = len(sample_domain(ball, 0.25))
    assert n1 == 33 and n2 > 4 * n1


def test_sample_cap_enforced():
    with pytest.raises(ResourceError):
        sample_domain(DomainShape.ball(3, 1.0), 0.01, cap=1000)


def test_sample_spacing_validation():
    with pytest.raises(ArgumentError):
        sample_domain(DomainShape.ball(3, 1.0), 0.0)


def test_refinement_monotone_for_ball():
    report = refinement_sequence(DomainShape.ball(3, 1.0), 1.0, 3, base_spacing=0.4)
    assert len(report.magnitudes) == 3
    assert all(b >= a for a, b in zip(report.magnitudes, report.magnitudes[1:]))
    assert report.extrapolated >= report.magnitudes[-1]


def test_refinement_validation():
    with pytest.raises(ArgumentError):
        refinement_sequence(DomainShape.ball(3, 1.0), 1.0, 1)
    with pytest.raises(ArgumentError):
        refinement_sequence(DomainShape.ball(3, 1.0), -1.0, 3)


def _synthetic_report(mags, hs=None):
    hs = hs or [0.4 / 2**k for k in range(len(mags))]
    return RefinementReport(
        shape=DomainShape.ball(1, 1.0),
        scale=1.0,
        resolutions=tuple(hs),
        counts=tuple(1 for _ in mags),
        magnitudes=tuple(mags),
        extrapolated=0.0,
        uncertainty=0.0,
    )


def test_richardson_exact_on_geometric_sequence():
    # m(h) = 5 - h^2 halves twice: extrapolation recovers 5 exactly
    hs = [0.4, 0.2, 0.1]
    mags = [5 - h**2 for h in hs]
    est, unc = extrapolate(_synthetic_report(mags, hs))
    assert est == pytest.approx(5.0, abs=1e-12)
    assert unc > 0


def test_richardson_constant_sequence():
    est, unc = extrapolate(_synthetic_report([7.0, 7.0, 7.0]))
    assert est == 7.0 and unc == 0.0


def test_extrapolate_needs_three_levels():
    with pytest.raises(ArgumentError):
        extrapolate(_synthetic_report([1.0, 2.0]))


def test_extrapolate_rejects_nonmonotone():
    with pytest.raises(DiagnosticError):
        extrapolate(_synthetic_report([1.0, 3.0, 2.0]))


def test_one_dimensional_interval():
    # the magnitude of a scaled interval [-1, 1] at R=1 is 1 + length/2 = 2
    report = refinement_sequence(DomainShape.ball(1, 1.0), 1.0, 4, base_spacing=0.25)
    assert report.extrapolated == pytest.approx(2.0, rel=1e-3)


def test_point_file_shape(tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("0 0\n1 0\n0 1\n")
    shape = DomainShape.from_point_file(str(path))
    assert shape.kind == "points" and shape.dimension == 2
    space = sample_domain(shape, 1.0)
    assert len(space) == 3
    with pytest.raises(ArgumentError):
        shape.contains(np.zeros((1, 2)))
