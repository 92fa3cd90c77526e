import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapforge.blocksim import (
    BlockShape,
    BlockStats,
    EnergySample,
    block_stats_csv,
    bounding_box,
    count_members,
    efficiency_points_per_joule,
    simulate_analytical,
    simulate_bb,
    waste_fraction,
)
from mapforge.geometry import (
    CapacityError,
    Domain,
    DomainError,
    membership,
    oracle_enumerate,
)


def brute_force_stats(domain, n, dims):
    """Independent cell-by-cell oracle: same semantics, none of the closed forms."""
    pts = oracle_enumerate(domain, n)
    maxes = [max(c[a] for c in pts) for a in range(domain.dim)]
    grid = [(m + d) // d for m, d in zip(maxes, dims)]
    total = math.prod(grid)
    valid = full = 0
    for b in itertools.product(*[range(g) for g in grid]):
        cells = itertools.product(
            *[range(bi * d, bi * d + d) for bi, d in zip(b, dims)]
        )
        hits = sum(1 for c in cells if membership(domain, c))
        if hits:
            valid += 1
        if hits == math.prod(dims):
            full += 1
    return BlockStats(total, valid, total - valid, valid - full, n)


SMALL_CASES = [
    (Domain.TRIANGULAR_2D, 36, (4, 4)),
    (Domain.TRIANGULAR_2D, 100, (8, 4)),
    (Domain.TRIANGULAR_2D, 7, (16, 16)),
    (Domain.PYRAMID_3D, 120, (4, 4, 2)),
    (Domain.PYRAMID_3D, 20, (2, 2, 2)),
    (Domain.GASKET_2D, 81, (4, 4)),
    (Domain.GASKET_2D, 200, (8, 2)),
    (Domain.GASKET_2D, 50, (5, 3)),  # unaligned dims: enumeration fallback
    (Domain.CARPET_2D, 300, (9, 3)),
    (Domain.CARPET_2D, 100, (5, 7)),
    (Domain.SIERPINSKI_3D, 200, (4, 2, 4)),
    (Domain.SIERPINSKI_3D, 64, (1, 1, 1)),
    (Domain.MENGER_3D, 250, (3, 9, 3)),
    (Domain.MENGER_3D, 100, (4, 4, 4)),
]


@pytest.mark.parametrize("domain,n,dims", SMALL_CASES)
def test_simulate_bb_matches_brute_force(domain, n, dims):
    assert simulate_bb(domain, n, BlockShape(dims)) == brute_force_stats(domain, n, dims)


def test_triangular_36_frozen():
    # expected values from the brute-force oracle over the 8x8 box
    stats = simulate_bb(Domain.TRIANGULAR_2D, 36, BlockShape((4, 4)))
    assert (stats.total_blocks, stats.valid_blocks, stats.wasted_blocks) == (4, 3, 1)


def test_bounding_box_matches_enumeration():
    for domain in Domain:
        for n in (1, 2, 17, 300, 1000):
            pts = oracle_enumerate(domain, n)
            expect = tuple(max(c[a] for c in pts) for a in range(domain.dim))
            assert bounding_box(domain, n) == expect, (domain, n)


def test_count_members_matches_enumeration():
    boxes = {
        Domain.TRIANGULAR_2D: (13, 7),
        Domain.PYRAMID_3D: (6, 9, 7),
        Domain.GASKET_2D: (11, 14),
        Domain.CARPET_2D: (17, 9),
        Domain.SIERPINSKI_3D: (6, 5, 7),
        Domain.MENGER_3D: (8, 8, 8),
    }
    for domain, maxes in boxes.items():
        expect = sum(
            1
            for c in itertools.product(*[range(m + 1) for m in maxes])
            if membership(domain, c)
        )
        assert count_members(domain, maxes) == expect, domain


def test_prefix_count_law_analytic():
    # scale**k boxes hold exactly base**k members; DP checks the large k the
    # enumeration-based geometry test cannot reach
    for domain, base, scale, kmax in [
        (Domain.GASKET_2D, 3, 2, 12),
        (Domain.CARPET_2D, 8, 3, 12),
        (Domain.SIERPINSKI_3D, 4, 2, 12),
        (Domain.MENGER_3D, 20, 3, 6),
    ]:
        for k in range(kmax + 1):
            maxes = (scale**k - 1,) * domain.dim
            assert count_members(domain, maxes) == base**k, (domain, k)


def test_simulate_analytical_frozen():
    stats = simulate_analytical(500_000_000, 256)
    assert stats.total_blocks == 1_953_125
    assert stats.wasted_blocks == 0
    assert simulate_analytical(36, 16).total_blocks == 3
    assert simulate_analytical(1, 256).total_blocks == 1
    assert simulate_analytical(1, 256).wasted_blocks == 0


def test_waste_fraction_values():
    table_ix = BlockStats(8_000_000_000, 1_953_125, 7_998_046_875, 0, 500_000_000)
    assert waste_fraction(table_ix) == 7_998_046_875 / 8_000_000_000
    assert round(waste_fraction(table_ix), 5) == 0.99976
    assert waste_fraction(simulate_analytical(10, 4)) == 0.0
    with pytest.raises(DomainError):
        waste_fraction(BlockStats(0, 0, 0, 0, 1))


def test_efficiency_points_per_joule():
    assert efficiency_points_per_joule(EnergySample(10**6, 100.0)) == 10_000
    assert efficiency_points_per_joule(EnergySample(0, 50.0)) == 0
    measured = EnergySample(1_953_125 * 256, 0.44)
    assert efficiency_points_per_joule(measured) == pytest.approx(1.1364e9, rel=1e-3)
    with pytest.raises(DomainError):
        EnergySample(10, 0.0)
    with pytest.raises(DomainError):
        EnergySample(-1, 1.0)


def test_block_shape_parse_and_validate():
    assert BlockShape.parse("16x16").dims == (16, 16)
    assert BlockShape.parse("8X8x4").threads == 256
    with pytest.raises(DomainError):
        BlockShape.parse("16xfoo")
    with pytest.raises(DomainError):
        BlockShape((0, 4))


def test_dimensionality_guard():
    with pytest.raises(DomainError):
        simulate_bb(Domain.TRIANGULAR_2D, 10, BlockShape((4, 4, 4)))
    with pytest.raises(DomainError):
        simulate_bb(Domain.MENGER_3D, 0, BlockShape((3, 3, 3)))


def test_unaligned_large_grid_is_rejected():
    with pytest.raises(CapacityError):
        simulate_bb(Domain.CARPET_2D, 100_000_000, BlockShape((16, 16)))


@given(
    st.sampled_from(list(Domain)),
    st.integers(min_value=1, max_value=400),
    st.integers(min_value=1, max_value=400),
)
@settings(max_examples=30, deadline=None)
def test_wasted_blocks_monotone_in_elements(domain, n1, n2):
    n1, n2 = sorted((n1, n2))
    dims = (4, 4) if domain.dim == 2 else (2, 4, 2)
    shape = BlockShape(dims)
    assert simulate_bb(domain, n1, shape).wasted_blocks <= simulate_bb(
        domain, n2, shape
    ).wasted_blocks


@given(st.sampled_from(list(Domain)), st.integers(min_value=1, max_value=500))
@settings(max_examples=30, deadline=None)
def test_total_is_valid_plus_wasted(domain, n):
    dims = (8, 2) if domain.dim == 2 else (2, 2, 4)
    stats = simulate_bb(domain, n, BlockShape(dims))
    assert stats.total_blocks == stats.valid_blocks + stats.wasted_blocks
    assert 0 <= stats.partially_filled <= stats.valid_blocks


def test_csv_emission():
    stats = simulate_bb(Domain.TRIANGULAR_2D, 36, BlockShape((4, 4)))
    text = block_stats_csv([("triangular2d", "bounding_box", stats)])
    lines = text.splitlines()
    assert lines[0] == "domain,strategy,total_blocks,wasted_blocks,waste_fraction,elements"
    assert lines[1] == "triangular2d,bounding_box,4,1,0.250000,36"
