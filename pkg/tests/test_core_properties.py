"""Property tests for the affectance layer."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from capsched.core import (
    Instance,
    Link,
    ModelParams,
    Point,
    affectance,
    affectance_matrix,
    is_feasible,
    single_affectance,
)

coord = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


@st.composite
def link_strategy(draw, lid):
    sx, sy = draw(coord), draw(coord)
    # keep geometry non-degenerate: a length and a direction
    length = draw(st.floats(min_value=0.05, max_value=10))
    angle = draw(st.floats(min_value=0, max_value=2 * math.pi))
    power = draw(st.one_of(st.none(), st.floats(min_value=0.1, max_value=10)))
    return Link(
        id=lid,
        sender=Point(sx, sy),
        receiver=Point(sx + length * math.cos(angle), sy + length * math.sin(angle)),
        power=power,
    )


@st.composite
def separated_links(draw, n_max=6):
    n = draw(st.integers(min_value=1, max_value=n_max))
    links = []
    for i in range(n):
        link = draw(link_strategy(i))
        if all(_well_separated(link, other) for other in links):
            links.append(link)
    return tuple(links)


def _well_separated(a, b):
    # avoid singular configurations (coincident sender/receiver pairs)
    pts = [(a.sender, b.receiver), (b.sender, a.receiver)]
    return all(math.dist((p.x, p.y), (q.x, q.y)) > 1e-6 for p, q in pts)


params_strategy = st.builds(
    ModelParams,
    alpha=st.floats(min_value=2.1, max_value=6),
    beta=st.floats(min_value=0.5, max_value=3),
    noise=st.just(0.0),
    default_power=st.floats(min_value=0.5, max_value=2),
)


@given(separated_links(), params_strategy)
@settings(max_examples=60, deadline=None)
def test_affectance_nonnegative_and_additive(links, params):
    if not links:
        return
    v = links[0]
    others = links[1:]
    total = affectance(others, v, params)
    assert total >= 0.0
    parts = sum(single_affectance(w, v, params) for w in others)
    if total or parts:
        assert math.isclose(total, parts, rel_tol=1e-12)


@given(separated_links(), params_strategy)
@settings(max_examples=60, deadline=None)
def test_matrix_agrees_with_scalar(links, params):
    if not links:
        return
    inst = Instance(params=params, links=links)
    mat = affectance_matrix(inst)
    for i, w in enumerate(links):
        for j, v in enumerate(links):
            expected = 0.0 if i == j else single_affectance(w, v, params)
            got = mat[i, j]
            assert got == expected or math.isclose(got, expected, rel_tol=1e-12)


@given(separated_links(), params_strategy)
@settings(max_examples=60, deadline=None)
def test_feasibility_verdicts_agree(links, params):
    """Affectance-based and SINR-based feasibility must agree at zero noise.

    With N = 0 the affectance of a link is exactly beta / SINR, so the two
    routes are algebraically identical and may differ at most by float
    rounding right at the threshold.
    """
    if not links:
        return
    report = is_feasible(links, params)
    if report.margin > 1e-9 or report.margin < -1e-9:
        assert report.feasible == report.sinr_feasible


@given(separated_links(), params_strategy)
@settings(max_examples=40, deadline=None)
def test_subset_monotone(links, params):
    """Affectance on a victim never decreases when the set grows."""
    if len(links) < 2:
        return
    v = links[0]
    small = links[1 : len(links) // 2 + 1]
    big = links[1:]
    assert affectance(big, v, params) >= affectance(small, v, params) - 1e-15
