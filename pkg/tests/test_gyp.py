import math

import numpy as np
import pytest

from gypdiv import (
    AccuracyError,
    DomainError,
    InfiniteDivergenceError,
    Interval,
    Partition,
    SizeGuardError,
    chi_square,
    common_refinement,
    convergence_sweep,
    detect_infinite,
    divergence,
    gaussian_pair,
    gyp_approximate,
    hellinger,
    kl,
    make_discrete_pair,
    named_countable_pair,
    normalize,
    partition_divergence,
    total_variation,
    tsallis_generator,
)

GAUSS = gaussian_pair(0.0, 1.0, 1.0, 1.0)


@pytest.fixture(scope="module")
def kl_certificate():
    return gyp_approximate(kl(), GAUSS, 1e-2)


def test_certificate_soundness(kl_certificate):
    res = kl_certificate
    assert res.certified
    assert 0.0 <= res.gap <= res.epsilon + res.reference.error_bound
    assert res.reference.value == pytest.approx(0.5, abs=1e-9)
    assert res.H0 < 1.0 < res.K0
    assert res.m_cells == res.m_interior + 2


def test_bin_confinement(kl_certificate):
    res = kl_certificate
    part = res.partition
    interior = slice(1, res.m_interior + 1)
    widths = np.exp(part.log_hi[interior]) - np.exp(part.log_lo[interior])
    assert np.all(widths < res.delta)
    p, r, _, _ = part.masses(GAUSS)
    lo = np.exp(part.log_lo[interior])
    hi = np.exp(part.log_hi[interior])
    ratio = p[interior] / r[interior]
    assert np.all(ratio >= lo * (1 - 1e-9)) and np.all(ratio <= hi * (1 + 1e-9))


def test_tail_gaps(kl_certificate):
    res = kl_certificate
    ng = normalize(kl())
    for interval, stored in ((Interval(-math.inf, math.log(res.H0)), res.tail_gap_low),
                             (Interval(math.log(res.K0), math.inf, False, True),
                              res.tail_gap_high)):
        m = GAUSS.cell_masses(interval)
        gap = GAUSS.restricted_divergence(ng, interval).value - ng.cell_value(*m)
        assert gap == pytest.approx(stored, abs=1e-12)
        assert gap < res.epsilon / 3


@pytest.mark.parametrize("factory,ref", [
    (kl, 0.5),
    (hellinger, 2 * (1 - math.exp(-1 / 8))),
    (lambda: tsallis_generator(2.0), math.e - 1),
])
def test_gaussian_references(factory, ref):
    res = gyp_approximate(factory(), GAUSS, 1e-2)
    assert res.reference.value == pytest.approx(ref, abs=1e-8)
    assert ref - 1e-2 - 1e-8 <= res.lower_bound <= ref + 1e-8


def test_discrete_certificate_is_tight():
    pair = make_discrete_pair([0.1, 0.2, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25])
    res = gyp_approximate(kl(), pair, 1e-6)
    assert res.lower_bound == pytest.approx(divergence(kl(), pair).value, abs=1e-6)


def test_identical_pair():
    res = gyp_approximate(kl(), gaussian_pair(0, 1, 0, 1), 1e-3)
    assert res.lower_bound == 0.0 and res.gap == 0.0


def test_gyp_errors():
    with pytest.raises(DomainError):
        gyp_approximate(kl(), GAUSS, 0.0)
    with pytest.raises(InfiniteDivergenceError):
        gyp_approximate(kl(), make_discrete_pair([0.5, 0.5], [1.0, 0.0]), 1e-3)
    with pytest.raises(SizeGuardError):
        gyp_approximate(kl(), GAUSS, 1e-3, max_cells=1000)
    with pytest.raises(AccuracyError):
        gyp_approximate(kl(), named_countable_pair("zeta_vs_geometric", cap=10**4), 1e-3)


def test_to_dict_tags_infinities(kl_certificate):
    d = kl_certificate.to_dict()
    assert d["certified"] is True
    assert d["m_cells"] == kl_certificate.m_cells


# --------------------------------------------------------------------------
# sweeps


def test_sweep_rows():
    rows = convergence_sweep(kl(), GAUSS, [1e-3, 1e-1, 1e-2])
    assert [r.epsilon for r in rows] == [1e-1, 1e-2, 1e-3]
    for row in rows:
        assert 0 <= row.gap <= row.epsilon + 1e-9
    assert [r.m_cells for r in rows] == sorted(r.m_cells for r in rows)


def test_sweep_identical_pair_has_zero_gaps():
    rows = convergence_sweep(hellinger(), gaussian_pair(1, 2, 1, 2), [1e-1, 1e-2])
    assert all(r.gap == 0.0 for r in rows)


def test_sweep_gaps_monotone_over_random_pairs():
    rng = np.random.default_rng(11)
    gens = [kl(), hellinger(), total_variation()]
    for i in range(50):
        pair = gaussian_pair(0.0, 1.0, rng.uniform(-1.5, 1.5), rng.uniform(0.8, 1.25))
        rows = convergence_sweep(gens[i % 3], pair, [1e-1, 3e-2, 1e-2])
        gaps = [r.gap for r in rows]
        assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:])), (i, gaps)
        assert all(r.gap <= r.epsilon + 1e-9 for r in rows)


def test_common_refinement():
    a = Partition.from_cuts([0.5, 2.0])
    b = Partition.from_cuts([1.0, 2.0], split_infinity=True)
    c = common_refinement(a, b)
    assert c.cuts == [0.5, 1.0, 2.0]
    assert str(c.cell(len(c) - 1)) == "[inf, inf]"
    # the same point on opposite sides becomes a singleton cell
    left = Partition.from_intervals([Interval.from_ratio(0, 1, True, True),
                                     Interval.from_ratio(1, math.inf, False, True)])
    point = common_refinement(left, Partition.from_cuts([1.0]))
    assert [str(x) for x in point] == ["[0, 1)", "[1, 1]", "(1, inf]"]


# --------------------------------------------------------------------------
# infinite divergences


@pytest.fixture(scope="module")
def countable_evidence():
    pair = named_countable_pair("zeta_vs_geometric", cap=10**5)
    return pair, detect_infinite(kl(), pair, 5.0, 10**5)


def test_countable_evidence(countable_evidence):
    pair, ev = countable_evidence
    assert ev.exceeded and ev.total > 5.0
    sums = np.asarray(ev.partial_sums)
    assert np.all(np.diff(sums) >= 0)
    value = partition_divergence(kl(), pair, ev.to_partition()).value
    assert value >= ev.total - 1e-9


def test_evidence_cells_are_disjoint_levels(countable_evidence):
    _, ev = countable_evidence
    part = ev.to_partition()
    assert len(part) >= len(ev.cells)
    ng = normalize(kl())
    for cell in ev.cells:
        if cell.level is None or cell.r == 0.0:
            continue
        assert ng.cell_value(cell.p, cell.r) == pytest.approx(cell.value, rel=1e-9, abs=1e-300)


def test_evidence_thresholds_match_generator():
    from gypdiv import level_threshold
    pair = named_countable_pair("zeta_vs_geometric", cap=2000)
    ev = detect_infinite(chi_square(), pair, 3.0, 50)
    ng = normalize(chi_square())
    for n, b in ev.thresholds[:5]:
        assert b == pytest.approx(level_threshold(ng, n), rel=1e-12)


def test_evidence_partition_bounds_total_when_inconclusive():
    pair = named_countable_pair("zeta_vs_geometric", cap=5000)
    ev = detect_infinite(kl(), pair, 100.0, 200)
    assert not ev.exceeded and ev.n_used == 200
    value = partition_divergence(kl(), pair, ev.to_partition()).value
    assert value >= ev.total - 1e-9


def test_slack_bound_on_discrete_models():
    rng = np.random.default_rng(2)
    ng = normalize(kl())
    for _ in range(20):
        p = rng.dirichlet(np.full(40, 0.3))
        r = rng.dirichlet(np.full(40, 0.3))
        pair = make_discrete_pair(p, r)
        ev = detect_infinite(kl(), pair, 1e9, 10**4)
        slack = 0.0
        mass = 0.0
        for cell in ev.cells:
            if cell.level is None:
                continue
            inside = pair.restricted_divergence(ng, cell.interval).value
            slack += inside - cell.value
            mass += cell.r
        assert slack <= mass + 1e-12
        assert mass <= 1.0 + 1e-12


def test_bernoulli_not_exceeded():
    pair = make_discrete_pair([0.5, 0.5], [0.25, 0.75])
    ev = detect_infinite(kl(), pair, 1.0, 1000)
    assert not ev.exceeded
    assert ev.total == pytest.approx(divergence(normalize(kl()), pair).value, abs=1e-12)


def test_identical_pair_evidence():
    pair = make_discrete_pair([0.3, 0.7], [0.3, 0.7])
    ev = detect_infinite(kl(), pair, 1.0, 100)
    assert not ev.exceeded and ev.total == 0.0


def test_singular_atom_is_immediate():
    pair = make_discrete_pair([0.5, 0.5], [1.0, 0.0])
    ev = detect_infinite(kl(), pair, 10.0, 5)
    assert ev.exceeded and ev.total == math.inf
    assert ev.cells[0].side in ("zero", "infinity")


def test_detect_validation():
    pair = make_discrete_pair([0.5, 0.5], [0.25, 0.75])
    with pytest.raises(DomainError):
        detect_infinite(kl(), pair, 0.0, 10)
    with pytest.raises(DomainError):
        detect_infinite(kl(), pair, 1.0, 0)
