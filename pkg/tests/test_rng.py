import numpy as np
import pytest

from diffred import Purpose, RandomStream, gaussian_draw


def test_same_address_is_byte_identical():
    a = gaussian_draw(RandomStream(42, Purpose.GAUSSIAN_MAP, 3), 1001)
    b = gaussian_draw(RandomStream(42, Purpose.GAUSSIAN_MAP, 3), 1001)
    assert a.tobytes() == b.tobytes()


def test_prefix_stable_across_counts():
    s = RandomStream(5, Purpose.SYNTH_DATA, 0)
    assert np.array_equal(gaussian_draw(s, 7), gaussian_draw(s, 20)[:7])


def test_moments_of_a_million_draws():
    z = gaussian_draw(RandomStream(1, Purpose.GAUSSIAN_MAP, 0), 10**6)
    assert abs(z.mean()) < 4 / np.sqrt(10**6)
    assert abs(z.var() - 1) < 0.01


@pytest.mark.parametrize(
    "other",
    [
        RandomStream(1, Purpose.GAUSSIAN_MAP, 1),
        RandomStream(1, Purpose.SYNTH_DATA, 0),
        RandomStream(2, Purpose.GAUSSIAN_MAP, 0),
    ],
)
def test_distinct_addresses_are_uncorrelated(other):
    a = gaussian_draw(RandomStream(1, Purpose.GAUSSIAN_MAP, 0), 10**5)
    b = gaussian_draw(other, 10**5)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.02


def test_uniforms_exclude_zero():
    u = RandomStream(9, Purpose.PAIR_SAMPLE, 0).uniform(10**5)
    assert u.min() > 0 and u.max() <= 1


def test_box_muller_pairs():
    # each (even, odd) pair comes from one pair of uniforms
    s = RandomStream(3, Purpose.GAUSSIAN_MAP, 0)
    u = s.uniform(4).reshape(2, 2)
    r = np.sqrt(-2 * np.log(u[:, 0]))
    expected = np.column_stack([r * np.cos(2 * np.pi * u[:, 1]), r * np.sin(2 * np.pi * u[:, 1])]).ravel()
    np.testing.assert_allclose(gaussian_draw(s, 4), expected, rtol=0, atol=0)


def test_rejects_out_of_range_seed():
    with pytest.raises(ValueError):
        RandomStream(-1)
    with pytest.raises(ValueError):
        RandomStream(0, Purpose.GAUSSIAN_MAP, 1 << 64)
