import numpy as np

from mfpotts.rng import Stream


def test_reproducible():
    assert np.array_equal(Stream(3).uniform(10), Stream(3).uniform(10))
    assert not np.array_equal(Stream(3).uniform(10), Stream(4).uniform(10))


def test_uniform_range_and_mean():
    u = Stream(0).uniform(200000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005


def test_coins():
    c = Stream(1).coins(100000)
    assert set(np.unique(c)) == {-1.0, 1.0}
    assert abs(c.mean()) < 0.01


def test_normal_moments():
    z = Stream(2).normal(200001)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1.0) < 0.01
    assert abs(np.mean(z ** 4) - 3.0) < 0.05


def test_words_are_raw_pcg64():
    w = Stream(5).words(4)
    ref = np.random.PCG64(5).random_raw(4)
    assert np.array_equal(w, ref)
