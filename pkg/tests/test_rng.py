import numpy as np

from luminark.core.rng import MASK64, SplitMix64, derive_seed, splitmix64_block, to_unit_float


def reference_splitmix64(seed: int, n: int) -> list[int]:
    """Scalar SplitMix64 in pure Python integers."""
    state = seed & MASK64
    out = []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def test_seed_zero_first_output():
    assert SplitMix64(0).next_u64() == 0xE220A8397B1DCDAF


def test_block_matches_scalar_reference():
    for seed in (0, 1, 42, 2**63, MASK64):
        block = splitmix64_block(seed, 16)
        assert [int(v) for v in block] == reference_splitmix64(seed, 16)


def test_batch_rows_are_independent_streams():
    seeds = np.array([3, 5, 7], dtype=np.uint64)
    block = splitmix64_block(seeds, 8)
    assert block.shape == (3, 8)
    for row, seed in zip(block, (3, 5, 7)):
        assert [int(v) for v in row] == reference_splitmix64(seed, 8)


def test_take_continues_the_stream():
    rng = SplitMix64(99)
    first = rng.take(3)
    second = rng.take(5)
    assert rng.consumed == 8
    combined = [int(v) for v in np.concatenate([first, second])]
    assert combined == reference_splitmix64(99, 8)


def test_derive_seed_is_indexed_output():
    outputs = reference_splitmix64(1234, 6)
    for i in range(6):
        assert derive_seed(1234, i) == outputs[i]


def test_uniform_uses_top_53_bits():
    raw = reference_splitmix64(7, 4)
    expected = [(v >> 11) * 2.0**-53 for v in raw]
    assert SplitMix64(7).uniform(4).tolist() == expected
    u = to_unit_float(splitmix64_block(11, 1000))
    assert np.all((u >= 0.0) & (u < 1.0))


def test_normal_is_deterministic_and_standard():
    a = SplitMix64(5).normal(20001)
    b = SplitMix64(5).normal(20001)
    assert np.array_equal(a, b)
    assert a.shape == (20001,)
    assert abs(a.mean()) < 0.05
    assert abs(a.std() - 1.0) < 0.05


def test_exponential_is_positive_with_unit_mean():
    e = SplitMix64(8).exponential(20000)
    assert np.all(e >= 0.0)
    assert abs(e.mean() - 1.0) < 0.05
