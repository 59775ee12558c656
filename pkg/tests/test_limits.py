# tests/test_limits.py
import pytest

from Laboratory.Limits import (
    geometric_grid,
    is_bounded,
    tail_non_decreasing,
    tail_non_increasing,
    tends_to_zero,
)


def test_geometric_grid():
    assert geometric_grid(1.0, 2.0, 4) == [1.0, 2.0, 4.0, 8.0]
    assert geometric_grid(0.5, 0.5, 3) == [0.5, 0.25, 0.125]
    for args in [(1.0, 2.0, 0), (0.0, 2.0, 3), (1.0, 1.0, 3)]:
        with pytest.raises(ValueError):
            geometric_grid(*args)


def test_tail_windows_only_look_at_the_end():
    values = [5.0, 1.0, 9.0, 4.0, 3.0, 2.0, 1.0]
    assert tail_non_increasing(values)
    assert not tail_non_increasing(values, window=6)
    assert tail_non_decreasing([3.0, 1.0, 1.0, 2.0, 2.0])
    assert not tail_non_decreasing([1.0, 2.0, 3.0, 2.5])


def test_plateaus_count_as_monotone():
    assert tail_non_increasing([1.0, 1.0, 1.0, 1.0])
    assert tail_non_increasing([1.0, 1.0 + 1e-13, 1.0, 1.0])


def test_tends_to_zero():
    assert tends_to_zero([1.0, 0.5, 0.1, 1e-4, 1e-6], 1e-3)
    assert not tends_to_zero([1.0, 0.5, 0.1, 1e-2], 1e-3)  # final value too large
    assert not tends_to_zero([1.0, 1e-7, 1e-5, 1e-6, 1e-4 * 1e-1], 1e-3, window=4)
    assert not tends_to_zero([], 1e-3)


def test_noise_floor_reads_as_zero():
    noisy = [0.0, 3e-11, 1e-11, 4e-11, 2e-11]
    assert not tends_to_zero(noisy, 1e-6)
    assert tends_to_zero(noisy, 1e-6, floor=1e-9)


def test_is_bounded():
    assert is_bounded([1.0, 2.0, 3.0, 2.0, 2.0, 2.0, 2.0])
    assert is_bounded([1.0, 5.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    assert not is_bounded([1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
    assert not is_bounded([1.0, 2.0, 3.0])
