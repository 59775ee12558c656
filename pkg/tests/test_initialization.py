# tests/test_initialization.py
import threading

import pytest

import CONFIGURATION as cfg
from Initialization import ConfigSyntaxError, format_float, ordered_map, parse_json_config


def test_ordered_map_keeps_input_order():
    assert ordered_map(lambda v: v * v, range(20), threads=4) == [v * v for v in range(20)]
    assert ordered_map(lambda v: v, [], threads=4) == []


def test_nested_maps_run_serially():
    seen = set()

    def inner(v):
        seen.add(threading.get_ident())
        return v + 1

    def outer(v):
        return ordered_map(inner, range(v), threads=8)

    assert ordered_map(outer, [3, 5], threads=2) == [[1, 2, 3], [1, 2, 3, 4, 5]]
    # inner calls stay on the two outer worker threads
    assert len(seen) <= 2


def test_worker_count(monkeypatch):
    assert cfg.worker_count(3) == 3
    monkeypatch.setattr(cfg, "SINGCONV_THREADS", 5)
    assert cfg.worker_count() == 5
    monkeypatch.setattr(cfg, "SINGCONV_THREADS", 0)
    assert cfg.worker_count() >= 1
    with pytest.raises(ValueError):
        cfg.worker_count(-1)


def test_parse_json_config_allows_comment_lines():
    data = parse_json_config('{\n  // kernel from the catalog\n  "kernel": {"catalog": "box"}\n}\n')
    assert data == {"kernel": {"catalog": "box"}}


def test_parse_json_config_reports_the_line():
    with pytest.raises(ConfigSyntaxError) as info:
        parse_json_config('{\n  "kernel": {"catalog": "box"},\n  "target": \n}\n')
    assert info.value.line == 4
    assert "line 4" in str(info.value)


def test_parse_json_config_needs_an_object():
    with pytest.raises(ConfigSyntaxError):
        parse_json_config("[1, 2]")


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(2) == "2"
    assert float(format_float(1.0 / 3.0)) == 1.0 / 3.0
