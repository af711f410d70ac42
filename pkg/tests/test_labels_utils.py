"""
Tests for line and node labels, enums, argument checks, and the error
hierarchy.
"""

# =============================================================================

import math
import os

import pytest

from qknh import errors
from qknh.labels import LineLabel, NodeIndex
from qknh.utils import (
    ActionSymbol,
    Branch,
    Family,
    Zone,
    check_positive,
    check_probability,
    check_window,
    thread_count,
)

# =============================================================================


def test_line_labels():
    label = LineLabel.from_code("c-2")
    assert label.branch is Branch.C
    assert label.index == -2
    assert label.code == "C-2"
    assert label == LineLabel("C", -2)
    assert LineLabel.of("A3") == LineLabel(Branch.A, 3)
    assert LineLabel.of(("A", 3)) == LineLabel(Branch.A, 3)
    assert sorted([LineLabel("C", 0), LineLabel("A", 5)])[0].code == "A5"
    assert repr(label) == "LineLabel.of('C-2')"
    with pytest.raises(ValueError):
        LineLabel.from_code("B1")
    with pytest.raises(ValueError):
        LineLabel("A", 1.5)


def test_node_indices():
    node = NodeIndex.from_code("(1,-2)")
    assert (node.m, node.n) == (1, -2)
    assert str(node) == "(1,-2)"
    assert node.lines == (LineLabel("A", 1), LineLabel("C", -2))
    assert tuple(node) == (1, -2)
    assert len({NodeIndex(0, 0), NodeIndex.of((0, 0))}) == 1
    with pytest.raises(ValueError):
        NodeIndex.from_code("(1,2,3)")
    with pytest.raises(ValueError):
        NodeIndex.from_code("(a,b)")
    with pytest.raises(TypeError):
        NodeIndex.of(1.5)


def test_labels_are_not_tuples():
    label = LineLabel("A", 1)
    assert label != (Branch.A, 1)
    assert (Branch.A, 1) != label
    assert NodeIndex(1, 2) != (1, 2)
    assert NodeIndex(1, 2) != LineLabel("A", 1)
    with pytest.raises(TypeError):
        _ = NodeIndex(0, 0) < (1, 1)
    phases = {NodeIndex(1, 2): 0.5, label: 0.25}
    assert phases[NodeIndex.of("(1,2)")] == 0.5
    assert phases[LineLabel.of("A1")] == 0.25
    assert (1, 2) not in phases


def test_enums():
    assert ActionSymbol.parse("St_A") is ActionSymbol.ST_A
    assert ActionSymbol.parse("T_B") is ActionSymbol.T_B
    with pytest.raises(errors.UnknownSymbol):
        ActionSymbol.parse("S_B")
    assert Zone.BELOW.human_readable() == "diabatic"
    assert Zone.ABOVE.title() == "Above"
    assert Family.QUARTIC_DOUBLE_WELL.title() == "Quartic Double Well"


def test_argument_checks():
    check_positive(a=1.0, b=2)
    with pytest.raises(ValueError, match="`b`"):
        check_positive(a=1.0, b=0.0)
    with pytest.raises(ValueError):
        check_positive(a=math.nan)
    with pytest.raises(ValueError):
        check_probability(p=1.1)
    assert check_window("w", [0, 1]) == (0.0, 1.0)
    with pytest.raises(ValueError):
        check_window("w", (1.0, 0.0))
    with pytest.raises(ValueError):
        check_window("w", (0.0, math.inf))
    with pytest.raises(ValueError):
        check_window("w", 3.0)


def test_thread_count(monkeypatch):
    monkeypatch.delenv("QKNH_THREADS", raising=False)
    assert thread_count() == (os.cpu_count() or 1)
    monkeypatch.setenv("QKNH_THREADS", "3")
    assert thread_count() == 3
    for bad in ("0", "many"):
        monkeypatch.setenv("QKNH_THREADS", bad)
        with pytest.raises(errors.ConfigError):
            thread_count()


# errors ======================================================================


def test_error_hierarchy():
    for name in errors.__all__:
        cls = getattr(errors, name)
        assert issubclass(cls, errors.QknhError)
        assert isinstance(cls.module, str)
    assert issubclass(errors.NoBarrier, ValueError)
    assert issubclass(errors.WindowOverflow, RuntimeError)
    wrapped = errors.ExperimentError("failed", "lznet")
    assert wrapped.module == "lznet"
    assert errors.ExperimentError("failed").module == "runner"
