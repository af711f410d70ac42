"""
LineLabel and NodeIndex classes.
"""

# =============================================================================

import re
from functools import total_ordering
from typing import Tuple

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing import TypeVar

    Self = TypeVar("Self", bound="_Label")

from qknh.utils import Branch

# =============================================================================

__all__ = (
    "LineLabel",
    "NodeIndex",
)

# =============================================================================

_LINE_CODE = re.compile(r"^\s*([AaCc])\s*([+-]?\d+)\s*$")

# =============================================================================


@total_ordering
class _Label:
    """Common behavior of line and node labels.

    A label is an immutable tuple of integer-like parts, set as `_parts`
    by the subclass constructor. Subclasses also provide `code`, the
    short text form that `from_code()` parses back. Two labels are equal
    only if they are of the same kind with the same parts; a label never
    equals a plain tuple.
    """

    # pylint: disable=no-member

    @classmethod
    def of(cls, obj) -> Self:
        """Returns `obj` as a label of this kind.

        Accepts a label, a code such as "A3" or "(1,-2)", or a tuple of
        constructor args.
        """
        if obj is None:
            return None
        if isinstance(obj, cls):
            return obj
        if isinstance(obj, str):
            return cls.from_code(obj)
        try:
            args = tuple(obj)
        except TypeError:
            pass
        else:
            return cls(*args)
        raise TypeError(
            f"Cannot create {cls.__name__} from {obj.__class__.__name__}"
        )

    @classmethod
    def from_code(cls, code: str) -> Self:
        raise NotImplementedError(
            f"{cls.__name__}: function `from_code()` not implemented"
        )

    @property
    def _sort_key(self) -> tuple:
        return self._parts

    def __str__(self):
        return self.code

    def __repr__(self):
        return f"{self.__class__.__name__}.of({self.code!r})"

    def __hash__(self):
        return hash((self.__class__, self._parts))

    def __eq__(self, other):
        if not isinstance(other, _Label):
            return NotImplemented
        return type(self) is type(other) and self._parts == other._parts

    def __lt__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._sort_key < other._sort_key

    def __iter__(self):
        yield from self._parts


# =============================================================================


class LineLabel(_Label):
    """Labels one zeroth-order level line, (A, m) or (C, n).

    Properties:
        branch (Branch): The branch of the line.
        index (int): The quantum label on that branch.
        code (str): The line code, such as "A3" or "C-2".
    """

    def __init__(self, branch, index: int):
        if not isinstance(branch, Branch):
            branch = Branch(str(branch).upper())
        if int(index) != index:
            raise ValueError(f"`index` must be an integer (got {index})")
        index = int(index)

        self._branch = branch
        self._index = index

        self._parts = (branch, index)

    @classmethod
    def from_code(cls, code: str) -> "LineLabel":
        """Constructs a LineLabel from its code.

        Args:
            code (str): A branch letter followed by a signed integer.

        Raises:
            ValueError: If `code` is invalid.
        """
        match = _LINE_CODE.match(code)
        if match is None:
            raise ValueError(f"Invalid line code: {code!r}")
        branch, index = match.groups()
        return cls(Branch(branch.upper()), int(index))

    @property
    def branch(self) -> Branch:
        """The branch of the line."""
        return self._branch

    @property
    def index(self) -> int:
        """The quantum label on that branch."""
        return self._index

    @property
    def code(self) -> str:
        """The line code."""
        return f"{self._branch.value}{self._index}"

    @property
    def _sort_key(self) -> tuple:
        # enum members do not order
        return self._branch.value, self._index


class NodeIndex(_Label):
    """Labels one crossing (m, n) of line A_m with line C_n.

    Properties:
        m (int): The A label.
        n (int): The C label.
        code (str): The node code, such as "(1,-2)".
        lines (Tuple[LineLabel, LineLabel]): The two crossing lines.
    """

    def __init__(self, m: int, n: int):
        m, n = int(m), int(n)
        self._m = m
        self._n = n

        self._parts = (m, n)

    @classmethod
    def from_code(cls, code: str) -> "NodeIndex":
        """Constructs a NodeIndex from a code such as "(1,-2)".

        Raises:
            ValueError: If `code` is invalid.
        """
        parts = code.strip().strip("()").split(",")
        if len(parts) != 2:
            raise ValueError(f"Invalid node code: {code!r}")
        try:
            m, n = (int(p) for p in parts)
        except ValueError:
            raise ValueError(f"Invalid node code: {code!r}") from None
        return cls(m, n)

    @property
    def code(self) -> str:
        """The node code."""
        return f"({self._m},{self._n})"

    @property
    def m(self) -> int:
        """The A label."""
        return self._m

    @property
    def n(self) -> int:
        """The C label."""
        return self._n

    @property
    def lines(self) -> Tuple[LineLabel, LineLabel]:
        """The two crossing lines, A first."""
        return LineLabel(Branch.A, self._m), LineLabel(Branch.C, self._n)
