"""Per-edge partition assignments and their file formats."""
import csv
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import NDArray

from chunkpart.errors import DomainError, FormatError

ASSIGNMENT_MAGIC = b"CPAS"
_HEADER = struct.Struct("<4sIQ")
CSV_HEADER = ["edge_index", "partition"]


@dataclass(frozen=True)
class Assignment:
    """``part_of[e]`` is the partition of canonical edge ``e``."""

    k: int
    part_of: NDArray[np.int64]

    def __post_init__(self):
        if self.k < 1:
            raise DomainError(f"partition count must be >= 1, got k={self.k}")
        part_of = np.asarray(self.part_of, dtype=np.int64)
        if part_of.size and (part_of.min() < 0 or part_of.max() >= self.k):
            raise DomainError(f"partition ids outside [0, {self.k})")
        part_of.flags.writeable = False
        object.__setattr__(self, "part_of", part_of)

    @property
    def edge_count(self) -> int:
        return int(self.part_of.shape[0])

    def sizes(self) -> NDArray[np.int64]:
        return np.bincount(self.part_of, minlength=self.k)


def write_assignment(path: Union[str, Path], assignment: Assignment) -> None:
    """CPAS binary for ``*.cpas`` paths, CSV otherwise."""
    if str(path).endswith(".cpas"):
        with open(path, "wb") as f:
            f.write(_HEADER.pack(ASSIGNMENT_MAGIC, assignment.k, assignment.edge_count))
            f.write(assignment.part_of.astype("<u4").tobytes())
        return
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        writer.writerows(enumerate(assignment.part_of.tolist()))


def read_assignment(path: Union[str, Path], k: int = 0) -> Assignment:
    """Read CPAS or CSV. CSV carries no k, so it is ``k`` if given, else max id + 1."""
    data = Path(path).read_bytes()
    if data[:4] == ASSIGNMENT_MAGIC:
        if len(data) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        _, stored_k, edge_count = _HEADER.unpack_from(data)
        if len(data) != _HEADER.size + 4 * edge_count:
            raise FormatError(f"{path}: expected {edge_count} partition ids")
        part_of = np.frombuffer(data, dtype="<u4", offset=_HEADER.size).astype(np.int64)
        return Assignment(k=stored_k, part_of=part_of)

    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: neither a CPAS file nor a UTF-8 CSV") from e
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != CSV_HEADER:
        raise FormatError(f"{path}: expected CSV header {','.join(CSV_HEADER)}")
    try:
        pairs = np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64).reshape(-1, 2)
    except ValueError as e:
        raise FormatError(f"{path}: malformed assignment row ({e})") from e
    if not np.array_equal(pairs[:, 0], np.arange(pairs.shape[0])):
        raise FormatError(f"{path}: edge_index column must be 0..|E|-1 in order")
    part_of = pairs[:, 1]
    return Assignment(k=k or (int(part_of.max()) + 1 if part_of.size else 1), part_of=part_of)
