"""
Edge-list text format

Line 1 is "n d" (d is "-" for untagged graphs), then one "u v" line per edge with
0 <= u < v < n in lexicographic order. Blank lines and '#' comments are ignored.
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union

from ..core.exceptions import ParameterError
from ..models.graph import Graph


def format_edgelist(graph: Graph, comment: Optional[str] = None) -> str:
    lines: List[str] = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"{graph.n} {graph.d if graph.d is not None else '-'}")
    lines.extend(f"{u} {v}" for u, v in graph.edges)
    return "\n".join(lines) + "\n"


def parse_edgelist(text: str) -> Graph:
    header: Optional[Tuple[int, Optional[int]]] = None
    edges: List[Tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParameterError(f"line {lineno}: expected two fields, got {len(fields)}")
        try:
            if header is None:
                n = int(fields[0])
                d = None if fields[1] == "-" else int(fields[1])
                header = (n, d)
            else:
                edges.append((int(fields[0]), int(fields[1])))
        except ValueError as e:
            raise ParameterError(f"line {lineno}: {e}") from e
    if header is None:
        raise ParameterError("missing 'n d' header line")
    n, d = header
    return Graph.from_edges(n, edges, d=d)


def read_edgelist(path: Union[str, Path]) -> Graph:
    return parse_edgelist(Path(path).read_text())


def write_edgelist(graph: Graph, path: Union[str, Path], comment: Optional[str] = None) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(format_edgelist(graph, comment))
    return target
