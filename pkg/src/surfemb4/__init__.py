"""Embedding obstructions for surfaces in 4-manifolds.

Library layout:

- ``groups``: finite/abelian group backends, characters, signed subgroups
- ``gamma``: intersection-number target groups and reduction into them
- ``whitney``: double points, Whitney collections, t-counts, moves
- ``bands``: surface homology model, the band invariant, characteristic checks
- ``engine``: the decision flowchart and homotopy-class analysis
- ``knots``: Seifert-matrix invariants and genus bounds
- ``schema`` / ``cli``: instance files and the command line
"""

from .engine import TOOL_VERSION as __version__  # noqa: F401
