"""Two-orthogonal tensor decompositions and singular vector tuples."""
