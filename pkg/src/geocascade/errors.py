"""Exception types shared across the package."""


class ParameterDomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateGeometryError(ValueError):
    """A node's connection disk lies entirely inside the attack disk.

    Such a node has no neighbors outside the attacked region, so the
    conditional per-neighbor load moments are undefined for it.
    """
