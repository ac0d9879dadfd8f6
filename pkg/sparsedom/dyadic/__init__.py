from sparsedom.dyadic.containers import container_predicates, find_shifted_container
from sparsedom.dyadic.cubes import DyadicCube, RealCube, ancestor, children
from sparsedom.dyadic.grid import DyadicGrid

__all__ = [
    "DyadicCube",
    "RealCube",
    "DyadicGrid",
    "children",
    "ancestor",
    "find_shifted_container",
    "container_predicates",
]
