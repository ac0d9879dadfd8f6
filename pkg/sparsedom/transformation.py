import logging
import os
from typing import Any, Dict, List, Optional

import yaml

from sparsedom.data_quality_checks.data_quality import DataQuality
from sparsedom.data_validations.data_validator import DocumentSchemaException, ParameterRangeException
from sparsedom.dyadic import DyadicCube, DyadicGrid
from sparsedom.lerner import SPARSENESS, SparseFamily
from sparsedom.shifts import ShiftCoefficients
from sparsedom.step_functions import DyadicStepFunction
from sparsedom.weights import Weight

DEFINITIONS_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "suite_definitions.yml")


class TransformationFactory:
    """
    Factory class for turning JSON documents into domain objects and back.
    """

    logger = logging.getLogger(__name__)
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    # Load document schemas from YAML
    with open(DEFINITIONS_PATH, "r") as file:
        schema_definitions = yaml.safe_load(file)["schema_definitions"]

    @staticmethod
    def required_keys(case: str) -> List[str]:
        """Top-level keys a document of the given case must carry."""
        schema = TransformationFactory.schema_definitions.get(case)
        if schema is None:
            raise ValueError(f"Unknown transformation case: {case}")
        return [field["name"] for field in schema if field.get("required", True)]

    @staticmethod
    def check_document(data: Dict, case: str):
        DataQuality(TransformationFactory.schema_definitions).check_data_quality_document(data, case)

    @staticmethod
    def _grid(data: Dict) -> DyadicGrid:
        """The rooted grid of a document; the root defaults to the unit cube [0,1)^d."""
        root = data.get("root")
        root = DyadicCube.unit(data["d"]) if root is None else TransformationFactory.transform_cube(root)
        if root.dimension != data["d"]:
            raise DocumentSchemaException(f"Root {root} does not have dimension {data['d']}.")
        return DyadicGrid(root, data["depth"])

    @staticmethod
    def transform_cube(data: Dict) -> DyadicCube:
        TransformationFactory.check_document(data, "cube")
        return DyadicCube(data["d"], data["level"], tuple(data["index"]), data.get("shift"))

    @staticmethod
    def transform_function(data: Dict) -> DyadicStepFunction:
        """
        Builds a step function; the values list must have 2^{depth d} entries in lexicographic
        cell order.
        """
        TransformationFactory.check_document(data, "function")
        try:
            function = DyadicStepFunction.from_grid(TransformationFactory._grid(data), data["values"])
        except ParameterRangeException as e:
            raise DocumentSchemaException(str(e)) from e
        TransformationFactory.logger.info(f"Function document transformed: {function}.")
        return function

    @staticmethod
    def transform_weight(data: Dict) -> Weight:
        TransformationFactory.check_document(data, "weight")
        grid = TransformationFactory._grid(data)
        if len(data["values"]) != grid.cell_count:
            raise DocumentSchemaException(f"Weight document needs {grid.cell_count} values, got {len(data['values'])}.")
        # non-positive cells raise NonPositiveWeightException from the Weight itself
        return Weight.from_grid(grid, data["values"])

    @staticmethod
    def transform_coefficients(data: Dict) -> ShiftCoefficients:
        TransformationFactory.check_document(data, "coefficients")
        grid = TransformationFactory._grid(data)
        entries = {}
        for entry in data["entries"]:
            cube = TransformationFactory.transform_cube(entry["cube"])
            if cube in entries:
                raise DocumentSchemaException(f"Cube {cube} appears twice in the coefficients document.")
            entries[cube] = entry["value"]
        coefficients = ShiftCoefficients(grid, entries)
        TransformationFactory.logger.info(f"Coefficients document transformed: {len(coefficients)} cubes.")
        return coefficients

    @staticmethod
    def transform_family(data: Dict) -> SparseFamily:
        TransformationFactory.check_document(data, "family")
        grid = TransformationFactory._grid(data)
        cubes = [TransformationFactory.transform_cube(cube) for cube in data["cubes"]]
        for cube in cubes:
            grid.relative_index(cube)
        family = SparseFamily.from_cubes(grid, cubes, data.get("gamma") or SPARSENESS)
        if not family.is_sparse():
            TransformationFactory.logger.warning(f"Family document is not {family.gamma}-sparse.")
        return family

    @classmethod
    def transform(cls, data: Any, case: str):
        """
        Returns the domain object for the given document case.

        Args:
            data (Any): Parsed JSON document.
            case (str): 'cube', 'function', 'weight', 'coefficients' or 'family'.

        Returns:
            The DyadicCube, DyadicStepFunction, Weight, ShiftCoefficients or SparseFamily.

        Raises:
            ValueError: If the case is not recognized.
            DocumentSchemaException: If the document does not match its schema.
        """
        if case == "cube":
            return cls.transform_cube(data)
        elif case == "function":
            return cls.transform_function(data)
        elif case == "weight":
            return cls.transform_weight(data)
        elif case == "coefficients":
            return cls.transform_coefficients(data)
        elif case == "family":
            return cls.transform_family(data)
        else:
            raise ValueError(f"Unknown transformation case: {case}")

    @staticmethod
    def cube_document(cube: DyadicCube) -> Dict:
        return {"d": cube.dimension, "level": cube.level, "index": list(cube.index), "shift": list(cube.shift)}

    @staticmethod
    def _grid_document(grid: DyadicGrid) -> Dict:
        return {"d": grid.dimension, "depth": grid.depth, "root": TransformationFactory.cube_document(grid.root)}

    @classmethod
    def to_document(cls, obj: Any, gamma: Optional[float] = None) -> Dict:
        """
        The JSON mirror of a domain object; floats are kept as Python floats, whose JSON
        representation round-trips exactly.

        Raises:
            ValueError: For objects without a document form.
        """
        if isinstance(obj, DyadicCube):
            return cls.cube_document(obj)
        if isinstance(obj, (Weight, DyadicStepFunction)):
            return {**cls._grid_document(obj.grid), "values": [float(v) for v in obj.values]}
        if isinstance(obj, ShiftCoefficients):
            entries = [{"cube": cls.cube_document(cube), "value": float(value)} for cube, value in obj.items()]
            return {**cls._grid_document(obj.grid), "entries": entries}
        if isinstance(obj, SparseFamily):
            return {
                **cls._grid_document(obj.grid),
                "gamma": float(obj.gamma if gamma is None else gamma),
                "cubes": [cls.cube_document(cube) for cube in obj.cubes],
                "major_subsets": [[int(cell) for cell in obj.major_subsets.get(cube, ())] for cube in obj.cubes],
            }
        raise ValueError(f"No document form for {type(obj).__name__}.")
