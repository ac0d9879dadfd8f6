import logging
import numbers
from typing import Dict, List

from sparsedom.data_validations.data_validator import DocumentSchemaException


class DataQuality:
    """
    A utility class to validate JSON input documents against the schema definitions.
    """

    def __init__(self, schema_definitions: Dict):
        """
        Initializes the DataQuality object with schema definitions.

        Args:
            schema_definitions (Dict): Document schemas loaded from suite_definitions.yml.
        """
        self.schema_definitions = schema_definitions
        self.logger = logging.getLogger(__name__)
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )

    def _fail(self, message: str):
        self.logger.error(message)
        raise DocumentSchemaException(message)

    def validate_integer_field(self, document: Dict, field_name: str, field_def: Dict):
        """
        Validates that a field holds an integer within the optional min/max bounds.

        Raises:
            DocumentSchemaException: If the value is not an integer or out of range.
        """
        value = document[field_name]
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            self._fail(f"Field '{field_name}' must be an integer, got {value!r}.")
        if "min" in field_def and value < field_def["min"]:
            self._fail(f"Field '{field_name}' must be at least {field_def['min']}, got {value}.")
        if "max" in field_def and value > field_def["max"]:
            self._fail(f"Field '{field_name}' must be at most {field_def['max']}, got {value}.")

    def validate_float_field(self, document: Dict, field_name: str):
        value = document[field_name]
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            self._fail(f"Field '{field_name}' must be a number, got {value!r}.")

    def validate_list_field(self, document: Dict, field_name: str, field_def: Dict):
        """
        Validates a list field: element types, and its length when the definition names
        another field holding the expected length.

        Args:
            document (Dict): The document.
            field_name (str): The list field.
            field_def (Dict): Its definition; type is one of integer[], float[], cube[], entry[].

        Raises:
            DocumentSchemaException: If the field is not a list or an element does not match.
        """
        values = document[field_name]
        if not isinstance(values, list):
            self._fail(f"Field '{field_name}' must be a list, got {type(values).__name__}.")
        if "length" in field_def:
            expected = document.get(field_def["length"])
            if len(values) != expected:
                self._fail(f"Field '{field_name}' must have {expected} entries, got {len(values)}.")

        item_type = field_def["type"][:-2]
        for position, item in enumerate(values):
            if item_type in ("cube", "entry"):
                self.check_data_quality_document(item, item_type)
                continue
            wrapped = {f"{field_name}[{position}]": item}
            if item_type == "integer":
                self.validate_integer_field(wrapped, f"{field_name}[{position}]", {})
            else:
                self.validate_float_field(wrapped, f"{field_name}[{position}]")

    def check_data_quality_document(self, document: Dict, schema_name: str):
        """
        Validates a document based on the schema definition of the given name.

        Args:
            document (Dict): The parsed JSON document.
            schema_name (str): One of the schema names (cube, function, weight, coefficients,
                family, entry).

        Raises:
            DocumentSchemaException: If the schema is unknown or validation fails for any field.
        """
        schema: List[Dict] = self.schema_definitions.get(schema_name)
        if not schema:
            self._fail(f"No schema found for document '{schema_name}'.")
        if not isinstance(document, dict):
            self._fail(f"A '{schema_name}' document must be a JSON object, got {type(document).__name__}.")

        for field_def in schema:
            field_name = field_def["name"]
            field_type = field_def["type"].lower()
            if field_name not in document or document[field_name] is None:
                if field_def.get("required", True):
                    self._fail(f"Missing required field '{field_name}' in '{schema_name}' document.")
                continue

            if field_type == "integer":
                self.validate_integer_field(document, field_name, field_def)
            elif field_type == "float":
                self.validate_float_field(document, field_name)
            elif field_type.endswith("[]"):
                self.validate_list_field(document, field_name, field_def)
            else:
                self.check_data_quality_document(document[field_name], field_type)

        self.logger.debug(f"All validations passed for document '{schema_name}'.")
