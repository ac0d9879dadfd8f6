import json
import logging
from typing import Dict, List

from sparsedom.data_validations.data_validator import ConfigurationException, DocumentSchemaException


class Extractor:
    """
    A class for reading and validating JSON input documents (cubes, step functions, weights,
    shift coefficients and sparse families).
    """

    def __init__(self):
        """
        Initializes the Extractor with logging configuration.
        """
        self.logger = logging.getLogger(__name__)
        logging.basicConfig(
            level=logging.INFO,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )

    def read_data(self, source_type: str, source: str, schema_definition: List[str]) -> Dict:
        """
        Reads a JSON document and checks that it carries the required top-level keys.

        Args:
            source_type (str): 'file' for a JSON file; no other source is supported.
            source (str): File path of the JSON document.
            schema_definition (List[str]): Keys the document must contain.

        Returns:
            Dict: The parsed document.

        Raises:
            FileNotFoundError: If the file does not exist.
            DocumentSchemaException: If the file is not valid JSON, not an object, or misses keys.
            ConfigurationException: If the source type is not 'file'.
        """
        try:
            if source_type == "file":
                data = self._read_from_file(source)
            else:
                raise ConfigurationException(f"Invalid source_type '{source_type}'. Use 'file'.")

            self._validate_schema(data, schema_definition)
            self.logger.info(f"Document successfully extracted and validated for keys: {schema_definition}")
            return data

        except FileNotFoundError:
            self.logger.error(f"File not found: {source}")
            raise
        except json.JSONDecodeError as e:
            self.logger.error(f"Invalid JSON format in file: {source}")
            raise DocumentSchemaException(f"Invalid JSON format in file {source}: {e}") from e
        except (DocumentSchemaException, ConfigurationException) as e:
            self.logger.error(f"Validation Error: {e}")
            raise
        except Exception as e:
            self.logger.exception(f"Error reading or processing document: {e}")
            raise

    def _read_from_file(self, source: str) -> Dict:
        """
        Reads a JSON file.

        Raises:
            FileNotFoundError: If the file is not found.
            json.JSONDecodeError: If the file content is not valid JSON.
        """
        with open(source, "r", encoding="utf-8") as file:
            data = json.load(file)
        self.logger.info(f"Data successfully read from file: {source}")
        return data

    def _validate_schema(self, data, schema_definition: List[str]):
        """
        Validates that the document is a JSON object holding every required key.

        Raises:
            DocumentSchemaException: If the document is not an object or keys are missing.
        """
        if not isinstance(data, dict):
            raise DocumentSchemaException(f"Expected a JSON object, got {type(data).__name__}.")
        missing_keys = [key for key in schema_definition if key not in data]
        if missing_keys:
            raise DocumentSchemaException(f"Missing required keys: {missing_keys}")
        self.logger.info("Schema validation passed.")
