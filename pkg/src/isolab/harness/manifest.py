"""
YAML and JSON workload manifests.
Validates manifest data against a schema and converts it to a Workload.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import jsonschema
import yaml
from jsonschema import validate

from isolab.harness.workloads import Workload, parse_workload
from isolab.shared.constants import ErrorMessages, WorkloadKeywords
from isolab.shared.errors import WorkloadError

logger = logging.getLogger(__name__)


class WorkloadManifestLoader:
    """Handles workload manifest validation and conversion"""

    def __init__(self):
        self.schema = self._build_manifest_schema()

    def _build_manifest_schema(self):
        """Build the manifest validation schema"""
        steps = {
            "oneOf": [
                {"type": "string"},
                {"type": "array", "items": {"type": "string"}, "minItems": 1},
            ]
        }
        return {
            "type": "object",
            "required": ["transactions"],
            "additionalProperties": False,
            "properties": {
                "name": {"type": "string"},
                "description": {"type": "string"},
                "universe": {"type": "array", "items": {"type": "string"}},
                "initial": {
                    "type": "object",
                    "additionalProperties": {"type": "integer"},
                },
                "predicates": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "items": {"type": "string"}},
                },
                "check": {"type": "string"},
                "schedule": {
                    "oneOf": [
                        {"type": "string"},
                        {"type": "array", "items": {"type": "integer", "minimum": 1}},
                    ]
                },
                "transactions": {
                    "type": "object",
                    "minProperties": 1,
                    "propertyNames": {"pattern": "^[1-9][0-9]*$"},
                    "additionalProperties": steps,
                },
            },
        }

    def validate_manifest_data(self, manifest_data: dict) -> tuple[bool, str | None]:
        """Validate the manifest data against the schema"""
        try:
            validate(instance=manifest_data, schema=self.schema)
            return True, None
        except jsonschema.exceptions.ValidationError as e:
            return False, e.message

    def to_workload_text(self, manifest_data: dict) -> str:
        """Translate validated manifest data to the line-oriented workload format"""
        lines = []
        if "name" in manifest_data:
            lines.append(f"{WorkloadKeywords.NAME} {manifest_data['name']}")
        if "description" in manifest_data:
            lines.append(f"{WorkloadKeywords.DESCRIBE} {manifest_data['description']}")
        if "universe" in manifest_data:
            lines.append(f"{WorkloadKeywords.UNIVERSE} {{{','.join(manifest_data['universe'])}}}")
        for key, value in manifest_data.get("initial", {}).items():
            lines.append(f"{WorkloadKeywords.INIT} {key}={value}")
        for name, keys in manifest_data.get("predicates", {}).items():
            lines.append(f"{WorkloadKeywords.PRED} {name} = {{{','.join(keys)}}}")
        if "check" in manifest_data:
            lines.append(f"{WorkloadKeywords.CHECK} {manifest_data['check']}")

        schedule = manifest_data.get("schedule")
        if schedule is not None:
            if not isinstance(schedule, str):
                schedule = " ".join(str(slot) for slot in schedule)
            lines.append(f"{WorkloadKeywords.SCHEDULE} {schedule}")

        for txn, steps in manifest_data["transactions"].items():
            if not isinstance(steps, str):
                steps = " ".join(steps)
            lines.append(f"{WorkloadKeywords.TXN} {txn}: {steps}")
        return "\n".join(lines)

    def load(self, manifest_data: dict, name: str | None = None) -> Workload:
        is_valid, error = self.validate_manifest_data(manifest_data)
        if not is_valid:
            raise WorkloadError(ErrorMessages.INVALID_MANIFEST.format(error=error))
        return parse_workload(self.to_workload_text(manifest_data), name=name)


def load_workload_file(path: str | Path) -> Workload:
    """
    Load a workload from a text, YAML or JSON file.

    Args:
        path: Workload file; the file stem names workloads without a "name" entry

    Returns:
        Workload: the validated workload
    """
    path = Path(path)
    content = path.read_text(encoding="utf-8")
    suffix = path.suffix.lower()
    logger.info(f"Loading workload from {path}")

    if suffix in WorkloadKeywords.YAML_SUFFIXES:
        try:
            manifest_data = yaml.safe_load(content)
        except yaml.YAMLError as e:
            raise WorkloadError(ErrorMessages.INVALID_MANIFEST.format(error=e)) from e
    elif suffix == WorkloadKeywords.JSON_SUFFIX:
        try:
            manifest_data = json.loads(content)
        except json.JSONDecodeError as e:
            raise WorkloadError(ErrorMessages.INVALID_MANIFEST.format(error=e)) from e
    else:
        return parse_workload(content, name=path.stem)

    if not isinstance(manifest_data, dict):
        raise WorkloadError(ErrorMessages.UNSUPPORTED_WORKLOAD_FILE.format(path=path))
    # YAML turns unquoted transaction ids into integers
    if isinstance(manifest_data.get("transactions"), dict):
        manifest_data["transactions"] = {str(txn): steps for txn, steps in manifest_data["transactions"].items()}
    return WorkloadManifestLoader().load(manifest_data, name=path.stem)
