"""
JSON file implementation of the metadata repository.
"""
import os
import tempfile
from pathlib import Path
from typing import Type, TypeVar

import structlog
from pydantic import BaseModel, ValidationError

from fpdiff.core.repositories.metadata_repository import MetadataRepository, PathLike
from fpdiff.exceptions import ConfigurationError, SchemaVersionError
from fpdiff.schemas.metadata import SCHEMA_VERSION, CampaignMetadata
from fpdiff.schemas.report import MergeDocument

logger = structlog.get_logger()

ModelT = TypeVar("ModelT", bound=BaseModel)


def dump_model(model: BaseModel) -> str:
    """Canonical text of a document; stable under load and dump."""
    return model.model_dump_json(indent=2) + "\n"


class JsonMetadataRepository(MetadataRepository):
    """UTF-8 JSON files written atomically."""

    def _write(self, model: BaseModel, path: PathLike) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(dump_model(model))
            os.replace(tmp_name, target)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise
        logger.info("Metadata written", path=str(target))
        return target

    def _read(self, model_type: Type[ModelT], path: PathLike) -> ModelT:
        source = Path(path)
        try:
            text = source.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigurationError(f"File not found: {source}") from None
        try:
            document = model_type.model_validate_json(text)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid document {source}", {"error": str(e)}) from None
        version = getattr(document, "schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(version, SCHEMA_VERSION)
        return document

    async def save(self, metadata: CampaignMetadata, path: PathLike) -> Path:
        return self._write(metadata, path)

    async def load(self, path: PathLike) -> CampaignMetadata:
        return self._read(CampaignMetadata, path)

    async def exists(self, path: PathLike) -> bool:
        return Path(path).is_file()

    async def save_merge(self, document: MergeDocument, path: PathLike) -> Path:
        return self._write(document, path)

    async def load_merge(self, path: PathLike) -> MergeDocument:
        return self._read(MergeDocument, path)
