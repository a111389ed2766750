"""
Repository interfaces for campaign persistence.
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Union

from fpdiff.schemas.metadata import CampaignMetadata
from fpdiff.schemas.report import MergeDocument

PathLike = Union[str, Path]


class MetadataRepository(ABC):
    """Abstract store for campaign metadata and merge results."""

    @abstractmethod
    async def save(self, metadata: CampaignMetadata, path: PathLike) -> Path:
        """Persist campaign metadata."""
        pass

    @abstractmethod
    async def load(self, path: PathLike) -> CampaignMetadata:
        """Load and validate campaign metadata."""
        pass

    @abstractmethod
    async def exists(self, path: PathLike) -> bool:
        pass

    @abstractmethod
    async def save_merge(self, document: MergeDocument, path: PathLike) -> Path:
        """Persist a merge result."""
        pass

    @abstractmethod
    async def load_merge(self, path: PathLike) -> MergeDocument:
        """Load and validate a merge result."""
        pass
