"""
Factory functions wiring services together.
"""
from pathlib import Path
from typing import List, Optional

from fpdiff.config import settings
from fpdiff.core.repositories.metadata_repository import MetadataRepository
from fpdiff.core.services.campaign import CampaignService
from fpdiff.core.services.harness import Harness, load_registry
from fpdiff.core.services.oracle import Interpreter, MathBackend, get_math_backend
from fpdiff.infrastructure.storage.json_metadata_repository import JsonMetadataRepository
from fpdiff.schemas.compiler import CompilerSpec


def get_metadata_repository() -> MetadataRepository:
    """Get metadata repository instance."""
    return JsonMetadataRepository()


def get_registry(path: Optional[str] = None) -> List[CompilerSpec]:
    """Compiler registry from the given path, the configured one, or the defaults."""
    return load_registry(path or settings.REGISTRY_PATH)


def get_harness(
    work_dir: Optional[str] = None, jobs: Optional[int] = None, timeout: Optional[float] = None
) -> Harness:
    return Harness(
        work_dir=Path(work_dir or settings.WORK_DIR),
        jobs=jobs or settings.DEFAULT_JOBS,
        timeout=timeout,
    )


def get_campaign_service(
    registry_path: Optional[str] = None,
    work_dir: Optional[str] = None,
    jobs: Optional[int] = None,
    timeout: Optional[float] = None,
) -> CampaignService:
    """Get campaign service instance."""
    return CampaignService(
        harness=get_harness(work_dir, jobs, timeout),
        registry=get_registry(registry_path),
        repository=get_metadata_repository(),
        hipify_path=settings.HIPIFY_PATH,
    )


def get_math_backend_instance(name: Optional[str] = None) -> MathBackend:
    return get_math_backend(name or settings.MATH_BACKEND)


def get_interpreter(array_length: int, math_backend: Optional[str] = None) -> Interpreter:
    return Interpreter(get_math_backend_instance(math_backend), array_length)


def get_relative_epsilon() -> Optional[float]:
    """Tolerance for Number comparisons; None means bit-exact."""
    if settings.NUMBER_EQUALITY == "relative":
        return settings.RELATIVE_EPSILON
    return None
