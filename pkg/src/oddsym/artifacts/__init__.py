from .base import ArtifactStore
from .local_store import LocalStore
from .s3_store import S3Store, storage_options_from_env


def open_store(location: str, storage_options: dict[str, str] | None = None) -> ArtifactStore:
    """Local directory or ``s3://bucket/prefix`` store for run artifacts.

    Local directories are created; S3 credentials default to the environment.
    """
    if location.startswith("s3://"):
        store = S3Store(location, storage_options or storage_options_from_env())
    else:
        store = LocalStore(location)
    store.prepare()
    return store


__all__ = ["ArtifactStore", "LocalStore", "S3Store", "open_store", "storage_options_from_env"]
