import logging
import os

import s3fs

from .base import ArtifactStore

logger = logging.getLogger(__name__)

CREDENTIAL_VARIABLES = {
    "aws_access_key_id": "ACCESS_KEY_ID",
    "aws_secret_access_key": "SECRET_ACCESS_KEY",
    "endpoint_url": "ENDPOINT",
}


def storage_options_from_env() -> dict[str, str | None]:
    """S3 credentials from ACCESS_KEY_ID, SECRET_ACCESS_KEY, ENDPOINT and REGION"""
    options = {option: os.getenv(variable) for option, variable in CREDENTIAL_VARIABLES.items()}
    options["region"] = os.getenv("REGION", "auto")
    return options


class S3Store(ArtifactStore):
    """Run artifacts under an ``s3://bucket/prefix`` location"""

    def __init__(self, root: str, storage_options: dict[str, str]):
        if not root.startswith("s3://"):
            raise ValueError(f"S3 location must start with 's3://', got '{root}'")
        super().__init__(root)
        self.fs = s3fs.S3FileSystem(
            key=storage_options["aws_access_key_id"],
            secret=storage_options["aws_secret_access_key"],
            endpoint_url=storage_options["endpoint_url"],
            client_kwargs={"region_name": storage_options["region"]},
        )

    @staticmethod
    def _key(path: str) -> str:
        # s3fs addresses objects as bucket/key
        return path.removeprefix("s3://")

    def contains(self, path: str) -> bool:
        return self.fs.isfile(self._key(path))

    def prepare(self) -> None:
        # prefixes appear with their first object
        logger.debug("Writing artifacts under %s", self.root)

    def delete(self, path: str) -> None:
        logger.debug("Deleting %s", path)
        self.fs.rm_file(self._key(path))

    def open(self, path: str, mode: str):
        if "b" in mode:
            return self.fs.open(self._key(path), mode)
        return self.fs.open(self._key(path), mode, encoding="utf-8", newline="\n")
