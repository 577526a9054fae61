from pathlib import Path

from .base import ArtifactStore


class LocalStore(ArtifactStore):
    """Run artifacts in a local directory"""

    def contains(self, path: str) -> bool:
        return Path(path).is_file()

    def prepare(self) -> None:
        Path(self.root).mkdir(parents=True, exist_ok=True)

    def delete(self, path: str) -> None:
        Path(path).unlink(missing_ok=True)

    def open(self, path: str, mode: str):
        target = Path(path)
        if any(flag in mode for flag in "wax"):
            target.parent.mkdir(parents=True, exist_ok=True)
        if "b" in mode:
            return target.open(mode)
        # LF line endings on every platform
        return target.open(mode, encoding="utf-8", newline="\n")
