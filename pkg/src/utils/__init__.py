"""Utilities for the synergies command-line tool."""

from .config import ConfigManager, RunConfig
from .file_storage import FileStorageManager

__all__ = ["ConfigManager", "FileStorageManager", "RunConfig"]
