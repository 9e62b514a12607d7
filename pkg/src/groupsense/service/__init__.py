from .app import create_app, resolve_data_dir
from .store import FileStore

__all__ = ["create_app", "resolve_data_dir", "FileStore"]
