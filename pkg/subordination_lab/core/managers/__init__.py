"""Core Managers Package"""

from .replicate_manager import ReplicateManager

__all__ = [
    'ReplicateManager'
]
