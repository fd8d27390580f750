"""
Named Registries
Lookup tables for metric builders, phi families and checks
"""
import logging
from typing import Callable, Dict, Generic, List, Optional, TypeVar

from app.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

T = TypeVar("T")


class Registry(Generic[T]):
    """Registry mapping names to factories"""

    def __init__(self, kind: str):
        self.kind = kind
        self._entries: Dict[str, T] = {}

    def register(self, name: str, entry: T) -> None:
        """Register an entry under name"""
        if name in self._entries:
            logger.debug(f"Replacing {self.kind} '{name}'")
        self._entries[name] = entry

    def get(self, name: str) -> Optional[T]:
        """Get entry by name"""
        return self._entries.get(name)

    def require(self, name: str, field: str) -> T:
        """
        Get entry by name or fail naming the config field

        Raises:
            ConfigError: unknown name
        """
        entry = self._entries.get(name)
        if entry is None:
            known = ", ".join(sorted(self._entries))
            raise ConfigError(field, f"unknown {self.kind} '{name}' (known: {known})")
        return entry

    def names(self) -> List[str]:
        return sorted(self._entries)

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def decorator(self, name: str) -> Callable[[T], T]:
        """Register the decorated callable under name"""

        def wrap(entry: T) -> T:
            self.register(name, entry)
            return entry

        return wrap
