from .database import RunDatabase

__all__ = [
    "RunDatabase",
]
