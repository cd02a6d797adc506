"""HTTP form of the cascade: edge triage and cloud grading services plus the replay client."""

from .client import CascadeClient, networked_replay
from .cloud import create_cloud_app
from .edge import create_edge_app
from .runner import ServiceThread, parse_address

__all__ = [
    "CascadeClient",
    "ServiceThread",
    "create_cloud_app",
    "create_edge_app",
    "networked_replay",
    "parse_address",
]
